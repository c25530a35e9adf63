"""Experiment drivers that turn the equidistribution inequalities into rows.

Each row compares a measured discrepancy with the explicit bound built from
the computed constants and records the margin, negative or not.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dynamics, exactpoly, ntheory, rootfind
from .config import override, settings
from .measures import (AtomicMeasure, TestFunction, builtin_test_functions,
                       c0_constants, c_bf_estimate, h_field, integrate_omega,
                       pair_atomic, pair_muf, pair_potential)
from .sphere import SphereGrid

CSV_HEADER = ("d", "n", "phi", "discrepancy", "bound", "sup_ddc", "c_bf", "c0",
              "c0_star", "t_n", "t_n_star", "margin", "status", "runtime_ms")


@dataclass(frozen=True)
class Constants:
    """Measured constants with the provenance every row must carry."""

    d: int
    c_bf_lower: float
    safety: float
    c0: float
    c0_star: float
    h1_inradius: float
    c0_error_bar: float
    grid: str
    seed: int
    samples: int
    sphere_nodes: int
    c_bf_argmax: dict = field(default_factory=dict)

    @property
    def c_bf_used(self) -> float:
        return self.safety * self.c_bf_lower

    def t_n(self, n: int) -> float:
        return ntheory.t_n(self.d, n, self.c_bf_used)

    def t_n_star(self, n: int) -> float:
        return ntheory.t_n_star(self.d, n, self.c_bf_used)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["c_bf_used"] = self.c_bf_used
        return out


def compute_constants(d: int, grid: SphereGrid, seed: int = 1, safety: float = 1.5,
                      samples: int = 1000, sphere_nodes: int = 4096) -> Constants:
    est = c_bf_estimate(d, samples, sphere_nodes, seed)
    c0 = c0_constants(d, grid)
    return Constants(d, est.value, safety, c0.c0, c0.c0_star, c0.inradius,
                     c0.error_bar, grid.label, seed, samples, est.sphere_nodes,
                     est.as_dict())


@dataclass
class BoundReport:
    d: int
    n: int
    phi: str
    discrepancy: float
    bound: float
    sup_ddc: float
    c_bf: float
    c0: float
    c0_star: float
    t_n: float
    t_n_star: float
    margin: float
    status: str
    runtime_ms: int
    measure: str = ""

    @classmethod
    def make(cls, const: Constants, n: int, phi: str, discrepancy: float, bound: float,
             sup_ddc: float, measure: str, started: float | None) -> "BoundReport":
        margin = bound - discrepancy
        status = "OK" if margin >= 0 else "NEGATIVE_MARGIN"
        ms = 0 if started is None else int(round(1000 * (time.perf_counter() - started)))
        return cls(const.d, n, phi, discrepancy, bound, sup_ddc, const.c_bf_used,
                   const.c0, const.c0_star, const.t_n(n), const.t_n_star(n),
                   margin, status, ms, measure)

    @classmethod
    def skipped(cls, const: Constants, n: int, phi: str, measure: str, reason: str) -> "BoundReport":
        nan = float("nan")
        return cls(const.d, n, phi, nan, nan, nan, const.c_bf_used, const.c0,
                   const.c0_star, const.t_n(n), const.t_n_star(n), nan,
                   f"SKIPPED:{reason}", 0, measure)

    def csv_row(self) -> list:
        return [getattr(self, k) if not isinstance(getattr(self, k), float)
                else repr(getattr(self, k)) for k in CSV_HEADER]


def rows_to_csv(rows: list[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def rows_to_json(rows: list[BoundReport], provenance: dict) -> str:
    return json.dumps({"provenance": provenance, "rows": [asdict(r) for r in rows]},
                      indent=2, allow_nan=True)


def _clock(timing: bool):
    return time.perf_counter() if timing else None


def _raised_caps(degree: int):
    return override(root_cap=max(settings.root_cap, degree))


def select_test_functions(names: list[str] | None = None) -> list[TestFunction]:
    fns = builtin_test_functions()
    if not names:
        return fns
    by_name = {f.name: f for f in fns}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise KeyError(f"unknown test functions {missing}; choose from {sorted(by_name)}")
    return [by_name[n] for n in names]


# -- drivers -----------------------------------------------------------------

def centers(d: int, n: int) -> rootfind.RootSet:
    """Roots of ``F_n`` (parameters with a superattracting ``n``-cycle)."""
    return rootfind.superattracting_parameters(d, n)


def theorem1(d: int, ns, grid: SphereGrid, const: Constants,
             phis: list[TestFunction] | None = None, l1: bool = True,
             timing: bool = True, raise_caps: bool = False) -> list[BoundReport]:
    """Rows for the discrepancy of ``F_n^* delta_0`` against ``d^(n-1) mu_f``.

    ``discrepancy = (d-1) |sum_{F_n = 0} phi - d^(n-1) <phi, mu_f>|`` and
    ``bound = sup|dd^c phi / omega| (d-1)(t_n + C_0)``. With ``l1`` each ``n``
    also gets a row comparing ``int |log|F_n| - d^(n-1) g| omega`` with
    ``t_n + C_0``.
    """
    phis = phis or builtin_test_functions()
    hf = h_field(d, grid)
    pm = {f.name: pair_muf(f, d, grid, field=hf) for f in phis}
    sup = {f.name: f.sup_ddc(grid) for f in phis}
    g = None
    rows = []
    for n in ns:
        started = _clock(timing)
        degree = d ** (n - 1)
        if raise_caps:
            with _raised_caps(degree):
                roots = centers(d, n)
        else:
            roots = centers(d, n)
        solve_ms = None if started is None else time.perf_counter() - started
        for f in phis:
            t0 = _clock(timing)
            s = float(np.sum(f(roots.roots)))
            disc = (d - 1) * abs(s - degree * pm[f.name])
            bound = sup[f.name] * (d - 1) * (const.t_n(n) + const.c0)
            rows.append(BoundReport.make(const, n, f.name, disc, bound, sup[f.name],
                                         f"F_{n}^*delta_0", t0))
        if solve_ms is not None:
            rows[-len(phis)].runtime_ms += int(round(1000 * solve_ms))
        if l1:
            t0 = _clock(timing)
            if g is None:
                g = hf.values + 0.5 * np.log1p(np.abs(grid.z) ** 2)
            val = l1_deviation(d, n, grid, g)
            rows.append(BoundReport.make(const, n, "L1", val, const.t_n(n) + const.c0,
                                         float("nan"), "log|F_n|-d^(n-1)g", t0))
    return rows


def l1_deviation(d: int, n: int, grid: SphereGrid, g: np.ndarray | None = None) -> float:
    """``int |log|F_n| - d^(n-1) g| omega`` on the grid."""
    if g is None:
        g = h_field(d, grid).values + 0.5 * np.log1p(np.abs(grid.z) ** 2)
    lf = dynamics.log_abs_fn(d, n, grid.z)
    return integrate_omega(np.abs(lf - d ** (n - 1) * g), grid)


def per_star_measure(d: int, n: int) -> AtomicMeasure:
    """``Per*(n, 0)``: zeros of ``pstar_at_zero`` counted with multiplicity
    (each zero of the dynatomic factor carries weight ``d - 1``)."""
    roots = rootfind.roots_of_exactpoly(exactpoly.pstar_at_zero(d, n))
    return AtomicMeasure.from_rootset(roots, 1.0, f"Per*({n},0)")


def theorem2(d: int, ns, rs, grid: SphereGrid, const: Constants,
             phis: list[TestFunction] | None = None,
             timing: bool = True) -> list[BoundReport]:
    """Rows for ``Per*(n, 0)`` and its circle averages against ``nu(n) T_f``.

    ``T_f = (d-1)/d mu_f``. The atomic rows use the bound
    ``sup|dd^c phi| (t_n* + (d-1) C_0*)``. The averaged measure for each
    radius ``r`` is paired through its potential, the closed-form circle
    average of ``log|P*_n(., r e^{it})|``, with bound
    ``sup|dd^c phi| (t_n* + 2(d-1) C_0*)``.
    """
    phis = phis or builtin_test_functions()
    hf = h_field(d, grid)
    pm = {f.name: pair_muf(f, d, grid, field=hf) for f in phis}
    sup = {f.name: f.sup_ddc(grid) for f in phis}
    log_inf = -0.5 * np.log1p(np.abs(grid.z) ** 2)
    rows = []
    for n in ns:
        if n < 2:
            for f in phis:
                rows.append(BoundReport.skipped(const, n, f.name, f"Per*({n},0)", "n<2"))
            continue
        nu = ntheory.nu(d, n)
        mass = (d - 1) * nu // d
        target = {k: nu * (d - 1) / d * v for k, v in pm.items()}
        per = per_star_measure(d, n)
        for f in phis:
            t0 = _clock(timing)
            disc = abs(pair_atomic(f, per) - target[f.name])
            bound = sup[f.name] * (const.t_n_star(n) + (d - 1) * const.c0_star)
            rows.append(BoundReport.make(const, n, f.name, disc, bound, sup[f.name],
                                         f"Per*({n},0)", t0))
        pots = dynamics.averaged_log_pstar_grid(d, n, grid.z, list(rs))
        for r, pot in zip(rs, pots):
            pot = pot + mass * log_inf
            for f in phis:
                t1 = _clock(timing)
                disc = abs(pair_potential(f, grid, pot, mass) - target[f.name])
                bound = sup[f.name] * (const.t_n_star(n) + 2 * (d - 1) * const.c0_star)
                rows.append(BoundReport.make(const, n, f"{f.name}@r={r:g}", disc, bound,
                                             sup[f.name], f"avg Per*({n},r={r:g})",
                                             t1))
    return rows


def constants_table(const: Constants, n_max: int) -> dict:
    out = const.as_dict()
    out["t_n"] = {n: const.t_n(n) for n in range(1, n_max + 1)}
    out["t_n_star"] = {n: const.t_n_star(n) for n in range(1, n_max + 1)}
    return out


def negative_rows(rows: list[BoundReport]) -> list[BoundReport]:
    return [r for r in rows if isinstance(r.margin, float) and r.margin < 0]


def provenance(command: str, const: Constants | None, **extra) -> dict:
    from . import __version__

    out = {"command": command, "version": __version__,
           "root_cap": settings.root_cap, **extra}
    if const is not None:
        out["constants"] = const.as_dict()
    return out

