"""Quadrature against omega, discrete dd^c, pairings and the bound constants.

``omega`` is the Fubini-Study area normalized to total mass 1. The density of
``dd^c phi`` against omega is ``(1+|zeta|^2)^2 / 2 * Laplacian(phi)`` in a
chart ``zeta``, which gives ``dd^c(-log[., inf]) = omega`` away from infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import dynamics
from .errors import NonfiniteNode, NonfiniteStencil
from .sphere import SphereGrid

__all__ = [
    "SphereGrid", "TestFunction", "AtomicMeasure", "integrate_omega",
    "ddc_density", "pair_atomic", "pair_potential", "pair_muf", "h_field",
    "bump", "builtin_test_functions", "c_bf_estimate", "c_bf_closed_form",
    "CBfEstimate", "c0_star_integral", "c0_constants", "C0Constants",
]

DEFAULT_STEP = 1e-4


# -- test functions ----------------------------------------------------------

@dataclass(eq=False)
class TestFunction:
    """A C^2 function on the sphere. ``func`` takes complex arrays; infinite
    entries stand for the point at infinity."""

    __test__ = False  # not a pytest class

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.asarray(self.func(z), dtype=np.float64)
        return float(out) if out.ndim == 0 else out

    def ddc_density(self, grid: SphereGrid, h: float = DEFAULT_STEP) -> np.ndarray:
        key = (grid, h)
        if key not in self._cache:
            self._cache[key] = ddc_density(self, grid, h)
        return self._cache[key]

    def sup_ddc(self, grid: SphereGrid, h: float = DEFAULT_STEP) -> float:
        return float(np.max(np.abs(self.ddc_density(grid, h))))


def _chordal_sq_to(z, a):
    """``[z, a]^2`` with infinite entries of ``z`` treated as infinity."""
    zi = np.isinf(z)
    zs = np.where(zi, 0, z)
    az = np.abs(zs) ** 2
    if np.isinf(a):
        return np.where(zi, 0.0, 1.0 / (1.0 + az))
    aa = abs(a) ** 2
    return np.where(zi, 1.0 / (1.0 + aa), np.abs(zs - a) ** 2 / ((1 + az) * (1 + aa)))


def _point_label(a) -> str:
    a = complex(a)
    if np.isinf(a):
        return "inf"
    if a.imag == 0:
        return f"{a.real:g}"
    if a.real == 0:
        return "i" if a.imag == 1 else f"{a.imag:g}i"
    return f"{a.real:g}{a.imag:+g}i"


def bump(a: complex, s: float) -> TestFunction:
    """``exp(-[z, a]^2 / s^2)``."""
    if s < 0.2:
        raise ValueError("bump width must be at least 0.2")
    return TestFunction(f"bump_{_point_label(a)}_s{s:g}", lambda z: np.exp(-_chordal_sq_to(z, a) / s ** 2))


def _x1(z):
    zi = np.isinf(z)
    zs = np.where(zi, 0, z)
    return np.where(zi, 0.0, 2 * zs.real / (1 + np.abs(zs) ** 2))


def _x3(z):
    zi = np.isinf(z)
    zs = np.where(zi, 0, z)
    a = np.abs(zs) ** 2
    return np.where(zi, 1.0, (a - 1) / (a + 1))


def builtin_test_functions() -> list[TestFunction]:
    """Bumps at five points of the sphere plus two coordinate functions."""
    fns = [bump(a, s) for a, s in [(0, 0.5), (-1, 0.4), (-2, 0.3), (1j, 0.5),
                                   (complex(np.inf), 0.5)]]
    fns.append(TestFunction("x1", _x1))
    fns.append(TestFunction("x3", _x3))
    return fns


# -- quadrature --------------------------------------------------------------

def integrate_omega(phi, grid: SphereGrid) -> float:
    """Integral against omega: the plain mean over the ``(u, theta)`` nodes.

    ``phi`` may be a callable or an array of node values.
    """
    vals = phi(grid.z) if callable(phi) else phi
    vals = np.asarray(vals, dtype=np.float64)
    if vals.shape != grid.shape:
        vals = np.broadcast_to(vals, grid.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NonfiniteNode(int(np.flatnonzero(bad)[0]))
    return grid.mean(vals)


def ddc_density(phi, grid: SphereGrid, h: float = DEFAULT_STEP) -> np.ndarray:
    """Density of ``dd^c phi`` against omega at each node.

    Five-point Laplacian in the chart ``zeta = z`` for ``|z| <= 1`` and
    ``zeta = 1/z`` outside.
    """
    z = grid.z
    inner = np.abs(z) <= 1.0
    zeta = np.where(inner, z, 1.0 / z)

    def val(x):
        return np.asarray(phi(np.where(inner, x, 1.0 / x)), dtype=np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        lap = (val(zeta + h) + val(zeta - h) + val(zeta + 1j * h) + val(zeta - 1j * h)
               - 4.0 * val(zeta)) / h ** 2
    dens = 0.5 * (1.0 + np.abs(zeta) ** 2) ** 2 * lap
    bad = ~np.isfinite(dens)
    if bad.any():
        raise NonfiniteStencil(int(np.flatnonzero(bad)[0]))
    dens.setflags(write=False)
    return dens


def _ddc(phi, grid, h):
    if isinstance(phi, TestFunction):
        return phi.ddc_density(grid, h)
    return ddc_density(phi, grid, h)


# -- measures and pairings ---------------------------------------------------

@dataclass(frozen=True)
class AtomicMeasure:
    """Finite sum of weighted point masses; ``mass`` is the declared total."""

    atoms: np.ndarray
    weights: np.ndarray
    mass: float
    label: str = ""

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.complex128).ravel()
        weights = np.broadcast_to(np.asarray(self.weights, dtype=np.float64), atoms.shape).copy()
        if np.any(weights <= 0):
            raise ValueError("atom weights must be positive")
        if not math.isclose(float(weights.sum()), self.mass, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(f"weights sum to {weights.sum()}, declared mass {self.mass}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_rootset(cls, roots, weight: float = 1.0, label: str = "") -> "AtomicMeasure":
        """Atoms at the roots, each weighted by ``weight`` times its multiplicity."""
        w = weight * np.asarray(roots.multiplicity, dtype=np.float64)
        return cls(roots.roots, w, float(w.sum()), label)


def pair_atomic(phi, m: AtomicMeasure) -> float:
    vals = np.asarray(phi(m.atoms), dtype=np.float64)
    return float(np.dot(m.weights, vals))


def pair_potential(phi, grid: SphereGrid, potential: np.ndarray, mass: float,
                   h: float = DEFAULT_STEP, log_pole_at_zero: int = 0) -> float:
    """``<phi, mass * omega + dd^c potential>`` on the grid.

    ``log_pole_at_zero = k`` declares ``potential ~ k log|z|`` near 0. The
    first ring of nodes then uses the cell average of ``log r`` instead of its
    midpoint value, which restores second-order accuracy there. (The midpoint
    sum of ``log u`` over ``N`` cells overshoots the integral by ``log(2)/(2N)``.)
    """
    dens = _ddc(phi, grid, h)
    total = mass * integrate_omega(phi, grid) + integrate_omega(np.asarray(potential) * dens, grid)
    if log_pole_at_zero:
        shift = -0.25 * math.log(2.0)
        total += log_pole_at_zero * shift * float(np.mean(dens[0])) / grid.n_u
    return total


@lru_cache(maxsize=8)
def h_field(d: int, grid: SphereGrid, n_max: int = dynamics.DEFAULT_N_MAX):
    """Cached ``h = g + log[., inf]`` on the grid (so ``mu_f = omega + dd^c h``)."""
    return dynamics.GreenField.compute("h_param", d, grid, n_max=n_max)


def pair_muf(phi, d: int, grid: SphereGrid, h: float = DEFAULT_STEP,
             field=None) -> float:
    """``<phi, mu_f>`` through ``mu_f = omega + dd^c h``."""
    field = field if field is not None else h_field(d, grid)
    return pair_potential(phi, grid, field.values, 1.0, h)


# -- C_{B_f} -----------------------------------------------------------------

def _lift_log_norm(d, lam, z):
    """``log||f~_lam(p)||`` at ``p = (1, z)/|(1, z)|``, i.e.
    ``log([z, inf]^d / [f_lam(z), inf])``."""
    fz = z ** d + lam
    return 0.5 * np.log1p(np.abs(fz) ** 2) - 0.5 * d * np.log1p(np.abs(z) ** 2)


@dataclass(frozen=True)
class CBfEstimate:
    value: float
    samples: int
    sphere_nodes: int
    lam: complex
    z: complex

    def as_dict(self) -> dict:
        return {"value": self.value, "samples": self.samples,
                "sphere_nodes": self.sphere_nodes,
                "argmax_lam": [self.lam.real, self.lam.imag],
                "argmax_z": [self.z.real, self.z.imag]}


def c_bf_estimate(d: int, samples: int = 1000, sphere_nodes: int = 4096,
                  seed: int = 1, refine_steps: int = 40) -> CBfEstimate:
    """Sampled lower estimate of ``sup |log||f~_lam(p)|||`` over boundary
    parameters and unit vectors ``p``.

    ``sphere_nodes`` nodes of a square ``(u, theta)`` grid are scanned per
    parameter, then each parameter's best node is refined by a shrinking
    pattern search. ``p = (0, 1)`` contributes 0.
    """
    lams = dynamics.boundary_sample(d, samples, seed)
    side = max(2, int(round(math.sqrt(sphere_nodes))))
    grid = SphereGrid(side, side)
    z = grid.z.ravel()
    best_val = np.empty(samples)
    best_z = np.empty(samples, np.complex128)
    chunk = max(1, 2 ** 22 // z.size)
    for s in range(0, samples, chunk):
        lam = lams[s:s + chunk, None]
        v = np.abs(_lift_log_norm(d, lam, z[None, :]))
        k = np.argmax(v, axis=1)
        best_val[s:s + chunk] = v[np.arange(v.shape[0]), k]
        best_z[s:s + chunk] = z[k]
    # pattern search in the chart, all samples at once
    step = np.maximum(0.5, np.abs(best_z)) * 2 * np.pi / side
    moves = np.array([1, -1, 1j, -1j])
    for _ in range(refine_steps):
        cand = best_z[:, None] + step[:, None] * moves[None, :]
        v = np.abs(_lift_log_norm(d, lams[:, None], cand))
        k = np.argmax(v, axis=1)
        vk = v[np.arange(samples), k]
        up = vk > best_val
        best_val = np.where(up, vk, best_val)
        best_z = np.where(up, cand[np.arange(samples), k], best_z)
        step = np.where(up, step, 0.5 * step)
    i = int(np.argmax(best_val))
    return CBfEstimate(float(best_val[i]), samples, grid.size, complex(lams[i]), complex(best_z[i]))


def c_bf_closed_form(d: int, lam) -> float:
    """Oracle for ``sup_p |log||f~_lam(p)|||`` at one parameter.

    With ``|p_0| = cos t`` and ``|p_1| = sin t`` the phases can be aligned or
    opposed freely, so the extreme squared norms are
    ``cos(t)^(2d) + (sin(t)^d +- |lam| cos(t)^d)^2``; both 1-D problems are
    solved on a dense profile and polished by bounded minimization.
    """
    from scipy.optimize import minimize_scalar

    a = abs(lam)

    def sq(t, sign):
        c, s = np.cos(t), np.sin(t)
        return c ** (2 * d) + (s ** d + sign * a * c ** d) ** 2

    best = 0.0
    t = np.linspace(0.0, np.pi / 2, 20001)
    h = t[1] - t[0]
    for sign, pick in ((1.0, np.argmax), (-1.0, np.argmin)):
        v = sq(t, sign)
        k = int(pick(v))
        obj = (lambda x: -sq(x, sign)) if sign > 0 else (lambda x: sq(x, sign))
        res = minimize_scalar(obj, bounds=(max(0.0, t[k] - h), min(np.pi / 2, t[k] + h)),
                              method="bounded", options={"xatol": 1e-13})
        ext = max(v[k], -res.fun) if sign > 0 else min(v[k], res.fun)
        best = max(best, abs(0.5 * math.log(ext)))
    return float(best)


# -- C_0 and C_0* ------------------------------------------------------------

def c0_star_integral(rho: float, method: str = "midpoint", nodes: int = 2 ** 22) -> float:
    """``int_0^inf 2r/(1+r^2)^2 log+(r/rho) dr``.

    ``midpoint`` is the ``u = r^2/(1+r^2)`` substitution on a midpoint grid,
    ``adaptive`` is scipy's quad in ``r`` and ``closed`` is
    ``log(1 + rho^-2)/2``.
    """
    if method == "closed":
        return 0.5 * math.log1p(rho ** -2)
    if method == "adaptive":
        from scipy.integrate import quad
        f = lambda r: 2 * r / (1 + r * r) ** 2 * math.log(r / rho)
        a, _ = quad(f, rho, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        b, _ = quad(f, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        return a + b
    if method != "midpoint":
        raise ValueError(f"unknown method {method!r}")
    u0 = rho * rho / (1 + rho * rho)
    # integrate only over u > u0, splitting the first cell exactly
    u = (np.arange(nodes) + 0.5) / nodes
    u = u[u > u0]
    vals = 0.5 * np.log(u / (1 - u)) - math.log(rho)
    return float(np.sum(vals) / nodes)


@dataclass(frozen=True)
class C0Constants:
    c0: float
    c0_star: float
    inradius: float
    h1_integral: float
    error_bar: float
    grid: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@lru_cache(maxsize=16)
def c0_constants(d: int, grid: SphereGrid = SphereGrid(1024, 1024),
                 exclusion: float = 1e-3) -> C0Constants:
    """``C_0* = pi + int log+(r/rho) omega`` with ``rho`` the inradius of
    ``H_1``, and ``C_0 = C_0* + int_{H_1} G_{H_1}(., 0) omega``.

    Nodes within chordal distance ``exclusion`` of 0 are dropped. The dropped
    mass is at most ``eps^2 (1/2 - log eps)``, returned as ``error_bar``
    together with the 1-D quadrature error estimate.
    """
    rho = dynamics.h1_inradius(d)
    c_star_int = c0_star_integral(rho)
    quad_err = abs(c_star_int - c0_star_integral(rho, nodes=2 ** 21))
    c0_star = math.pi + c_star_int
    z = grid.z
    keep = (dynamics.chordal(z, 0) >= exclusion) & (np.abs(z) < 2.0)
    g = np.zeros(grid.shape)
    mu = np.abs(dynamics.fixed_multiplier(d, z[keep]))
    inside = mu < 1.0
    gk = np.zeros(mu.shape)
    gk[inside] = -np.log(mu[inside]) / (d - 1)
    g[keep] = gk
    h1_int = integrate_omega(g, grid)
    eps = exclusion
    err = eps * eps * (0.5 - math.log(eps)) + quad_err
    return C0Constants(c0_star + h1_int, c0_star, rho, h1_int, err, grid.label)
