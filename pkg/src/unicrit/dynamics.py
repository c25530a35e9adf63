"""Dynamics of ``f_lam(z) = z**d + lam``.

Chordal geometry, dynamical and parameter Green functions, boundary sampling
of the connectedness locus, classification of periodic points and the
multiplier quantities ``log|P*_n(lam, w)|``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numba
import numpy as np
from scipy.spatial import cKDTree

from . import ntheory
from ._kernels import ipow
from .config import settings
from .errors import (BisectionFailed, CapExceeded, DegenerateParameter,
                     NoConvergence, NotInH1, OverflowDetected)
from .rootfind import RootSet, aberth_solve
from .sphere import SphereGrid

DEFAULT_N_MAX = 1000


# -- chordal geometry --------------------------------------------------------

def chordal(z, w):
    """Chordal distance ``|z-w| / sqrt((1+|z|^2)(1+|w|^2))``; ``inf`` is infinity."""
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    zi = np.isinf(z)
    wi = np.isinf(w)
    with np.errstate(invalid="ignore", over="ignore"):
        num = np.abs(z - w)
        den = np.sqrt((1 + np.abs(z) ** 2) * (1 + np.abs(w) ** 2))
        out = num / den
        out = np.where(zi & ~wi, 1 / np.sqrt(1 + np.abs(w) ** 2), out)
        out = np.where(wi & ~zi, 1 / np.sqrt(1 + np.abs(z) ** 2), out)
        out = np.where(zi & wi, 0.0, out)
    return out[()] if out.ndim == 0 else out


def _log1p_sq(a):
    """``log(1 + a**2)`` without overflow for large ``a``."""
    return np.where(a > 1e150, 2 * np.log(np.maximum(a, 1e-300)),
                    np.log1p(np.minimum(a, 1e150) ** 2))


@numba.njit(cache=True)
def _chordal_derivative(d, lam, n, z):
    out = np.empty(z.size)
    for i in range(z.size):
        w = z[i]
        logd = 0.0
        zero = False
        big = False
        lw = 0.0
        for _ in range(n):
            if not big:
                a = abs(w)
                if a == 0.0:
                    zero = True
                    break
                logd += math.log(d) + (d - 1) * math.log(a)
                w = ipow(w, d) + lam
                if abs(w) > 1e100:
                    big = True
                    lw = math.log(abs(w))
            else:
                logd += math.log(d) + (d - 1) * lw
                lw = d * lw
        if zero:
            out[i] = 0.0
            continue
        a0 = abs(z[i])
        lz = math.log1p(a0 * a0) if a0 < 1e150 else 2 * math.log(a0)
        if big:
            lf = 2 * lw
        else:
            af = abs(w)
            lf = math.log1p(af * af) if af < 1e150 else 2 * math.log(af)
        lg = logd + lz - lf
        out[i] = math.exp(lg) if lg < 700 else np.inf
    return out


def chordal_derivative(d: int, lam: complex, n: int, z):
    """Spherical derivative ``|(f^n)'(z)| (1+|z|^2) / (1+|f^n(z)|^2)``.

    Computed in log form so deep iterates never overflow. At ``z = inf`` the
    local degree is ``d**n > 1``, so the continuous extension is 0.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    out = np.zeros(z.shape)
    fin = np.isfinite(z)
    out[fin] = _chordal_derivative(d, complex(lam), n, np.ascontiguousarray(z[fin]))
    return out if out.size > 1 else float(out[0])


# -- Green functions ---------------------------------------------------------

def escape_radius(d: int, lam) -> float:
    return max(4.0, 2.0 ** (1.0 / (d - 1)) + abs(lam) + 1.0)


@numba.njit(cache=True)
def _green_one(d, lam, z, n_max, radius):
    """Dynamical Green function at ``z``; 0 if bounded through ``n_max``."""
    if radius <= 0.0:
        radius = max(4.0, 2.0 ** (1.0 / (d - 1)) + abs(lam) + 1.0)
    w = z
    N = 0
    while abs(w) <= radius:
        if N >= n_max:
            return 0.0
        w = ipow(w, d) + lam
        N += 1
    # past the escape radius the orbit grows monotonically; push it far
    # enough that the tail log|1 + lam/w^d| / d^(N+1) is below 1e-14 relative
    lw = math.log(abs(w))
    while lw < 69.0:
        w = ipow(w, d) + lam
        N += 1
        lw = math.log(abs(w))
    # log|w| ~ 0.5 log(1 + |w|^2) at this size
    return math.exp(math.log(lw) - N * math.log(d))


@numba.njit(cache=True)
def _green_many(d, lam, z, n_max, radius):
    out = np.empty(z.size)
    for i in range(z.size):
        out[i] = _green_one(d, lam[i], z[i], n_max, radius)
    return out


def _as_arrays(*xs):
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=np.complex128) for x in xs])
    return [np.ascontiguousarray(a).ravel() for a in arrs], arrs[0].shape


def green_dynamical(d: int, lam, z, n_max: int = DEFAULT_N_MAX,
                    escape_radius: float | None = None):
    """``g_{f_lam}(z) = lim log[f^N(z), inf]^{-1} / d**N``, vectorized."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    (lam_a, z_a), shape = _as_arrays(lam, z)
    out = np.full(z_a.shape, np.inf)
    fin = np.isfinite(z_a)
    out[fin] = _green_many(d, lam_a[fin], z_a[fin], n_max, float(escape_radius or 0.0))
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def green_parameter(d: int, lam, n_max: int = DEFAULT_N_MAX,
                    escape_radius: float | None = None):
    """Parameter Green function ``g(lam) = g_{f_lam}(f_lam(0))``."""
    return green_dynamical(d, lam, lam, n_max, escape_radius)


def h_parameter(d: int, lam, n_max: int = DEFAULT_N_MAX,
                escape_radius: float | None = None):
    """``h = g + log[., inf]``, continuous on the sphere with ``h(inf) = 0``."""
    lam = np.asarray(lam, dtype=np.complex128)
    fin = np.isfinite(lam)
    safe = np.where(fin, lam, 0)
    g = np.asarray(green_parameter(d, safe, n_max, escape_radius))
    h = np.where(fin, g - 0.5 * _log1p_sq(np.abs(safe)), 0.0)
    return float(h) if h.ndim == 0 else h


def lyapunov(d: int, lam, n_max: int = DEFAULT_N_MAX):
    """Lyapunov exponent of ``f_lam`` for the equilibrium measure."""
    g = green_parameter(d, lam, n_max)
    return math.log(d) + (d - 1) * np.asarray(g) / d if np.ndim(g) else \
        math.log(d) + (d - 1) * g / d


# -- boundary of the connectedness locus -------------------------------------

@numba.njit(cache=True)
def _bounded(d, lam, n_max):
    radius = max(4.0, 2.0 ** (1.0 / (d - 1)) + abs(lam) + 1.0)
    w = lam
    for _ in range(n_max):
        if abs(w) > radius:
            return False
        w = ipow(w, d) + lam
    return abs(w) <= radius


@numba.njit(cache=True)
def _bisect_rays(d, thetas, t_max, n_max, tol):
    lo = np.zeros(thetas.size)
    hi = np.empty(thetas.size)
    ok = np.ones(thetas.size, np.bool_)
    for i in range(thetas.size):
        e = complex(math.cos(thetas[i]), math.sin(thetas[i]))
        a, b = 0.0, t_max
        if _bounded(d, b * e, n_max):
            ok[i] = False
            hi[i] = b
            continue
        while b - a > tol:
            m = 0.5 * (a + b)
            if _bounded(d, m * e, n_max):
                a = m
            else:
                b = m
        lo[i] = a
        hi[i] = b
    return lo, hi, ok


def boundary_sample(d: int, count: int, seed: int = 0, n_max: int = 2000,
                    tol: float = 1e-13, return_escaping: bool = False):
    """``count`` points of the boundary of the connectedness locus.

    Each point is the bounded end of a bisection interval of width ``< tol``
    along the ray from 0 (bounded) to ``2**(1/(d-1)) + 0.5`` (escaping) at a
    seeded random angle. With ``return_escaping`` the escaping ends are
    returned as well.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    t_max = 2.0 ** (1.0 / (d - 1)) + 0.5
    lo_out, hi_out = [], []
    attempts = 0
    while len(lo_out) < count:
        attempts += 1
        if attempts > 10:
            raise BisectionFailed("no sign change along any sampled ray")
        theta = rng.uniform(0.0, 2 * np.pi, count - len(lo_out))
        lo, hi, ok = _bisect_rays(d, theta, t_max, n_max, tol)
        e = np.exp(1j * theta)
        lo_out.extend((lo * e)[ok])
        hi_out.extend((hi * e)[ok])
    lo_out = np.array(lo_out[:count])
    if return_escaping:
        return lo_out, np.array(hi_out[:count])
    return lo_out


# -- periodic points ---------------------------------------------------------

@numba.njit(cache=True)
def _periodic_ratio(d, n, lam, z):
    """``p/p'`` and ``|p'|`` for ``p = f^n(z) - z``, overflow-safe."""
    m = z.size
    ratio = np.empty(m, np.complex128)
    dabs = np.empty(m)
    for i in range(m):
        z0 = z[i]
        w = z0
        dw = 1.0 + 0j
        rec = False
        u = 0j
        rho = 0j
        logscale = 0.0
        for _ in range(n):
            if not rec:
                wd1 = ipow(w, d - 1)
                dw = d * wd1 * dw
                w = wd1 * w + lam
                if abs(w) > 1e60 or abs(dw) > 1e60:
                    rec = True
                    u = 1.0 / w
                    rho = dw / w
                    logscale = math.log(abs(w))
            else:
                ud = ipow(u, d)
                den = 1.0 + lam * ud
                rho = d * rho / den
                u = ud / den
                logscale = -math.log(abs(u))
        if rec:
            ratio[i] = (1.0 - z0 * u) / (rho - u)
            lg = math.log(abs(rho)) + logscale
            dabs[i] = math.exp(lg) if lg < 700.0 else np.inf
        else:
            ratio[i] = (w - z0) / (dw - 1.0)
            dabs[i] = abs(dw - 1.0)
    return ratio, dabs


class PeriodicEvaluator:
    """Black-box access to ``f_lam^n(z) - z``."""

    def __init__(self, d: int, lam: complex, n: int):
        self.d, self.lam, self.n = d, complex(lam), n
        self.degree = d ** n

    def ratio(self, z):
        return _periodic_ratio(self.d, self.n, self.lam,
                               np.ascontiguousarray(z, dtype=np.complex128))

    def mp_ratio(self, z, dps: int):
        with mpmath.workdps(dps):
            lam = mpmath.mpc(self.lam)
            z0 = mpmath.mpc(z)
            w, dw = z0, mpmath.mpc(1)
            for _ in range(self.n):
                dw = self.d * w ** (self.d - 1) * dw
                w = w ** self.d + lam
            return (w - z0) / (dw - 1), abs(dw - 1)


@dataclass(frozen=True)
class OrbitClassification:
    """Periodic points of period dividing ``n`` and their cycle structure.

    ``cycles[k]`` lists indices into ``points.roots`` in orbit order.
    ``formally_exact_n[i]`` is the multiplicity of point ``i`` as a member of
    the formally exact set (0 when it is not a member).
    """

    d: int
    lam: complex
    n: int
    points: RootSet
    cycles: tuple
    exact_period: tuple
    multiplier: tuple
    formally_exact_n: np.ndarray
    point_cycle: np.ndarray = field(repr=False)

    @property
    def flags(self) -> np.ndarray:
        return self.formally_exact_n > 0

    def point_multipliers(self) -> np.ndarray:
        """``(f^n)'(z)`` at every point: the cycle multiplier to ``n/m``."""
        out = np.empty(len(self.points.roots), np.complex128)
        for k, cyc in enumerate(self.cycles):
            out[list(cyc)] = self.multiplier[k] ** (self.n // self.exact_period[k])
        return out

    def formally_exact_count(self) -> int:
        return int(self.formally_exact_n.sum())


def _primitive_root_distance(mu: complex, q: int) -> float:
    """Distance from ``mu`` to the nearest primitive ``q``-th root of unity."""
    k = np.array([k for k in range(q) if math.gcd(k, q) == 1])
    return float(np.min(np.abs(mu - np.exp(2j * np.pi * k / q))))


def _cluster(z: np.ndarray, radius: float):
    """Merge points closer than ``radius``; returns centers and multiplicities."""
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    label = -np.ones(z.size, np.int64)
    centers, mult = [], []
    for i in range(z.size):
        if label[i] >= 0:
            continue
        group = [j for j in tree.query_ball_point([z[i].real, z[i].imag], radius)
                 if label[j] < 0]
        for j in group:
            label[j] = len(centers)
        centers.append(z[group].mean())
        mult.append(len(group))
    return np.array(centers), np.array(mult, np.int64), label


def classify_periodic(d: int, lam: complex, n: int, tolerance: float = 1e-6,
                      seed: int = 0) -> OrbitClassification:
    """Solve ``f^n(z) = z`` and split the solutions into cycles.

    Roots within ``sqrt(tolerance)`` are merged (a collision of cycles at a
    parabolic parameter). Multipliers come from the chain rule. A point is
    formally exact when its exact period is ``n``, or when its cycle of
    period ``m | n`` has multiplier within ``tolerance`` of a primitive
    ``(n/m)``-th root of unity; in the latter case it carries the
    multiplicity left after removing the simple root of ``f^m(z) = z``.
    Anything inside the ambiguity band raises :class:`DegenerateParameter`.
    """
    lam = complex(lam)
    degree = d ** n
    if degree > settings.root_cap:
        raise CapExceeded(f"d**n = {degree} exceeds root cap {settings.root_cap}")
    radius = 1.3 * (1.0 + abs(lam) ** (1.0 / d))
    rng = np.random.default_rng(seed)
    theta = 2 * np.pi * (np.arange(degree) + rng.uniform(0, 0.5, degree)) / degree
    ev = PeriodicEvaluator(d, lam, n)
    try:
        rs = aberth_solve(ev, degree, radius * np.exp(1j * theta))
    except (NoConvergence, OverflowDetected) as exc:
        raise DegenerateParameter(f"periodic points at lam={lam} did not converge: {exc}")
    merge = math.sqrt(tolerance)
    pts, mult, _ = _cluster(rs.roots, merge) if degree > 1 else (rs.roots, np.ones(1, np.int64), None)
    if pts.size > 1 and _nearest_two(pts, pts)[1].min() < 10 * merge:
        raise DegenerateParameter(f"periodic points nearly collide at lam={lam}")

    images = pts ** d + lam
    idx, dist = _nearest_two(pts, images)
    scale = np.maximum(1.0, np.abs(images))
    if np.any(dist[:, 0] > merge * scale):
        raise DegenerateParameter(f"orbit matching failed at lam={lam}")
    succ = idx[:, 0]
    if np.unique(succ).size != succ.size:
        raise DegenerateParameter(f"orbit matching is not a permutation at lam={lam}")

    cycles, periods, multipliers = [], [], []
    point_cycle = -np.ones(pts.size, np.int64)
    for i in range(pts.size):
        if point_cycle[i] >= 0:
            continue
        cyc = [i]
        point_cycle[i] = len(cycles)
        j = succ[i]
        while j != i:
            cyc.append(j)
            point_cycle[j] = len(cycles)
            j = succ[j]
        m = len(cyc)
        if n % m:
            raise DegenerateParameter(f"cycle of length {m} does not divide {n}")
        cycles.append(tuple(int(c) for c in cyc))
        periods.append(m)
        multipliers.append(complex(np.prod(d * pts[cyc] ** (d - 1))))

    fe = np.zeros(pts.size, np.int64)
    for k, cyc in enumerate(cycles):
        m = periods[k]
        cm = mult[list(cyc)]
        if m == n:
            fe[list(cyc)] = cm
            continue
        dist_root = _primitive_root_distance(multipliers[k], n // m)
        if dist_root < tolerance:
            fe[list(cyc)] = cm - 1
        elif dist_root < merge:
            raise DegenerateParameter(
                f"multiplier of a {m}-cycle is ambiguously close to a root of unity")
        elif np.any(cm > 1):
            raise DegenerateParameter(f"unexplained multiple periodic point at lam={lam}")

    res = np.array([rs.residuals[_cluster_members(rs.roots, p, merge)].max() for p in pts])
    points = RootSet(pts, res, mult, degree, dict(rs.meta))
    return OrbitClassification(d, lam, n, points, tuple(cycles), tuple(periods),
                               tuple(multipliers), fe, point_cycle)


def _cluster_members(z, center, radius):
    return np.abs(z - center) <= radius


def _nearest_two(pts, queries):
    """Indices and distances of the two nearest points (self excluded when
    ``queries is pts``)."""
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    k = min(3, pts.size)
    dist, idx = tree.query(np.column_stack([queries.real, queries.imag]), k=k)
    dist = np.atleast_2d(dist).reshape(len(queries), k)
    idx = np.atleast_2d(idx).reshape(len(queries), k)
    if queries is pts:
        dist, idx = dist[:, 1:], idx[:, 1:]
    if dist.shape[1] == 1:
        dist = np.column_stack([dist, np.full(len(queries), np.inf)])
        idx = np.column_stack([idx, idx])
    return idx, dist


def log_pstar(d: int, lam: complex, n: int, w: complex = 0.0,
              classification: OrbitClassification | None = None,
              tolerance: float = 1e-6) -> float:
    """``log|P*_n(lam, w)| = (1/n) sum_{Fix**} log|(f^n)'(z) - w| - nu log d``.

    ``w`` may be an array; the result then has its shape.
    """
    oc = classification or classify_periodic(d, lam, n, tolerance)
    mu = oc.point_multipliers()
    k = oc.formally_exact_n
    sel = k > 0
    w_a = np.asarray(w, dtype=np.complex128)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(mu[sel].reshape((-1,) + (1,) * w_a.ndim) - w_a))
    s = np.tensordot(k[sel].astype(np.float64), logs, axes=1)
    out = s / n - ntheory.nu(d, n) * math.log(d)
    return float(out) if w_a.ndim == 0 else out


def averaged_log_pstar(d: int, lam: complex, n: int, r: float,
                       classification: OrbitClassification | None = None,
                       tolerance: float = 1e-6) -> float:
    """Mean of ``log|P*_n(lam, r e^{i t})|`` over the circle, in closed form."""
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    oc = classification or classify_periodic(d, lam, n, tolerance)
    mu = oc.point_multipliers()
    k = oc.formally_exact_n
    sel = k > 0
    s = float(np.sum(k[sel] * np.log(np.maximum(r, np.abs(mu[sel])))))
    return s / n - ntheory.nu(d, n) * math.log(d)


# -- grid evaluation of the same quantities ----------------------------------

@numba.njit(cache=True)
def _log_abs_fn(d, n_list, lam):
    """``log|F_m(lam)|`` for each ``m`` in ascending ``n_list``."""
    out = np.empty(n_list.size)
    z = lam
    big = False
    lz = 0.0
    k = 1
    j = 0
    while j < n_list.size:
        if k == n_list[j]:
            out[j] = lz if big else (math.log(abs(z)) if z != 0 else -np.inf)
            j += 1
            continue
        if not big:
            z = ipow(z, d) + lam
            if abs(z) > 1e100:
                big = True
                lz = math.log(abs(z))
        else:
            lz = d * lz
        k += 1
    return out


@numba.njit(cache=True)
def _log_abs_fn_grid(d, n_list, lam):
    out = np.empty((n_list.size, lam.size))
    for i in range(lam.size):
        out[:, i] = _log_abs_fn(d, n_list, lam[i])
    return out


def log_abs_fn(d: int, n: int, lam):
    """``log|F_n(lam)|`` without overflow, vectorized."""
    lam_a = np.ascontiguousarray(np.asarray(lam, dtype=np.complex128)).ravel()
    out = _log_abs_fn_grid(d, np.array([n], np.int64), lam_a)[0]
    out = out.reshape(np.shape(lam))
    return float(out) if out.ndim == 0 else out


def log_abs_pstar_at_zero(d: int, n: int, lam):
    """``log|P*_n(lam, 0)| = (d-1) sum_{m|n} mu(n/m) log|F_m(lam)|``."""
    divs = np.array(ntheory.divisors(n), np.int64)
    coef = np.array([ntheory.mobius(n // int(m)) for m in divs], float)
    lam_a = np.ascontiguousarray(np.asarray(lam, dtype=np.complex128)).ravel()
    logs = _log_abs_fn_grid(d, divs, lam_a)
    keep = coef != 0
    with np.errstate(invalid="ignore"):
        out = (d - 1) * (coef[keep, None] * logs[keep]).sum(axis=0)
    out = out.reshape(np.shape(lam))
    return float(out) if out.ndim == 0 else out


@numba.njit(cache=True)
def _attracting_multiplier(d, n, lam, transient, divs):
    """``|mu|`` of an attracting cycle of exact period ``n``, or ``inf``.

    The critical orbit is followed for ``transient`` steps (it converges to
    the attracting cycle when there is one) and the end point is polished by
    Newton on ``f^n(z) - z``.
    """
    radius = max(4.0, 2.0 ** (1.0 / (d - 1)) + abs(lam) + 1.0)
    z = lam
    for _ in range(transient):
        if abs(z) > radius:
            return np.inf
        z = ipow(z, d) + lam
    for _ in range(40):
        w = z
        dw = 1.0 + 0j
        for _ in range(n):
            dw = d * ipow(w, d - 1) * dw
            w = ipow(w, d) + lam
        den = dw - 1.0
        if den == 0:
            break
        step = (w - z) / den
        z -= step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    tol = 1e-7 * max(1.0, abs(z))
    w = z
    mu = 1.0 + 0j
    for k in range(1, n + 1):
        mu *= d * ipow(w, d - 1)
        w = ipow(w, d) + lam
        if k < n:
            for j in divs:
                if j == k and abs(w - z) < tol:
                    return np.inf
    if abs(w - z) > tol or abs(mu) >= 1.0:
        return np.inf
    return abs(mu)


@numba.njit(cache=True)
def _averaged_parts(d, n, lam, transient, divs, coef):
    base = np.empty(lam.size)
    mu = np.empty(lam.size)
    for i in range(lam.size):
        logs = _log_abs_fn(d, divs, lam[i])
        s = 0.0
        for j in range(divs.size):
            if coef[j] != 0:
                s += coef[j] * logs[j]
        base[i] = (d - 1) * s
        mu[i] = _attracting_multiplier(d, n, lam[i], transient, divs)
    return base, mu


def averaged_log_pstar_grid(d: int, n: int, lam, r, transient: int = 1000):
    """Closed-form circle average of ``log|P*_n(lam, .)|`` on arrays of ``lam``.

    Uses ``log|P*_n(lam, 0)|`` plus ``log(r/|mu|)`` for an attracting cycle of
    exact period ``n`` whose multiplier is below ``r``. A sequence of radii
    returns one array per radius, sharing the cycle search.
    """
    radii = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any((radii <= 0) | (radii > 1)):
        raise ValueError("r must lie in (0, 1]")
    divs = np.array(ntheory.divisors(n), np.int64)
    coef = np.array([ntheory.mobius(n // int(m)) for m in divs], np.float64)
    lam_a = np.ascontiguousarray(np.asarray(lam, dtype=np.complex128)).ravel()
    base, mu = _averaged_parts(d, n, lam_a, transient, divs, coef)
    outs = []
    with np.errstate(divide="ignore"):
        for rr in radii:
            out = base + np.where(mu < rr, np.log(rr / mu), 0.0)
            out = out.reshape(np.shape(lam))
            outs.append(float(out) if out.ndim == 0 else out)
    return outs[0] if np.ndim(r) == 0 else outs


# -- the main cardioid H_1 ---------------------------------------------------

@numba.njit(cache=True)
def _fixed_multiplier(d, lam):
    """Multiplier ``d z^(d-1)`` of the fixed point with the smallest one."""
    if d == 2:
        s = np.sqrt(1.0 - 4.0 * lam + 0j)
        a = 1.0 - s
        b = 1.0 + s
        return a if abs(a) <= abs(b) else b
    # Durand-Kerner on z^d - z + lam
    z = np.empty(d, np.complex128)
    base = 0.4 + 0.9j
    rad = 1.0 + abs(lam)
    for k in range(d):
        z[k] = rad * base ** k
    for _ in range(500):
        change = 0.0
        for k in range(d):
            num = ipow(z[k], d) - z[k] + lam
            den = 1.0 + 0j
            for j in range(d):
                if j != k:
                    den *= z[k] - z[j]
            step = num / den
            z[k] -= step
            change = max(change, abs(step))
        if change < 4e-16 * rad:
            break
    best = d * ipow(z[0], d - 1)
    for k in range(1, d):
        m = d * ipow(z[k], d - 1)
        if abs(m) < abs(best):
            best = m
    return best


@numba.njit(cache=True)
def _fixed_multiplier_many(d, lam):
    out = np.empty(lam.size, np.complex128)
    for i in range(lam.size):
        out[i] = _fixed_multiplier(d, lam[i])
    return out


def fixed_multiplier(d: int, lam):
    """Smallest fixed-point multiplier of ``f_lam``, vectorized."""
    lam_a = np.ascontiguousarray(np.asarray(lam, dtype=np.complex128)).ravel()
    out = _fixed_multiplier_many(d, lam_a).reshape(np.shape(lam))
    return complex(out) if out.ndim == 0 else out


def in_h1(d: int, lam) -> np.ndarray | bool:
    """Membership in the component where the fixed point attracts."""
    out = np.abs(fixed_multiplier(d, lam)) < 1.0
    return bool(out) if np.ndim(out) == 0 else out


def h1_green(d: int, lam):
    """Green function of ``H_1`` with pole at 0: ``-log|mu_fix|/(d-1)``.

    Returns ``inf`` at ``lam = 0``. Raises :class:`NotInH1` for a scalar
    outside ``H_1``; arrays get ``nan`` there instead.
    """
    mu = np.abs(np.asarray(fixed_multiplier(d, lam)))
    if mu.ndim == 0:
        if mu >= 1.0:
            raise NotInH1(f"lam={lam} is not in H_1 (|mu_fix| = {float(mu):.6g})")
        return math.inf if mu == 0 else -math.log(float(mu)) / (d - 1)
    with np.errstate(divide="ignore"):
        g = -np.log(mu) / (d - 1)
    return np.where(mu < 1.0, g, np.nan)


def h1_inradius(d: int, directions: int = 720, tol: float = 1e-14) -> float:
    """Largest ``t`` with the disc ``D(t)`` inside ``H_1``.

    Bisection along each direction for the first exit, then a bounded
    scalar minimization of the exit radius around the best direction.
    """
    from scipy.optimize import minimize_scalar

    t_max = 2.0 ** (1.0 / (d - 1)) + 0.5

    def exit_radius(theta):
        e = np.exp(1j * np.atleast_1d(theta))
        a = np.zeros(e.size)
        b = np.full(e.size, t_max)
        while np.max(b - a) > tol:
            m = 0.5 * (a + b)
            inside = np.abs(fixed_multiplier(d, m * e)) < 1.0
            a = np.where(inside, m, a)
            b = np.where(inside, b, m)
        return a

    thetas = 2 * np.pi * np.arange(directions) / directions
    radii = exit_radius(thetas)
    k = int(np.argmin(radii))
    h = 2 * np.pi / directions
    res = minimize_scalar(lambda t: float(exit_radius(t)[0]),
                          bounds=(thetas[k] - h, thetas[k] + h),
                          method="bounded", options={"xatol": 1e-12})
    return float(min(radii[k], res.fun))


def h1_inradius_closed_form(d: int) -> float:
    """``d**(-1/(d-1)) (1 - 1/d)``: the parabolic parameter on the positive axis."""
    return d ** (-1.0 / (d - 1)) * (1.0 - 1.0 / d)


# -- Green fields on the sphere grid -----------------------------------------

@dataclass(frozen=True)
class GreenField:
    """Values of a Green-type function at the nodes of a :class:`SphereGrid`."""

    grid: SphereGrid
    values: np.ndarray
    kind: str
    d: int
    lam: complex | None = None
    meta: dict = field(default_factory=dict)

    KINDS = ("g_dyn", "g_param", "h_param")

    @classmethod
    def compute(cls, kind: str, d: int, grid: SphereGrid, lam: complex | None = None,
                n_max: int = DEFAULT_N_MAX) -> "GreenField":
        if kind not in cls.KINDS:
            raise ValueError(f"kind must be one of {cls.KINDS}")
        z = grid.z
        if kind == "g_dyn":
            if lam is None:
                raise ValueError("g_dyn needs a parameter lam")
            vals = green_dynamical(d, lam, z, n_max)
        elif kind == "g_param":
            vals = green_parameter(d, z, n_max)
        else:
            vals = h_parameter(d, z, n_max)
        vals = np.asarray(vals, dtype=np.float64)
        vals.setflags(write=False)
        meta = {"n_max": n_max, "sup_abs": float(np.max(np.abs(vals)))}
        return cls(grid, vals, kind, d, lam, meta)

    def to_csv(self, path=None) -> str:
        u = np.repeat(self.grid.u, self.grid.n_theta)
        th = np.tile(self.grid.theta, self.grid.n_u)
        lines = ["u,theta,value"]
        lines += [f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in zip(u, th, self.values.ravel())]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_pgm(self, path) -> Path:
        """16-bit binary PGM (rows are ``u``, columns ``theta``) plus a sidecar
        JSON holding the affine scale back to values."""
        path = Path(path)
        v = self.values
        lo, hi = float(v.min()), float(v.max())
        span = hi - lo if hi > lo else 1.0
        img = np.round((v - lo) / span * 65535).astype(">u2")
        h, w = img.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
            fh.write(img.tobytes())
        side = {"kind": self.kind, "d": self.d,
                "lam": None if self.lam is None else [self.lam.real, self.lam.imag],
                "grid": self.grid.label, "offset": lo, "scale": span / 65535,
                "value": "offset + scale * pixel", **self.meta}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, indent=2))
        return path

    @staticmethod
    def read_pgm(path) -> np.ndarray:
        """Inverse of :meth:`to_pgm` up to quantization."""
        path = Path(path)
        data = path.read_bytes()
        parts = data.split(b"\n", 3)
        w, h = map(int, parts[1].split())
        img = np.frombuffer(parts[3], dtype=">u2").reshape(h, w).astype(float)
        side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        return side["offset"] + side["scale"] * img
