"""Simultaneous root finding for black-box polynomials.

The load-bearing routine is :func:`aberth_solve`, which only needs Newton
corrections ``p/p'``. For ``F_n`` those come from the recursion
``F_{k+1} = F_k**d + lam`` and never touch the (huge) expanded coefficients.
"""

from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import mpmath
import numba
import numpy as np
from scipy.optimize import linear_sum_assignment

from ._kernels import ipow
from .config import settings
from .errors import CapExceeded, NoConvergence, OverflowDetected
from .exactpoly import (ExactPoly, is_squarefree, poly_exact_root,
                        squarefree_decomposition)

OVERFLOW_LIMIT = 1e150
_RECIPROCAL_SWITCH = 1e60


@dataclass(frozen=True)
class RootSet:
    """Approximate roots with scaled residuals and claimed multiplicities.

    ``residuals[i]`` is ``|p(z)| / max(1, |z p'(z)|)``, the value measured
    against the first-order size of ``p`` near the root. For a simple root
    this is the relative size of one more Newton step.
    """

    roots: np.ndarray
    residuals: np.ndarray
    multiplicity: np.ndarray
    degree: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name, dtype in (("roots", np.complex128), ("residuals", np.float64),
                            ("multiplicity", np.int64)):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.roots.size

    @property
    def count(self) -> int:
        """Number of roots counted with multiplicity."""
        return int(self.multiplicity.sum())

    def min_separation(self) -> float:
        return min_separation(self.roots)

    def validate(self, residual_tolerance: float | None = None,
                 separation_tolerance: float | None = None) -> None:
        """Raise :class:`NoConvergence` if an invariant is violated."""
        rt = settings.residual_tolerance if residual_tolerance is None else residual_tolerance
        st = settings.separation_tolerance if separation_tolerance is None else separation_tolerance
        if self.count != self.degree:
            raise NoConvergence(self.meta.get("iterations", 0), float("nan"),
                                f"found {self.count} roots with multiplicity, expected {self.degree}")
        if self.residuals.size and self.residuals.max() > rt:
            raise NoConvergence(self.meta.get("iterations", 0), float(self.residuals.max()),
                                f"residual {self.residuals.max():.3e} above {rt:.1e}")
        if self.roots.size > 1 and self.min_separation() < st:
            raise NoConvergence(self.meta.get("iterations", 0), float("nan"),
                                f"roots closer than {st:.1e}")

    def sorted(self) -> "RootSet":
        order = np.lexsort((self.roots.imag, self.roots.real))
        return RootSet(self.roots[order], self.residuals[order], self.multiplicity[order],
                       self.degree, dict(self.meta))

    def expanded(self) -> np.ndarray:
        """Roots repeated according to multiplicity."""
        return np.repeat(self.roots, self.multiplicity)

    def to_json(self) -> str:
        return json.dumps({
            "degree": self.degree,
            "roots": [{"re": float(z.real), "im": float(z.imag), "residual": float(r),
                       "multiplicity": int(m)}
                      for z, r, m in zip(self.roots, self.residuals, self.multiplicity)],
        })

    def to_csv(self) -> str:
        lines = ["re,im,residual,mult"]
        for z, r, m in zip(self.roots, self.residuals, self.multiplicity):
            lines.append(f"{float(z.real)!r},{float(z.imag)!r},{float(r)!r},{int(m)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RootSet":
        obj = json.loads(text)
        rows = obj["roots"]
        return cls([complex(r["re"], r["im"]) for r in rows], [r["residual"] for r in rows],
                   [r["multiplicity"] for r in rows], obj["degree"])


def min_separation(points) -> float:
    """Smallest pairwise distance (``inf`` for fewer than two points)."""
    pts = np.asarray(points, dtype=np.complex128)
    if pts.size < 2:
        return float("inf")
    return float(_min_separation(pts))


@numba.njit(cache=True)
def _min_separation(z):
    order = np.argsort(z.real)
    zs = z[order]
    best = np.inf
    m = zs.size
    for i in range(m):
        for j in range(i + 1, m):
            if zs[j].real - zs[i].real >= best:
                break
            dist = abs(zs[j] - zs[i])
            if dist < best:
                best = dist
    return best


def match_roots(a, b) -> tuple[np.ndarray, float]:
    """Optimal one-to-one matching of two equal-size point sets.

    Returns the permutation ``perm`` with ``a[i] ~ b[perm[i]]`` and the
    largest matched distance.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.size != b.size:
        raise ValueError(f"sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        return np.zeros(0, np.int64), 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(a.size, np.int64)
    perm[rows] = cols
    return perm, float(cost[rows, cols].max())


# -- F_n by recursion -------------------------------------------------------

def eval_fn_and_derivative(d: int, n: int, lam: complex) -> tuple[complex, complex]:
    """``(F_n(lam), F_n'(lam))`` by forward recursion in double precision."""
    lam = complex(lam)
    z, dz = lam, 1.0 + 0j
    for _ in range(n - 1):
        zd1 = z ** (d - 1)
        dz = d * zd1 * dz + 1.0
        z = zd1 * z + lam
        if not (abs(z) <= OVERFLOW_LIMIT and abs(dz) <= OVERFLOW_LIMIT):
            raise OverflowDetected(f"|F_k| or |F_k'| exceeded {OVERFLOW_LIMIT:.0e} at lam={lam}")
    return z, dz


@numba.njit(cache=True)
def _fn_ratio(d, n, lam):
    """``F_n/F_n'`` and ``|F_n'|`` at each point, overflow-safe.

    Once the orbit is large the recursion switches to ``u = 1/F_k`` and
    ``rho = F_k'/F_k``, which satisfy
    ``u' = u**d / (1 + lam u**d)`` and ``rho' = (d rho + u**d) / (1 + lam u**d)``.
    """
    m = lam.size
    ratio = np.empty(m, np.complex128)
    dabs = np.empty(m, np.float64)
    for i in range(m):
        l = lam[i]
        z = l
        dz = 1.0 + 0j
        rec = False
        u = 0j
        rho = 0j
        logscale = 0.0
        for _ in range(n - 1):
            if not rec:
                zd1 = ipow(z, d - 1)
                dz = d * zd1 * dz + 1.0
                z = zd1 * z + l
                if abs(z) > 1e60 or abs(dz) > 1e60:
                    rec = True
                    u = 1.0 / z
                    rho = dz / z
                    logscale = np.log(abs(z))
            else:
                ud = ipow(u, d)
                den = 1.0 + l * ud
                rho = (d * rho + ud) / den
                u = ud / den
                logscale = -np.log(abs(u))
        if rec:
            ratio[i] = 1.0 / rho
            lg = np.log(abs(rho)) + logscale
            dabs[i] = np.exp(lg) if lg < 700.0 else np.inf
        else:
            ratio[i] = z / dz
            dabs[i] = abs(dz)
    return ratio, dabs


class CriticalOrbitEvaluator:
    """Black-box access to ``F_n`` for the family ``z**d + lam``."""

    def __init__(self, d: int, n: int):
        self.d, self.n = d, n
        self.degree = d ** (n - 1)

    def __call__(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=np.complex128))
        vals = np.empty_like(lam)
        ders = np.empty_like(lam)
        for i, x in enumerate(lam):
            vals[i], ders[i] = eval_fn_and_derivative(self.d, self.n, x)
        return vals, ders

    def ratio(self, lam):
        return _fn_ratio(self.d, self.n, np.ascontiguousarray(lam, dtype=np.complex128))

    def mp_ratio(self, lam, dps: int):
        with mpmath.workdps(dps):
            l = mpmath.mpc(lam)
            z, dz = l, mpmath.mpc(1)
            for _ in range(self.n - 1):
                zd1 = z ** (self.d - 1)
                dz = self.d * zd1 * dz + 1
                z = zd1 * z + l
            return z / dz, abs(dz)


# -- coefficient form -------------------------------------------------------

class CoefficientEvaluator:
    """Evaluation of an :class:`ExactPoly` from its exact coefficients.

    Double-precision Horner on expanded dynamical polynomials loses most of
    its digits to cancellation. :meth:`ratio` therefore runs Horner in
    double-double arithmetic (about 106 bits), good enough to steer Aberth,
    and :meth:`precise_ratio` uses GMP complex floats at a precision set by
    the coefficient size for the final iterations. Points outside the unit
    disk use the reversed polynomial.
    """

    def __init__(self, poly: ExactPoly, extra_bits: int = 96):
        if poly.degree < 1:
            raise ValueError("need a polynomial of degree >= 1")
        self.poly = poly
        self.degree = poly.degree
        self.bits = max(abs(c).bit_length() for c in poly.coeffs)
        self.precision = 2 * self.bits + extra_bits + 2 * self.degree.bit_length()
        self._asc = [gmpy2.mpz(c) for c in poly.coeffs]
        hi = np.array([float(c) for c in poly.coeffs])
        lo = np.array([float(c - int(h)) for c, h in zip(poly.coeffs, hi)])
        self._dd = (hi, lo)

    def ratio(self, lam):
        """Double-double inside the closed unit disk, GMP outside it.

        Outside the disk the terms ``a_k z**k`` of an expanded dynamical
        polynomial dwarf its value by far more than 106 bits."""
        lam = np.ascontiguousarray(np.atleast_1d(lam), dtype=np.complex128)
        ratio, dabs = _dd_ratio(self._dd[0], self._dd[1], lam)
        outside = np.abs(lam) > 1.0
        if outside.any():
            ratio[outside], dabs[outside] = self.precise_ratio(lam[outside])
        return ratio, dabs

    def __call__(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=np.complex128))
        vals = np.empty_like(lam)
        ders = np.empty_like(lam)
        with gmpy2.context(gmpy2.get_context(), precision=self.precision):
            for i, x in enumerate(lam):
                p, dp = self._horner(self._asc[::-1], gmpy2.mpc(complex(x)))
                vals[i], ders[i] = complex(p), complex(dp)
        return vals, ders

    @staticmethod
    def _horner(desc, z):
        p = gmpy2.mpc(desc[0])
        dp = gmpy2.mpc(0)
        for c in desc[1:]:
            dp = dp * z + p
            p = p * z + c
        return p, dp

    def precise_ratio(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=np.complex128))
        N = self.degree
        ratio = np.empty(lam.size, np.complex128)
        dabs = np.empty(lam.size, np.float64)
        desc = self._asc[::-1]
        asc = self._asc
        with gmpy2.context(gmpy2.get_context(), precision=self.precision):
            for i, x in enumerate(lam):
                x = complex(x)
                if abs(x) <= 1.0:
                    p, dp = self._horner(desc, gmpy2.mpc(x))
                    if dp == 0:
                        ratio[i], dabs[i] = np.nan, 0.0
                        continue
                    ratio[i] = complex(p / dp)
                    dabs[i] = float(abs(dp))
                else:
                    y = gmpy2.mpc(1) / gmpy2.mpc(x)
                    q, dq = self._horner(asc, y)
                    den = N * q - y * dq
                    ratio[i] = complex(gmpy2.mpc(x) * q / den)
                    lg = (N - 1) * np.log(abs(x)) + float(gmpy2.log(abs(den)))
                    dabs[i] = np.exp(lg) if lg < 700.0 else np.inf
        return ratio, dabs


# double-double helpers (Dekker/Knuth error-free transformations)

@numba.njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@numba.njit(cache=True, inline="always")
def _split(a):
    t = 134217729.0 * a
    hi = t - (t - a)
    return hi, a - hi


@numba.njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@numba.njit(cache=True, inline="always")
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    return _two_sum(s, e + al + bl)


@numba.njit(cache=True, inline="always")
def _dd_mul_d(ah, al, b):
    p, e = _two_prod(ah, b)
    return _two_sum(p, e + al * b)


@numba.njit(cache=True, inline="always")
def _cdd_mul_add(rh, rl, ih, il, xr, xi, ch, cl):
    """``(r + i*I) * x + c`` for double-double complex ``r + iI``, double
    complex ``x`` and double-double real ``c``."""
    a_h, a_l = _dd_mul_d(rh, rl, xr)
    b_h, b_l = _dd_mul_d(ih, il, xi)
    re_h, re_l = _dd_add(a_h, a_l, -b_h, -b_l)
    re_h, re_l = _dd_add(re_h, re_l, ch, cl)
    c_h, c_l = _dd_mul_d(rh, rl, xi)
    e_h, e_l = _dd_mul_d(ih, il, xr)
    im_h, im_l = _dd_add(c_h, c_l, e_h, e_l)
    return re_h, re_l, im_h, im_l


@numba.njit(cache=True)
def _dd_horner(hi, lo, x, reverse):
    N = hi.size - 1
    k0 = 0 if reverse else N
    step = 1 if reverse else -1
    ph, pl, qh, ql = hi[k0], lo[k0], 0.0, 0.0
    dh, dl, eh, el = 0.0, 0.0, 0.0, 0.0
    k = k0 + step
    for _ in range(N):
        dh, dl, eh, el = _cdd_mul_add(dh, dl, eh, el, x.real, x.imag, 0.0, 0.0)
        dh, dl = _dd_add(dh, dl, ph, pl)
        eh, el = _dd_add(eh, el, qh, ql)
        ph, pl, qh, ql = _cdd_mul_add(ph, pl, qh, ql, x.real, x.imag, hi[k], lo[k])
        k += step
    return complex(ph + pl, qh + ql), complex(dh + dl, eh + el)


@numba.njit(cache=True)
def _dd_ratio(hi, lo, lam):
    N = hi.size - 1
    m = lam.size
    ratio = np.empty(m, np.complex128)
    dabs = np.empty(m, np.float64)
    for i in range(m):
        z = lam[i]
        if abs(z) <= 1.0:
            p, dp = _dd_horner(hi, lo, z, False)
            ratio[i] = p / dp
            dabs[i] = abs(dp)
        else:
            y = 1.0 / z
            q, dq = _dd_horner(hi, lo, y, True)
            den = N * q - y * dq
            ratio[i] = z * q / den
            lg = (N - 1) * np.log(abs(z)) + np.log(abs(den) + 1e-300)
            dabs[i] = np.exp(lg) if lg < 700.0 else np.inf
    return ratio, dabs


# -- Aberth ------------------------------------------------------------------

@numba.njit(cache=True)
def _aberth_corrections(z, ratio, idx):
    w = np.empty(idx.size, np.complex128)
    m = z.size
    for a in range(idx.size):
        i = idx[a]
        zi = z[i]
        s = 0j
        for j in range(m):
            if j != i:
                s += 1.0 / (zi - z[j])
        r = ratio[a]
        w[a] = r / (1.0 - r * s)
    return w


def _ratio_of(evaluator, z):
    if hasattr(evaluator, "ratio"):
        ratio, dabs = evaluator.ratio(z)
        return np.asarray(ratio), np.asarray(dabs)
    vals, ders = evaluator(z)
    vals = np.asarray(vals, dtype=np.complex128)
    ders = np.asarray(ders, dtype=np.complex128)
    return vals / ders, np.abs(ders)


def _scaled_residual(ratio, dabs, z):
    # |p| / max(1, |z p'|) written through the Newton ratio
    scale = np.maximum(1.0, np.abs(z) * dabs)
    with np.errstate(over="ignore", invalid="ignore"):
        res = np.abs(ratio) * dabs / scale
    return np.where(np.isfinite(res), res, np.abs(ratio) / np.maximum(np.abs(z), 1e-300))


def _aberth_loop(ratio_fn, z, max_iter, step_tol, stall_tol):
    degree = z.size
    active = np.ones(degree, dtype=bool)
    best = np.full(degree, np.inf)
    stale = np.zeros(degree, dtype=np.int64)
    last = np.full(degree, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        ratio, _ = ratio_fn(z[idx])
        if not np.all(np.isfinite(ratio)):
            bad = idx[~np.isfinite(ratio)]
            raise OverflowDetected(f"non-finite Newton ratio at {z[bad[0]]}")
        if degree == 1:
            w = ratio
        else:
            w = _aberth_corrections(z, ratio, idx.astype(np.int64))
        z[idx] -= w
        size = np.abs(w) / np.maximum(1.0, np.abs(z[idx]))
        last[idx] = size
        improved = size < 0.5 * best[idx]
        best[idx] = np.where(improved, size, best[idx])
        stale[idx] = np.where(improved, 0, stale[idx] + 1)
        done = (size < step_tol) | ((stale[idx] >= 6) & (best[idx] < stall_tol))
        active[idx[done]] = False
        if not active.any():
            return z, it, float(last.max())
    raise NoConvergence(max_iter, float(last[active].max()))


def aberth_solve(evaluator, degree: int, init, max_iter: int | None = None,
                 stall_tolerance: float | None = None, polish: bool = True,
                 mp_fallback: bool = True) -> RootSet:
    """Aberth-Ehrlich iteration from ``init`` (``degree`` distinct points).

    ``evaluator`` is either callable as ``p, dp = evaluator(z)`` on arrays or
    exposes ``ratio(z) -> (p/p', |p'|)``. A root is frozen once its correction
    drops below ``step_tolerance`` (relative to ``max(1, |z|)``), or once it
    stops improving below ``stall_tolerance``, the noise floor of the
    evaluator.

    Evaluators with a ``precise_ratio`` method get a second Aberth phase
    driven by it. Otherwise frozen roots are polished by Newton, and roots
    that still miss ``residual_tolerance`` get Newton steps in ``mpmath``
    when the evaluator offers ``mp_ratio``.
    """
    z = np.array(init, dtype=np.complex128).ravel()
    if z.size != degree:
        raise ValueError(f"need {degree} initial points, got {z.size}")
    if degree == 0:
        return RootSet([], [], [], 0)
    if degree > 1 and min_separation(z) == 0.0:
        raise ValueError("initial points must be pairwise distinct")
    step_tol = settings.step_tolerance
    res_tol = settings.residual_tolerance
    precise = getattr(evaluator, "precise_ratio", None)
    if stall_tolerance is None:
        stall_tolerance = 1e-3 if precise is not None else 1e-8
    if max_iter is None:
        max_iter = 200 + 2 * degree
    z, it, worst = _aberth_loop(lambda x: _ratio_of(evaluator, x), z, max_iter,
                                step_tol, stall_tolerance)
    meta = {"iterations": it, "worst_step": worst}
    if precise is not None:
        z, it2, worst = _aberth_loop(precise, z, 50, 4 * np.finfo(float).eps, 1e-14)
        meta["precise_iterations"] = it2
        ratio, dabs = precise(z)
        residual = _scaled_residual(ratio, dabs, z)
    elif polish:
        z, residual = _newton_polish(evaluator, z, res_tol, mp_fallback)
    else:
        ratio, dabs = _ratio_of(evaluator, z)
        residual = _scaled_residual(ratio, dabs, z)
    return RootSet(z, residual, np.ones(degree, np.int64), degree, meta)


def _newton_polish(evaluator, z, res_tol, mp_fallback, steps: int = 3):
    z = z.copy()
    for _ in range(steps):
        ratio, dabs = _ratio_of(evaluator, z)
        ok = np.isfinite(ratio) & (np.abs(ratio) < 1e-6 * np.maximum(1.0, np.abs(z)))
        z[ok] -= ratio[ok]
    ratio, dabs = _ratio_of(evaluator, z)
    residual = _scaled_residual(ratio, dabs, z)
    if mp_fallback and hasattr(evaluator, "mp_ratio"):
        for i in np.nonzero(~(residual <= 0.01 * res_tol))[0]:
            z[i], residual[i] = _mp_newton(evaluator, z[i])
    return z, residual


def _mp_newton(evaluator, z0: complex, dps: int = 30, max_dps: int = 240):
    """Newton in extended precision; returns the double root and its residual."""
    z = mpmath.mpc(z0)
    while dps <= max_dps:
        with mpmath.workdps(dps):
            step = None
            for _ in range(30):
                r, dabs = evaluator.mp_ratio(z, dps)
                z = z - r
                step = abs(r)
                if step <= mpmath.mpf(10) ** (-(dps - 5)) * max(1, abs(z)):
                    break
            r, dabs = evaluator.mp_ratio(z, dps)
            zc = complex(z)
            scale = max(1.0, abs(zc) * float(dabs))
            residual = float(abs(r)) * float(dabs) / scale if float(dabs) < 1e300 \
                else float(abs(r)) / max(abs(zc), 1e-300)
            if residual < 1e-14:
                return zc, residual
        dps *= 2
    return complex(z), residual


# -- seeds -------------------------------------------------------------------

def circle_seeds(d: int, degree: int, seed: int, radius: float | None = None) -> np.ndarray:
    """``degree`` points on the circle of radius ``1.3 * 2**(1/(d-1))`` with
    deterministic angular jitter."""
    if radius is None:
        radius = 1.3 * 2.0 ** (1.0 / (d - 1))
    rng = np.random.default_rng(seed)
    theta = 2 * np.pi * (np.arange(degree) + rng.uniform(0.0, 0.5, degree)) / degree
    return radius * np.exp(1j * theta)


def ray_seeds(d: int, n: int, radius: float = 1e3, substeps: int = 6,
              newton_steps: int = 20) -> np.ndarray:
    """Points with ``F_n(lam) = radius * exp(2 pi i theta_j)`` for the external
    angles ``theta_j = (j + 1/2) / d**(n-1)``.

    Each point is followed level by level: at level ``k`` the target
    ``F_k = R_s * exp(2 pi i d**(k-1) theta_j)`` moves in from
    ``R**d`` to ``R`` through ``substeps`` radii, and Newton tracks it. The
    points are close to the equipotential through which every external ray
    lands on its own center, so Aberth needs few iterations from them.
    """
    N = d ** (n - 1)
    j = np.arange(N)
    lam = radius * np.exp(2j * np.pi * (j + 0.5) / N)
    for k in range(2, n + 1):
        ang = 2 * np.pi * (((d ** (k - 1)) * (2 * j + 1)) % (2 * N)) / (2 * N)
        phase = np.exp(1j * ang)
        for s in range(1, substeps + 1):
            target = radius ** (d ** (1.0 - s / substeps)) * phase
            lam = _track(d, k, lam, target, newton_steps)
    return lam


@numba.njit(cache=True)
def _track(d, k, lam, target, steps):
    out = lam.copy()
    for i in range(out.size):
        l = out[i]
        for _ in range(steps):
            z = l
            dz = 1.0 + 0j
            for _ in range(k - 1):
                zd1 = ipow(z, d - 1)
                dz = d * zd1 * dz + 1.0
                z = zd1 * z + l
            step = (z - target[i]) / dz
            l -= step
            if abs(step) < 1e-14 * abs(l):
                break
        out[i] = l
    return out


def _dedupe_seeds(z: np.ndarray, seed: int) -> np.ndarray:
    # Newton tracking can merge two seeds; nudge duplicates apart
    if z.size < 2 or min_separation(z) > 1e-9:
        return z
    rng = np.random.default_rng(seed)
    order = np.argsort(z.real)
    zs = z[order]
    for a in range(1, zs.size):
        if abs(zs[a] - zs[a - 1]) < 1e-9:
            zs[a] += 1e-6 * (rng.standard_normal() + 1j * rng.standard_normal())
    out = np.empty_like(z)
    out[order] = zs
    return out


# -- public solvers ----------------------------------------------------------

def superattracting_parameters(d: int, n: int, init: str = "rays") -> RootSet:
    """All ``d**(n-1)`` zeros of ``F_n`` (the centers of period dividing n).

    ``init="rays"`` (default) seeds Aberth from points on external rays;
    ``init="circle"`` uses jittered points on a circle outside the
    connectedness locus, which needs many more iterations at high degree.
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    degree = d ** (n - 1)
    if degree > settings.root_cap:
        raise CapExceeded(f"degree {degree} exceeds the root cap {settings.root_cap}")
    return _superattracting(d, n, init, settings.step_tolerance,
                            settings.residual_tolerance, settings.separation_tolerance)


@lru_cache(maxsize=64)
def _superattracting(d, n, init, step_tol, res_tol, sep_tol) -> RootSet:
    degree = d ** (n - 1)
    if degree == 1:
        return RootSet([0j], [0.0], [1], 1, {"iterations": 0, "init": init})
    if init == "rays":
        seeds = _dedupe_seeds(ray_seeds(d, n), 1000 * d + n)
    elif init == "circle":
        seeds = circle_seeds(d, degree, 1000 * d + n)
    else:
        raise ValueError(f"unknown init {init!r}")
    rs = aberth_solve(CriticalOrbitEvaluator(d, n), degree, seeds)
    rs.meta["init"] = init
    rs.validate()
    return rs


def roots_of_exactpoly(p: ExactPoly, seed: int = 0) -> RootSet:
    """Roots of an integer polynomial with multiplicities.

    Repeated factors are split off exactly first (squarefree test, exact
    k-th root, then Yun's decomposition), so Aberth only ever sees
    squarefree polynomials. Double-precision Aberth on the scaled coefficient
    form gets each root to the evaluation noise floor and ``mpmath`` Newton
    finishes it.
    """
    if p.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    if p.degree > settings.root_cap:
        raise CapExceeded(f"degree {p.degree} exceeds the root cap {settings.root_cap}")
    factors = _squarefree_factors(p)
    roots, residuals, mults = [], [], []
    iterations = 0
    for q, k in factors:
        rs = _solve_squarefree(q, seed)
        iterations = max(iterations, rs.meta.get("iterations", 0))
        roots.append(rs.roots)
        residuals.append(rs.residuals)
        mults.append(np.full(rs.roots.size, k, np.int64))
    out = RootSet(np.concatenate(roots), np.concatenate(residuals), np.concatenate(mults),
                  p.degree, {"iterations": iterations, "factors": [(q.degree, k) for q, k in factors]})
    return out


def _squarefree_factors(p: ExactPoly) -> list[tuple[ExactPoly, int]]:
    # a zero root of order k is split off by hand
    low = next(i for i, c in enumerate(p.coeffs) if c)
    out = []
    if low:
        out.append((ExactPoly.x(p.var), low))
        p = ExactPoly(p.coeffs[low:], p.var)
        if p.degree == 0:
            return out
    if is_squarefree(p, method="modular"):
        return out + [(p, 1)]
    if p.is_monic():
        for k in sorted((k for k in range(2, p.degree + 1) if p.degree % k == 0), reverse=True):
            q = poly_exact_root(p, k)
            if q is not None and is_squarefree(q, method="modular"):
                return out + [(q, k)]
    return out + squarefree_decomposition(p)


def _solve_squarefree(q: ExactPoly, seed: int) -> RootSet:
    if q.degree == 1:
        a0, a1 = q.coeffs
        z = complex(-a0 / a1) if abs(a0) < 2**1000 else complex(-(a0 // a1))
        return RootSet([z], [0.0], [1], 1, {"iterations": 0})
    ev = CoefficientEvaluator(q)
    lead = abs(q.leading)
    # Fujiwara-type bound on the root moduli
    bound = 2 * max(float(Fraction(abs(q.coeffs[q.degree - k]), lead)) ** (1.0 / k)
                    for k in range(1, q.degree + 1))
    seeds = circle_seeds(2, q.degree, seed + q.degree, radius=max(bound, 1e-3))
    rs = aberth_solve(ev, q.degree, seeds)
    if q.degree > 1 and rs.min_separation() < settings.separation_tolerance:
        raise NoConvergence(rs.meta["iterations"], float("nan"), "two roots merged during polishing")
    return rs
