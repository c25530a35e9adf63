"""Dense big-integer polynomials and the exact constructions built on them.

Coefficients are Python ints in ascending degree order. Large products go
through Kronecker substitution so a single (GMP-backed) integer multiply does
the work; everything else is schoolbook.

The family is ``f_lam(z) = z**d + lam`` with marked critical point 0, and

* ``critical_orbit_poly(d, n)`` is ``F_n(lam) = f_lam^n(0)``,
* ``dynatomic_bivariate(d, n)`` is the Moebius product of ``f^m(z) - z``,
* ``multiplier_poly_power(d, n)`` is ``Res_z(Phi_n(lam, z), (f^n)'(z) - w)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import gmpy2
import numpy as np

from . import _modp
from .config import settings
from .errors import CapExceeded, DegreeCapExceeded, NonDivisibleError
from .ntheory import divisors, mobius, nu

_SCHOOLBOOK_LIMIT = 40


def _trim(coeffs: Iterable[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


# -- Kronecker substitution -------------------------------------------------

def _max_bits(c: Sequence[int]) -> int:
    return max((abs(x).bit_length() for x in c), default=0)


def _pack(coeffs: Sequence[int], nbytes: int) -> int:
    if all(c >= 0 for c in coeffs):
        return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _unpack(value: int, count: int, nbytes: int) -> list[int]:
    half = 1 << (8 * nbytes - 1)
    offset = int.from_bytes((b"\x00" * (nbytes - 1) + b"\x80") * count, "little")
    raw = (value + offset).to_bytes(count * nbytes, "little")
    return [int.from_bytes(raw[k * nbytes:(k + 1) * nbytes], "little") - half
            for k in range(count)]


def _schoolbook(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _mul_lists(a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return []
    if min(len(a), len(b)) <= _SCHOOLBOOK_LIMIT:
        return _schoolbook(a, b)
    bits = _max_bits(a) + _max_bits(b) + min(len(a), len(b)).bit_length() + 2
    nbytes = bits // 8 + 1
    x = gmpy2.mpz(_pack(a, nbytes))
    y = x if a is b else gmpy2.mpz(_pack(b, nbytes))
    return _unpack(int(x * y), len(a) + len(b) - 1, nbytes)


# -- univariate -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExactPoly:
    """Dense univariate polynomial over the integers, ascending order.

    The zero polynomial has an empty coefficient tuple. ``var`` is only used
    for display and never takes part in equality.
    """

    coeffs: tuple[int, ...]
    var: str = "λ"

    def __init__(self, coeffs: Iterable[int] = (), var: str = "λ"):
        object.__setattr__(self, "coeffs", _trim(int(c) for c in coeffs))
        object.__setattr__(self, "var", var)

    @classmethod
    def constant(cls, c: int, var: str = "λ") -> "ExactPoly":
        return cls((c,), var)

    @classmethod
    def x(cls, var: str = "λ") -> "ExactPoly":
        return cls((0, 1), var)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.leading == 1

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, ExactPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == _trim((other,))
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"ExactPoly({self.pretty()})"

    def pretty(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or not mono) else ""
            terms.append(("-" if c < 0 else "+") + body + mono)
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s

    def __neg__(self):
        return ExactPoly((-c for c in self.coeffs), self.var)

    def __add__(self, other):
        other = _as_poly(other, self.var)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return ExactPoly((x + y for x, y in zip(a, b)), self.var)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_poly(other, self.var))

    def __rsub__(self, other):
        return _as_poly(other, self.var) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return ExactPoly((c * other for c in self.coeffs), self.var)
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return poly_pow(self, k)

    def __call__(self, x):
        """Horner evaluation; exact for int/Fraction arguments."""
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def shift(self, k: int) -> "ExactPoly":
        """Multiply by ``var**k``."""
        if not self.coeffs:
            return self
        return ExactPoly((0,) * k + self.coeffs, self.var)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive_part(self) -> "ExactPoly":
        g = self.content()
        if g == 0:
            return self
        if self.leading < 0:
            g = -g
        return ExactPoly((c // g for c in self.coeffs), self.var)

    def to_json(self) -> str:
        """Decimal strings in ascending degree; exact and locale independent."""
        return json.dumps([str(c) for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str, var: str = "λ") -> "ExactPoly":
        return cls((int(s) for s in json.loads(text)), var)

    def to_complex(self, scale_bits: int | None = None) -> np.ndarray:
        """Float coefficients divided by ``2**scale_bits`` (default: fit 2**900)."""
        top = _max_bits(self.coeffs)
        if scale_bits is None:
            scale_bits = max(0, top - 900)
        return np.array([float(Fraction(c, 1 << scale_bits)) if scale_bits else float(c)
                         for c in self.coeffs], dtype=np.complex128)


def _as_poly(p, var="λ") -> ExactPoly:
    if isinstance(p, ExactPoly):
        return p
    if isinstance(p, int):
        return ExactPoly((p,), var)
    raise TypeError(f"cannot use {type(p).__name__} as a polynomial")


def poly_mul(a: ExactPoly, b: ExactPoly) -> ExactPoly:
    a, b = _as_poly(a), _as_poly(b)
    return ExactPoly(_mul_lists(a.coeffs, b.coeffs), a.var)


def poly_pow(a: ExactPoly, k: int) -> ExactPoly:
    if k < 0:
        raise ValueError("negative power")
    result = ExactPoly.constant(1, a.var)
    base = a
    while k:
        if k & 1:
            result = poly_mul(result, base)
        k >>= 1
        if k:
            base = ExactPoly(_mul_lists(base.coeffs, base.coeffs), a.var)
    return result


def poly_derivative(a: ExactPoly) -> ExactPoly:
    return ExactPoly((k * c for k, c in enumerate(a.coeffs) if k), a.var)


def poly_divmod(a: ExactPoly, b: ExactPoly) -> tuple[ExactPoly, ExactPoly]:
    """Division with remainder; requires the leading coefficient of ``b`` to
    divide every leading term met on the way (always true for monic ``b``).

    Raises :class:`NonDivisibleError` at the first coefficient where integer
    division fails.
    """
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    r = list(a.coeffs)
    db = b.degree
    lb = b.leading
    bc = b.coeffs
    if len(r) - 1 < db:
        return ExactPoly((), a.var), a
    q = [0] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        top = r[k]
        if top == 0:
            continue
        c, rem = divmod(top, lb)
        if rem:
            raise NonDivisibleError(k)
        q[k - db] = c
        off = k - db
        for t in range(db + 1):
            if bc[t]:
                r[off + t] -= c * bc[t]
    return ExactPoly(q, a.var), ExactPoly(r[:db], a.var)


def poly_exact_div(a: ExactPoly, b: ExactPoly) -> ExactPoly:
    """Quotient ``q`` with ``a == q * b`` exactly.

    The error's ``index`` is the lowest degree with a nonzero remainder
    coefficient (or the degree where integer division first failed).
    """
    q, r = poly_divmod(a, b)
    if not r.is_zero():
        idx = next(k for k, c in enumerate(r.coeffs) if c)
        raise NonDivisibleError(idx)
    return q


def _pseudo_remainder(a: list[int], b: list[int]) -> list[int]:
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    for k in range(len(r) - 1, db - 1, -1):
        top = r[k]
        r = [c * lb for c in r]
        if top:
            off = k - db
            for t in range(db + 1):
                r[off + t] -= top * b[t]
        r.pop()
    while r and r[-1] == 0:
        r.pop()
    return r


def poly_gcd(a: ExactPoly, b: ExactPoly) -> ExactPoly:
    """GCD over Z[x] via the subresultant remainder sequence.

    The result is primitive with positive leading coefficient times the gcd
    of the contents.
    """
    if a.degree < b.degree:
        a, b = b, a
    if b.is_zero():
        return a.primitive_part() if not a.is_zero() else a
    cont = math.gcd(a.content(), b.content())
    A = list(a.primitive_part().coeffs)
    B = list(b.primitive_part().coeffs)
    g = h = 1
    while True:
        delta = len(A) - len(B)
        R = _pseudo_remainder(A, B)
        if not R:
            return ExactPoly(B, a.var).primitive_part() * cont
        if len(R) == 1:
            return ExactPoly.constant(cont, a.var)
        A = B
        div = g * h**delta
        B = [c // div for c in R]
        g = A[-1]
        if delta == 1:
            h = g
        elif delta > 1:
            h = g**delta // h ** (delta - 1)


def is_squarefree(p: ExactPoly, method: str = "auto", primes: int = 8) -> bool:
    """True iff ``gcd(p, p')`` is constant.

    ``method="modular"`` certifies squarefreeness from one prime where the
    reduction keeps its degree and the modular gcd is constant: any common
    factor over Q survives reduction mod such a prime. Primes that fail the
    test are inconclusive; after ``primes`` of them the exact subresultant
    gcd decides.
    """
    if p.degree < 1:
        return True
    dp = poly_derivative(p)
    if method == "subresultant" or (method == "auto" and p.degree <= 64):
        return poly_gcd(p, dp).degree == 0
    if method not in ("auto", "modular"):
        raise ValueError(f"unknown method {method!r}")
    for q in _modp.primes_below(2**31, primes):
        if p.leading % q == 0:
            continue
        a = _modp.residues(p.coeffs, q)
        b = _modp.residues(dp.coeffs, q)
        if _modp.gcd_degree_modp(a, b, q) == 0:
            return True
    return poly_gcd(p, dp).degree == 0


def squarefree_decomposition(p: ExactPoly) -> list[tuple[ExactPoly, int]]:
    """Yun's algorithm: ``[(a_1, 1), (a_2, 2), ...]`` with ``p ~ prod a_k**k``.

    Factors are primitive; constant factors are dropped.
    """
    out = []
    a0 = p.primitive_part()
    g = poly_gcd(a0, poly_derivative(a0))
    if g.degree == 0:
        return [(a0, 1)]
    b = poly_exact_div(a0, g.primitive_part())
    c = poly_exact_div(poly_derivative(a0), g.primitive_part())
    d = c - poly_derivative(b)
    k = 1
    while b.degree > 0:
        a = poly_gcd(b, d).primitive_part()
        if a.degree > 0:
            out.append((a, k))
        b = poly_exact_div(b, a)
        c = poly_exact_div(d, a)
        d = c - poly_derivative(b)
        k += 1
    return out


def poly_exact_root(p: ExactPoly, k: int) -> ExactPoly | None:
    """The monic ``q`` with ``q**k == p`` when ``p`` is monic and such ``q``
    exists over Z, else ``None``.

    Works on the reversed polynomial ``P(x) = x**D p(1/x)`` (so ``P(0) = 1``)
    and builds the power series ``P**(1/k)`` with the classical recurrence
    ``j*k*q_j = sum_i ((k + 1)*i - j*k) * P_i * q_{j-i}``, which stays in Z
    whenever an integer root exists.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return p
    if not p.is_monic() or p.degree % k:
        return None
    D = p.degree
    m = D // k
    P = p.coeffs[::-1]
    q = [1] + [0] * m
    for j in range(1, m + 1):
        acc = 0
        for i in range(1, j + 1):
            if P[i]:
                acc += ((k + 1) * i - j * k) * P[i] * q[j - i]
        c, rem = divmod(acc, j * k)
        if rem:
            return None
        q[j] = c
    cand = ExactPoly(q[::-1], p.var)
    return cand if poly_pow(cand, k) == p else None


# -- the family's univariate objects ---------------------------------------

def _check_cap(d: int, n: int, cap: int | None) -> None:
    cap = settings.degree_cap if cap is None else cap
    if d ** (n - 1) > cap:
        raise DegreeCapExceeded(f"deg F_{n} = {d}**{n - 1} exceeds the degree cap {cap}")


@lru_cache(maxsize=64)
def _critical_orbit(d: int, n: int) -> ExactPoly:
    if n == 1:
        return ExactPoly.x()
    return poly_pow(_critical_orbit(d, n - 1), d) + ExactPoly.x()


def critical_orbit_poly(d: int, n: int, cap: int | None = None) -> ExactPoly:
    """``F_n`` with ``F_1 = lam`` and ``F_{k+1} = F_k**d + lam``."""
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    _check_cap(d, n, cap)
    return _critical_orbit(d, n)


def fn_is_squarefree(d: int, n: int, method: str = "auto", cap: int | None = None) -> bool:
    return is_squarefree(critical_orbit_poly(d, n, cap), method=method)


def _moebius_groups(n: int) -> tuple[list[int], list[int]]:
    pos = [m for m in divisors(n) if mobius(n // m) == 1]
    neg = [m for m in divisors(n) if mobius(n // m) == -1]
    return pos, neg


def dynatomic_at_zero(d: int, n: int, cap: int | None = None) -> ExactPoly:
    """``Phi_n(lam, 0)`` as the exact quotient of the grouped ``F_m`` products."""
    pos, neg = _moebius_groups(n)
    num = ExactPoly.constant(1)
    for m in pos:
        num = num * critical_orbit_poly(d, m, cap)
    den = ExactPoly.constant(1)
    for m in neg:
        den = den * critical_orbit_poly(d, m, cap)
    return poly_exact_div(num, den)


def pstar_at_zero(d: int, n: int, cap: int | None = None) -> ExactPoly:
    """Monic ``((-1)**nu * Phi_n(lam, 0))**(d - 1)``."""
    base = dynatomic_at_zero(d, n, cap)
    if nu(d, n) % 2:
        base = -base
    return poly_pow(base, d - 1)


# -- bivariate --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExactPoly2:
    """Bivariate integer polynomial stored by powers of the second variable.

    ``rows[j]`` holds the ``lam``-coefficients (ascending) of ``y**j`` where
    ``y`` is ``z`` for dynatomic polynomials and ``w`` for multiplier ones.
    ``matrix()[i][j]`` is the coefficient of ``lam**i * y**j``.
    """

    rows: tuple[tuple[int, ...], ...]
    vars: tuple[str, str] = ("λ", "z")

    def __init__(self, rows: Iterable[Iterable[int]], vars: tuple[str, str] = ("λ", "z")):
        r = [_trim(row) for row in rows]
        while r and not r[-1]:
            r.pop()
        object.__setattr__(self, "rows", tuple(r))
        object.__setattr__(self, "vars", tuple(vars))

    @classmethod
    def from_polys(cls, polys: Sequence[ExactPoly], vars=("λ", "z")) -> "ExactPoly2":
        return cls((p.coeffs for p in polys), vars)

    @property
    def degree_y(self) -> int:
        return len(self.rows) - 1

    @property
    def degree_x(self) -> int:
        return max((len(r) - 1 for r in self.rows), default=-1)

    def is_zero(self) -> bool:
        return not self.rows

    def coefficient(self, i: int, j: int) -> int:
        if j >= len(self.rows) or i >= len(self.rows[j]):
            return 0
        return self.rows[j][i]

    def matrix(self) -> list[list[int]]:
        nx = self.degree_x + 1
        return [[self.coefficient(i, j) for j in range(len(self.rows))] for i in range(nx)]

    def column(self, j: int) -> ExactPoly:
        """Coefficient of ``y**j`` as a polynomial in ``lam``."""
        return ExactPoly(self.rows[j] if j < len(self.rows) else (), self.vars[0])

    def polys(self) -> list[ExactPoly]:
        return [self.column(j) for j in range(len(self.rows))]

    def leading_y(self) -> ExactPoly:
        return self.column(self.degree_y)

    def leading_x(self) -> ExactPoly:
        """Coefficient of the top power of ``lam``, as a polynomial in ``y``."""
        dx = self.degree_x
        return ExactPoly((self.coefficient(dx, j) for j in range(len(self.rows))), self.vars[1])

    def specialize_y(self, y) -> ExactPoly:
        acc = ExactPoly((), self.vars[0])
        for row in reversed(self.rows):
            acc = acc * y + ExactPoly(row, self.vars[0])
        return acc

    def __call__(self, x, y):
        acc = 0 * x * y
        for row in reversed(self.rows):
            v = 0 * x
            for c in reversed(row):
                v = v * x + c
            acc = acc * y + v
        return acc

    def __eq__(self, other):
        if isinstance(other, ExactPoly2):
            return self.rows == other.rows
        return NotImplemented

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return (f"ExactPoly2(deg_{self.vars[0]}={self.degree_x}, "
                f"deg_{self.vars[1]}={self.degree_y})")

    def __neg__(self):
        return ExactPoly2(([-c for c in row] for row in self.rows), self.vars)

    def __add__(self, other):
        other = _as_poly2(other, self.vars)
        n = max(len(self.rows), len(other.rows))
        out = []
        for j in range(n):
            a = self.column(j)
            b = other.column(j)
            out.append((a + b).coeffs)
        return ExactPoly2(out, self.vars)

    def __sub__(self, other):
        return self + (-_as_poly2(other, self.vars))

    def __mul__(self, other):
        if isinstance(other, int):
            return ExactPoly2(([c * other for c in row] for row in self.rows), self.vars)
        return poly2_mul(self, _as_poly2(other, self.vars))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = ExactPoly2([[1]], self.vars)
        base = self
        while k:
            if k & 1:
                result = poly2_mul(result, base)
            k >>= 1
            if k:
                base = poly2_mul(base, base)
        return result

    def to_json(self) -> str:
        return json.dumps({"vars": list(self.vars),
                           "rows": [[str(c) for c in row] for row in self.rows]})

    @classmethod
    def from_json(cls, text: str) -> "ExactPoly2":
        obj = json.loads(text)
        return cls(([int(s) for s in row] for row in obj["rows"]), tuple(obj["vars"]))


def _as_poly2(p, vars=("λ", "z")) -> ExactPoly2:
    if isinstance(p, ExactPoly2):
        return p
    if isinstance(p, ExactPoly):
        return ExactPoly2([p.coeffs], vars)
    if isinstance(p, int):
        return ExactPoly2([[p]], vars)
    raise TypeError(f"cannot use {type(p).__name__} as a bivariate polynomial")


def poly2_mul(a: ExactPoly2, b: ExactPoly2) -> ExactPoly2:
    if a.is_zero() or b.is_zero():
        return ExactPoly2((), a.vars)
    stride = a.degree_x + b.degree_x + 1
    fa = [0] * (stride * len(a.rows))
    for j, row in enumerate(a.rows):
        fa[j * stride:j * stride + len(row)] = row
    fb = [0] * (stride * len(b.rows))
    for j, row in enumerate(b.rows):
        fb[j * stride:j * stride + len(row)] = row
    prod = _mul_lists(fa, fb)
    ny = len(a.rows) + len(b.rows) - 1
    prod += [0] * (ny * stride - len(prod))
    return ExactPoly2((prod[j * stride:(j + 1) * stride] for j in range(ny)), a.vars)


def poly2_exact_div(a: ExactPoly2, b: ExactPoly2) -> ExactPoly2:
    """Exact division in ``Z[lam][y]`` by long division in ``y``."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    r = a.polys()
    bp = b.polys()
    db = b.degree_y
    lead = bp[-1]
    if len(r) - 1 < db:
        if a.is_zero():
            return a
        raise NonDivisibleError(0)
    q = [ExactPoly(()) for _ in range(len(r) - db)]
    for k in range(len(r) - 1, db - 1, -1):
        if r[k].is_zero():
            continue
        c = r[k] if lead == 1 else poly_exact_div(r[k], lead)
        q[k - db] = c
        off = k - db
        for t in range(db + 1):
            if not bp[t].is_zero():
                r[off + t] = r[off + t] - c * bp[t]
    for k in range(db):
        if not r[k].is_zero():
            raise NonDivisibleError(k)
    return ExactPoly2.from_polys(q, a.vars)


def _zpoly(d: int) -> ExactPoly2:
    return ExactPoly2([[], [1]])


@lru_cache(maxsize=32)
def iterate_bivariate(d: int, m: int) -> ExactPoly2:
    """``f_lam^m(z)`` as a polynomial in ``(lam, z)``; ``m = 0`` gives ``z``."""
    if m == 0:
        return _zpoly(d)
    prev = iterate_bivariate(d, m - 1)
    return prev**d + ExactPoly2([[0, 1]])


def _check_bivariate_cap(d: int, n: int, cap: int | None) -> None:
    cap = settings.bivariate_cap if cap is None else cap
    v = nu(d, n)
    if v > cap:
        raise CapExceeded(f"nu({d}, {n}) = {v} exceeds the bivariate cap {cap}")


@lru_cache(maxsize=32)
def _dynatomic_bivariate(d: int, n: int) -> ExactPoly2:
    pos, neg = _moebius_groups(n)
    z = _zpoly(d)
    num = ExactPoly2([[1]])
    for m in pos:
        num = num * (iterate_bivariate(d, m) - z)
    den = ExactPoly2([[1]])
    for m in neg:
        den = den * (iterate_bivariate(d, m) - z)
    return poly2_exact_div(num, den)


def dynatomic_bivariate(d: int, n: int, cap: int | None = None) -> ExactPoly2:
    """``Phi_n(lam, z)``, monic in ``z`` of degree ``nu(d, n)``."""
    _check_bivariate_cap(d, n, cap)
    return _dynatomic_bivariate(d, n)


@lru_cache(maxsize=32)
def iterate_derivative(d: int, n: int) -> ExactPoly2:
    """``(f^n)'(z) = d**n * prod_{j<n} f^j(z)**(d-1)`` via the chain rule."""
    out = ExactPoly2([[d**n]])
    for j in range(n):
        out = out * iterate_bivariate(d, j) ** (d - 1)
    return out


def poly2_derivative_y(a: ExactPoly2) -> ExactPoly2:
    return ExactPoly2(([j * c for c in a.rows[j]] for j in range(1, len(a.rows))), a.vars)


# -- resultants -------------------------------------------------------------

def sylvester_matrix(a: Sequence, b: Sequence) -> list[list]:
    """Sylvester matrix of ``a, b`` given as ascending coefficient sequences
    (entries may be ints or :class:`ExactPoly`)."""
    da, db = len(a) - 1, len(b) - 1
    size = da + db
    zero = ExactPoly(())
    rows = []
    for i in range(db):
        row = [zero] * size
        for k, c in enumerate(reversed(a)):
            row[i + k] = _as_poly(c)
        rows.append(row)
    for i in range(da):
        row = [zero] * size
        for k, c in enumerate(reversed(b)):
            row[i + k] = _as_poly(c)
        rows.append(row)
    return rows


def bareiss_determinant(rows: list[list[ExactPoly]]) -> ExactPoly:
    """Fraction-free elimination; every division is exact."""
    m = [list(r) for r in rows]
    size = len(m)
    if size == 0:
        return ExactPoly.constant(1)
    sign = 1
    prev = ExactPoly.constant(1)
    for k in range(size - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, size) if not m[i][k].is_zero()), None)
            if swap is None:
                return ExactPoly(())
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, size):
            mik = m[i][k]
            row_i = m[i]
            row_k = m[k]
            for j in range(k + 1, size):
                t = pivot * row_i[j]
                if not mik.is_zero() and not row_k[j].is_zero():
                    t = t - mik * row_k[j]
                row_i[j] = t if prev == 1 else poly_exact_div(t, prev)
            row_i[k] = ExactPoly(())
        prev = pivot
    det = m[size - 1][size - 1]
    return -det if sign < 0 else det


def sylvester_resultant(a: Sequence, b: Sequence) -> ExactPoly:
    """``Res(a, b)`` of polynomials in ``z`` whose coefficients lie in ``Z[lam]``.

    ``a`` and ``b`` are ascending sequences (ints or :class:`ExactPoly`), or
    :class:`ExactPoly2` instances.
    """
    if isinstance(a, ExactPoly2):
        a = a.polys()
    if isinstance(b, ExactPoly2):
        b = b.polys()
    a = [_as_poly(c) for c in a]
    b = [_as_poly(c) for c in b]
    while a and a[-1].is_zero():
        a.pop()
    while b and b[-1].is_zero():
        b.pop()
    if not a or not b:
        raise ValueError("resultant of a zero polynomial")
    if len(a) == 1 and len(b) == 1:
        return ExactPoly.constant(1)
    return bareiss_determinant(sylvester_matrix(a, b))


def _interpolate_exact(xs: Sequence[int], values: Sequence[ExactPoly]) -> list[ExactPoly]:
    """Lagrange interpolation over Q of ExactPoly-valued data; the result
    must have integer coefficients (checked)."""
    n = len(xs)
    # coefficient vectors of each Lagrange basis polynomial, as Fractions
    coeff = [[Fraction(0)] * n for _ in range(n)]
    for i, xi in enumerate(xs):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xj * basis[k + 1]
            denom *= xi - xj
        for k in range(n):
            coeff[i][k] = basis[k] / denom
    width = max(len(v.coeffs) for v in values)
    out = []
    for k in range(n):
        acc = [Fraction(0)] * width
        for i, v in enumerate(values):
            ck = coeff[i][k]
            if ck:
                for t, c in enumerate(v.coeffs):
                    acc[t] += ck * c
        if any(a.denominator != 1 for a in acc):
            raise NonDivisibleError(k, "interpolated coefficient is not integral")
        out.append(ExactPoly(int(a) for a in acc))
    return out


def _claimed_lambda_degree(d: int, n: int) -> int:
    return n * (d - 1) * nu(d, n) // d


def resultant_crt(a: ExactPoly2, b: ExactPoly2, x_degree: int, ws: Sequence[int] | None,
                  w_degree: int = 0, checks: int = 2, seed: int = 0) -> tuple[list[list[int]], dict]:
    """``Res_y(a, b - w)`` by evaluation, interpolation and Chinese remaindering.

    With ``ws=None`` the result is bivariate in ``(lam, w)`` of ``w``-degree at
    most ``w_degree``; otherwise one ``lam``-polynomial per value in ``ws``.
    ``x_degree`` is the interpolation degree in ``lam``; ``checks`` random
    extra points per prime verify it, so an understated degree raises instead
    of silently truncating. Primes are added until two successive ones leave
    the reconstruction unchanged.

    Returns ``(coefficients, info)``; ``coefficients[j][i]`` is the
    coefficient of ``lam**i`` in the ``j``-th output.
    """
    rng = np.random.default_rng(seed)
    ay, by = a.degree_y, b.degree_y
    nxa, nxb = a.degree_x + 1, b.degree_x + 1
    if ws is None:
        wpts = np.arange(w_degree + 1, dtype=np.int64)
    else:
        wpts = None
    nouts = (w_degree + 1) if ws is None else len(ws)
    crt = _modp.CRT(nouts * (x_degree + 1))
    xs = np.arange(x_degree + 1, dtype=np.int64)
    flat_a = [c for row in a.rows for c in row]
    flat_b = [c for row in b.rows for c in row]
    for p in _modp.prime_stream():
        amat = np.zeros((ay + 1, nxa), np.int64)
        bmat = np.zeros((by + 1, nxb), np.int64)
        ra = _modp.residues(flat_a, p)
        rb = _modp.residues(flat_b, p)
        pos = 0
        for j, row in enumerate(a.rows):
            amat[j, :len(row)] = ra[pos:pos + len(row)]
            pos += len(row)
        pos = 0
        for j, row in enumerate(b.rows):
            bmat[j, :len(row)] = rb[pos:pos + len(row)]
            pos += len(row)
        wv = wpts if ws is None else np.array([w % p for w in ws], np.int64)
        extra = rng.integers(x_degree + 1, p, size=checks).astype(np.int64)
        grid = _modp.resultant_grid(amat, bmat, np.concatenate([xs, extra]), wv, p)
        cols = []
        for j in range(wv.size):
            coeffs = _modp.interpolate_modp(xs, grid[: x_degree + 1, j].copy(), p)
            for e, xe in enumerate(extra):
                if _modp.horner_modp(coeffs, xe, p) != grid[x_degree + 1 + e, j]:
                    raise ValueError(f"resultant has lam-degree above {x_degree}")
            cols.append(coeffs)
        lam_by_w = np.array(cols)  # rows: w point, cols: lam power
        if ws is None:
            # interpolate across w for each lam power
            out = np.empty((w_degree + 1, x_degree + 1), np.int64)
            for i in range(x_degree + 1):
                out[:, i] = _modp.interpolate_modp(wpts, lam_by_w[:, i].copy(), p)
        else:
            out = lam_by_w
        crt.add(p, out.ravel())
        if len(crt.primes) >= 3 and crt.stable_rounds >= 2:
            break
    vals = crt.values
    width = x_degree + 1
    coeffs = [vals[j * width:(j + 1) * width] for j in range(nouts)]
    return coeffs, {"primes": len(crt.primes), "modulus_bits": crt.modulus.bit_length()}


def multiplier_poly_power(d: int, n: int, method: str = "auto",
                          cap: int | None = None) -> ExactPoly2:
    """``p*_n(lam, w)**n = Res_z(Phi_n(lam, z), (f^n)'(z) - w)`` in ``(lam, w)``.

    ``method="bareiss"`` takes Sylvester determinants over ``Z[lam]`` at
    ``nu + 1`` integer values of ``w`` and interpolates exactly;
    ``method="modular"`` evaluates at integer points mod word-size primes.
    """
    phi = dynatomic_bivariate(d, n, cap)
    deriv = iterate_derivative(d, n)
    v = nu(d, n)
    if method == "auto":
        method = "bareiss" if v <= 6 else "modular"
    if method == "bareiss":
        ws = list(range(v + 1))
        vals = []
        for w in ws:
            shifted = deriv - ExactPoly2([[w]])
            vals.append(sylvester_resultant(phi, shifted))
        cols = _interpolate_exact(ws, vals)
        return ExactPoly2((c.coeffs for c in cols), ("λ", "w"))
    if method == "modular":
        coeffs, _ = resultant_crt(phi, deriv, _claimed_lambda_degree(d, n), None, w_degree=v)
        return ExactPoly2(coeffs, ("λ", "w"))
    raise ValueError(f"unknown method {method!r}")


def multiplier_poly_power_at(d: int, n: int, w: int, cap: int | None = None) -> ExactPoly:
    """``p*_n(lam, w)**n`` at a fixed integer ``w`` as a polynomial in ``lam``."""
    phi = dynatomic_bivariate(d, n, cap)
    deriv = iterate_derivative(d, n)
    coeffs, _ = resultant_crt(phi, deriv, _claimed_lambda_degree(d, n), [w])
    return ExactPoly(coeffs[0])
