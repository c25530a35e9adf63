"""Divisor sums, the Moebius function, and the explicit bound sequences.

Everything except :func:`t_n` and :func:`t_n_star` is exact integer
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

LOG_SQRT2_PLUS_1 = math.log(math.sqrt(2.0) + 1.0)


@dataclass(frozen=True)
class FamilyParams:
    """Degree ``d`` of ``z**d + lam`` and a period index ``n``."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"degree d must be >= 2, got {self.d}")
        if self.n < 1:
            raise ValueError(f"period n must be >= 1, got {self.n}")


def _check_positive(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"expected an int, got {type(n).__name__}")
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")


def _check_degree(d: int) -> None:
    if d < 2:
        raise ValueError(f"degree d must be >= 2, got {d}")


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization by trial division, as ``((p, e), ...)`` ascending."""
    _check_positive(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def divisors(n: int) -> list[int]:
    _check_positive(n)
    small, large = [], []
    for m in range(1, math.isqrt(n) + 1):
        if n % m == 0:
            small.append(m)
            if m != n // m:
                large.append(n // m)
    return small + large[::-1]


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def nu(d: int, n: int) -> int:
    """Degree in ``z`` of the n-th dynatomic polynomial of ``z**d + lam``."""
    _check_degree(d)
    return sum(mobius(n // m) * d**m for m in divisors(n))


def sigma0(n: int) -> int:
    return len(divisors(n))


def sigma1(n: int) -> int:
    return sum(divisors(n))


def _t_constant_part(d: int, c_bf: float) -> float:
    return (d + 1) * math.log(2.0) + 4.0 * c_bf / (d - 1) + (d - 1) * LOG_SQRT2_PLUS_1


def t_n(d: int, n: int, c_bf: float) -> float:
    """Uniform bound on ``|log|F_n||`` over the bifurcation locus.

    ``c_bf`` is the distortion constant of the family over its bifurcation
    locus; it enters linearly with weight ``4 / (d - 1)**2``.
    """
    _check_degree(d)
    _check_positive(n)
    if c_bf < 0:
        raise ValueError("c_bf must be nonnegative")
    return (_t_constant_part(d, c_bf) + 2.0 * math.log(d) * (n - 1)) / (d - 1)


def t_n_star(d: int, n: int, c_bf: float) -> float:
    """``(d - 1) * sum(t_m for m | n)`` in its closed sigma form."""
    _check_degree(d)
    _check_positive(n)
    if c_bf < 0:
        raise ValueError("c_bf must be nonnegative")
    const = _t_constant_part(d, c_bf) - 2.0 * math.log(d)
    return 2.0 * math.log(d) * sigma1(n) + const * sigma0(n)


def t_n_star_by_divisors(d: int, n: int, c_bf: float) -> float:
    """Same quantity as :func:`t_n_star`, summed over divisors directly."""
    return (d - 1) * math.fsum(t_n(d, m, c_bf) for m in divisors(n))
