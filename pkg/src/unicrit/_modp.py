"""Word-size modular kernels (primes below 2**31, so products fit in int64)."""

from __future__ import annotations

from functools import lru_cache

import gmpy2
import numba
import numpy as np


@lru_cache(maxsize=None)
def primes_below(bound: int, count: int) -> tuple[int, ...]:
    out = []
    p = bound - 1
    while len(out) < count:
        if gmpy2.is_prime(p):
            out.append(p)
        p -= 1
    return tuple(out)


def prime_stream(bound: int = 2**31):
    """Primes below ``bound`` in decreasing order, without end."""
    chunk = 64
    while True:
        for p in primes_below(bound, chunk):
            yield p
        bound = primes_below(bound, chunk)[-1]


def residues(values, p: int) -> np.ndarray:
    return np.fromiter((v % p for v in values), dtype=np.int64, count=len(values))


@numba.njit(cache=True, inline="always")
def _reduce(x, p, pinv):
    """``x mod p`` for ``|x| < 2**62`` using a float quotient estimate."""
    q = np.int64(np.float64(x) * pinv)
    r = x - q * p
    r += p & (r >> 63)
    r -= p & ((p - 1 - r) >> 63)
    return r


@numba.njit(cache=True)
def powmod(a, e, p):
    r = 1
    a %= p
    while e > 0:
        if e & 1:
            r = r * a % p
        a = a * a % p
        e >>= 1
    return r


@numba.njit(cache=True)
def _degree(a):
    k = a.size - 1
    while k >= 0 and a[k] == 0:
        k -= 1
    return k


@numba.njit(cache=True)
def resultant_modp(a, b, p):
    """Sylvester resultant ``Res(a, b)`` of ascending coefficient arrays mod p."""
    da = _degree(a)
    db = _degree(b)
    if da < 0 or db < 0:
        return 0
    a = a[: da + 1].copy()
    b = b[: db + 1].copy()
    pinv = 1.0 / p
    res = 1
    if da < db:
        a, b = b, a
        da, db = db, da
        if (da * db) % 2 == 1:
            res = p - 1
    while True:
        if db == 0:
            return res * powmod(b[0], da, p) % p
        inv = powmod(b[db], p - 2, p)
        r = a.copy()
        for k in range(da, db - 1, -1):
            c = _reduce(r[k] * inv, p, pinv)
            if c != 0:
                off = k - db
                for t in range(db + 1):
                    r[off + t] = _reduce(r[off + t] - c * b[t], p, pinv)
        dr = db - 1
        while dr >= 0 and r[dr] == 0:
            dr -= 1
        if dr < 0:
            return 0
        if (da * db) % 2 == 1:
            res = (p - res) % p
        res = res * powmod(b[db], da - dr, p) % p
        a = b
        b = r[: dr + 1].copy()
        da = db
        db = dr


@numba.njit(cache=True)
def gcd_degree_modp(a, b, p):
    """Degree of ``gcd(a, b)`` over GF(p); -1 when both vanish."""
    a = a.copy() % p
    b = b.copy() % p
    da = _degree(a)
    db = _degree(b)
    while db >= 0:
        inv = powmod(b[db], p - 2, p)
        for k in range(da, db - 1, -1):
            c = a[k] * inv % p
            if c != 0:
                off = k - db
                for t in range(db + 1):
                    v = (a[off + t] - c * b[t]) % p
                    if v < 0:
                        v += p
                    a[off + t] = v
        dr = _degree(a[:db]) if db > 0 else -1
        a, b = b, a
        da, db = db, dr
    return da


@numba.njit(cache=True)
def eval_rows(mat, x, p):
    """Evaluate every row of ``mat`` (ascending in x) at ``x`` mod p."""
    pinv = 1.0 / p
    ny, nx = mat.shape
    out = np.zeros(ny, np.int64)
    x = x % p
    # Horner across all rows at once so the inner loop has no dependency chain
    for i in range(nx - 1, -1, -1):
        for j in range(ny):
            out[j] = _reduce(out[j] * x + mat[j, i], p, pinv)
    return out


@numba.njit(cache=True)
def resultant_grid(amat, bmat, xs, ws, p):
    """``Res_y(A(x, y), B(x, y) - w)`` for every pair in ``xs x ws`` mod p."""
    out = np.empty((xs.size, ws.size), np.int64)
    for i in range(xs.size):
        a = eval_rows(amat, xs[i], p)
        b = eval_rows(bmat, xs[i], p)
        b0 = b[0]
        for j in range(ws.size):
            v = (b0 - ws[j]) % p
            if v < 0:
                v += p
            b[0] = v
            out[i, j] = resultant_modp(a, b, p)
    return out


@numba.njit(cache=True)
def interpolate_modp(xs, ys, p):
    """Monomial coefficients of the interpolant through ``(xs, ys)`` mod p."""
    pinv = 1.0 / p
    n = xs.size
    c = ys.copy() % p
    consecutive = True
    for i in range(n):
        if xs[i] != i:
            consecutive = False
            break
    if consecutive:
        # nodes 0..n-1: every difference xs[i] - xs[i-j] equals j
        inv = np.ones(max(n, 2), np.int64)
        for j in range(2, n):
            inv[j] = _reduce(-(p // j) * inv[p % j], p, pinv)
        for j in range(1, n):
            for i in range(n - 1, j - 1, -1):
                c[i] = _reduce(_reduce(c[i] - c[i - 1], p, pinv) * inv[j], p, pinv)
    else:
        for j in range(1, n):
            for i in range(n - 1, j - 1, -1):
                den = (xs[i] - xs[i - j]) % p
                c[i] = (c[i] - c[i - 1]) % p * powmod(den, p - 2, p) % p
    poly = np.zeros(n, np.int64)
    poly[0] = c[n - 1]
    deg = 0
    for i in range(n - 2, -1, -1):
        # poly <- poly * (x - xs[i]) + c[i]
        xi = xs[i] % p
        for k in range(deg + 1, 0, -1):
            poly[k] = _reduce(poly[k - 1] - poly[k] * xi, p, pinv)
        poly[0] = _reduce(c[i] - poly[0] * xi, p, pinv)
        deg += 1
    for k in range(n):
        if poly[k] < 0:
            poly[k] += p
    return poly


@numba.njit(cache=True)
def horner_modp(coeffs, x, p):
    acc = 0
    for i in range(coeffs.size - 1, -1, -1):
        acc = (acc * x + coeffs[i]) % p
    return acc


class CRT:
    """Incremental Chinese remaindering of an integer vector (symmetric range)."""

    def __init__(self, size: int):
        self.values = [0] * size
        self.modulus = 1
        self.primes: list[int] = []
        self.stable_rounds = 0

    def add(self, p: int, res) -> bool:
        """Fold residues mod ``p``; return True when nothing changed."""
        M = self.modulus
        inv = pow(M % p, -1, p)
        changed = False
        new_mod = M * p
        half = new_mod // 2
        vals = self.values
        for k, r in enumerate(res):
            x = vals[k]
            t = ((int(r) - x) % p) * inv % p
            if t:
                changed = True
                x = x + M * t
                if x > half:
                    x -= new_mod
                vals[k] = x
        self.modulus = new_mod
        self.primes.append(p)
        self.stable_rounds = 0 if changed else self.stable_rounds + 1
        return not changed
