"""Small numba helpers shared by the iteration kernels."""

import numba


@numba.njit(cache=True, inline="always")
def ipow(z, k):
    """``z**k`` for a non-negative integer ``k`` by repeated squaring.

    numba lowers complex ``**`` to a general ``pow``, which is several
    times slower in the hot loops.
    """
    result = 1.0 + 0j
    base = z
    while k > 0:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result
