"""Equidistribution experiments for the unicritical family ``z**d + lam``.

Modules: :mod:`ntheory` (divisor sums and bound sequences), :mod:`exactpoly`
(exact integer polynomials), :mod:`rootfind` (Aberth root finding),
:mod:`dynamics` (Green functions and periodic points), :mod:`measures`
(sphere quadrature, pairings, constants) and :mod:`cli`.
"""

__version__ = "0.1.0"

from . import config, errors, ntheory  # noqa: E402,F401
