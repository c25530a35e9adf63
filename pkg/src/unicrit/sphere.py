"""Product grid on the Riemann sphere adapted to the Fubini-Study area.

With ``u = r**2 / (1 + r**2)`` the normalized area element
``2r/(1+r**2)**2 dr dtheta/(2 pi)`` becomes ``du dtheta/(2 pi)``, so a uniform
midpoint grid in ``(u, theta)`` integrates against omega by plain averaging.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class SphereGrid:
    """``n_u`` midpoint nodes in ``u`` times ``n_theta`` nodes in ``theta``.

    Node ``(i, j)`` sits at ``u_i = (i + 1/2)/n_u`` and
    ``theta_j = 2 pi j / n_theta``; no node is 0 or infinity.
    """

    n_u: int = 1024
    n_theta: int = 1024

    def __post_init__(self):
        if self.n_u < 1 or self.n_theta < 1:
            raise ValueError("grid dimensions must be positive")

    @classmethod
    def parse(cls, text: str) -> "SphereGrid":
        """``"NxM"`` -> ``SphereGrid(N, M)``."""
        a, _, b = text.lower().partition("x")
        return cls(int(a), int(b or a))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_u, self.n_theta)

    @property
    def size(self) -> int:
        return self.n_u * self.n_theta

    @property
    def label(self) -> str:
        return f"{self.n_u}x{self.n_theta}"

    @cached_property
    def u(self) -> np.ndarray:
        return (np.arange(self.n_u) + 0.5) / self.n_u

    @cached_property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(self.u / (1.0 - self.u))

    @cached_property
    def z(self) -> np.ndarray:
        """Chart points, shape ``(n_u, n_theta)``."""
        z = self.r[:, None] * np.exp(1j * self.theta)[None, :]
        z.setflags(write=False)
        return z

    @property
    def weight(self) -> float:
        return 1.0 / self.size

    def mean(self, values) -> float:
        """Uniform-weight quadrature; numpy's pairwise summation keeps it
        deterministic for a fixed grid."""
        return float(np.mean(np.asarray(values, dtype=np.float64)))
