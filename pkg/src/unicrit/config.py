"""Run-time limits shared by the algebra and root-finding layers.

The caps are configuration rather than constants: experiment drivers and the
CLI raise them on machines that can afford it.

>>> from unicrit import config
>>> with config.override(degree_cap=8192):
...     config.settings.degree_cap
8192
"""

from __future__ import annotations

import contextlib
import dataclasses


@dataclasses.dataclass
class Settings:
    degree_cap: int = 4096         # max d**(n-1) for coefficient expansion of F_n
    bivariate_cap: int = 64        # max nu(d, n) for bivariate dynatomic work
    root_cap: int = 8192           # max degree handed to the Aberth solver
    step_tolerance: float = 1e-13
    residual_tolerance: float = 1e-10
    separation_tolerance: float = 1e-8


settings = Settings()


@contextlib.contextmanager
def override(**changes):
    old = dataclasses.asdict(settings)
    for key, value in changes.items():
        if not hasattr(settings, key):
            raise AttributeError(f"unknown setting {key!r}")
        setattr(settings, key, value)
    try:
        yield settings
    finally:
        for key, value in old.items():
            setattr(settings, key, value)
