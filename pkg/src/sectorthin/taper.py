"""Bessel-kernel amplitude taper used as the sidelobe benchmark.

``T(n) = I0(alpha sqrt(1 - (2n/N)^2)) / I0(alpha)`` for
``n = -N/2 .. N/2 - 1``.  On the circular aperture the normalized radius
``r / R`` takes the place of ``|2n / N|``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import i0

from .errors import ConfigInvalid

RADIAL = "radial"
SEPARABLE = "separable"

DEFAULT_ALPHA = 3.5


@dataclass(frozen=True)
class TaperConfig:
    alpha: float = DEFAULT_ALPHA
    mode: str = RADIAL

    def __post_init__(self):
        problems = {}
        if not self.alpha >= 0:
            problems["taper.alpha"] = f"must be >= 0, got {self.alpha!r}"
        if self.mode not in (RADIAL, SEPARABLE):
            problems["taper.mode"] = f"must be {RADIAL!r} or {SEPARABLE!r}"
        if problems:
            raise ConfigInvalid(problems)


def _kernel(u, alpha):
    u = np.clip(np.abs(np.asarray(u, dtype=float)), 0.0, 1.0)
    return i0(alpha * np.sqrt(1.0 - u * u)) / i0(alpha)


def taylor_weights_1d(n_points: int, alpha: float) -> np.ndarray:
    if n_points < 1:
        raise ConfigInvalid({"n_points": "must be >= 1"})
    n = np.arange(n_points) - n_points // 2
    return _kernel(2.0 * n / n_points, alpha)


def radial_taper(layout, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Weight of each element from its normalized radius."""
    return _kernel(layout.radii / layout.aperture_radius, alpha)


def separable_taper(layout, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Row-column product of the 1D kernel along x and y."""
    x = layout.positions[:, 0] / layout.aperture_radius
    y = layout.positions[:, 1] / layout.aperture_radius
    return _kernel(x, alpha) * _kernel(y, alpha)


def taper_weights(layout, cfg: TaperConfig) -> np.ndarray:
    if cfg.mode == SEPARABLE:
        return separable_taper(layout, cfg.alpha)
    return radial_taper(layout, cfg.alpha)
