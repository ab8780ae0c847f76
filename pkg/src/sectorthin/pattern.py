"""Radiation pattern of a planar array: element pattern times array factor.

Phases are computed from the actual element coordinates,
``k (x sin(theta) cos(phi) + y sin(theta) sin(phi))``, with coordinates in
wavelengths so that ``k = 2 pi``.  Weights may be complex; thinning uses 0/1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroPattern, ConfigInvalid, LengthMismatch

DB_FLOOR = -120.0
TWO_PI = 2 * np.pi

COS_PRODUCT = "cos-product"
AZIMUTH_SYMMETRIC = "azimuth-symmetric"
ELEMENT_MODES = (COS_PRODUCT, AZIMUTH_SYMMETRIC)


def element_pattern(theta, phi, mode: str = COS_PRODUCT):
    """Cosine element gain; angles in radians.

    ``"cos-product"`` gives cos^2(theta) cos^2(phi), ``"azimuth-symmetric"`` drops
    the azimuth factor.
    """
    theta = np.asarray(theta, dtype=float)
    gain = np.cos(theta) ** 2
    if mode == COS_PRODUCT:
        gain = gain * np.cos(np.asarray(phi, dtype=float)) ** 2
    elif mode != AZIMUTH_SYMMETRIC:
        raise ConfigInvalid({"pattern.element_mode": f"unknown mode {mode!r}"})
    # cos(pi/2) is 6e-17, not 0
    return np.where(np.isclose(np.abs(theta), np.pi / 2, rtol=0, atol=1e-12), 0.0, gain)


def _direction_cosines(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return st * np.cos(phi), st * np.sin(phi)


def _check_weights(positions, weights):
    weights = np.asarray(weights)
    if weights.shape != (len(positions),):
        raise LengthMismatch(
            f"weights have shape {weights.shape}, layout has {len(positions)} elements")
    return weights


def _positions(layout):
    return getattr(layout, "positions", layout)


def array_factor(layout, weights, theta, phi, chunk: int = 4096):
    """Complex array factor at broadcastable angle arrays (radians).

    ``layout`` is an :class:`~sectorthin.geometry.ArrayLayout` or a bare
    ``(N, 2)`` coordinate array in wavelengths.
    """
    pos = np.asarray(_positions(layout), dtype=float)
    weights = _check_weights(pos, weights).astype(complex)
    u, v = _direction_cosines(theta, phi)
    u, v = np.broadcast_arrays(u, v)
    shape = u.shape
    u, v = u.ravel(), v.ravel()
    out = np.empty(u.size, dtype=complex)
    for start in range(0, u.size, chunk):
        stop = start + chunk
        phase = TWO_PI * (np.outer(u[start:stop], pos[:, 0]) + np.outer(v[start:stop], pos[:, 1]))
        out[start:stop] = np.exp(1j * phase) @ weights
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def total_pattern(layout, weights, theta, phi, mode: str = COS_PRODUCT):
    """Magnitude of element pattern times array factor."""
    return np.abs(element_pattern(theta, phi, mode) * array_factor(layout, weights, theta, phi))


def to_db(magnitude, floor: float = DB_FLOOR):
    """Peak-normalized dB with values below ``floor`` clamped."""
    magnitude = np.abs(np.asarray(magnitude, dtype=float))
    peak = magnitude.max() if magnitude.size else 0.0
    if not peak > 0:
        raise AllZeroPattern("pattern is zero at every sample")
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(magnitude / peak)
    return np.maximum(db, floor)


@dataclass(frozen=True)
class AngleGrid:
    theta_deg: np.ndarray
    phi_deg: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta_deg, dtype=float))
        phi = np.atleast_1d(np.asarray(self.phi_deg, dtype=float))
        problems = {}
        for name, arr in (("theta_deg", theta), ("phi_deg", phi)):
            if arr.size == 0:
                problems[name] = "empty"
            elif arr.size > 1 and np.any(np.diff(arr) <= 0):
                problems[name] = "samples must be strictly increasing"
        if theta.size and (theta.min() < -90 - 1e-9 or theta.max() > 90 + 1e-9):
            problems["theta_deg"] = "must lie in [-90, 90]"
        if phi.size and (phi.min() < 0 or phi.max() >= 360):
            problems["phi_deg"] = "must lie in [0, 360)"
        if problems:
            raise ConfigInvalid(problems)
        object.__setattr__(self, "theta_deg", theta)
        object.__setattr__(self, "phi_deg", phi)


def sample_range(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive, rounding-safe arange."""
    n = int(round((stop - start) / step))
    return np.round(start + step * np.arange(n + 1), 10)


def cut_grid(step_deg: float = 0.05, phi_deg: float = 0.0) -> AngleGrid:
    """Elevation cut over [-90, 90] at a fixed azimuth."""
    return AngleGrid(sample_range(-90.0, 90.0, step_deg), np.array([phi_deg]))


def hemisphere_grid(theta_step: float = 0.5, phi_step: float = 0.5) -> AngleGrid:
    return AngleGrid(sample_range(0.0, 90.0, theta_step),
                     sample_range(0.0, 360.0 - phi_step, phi_step))


@dataclass(frozen=True)
class CutKind:
    """Which angle is held fixed along a cut, and its value in degrees."""

    fixed: str = "phi"
    value_deg: float = 0.0

    def __post_init__(self):
        if self.fixed not in ("phi", "theta"):
            raise ConfigInvalid({"cut.fixed": f"must be 'phi' or 'theta', got {self.fixed!r}"})

    def angles(self, grid: AngleGrid):
        """Sweep angle (deg) and the matching (theta, phi) arrays in radians."""
        if self.fixed == "phi":
            sweep = grid.theta_deg
            theta, phi = sweep, np.full_like(sweep, self.value_deg)
        else:
            sweep = grid.phi_deg
            theta, phi = np.full_like(sweep, self.value_deg), sweep
        return sweep, np.radians(theta), np.radians(phi)

    def label(self) -> str:
        return f"{self.fixed}={self.value_deg:g}deg"


@dataclass(frozen=True)
class PatternCut:
    angle_deg: np.ndarray
    magnitude_db: np.ndarray
    cut_kind: CutKind

    def __post_init__(self):
        if len(self.angle_deg) != len(self.magnitude_db):
            raise LengthMismatch("angle and magnitude vectors differ in length")


@dataclass(frozen=True)
class PatternGrid:
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    magnitude_db: np.ndarray  # (theta, phi)


def compute_cut(layout, weights, fixed: CutKind, grid: AngleGrid,
                mode: str = COS_PRODUCT, floor: float = DB_FLOOR) -> PatternCut:
    sweep, theta, phi = fixed.angles(grid)
    mag = total_pattern(layout, weights, theta, phi, mode)
    return PatternCut(sweep.copy(), to_db(mag, floor), fixed)


def compute_grid(layout, weights, grid: AngleGrid, mode: str = COS_PRODUCT,
                 floor: float = DB_FLOOR) -> PatternGrid:
    th, ph = np.meshgrid(np.radians(grid.theta_deg), np.radians(grid.phi_deg), indexing="ij")
    mag = total_pattern(layout, weights, th, ph, mode)
    return PatternGrid(grid.theta_deg.copy(), grid.phi_deg.copy(), to_db(mag, floor))


class CutBasis:
    """Per-slot pattern basis for fast evaluation of many chromosomes.

    Column ``s`` holds element pattern times the phasor sum of every element
    in chromosome slot ``s``, so the total pattern of a chromosome ``c`` is
    ``|basis @ c|``.
    """

    def __init__(self, layout, fixed: CutKind, grid: AngleGrid, mode: str = COS_PRODUCT):
        sweep, theta, phi = fixed.angles(grid)
        self.angle_deg = sweep.copy()
        self.cut_kind = fixed
        u, v = _direction_cosines(theta, phi)
        pos = layout.positions
        phasors = np.exp(1j * TWO_PI * (np.outer(u, pos[:, 0]) + np.outer(v, pos[:, 1])))
        onehot = np.zeros((layout.n_total, layout.chromosome_len))
        onehot[np.arange(layout.n_total), layout.chromosome_map] = 1.0
        basis = (phasors @ onehot) * element_pattern(theta, phi, mode)[:, None]
        # 8-fold symmetry includes inversion, which makes the cut real
        if np.abs(basis.imag).max() <= 1e-9 * max(np.abs(basis).max(), 1.0):
            basis = basis.real.copy()
        self.basis = basis

    def magnitude(self, chromosomes) -> np.ndarray:
        """Pattern magnitude, shape (angles,) or (angles, batch)."""
        return np.abs(self.basis @ np.asarray(chromosomes, dtype=float).T)

    def cut(self, chromosome, floor: float = DB_FLOOR) -> PatternCut:
        return PatternCut(self.angle_deg, to_db(self.magnitude(chromosome), floor), self.cut_kind)


@dataclass(frozen=True)
class PatternConfig:
    """Angle resolution and evaluation options.

    ``sll_mode="phi0"`` measures sidelobes on the ``phi = cut_phi_deg`` cut
    only; ``"worst"`` takes the worst sidelobe over phi = 0, 5, ..., 45 deg.
    """

    cut_step_deg: float = 0.05
    grid_theta_step_deg: float = 0.5
    grid_phi_step_deg: float = 0.5
    element_mode: str = COS_PRODUCT
    cut_phi_deg: float = 0.0
    sll_mode: str = "phi0"
    db_floor: float = DB_FLOOR

    def __post_init__(self):
        problems = {}
        for name in ("cut_step_deg", "grid_theta_step_deg", "grid_phi_step_deg"):
            if not getattr(self, name) > 0:
                problems[f"pattern.{name}"] = "must be > 0"
        if self.element_mode not in ELEMENT_MODES:
            problems["pattern.element_mode"] = f"must be one of {ELEMENT_MODES}"
        if self.sll_mode not in ("phi0", "worst"):
            problems["pattern.sll_mode"] = "must be 'phi0' or 'worst'"
        if not 0 <= self.cut_phi_deg < 360:
            problems["pattern.cut_phi_deg"] = "must lie in [0, 360)"
        if not self.db_floor < 0:
            problems["pattern.db_floor"] = "must be negative"
        if problems:
            raise ConfigInvalid(problems)

    def main_cut(self) -> tuple[CutKind, AngleGrid]:
        return CutKind("phi", self.cut_phi_deg), cut_grid(self.cut_step_deg, self.cut_phi_deg)

    def sll_cuts(self) -> list[tuple[CutKind, AngleGrid]]:
        if self.sll_mode == "phi0":
            return [self.main_cut()]
        return [(CutKind("phi", float(p)), cut_grid(self.cut_step_deg, float(p)))
                for p in range(0, 50, 5)]

    def grid(self) -> AngleGrid:
        return hemisphere_grid(self.grid_theta_step_deg, self.grid_phi_step_deg)
