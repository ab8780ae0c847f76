"""Circular-aperture layouts built from eight rotated 45 degree sectors.

One sector of a rectangular lattice is cut out, rotated seven times about the
origin and completed with a central element.  Every element then maps to a
slot of the sector chromosome: rotated copies of the same sector element share
a slot, and the central element owns the last slot.

Lattice calibration
-------------------
Lattice nodes sit at ``((i + 1/2) dx, (j + 1/2) dy)`` (half-cell offset) and
the nominal radius counts lattice periods, so ``radius_lambda=15`` with
``dx = dy = 0.5`` cuts a circle of 7.5 wavelengths.  The sector is half-open,
``0 <= phi < 45 deg``; the ray at 45 degrees belongs to the next sector.  With
these choices ``R = 4`` gives 41 elements and ``R = 15`` gives 673.  Setting
``radius_in_periods=False`` treats the radius as a physical length in
wavelengths instead.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigInvalid, DegenerateAperture, LengthMismatch

N_SECTORS = 8
SECTOR_ANGLE = 2 * math.pi / N_SECTORS
CENTER = -1  # sector id of the central element

RADIUS_RTOL = 1e-9
ANGLE_TOL = 1e-9
DEDUP_TOL = 1e-3


@dataclass(frozen=True)
class GeometryConfig:
    radius_lambda: float
    dx_lambda: float = 0.5
    dy_lambda: float = 0.5
    frequency_hz: float = 12e9
    half_cell_offset: bool = True
    radius_in_periods: bool = True

    def __post_init__(self):
        problems = {}
        for name in ("radius_lambda", "dx_lambda", "dy_lambda", "frequency_hz"):
            value = getattr(self, name)
            if isinstance(value, bool) or not (
                    isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                problems[f"geometry.{name}"] = f"must be a positive number, got {value!r}"
        if problems:
            raise ConfigInvalid(problems)
        for name in ("radius_lambda", "dx_lambda", "dy_lambda", "frequency_hz"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / self.frequency_hz


@dataclass(frozen=True, eq=False)
class ArrayLayout:
    """Immutable element layout.

    Attributes
    ----------
    positions : (N, 2) float array
        Element coordinates in wavelengths.
    sector_ids : (N,) int array
        Sector index 0..7, or ``CENTER`` for the origin element.
    chromosome_map : (N,) int array
        Chromosome slot of each element.
    chromosome_len : int
        Number of slots ``D``; the last slot is the central element.
    """

    config: GeometryConfig
    positions: np.ndarray
    sector_ids: np.ndarray
    chromosome_map: np.ndarray
    chromosome_len: int
    aperture_radius: float = field(default=0.0)

    def __post_init__(self):
        for arr in (self.positions, self.sector_ids, self.chromosome_map):
            arr.flags.writeable = False

    @property
    def n_total(self) -> int:
        return len(self.positions)

    @property
    def center_slot(self) -> int:
        return self.chromosome_len - 1

    @property
    def center_index(self) -> int:
        return int(np.flatnonzero(self.sector_ids == CENTER)[0])

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.positions[:, 0], self.positions[:, 1])


def _in_sector(x, y, radius, cfg):
    if cfg.radius_in_periods:
        r = math.hypot(x / cfg.dx_lambda, y / cfg.dy_lambda)
    else:
        r = math.hypot(x, y)
    if r == 0.0 or r > radius * (1 + RADIUS_RTOL):
        return False
    phi = math.atan2(y, x)
    return -ANGLE_TOL <= phi < SECTOR_ANGLE - ANGLE_TOL


def synthesize_sector(cfg: GeometryConfig) -> list[tuple[float, float]]:
    """Lattice nodes inside the first 45 degree sector, origin excluded.

    Nodes are returned sorted by radius and then angle, which fixes the
    chromosome slot order.
    """
    offset = 0.5 if cfg.half_cell_offset else 0.0
    if cfg.radius_in_periods:
        imax = jmax = int(math.ceil(cfg.radius_lambda)) + 1
    else:
        imax = int(math.ceil(cfg.radius_lambda / cfg.dx_lambda)) + 1
        jmax = int(math.ceil(cfg.radius_lambda / cfg.dy_lambda)) + 1
    points = []
    for i in range(imax + 1):
        for j in range(jmax + 1):
            x = (i + offset) * cfg.dx_lambda
            y = (j + offset) * cfg.dy_lambda
            if _in_sector(x, y, cfg.radius_lambda, cfg):
                points.append((x, y))
    points.sort(key=lambda p: (round(math.hypot(*p), 12), math.atan2(p[1], p[0])))
    return points


def rotate(points: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return np.asarray(points, dtype=float) @ rot.T


def _deduplicate(positions, sector_ids, slots, tol=DEDUP_TOL):
    """Drop points closer than ``tol`` to an earlier point.

    Earlier points win, so the lowest sector index is kept.  Slots of merged
    points are unified (union-find) and renumbered densely with the center
    slot kept last.
    """
    n = len(positions)
    parent = {int(s): int(s) for s in slots}

    def find(s):
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    alive = np.ones(n, dtype=bool)
    pairs = sorted(cKDTree(positions).query_pairs(tol), key=lambda p: (p[1], p[0]))
    for i, j in pairs:
        if alive[i] and alive[j]:
            alive[j] = False
            a, b = find(int(slots[i])), find(int(slots[j]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    keep = np.flatnonzero(alive)
    roots = np.array([find(int(s)) for s in slots[keep]])
    center_root = find(int(slots[sector_ids == CENTER][0]))
    order = sorted(set(roots.tolist()) - {center_root}) + [center_root]
    renumber = {r: i for i, r in enumerate(order)}
    new_slots = np.array([renumber[r] for r in roots], dtype=int)
    return positions[keep], sector_ids[keep], new_slots, len(order)


def build_layout(cfg: GeometryConfig) -> ArrayLayout:
    sector = np.array(synthesize_sector(cfg), dtype=float).reshape(-1, 2)
    m = len(sector)
    if m == 0:
        raise DegenerateAperture(
            f"radius {cfg.radius_lambda} leaves only the central element")
    positions = [rotate(sector, k * SECTOR_ANGLE) for k in range(N_SECTORS)]
    positions.append(np.zeros((1, 2)))
    positions = np.vstack(positions)
    sector_ids = np.concatenate([np.full(m, k) for k in range(N_SECTORS)] + [[CENTER]])
    slots = np.concatenate([np.arange(m)] * N_SECTORS + [[m]])
    positions, sector_ids, slots, d = _deduplicate(positions, sector_ids.astype(int), slots)

    if cfg.radius_in_periods:
        aperture_radius = cfg.radius_lambda * max(cfg.dx_lambda, cfg.dy_lambda)
    else:
        aperture_radius = cfg.radius_lambda
    return ArrayLayout(cfg, positions, sector_ids, slots, d, aperture_radius)


def expand_chromosome(layout: ArrayLayout, chromosome) -> np.ndarray:
    """Full per-element weight vector from a sector chromosome."""
    chromosome = np.asarray(chromosome)
    if chromosome.shape != (layout.chromosome_len,):
        raise LengthMismatch(
            f"chromosome has shape {chromosome.shape}, layout needs "
            f"({layout.chromosome_len},)")
    return chromosome[layout.chromosome_map]


LAYOUT_HEADER = ["index", "x_lambda", "y_lambda", "sector_id", "chromosome_slot"]


def _fmt(value: float) -> str:
    return repr(float(value))


def layout_rows(layout: ArrayLayout, weights=None):
    header = list(LAYOUT_HEADER)
    if weights is not None:
        header.append("weight")
    rows = [header]
    for i, ((x, y), sec, slot) in enumerate(
            zip(layout.positions, layout.sector_ids, layout.chromosome_map)):
        row = [str(i), _fmt(x), _fmt(y), "center" if sec == CENTER else str(int(sec)),
               str(int(slot))]
        if weights is not None:
            row.append(_fmt(weights[i]))
        rows.append(row)
    return rows


def read_layout_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None]:
    """Read a layout or activation file.

    Returns positions, sector ids, chromosome slots and the weight column
    (``None`` when the file has no weight column).
    """
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(LAYOUT_HEADER) <= set(reader.fieldnames):
            raise ConfigInvalid({str(path): f"expected columns {LAYOUT_HEADER}"})
        rows = list(reader)
    positions = np.array([[float(r["x_lambda"]), float(r["y_lambda"])] for r in rows])
    sectors = np.array([CENTER if r["sector_id"] == "center" else int(r["sector_id"])
                        for r in rows])
    slots = np.array([int(r["chromosome_slot"]) for r in rows])
    weights = None
    if "weight" in reader.fieldnames:
        weights = np.array([complex(r["weight"]) if "j" in r["weight"] else float(r["weight"])
                            for r in rows])
    return positions.reshape(-1, 2), sectors, slots, weights
