"""Sidelobe level and half-power beamwidth of a sampled pattern cut."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BeamTooWide, NoSidelobes
from .pattern import PatternCut

HALF_POWER_DB = 10 * math.log10(0.5)


@dataclass(frozen=True)
class CutMetrics:
    sll_db: float
    hpbw_deg: float
    main_lobe_peak_idx: int
    first_null_bounds: tuple[float, float]


def main_lobe_bounds(db: np.ndarray) -> tuple[int, int, int]:
    """Indices ``(left, peak, right)`` of the main lobe.

    Walks outward from the global peak while the pattern does not rise, so a
    flat stretch at the bottom of a null is absorbed into the main lobe.
    """
    peak = int(np.argmax(db))
    return peak - _run_length(db[peak::-1]), peak, peak + _run_length(db[peak:])


def _run_length(seq):
    # samples after seq[0] before the first strict rise
    rises = np.flatnonzero(np.diff(seq) > 0)
    return int(rises[0]) if rises.size else len(seq) - 1


def extract_sll(cut: PatternCut) -> float:
    """Worst sidelobe: highest sample outside the null-to-null main lobe."""
    db = np.asarray(cut.magnitude_db, dtype=float)
    left, _, right = main_lobe_bounds(db)
    outside = np.concatenate([db[:left], db[right + 1:]])
    if outside.size == 0:
        raise NoSidelobes("no samples outside the main lobe")
    return float(outside.max())


def _crossing(angles, db, start, step, threshold):
    seq = db[start::step] if step > 0 else db[start::-1]
    below = np.flatnonzero(seq <= threshold)
    if below.size == 0:
        raise BeamTooWide("pattern never drops below half power inside the cut")
    k = start + step * int(below[0])
    a0, a1 = angles[k - step], angles[k]
    d0, d1 = db[k - step], db[k]
    return a0 + (a1 - a0) * (d0 - threshold) / (d0 - d1)


def extract_hpbw(cut: PatternCut) -> float:
    """Width between the half-power crossings nearest the peak (degrees)."""
    db = np.asarray(cut.magnitude_db, dtype=float)
    angles = np.asarray(cut.angle_deg, dtype=float)
    peak = int(np.argmax(db))
    hi = _crossing(angles, db, peak, +1, HALF_POWER_DB)
    lo = _crossing(angles, db, peak, -1, HALF_POWER_DB)
    return float(hi - lo)


def cut_metrics(cut: PatternCut) -> CutMetrics:
    db = np.asarray(cut.magnitude_db, dtype=float)
    left, peak, right = main_lobe_bounds(db)
    return CutMetrics(
        sll_db=extract_sll(cut),
        hpbw_deg=extract_hpbw(cut),
        main_lobe_peak_idx=peak,
        first_null_bounds=(float(cut.angle_deg[left]), float(cut.angle_deg[right])),
    )


def worst_sll(cuts) -> float:
    """Highest sidelobe across several cuts (e.g. phi = 0, 5, ..., 45 deg)."""
    return max(extract_sll(c) for c in cuts)


def robust_metrics(cut: PatternCut, floor: float) -> tuple[float, float]:
    """``(sll_db, hpbw_deg)`` that never fails on a non-zero pattern.

    No sidelobes scores ``floor`` as the SLL; a beam wider than the cut
    scores the full cut span as the HPBW.
    """
    try:
        sll = extract_sll(cut)
    except NoSidelobes:
        sll = floor
    try:
        hpbw = extract_hpbw(cut)
    except BeamTooWide:
        hpbw = float(cut.angle_deg[-1] - cut.angle_deg[0])
    return sll, hpbw
