"""Thinning of circular-aperture phased arrays with a sector-symmetric binary swarm."""

__version__ = "0.1.0"

from .errors import (AllZeroPattern, BeamTooWide, ConfigInvalid, DegenerateAperture,
                     LengthMismatch, NoSidelobes, ThinningError)
from .geometry import ArrayLayout, GeometryConfig, build_layout, expand_chromosome, synthesize_sector
from .metrics import CutMetrics, cut_metrics, extract_hpbw, extract_sll
from .pattern import (AngleGrid, CutKind, PatternConfig, PatternCut, PatternGrid, array_factor,
                      compute_cut, compute_grid, element_pattern, total_pattern)
from .pso import FitnessSpec, Particle, PsoConfig, RunResult, fitness, run_pso
from .taper import TaperConfig, radial_taper, taylor_weights_1d

__all__ = [
    "AllZeroPattern", "AngleGrid", "ArrayLayout", "BeamTooWide", "ConfigInvalid", "CutKind",
    "CutMetrics", "DegenerateAperture", "FitnessSpec", "GeometryConfig", "LengthMismatch",
    "NoSidelobes", "Particle", "PatternConfig", "PatternCut", "PatternGrid", "PsoConfig",
    "RunResult", "TaperConfig", "ThinningError", "array_factor", "build_layout", "compute_cut",
    "compute_grid", "cut_metrics", "element_pattern", "expand_chromosome", "extract_hpbw",
    "extract_sll", "fitness", "radial_taper", "run_pso", "synthesize_sector", "taylor_weights_1d",
    "total_pattern",
]
