"""Binary particle swarm thinning over the sector chromosome.

Each particle keeps a continuous position in [0, 1]^D.  After every move the
position is binarized and the resulting chromosome, expanded to the full
aperture, is what gets scored.  Personal and global bests store binary
chromosomes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AllZeroPattern, ConfigInvalid, NoSidelobes
from .geometry import ArrayLayout, expand_chromosome
from .metrics import CutMetrics, extract_sll, robust_metrics
from .pattern import CutBasis, PatternConfig

log = logging.getLogger(__name__)

HINGE = "hinge"
SQUARE = "square"
THRESHOLD = "threshold"
SIGMOID = "sigmoid"


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 30
    omega: float = 0.75
    c1: float = 2.5
    c2: float = 2.5
    chi: float = 0.75
    v_max: float = 4.0
    max_iters: int = 1000
    fitness_threshold: float = 1e-6
    seed: int = 0
    # the threshold rule freezes once every bit saturates; the sigmoid rule
    # keeps exploring and is just as reproducible under a fixed seed
    binarization: str = SIGMOID
    init_fill: float = 0.5
    center_fixed: bool = False

    def __post_init__(self):
        problems = {}
        if not (isinstance(self.swarm_size, int) and self.swarm_size >= 2):
            problems["pso.swarm_size"] = "must be an integer >= 2"
        for name in ("omega", "chi"):
            if not 0 < getattr(self, name) <= 1:
                problems[f"pso.{name}"] = "must lie in (0, 1]"
        for name in ("c1", "c2", "v_max"):
            if not getattr(self, name) > 0:
                problems[f"pso.{name}"] = "must be > 0"
        if not (isinstance(self.max_iters, int) and self.max_iters >= 0):
            problems["pso.max_iters"] = "must be an integer >= 0"
        if not isinstance(self.seed, int) or self.seed < 0:
            problems["pso.seed"] = "must be a non-negative integer"
        if self.binarization not in (THRESHOLD, SIGMOID):
            problems["pso.binarization"] = f"must be {THRESHOLD!r} or {SIGMOID!r}"
        if not 0 <= self.init_fill <= 1:
            problems["pso.init_fill"] = "must lie in [0, 1]"
        if problems:
            raise ConfigInvalid(problems)


@dataclass(frozen=True)
class FitnessSpec:
    """Requirements for the fitness; ``bw_req_deg=None`` means derive it
    from the tapered benchmark of the same aperture."""

    sll_req_db: float = -30.0
    bw_req_deg: float | None = None
    w1: float = 1.0
    w2: float = 1.0
    penalty_mode: str = HINGE

    def __post_init__(self):
        problems = {}
        if self.w1 < 0 or self.w2 < 0 or (self.w1 == 0 and self.w2 == 0):
            problems["fitness.w1/w2"] = "must be >= 0 and not both zero"
        if self.penalty_mode not in (HINGE, SQUARE):
            problems["fitness.penalty_mode"] = f"must be {HINGE!r} or {SQUARE!r}"
        if self.bw_req_deg is not None and not self.bw_req_deg > 0:
            problems["fitness.bw_req_deg"] = "must be > 0"
        if problems:
            raise ConfigInvalid(problems)


def fitness(metrics: CutMetrics, spec: FitnessSpec) -> float:
    """Weighted squared deviation from the requirements; lower is better.

    In hinge mode only violations count: a sidelobe level below the
    requirement or a beam narrower than required costs nothing.
    """
    if spec.bw_req_deg is None:
        raise ConfigInvalid({"fitness.bw_req_deg": "unresolved; derive it before scoring"})
    d_sll = metrics.sll_db - spec.sll_req_db
    d_bw = metrics.hpbw_deg - spec.bw_req_deg
    if spec.penalty_mode == HINGE:
        d_sll, d_bw = max(0.0, d_sll), max(0.0, d_bw)
    return float(spec.w1 * d_sll ** 2 + spec.w2 * d_bw ** 2)


@dataclass
class Particle:
    x: np.ndarray
    v: np.ndarray
    p_best_x: np.ndarray
    p_best_f: float = math.inf


def _velocity(x, v, p_best, g_best, r1, r2, cfg):
    v = cfg.omega * v + cfg.c1 * r1 * (p_best - x) + cfg.c2 * r2 * (g_best - x)
    return np.minimum(np.maximum(v, -cfg.v_max), cfg.v_max)


def _move(x, v, cfg):
    return np.minimum(np.maximum(x + cfg.chi * v, 0.0), 1.0)


def _binarize(x, v, cfg, u=None):
    if cfg.binarization == SIGMOID:
        return (u < 0.5 * (1.0 + np.tanh(0.5 * v))).astype(np.int8)
    return (x > 0.5).astype(np.int8)


def update_velocity(p: Particle, g_best, cfg: PsoConfig, rng) -> np.ndarray:
    """Inertia plus random pulls toward the personal and global bests,
    clamped to ``[-v_max, v_max]``.  ``r1`` and ``r2`` are drawn per component."""
    r1, r2 = rng.random((2, len(p.x)))
    return _velocity(p.x, p.v, p.p_best_x, np.asarray(g_best, dtype=float), r1, r2, cfg)


def update_position(p: Particle, cfg: PsoConfig, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """Move by ``chi * v`` and binarize.

    Returns the clamped continuous position and the 0/1 chromosome.  The
    sigmoid rule draws each bit with probability ``1 / (1 + exp(-v))`` and
    needs ``rng``.
    """
    x = _move(p.x, p.v, cfg)
    u = rng.random(len(x)) if cfg.binarization == SIGMOID else None
    return x, _binarize(x, p.v, cfg, u)


class ThinningProblem:
    """Scores chromosomes of one layout against a fitness spec.

    Scores are memoized per chromosome; evaluation is deterministic so this
    changes nothing but speed.
    """

    def __init__(self, layout: ArrayLayout, spec: FitnessSpec, pattern_cfg: PatternConfig):
        if spec.bw_req_deg is None:
            raise ConfigInvalid({"fitness.bw_req_deg": "resolve before building the problem"})
        self.layout = layout
        self.spec = spec
        self.pattern_cfg = pattern_cfg
        kind, grid = pattern_cfg.main_cut()
        self.main = CutBasis(layout, kind, grid, pattern_cfg.element_mode)
        self.extra = []
        if pattern_cfg.sll_mode == "worst":
            self.extra = [CutBasis(layout, k, g, pattern_cfg.element_mode)
                          for k, g in pattern_cfg.sll_cuts() if k != kind]
        self._cache: dict[bytes, tuple[float, float, float]] = {}
        self.n_evaluations = 0

    def measure(self, bits) -> tuple[float, float]:
        """SLL and HPBW of a chromosome.

        A pattern without sidelobes scores the dB floor as its SLL; a beam
        wider than the cut scores the full cut span.  An all-zero pattern
        raises :class:`AllZeroPattern`.
        """
        floor = self.pattern_cfg.db_floor
        sll, hpbw = robust_metrics(self.main.cut(bits, floor), floor)
        for basis in self.extra:
            try:
                sll = max(sll, extract_sll(basis.cut(bits, floor)))
            except NoSidelobes:
                pass
        return sll, hpbw

    def evaluate(self, bits) -> tuple[float, float, float]:
        """``(fitness, sll_db, hpbw_deg)``; all-zero chromosomes score inf."""
        bits = np.asarray(bits, dtype=np.int8)
        key = bits.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.n_evaluations += 1
        try:
            sll, hpbw = self.measure(bits)
            f = fitness(CutMetrics(sll, hpbw, 0, (0.0, 0.0)), self.spec)
        except AllZeroPattern:
            sll = hpbw = math.nan
            f = math.inf
        out = (f, sll, hpbw)
        self._cache[key] = out
        return out


@dataclass
class RunResult:
    best_chromosome: np.ndarray
    best_weights: np.ndarray
    best_fitness: float
    sll_db: float
    hpbw_deg: float
    active_count: int
    fitness_trace: list[float]
    iterations_used: int
    converged: bool
    seed: int
    n_total: int
    chromosome_len: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["best_chromosome"] = [int(b) for b in self.best_chromosome]
        d["best_weights"] = [int(w) for w in self.best_weights]
        d["fitness_trace"] = [float(f) for f in self.fitness_trace]
        return d


class Swarm:
    """Swarm state as (particles, D) arrays.

    One :meth:`step` applies the velocity update, the move, binarization and
    scoring to every particle.  Particle ``i`` draws only from ``rngs[i]``,
    in the same order :func:`update_velocity` and :func:`update_position`
    would, so the arithmetic is batched without changing any random stream.
    """

    def __init__(self, layout: ArrayLayout, problem: ThinningProblem, cfg: PsoConfig):
        self.layout = layout
        self.problem = problem
        self.cfg = cfg
        d = layout.chromosome_len
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.swarm_size)
        self.rngs = [np.random.default_rng(s) for s in seeds]
        bits = np.empty((cfg.swarm_size, d), dtype=np.int8)
        self.v = np.empty((cfg.swarm_size, d))
        for i, rng in enumerate(self.rngs):
            bits[i] = rng.random(d) < cfg.init_fill
            self.v[i] = rng.uniform(-cfg.v_max, cfg.v_max, d)
        bits[:, layout.center_slot] = 1
        self.x = bits.astype(float)
        self.p_best_x = self.x.copy()
        self.p_best_f = np.array([problem.evaluate(b)[0] for b in bits])
        self.g_best_f = math.inf
        self.g_best = None
        self._update_global()
        self.trace = [self.g_best_f]
        self.iteration = 0

    @property
    def particles(self) -> list[Particle]:
        """Per-particle views; arrays are shared with the swarm."""
        return [Particle(self.x[i], self.v[i], self.p_best_x[i], float(self.p_best_f[i]))
                for i in range(len(self.x))]

    def _update_global(self):
        best = int(np.argmin(self.p_best_f))
        if self.g_best is None or self.p_best_f[best] < self.g_best_f:
            self.g_best_f = float(self.p_best_f[best])
            self.g_best = self.p_best_x[best].copy()

    def step(self) -> np.ndarray:
        """Advance one iteration; returns the fitness of every new position."""
        cfg = self.cfg
        n, d = self.x.shape
        sigmoid = cfg.binarization == SIGMOID
        draws = np.stack([rng.random((3 if sigmoid else 2) * d) for rng in self.rngs])
        r1, r2 = draws[:, :d], draws[:, d:2 * d]
        self.v = _velocity(self.x, self.v, self.p_best_x, self.g_best, r1, r2, cfg)
        self.x = _move(self.x, self.v, cfg)
        bits = _binarize(self.x, self.v, cfg, draws[:, 2 * d:] if sigmoid else None)
        if cfg.center_fixed:
            bits[:, self.layout.center_slot] = 1
        scores = np.array([self.problem.evaluate(b)[0] for b in bits])
        better = scores < self.p_best_f
        self.p_best_f[better] = scores[better]
        self.p_best_x[better] = bits[better]
        self._update_global()
        self.trace.append(self.g_best_f)
        self.iteration += 1
        return scores


def run_pso(layout: ArrayLayout, spec: FitnessSpec, cfg: PsoConfig,
            pattern_cfg: PatternConfig | None = None,
            problem: ThinningProblem | None = None, progress=None) -> RunResult:
    """Thin ``layout`` with a binary swarm.

    Stops once the global best fitness drops below ``cfg.fitness_threshold``
    or after ``cfg.max_iters`` moves.  Running out of iterations is reported
    through ``RunResult.converged``, not raised.

    Each particle draws from its own generator spawned from ``cfg.seed``.
    """
    pattern_cfg = pattern_cfg or PatternConfig()
    problem = problem or ThinningProblem(layout, spec, pattern_cfg)
    d = layout.chromosome_len
    swarm = Swarm(layout, problem, cfg)
    while swarm.g_best_f >= cfg.fitness_threshold and swarm.iteration < cfg.max_iters:
        swarm.step()
        if progress is not None:
            progress(swarm.iteration, swarm.g_best_f)
    g_best, g_best_f, t, trace = swarm.g_best, swarm.g_best_f, swarm.iteration, swarm.trace

    chromosome = g_best.astype(np.int8)
    weights = expand_chromosome(layout, chromosome)
    f, sll, hpbw = problem.evaluate(chromosome)
    converged = g_best_f < cfg.fitness_threshold
    if not converged:
        log.info("seed %d: stopped at max_iters=%d with fitness %.4g", cfg.seed, t, g_best_f)
    return RunResult(
        best_chromosome=chromosome,
        best_weights=weights,
        best_fitness=float(f),
        sll_db=float(sll),
        hpbw_deg=float(hpbw),
        active_count=int(weights.sum()),
        fitness_trace=trace,
        iterations_used=t,
        converged=bool(converged),
        seed=cfg.seed,
        n_total=layout.n_total,
        chromosome_len=d,
        config={"pso": asdict(cfg), "fitness": asdict(spec), "pattern": asdict(pattern_cfg)},
    )
