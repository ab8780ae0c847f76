"""Configuration and orchestration of single runs and radius sweeps.

A run directory holds::

    layout.csv        element table
    activation.csv    element table plus the optimized 0/1 weight
    taper.csv         element table plus the benchmark taper weight
    cut_thinned.csv   thinned pattern cut (angle_deg, magnitude_db)
    cut_tapered.csv   tapered pattern cut on the same angles
    grid_thinned.csv  thinned hemisphere pattern (optional)
    metrics.csv       n_total, active_count, sll_db, hpbw_deg, seed
    trace.csv         iteration, best_fitness
    result.json       full RunResult
    plot_cuts.py      matplotlib overlay of the two cuts
    manifest.json     checksums of everything above
    metadata.json     timestamps; the only file that changes between reruns
"""
from __future__ import annotations

import dataclasses
import logging
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__, exports, plotting
from .errors import ConfigInvalid, ThinningError
from .geometry import GeometryConfig, build_layout
from .metrics import robust_metrics
from .pattern import PatternConfig, compute_cut, compute_grid
from .pso import FitnessSpec, PsoConfig, RunResult, ThinningProblem, run_pso
from .taper import TaperConfig, taper_weights

log = logging.getLogger(__name__)

RUN_FILES = ("layout.csv", "activation.csv", "taper.csv", "cut_thinned.csv",
             "cut_tapered.csv", "metrics.csv", "trace.csv", "result.json", "plot_cuts.py")
SUMMARY_HEADER = ["radius_lambda", "n_total", "active_count", "sll_db", "hpbw_deg",
                  "seed", "fitness", "status"]


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: GeometryConfig
    fitness: FitnessSpec = field(default_factory=FitnessSpec)
    pso: PsoConfig = field(default_factory=PsoConfig)
    pattern: PatternConfig = field(default_factory=PatternConfig)
    taper: TaperConfig = field(default_factory=TaperConfig)
    sweep: tuple[float, ...] | None = None
    repeats: int = 1
    master_seed: int = 0
    output_dir: str = "runs"
    workers: int = 1
    export_grid: bool = True

    def __post_init__(self):
        problems = {}
        if not (isinstance(self.repeats, int) and self.repeats >= 1):
            problems["repeats"] = "must be an integer >= 1"
        if not (isinstance(self.workers, int) and self.workers >= 1):
            problems["workers"] = "must be an integer >= 1"
        if not (isinstance(self.master_seed, int) and self.master_seed >= 0):
            problems["master_seed"] = "must be a non-negative integer"
        if self.sweep is not None:
            radii = list(self.sweep)
            if not radii:
                problems["sweep"] = "must not be empty"
            elif any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
                problems["sweep"] = "radii must be positive and strictly increasing"
        if problems:
            raise ConfigInvalid(problems)

    def seed_for(self, repeat: int) -> int:
        return self.master_seed + repeat

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep"] = list(self.sweep) if self.sweep is not None else None
        return d


_SECTIONS = {"geometry": GeometryConfig, "fitness": FitnessSpec, "pso": PsoConfig,
             "pattern": PatternConfig, "taper": TaperConfig}
_SCALARS = {"sweep", "repeats", "master_seed", "output_dir", "workers", "export_grid"}


def _build_section(name, cls, values):
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigInvalid({name: "must be a mapping"})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigInvalid({f"{name}.{k}": "unknown field" for k in unknown})
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigInvalid({name: str(exc)}) from None


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from nested plain data, reporting bad fields by name."""
    data = dict(data or {})
    unknown = sorted(set(data) - set(_SECTIONS) - _SCALARS)
    if unknown:
        raise ConfigInvalid({k: "unknown field" for k in unknown})
    geometry = data.get("geometry") or {}
    if "radius_lambda" not in geometry:
        sweep = data.get("sweep")
        if sweep:
            geometry = {**geometry, "radius_lambda": float(sweep[-1])}
        else:
            raise ConfigInvalid({"geometry.radius_lambda": "required unless a sweep is given"})
    kwargs = {name: _build_section(name, cls, geometry if name == "geometry" else data.get(name))
              for name, cls in _SECTIONS.items()}
    for key in _SCALARS & set(data):
        kwargs[key] = data[key]
    if kwargs.get("sweep") is not None:
        kwargs["sweep"] = tuple(float(r) for r in kwargs["sweep"])
    return ExperimentConfig(**kwargs)


def load_config(path) -> dict:
    """Read a YAML (or JSON) config file into plain data."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigInvalid({"config": str(exc)}) from None
    except yaml.YAMLError as exc:
        raise ConfigInvalid({"config": f"not valid YAML: {exc}"}) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigInvalid({"config": "top level must be a mapping"})
    return data


def merge(base: dict, overrides: dict) -> dict:
    """Recursive dict merge; ``None`` override values are skipped."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            out[key] = merge(out.get(key) or {}, value)
        else:
            out[key] = value
    return out


def prepare_output_dir(path) -> Path:
    """Create ``path``; if it already holds files, use a fresh ``run-NNN`` inside it."""
    path = Path(path)
    if not path.exists():
        path.mkdir(parents=True)
        return path
    if not any(path.iterdir()):
        return path
    for i in range(1, 10_000):
        candidate = path / f"run-{i:03d}"
        try:
            candidate.mkdir()
        except FileExistsError:
            continue
        return candidate
    raise ConfigInvalid({"output_dir": f"no free versioned subdirectory under {path}"})


@dataclass
class Benchmark:
    """Tapered reference for one aperture, shared by all repeats."""

    layout: object
    weights: np.ndarray
    cut: object
    sll_db: float
    hpbw_deg: float
    fitness: FitnessSpec


def prepare_benchmark(cfg: ExperimentConfig, geometry: GeometryConfig) -> Benchmark:
    layout = build_layout(geometry)
    weights = taper_weights(layout, cfg.taper)
    kind, grid = cfg.pattern.main_cut()
    cut = compute_cut(layout, weights, kind, grid, cfg.pattern.element_mode, cfg.pattern.db_floor)
    sll, hpbw = robust_metrics(cut, cfg.pattern.db_floor)
    spec = cfg.fitness
    if spec.bw_req_deg is None:
        spec = dataclasses.replace(spec, bw_req_deg=hpbw)
    return Benchmark(layout, weights, cut, sll, hpbw, spec)


def _progress_printer(label):
    def progress(t, best):
        if t % 100 == 0:
            print(f"{label} iter {t} best fitness {best:.6g}", file=sys.stderr, flush=True)
    return progress


def execute_run(cfg: ExperimentConfig, bench: Benchmark, problem: ThinningProblem,
                repeat: int, run_dir: Path, verbose: bool = False) -> RunResult:
    """One seeded swarm run plus all exports into ``run_dir``."""
    seed = cfg.seed_for(repeat)
    pso_cfg = dataclasses.replace(cfg.pso, seed=seed)
    progress = _progress_printer(f"[{run_dir.name}]") if verbose else None
    result = run_pso(bench.layout, bench.fitness, pso_cfg, cfg.pattern, problem, progress)
    result.config.update({"geometry": asdict(bench.layout.config), "taper": asdict(cfg.taper),
                          "repeat": repeat, "master_seed": cfg.master_seed})
    write_run(run_dir, cfg, bench, result)
    return result


def write_run(run_dir: Path, cfg: ExperimentConfig, bench: Benchmark, result: RunResult):
    run_dir.mkdir(parents=True, exist_ok=True)
    layout = bench.layout
    kind, grid = cfg.pattern.main_cut()
    thinned = compute_cut(layout, result.best_weights, kind, grid,
                          cfg.pattern.element_mode, cfg.pattern.db_floor)
    exports.write_layout(run_dir / "layout.csv", layout)
    exports.write_layout(run_dir / "activation.csv", layout, result.best_weights)
    exports.write_layout(run_dir / "taper.csv", layout, bench.weights)
    exports.write_cut(run_dir / "cut_thinned.csv", thinned)
    exports.write_cut(run_dir / "cut_tapered.csv", bench.cut)
    exports.write_csv(run_dir / "metrics.csv", [exports.METRICS_HEADER, exports.metrics_row(result)])
    exports.write_trace(run_dir / "trace.csv", result.fitness_trace)
    doc = result.to_dict()
    doc["benchmark"] = {"sll_db": bench.sll_db, "hpbw_deg": bench.hpbw_deg,
                        "alpha": cfg.taper.alpha, "mode": cfg.taper.mode}
    exports.write_json(run_dir / "result.json", doc)
    exports.atomic_write_text(run_dir / "plot_cuts.py", plotting.CUTS_SCRIPT)
    files = list(RUN_FILES)
    if cfg.export_grid:
        g = compute_grid(layout, result.best_weights, cfg.pattern.grid(),
                         cfg.pattern.element_mode, cfg.pattern.db_floor)
        exports.write_grid(run_dir / "grid_thinned.csv", g)
        files.append("grid_thinned.csv")
    exports.write_manifest(run_dir, files, "run", {"seed": result.seed})
    write_metadata(run_dir)


def write_metadata(directory: Path):
    exports.write_json(directory / "metadata.json", {
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "python": platform.python_version(),
        "host": platform.node(),
    })


def run_single(cfg: ExperimentConfig, out_dir=None, verbose: bool = False) -> list[RunResult]:
    """Run ``cfg.repeats`` seeded swarms on ``cfg.geometry``.

    Repeat ``i`` uses seed ``master_seed + i`` and writes to ``seed-<seed>/``
    under the (possibly versioned) output directory.
    """
    root = prepare_output_dir(out_dir or cfg.output_dir)
    bench = prepare_benchmark(cfg, cfg.geometry)
    problem = ThinningProblem(bench.layout, bench.fitness, cfg.pattern)
    results = []
    for repeat in range(cfg.repeats):
        run_dir = root / f"seed-{cfg.seed_for(repeat)}"
        results.append(execute_run(cfg, bench, problem, repeat, run_dir, verbose))
    exports.write_json(root / "config.json", cfg.to_dict())
    return results


def _radius_dir(radius: float) -> str:
    return f"R{radius:g}"


def _sweep_job(cfg: ExperimentConfig, radius: float, radius_dir: str):
    """Every repeat for one radius; errors are returned, not raised."""
    geometry = dataclasses.replace(cfg.geometry, radius_lambda=radius)
    try:
        bench = prepare_benchmark(cfg, geometry)
        problem = ThinningProblem(bench.layout, bench.fitness, cfg.pattern)
        out = []
        for repeat in range(cfg.repeats):
            run_dir = Path(radius_dir) / f"seed-{cfg.seed_for(repeat)}"
            out.append(execute_run(cfg, bench, problem, repeat, run_dir))
        return radius, out, None
    except ThinningError as exc:
        return radius, [], f"{type(exc).__name__}: {exc}"


@dataclass
class SweepSummary:
    rows: list[dict]
    runs: dict[float, list[RunResult]]
    out_dir: Path

    @property
    def failed(self) -> list[float]:
        return [r["radius_lambda"] for r in self.rows if r["status"] != "ok"]


def run_sweep(cfg: ExperimentConfig, out_dir=None) -> SweepSummary:
    """Run every radius in ``cfg.sweep`` and tabulate the best run per radius.

    "Best" is the lowest fitness, ties broken by lower seed.  A radius that
    fails is recorded with its error and the sweep carries on.
    """
    if not cfg.sweep:
        raise ConfigInvalid({"sweep": "no radii given"})
    root = prepare_output_dir(out_dir or cfg.output_dir)
    jobs = [(r, str(root / _radius_dir(r))) for r in cfg.sweep]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_sweep_job, cfg, r, d) for r, d in jobs]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = []
        for r, d in jobs:
            t0 = time.perf_counter()
            outcomes.append(_sweep_job(cfg, r, d))
            print(f"radius {r:g}: done in {time.perf_counter() - t0:.1f} s",
                  file=sys.stderr, flush=True)

    rows, all_rows, runs = [], [], {}
    for radius, results, error in outcomes:
        runs[radius] = results
        for res in results:
            all_rows.append(_summary_row(radius, res, "ok"))
        if error is not None:
            rows.append({"radius_lambda": radius, "n_total": None, "active_count": None,
                         "sll_db": None, "hpbw_deg": None, "seed": None, "fitness": None,
                         "status": error})
            continue
        best = min(results, key=lambda r: (r.best_fitness, r.seed))
        rows.append(_summary_row(radius, best, "ok"))

    exports.write_csv(root / "summary.csv", [SUMMARY_HEADER] + [_csv_row(r) for r in rows])
    exports.write_csv(root / "runs.csv", [SUMMARY_HEADER] + [_csv_row(r) for r in all_rows])
    exports.atomic_write_text(root / "plot_sweep.py", plotting.SWEEP_SCRIPT)
    exports.write_json(root / "config.json", cfg.to_dict())
    exports.write_manifest(root, ["summary.csv", "runs.csv", "plot_sweep.py", "config.json"],
                           "sweep", {"radii": list(cfg.sweep)})
    write_metadata(root)
    return SweepSummary(rows, runs, root)


def _summary_row(radius, res: RunResult, status):
    return {"radius_lambda": radius, "n_total": res.n_total, "active_count": res.active_count,
            "sll_db": res.sll_db, "hpbw_deg": res.hpbw_deg, "seed": res.seed,
            "fitness": res.best_fitness, "status": status}


def _csv_row(row):
    out = []
    for key in SUMMARY_HEADER:
        v = row[key]
        if v is None:
            out.append("")
        elif isinstance(v, float):
            out.append(exports.num(v))
        else:
            out.append(str(v))
    return out
