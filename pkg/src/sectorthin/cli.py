"""Command line entry point: ``sectorthin {synth,taper,thin,sweep,pattern}``.

Exit codes: 0 success, 2 configuration error, 3 degenerate aperture,
4 sweep finished with failed radii.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import exports
from .errors import ConfigInvalid, DegenerateAperture, ThinningError
from .experiment import (config_from_dict, load_config, merge, prepare_benchmark,
                         prepare_output_dir, run_single, run_sweep)
from .geometry import expand_chromosome, read_layout_csv
from .metrics import cut_metrics
from .pattern import compute_cut, compute_grid

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_PARTIAL = 0, 2, 3, 4


def _radii(text):
    """``"4:15:1"`` (inclusive) or ``"4,6,8"``."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            n = int(round((stop - start) / step))
            return [round(start + i * step, 10) for i in range(n + 1)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML config file")
    common.add_argument("--radius", type=float, help="aperture radius (lattice periods by default)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--seed", type=int, help="master seed; repeat i uses seed + i")
    opt.add_argument("--repeats", type=int)
    opt.add_argument("--sll-req", type=float, help="required SLL in dB")
    opt.add_argument("--bw-req", type=float, help="required HPBW in degrees")
    opt.add_argument("--max-iters", type=int)
    opt.add_argument("--swarm-size", type=int)

    parser = argparse.ArgumentParser(prog="sectorthin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="write the element layout")
    p = sub.add_parser("taper", parents=[common], help="tapered benchmark weights and cut")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=["radial", "separable"])
    sub.add_parser("thin", parents=[common, opt], help="seeded swarm thinning runs")
    p = sub.add_parser("sweep", parents=[common, opt], help="thin over a list of radii")
    p.add_argument("--radii", type=_radii, help="e.g. 4:15:1 or 4,8,15")
    p.add_argument("--workers", type=int)
    p = sub.add_parser("pattern", parents=[common], help="cuts and grid of an activation file")
    p.add_argument("activation", type=Path, help="element table with a weight column")
    p.add_argument("--no-grid", action="store_true")
    return parser


def _config(args):
    data = load_config(args.config) if args.config else {}
    overrides = {
        "geometry": {"radius_lambda": args.radius},
        "output_dir": str(args.out) if args.out else None,
    }
    if hasattr(args, "seed"):
        overrides.update({
            "master_seed": args.seed,
            "repeats": args.repeats,
            "fitness": {"sll_req_db": args.sll_req, "bw_req_deg": args.bw_req},
            "pso": {"max_iters": args.max_iters, "swarm_size": args.swarm_size},
        })
    if getattr(args, "radii", None):
        overrides["sweep"] = args.radii
    if getattr(args, "workers", None):
        overrides["workers"] = args.workers
    if getattr(args, "alpha", None) is not None or getattr(args, "mode", None):
        overrides["taper"] = {"alpha": args.alpha, "mode": args.mode}
    return config_from_dict(merge(data, overrides))


def cmd_synth(args, cfg):
    from .geometry import build_layout
    layout = build_layout(cfg.geometry)
    out = prepare_output_dir(cfg.output_dir)
    exports.write_layout(out / "layout.csv", layout)
    print(f"{layout.n_total} elements, chromosome length {layout.chromosome_len} -> {out / 'layout.csv'}")
    return EXIT_OK


def cmd_taper(args, cfg):
    bench = prepare_benchmark(cfg, cfg.geometry)
    out = prepare_output_dir(cfg.output_dir)
    exports.write_layout(out / "taper.csv", bench.layout, bench.weights)
    exports.write_cut(out / "cut_tapered.csv", bench.cut)
    print(f"alpha {cfg.taper.alpha:g} ({cfg.taper.mode}): SLL {bench.sll_db:.2f} dB, "
          f"HPBW {bench.hpbw_deg:.3f} deg -> {out}")
    return EXIT_OK


def cmd_thin(args, cfg):
    out = prepare_output_dir(cfg.output_dir)
    results = run_single(cfg, out, verbose=args.verbose)
    for r in results:
        print(f"seed {r.seed}: SLL {r.sll_db:.2f} dB, HPBW {r.hpbw_deg:.3f} deg, "
              f"{r.active_count}/{r.n_total} active, fitness {r.best_fitness:.4g}, "
              f"{r.iterations_used} iterations{'' if r.converged else ' (max_iters)'}")
    print(f"outputs in {out}")
    return EXIT_OK


def cmd_sweep(args, cfg):
    if not cfg.sweep:
        raise ConfigInvalid({"sweep": "give --radii or a sweep list in the config"})
    summary = run_sweep(cfg)
    for row in summary.rows:
        if row["status"] == "ok":
            print(f"R={row['radius_lambda']:g}: N={row['n_total']} active={row['active_count']} "
                  f"SLL={row['sll_db']:.2f} dB HPBW={row['hpbw_deg']:.3f} deg")
        else:
            print(f"R={row['radius_lambda']:g}: {row['status']}")
    print(f"outputs in {summary.out_dir}")
    return EXIT_PARTIAL if summary.failed else EXIT_OK


def cmd_pattern(args, cfg):
    from .geometry import build_layout
    layout = build_layout(cfg.geometry)
    positions, _, slots, weights = read_layout_csv(args.activation)
    if weights is None:
        raise ConfigInvalid({"activation": "file has no weight column"})
    if len(positions) != layout.n_total or not np.allclose(positions, layout.positions, atol=1e-9):
        # activation file from a different geometry: evaluate its own coordinates
        layout = positions
    out = prepare_output_dir(cfg.output_dir)
    pc = cfg.pattern
    for kind, grid in pc.sll_cuts():
        cut = compute_cut(layout, weights, kind, grid, pc.element_mode, pc.db_floor)
        exports.write_cut(out / f"cut_phi{kind.value_deg:g}.csv", cut)
        if kind.value_deg == pc.cut_phi_deg:
            m = cut_metrics(cut)
            exports.write_csv(out / "metrics.csv", [["sll_db", "hpbw_deg"],
                                                     [exports.num(m.sll_db), exports.num(m.hpbw_deg)]])
            print(f"phi={kind.value_deg:g}: SLL {m.sll_db:.2f} dB, HPBW {m.hpbw_deg:.3f} deg")
    if not args.no_grid:
        exports.write_grid(out / "grid.csv",
                           compute_grid(layout, weights, pc.grid(), pc.element_mode, pc.db_floor))
    print(f"outputs in {out}")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "taper": cmd_taper, "thin": cmd_thin,
            "sweep": cmd_sweep, "pattern": cmd_pattern}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateAperture as exc:
        print(f"error: degenerate aperture: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ThinningError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
