"""Command-line interface: frame | score | allocate | evaluate | sweep.

Each stage reads and writes the documented file formats so stages compose via
files; ``sweep`` runs the whole pipeline in one process and emits the same
artifacts. Validation failures exit nonzero with a message on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import runner
from .config import ExperimentConfig
from .corpus import read_manifest, write_manifest
from .errors import ParseError, SiacError
from .importance import load_importance_file


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; defaults cover the bundled sample corpus")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--trials", type=int, help="override Monte-Carlo trials (0 = analytic)")
    common.add_argument("--out-dir", help="override the output directory")
    common.add_argument("--scheme", help="restrict to one importance scheme (count, semantic, ...)")
    common.add_argument("--provider", help="embedding provider: stub or file:PATH")

    parser = argparse.ArgumentParser(
        prog="siac",
        description="Importance-aware power allocation experiments over a Rayleigh fading link",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frame", parents=[common], help="tokenize the corpus into frames.json")
    p.set_defaults(func=_cmd_frame)

    p = sub.add_parser("score", parents=[common], help="score frame importance into importance.json")
    p.add_argument("--frames", help="framing manifest (default: OUT_DIR/frames.json)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("allocate", parents=[common], help="solve the power allocation sweep")
    p.add_argument("--frames", help="framing manifest (default: OUT_DIR/frames.json)")
    p.add_argument("--importance", help="importance file (default: OUT_DIR/importance.json)")
    p.set_defaults(func=_cmd_allocate)

    p = sub.add_parser("evaluate", parents=[common], help="cross-evaluate allocations into results.csv")
    p.add_argument("--frames", help="framing manifest (default: OUT_DIR/frames.json)")
    p.add_argument("--importance", help="importance file (default: OUT_DIR/importance.json)")
    p.add_argument("--allocations", help="allocations file (default: OUT_DIR/allocations.csv)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", parents=[common], help="run the whole pipeline end to end")
    p.set_defaults(func=_cmd_sweep)
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.provider is not None:
        overrides["provider"] = args.provider
    return replace(cfg, **overrides) if overrides else cfg


def _default_path(cfg: ExperimentConfig, given: str | None, name: str) -> str:
    return given if given else os.path.join(cfg.out_dir, name)


def _read_batches(cfg: ExperimentConfig, frames_arg: str | None):
    return read_manifest(_default_path(cfg, frames_arg, runner.FRAMES_FILE))


def _read_weight_sets(cfg: ExperimentConfig, batches, importance_arg: str | None, scheme: str | None):
    path = _default_path(cfg, importance_arg, runner.IMPORTANCE_FILE)
    known = {b.batch_id for b in batches}
    weight_sets: dict[int, dict] = {b.batch_id: {} for b in batches}
    for vec in load_importance_file(path):
        if vec.batch_id is None:
            raise ParseError(f"{path}: entries need a batch_id")
        if vec.batch_id in known:
            weight_sets[vec.batch_id][vec.source] = vec
    return runner.filter_schemes(weight_sets, scheme)


def _cmd_frame(cfg: ExperimentConfig, args) -> int:
    batches = runner.build_batches(cfg)
    if not batches:
        raise ParseError(f"{cfg.resolved_corpus_path()}: corpus yields no tokens")
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, runner.FRAMES_FILE)
    write_manifest(batches, path)
    print(path)
    return 0


def _cmd_score(cfg: ExperimentConfig, args) -> int:
    batches = _read_batches(cfg, args.frames)
    weight_sets = runner.filter_schemes(runner.compute_weight_sets(cfg, batches), args.scheme)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, runner.IMPORTANCE_FILE)
    runner.write_importance(weight_sets, path)
    print(path)
    return 0


def _cmd_allocate(cfg: ExperimentConfig, args) -> int:
    batches = _read_batches(cfg, args.frames)
    weight_sets = _read_weight_sets(cfg, batches, args.importance, args.scheme)
    allocations, _ = runner.compute_allocations(cfg, batches, weight_sets)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, runner.ALLOCATIONS_FILE)
    runner.write_allocations(allocations, path)
    print(path)
    return 0


def _cmd_evaluate(cfg: ExperimentConfig, args) -> int:
    batches = _read_batches(cfg, args.frames)
    weight_sets = _read_weight_sets(cfg, batches, args.importance, args.scheme)
    allocations = runner.read_allocations(_default_path(cfg, args.allocations, runner.ALLOCATIONS_FILE))
    cells = runner.evaluate_cells(cfg, batches, weight_sets, allocations)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, runner.RESULTS_FILE)
    runner.write_results(cfg, cells, path)
    print(path)
    return 0


def _cmd_sweep(cfg: ExperimentConfig, args) -> int:
    result = runner.run_sweep(cfg, only_scheme=args.scheme)
    paths = runner.write_all(result, cfg.out_dir)
    print(paths["results"])
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(cfg, args)
    except (SiacError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
