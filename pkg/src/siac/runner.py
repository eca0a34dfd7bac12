"""Experiment orchestration: frame a corpus, score importance, allocate power
across the budget sweep, and evaluate every scheme under every metric.

Stages compose through files (frames.json, importance.json, allocations.csv,
results.csv) and ``run_sweep`` chains the same functions in memory, so the
staged and the end-to-end paths agree cell for cell. All orderings are
canonical and floats are written in shortest-roundtrip form, which makes runs
with the same config and seed byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from dataclasses import dataclass

import numpy as np

from .allocator import Allocation, SolverReport, allocate, allocate_equal
from .channel import ChannelParams
from .config import ExperimentConfig
from .corpus import Batch, make_batches, read_manifest, tokenize, write_manifest
from .errors import LengthMismatchError, ParseError
from .importance import (
    ImportanceVector,
    WordLabeling,
    frame_importance_count,
    frame_importance_semantic,
    fuse_average,
    fuse_majority,
    load_importance_file,
    read_labeling_file,
    write_importance_file,
)
from .metrics import cross_evaluate, expected_weighted_loss, monte_carlo_profile

FRAMES_FILE = "frames.json"
IMPORTANCE_FILE = "importance.json"
ALLOCATIONS_FILE = "allocations.csv"
RESULTS_FILE = "results.csv"

RESULTS_NOTE = (
    "# per-batch rows plus batch=mean aggregate rows;"
    " mean over batches, value_std = sample standard deviation (ddof=1)\n"
)

_METRIC_BY_SOURCE = {"count": "important_word_errors", "semantic": "semantic_loss"}


def metric_name(source: str) -> str:
    return _METRIC_BY_SOURCE.get(source, f"{source}_weighted_outage")


@dataclass(frozen=True)
class SweepCell:
    batch_id: int
    scheme: str
    metric: str
    p_total: float
    value: float
    ci_halfwidth: float


@dataclass
class SweepResult:
    config: ExperimentConfig
    batches: list[Batch]
    weight_sets: dict[int, dict[str, ImportanceVector]]
    allocations: dict[tuple[int, float, str], Allocation]
    reports: dict[tuple[int, float, str], SolverReport]
    cells: list[SweepCell]


def _stable_seed(*parts) -> int:
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, np.ndarray):
            h.update(np.ascontiguousarray(part, dtype=np.float64).tobytes())
        else:
            h.update(repr(part).encode("utf-8"))
        h.update(b"|")
    return int.from_bytes(h.digest(), "big")


def build_batches(config: ExperimentConfig) -> list[Batch]:
    with open(config.resolved_corpus_path(), encoding="utf-8") as fh:
        text = fh.read()
    tokens = tokenize(text)
    batches = make_batches(tokens, config.words_per_frame, config.frames_per_batch)
    return batches[: config.max_batches]


def compute_weight_sets(config: ExperimentConfig, batches: list[Batch]) -> dict[int, dict[str, ImportanceVector]]:
    """Per batch, the importance vector of every configured scheme.

    Misalignment between an importance source and the framing fails fast with
    the offending batch and position.
    """
    per_batch: dict[int, dict[str, ImportanceVector]] = {b.batch_id: {} for b in batches}

    labeling_path = config.resolved_labeling_path()
    if labeling_path:
        file_tokens, labelings = read_labeling_file(labeling_path)
        fuse = fuse_majority if config.fusion == "majority" else fuse_average
        fused = fuse(labelings)
        needed = sum(b.token_count for b in batches)
        if len(file_tokens) < needed:
            raise LengthMismatchError(
                f"{labeling_path}: covers {len(file_tokens)} tokens but the framing "
                f"needs {needed} (batches 0..{batches[-1].batch_id})"
            )
        pos = 0
        for b in batches:
            n = b.token_count
            frame_texts = [t.text for t in b.tokens]
            file_slice = file_tokens[pos : pos + n]
            if file_slice != frame_texts:
                for j, (a, t) in enumerate(zip(file_slice, frame_texts)):
                    if a != t:
                        raise LengthMismatchError(
                            f"{labeling_path}: token mismatch at batch {b.batch_id} "
                            f"position {j}: file has {a!r}, framing has {t!r}"
                        )
            lab = WordLabeling(tuple(fused.values[pos : pos + n]))
            per_batch[b.batch_id]["count"] = frame_importance_count(lab, b)
            pos += n

    if config.importance_path:
        frames_by_batch = {b.batch_id: b.n_frames for b in batches}
        for vec in load_importance_file(config.importance_path):
            if vec.batch_id is None:
                raise ParseError(f"{config.importance_path}: entries need a batch_id")
            if vec.batch_id not in frames_by_batch:
                continue
            if len(vec) != frames_by_batch[vec.batch_id]:
                raise LengthMismatchError(
                    f"{config.importance_path}: batch {vec.batch_id} carries "
                    f"{len(vec)} weights but has {frames_by_batch[vec.batch_id]} frames"
                )
            per_batch[vec.batch_id][vec.source] = vec

    if config.semantic:
        provider = config.make_provider()
        for b in batches:
            if "semantic" not in per_batch[b.batch_id]:
                per_batch[b.batch_id]["semantic"] = frame_importance_semantic(b, provider)

    return per_batch


def compute_allocations(config: ExperimentConfig, batches: list[Batch],
                        weight_sets: dict[int, dict[str, ImportanceVector]]):
    """Allocate each batch's budget per scheme for every swept total power.

    The solver seed is derived from (config seed, batch, budget, weights), so
    two schemes with identical weights return identical allocations.
    """
    params = config.channel_params()
    allocations: dict[tuple[int, float, str], Allocation] = {}
    reports: dict[tuple[int, float, str], SolverReport] = {}
    for b in batches:
        wset = weight_sets[b.batch_id]
        for p_total in config.p_total_watts:
            eq = allocate_equal(b.n_frames, p_total)
            allocations[(b.batch_id, p_total, "equal")] = eq
            reports[(b.batch_id, p_total, "equal")] = SolverReport(converged=True)
            cache: dict[bytes, tuple[Allocation, SolverReport]] = {}
            for source in sorted(wset):
                vec = wset[source]
                if len(vec) != b.n_frames:
                    raise LengthMismatchError(
                        f"batch {b.batch_id}: scheme {source!r} carries {len(vec)} "
                        f"weights but the batch has {b.n_frames} frames"
                    )
                key = vec.weights.tobytes()
                if key in cache:
                    alloc, rep = cache[key]
                elif not np.any(vec.weights > 0):
                    # vacuous problem: fall back to the equal split
                    alloc = allocate_equal(b.n_frames, p_total, vec.weights, params)
                    rep = SolverReport(converged=True)
                    cache[key] = (alloc, rep)
                else:
                    alloc, rep = allocate(
                        vec.weights, p_total, params,
                        tol=config.tol, restarts=config.restarts,
                        max_iters=config.max_iters,
                        seed=_stable_seed(config.seed, b.batch_id, p_total, vec.weights),
                    )
                    cache[key] = (alloc, rep)
                allocations[(b.batch_id, p_total, source)] = alloc
                reports[(b.batch_id, p_total, source)] = rep
    return allocations, reports


def evaluate_cells(config: ExperimentConfig, batches: list[Batch],
                   weight_sets: dict[int, dict[str, ImportanceVector]],
                   allocations: dict[tuple[int, float, str], Allocation]) -> list[SweepCell]:
    """Cross-evaluate every scheme under every metric.

    With trials = 0 the evaluation is analytic and each metric's own scheme is
    checked to attain the column minimum; with trials > 0 values are
    Monte-Carlo estimates with 3-sigma half-widths.
    """
    params = config.channel_params()
    cells: list[SweepCell] = []
    for b in batches:
        wset = weight_sets[b.batch_id]
        metric_weights = {metric_name(src): wset[src] for src in sorted(wset)}
        for p_total in config.p_total_watts:
            scheme_names = ["equal"] + sorted(wset)
            schemes = {name: allocations[(b.batch_id, p_total, name)] for name in scheme_names}
            if config.trials == 0:
                optimized = {
                    metric_name(src): src
                    for src in wset
                    if np.any(wset[src].weights > 0)
                }
                for cell in cross_evaluate(schemes, metric_weights, params, optimized):
                    cells.append(SweepCell(b.batch_id, cell.scheme, cell.metric,
                                           p_total, cell.value, 0.0))
            else:
                for name in scheme_names:
                    profile = monte_carlo_profile(
                        schemes[name], params, config.trials,
                        _stable_seed(config.seed, b.batch_id, p_total, name),
                    )
                    hw = profile.ci_halfwidths
                    for metric, vec in metric_weights.items():
                        value = expected_weighted_loss(vec, profile)
                        ci = float(np.sqrt(np.sum((vec.weights * hw) ** 2)))
                        cells.append(SweepCell(b.batch_id, name, metric, p_total, value, ci))
    return cells


def filter_schemes(weight_sets: dict[int, dict[str, ImportanceVector]],
                   only_scheme: str | None) -> dict[int, dict[str, ImportanceVector]]:
    """Restrict weight sets to one named scheme (the equal baseline always runs)."""
    if only_scheme is None:
        return weight_sets
    filtered = {
        bid: {src: vec for src, vec in sources.items() if src == only_scheme}
        for bid, sources in weight_sets.items()
    }
    if not any(filtered.values()):
        available = sorted({src for sources in weight_sets.values() for src in sources})
        raise ParseError(
            f"scheme {only_scheme!r} not available; configured schemes: {available}"
        )
    return filtered


def run_sweep(config: ExperimentConfig, only_scheme: str | None = None) -> SweepResult:
    """The end-to-end pipeline on in-memory objects; deterministic per seed."""
    batches = build_batches(config)
    if not batches:
        raise ParseError(f"{config.resolved_corpus_path()}: corpus yields no tokens")
    weight_sets = filter_schemes(compute_weight_sets(config, batches), only_scheme)
    allocations, reports = compute_allocations(config, batches, weight_sets)
    cells = evaluate_cells(config, batches, weight_sets, allocations)
    return SweepResult(config, batches, weight_sets, allocations, reports, cells)


def write_importance(weight_sets: dict[int, dict[str, ImportanceVector]], path) -> None:
    vectors = [
        weight_sets[bid][src]
        for bid in sorted(weight_sets)
        for src in sorted(weight_sets[bid])
    ]
    write_importance_file(vectors, path)


def write_allocations(allocations: dict[tuple[int, float, str], Allocation], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["batch_id", "scheme", "p_total_watts", "frame_id", "power_watts", "method"])
        for bid, p_total, scheme in sorted(allocations, key=lambda k: (k[0], k[1], k[2])):
            alloc = allocations[(bid, p_total, scheme)]
            for frame_id, power in enumerate(alloc.powers):
                writer.writerow([bid, scheme, repr(float(p_total)), frame_id,
                                 repr(float(power)), alloc.method])


def read_allocations(path) -> dict[tuple[int, float, str], Allocation]:
    rows: dict[tuple[int, float, str], list[tuple[int, float, str]]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"batch_id", "scheme", "p_total_watts", "frame_id", "power_watts", "method"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            key = (int(row["batch_id"]), float(row["p_total_watts"]), row["scheme"])
            rows.setdefault(key, []).append(
                (int(row["frame_id"]), float(row["power_watts"]), row["method"])
            )
    allocations = {}
    for key, entries in rows.items():
        entries.sort()
        if [e[0] for e in entries] != list(range(len(entries))):
            raise ParseError(f"{path}: batch {key[0]} scheme {key[2]!r} has frame gaps")
        powers = np.array([e[1] for e in entries])
        allocations[key] = Allocation(powers, key[1], float("nan"), entries[0][2])
    return allocations


def write_results(config: ExperimentConfig, cells: list[SweepCell], path) -> None:
    by_group: dict[tuple[str, str, float], dict[int, SweepCell]] = {}
    for cell in cells:
        by_group.setdefault((cell.metric, cell.scheme, cell.p_total), {})[cell.batch_id] = cell
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(RESULTS_NOTE)
        writer = csv.writer(fh)
        writer.writerow(["batch", "scheme", "metric", "p_total_watts", "value",
                         "value_std", "ci_halfwidth", "batches", "trials", "seed"])
        for metric, scheme, p_total in sorted(by_group):
            group = by_group[(metric, scheme, p_total)]
            values = []
            for bid in sorted(group):
                cell = group[bid]
                values.append(cell.value)
                writer.writerow([bid, scheme, metric, repr(float(p_total)),
                                 repr(cell.value), "", repr(cell.ci_halfwidth),
                                 1, config.trials, config.seed])
            mean = float(np.mean(values))
            std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            writer.writerow(["mean", scheme, metric, repr(float(p_total)),
                             repr(mean), repr(std), "", len(values),
                             config.trials, config.seed])


def read_results(path) -> list[dict]:
    """Parse results.csv (comment lines skipped) into dict rows."""
    with open(path, encoding="utf-8", newline="") as fh:
        body = "".join(line for line in fh if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def write_all(result: SweepResult, out_dir) -> dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "frames": os.path.join(out_dir, FRAMES_FILE),
        "importance": os.path.join(out_dir, IMPORTANCE_FILE),
        "allocations": os.path.join(out_dir, ALLOCATIONS_FILE),
        "results": os.path.join(out_dir, RESULTS_FILE),
    }
    write_manifest(result.batches, paths["frames"])
    write_importance(result.weight_sets, paths["importance"])
    write_allocations(result.allocations, paths["allocations"])
    write_results(result.config, result.cells, paths["results"])
    return paths
