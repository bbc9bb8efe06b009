"""Bench service: runs algorithm suites over instance corpora and renders reports."""

import asyncio
import contextlib
import csv
import io
import json
import logging
import math
import threading
import time
from collections import defaultdict
from collections.abc import Iterable
from pathlib import Path
from typing import Literal

import numpy as np
from cachetools import LRUCache, cached
from pydantic import ValidationError

from submax.core.config import get_settings
from submax.core.oracle import OracleCancelled, QueryLedger, Subset, isolated, shift
from submax.models.bench import (
    Aggregate,
    BenchConfig,
    ReportFormat,
    RunReport,
    RunRow,
    ScalingFit,
)
from submax.models.instance import CutInstance, Instance
from submax.services.exact import ExactResult, brute_force_opt, ratio
from submax.services.instances import (
    InstanceValidationError,
    SubmodularityVerdict,
    all_graphs,
    build_oracle,
    check_submodular,
    fingerprint,
    instance_id,
    random_instance,
    read_instance,
)
from submax.services.localsearch import is_approx_local_max
from submax.services.recursive import (
    AlgConfig,
    alg,
    check_query_recursion,
    node_optima,
    verify_trace,
)
from submax.solvers import SolverRegistry, register_default_solvers

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "instance",
    "m",
    "algorithm",
    "epsilon",
    "depth",
    "value",
    "opt",
    "ratio",
    "queries",
    "moves",
    "verified",
)
TIMING_COLUMN = "wall_time_s"


class BenchConfigError(ValueError):
    """Invalid bench configuration or instance source."""

    def __init__(self, message: str, source: str | None = None, original_exception: Exception | None = None):
        super().__init__(message)
        self.source = source
        self.original_exception = original_exception


opt_cache: LRUCache = LRUCache(maxsize=4096)
opt_cache_lock = threading.Lock()

submodular_cache: LRUCache = LRUCache(maxsize=4096)
submodular_cache_lock = threading.Lock()


@cached(cache=opt_cache, key=lambda inst: fingerprint(inst), lock=opt_cache_lock)
def exact_optimum(inst: Instance) -> ExactResult:
    """Brute-force optimum of an instance, memoised by content fingerprint."""
    return brute_force_opt(build_oracle(inst))


@cached(cache=submodular_cache, key=lambda inst: fingerprint(inst), lock=submodular_cache_lock)
def instance_verdict(inst: Instance) -> SubmodularityVerdict:
    settings = get_settings()
    mode = "exhaustive" if inst.m <= settings.max_exhaustive_submodular_m else "sampled"
    return check_submodular(build_oracle(inst), mode=mode)


# --- Config and sources ---


def load_config(path: str | Path) -> tuple[BenchConfig, Path]:
    """Read a JSON bench config; returns it with the directory files resolve against."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BenchConfigError(f"cannot read config {path}: {exc}", source=str(path), original_exception=exc) from exc
    try:
        return BenchConfig.model_validate_json(text), path.parent
    except ValidationError as exc:
        raise BenchConfigError(f"invalid config {path}: {exc}", source=str(path), original_exception=exc) from exc


def load_instances(cfg: BenchConfig, base_dir: str | Path = ".") -> list[tuple[str, Instance]]:
    """Materialise every instance source, in source order."""
    base_dir = Path(base_dir)
    out: list[tuple[str, Instance]] = []
    for name in cfg.files:
        path = Path(name) if Path(name).is_absolute() else base_dir / name
        try:
            inst = read_instance(path)
        except OSError as exc:
            raise BenchConfigError(f"cannot read instance {path}: {exc}", source=str(path), original_exception=exc) from exc
        except InstanceValidationError as exc:
            raise BenchConfigError(f"instance {path}: {exc}", source=str(path), original_exception=exc) from exc
        out.append((inst.name or path.stem, inst))
    for spec in cfg.generators:
        for offset in range(spec.count):
            try:
                inst = random_instance(spec.kind, spec.m, spec.seed + offset, spec.params)
            except InstanceValidationError as exc:
                raise BenchConfigError(
                    f"generator {spec.kind} m={spec.m}: {exc}", source=spec.kind, original_exception=exc
                ) from exc
            out.append((instance_id(inst), inst))
    for suite in cfg.suites:
        out.extend((inst.name, inst) for inst in all_graphs(suite.m))
    if not out:
        raise BenchConfigError("the configured sources produced no instances")
    return out


# --- Cells ---


def _verify_cell(inst: Instance, row: RunRow, result, epsilon: float) -> None:
    checks = []
    verdict = instance_verdict(inst)
    passed = verdict.passed
    if result.trace is not None:
        optima = node_optima(build_oracle(inst), result.trace)
        report = verify_trace(result.trace, optima, epsilon)
        checks = report.failures + [c for c in check_query_recursion(result.trace, epsilon) if c.passed is False]
        passed = passed and not checks
    if row.algorithm == "ls":
        shifted = shift(build_oracle(inst))
        passed = passed and is_approx_local_max(
            shifted, Subset.from_indices(result.subset, inst.m), epsilon, mode="exhaustive"
        )
    row.failures = checks
    row.verified = passed


def _raise_if_cancelled(cancel: threading.Event | None) -> None:
    if cancel is not None and cancel.is_set():
        raise OracleCancelled("cell cancelled")


def run_cell(
    inst_id: str,
    inst: Instance,
    algorithm: str,
    epsilon: float,
    cfg: BenchConfig,
    cancel: threading.Event | None = None,
) -> RunRow:
    """Run one (instance, algorithm, epsilon) cell on a fresh ledger.

    Setting cancel stops the solver at its next query and skips the
    remaining reference and verification steps.
    """
    settings = get_settings()
    solver = SolverRegistry.get(algorithm)
    row = RunRow(instance=inst_id, m=inst.m, algorithm=algorithm, epsilon=epsilon, depth=solver.depth)
    started = time.perf_counter()
    ledger = QueryLedger(cancel=cancel)
    result = solver.solve(build_oracle(inst, ledger), epsilon, trials=cfg.trials, base_seed=cfg.base_seed)
    row.wall_time_s = time.perf_counter() - started
    row.value = result.value
    row.queries = result.queries
    row.moves = result.moves
    row.value_std = result.value_std
    if cfg.include_traces:
        row.trace = result.trace
    _raise_if_cancelled(cancel)
    if inst.m <= settings.max_brute_m:
        exact = exact_optimum(inst)
        row.opt = exact.opt_value
        row.ratio = ratio(result.value, exact)
    _raise_if_cancelled(cancel)
    if cfg.verify and inst.m <= settings.verify_max_m:
        _verify_cell(inst, row, result, epsilon)
    return row


async def run_async(cfg: BenchConfig, base_dir: str | Path = ".") -> RunReport:
    """Run every cell concurrently, each in a worker thread bounded by the cell timeout.

    A timed-out cell is cancelled through its query ledger; its worker slot is
    released only once the thread has stopped.
    """
    settings = get_settings()
    timeout = settings.cell_timeout
    instances = load_instances(cfg, base_dir)
    register_default_solvers()
    for name in cfg.algorithms:
        SolverRegistry.get(name)

    semaphore = asyncio.Semaphore(settings.workers)
    logger.info(
        "Bench: %d instances x %d algorithms x %d epsilons",
        len(instances),
        len(cfg.algorithms),
        len(cfg.epsilons),
    )

    async def run_one(inst_id: str, inst: Instance, algorithm: str, epsilon: float) -> RunRow:
        async with semaphore:
            cancel = threading.Event()
            work = asyncio.ensure_future(
                asyncio.to_thread(run_cell, inst_id, inst, algorithm, epsilon, cfg, cancel)
            )
            try:
                return await asyncio.wait_for(asyncio.shield(work), timeout=timeout)
            except asyncio.TimeoutError:
                logger.warning(f"Timeout running {algorithm} on {inst_id} after {timeout}s")
                cancel.set()
                with contextlib.suppress(Exception):
                    await work
                error = f"timeout after {timeout}s"
            except Exception as e:
                logger.error(f"Error running {algorithm} on {inst_id}: {e}", exc_info=e)
                error = f"{type(e).__name__}: {e}"
            return RunRow(instance=inst_id, m=inst.m, algorithm=algorithm, epsilon=epsilon, error=error)

    rows = await asyncio.gather(
        *[
            run_one(inst_id, inst, algorithm, epsilon)
            for inst_id, inst in instances
            for algorithm in cfg.algorithms
            for epsilon in cfg.epsilons
        ]
    )
    report = RunReport(rows=sorted(rows, key=RunRow.sort_key), aggregates=aggregate(rows))
    logger.info("Bench finished: %d rows, %d errors", len(report.rows), len(report.errors))
    return report


def run(cfg: BenchConfig, base_dir: str | Path = ".") -> RunReport:
    return asyncio.run(run_async(cfg, base_dir))


def _loglog_fit(sizes, queries) -> tuple[float, float, np.ndarray]:
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(queries, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), y - (slope * x + intercept)


def _query_slope(points: list[tuple[int, int]]) -> tuple[list[int], float | None]:
    by_m: dict[int, list[int]] = defaultdict(list)
    for m, queries in points:
        if queries > 0:
            by_m[m].append(queries)
    sizes = sorted(by_m)
    if len(sizes) < 3:
        return sizes, None
    slope, _, _ = _loglog_fit(sizes, [np.mean(by_m[m]) for m in sizes])
    return sizes, slope


def aggregate(rows: Iterable[RunRow]) -> list[Aggregate]:
    groups: dict[tuple[str, float], list[float]] = defaultdict(list)
    counts: dict[tuple[str, float], int] = defaultdict(int)
    points: dict[tuple[str, float], list[tuple[int, int]]] = defaultdict(list)
    for row in rows:
        key = (row.algorithm, row.epsilon)
        counts[key] += 1
        if row.ratio is not None:
            groups[key].append(row.ratio)
        if row.error is None and row.queries is not None:
            points[key].append((row.m, row.queries))
    out = []
    for key in sorted(counts):
        ratios = groups.get(key, [])
        sizes, slope = _query_slope(points.get(key, []))
        out.append(
            Aggregate(
                algorithm=key[0],
                epsilon=key[1],
                instances=counts[key],
                min_ratio=min(ratios) if ratios else None,
                mean_ratio=float(np.mean(ratios)) if ratios else None,
                sizes=sizes,
                query_slope=slope,
            )
        )
    return out


# --- Rendering ---


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _table(report: RunReport, timing: bool) -> tuple[list[str], list[list[str]]]:
    header = list(CSV_COLUMNS) + ([TIMING_COLUMN] if timing else [])
    body = []
    for row in report.rows:
        cells = [_cell(getattr(row, column)) for column in CSV_COLUMNS]
        if timing:
            cells.append(_cell(row.wall_time_s))
        body.append(cells)
    return header, body


def emit(report: RunReport, fmt: ReportFormat = "csv", timing: bool = False, include_traces: bool = False) -> str:
    """Render a report. Wall time appears only when timing is set, in its own column."""
    if fmt == "json":
        hidden = set()
        if not timing:
            hidden.add("wall_time_s")
        if not include_traces:
            hidden.add("trace")
        exclude = {"rows": {"__all__": hidden}} if hidden else None
        payload = report.model_dump(mode="json", exclude=exclude)
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"

    header, body = _table(report, timing)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buffer.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines.extend("| " + " | ".join(cells) + " |" for cells in body)
        return "\n".join(lines) + "\n"
    raise BenchConfigError(f"unknown report format {fmt!r}")


# --- Query scaling ---


def _family_instance(family: str, m: int, seed: int) -> Instance:
    if family == "zero":
        return CutInstance(m=m, name=f"zero-m{m}")
    return random_instance(family, m, seed)


def scaling_experiment(
    family: Literal["random-cut", "random-coverage", "zero"],
    sizes: list[int],
    epsilon: float,
    nrounds: int | None = None,
    seed: int = 0,
) -> ScalingFit:
    """Fit the exponent of the query count of alg in m on a seeded family."""
    nrounds = get_settings().default_nrounds if nrounds is None else nrounds
    if len(sizes) < 3:
        raise BenchConfigError("the scaling fit needs at least 3 sizes")
    if any(a >= b for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
        raise BenchConfigError("sizes must be positive and strictly ascending")
    if epsilon <= 0:
        raise BenchConfigError("epsilon must be positive")

    queries = []
    for m in sizes:
        oracle = isolated(build_oracle(_family_instance(family, m, seed)))
        alg(oracle, AlgConfig(epsilon=epsilon, nrounds=nrounds))
        queries.append(oracle.ledger.count)
        logger.info("scaling %s m=%d: %d queries", family, m, oracle.ledger.count)

    slope, intercept, residuals = _loglog_fit(sizes, queries)
    return ScalingFit(
        family=family,
        epsilon=epsilon,
        nrounds=nrounds,
        sizes=list(sizes),
        queries=queries,
        slope=slope,
        intercept=intercept,
        residuals=[float(r) if math.isfinite(r) else 0.0 for r in residuals],
    )
