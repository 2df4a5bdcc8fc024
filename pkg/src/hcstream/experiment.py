"""Batch experiments: TOML config in, one CSV row per (instance, seed) out."""

from __future__ import annotations

import csv
import logging
import sys
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from hcstream.errors import HCError, InvalidArgumentError, ParseError
from hcstream.instances import Family, InstanceSpec, generate
from hcstream.pipeline import stream_hc
from hcstream.solver import DEFAULT_BETA, CutFinder, solve
from hcstream.sparsifier import DEFAULT_BUDGET_C, DEFAULT_EPSILON
from hcstream.stream import ArrivalOrder, EdgeStream

logger = logging.getLogger(__name__)

COLUMNS = [
    "instance_id",
    "family",
    "case",
    "n",
    "k",
    "t",
    "seed",
    "cost",
    "lower_bound",
    "ratio",
    "words_peak",
    "passes",
    "wall_time",
    "gap_ratio",
    "status",
]

# the case that is expected to cost more, per family
HIGH_CASE = {Family.NOC: 1, Family.OVME: "yes"}
LOW_CASE = {Family.NOC: 2, Family.OVME: "no"}


class Pipeline(str, Enum):
    OFFLINE = "offline"
    STREAMING = "streaming"


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment CSV."""

    name: str
    instances: list[InstanceSpec] = field(default_factory=list)
    pipeline: Pipeline = Pipeline.STREAMING
    seeds: list[int] = field(default_factory=lambda: [0])
    output: Path = Path("experiment.csv")
    timing: bool = False
    epsilon: float = DEFAULT_EPSILON
    beta: float = DEFAULT_BETA
    finder: str = "spectral"
    budget_c: float = DEFAULT_BUDGET_C
    target: int | None = None
    order: ArrivalOrder = ArrivalOrder.NATURAL

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path | None = None) -> ExperimentConfig:
        body = dict(data)
        try:
            name = str(body.pop("name"))
        except KeyError as e:
            raise InvalidArgumentError("Experiment config is missing 'name'") from e
        instances = [InstanceSpec.from_dict(item) for item in body.pop("instances", [])]
        output = Path(body.pop("output", f"{name}.csv"))
        if base_dir is not None and not output.is_absolute():
            output = base_dir / output
        try:
            config = cls(
                name=name,
                instances=instances,
                pipeline=Pipeline(body.pop("pipeline", "streaming")),
                seeds=[int(s) for s in body.pop("seeds", [0])],
                output=output,
                timing=bool(body.pop("timing", False)),
                epsilon=float(body.pop("epsilon", DEFAULT_EPSILON)),
                beta=float(body.pop("beta", DEFAULT_BETA)),
                finder=str(body.pop("finder", "spectral")),
                budget_c=float(body.pop("budget_c", DEFAULT_BUDGET_C)),
                target=int(body["target"]) if "target" in body else None,
                order=ArrivalOrder(body.pop("order", "natural")),
            )
        except ValueError as e:
            raise InvalidArgumentError(f"Invalid experiment config: {e}") from e
        body.pop("target", None)
        if body:
            raise InvalidArgumentError(f"Unknown experiment keys: {', '.join(sorted(body))}")
        return config

    def to_dict(self) -> dict[str, Any]:
        data = {
            "name": self.name,
            "pipeline": self.pipeline.value,
            "seeds": self.seeds,
            "output": str(self.output),
            "timing": self.timing,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "finder": self.finder,
            "budget_c": self.budget_c,
            "order": self.order.value,
            "instances": [spec.to_dict() for spec in self.instances],
        }
        if self.target is not None:
            data["target"] = self.target
        return data


def load_experiment(path: Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ParseError(f"experiment config not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ParseError(f"invalid TOML in {path}: {e}") from e
    return ExperimentConfig.from_dict(data, base_dir=path.parent)


# =============================================================================
# Running rows
# =============================================================================


@dataclass(frozen=True)
class _Job:
    index: int
    spec: InstanceSpec
    config: ExperimentConfig


def _format(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def run_row(job: _Job) -> dict[str, str]:
    """One (instance, seed) run; failures become a status instead of an exception."""
    spec, config = job.spec, job.config
    row = {column: "" for column in COLUMNS}
    row.update(
        instance_id=f"{config.name}-{job.index:04d}",
        family=spec.family.value,
        case=str(spec.params.get("case", "")),
        n=str(spec.params.get("n", "")),
        k=str(spec.params.get("k", "")),
        t=str(spec.params.get("t", "")),
        seed=str(spec.seed),
    )
    started = time.perf_counter()
    try:
        instance = generate(spec)
        g = instance.graph
        row["n"] = str(g.n)
        finder = CutFinder.named(config.finder, seed=spec.seed)
        if config.pipeline is Pipeline.OFFLINE:
            report = solve(g, config.beta, finder)
        else:
            bipartition = None
            if config.order is ArrivalOrder.ADVERSARIAL:
                bipartition = range(g.n // 2)
            stream = EdgeStream.from_graph(g, order=config.order, seed=spec.seed, bipartition=bipartition)
            report = stream_hc(
                stream,
                g.n,
                config.epsilon,
                config.beta,
                finder,
                seed=spec.seed,
                budget_c=config.budget_c,
                target=config.target,
            )
    except HCError as e:
        logger.warning("Instance %s failed: %s", row["instance_id"], e.message)
        row["status"] = f"error: {e.message}"
        return row

    row.update(
        cost=_format(report.cost),
        lower_bound=_format(report.lower_bound),
        ratio=_format(report.ratio_certificate),
        words_peak=str(report.metrics.words_peak),
        passes=str(report.metrics.passes),
        status="ok",
    )
    if config.timing:
        row["wall_time"] = f"{time.perf_counter() - started:.6f}"
    return row


def _fill_gap_ratios(rows: list[dict[str, str]], specs: list[InstanceSpec]) -> None:
    """Put cost(high case) / cost(low case) on the high-case row of each matched pair."""
    costs: dict[tuple[Any, ...], float] = {}
    for row, spec in zip(rows, specs):
        if spec.family in LOW_CASE and row["status"] == "ok" and spec.params.get("case") == LOW_CASE[spec.family]:
            costs[_pair_key(spec)] = float(row["cost"])
    for row, spec in zip(rows, specs):
        if spec.family not in HIGH_CASE or row["status"] != "ok":
            continue
        if spec.params.get("case") != HIGH_CASE[spec.family]:
            continue
        low = costs.get(_pair_key(spec))
        if low:
            row["gap_ratio"] = _format(float(row["cost"]) / low)


def _pair_key(spec: InstanceSpec) -> tuple[Any, ...]:
    params = tuple(sorted((k, str(v)) for k, v in spec.params.items() if k != "case"))
    return spec.family, spec.seed, params


def expand_jobs(config: ExperimentConfig) -> list[_Job]:
    """Instances in config order, each repeated once per seed."""
    jobs = []
    for spec in config.instances:
        for seed in config.seeds:
            jobs.append(_Job(len(jobs), replace(spec, params=dict(spec.params), seed=seed), config))
    return jobs


def run_experiment(
    config: ExperimentConfig,
    workers: int = 1,
    on_row: Callable[[int, int], None] | None = None,
) -> list[dict[str, str]]:
    """Run every job and write the CSV; rows keep job order whatever the worker count."""
    if workers < 1:
        raise InvalidArgumentError(f"workers must be at least 1, got {workers}")
    jobs = expand_jobs(config)
    rows: list[dict[str, str]] = []
    if workers == 1 or len(jobs) <= 1:
        results = map(run_row, jobs)
        executor = None
    else:
        executor = ProcessPoolExecutor(max_workers=workers)
        results = executor.map(run_row, jobs)
    try:
        for row in results:
            rows.append(row)
            if on_row is not None:
                on_row(len(rows), len(jobs))
    finally:
        if executor is not None:
            executor.shutdown()

    _fill_gap_ratios(rows, [job.spec for job in jobs])
    write_rows(config.output, rows)
    logger.info("Wrote %d rows to %s", len(rows), config.output)
    return rows


def write_rows(path: Path, rows: list[dict[str, str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
