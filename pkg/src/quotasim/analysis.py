"""Closed-form aggregate biases and Monte Carlo sweeps over the model.

Sweeps run a grid of up to two parameters (``d_color``, ``d_shape``, ``f``).
Every repetition of every cell draws its population from a seed derived
from ``(master_seed, row, col, rep)`` through numpy's ``SeedSequence``
hash, so aggregates do not depend on thread count or execution order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, QuotaInfeasibleError
from .metrics import FairnessReport, RepresentationReport, delta_bias, fairness, representation_bias
from .population import GROUPS, UINT64_MAX, BiasParams, PopulationConfig, generate_population
from .selection import QuotaAttribute, select_top_k, select_with_quota

THREADS_ENV = "QUOTASIM_THREADS"
SWEEP_PARAMS = ("d_color", "d_shape", "f")
PARADOX_GROUP = "orange_star"
_CHUNK = 64


def paradox_boundary(d_color: float, f: float) -> float:
    """Smallest ``d_shape`` at which oranges look advantaged in aggregate.

    Above this threshold a color quota moves slots from orange to green and
    hurts orange stars. Defined for ``d_color < 0`` and ``0 < f < 0.5``.
    """
    if not (0.0 < f < 0.5):
        raise DomainError(f"f must lie strictly inside (0, 0.5), got {f!r}")
    if not d_color < 0:
        raise DomainError(f"d_color must be negative (green advantage), got {d_color!r}")
    return -d_color / (1.0 - 2.0 * f)


def aggregate_color_bias(bias: BiasParams, f: float) -> tuple[float, float]:
    """Average perception offset ``(d_green, d_orange)`` of each color."""
    if not (0.0 < f <= 0.5):
        raise DomainError(f"f must lie in (0, 0.5], got {f!r}")
    d_orange = -bias.d_shape * f
    d_green = -bias.d_shape - bias.d_color + bias.d_shape * f
    return d_green, d_orange


def aggregate_shape_bias(bias: BiasParams, f: float) -> tuple[float, float]:
    """Average perception offset ``(d_star, d_circle)`` of each shape."""
    if not (0.0 < f <= 0.5):
        raise DomainError(f"f must lie in (0, 0.5], got {f!r}")
    d_star = -bias.d_shape - bias.d_color * (1.0 - f)
    d_circle = -bias.d_color * f
    return d_star, d_circle


@dataclass(frozen=True)
class ExperimentResult:
    blind: RepresentationReport
    quota: RepresentationReport
    blind_fairness: FairnessReport
    quota_fairness: FairnessReport

    @property
    def delta_b(self) -> dict[str, Optional[float]]:
        return delta_bias(self.blind, self.quota)

    def to_dict(self) -> dict:
        return {
            "blind": self.blind.to_dict(),
            "quota_on_color": self.quota.to_dict(),
            "delta_representation_bias": self.delta_b,
            "fairness_blind": self.blind_fairness.to_dict(),
            "fairness_quota_on_color": self.quota_fairness.to_dict(),
        }


def run_single_experiment(config: PopulationConfig, k: float) -> ExperimentResult:
    """Blind vs color-quota top-k on one population, paired on the same draws."""
    pop = generate_population(config)
    blind = select_top_k(pop, config.bias, k)
    quota = select_with_quota(pop, config.bias, k, QuotaAttribute.COLOR)
    return ExperimentResult(
        blind=representation_bias(pop, blind),
        quota=representation_bias(pop, quota),
        blind_fairness=fairness(pop, blind, k),
        quota_fairness=fairness(pop, quota, k),
    )


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in SWEEP_PARAMS:
            raise ConfigurationError(f"sweep axis must be one of {SWEEP_PARAMS}, got {self.name!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ConfigurationError(f"axis {self.name} has no values")

    @classmethod
    def linspace(cls, name: str, start: float, stop: float, steps: int) -> "SweepAxis":
        if steps < 1:
            raise ConfigurationError(f"axis {name}: steps must be >= 1, got {steps}")
        if steps == 1:
            return cls(name, (start,))
        return cls(name, tuple(np.linspace(start, stop, steps).tolist()))


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...] = ()
    d_color: float = -0.5
    d_shape: float = 0.0
    f: float = 0.2
    k: float = 0.2
    n: int = 5000
    reps: int = 100
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if len(self.axes) > 2:
            raise ConfigurationError("a sweep has at most two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate sweep axes: {names}")
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if not (0 <= self.master_seed <= UINT64_MAX):
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        if not (0.0 < self.k < 1.0):
            raise ConfigurationError(f"k must lie in (0, 1), got {self.k}")
        # Validate every cell up front so bad grids fail before any work.
        for idx in self.cell_indices():
            self.cell_config(idx, 0)

    @property
    def shape(self) -> tuple[int, int]:
        dims = [len(a.values) for a in self.axes] + [1, 1]
        return dims[0], dims[1]

    def cell_indices(self) -> list[tuple[int, int]]:
        rows, cols = self.shape
        return [(i, j) for i in range(rows) for j in range(cols)]

    def cell_params(self, idx: tuple[int, int]) -> dict[str, float]:
        params = {"d_color": self.d_color, "d_shape": self.d_shape, "f": self.f}
        for axis, i in zip(self.axes, idx):
            params[axis.name] = axis.values[i]
        return params

    def cell_config(self, idx: tuple[int, int], rep: int) -> PopulationConfig:
        p = self.cell_params(idx)
        return PopulationConfig(n=self.n, f=p["f"], bias=BiasParams(p["d_color"], p["d_shape"]),
                                seed=rep_seed(self.master_seed, idx, rep))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axes"] = [{"name": a.name, "values": list(a.values)} for a in self.axes]
        return d


def rep_seed(master_seed: int, cell: tuple[int, int], rep: int) -> int:
    """64-bit population seed for repetition ``rep`` of grid cell ``cell``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(cell[0]), int(cell[1]), int(rep)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# Per-rep record layout.
_FIELDS = (*(f"delta_b_{g}" for g in GROUPS), "fk_blind", "fk_quota",
           "quality_blind", "quality_quota", "quality_optimal", "quality_change")


def _rep_record(res: ExperimentResult) -> list[float]:
    db = res.delta_b
    bf, qf = res.blind_fairness, res.quota_fairness
    return [*(math.nan if db[g] is None else db[g] for g in GROUPS),
            bf.f_k, qf.f_k, bf.mean_quality, qf.mean_quality, bf.optimal_quality,
            qf.mean_quality - bf.mean_quality]


@dataclass
class SweepCellResult:
    index: tuple[int, int]
    params: dict[str, float]
    k: float
    n: int
    reps: int
    failures: int
    means: dict[str, float] = field(default_factory=dict)
    std_errors: dict[str, float] = field(default_factory=dict)
    parity_violations: int = 0
    max_identity_error: float = 0.0

    def mean_delta_b(self, group: str = PARADOX_GROUP) -> float:
        return self.means[f"delta_b_{group}"]

    def se_delta_b(self, group: str = PARADOX_GROUP) -> float:
        return self.std_errors[f"delta_b_{group}"]

    def to_row(self) -> dict:
        row = {"row": self.index[0], "col": self.index[1], **self.params,
               "k": self.k, "n": self.n, "reps": self.reps, "failures": self.failures}
        for name in _FIELDS:
            row[f"mean_{name}"] = self.means[name]
            row[f"se_{name}"] = self.std_errors[name]
        return row


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[SweepCellResult]

    def grid(self, field_name: str) -> np.ndarray:
        """Means of one per-rep field (e.g. ``"delta_b_orange_star"``) as a 2-D array."""
        out = np.full(self.spec.shape, np.nan)
        for c in self.cells:
            out[c.index] = c.means[field_name]
        return out

    def rows(self) -> list[dict]:
        return [c.to_row() for c in self.cells]

    def to_csv(self) -> str:
        return rows_to_csv(self.rows())

    def to_json(self) -> str:
        return dumps({"spec": self.spec.to_dict(), "cells": self.rows()})


def format_number(value) -> str:
    """Shortest round-trip text for CSV cells; empty for missing."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([format_number(v) for v in row.values()])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if math.isnan(obj) else float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, allow_nan=False) + "\n"


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if threads < 1:
        raise ConfigurationError(f"thread count must be positive, got {threads}")
    return threads


def _run_chunk(spec: SweepSpec, idx: tuple[int, int], start: int, stop: int):
    records = np.full((stop - start, len(_FIELDS)), np.nan)
    failures = parity_bad = 0
    identity_err = 0.0
    for r in range(start, stop):
        try:
            res = run_single_experiment(spec.cell_config(idx, r), spec.k)
        except QuotaInfeasibleError:
            failures += 1
            continue
        records[r - start] = _rep_record(res)
        counts = res.quota.attribute_counts("color")
        if abs(counts["green"] - counts["orange"]) > 1:
            parity_bad += 1
        for rep in (res.blind, res.quota):
            identity_err = max(identity_err, abs(rep.parity_identity() - 1.0))
    return records, failures, parity_bad, identity_err


def _summarise(spec: SweepSpec, idx, parts) -> SweepCellResult:
    records = np.concatenate([p[0] for p in parts])
    ok = records[~np.isnan(records[:, -1])]
    means, ses = {}, {}
    for j, name in enumerate(_FIELDS):
        col = ok[:, j]
        col = col[~np.isnan(col)]
        means[name] = float(np.mean(col)) if len(col) else math.nan
        ses[name] = float(np.std(col, ddof=1) / math.sqrt(len(col))) if len(col) > 1 else (0.0 if len(col) else math.nan)
    return SweepCellResult(
        index=idx, params=spec.cell_params(idx), k=spec.k, n=spec.n, reps=spec.reps,
        failures=sum(p[1] for p in parts), means=means, std_errors=ses,
        parity_violations=sum(p[2] for p in parts),
        max_identity_error=max(p[3] for p in parts),
    )


def sweep(spec: SweepSpec, threads: Optional[int] = None) -> SweepResult:
    """Run every cell of ``spec``; cells come back in row-major order."""
    workers = thread_count(threads)
    tasks = [(idx, s, min(s + _CHUNK, spec.reps))
             for idx in spec.cell_indices() for s in range(0, spec.reps, _CHUNK)]
    if workers == 1:
        outputs = [_run_chunk(spec, *t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(lambda t: _run_chunk(spec, *t), tasks))
    by_cell: dict[tuple[int, int], list] = {}
    for (idx, _, _), out in zip(tasks, outputs):
        by_cell.setdefault(idx, []).append(out)
    return SweepResult(spec, [_summarise(spec, idx, by_cell[idx]) for idx in spec.cell_indices()])


def quality_sweep(f: float, k: float, d_color_values: Sequence[float], d_shape_values: Sequence[float],
                  n: int, reps: int, seed: int = 0, threads: Optional[int] = None) -> SweepResult:
    """Mean selected true quality, blind vs color quota, over d_color x d_shape.

    Rows index ``d_color`` and columns ``d_shape``; see the ``quality_*``
    fields of each cell.
    """
    spec = SweepSpec(axes=(SweepAxis("d_color", tuple(d_color_values)),
                           SweepAxis("d_shape", tuple(d_shape_values))),
                     f=f, k=k, n=n, reps=reps, master_seed=seed)
    return sweep(spec, threads)
