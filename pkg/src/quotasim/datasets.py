"""CSV ingestion, attribute binarization and model approximation for real data.

A :class:`DatasetSpec` names the quality column and two binary attributes,
each with a rule that maps raw cell values onto advantaged/disadvantaged.
Loaded rows are mapped onto the model's subgroups with the penalty
indicator set for the disadvantaged value: disadvantaged visible is
``green``, advantaged visible ``orange``; disadvantaged hidden is ``star``,
advantaged hidden ``circle``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import stats

from .analysis import dumps
from .errors import (ConfigurationError, DegenerateInputError, EmptyDataError, FitError,
                     SchemaError, TransformError)
from .metrics import RepresentationReport, delta_bias, report_from_codes
from .population import GROUPS, group_code
from .selection import quota_top, slot_count, top_m

MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none"})
TRANSFORMS = ("identity", "log")

# Human-readable names of the four cells for empirical reports.
GROUP_LABELS = {
    "green_star": "visible disadvantaged / hidden disadvantaged",
    "green_circle": "visible disadvantaged / hidden advantaged",
    "orange_star": "visible advantaged / hidden disadvantaged",
    "orange_circle": "visible advantaged / hidden advantaged",
}


@dataclass(frozen=True)
class CategoryRule:
    """Map category strings to advantaged/disadvantaged.

    ``disadvantaged=None`` means every category not listed as advantaged.
    Categories in neither set drop the row.
    """

    advantaged: frozenset[str]
    disadvantaged: Optional[frozenset[str]] = None
    kind = "category"

    def __post_init__(self):
        object.__setattr__(self, "advantaged", frozenset(self.advantaged))
        if self.disadvantaged is not None:
            object.__setattr__(self, "disadvantaged", frozenset(self.disadvantaged))
            if self.advantaged & self.disadvantaged:
                raise ConfigurationError(
                    f"categories in both sets: {sorted(self.advantaged & self.disadvantaged)}")

    def label(self, value: str) -> Optional[bool]:
        if value in self.advantaged:
            return True
        if self.disadvantaged is None or value in self.disadvantaged:
            return False
        return None

    def to_dict(self) -> dict:
        return {"type": self.kind, "advantaged": sorted(self.advantaged),
                "disadvantaged": None if self.disadvantaged is None else sorted(self.disadvantaged)}


@dataclass(frozen=True)
class ThresholdRule:
    """Numeric cut: values strictly above ``threshold`` form the upper group."""

    threshold: float
    upper_is_advantaged: bool = True
    kind = "threshold"

    def to_dict(self) -> dict:
        return {"type": self.kind, "threshold": self.threshold,
                "upper_is_advantaged": self.upper_is_advantaged}


@dataclass(frozen=True)
class MedianSplitRule:
    """Values strictly above the median of retained rows form the upper group.

    Computed after all filtering, so unlike the other rules it does not
    commute with dropping rows.
    """

    upper_is_advantaged: bool = True
    kind = "median"

    def to_dict(self) -> dict:
        return {"type": self.kind, "upper_is_advantaged": self.upper_is_advantaged}


Rule = Union[CategoryRule, ThresholdRule, MedianSplitRule]


def rule_from_dict(d: dict) -> Rule:
    d = dict(d)
    kind = d.pop("type", None)
    try:
        if kind == "category":
            dis = d.get("disadvantaged")
            return CategoryRule(frozenset(d["advantaged"]), None if dis is None else frozenset(dis))
        if kind == "threshold":
            return ThresholdRule(float(d["threshold"]), bool(d.get("upper_is_advantaged", True)))
        if kind == "median":
            return MedianSplitRule(bool(d.get("upper_is_advantaged", True)))
    except KeyError as exc:
        raise ConfigurationError(f"{kind} rule is missing field {exc.args[0]!r}") from None
    raise ConfigurationError(f"unknown binarization rule type {kind!r}")


@dataclass(frozen=True)
class AttributeSpec:
    column: str
    rule: Rule

    def to_dict(self) -> dict:
        return {"column": self.column, "rule": self.rule.to_dict()}


@dataclass(frozen=True)
class DatasetSpec:
    source: Path
    quality_column: str
    visible: AttributeSpec
    hidden: AttributeSpec
    transform: str = "identity"
    k: float = 0.2
    name: str = ""
    # True when ranking high is bad for the person (risk scores).
    higher_is_harmful: bool = False

    def __post_init__(self):
        object.__setattr__(self, "source", Path(self.source))
        if self.transform not in TRANSFORMS:
            raise ConfigurationError(f"transform must be one of {TRANSFORMS}, got {self.transform!r}")
        if not (0.0 < self.k < 1.0):
            raise ConfigurationError(f"k must lie in (0, 1), got {self.k!r}")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Union[str, Path, None] = None) -> "DatasetSpec":
        known = {"name", "source", "quality_column", "visible", "hidden", "transform", "k",
                 "higher_is_harmful"}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown dataset spec fields: {sorted(extra)}")
        for req in ("source", "quality_column", "visible", "hidden"):
            if req not in d:
                raise ConfigurationError(f"dataset spec is missing field {req!r}")
        source = Path(d["source"])
        if base_dir is not None and not source.is_absolute():
            source = Path(base_dir) / source
        return cls(
            source=source,
            quality_column=d["quality_column"],
            visible=AttributeSpec(d["visible"]["column"], rule_from_dict(d["visible"]["rule"])),
            hidden=AttributeSpec(d["hidden"]["column"], rule_from_dict(d["hidden"]["rule"])),
            transform=d.get("transform", "identity"),
            k=float(d.get("k", 0.2)),
            name=d.get("name", ""),
            higher_is_harmful=bool(d.get("higher_is_harmful", False)),
        )

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "DatasetSpec":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    def to_dict(self) -> dict:
        return {"name": self.name, "source": str(self.source), "quality_column": self.quality_column,
                "visible": self.visible.to_dict(), "hidden": self.hidden.to_dict(),
                "transform": self.transform, "k": self.k,
                "higher_is_harmful": self.higher_is_harmful}


@dataclass(frozen=True, eq=False)
class EmpiricalPopulation:
    """Binarized rows: perceived quality plus advantaged flags (True = advantaged)."""

    q_hat: np.ndarray
    visible: np.ndarray
    hidden: np.ndarray
    provenance: Optional[DatasetSpec] = None
    n_dropped: int = 0

    def __post_init__(self):
        for name, dtype in (("q_hat", np.float64), ("visible", bool), ("hidden", bool)):
            a = np.array(getattr(self, name), dtype=dtype, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (len(self.q_hat) == len(self.visible) == len(self.hidden)):
            raise ConfigurationError("q_hat, visible and hidden must have equal lengths")
        if not np.all(np.isfinite(self.q_hat)):
            raise ConfigurationError("q_hat must be finite")

    def __len__(self) -> int:
        return len(self.q_hat)

    @property
    def codes(self) -> np.ndarray:
        # Penalty indicator = disadvantaged: green <-> visible disadvantaged, star <-> hidden disadvantaged.
        return group_code(~self.visible, ~self.hidden)

    def group_sizes(self) -> dict[str, int]:
        return dict(zip(GROUPS, (int(c) for c in np.bincount(self.codes, minlength=4))))

    def with_scores(self, q_hat: np.ndarray) -> "EmpiricalPopulation":
        return EmpiricalPopulation(q_hat, self.visible, self.hidden, self.provenance, self.n_dropped)


def _is_missing(value: Optional[str]) -> bool:
    return value is None or value.strip().lower() in MISSING_TOKENS


def _to_float(value: str, column: str, line: int) -> float:
    try:
        x = float(value)
    except ValueError:
        raise SchemaError(f"column {column!r} line {line}: not a number: {value!r}") from None
    if not math.isfinite(x):
        raise SchemaError(f"column {column!r} line {line}: non-finite value {value!r}")
    return x


def _binarize_numeric(values: np.ndarray, rule: Rule) -> np.ndarray:
    if isinstance(rule, ThresholdRule):
        upper = values > rule.threshold
    else:
        upper = values > np.median(values)
    return upper if rule.upper_is_advantaged else ~upper


def load_dataset(spec: DatasetSpec) -> EmpiricalPopulation:
    """Read, filter and binarize a CSV according to ``spec``.

    Rows with a missing value in any used column, or with a category that
    the rule does not cover, are dropped and counted. Median splits are
    computed on the rows that survive.
    """
    columns = [spec.quality_column, spec.visible.column, spec.hidden.column]
    with open(spec.source, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyDataError(f"{spec.source}: no header row")
        for col in columns:
            if col not in reader.fieldnames:
                raise SchemaError(f"{spec.source}: missing column {col!r}")

        q, vis_raw, hid_raw = [], [], []
        dropped = 0
        for line, row in enumerate(reader, start=2):
            cells = [row.get(c) for c in columns]
            if any(_is_missing(c) for c in cells):
                dropped += 1
                continue
            parsed = []
            keep = True
            for attr, cell in ((spec.visible, cells[1]), (spec.hidden, cells[2])):
                if isinstance(attr.rule, CategoryRule):
                    lab = attr.rule.label(cell.strip())
                    if lab is None:
                        keep = False
                        break
                    parsed.append(lab)
                else:
                    parsed.append(_to_float(cell, attr.column, line))
            if not keep:
                dropped += 1
                continue
            q.append(_to_float(cells[0], spec.quality_column, line))
            vis_raw.append(parsed[0])
            hid_raw.append(parsed[1])

    if not q:
        raise EmptyDataError(f"{spec.source}: no rows left after filtering ({dropped} dropped)")
    q_arr = np.array(q, dtype=np.float64)
    if spec.transform == "log" and np.any(q_arr <= 0):
        raise TransformError(
            f"{spec.source}: log transform needs positive {spec.quality_column!r}, "
            f"found {int(np.sum(q_arr <= 0))} non-positive values")

    labels = []
    for attr, raw in ((spec.visible, vis_raw), (spec.hidden, hid_raw)):
        if isinstance(attr.rule, CategoryRule):
            labels.append(np.array(raw, dtype=bool))
        else:
            labels.append(_binarize_numeric(np.array(raw, dtype=np.float64), attr.rule))
    return EmpiricalPopulation(q_arr, labels[0], labels[1], provenance=spec, n_dropped=dropped)


@dataclass(frozen=True)
class PearsonResult:
    r: float
    p: float
    n: int

    def to_dict(self) -> dict:
        return {"r": self.r, "p": self.p, "n": self.n}


def pearson(x, y) -> PearsonResult:
    """Sample correlation with a two-sided t-test p-value (n - 2 dof)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInputError("x and y must be 1-D sequences of equal length")
    n = len(x)
    if n < 3:
        raise DegenerateInputError(f"need at least 3 points, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy, sxy = float(dx @ dx), float(dy @ dy), float(dx @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("zero variance input")
    # sqrt(a*a) == |a| exactly in binary floating point, so r(x, x) == 1.
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return PearsonResult(r=r, p=p, n=n)


def empirical_selections(emp: EmpiricalPopulation, k: float) -> tuple[np.ndarray, np.ndarray]:
    m = slot_count(k, len(emp))
    if m > len(emp):
        raise ConfigurationError(f"need at least {m} rows")
    blind = top_m(emp.q_hat, m)
    # Quota shares follow empirical visible-group sizes; order: advantaged first.
    quota = quota_top(emp.q_hat, emp.visible, m, values=(True, False))
    return blind, quota


def empirical_representation(emp: EmpiricalPopulation, k: float) -> tuple[RepresentationReport, RepresentationReport]:
    """Blind and visible-quota reports over the four (visible, hidden) cells."""
    if emp.visible.all() or not emp.visible.any():
        raise ConfigurationError("both visible groups must be nonempty")
    blind, quota = empirical_selections(emp, k)
    codes = emp.codes
    return report_from_codes(codes, blind), report_from_codes(codes, quota)


@dataclass(frozen=True)
class ModelFit:
    mu: float
    sigma: float
    d_visible: float
    d_hidden: float
    counts: dict[str, int]
    transform: str = "identity"

    def to_dict(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma, "d_visible": self.d_visible,
                "d_hidden": self.d_hidden, "counts": dict(self.counts), "transform": self.transform}


def transformed_quality(emp: EmpiricalPopulation) -> np.ndarray:
    transform = emp.provenance.transform if emp.provenance is not None else "identity"
    if transform == "log":
        if np.any(emp.q_hat <= 0):
            raise TransformError("log transform needs positive quality values")
        return np.log(emp.q_hat)
    return emp.q_hat


def fit_model_approximation(emp: EmpiricalPopulation) -> ModelFit:
    """Normal fit of (transformed) quality and marginal group-mean gaps.

    ``d_visible`` is mean(advantaged) - mean(disadvantaged) on the visible
    attribute, so subtracting it from the disadvantaged rows reproduces the
    marginal gap; ``d_hidden`` likewise. ``sigma`` uses ``ddof=1``.
    """
    counts = emp.group_sizes()
    empty = [g for g, c in counts.items() if c == 0]
    if empty:
        raise FitError(f"empty cells: {', '.join(f'{g} ({GROUP_LABELS[g]})' for g in empty)}")
    q = transformed_quality(emp)
    sigma = float(np.std(q, ddof=1))
    if not sigma > 0:
        raise FitError("quality has zero spread")
    return ModelFit(
        mu=float(np.mean(q)),
        sigma=sigma,
        d_visible=float(q[emp.visible].mean() - q[~emp.visible].mean()),
        d_hidden=float(q[emp.hidden].mean() - q[~emp.hidden].mean()),
        counts=counts,
        transform=emp.provenance.transform if emp.provenance is not None else "identity",
    )


@dataclass(frozen=True)
class ApproximationResult:
    reps: int
    failures: int
    mean_delta_b: dict[str, Optional[float]]
    se_delta_b: dict[str, Optional[float]]

    def to_dict(self) -> dict:
        return {"reps": self.reps, "failures": self.failures,
                "mean_delta_b": self.mean_delta_b, "se_delta_b": self.se_delta_b}


def approximation_seed(seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(int(rep),))


def simulate_approximation(fit: ModelFit, emp: EmpiricalPopulation, k: float, reps: int,
                           seed: int = 0) -> ApproximationResult:
    """Redraw quality from the fitted normal with attributes held fixed.

    Each rep draws ``q ~ N(mu, sigma)`` per row, forms
    ``q - d_visible*I - d_hidden*I`` with ``I = 1`` for disadvantaged values,
    and records the change in B per cell under a visible-attribute quota.
    """
    if reps < 1:
        raise ConfigurationError(f"reps must be >= 1, got {reps}")
    if fit.counts != emp.group_sizes():
        raise FitError("fit cell counts do not match the population")
    i_vis = (~emp.visible).astype(np.float64)
    i_hid = (~emp.hidden).astype(np.float64)
    rows = np.full((reps, 4), np.nan)
    for r in range(reps):
        rng = np.random.Generator(np.random.PCG64(approximation_seed(seed, r)))
        q = rng.normal(fit.mu, fit.sigma, len(emp))
        sim = emp.with_scores(q - fit.d_visible * i_vis - fit.d_hidden * i_hid)
        blind, quota = empirical_representation(sim, k)
        db = delta_bias(blind, quota)
        rows[r] = [np.nan if db[g] is None else db[g] for g in GROUPS]
    means, ses = {}, {}
    for j, g in enumerate(GROUPS):
        col = rows[:, j][~np.isnan(rows[:, j])]
        means[g] = float(col.mean()) if len(col) else None
        ses[g] = float(col.std(ddof=1) / math.sqrt(len(col))) if len(col) > 1 else (0.0 if len(col) else None)
    return ApproximationResult(reps=reps, failures=0, mean_delta_b=means, se_delta_b=ses)


@dataclass
class DatasetReport:
    spec: DatasetSpec
    k: float
    rows: int
    n_dropped: int
    correlation: PearsonResult
    blind: RepresentationReport
    quota: RepresentationReport
    fit: ModelFit
    approximation: ApproximationResult
    notes: list[str] = field(default_factory=list)

    @property
    def delta_b(self) -> dict[str, Optional[float]]:
        return delta_bias(self.blind, self.quota)

    def to_dict(self) -> dict:
        return {
            "dataset": self.spec.to_dict(), "k": self.k, "rows": self.rows,
            "n_dropped": self.n_dropped, "group_labels": GROUP_LABELS,
            "correlation": self.correlation.to_dict(),
            "blind": self.blind.to_dict(), "quota_on_visible": self.quota.to_dict(),
            "delta_representation_bias": self.delta_b,
            "fit": self.fit.to_dict(), "approximation": self.approximation.to_dict(),
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def csv_rows(self) -> list[dict]:
        return [{
            "group": g, "label": GROUP_LABELS[g],
            "group_size": self.blind.groups[g].size,
            "b_blind": self.blind.bias(g), "b_quota": self.quota.bias(g),
            "delta_b": self.delta_b[g],
            "approx_mean_delta_b": self.approximation.mean_delta_b[g],
            "approx_se_delta_b": self.approximation.se_delta_b[g],
        } for g in GROUPS]


def analyze_dataset(spec: DatasetSpec, k: Optional[float] = None, reps: int = 100,
                    seed: int = 0) -> DatasetReport:
    """Full pipeline: load, correlate, compare blind vs quota, fit, simulate."""
    k = spec.k if k is None else k
    emp = load_dataset(spec)
    corr = pearson(emp.visible.astype(float), emp.hidden.astype(float))
    blind, quota = empirical_representation(emp, k)
    fit = fit_model_approximation(emp)
    approx = simulate_approximation(fit, emp, k, reps, seed)
    notes = []
    if fit.d_visible < 0:
        notes.append("visible 'advantaged' group has the lower mean score in this data")
    if spec.higher_is_harmful:
        notes.append("high scores are harmful here: over-representation at the top is the "
                     "adverse outcome, so read negative delta_b as a benefit")
    return DatasetReport(spec=spec, k=k, rows=len(emp), n_dropped=emp.n_dropped, correlation=corr,
                         blind=blind, quota=quota, fit=fit, approximation=approx, notes=notes)


def write_population_csv(path: Union[str, os.PathLike], q_hat, visible_labels, hidden_labels,
                         columns=("q_hat", "color", "shape")) -> None:
    """Write rows as RFC 4180 CSV (used to materialise fixtures)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for q, v, h in zip(q_hat, visible_labels, hidden_labels):
            w.writerow([repr(float(q)) if isinstance(q, (float, np.floating)) else q, v, h])
