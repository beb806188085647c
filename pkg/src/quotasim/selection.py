"""Top-k selection, blind or with a proportional quota on one attribute.

All rankings sort by score descending and break ties by lower entity id.
The slot count is ``m = round(k * N_total)`` (half up, at least 1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import QuotaInfeasibleError, SelectionError
from .population import BiasParams, Population, round_half_up


class ScoreBasis(str, enum.Enum):
    TRUE_QUALITY = "true_quality"
    PERCEIVED_QUALITY = "perceived_quality"


class QuotaAttribute(str, enum.Enum):
    COLOR = "color"
    SHAPE = "shape"


@dataclass(frozen=True)
class SelectionRule:
    score_basis: ScoreBasis = ScoreBasis.PERCEIVED_QUALITY
    quota_attribute: Optional[QuotaAttribute] = None

    def __post_init__(self):
        object.__setattr__(self, "score_basis", ScoreBasis(self.score_basis))
        if self.quota_attribute is not None:
            object.__setattr__(self, "quota_attribute", QuotaAttribute(self.quota_attribute))

    def describe(self) -> str:
        quota = self.quota_attribute.value if self.quota_attribute else "none"
        return f"{self.score_basis.value}/quota={quota}"


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Selected entity ids, stored sorted ascending and read-only."""

    k: float
    m: int
    selected_ids: np.ndarray
    rule: SelectionRule

    def __post_init__(self):
        ids = np.sort(np.asarray(self.selected_ids, dtype=np.int64))
        ids.setflags(write=False)
        object.__setattr__(self, "selected_ids", ids)
        if len(ids) != self.m:
            raise SelectionError(f"selected {len(ids)} ids but m={self.m}")

    @property
    def id_set(self) -> frozenset[int]:
        return frozenset(int(i) for i in self.selected_ids)


def slot_count(k: float, n_total: int) -> int:
    if not (0.0 < k < 1.0):
        raise SelectionError(f"k must lie in (0, 1), got {k!r}")
    if n_total <= 0:
        raise SelectionError("cannot select from an empty population")
    return max(1, round_half_up(k * n_total))


def rank_order(scores: np.ndarray) -> np.ndarray:
    """Indices of ``scores`` from best to worst; equal scores keep index order."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


def top_m(scores: np.ndarray, m: int) -> np.ndarray:
    return rank_order(scores)[:m]


def largest_remainder(sizes: Sequence[int], m: int) -> list[int]:
    """Apportion ``m`` slots proportionally to ``sizes`` (Hamilton method).

    Exact rational arithmetic; ties in the remainder go to the earlier group.
    """
    total = sum(sizes)
    if total <= 0:
        raise SelectionError("cannot apportion over empty groups")
    quotas = [Fraction(m * s, total) for s in sizes]
    alloc = [int(q) for q in quotas]
    leftover = m - sum(alloc)
    order = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - alloc[i]), i))
    for i in order[:leftover]:
        alloc[i] += 1
    return alloc


def quota_top(scores: np.ndarray, labels: np.ndarray, m: int,
              values: Sequence = (True, False),
              sizes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Select ``m`` indices with slots split across ``values`` of ``labels``.

    ``sizes`` overrides the apportionment weights (defaults to the actual
    group sizes). Each group's slots go to its highest scorers.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    members = [np.flatnonzero(labels == v) for v in values]
    weights = [len(idx) for idx in members] if sizes is None else list(sizes)
    alloc = largest_remainder(weights, m)
    chosen = []
    for value, idx, slots in zip(values, members, alloc):
        if slots > len(idx):
            raise QuotaInfeasibleError(value, slots, len(idx))
        chosen.append(idx[rank_order(scores[idx])[:slots]])
    return np.concatenate(chosen) if chosen else np.empty(0, dtype=np.int64)


def _scores(population: Population, bias: BiasParams, basis: ScoreBasis) -> np.ndarray:
    if ScoreBasis(basis) is ScoreBasis.TRUE_QUALITY:
        return population.q
    return population.perceived(bias)


def select_top_k(population: Population, bias: BiasParams, k: float,
                 basis: ScoreBasis = ScoreBasis.PERCEIVED_QUALITY) -> SelectionResult:
    m = slot_count(k, len(population))
    ids = top_m(_scores(population, bias, basis), m)
    return SelectionResult(k=k, m=m, selected_ids=ids, rule=SelectionRule(basis))


def select_with_quota(population: Population, bias: BiasParams, k: float,
                      quota_attribute: QuotaAttribute = QuotaAttribute.COLOR,
                      basis: ScoreBasis = ScoreBasis.PERCEIVED_QUALITY) -> SelectionResult:
    """Proportional quota on one attribute, filled by within-group ranking."""
    attr = QuotaAttribute(quota_attribute)
    m = slot_count(k, len(population))
    if attr is QuotaAttribute.COLOR:
        labels, values = population.is_green, ("green", "orange")
    else:
        labels, values = population.is_star, ("star", "circle")
    try:
        ids = quota_top(_scores(population, bias, basis), labels, m)
    except QuotaInfeasibleError as exc:
        raise QuotaInfeasibleError(values[0] if exc.group else values[1],
                                   exc.allocated, exc.available) from None
    return SelectionResult(k=k, m=m, selected_ids=ids, rule=SelectionRule(basis, attr))


def select(population: Population, bias: BiasParams, k: float, rule: SelectionRule) -> SelectionResult:
    if rule.quota_attribute is None:
        return select_top_k(population, bias, k, rule.score_basis)
    return select_with_quota(population, bias, k, rule.quota_attribute, rule.score_basis)
