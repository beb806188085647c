"""Representation bias per subgroup and selection fairness.

Representation bias of group ``g`` is ``B_g = p_g / k_eff - 1`` with
``p_g = selected_g / N_g`` and ``k_eff = m / N_total``. ``B_g = 0`` is
proportional representation, ``-1`` full exclusion. Empty groups carry
``bias = None`` instead of NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IntegrityError, SelectionError
from .population import GROUPS, Population
from .selection import SelectionResult, SelectionRule, slot_count, top_m


@dataclass(frozen=True)
class GroupStats:
    size: int
    selected: int
    rate: Optional[float]
    bias: Optional[float]

    def to_dict(self) -> dict:
        return {"group_size": self.size, "selected_count": self.selected,
                "selection_rate": self.rate, "representation_bias": self.bias}


@dataclass(frozen=True)
class RepresentationReport:
    m: int
    n_total: int
    groups: dict[str, GroupStats]

    @property
    def k_effective(self) -> float:
        return self.m / self.n_total

    def bias(self, group: str) -> Optional[float]:
        return self.groups[group].bias

    def parity_identity(self) -> float:
        """``sum_g (N_g/N_total)(B_g + 1)``; equals 1 for any valid report."""
        return sum(s.size / self.n_total * (s.bias + 1.0)
                   for s in self.groups.values() if s.bias is not None)

    def attribute_bias(self, attribute: str) -> dict[str, Optional[float]]:
        """Representation bias of the two values of ``color`` or ``shape``."""
        if attribute == "color":
            parts = {"green": ("green_star", "green_circle"),
                     "orange": ("orange_star", "orange_circle")}
        elif attribute == "shape":
            parts = {"star": ("green_star", "orange_star"),
                     "circle": ("green_circle", "orange_circle")}
        else:
            raise ValueError(f"unknown attribute {attribute!r}")
        out = {}
        for value, members in parts.items():
            size = sum(self.groups[g].size for g in members)
            sel = sum(self.groups[g].selected for g in members)
            out[value] = _bias(sel, size, self.k_effective)[1]
        return out

    def attribute_counts(self, attribute: str) -> dict[str, int]:
        idx = {"color": {"green": (0, 1), "orange": (2, 3)},
               "shape": {"star": (0, 2), "circle": (1, 3)}}[attribute]
        return {v: sum(self.groups[GROUPS[i]].selected for i in ii) for v, ii in idx.items()}

    def to_dict(self) -> dict:
        return {"m": self.m, "n_total": self.n_total, "k_effective": self.k_effective,
                "groups": {g: s.to_dict() for g, s in self.groups.items()}}


@dataclass(frozen=True)
class FairnessReport:
    f_k: float
    k: float
    rule: SelectionRule
    mean_quality: float
    optimal_quality: float

    def to_dict(self) -> dict:
        return {"F_k": self.f_k, "k": self.k, "rule": self.rule.describe(),
                "mean_quality": self.mean_quality, "optimal_quality": self.optimal_quality}


def _bias(selected: int, size: int, k_eff: float):
    if size == 0:
        return None, None
    rate = selected / size
    return rate, rate / k_eff - 1.0


def report_from_codes(codes: np.ndarray, selected: np.ndarray) -> RepresentationReport:
    """Build a report from per-entity group codes and selected indices."""
    codes = np.asarray(codes)
    sizes = np.bincount(codes, minlength=4)
    chosen = np.bincount(codes[np.asarray(selected, dtype=np.int64)], minlength=4)
    m, n_total = int(chosen.sum()), int(sizes.sum())
    k_eff = m / n_total
    groups = {}
    for g, size, sel in zip(GROUPS, sizes, chosen):
        rate, bias = _bias(int(sel), int(size), k_eff)
        groups[g] = GroupStats(int(size), int(sel), rate, bias)
    return RepresentationReport(m=m, n_total=n_total, groups=groups)


def representation_bias(population: Population, selection: SelectionResult) -> RepresentationReport:
    ids = selection.selected_ids
    if len(ids) and (ids[0] < 0 or ids[-1] >= len(population)):
        raise IntegrityError("selection references ids outside the population")
    if len(np.unique(ids)) != len(ids):
        raise IntegrityError("selection contains duplicate ids")
    return report_from_codes(population.codes, ids)


def delta_bias(before: RepresentationReport, after: RepresentationReport) -> dict[str, Optional[float]]:
    out = {}
    for g in GROUPS:
        b0, b1 = before.bias(g), after.bias(g)
        out[g] = None if b0 is None or b1 is None else b1 - b0
    return out


def selection_quality(q: np.ndarray, ids: np.ndarray) -> float:
    # Summing over sorted ids makes identical sets give bit-identical means.
    return float(np.mean(q[np.sort(ids)]))


def fairness(population: Population, selection: SelectionResult, k: float) -> FairnessReport:
    m = slot_count(k, len(population))
    if selection.m != m:
        raise SelectionError(f"selection has m={selection.m}, unbiased benchmark for k={k} has m={m}")
    q = population.q
    optimal = selection_quality(q, top_m(q, m))
    mean_q = selection_quality(q, selection.selected_ids)
    return FairnessReport(f_k=mean_q - optimal, k=k, rule=selection.rule,
                          mean_quality=mean_q, optimal_quality=optimal)
