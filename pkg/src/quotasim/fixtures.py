"""Synthetic stand-ins for the four real datasets, and model-to-CSV export.

The real data are not redistributed. Each fixture reproduces the published
shape: retained row count, the sign and size of the correlation between the
two binary attributes, the advantaged direction of each attribute, and a
handful of rows that the loader must drop. Scores are made up.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .datasets import AttributeSpec, CategoryRule, DatasetSpec
from .population import BiasParams, Population

DATA_DIR = Path(__file__).parent / "data"


def cell_counts(n: int, p_visible: float, p_hidden: float, phi: float) -> dict[tuple[bool, bool], int]:
    """Counts of (visible advantaged, hidden advantaged) cells with correlation ``phi``."""
    both = p_visible * p_hidden + phi * math.sqrt(
        p_visible * (1 - p_visible) * p_hidden * (1 - p_hidden))
    n_vis, n_hid, n_both = round(p_visible * n), round(p_hidden * n), round(both * n)
    counts = {
        (True, True): n_both,
        (True, False): n_vis - n_both,
        (False, True): n_hid - n_both,
    }
    counts[(False, False)] = n - sum(counts.values())
    if min(counts.values()) <= 0:
        raise ValueError(f"infeasible cell counts {counts}")
    return counts


def _attributes(rng, n, p_visible, p_hidden, phi):
    counts = cell_counts(n, p_visible, p_hidden, phi)
    vis = np.concatenate([np.full(c, v) for (v, _), c in counts.items()])
    hid = np.concatenate([np.full(c, h) for (_, h), c in counts.items()])
    order = rng.permutation(n)
    return vis[order], hid[order]


def _write(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)


@dataclass(frozen=True)
class Fixture:
    name: str
    rows: int
    phi: float
    build: Callable[[Path], None]
    spec: dict

    @property
    def csv_name(self) -> str:
        return f"{self.name}.csv"


def _trec(path: Path) -> None:
    rng = np.random.default_rng(2751)
    n = 2751
    n_high = n // 2
    large, high = _attributes(rng, n, 0.2, n_high / n, 0.10)
    # Large-city students score lower within SES strata here, so small cities
    # lead in aggregate despite the positive city/SES correlation.
    pisa = 480 + 60 * high - 20 * large + rng.normal(0, 90, n)
    # ESCS is binarized by median split: high-SES rows get distinct positive
    # values, the rest non-positive ones, so the split recovers `high` exactly.
    escs = np.where(high, rng.uniform(0.001, 2.5, n), -rng.uniform(0.0, 2.5, n))
    other = np.array(["city", "town", "village"])
    settlement = np.where(large, "large_city", other[rng.integers(0, 3, n)])
    rows = [[i, f"{p:.1f}", s, f"{e:.6f}"] for i, (p, s, e) in enumerate(zip(pisa, settlement, escs))]
    for j in range(49):
        rows.insert(int(rng.integers(0, len(rows))),
                    [n + j, "" if j % 2 else f"{rng.normal(480, 90):.1f}", "town", "" if j % 2 == 0 else "0.5"])
    _write(path, ["student_id", "pisa_reading", "settlement", "escs"], rows)


def _wages(path: Path) -> None:
    rng = np.random.default_rng(5779)
    n = 5779
    man, full = _attributes(rng, n, 0.6, 0.65, 0.62)
    rate = np.exp(3.3 + 0.15 * man + 0.45 * full + rng.normal(0, 0.25, n))
    rows = [[i, "M" if m else "F", "F" if f else "P", f"{r:.2f}"]
            for i, (m, f, r) in enumerate(zip(man, full, rate))]
    for j in range(21):
        rows.insert(int(rng.integers(0, len(rows))), [n + j, "", "F", "35.00"])
    _write(path, ["employee_id", "gender", "full_or_part_time", "hourly_rate"], rows)


def _citations(path: Path) -> None:
    rng = np.random.default_rng(80210)
    n = 80210
    male, usa = _attributes(rng, n, 0.75, 0.35, -0.04)
    cites = np.ceil(np.exp(6.0 + 0.3 * male + 0.3 * usa + rng.normal(0, 1.3, n))).astype(int)
    others = np.array(["gbr", "deu", "fra", "jpn", "chn", "ita", "can", "aus"])
    country = np.where(usa, "usa", others[rng.integers(0, len(others), n)])
    rows = [[i, c, "male" if m else "female", k]
            for i, (c, m, k) in enumerate(zip(cites, male, country))]
    for j in range(790):
        rows.insert(int(rng.integers(0, len(rows))),
                    [n + j, int(rng.integers(1, 5000)), "unknown", "usa" if j % 3 == 0 else "gbr"])
    _write(path, ["author_id", "nc9617_ns", "gender", "cntry"], rows)


def _compas(path: Path) -> None:
    rng = np.random.default_rng(10000)
    n = 10000
    aa, male = _attributes(rng, n, 0.55, 0.78, 0.05)
    score = -2.6 + 0.25 * aa + 0.3 * male + rng.normal(0, 0.7, n)
    non_aa = np.array(["Caucasian", "Asian"])
    ethnic = np.where(aa, np.where(rng.random(n) < 0.9, "African-American", "African-Am"),
                      non_aa[(rng.random(n) < 0.03).astype(int)])
    rows = [[i, f"{s:.2f}", e, "Male" if m else "Female"]
            for i, (s, e, m) in enumerate(zip(score, ethnic, male))]
    for j in range(300):
        rows.insert(int(rng.integers(0, len(rows))),
                    [n + j, f"{rng.normal(-2.4, 0.7):.2f}", "Hispanic" if j % 2 else "Other",
                     "Male" if j % 3 else "Female"])
    _write(path, ["person_id", "raw_score", "ethnic_code", "sex_code"], rows)


FIXTURES = {
    "trec": Fixture("trec", 2751, 0.10, _trec, {
        "name": "trec", "source": "trec.csv", "quality_column": "pisa_reading",
        "visible": {"column": "settlement", "rule": {"type": "category", "advantaged": ["large_city"],
                                                     "disadvantaged": ["city", "town", "village"]}},
        "hidden": {"column": "escs", "rule": {"type": "median", "upper_is_advantaged": True}},
        "transform": "identity", "k": 0.2}),
    "wages": Fixture("wages", 5779, 0.62, _wages, {
        "name": "wages", "source": "wages.csv", "quality_column": "hourly_rate",
        "visible": {"column": "gender", "rule": {"type": "category", "advantaged": ["M"], "disadvantaged": ["F"]}},
        "hidden": {"column": "full_or_part_time",
                   "rule": {"type": "category", "advantaged": ["F"], "disadvantaged": ["P"]}},
        "transform": "identity", "k": 0.2}),
    "citations": Fixture("citations", 80210, -0.04, _citations, {
        "name": "citations", "source": "citations.csv", "quality_column": "nc9617_ns",
        "visible": {"column": "gender", "rule": {"type": "category", "advantaged": ["male"],
                                                 "disadvantaged": ["female"]}},
        "hidden": {"column": "cntry", "rule": {"type": "category", "advantaged": ["usa"], "disadvantaged": None}},
        "transform": "log", "k": 0.2}),
    "compas": Fixture("compas", 10000, 0.05, _compas, {
        "name": "compas", "source": "compas.csv", "quality_column": "raw_score",
        "visible": {"column": "ethnic_code", "rule": {"type": "category",
                                                      "advantaged": ["African-American", "African-Am"],
                                                      "disadvantaged": ["Asian", "Caucasian"]}},
        "hidden": {"column": "sex_code", "rule": {"type": "category", "advantaged": ["Male"],
                                                  "disadvantaged": ["Female"]}},
        "transform": "identity", "k": 0.2, "higher_is_harmful": True}),
}


def write_fixture(name: str, directory: Union[str, Path] = DATA_DIR) -> Path:
    """Materialise fixture ``name`` (CSV plus spec JSON); returns the spec path."""
    fx = FIXTURES[name]
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fx.build(directory / fx.csv_name)
    spec_path = directory / f"{name}.json"
    spec_path.write_text(json.dumps(fx.spec, indent=2) + "\n", encoding="utf-8")
    return spec_path


def fixture_spec(name: str) -> DatasetSpec:
    """Spec of a bundled fixture, pointing at the packaged CSV."""
    return DatasetSpec.from_json(DATA_DIR / f"{name}.json")


def model_spec(source: Union[str, Path], k: float = 0.2) -> DatasetSpec:
    """Spec for a CSV written by :func:`population_to_csv`."""
    return DatasetSpec(
        source=Path(source), quality_column="q_hat",
        visible=AttributeSpec("color", CategoryRule(frozenset({"orange"}), frozenset({"green"}))),
        hidden=AttributeSpec("shape", CategoryRule(frozenset({"circle"}), frozenset({"star"}))),
        k=k, name="model")


def population_to_csv(population: Population, bias: BiasParams, path: Union[str, Path]) -> Path:
    """Write a synthetic population with its perceived scores as CSV.

    Scores use ``repr`` so they survive the round trip bit for bit.
    """
    q_hat = population.perceived(bias)
    rows = [[i, repr(float(s)), "green" if g else "orange", "star" if st else "circle", repr(float(q))]
            for i, (s, g, st, q) in enumerate(zip(q_hat, population.is_green, population.is_star, population.q))]
    _write(Path(path), ["id", "q_hat", "color", "shape", "q"], rows)
    return Path(path)


if __name__ == "__main__":
    for fixture in FIXTURES:
        print(write_fixture(fixture))
