import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_population
from quotasim.errors import IntegrityError, SelectionError
from quotasim.metrics import fairness, report_from_codes, representation_bias
from quotasim.population import GROUPS, BiasParams, PopulationConfig, generate_population
from quotasim.selection import (QuotaAttribute, ScoreBasis, SelectionResult, SelectionRule,
                                quota_top, select_top_k, select_with_quota, top_m)


def test_hand_built_bias():
    # green_star has 5 members (ids 0-4) and takes both slots.
    q = [3.0, 2.5, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
    pop = make_population(q, "gggggggooo", "ssssscccss")
    rep = representation_bias(pop, select_top_k(pop, BiasParams(), 0.2))
    gs = rep.groups["green_star"]
    assert (gs.size, gs.selected) == (5, 2)
    assert gs.rate == pytest.approx(0.4)
    assert rep.k_effective == pytest.approx(0.2)
    assert gs.bias == pytest.approx(1.0)
    for g in ("green_circle", "orange_star", "orange_circle"):
        assert rep.bias(g) == -1.0


def test_empty_group_marker():
    pop = make_population([1.0, 0.5, 0.2, 0.1], "ggoo", "sssc")
    rep = representation_bias(pop, select_top_k(pop, BiasParams(), 0.5))
    assert rep.groups["green_circle"].size == 0
    assert rep.bias("green_circle") is None
    assert json.loads(json.dumps(rep.to_dict()))["groups"]["green_circle"]["representation_bias"] is None
    assert rep.parity_identity() == pytest.approx(1.0, abs=1e-12)


def test_unbiased_large_population_near_zero():
    pop = generate_population(PopulationConfig(n=10_000, f=0.2, seed=11))
    rep = representation_bias(pop, select_top_k(pop, BiasParams(), 0.2))
    assert all(abs(rep.bias(g)) < 0.1 for g in GROUPS)


def test_integrity_errors(ten):
    rule = SelectionRule()
    with pytest.raises(IntegrityError):
        representation_bias(ten, SelectionResult(0.2, 2, np.array([0, 10]), rule))
    with pytest.raises(IntegrityError):
        representation_bias(ten, SelectionResult(0.2, 2, np.array([3, 3]), rule))


def test_fairness_hand_built():
    # Star penalty pushes id1 (q=1.0) below id2 (q=0.5).
    q = [2.0, 1.0, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0, -0.1, -0.2]
    pop = make_population(q, "gggggooooo", "cscccccccc")
    biased = select_top_k(pop, BiasParams(0.0, 1.0), 0.2)
    assert biased.id_set == {0, 2}
    assert fairness(pop, biased, 0.2).f_k == -0.25


def test_fairness_zero_for_true_quality(ten):
    sel = select_top_k(ten, BiasParams(1, 1), 0.3, ScoreBasis.TRUE_QUALITY)
    assert fairness(ten, sel, 0.3).f_k == 0.0


def test_fairness_mismatched_m(ten):
    sel = select_top_k(ten, BiasParams(), 0.2)
    with pytest.raises(SelectionError):
        fairness(ten, sel, 0.5)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), dc=st.floats(-3, 3), ds=st.floats(-3, 3),
       k=st.sampled_from([0.1, 0.2, 0.5]), quota=st.sampled_from([None, "color", "shape"]))
def test_identity_and_fk_bound(seed, dc, ds, k, quota):
    pop = generate_population(PopulationConfig(n=200, f=0.3, seed=seed))
    bias = BiasParams(dc, ds)
    sel = select_top_k(pop, bias, k) if quota is None else select_with_quota(pop, bias, k, quota)
    rep = representation_bias(pop, sel)
    assert abs(rep.parity_identity() - 1.0) <= 1e-12
    assert sum(s.selected for s in rep.groups.values()) == sel.m
    assert all(s.bias >= -1 for s in rep.groups.values())
    assert all((s.bias == -1) == (s.selected == 0) for s in rep.groups.values())
    assert fairness(pop, sel, k).f_k <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), scale=st.floats(0.1, 10), shift=st.floats(-5, 5),
       quota=st.booleans())
def test_report_invariant_under_monotone_transform(seed, scale, shift, quota):
    pop = generate_population(PopulationConfig(n=150, f=0.25, seed=seed))
    s = pop.perceived(BiasParams(-0.5, 1.0))
    t = np.exp(scale * s) + shift  # strictly increasing
    pick = (lambda x: quota_top(x, pop.is_green, 60)) if quota else (lambda x: top_m(x, 60))
    a, b = report_from_codes(pop.codes, pick(s)), report_from_codes(pop.codes, pick(t))
    assert a == b
