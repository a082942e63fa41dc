"""Sampling-based estimates against exact oracles and closed forms."""

import math

import numpy as np
import pytest

from conftest import parsed, scenario_text
from dcplan import (
    InferenceError,
    estimate_query,
    exact_query,
    parse_evidence,
    parse_formula_text,
)

f = parse_formula_text


def agreement_band(p: float, n: int) -> float:
    return 3.0 * math.sqrt(p * (1.0 - p) / n) + 0.003


def test_estimate_matches_exact_on_coin_program():
    prog = parsed("0.6::a.\n0.3::b.\nc <- a, b.")
    p = exact_query(prog, f("c"))
    for method in ("scalar", "tabular"):
        r = estimate_query(prog, f("c"), n=20_000, rng=1, method=method)
        assert abs(r.estimate - p) <= agreement_band(p, r.n_samples), method


def test_routes_share_the_public_contract():
    prog = parsed("0.5::a.\nb <- a.")
    scalar = estimate_query(prog, f("b"), n=5_000, rng=2, method="scalar")
    tab = estimate_query(prog, f("b"), n=5_000, rng=2, method="tabular")
    for r in (scalar, tab):
        assert r.n_samples == 5_000
        assert r.effective_sample_size == pytest.approx(5_000.0)
        assert 0.0 <= r.estimate <= 1.0
    assert abs(scalar.estimate - tab.estimate) <= agreement_band(0.5, 5_000) * 2


def test_tabular_route_rejects_unsupported_programs():
    urn = parsed(scenario_text("urn.dcl"))
    with pytest.raises(InferenceError, match="fragment"):
        estimate_query(urn, f("~=(n) >= 1"), n=10, method="tabular")
    coin = parsed("0.5::a.")
    ev = parse_evidence(["a=true"])
    with pytest.raises(InferenceError, match="fragment"):
        estimate_query(coin, f("a"), ev, n=10, method="tabular")


def test_poisson_tail_against_closed_form():
    urn = parsed(scenario_text("urn.dcl"))
    r = estimate_query(urn, f("~=(n) >= 1"), n=20_000, rng=5)
    truth = 1.0 - math.exp(-6.0)
    assert abs(r.estimate - truth) <= agreement_band(truth, r.n_samples)


def test_evidence_clamp_matches_exact_conditional():
    prog = parsed("0.6::a.\n0.3::b.\nc <- a, b.")
    ev = parse_evidence(["c=true"])
    truth = exact_query(prog, f("b"), ev)
    r = estimate_query(prog, f("b"), ev, n=30_000, rng=7)
    assert truth == 1.0
    assert abs(r.estimate - truth) <= agreement_band(0.5, int(r.effective_sample_size))
    assert r.effective_sample_size < r.n_samples


def test_rv_evidence_clamps_the_draw():
    prog = parsed(scenario_text("table_exists.dcl"))
    ev = parse_evidence(["which=b1"])
    r = estimate_query(prog, f("onTable(b2)"), ev, n=4_000, rng=3)
    assert r.estimate == 0.0
    r1 = estimate_query(prog, f("onTable(b1)"), ev, n=20_000, rng=3)
    truth = exact_query(prog, f("onTable(b1)"), ev)
    assert abs(r1.estimate - truth) <= agreement_band(truth, r1.n_samples)


def test_unit_weights_without_evidence():
    prog = parsed("0.4::a.")
    r = estimate_query(prog, f("a"), n=2_000, rng=11, method="scalar")
    assert r.effective_sample_size == pytest.approx(2_000.0)
    assert r.stderr <= 0.5 / math.sqrt(2_000)


def test_impossible_evidence_raises():
    prog = parsed("0.6::a.\nb <- a.")
    ev = parse_evidence(["a=true", "b=false"])
    with pytest.raises(InferenceError, match="zero"):
        estimate_query(prog, f("a"), ev, n=200, rng=0)


def test_same_seed_reproduces_estimates():
    urn = parsed(scenario_text("urn.dcl"))
    a = estimate_query(urn, f("~=(n) >= 4"), n=3_000, rng=13)
    b = estimate_query(urn, f("~=(n) >= 4"), n=3_000, rng=13)
    assert a == b
    c = estimate_query(urn, f("~=(n) >= 4"), n=3_000, rng=14)
    assert c.estimate != a.estimate


def test_generator_rng_accepted():
    prog = parsed("0.5::a.")
    r = estimate_query(prog, f("a"), n=500, rng=np.random.default_rng(21))
    assert 0.3 <= r.estimate <= 0.7


def test_single_sample_estimate_is_an_indicator():
    prog = parsed("0.5::a.")
    for seed in range(6):
        r = estimate_query(prog, f("a"), n=1, rng=seed, method="scalar")
        assert r.estimate in (0.0, 1.0)


def test_temporal_estimate_agrees_with_enumeration():
    prog = parsed(scenario_text("line_stoch.dcl"))
    q = f("at(0, 2)")
    truth = exact_query(prog, q, horizon=2)
    r = estimate_query(prog, q, n=10_000, horizon=2, rng=19)
    assert abs(r.estimate - truth) <= agreement_band(truth, r.n_samples)
