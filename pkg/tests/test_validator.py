"""Static checks: binding, stratification, temporal propagation, rv usage."""

import pytest

from conftest import parsed, scenario_text
from dcplan import ValidationError, validate, validated_info


def diags_of(text):
    info, diags = validate(parsed(text))
    return [d.message for d in diags if d.severity == "error"]


def test_clean_program_has_no_errors():
    assert diags_of("0.5::a.\nb <- a.") == []


def test_scenarios_validate(scenario):
    for name in (
        "line_det.dcl",
        "line_stoch.dcl",
        "kalman.dcl",
        "family.dcl",
        "clear_table.dcl",
        "line4.dcl",
        "table.dcl",
        "table_exists.dcl",
        "urn.dcl",
    ):
        info, diags = validate(parsed(scenario(name)))
        assert not [d for d in diags if d.severity == "error"], name


def test_unbound_head_variable():
    msgs = diags_of("p(X) <- q.")
    assert any("head p(X)" in m for m in msgs)


def test_unbound_negated_variable():
    msgs = diags_of("p <- not q(X).")
    assert any("negated literal" in m for m in msgs)


def test_within_layer_negative_cycle():
    msgs = diags_of("p(0).\na <- p(X), not b.\nb <- p(X), not a.")
    assert any("negative cycle" in m for m in msgs)


def test_random_variable_used_as_atom():
    msgs = diags_of("n ~ poisson(6).\nq <- n.")
    assert any("random variable" in m for m in msgs)


def test_static_head_over_temporal_body():
    msgs = diags_of("q <- at(P, T).\nat(0, 0).\nat(P, T + 1) <- at(P, T).")
    assert any("static predicate" in m and "temporal" in m for m in msgs)


def test_between_bounds_must_be_bound():
    msgs = diags_of("p(X) <- between(1, N, X).")
    assert any("between/3" in m for m in msgs)


def test_reserved_predicate_arity():
    msgs = diags_of("poss(a, b, 0).")
    assert any("poss" in m and "arity 2" in m for m in msgs)


def test_temporal_inference_from_action_and_head():
    info, diags = validate(parsed(scenario_text("line_det.dcl")))
    assert not [d for d in diags if d.severity == "error"]
    assert info.is_temporal(("at", 2))
    assert info.is_temporal(("poss", 2))
    assert info.is_temporal(("reward", 2))
    assert info.is_temporal(("arrive", 1))


def test_validated_info_raises_with_diagnostics():
    bad = parsed("p(X) <- q.")
    with pytest.raises(ValidationError) as exc:
        validated_info(bad)
    assert exc.value.diagnostics
    assert all(d.severity == "error" for d in exc.value.diagnostics)
