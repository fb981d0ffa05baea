import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from liqtox.errors import NotLiquidatable
from liqtox.lending import IncentivePolicy, Position, RiskParams
from liqtox.toxicity import (
    boundary_safe_lltv,
    classify,
    frontier_constant_bonus,
    frontier_dynamic_bonus,
    health_differential,
)

lams = st.floats(1.0, 5.0)
bonuses = st.floats(0.0, 0.5)
lltvs = st.floats(0.01, 0.99)


def test_health_differential_zero_on_frontier():
    assert health_differential(100.0, 100.0, 0.8, 0.0, 1.0) == 0.0


def test_health_differential_signs():
    # c/q = 1.0526 < 1.05 * 1.2 = 1.26
    toxic = health_differential(100.0, 95.0, 0.8, 0.05, 1.2)
    assert toxic == pytest.approx((0.8 / 95.0) * (100.0 / 95.0 - 1.26), rel=1e-14)
    assert toxic < 0.0
    assert health_differential(100.0, 50.0, 0.8, 0.05, 1.2) > 0.0


@pytest.mark.parametrize(
    "i, lam, expected",
    [(0.1, 1.0, 1.0 / 1.1), (0.0, 1.0, 1.0), (0.05, 1.2, 1.0 / 1.26)],
)
def test_frontier_constant(i, lam, expected):
    assert frontier_constant_bonus(i, lam) == pytest.approx(expected, rel=1e-15)


def test_frontier_constant_rounded_values():
    assert frontier_constant_bonus(0.1, 1.0) == pytest.approx(0.909091, abs=1e-6)
    assert frontier_constant_bonus(0.05, 1.2) == pytest.approx(0.793651, abs=1e-6)


def test_frontier_dynamic_examples():
    assert frontier_dynamic_bonus(0.0, 0.37, 1.3) == pytest.approx(1.0 / 1.3, rel=1e-15)
    assert frontier_dynamic_bonus(0.1, 0.8, 1.25) == pytest.approx(0.8, rel=1e-15)
    assert frontier_dynamic_bonus(0.1, 0.8, 1.0) == pytest.approx(1.08 / 1.1, rel=1e-15)
    assert frontier_dynamic_bonus(0.1, 0.8, 1.0) == pytest.approx(0.981818, abs=1e-6)


@pytest.mark.parametrize("lam, expected", [(1.0, 1.0), (1.25, 0.8), (1.2, 1.0 / 1.2)])
def test_boundary_safe_lltv(lam, expected):
    assert boundary_safe_lltv(lam) == pytest.approx(expected, rel=1e-15)


def test_classify_constant_toxic():
    verdict = classify(Position(100.0, 95.0, 1.0), RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), 1.2)
    assert verdict.toxic
    assert verdict.threshold_ltv == pytest.approx(0.793651, abs=1e-6)


def test_classify_health_linked_boundary():
    verdict = classify(Position(100.0, 80.0, 1.0), RiskParams(0.8, 0.1), IncentivePolicy.health_linked(0.1), 1.25)
    assert verdict.incentive == 0.0
    assert verdict.dh_per_da == 0.0
    assert not verdict.toxic
    assert verdict.on_frontier


def test_classify_health_linked_benign():
    verdict = classify(Position(100.0, 90.0, 1.0), RiskParams(0.8, 0.1), IncentivePolicy.health_linked(0.1), 1.0)
    assert not verdict.toxic
    assert verdict.dh_per_da > 0.0
    assert verdict.threshold_ltv == pytest.approx(0.981818, abs=1e-6)


def test_classify_rejects_healthy():
    with pytest.raises(NotLiquidatable):
        classify(Position(100.0, 50.0, 1.0), RiskParams(0.8), IncentivePolicy.constant(0.05), 1.2)


def test_classify_tolerance_band():
    position = Position(100.0, 80.0, 1.0)
    params = RiskParams(0.75)
    policy = IncentivePolicy.constant(0.0)
    # ltv 0.8 vs threshold 1/1.26 = 0.79365
    assert classify(position, params, policy, 1.26).toxic
    assert not classify(position, params, policy, 1.26, tol=0.01).toxic


@settings(max_examples=500)
@given(
    c=st.floats(1.0, 1e4),
    ltv_value=st.floats(0.05, 2.0),
    v=lltvs,
    i_max=bonuses,
    lam=lams,
    linked=st.booleans(),
)
def test_sign_equivalence(c, ltv_value, v, i_max, lam, linked):
    q = ltv_value * c
    assume(v * c / q <= 1.0)
    policy = IncentivePolicy.health_linked(i_max) if linked else IncentivePolicy.constant(i_max)
    verdict = classify(Position(c, q, 1.0), RiskParams(v, i_max), policy, lam)
    if abs(verdict.ltv - verdict.threshold_ltv) <= 1e-12:
        return
    assert verdict.toxic == (verdict.dh_per_da < 0.0)
    assert verdict.toxic == (verdict.ltv > verdict.threshold_ltv)


@given(i_max=bonuses, lam=lams)
def test_dynamic_reduces_to_constant_as_v_vanishes(i_max, lam):
    assert frontier_dynamic_bonus(i_max, 1e-9, lam) == pytest.approx(frontier_constant_bonus(i_max, lam), rel=1e-7)


@settings(max_examples=500)
@given(i_max=bonuses, v=lltvs, lam=lams)
def test_boundary_consistency(i_max, v, lam):
    assume(abs(v * lam - 1.0) > 1e-12)
    toxic_at_boundary = v > frontier_dynamic_bonus(i_max, v, lam)
    assert toxic_at_boundary == (v * lam > 1.0)
    assert toxic_at_boundary == (v > boundary_safe_lltv(lam))


@given(i=bonuses)
def test_infinite_depth_recovery(i):
    assert frontier_constant_bonus(i, 1.0) == 1.0 / (1.0 + i)


@given(i=bonuses, di=st.floats(1e-6, 0.5), lam=lams, dlam=st.floats(1e-6, 1.0), v=lltvs)
def test_frontiers_strictly_decreasing(i, di, lam, dlam, v):
    assert frontier_constant_bonus(i + di, lam) < frontier_constant_bonus(i, lam)
    assert frontier_constant_bonus(i, lam + dlam) < frontier_constant_bonus(i, lam)
    assert boundary_safe_lltv(lam + dlam) < boundary_safe_lltv(lam)
    assert frontier_dynamic_bonus(i, v, lam + dlam) < frontier_dynamic_bonus(i, v, lam)
