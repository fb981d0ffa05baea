import pytest
from hypothesis import given
from hypothesis import strategies as st

from liqtox.errors import DomainError, NoDebt, WipedOut
from liqtox.lending import (
    IncentivePolicy,
    Position,
    RiskParams,
    health,
    incentive,
    is_liquidatable,
    ltv,
)


@pytest.mark.parametrize(
    "s, price, q, expected",
    [(100.0, 1.0, 50.0, 0.5), (100.0, 2.0, 100.0, 0.5), (100.0, 1.0, 0.0, 0.0)],
)
def test_ltv(s, price, q, expected):
    assert ltv(Position(s, q, price)) == expected


def test_ltv_wiped_out():
    with pytest.raises(WipedOut):
        ltv(Position(0.0, 10.0, 1.0))


@pytest.mark.parametrize(
    "c, q, expected",
    [(100.0, 80.0, 1.0), (100.0, 100.0, 0.8), (200.0, 80.0, 2.0)],
)
def test_health(c, q, expected):
    assert health(Position(c, q, 1.0), RiskParams(0.8)) == pytest.approx(expected, rel=1e-15)


def test_health_exactly_one_on_boundary():
    assert health(Position(100.0, 80.0, 1.0), RiskParams(0.8)) == 1.0
    assert not is_liquidatable(Position(100.0, 80.0, 1.0), RiskParams(0.8))


def test_health_no_debt():
    with pytest.raises(NoDebt):
        health(Position(1.0, 0.0, 1.0), RiskParams(0.5))


@pytest.mark.parametrize("v", [0.0, 1.0, -0.1, 1.5])
def test_risk_params_validation(v):
    with pytest.raises(DomainError):
        RiskParams(v)


def test_position_validation():
    with pytest.raises(DomainError):
        Position(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        Position(1.0, 1.0, 0.0)


def test_incentive_examples():
    assert incentive(IncentivePolicy.health_linked(0.1), 1.0) == 0.0
    assert incentive(IncentivePolicy.health_linked(0.1), 0.5) == pytest.approx(0.05, rel=1e-15)
    assert incentive(IncentivePolicy.constant(0.1), 0.2) == 0.1


def test_incentive_clamps():
    policy = IncentivePolicy.health_linked(0.1)
    assert incentive(policy, 1.7) == 0.0
    assert incentive(policy, 0.0) == 0.1


@given(
    s=st.floats(1e-3, 1e6),
    q=st.floats(1e-3, 1e6),
    price=st.floats(1e-3, 1e3),
    v=st.floats(0.01, 0.99),
)
def test_health_times_ltv_is_v(s, q, price, v):
    position = Position(s, q, price)
    assert health(position, RiskParams(v)) * ltv(position) == pytest.approx(v, rel=1e-12)


@given(i_max=st.floats(0.0, 1.0), h1=st.floats(0.0, 3.0), h2=st.floats(0.0, 3.0))
def test_health_linked_monotone_and_bounded(i_max, h1, h2):
    policy = IncentivePolicy.health_linked(i_max)
    lo, hi = sorted((h1, h2))
    assert 0.0 <= incentive(policy, hi) <= incentive(policy, lo) <= i_max
