import pytest

from liqtox.analysis import (
    boundary_audit,
    convergence_study,
    effective_frontier,
    finite_difference_dh,
    locate_frontier_empirical,
    market_for_depth,
    market_for_penalty,
)
from liqtox.errors import NoFrontierInRange
from liqtox.lending import IncentivePolicy, Position, RiskParams
from liqtox.market_impact import CpAmmPool, LinearImpactModel, penalty_factor


def test_oracle_deep_pool_zero_bonus():
    market = market_for_depth(1e12, 100.0)
    position = Position.at_ltv(0.5, 100.0)
    fd = finite_difference_dh(position, RiskParams(0.8), IncentivePolicy.constant(0.0), market, 1e-6 * position.q)
    expected = (0.8 / 50.0) * (100.0 / 50.0 - 1.0)
    assert fd == pytest.approx(expected, rel=1e-4)


def test_oracle_near_zero_on_frontier():
    market = market_for_penalty(1.25, 100.0)
    position = Position.at_ltv(0.8, 100.0)
    fd = finite_difference_dh(
        position, RiskParams(0.8, 0.1), IncentivePolicy.health_linked(0.1), market, 1e-6 * position.q
    )
    assert abs(fd) <= 1e-6 * (0.8 / position.q)


def test_oracle_negative_at_toxic_point():
    fd = finite_difference_dh(
        Position(100.0, 95.0, 1.0), RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05),
        CpAmmPool(1000.0, 1000.0), 95e-6,
    )
    assert fd < 0.0


def test_market_for_penalty_roundtrip():
    for kind in ("cpamm", "linear"):
        for lam in (1.05, 1.25, 2.0):
            market = market_for_penalty(lam, 100.0, kind=kind)
            assert float(penalty_factor(market, 100.0)) == pytest.approx(lam, rel=1e-14)
    assert float(penalty_factor(market_for_penalty(1.0, 100.0, kind="linear"), 100.0)) == 1.0


def test_locate_infinite_depth():
    est = locate_frontier_empirical(
        RiskParams(0.8, 0.1), IncentivePolicy.constant(0.1), market_for_depth(1e12, 100.0), eta=1e-6, tol=1e-9
    )
    assert est.ltv_star_empirical == pytest.approx(1.0 / 1.1, abs=1e-6)
    assert est.abs_error <= 1e-6
    assert est.bracket[1] - est.bracket[0] <= 1e-9


def test_locate_finite_depth():
    est = locate_frontier_empirical(
        RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), CpAmmPool(1000.0, 1000.0), eta=1e-6, tol=1e-9
    )
    assert est.ltv_star_analytic == pytest.approx(1.0 / 1.26, rel=1e-14)
    assert est.ltv_star_empirical == pytest.approx(0.793651, abs=1e-5)


def test_locate_health_linked_boundary_case():
    est = locate_frontier_empirical(
        RiskParams(0.8, 0.1), IncentivePolicy.health_linked(0.1), market_for_penalty(1.25, 100.0),
        eta=1e-6, tol=1e-9,
    )
    assert est.ltv_star_empirical == pytest.approx(0.8, abs=1e-5)


def test_locate_linear_model():
    model = LinearImpactModel(0.0, 1.0, 1000.0)
    est = locate_frontier_empirical(RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), model, eta=1e-6)
    assert est.ltv_star_analytic == pytest.approx(1.0 / (1.05 * 1.1), rel=1e-14)
    assert est.abs_error <= 1e-5


def test_locate_bracket_contains_sign_change():
    params, policy, market = RiskParams(0.7, 0.05), IncentivePolicy.constant(0.05), CpAmmPool(400.0, 400.0)
    est = locate_frontier_empirical(params, policy, market, eta=1e-6, tol=1e-7)
    lo, hi = est.bracket
    assert hi - lo <= 1e-7

    def fd(ltv_value):
        position = Position.at_ltv(ltv_value, 100.0)
        return finite_difference_dh(position, params, policy, market, 1e-6 * position.q)

    assert fd(lo) >= 0.0 > fd(hi)


def test_locate_without_sign_change():
    with pytest.raises(NoFrontierInRange):
        locate_frontier_empirical(
            RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), CpAmmPool(1000.0, 1000.0), bracket=(0.1, 0.5)
        )


def test_clamped_health_linked_frontier():
    # v * lam = 1.2 > 1: the sign change moves to 1/lam where the bonus is clamped to zero
    market = market_for_penalty(1.5, 100.0)
    policy = IncentivePolicy.health_linked(0.1)
    assert effective_frontier(policy, 0.8, 1.5) == pytest.approx(1.0 / 1.5, rel=1e-15)
    est = locate_frontier_empirical(RiskParams(0.8, 0.1), policy, market)
    assert est.abs_error <= 1e-5


def test_empirical_frontier_error_is_first_order():
    params, policy, pool = RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), CpAmmPool(1000.0, 1000.0)
    errors = [
        locate_frontier_empirical(params, policy, pool, eta=eta, tol=1e-15).abs_error for eta in (1e-4, 1e-5)
    ]
    assert 8.0 <= errors[0] / errors[1] <= 12.0


@pytest.mark.parametrize(
    "lam, v, safe",
    [(1.25, 0.79, True), (1.25, 0.81, False), (1.0, 0.99, True)],
)
def test_boundary_audit_examples(lam, v, safe):
    (row,) = boundary_audit([v], market_for_penalty(lam, 100.0))
    assert row.safe_analytic is safe
    assert row.safe_empirical is safe


def test_convergence_ratios():
    pool = CpAmmPool(1000.0, 1000.0)
    study = convergence_study(
        Position(100.0, 90.0, 1.0), RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), pool, [1e-2, 1e-3, 1e-4]
    )
    assert all(9.0 <= row.ratio <= 11.0 for row in study.rows[1:])
    assert study.order == pytest.approx(1.0, abs=0.05)


def test_convergence_limit():
    pool = CpAmmPool(1000.0, 1000.0)
    args = (Position(100.0, 90.0, 1.0), RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), pool)
    study = convergence_study(*args, [1e-4, 1e-5, 1e-6])
    assert study.extrapolated_rel_error <= 1e-8
    raw = convergence_study(*args, [1e-6, 1e-7]).rows[-1]
    # the raw first-order estimate still carries an O(eta) bias
    assert raw.error / abs(study.analytic) <= 1e-6


def test_convergence_zero_impact_market():
    # lam = 1 exactly: fd = analytic / (1 - eta), so error = |analytic| * eta / (1 - eta)
    model = LinearImpactModel(0.0, 0.0, 100.0)
    study = convergence_study(
        Position(100.0, 90.0, 1.0), RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), model, [1e-2, 1e-3]
    )
    for row in study.rows:
        assert row.error == pytest.approx(abs(study.analytic) * row.eta / (1.0 - row.eta), rel=1e-6)
