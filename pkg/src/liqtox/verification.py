"""Property suites run by ``liqtox verify``.

Each suite returns a ``CheckResult`` with the worst measured deviation and
the tolerance it was held to. ``perturb_lambda`` inflates the penalty factor
used on the analytic side of the frontier checks, so a non-zero value should
make them fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analysis import (
    boundary_audit,
    convergence_study,
    cpamm_step_bias,
    effective_frontier,
    finite_difference_dh,
    locate_frontier_empirical,
    market_for_depth,
    market_for_penalty,
)
from .config import VerifyConfig
from .engine import FixedFraction, Outcome, run_spiral
from .lending import IncentivePolicy, Position, RiskParams
from .market_impact import (
    CpAmmPool,
    cpamm_log_price_impact_linearized,
    cpamm_sell_collateral,
    penalty_factor,
)
from .sweep import SweepSpec, run_sweep, sweep_csv
from .toxicity import classify, frontier_for_policy

C_REF = 100.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: measured={self.measured:.3e} tol={self.tolerance:.3e}"
        return f"{text} ({self.detail})" if self.detail else text


def _frontier_check(name, cases, tolerance, cfg: VerifyConfig) -> CheckResult:
    worst = 0.0
    for params, policy, market in cases:
        est = locate_frontier_empirical(
            params, policy, market, C_REF, eta=cfg.eta, tol=cfg.tol,
            lam_perturbation=cfg.perturb_lambda,
        )
        worst = max(worst, est.abs_error)
    return CheckResult(name, worst <= tolerance, worst, tolerance, f"{len(cases)} frontiers")


def check_infinite_depth(cfg: VerifyConfig) -> CheckResult:
    market = market_for_depth(1e12, C_REF)
    cases = [(RiskParams(0.8, i), IncentivePolicy.constant(i), market) for i in cfg.infinite_depth_incentives]
    return _frontier_check("infinite-depth frontier 1/(1+i)", cases, 1e-6, cfg)


def check_finite_depth(cfg: VerifyConfig) -> CheckResult:
    cases = [
        (RiskParams(0.8, i), IncentivePolicy.constant(i), CpAmmPool(y, y))
        for y in cfg.finite_depth_reserves
        for i in cfg.finite_depth_incentives
    ]
    return _frontier_check("constant-bonus frontier 1/((1+i)lam)", cases, 1e-5, cfg)


def check_dynamic_frontier(cfg: VerifyConfig) -> CheckResult:
    cases = [
        (RiskParams(v, i), IncentivePolicy.health_linked(i), market_for_penalty(lam, C_REF))
        for v in cfg.dynamic_v
        for i in cfg.dynamic_i_max
        for lam in cfg.dynamic_lambda
    ]
    return _frontier_check("health-linked frontier", cases, 1e-5, cfg)


def check_boundary(cfg: VerifyConfig) -> CheckResult:
    lo, hi = cfg.boundary_v_range
    n = int(round((hi - lo) / cfg.boundary_v_step))
    vs = [round(lo + k * cfg.boundary_v_step, 12) for k in range(n + 1)]
    checked = disagreements = 0
    for lam in cfg.boundary_lambdas:
        market = market_for_penalty(lam, C_REF)
        for row in boundary_audit(vs, market, 0.1, C_REF, eta=cfg.eta, lam_perturbation=cfg.perturb_lambda):
            if abs(row.v - 1.0 / lam) <= 0.005:
                continue
            checked += 1
            disagreements += not row.agrees
    return CheckResult(
        "boundary audit v <= 1/lam", disagreements == 0, float(disagreements), 0.0,
        f"{checked} grid points",
    )


def random_state(rng: np.random.Generator):
    """Random state for sign-agreement checks; ``v`` is redrawn until ``h <= 1``."""
    ratio = 10.0 ** rng.uniform(0.0, 6.0)
    ltv_value = rng.uniform(0.1, 1.5)
    i = rng.uniform(0.0, 0.2)
    while True:
        v = rng.uniform(0.05, 0.99)
        if v <= ltv_value:
            break
    policy = IncentivePolicy.constant(i) if rng.random() < 0.5 else IncentivePolicy.health_linked(i)
    market = market_for_depth(ratio, C_REF)
    return Position.at_ltv(ltv_value, C_REF, market.price), RiskParams(v, i), policy, market


def check_sign_agreement(cfg: VerifyConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed)
    checked = mismatches = 0
    while checked < cfg.n_states:
        position, params, policy, market = random_state(rng)
        lam = float(penalty_factor(market, position.c)) * (1.0 + cfg.perturb_lambda)
        threshold = frontier_for_policy(policy, params.v, lam)
        if abs(position.q / position.c - threshold) <= 1e-3:
            continue
        verdict = classify(position, params, policy, lam)
        dh = finite_difference_dh(position, params, policy, market, cfg.eta * position.q)
        checked += 1
        mismatches += verdict.toxic != (dh < 0.0)
    return CheckResult(
        "oracle sign agreement", mismatches == 0, float(mismatches), 0.0, f"{checked} states"
    )


def check_convergence(cfg: VerifyConfig) -> CheckResult:
    pool = CpAmmPool(1000.0, 1000.0)
    position = Position(100.0, 90.0, pool.price)
    study = convergence_study(position, RiskParams(0.8, 0.05), IncentivePolicy.constant(0.05), pool,
                              cfg.convergence_etas)
    ratios = [r.ratio for r in study.rows[1:]]
    ok = all(r is not None and 8.0 <= r <= 12.0 for r in ratios)
    worst = max((abs(r - 10.0) for r in ratios if r is not None), default=math.inf)
    return CheckResult(
        "first-order convergence", ok, worst, 2.0,
        "ratios " + ", ".join(f"{r:.3f}" for r in ratios if r is not None),
    )


def toxic_scenario(rng: np.random.Generator):
    while True:
        v = rng.uniform(0.5, 0.9)
        i = rng.uniform(0.0, 0.15)
        market = market_for_depth(math.exp(rng.uniform(0.0, math.log(5.0))), C_REF)
        lam = float(penalty_factor(market, C_REF))
        low = max(v, 1.0 / ((1.0 + i) * lam)) + 0.02
        if low < 1.3:
            break
    position = Position.at_ltv(rng.uniform(low, 1.3), C_REF, market.price)
    eta = float(rng.choice([0.001, 0.01, 0.05, 0.1]))
    return position, RiskParams(v, i), IncentivePolicy.constant(i), market, eta


def benign_scenario(rng: np.random.Generator):
    while True:
        v = rng.uniform(0.3, 0.8)
        i = rng.uniform(0.0, 0.1)
        market = market_for_depth(math.exp(rng.uniform(math.log(50.0), math.log(1e6))), C_REF)
        policy = IncentivePolicy.constant(i) if rng.random() < 0.5 else IncentivePolicy.health_linked(i)
        frontier = effective_frontier(policy, v, float(penalty_factor(market, C_REF)))
        if frontier - 0.01 > v + 0.005:
            break
    position = Position.at_ltv(rng.uniform(v + 0.005, frontier - 0.01), C_REF, market.price)
    eta = float(rng.choice([0.01, 0.05, 0.1, 1.0]))
    return position, RiskParams(v, i), policy, market, eta


def spiral_monotonicity_violations(trajectory, params, policy, eta) -> tuple[int, int]:
    """Count toxic-classified steps whose health did not fall or LTV did not rise.

    Steps within twice the finite-step bias of the frontier are skipped.
    Returns ``(checked, violations)``.
    """
    checked = violations = 0
    for step in trajectory.steps:
        before = step.position_before
        ltv_before = before.q / before.c
        band = 2.0 * cpamm_step_bias(ltv_before, policy.i_max, step.lambda_before, eta)
        verdict = classify(before, params, policy, step.lambda_before, tol=band)
        if not verdict.toxic:
            continue
        checked += 1
        if not (step.h_after < step.h_before and step.ltv_after > step.ltv_before):
            violations += 1
    return checked, violations


def check_spirals(cfg: VerifyConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 1)
    checked = violations = 0
    for _ in range(cfg.n_spirals):
        position, params, policy, market, eta = toxic_scenario(rng)
        trajectory = run_spiral(position, params, policy, market, FixedFraction(eta), max_steps=10**5)
        c, v = spiral_monotonicity_violations(trajectory, params, policy, eta)
        checked += c
        violations += v
    unterminated = 0
    for _ in range(cfg.n_spirals):
        position, params, policy, market, eta = benign_scenario(rng)
        trajectory = run_spiral(position, params, policy, market, FixedFraction(eta), max_steps=10**5)
        unterminated += trajectory.outcome not in (Outcome.RECOVERED, Outcome.FULLY_REPAID)
    failures = violations + unterminated
    return CheckResult(
        "spiral monotonicity / benign termination", failures == 0, float(failures), 0.0,
        f"{checked} toxic steps, {violations} violations, {unterminated} benign runs not recovered",
    )


def check_swaps(cfg: VerifyConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 2)
    worst_invariant = 0.0
    worst_linear = 0.0
    for _ in range(cfg.n_swaps):
        pool = CpAmmPool(10.0 ** rng.uniform(-3, 9), 10.0 ** rng.uniform(-3, 9))
        ds = rng.uniform(0.0, 10.0) * pool.x
        _, after = cpamm_sell_collateral(pool, ds)
        worst_invariant = max(worst_invariant, abs(after.x * after.y - pool.k) / pool.k)
        u = rng.uniform(0.0, 0.1)
        _, small = cpamm_sell_collateral(pool, u * pool.x)
        exact = math.log(small.price / pool.price)
        gap = abs(exact - cpamm_log_price_impact_linearized(pool, u * pool.x))
        if u > 0.0:
            worst_linear = max(worst_linear, gap / (2.0 * u * u))
    ok = worst_invariant <= 1e-12 and worst_linear <= 1.0
    return CheckResult(
        "swap invariant / linearized impact", ok, worst_invariant, 1e-12,
        f"worst linearization gap = {worst_linear:.3f} x 2(ds/x)^2",
    )


def check_determinism(cfg: VerifyConfig) -> CheckResult:
    spec = SweepSpec(
        axes={
            "model": ["cpamm"],
            "v": [0.6, 0.7, 0.8],
            "i_max": [0.0, 0.05, 0.1],
            "depth_ratio": [2.0, 10.0, 100.0],
            "policy": ["constant"],
        },
        seed=cfg.seed,
        eta=cfg.eta,
        tol=cfg.tol,
    )
    first, second = sweep_csv(run_sweep(spec)), sweep_csv(run_sweep(spec))
    return CheckResult("sweep determinism", first == second, float(first != second), 0.0,
                       f"{len(first)} bytes")


SUITES: list[Callable[[VerifyConfig], CheckResult]] = [
    check_infinite_depth,
    check_finite_depth,
    check_dynamic_frontier,
    check_boundary,
    check_sign_agreement,
    check_convergence,
    check_spirals,
    check_swaps,
    check_determinism,
]


def run_all(cfg: Optional[VerifyConfig] = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig()
    return [suite(cfg) for suite in SUITES]
