"""Discrete liquidation engine.

A step repays ``da`` of debt, seizes collateral worth ``(1 + i) da`` at the
pre-step mark, sells all of it through the market in one exact trade and
re-marks what is left at the post-trade price. ``run_spiral`` repeats steps
until the position recovers, is repaid, or runs out of collateral.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

from .errors import DomainError, InsufficientCollateral, NotLiquidatable
from .lending import (
    IncentivePolicy,
    Position,
    RiskParams,
    health,
    incentive,
    is_liquidatable,
)
from .market_impact import (
    CpAmmPool,
    LinearImpactModel,
    Market,
    cpamm_sell_collateral,
    linear_execute_sale,
    penalty_factor,
)

DEFAULT_MAX_STEPS = 10**6
Q_EPSILON_REL = 1e-9


@dataclass(frozen=True)
class LiquidationStepResult:
    da: float
    ds: float
    proceeds: float
    i_applied: float
    h_before: float
    h_after: float
    lambda_before: float
    position_before: Position
    position_after: Position
    market_after: Market

    @property
    def liquidator_profit(self) -> float:
        return self.proceeds - self.da

    @property
    def ltv_before(self) -> float:
        return _safe_ltv(self.position_before)

    @property
    def ltv_after(self) -> float:
        return _safe_ltv(self.position_after)


class Outcome(enum.Enum):
    RECOVERED = "Recovered"
    FULLY_REPAID = "FullyRepaid"
    BAD_DEBT = "BadDebt"
    MAX_STEPS = "MaxSteps"


@dataclass(frozen=True)
class FixedFraction:
    """Repay ``eta`` times the current debt each step."""

    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")

    def amount(self, q: float) -> float:
        return q if self.eta == 1.0 else self.eta * q


@dataclass(frozen=True)
class FixedAmount:
    """Repay a fixed amount each step (the remaining debt on the last one)."""

    da: float

    def __post_init__(self):
        if not (self.da > 0.0 and math.isfinite(self.da)):
            raise DomainError(f"step amount must be finite and > 0, got {self.da}")

    def amount(self, q: float) -> float:
        return min(self.da, q)


StepRule = Union[FixedFraction, FixedAmount]


@dataclass
class SpiralTrajectory:
    initial: Position
    steps: list[LiquidationStepResult] = field(default_factory=list)
    outcome: Outcome = Outcome.MAX_STEPS
    bad_debt: float = 0.0

    @property
    def final(self) -> Position:
        return self.steps[-1].position_after if self.steps else self.initial


def _safe_ltv(position: Position) -> float:
    if position.q == 0.0:
        return 0.0
    c = position.c
    return math.inf if c == 0.0 else position.q / c


def _safe_health(position: Position, params: RiskParams) -> float:
    return math.inf if position.q == 0.0 else health(position, params)


def _sell(market: Market, ds: float, price: float) -> tuple[float, float, Market]:
    """Sell ``ds`` units; return ``(proceeds, new_mark_price, new_market)``."""
    if isinstance(market, CpAmmPool):
        proceeds, pool = cpamm_sell_collateral(market, ds)
        return proceeds, pool.price, pool
    if isinstance(market, LinearImpactModel):
        proceeds, new_price = linear_execute_sale(market, ds * price, price)
        return proceeds, new_price, market
    raise TypeError(f"unsupported market type {type(market).__name__}")


def _settle(
    position: Position,
    params: RiskParams,
    market: Market,
    da: float,
    ds: float,
    i: float,
    h_before: float,
) -> LiquidationStepResult:
    proceeds, new_price, market_after = _sell(market, ds, position.mark_price)
    # debt and collateral hit exactly zero rather than a rounding residue
    q_after = 0.0 if da == position.q else position.q - da
    s_after = 0.0 if ds == position.s else position.s - ds
    after = Position(s=s_after, q=q_after, mark_price=new_price)
    return LiquidationStepResult(
        da=da,
        ds=ds,
        proceeds=proceeds,
        i_applied=i,
        h_before=h_before,
        h_after=_safe_health(after, params),
        lambda_before=float(penalty_factor(market, position.c)),
        position_before=position,
        position_after=after,
        market_after=market_after,
    )


def execute_step(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
    da: float,
) -> LiquidationStepResult:
    """Step mechanics without the eligibility check.

    Lets the finite-difference oracle probe states at or above ``h = 1``.
    """
    if not (da > 0.0 and da <= position.q):
        raise DomainError(f"need 0 < da <= q, got da={da}, q={position.q}")
    h_before = health(position, params)
    i = incentive(policy, h_before)
    ds = (1.0 + i) * da / position.mark_price
    if ds > position.s:
        raise InsufficientCollateral(
            f"step needs {ds:.12g} collateral units, position holds {position.s:.12g}"
        )
    return _settle(position, params, market, da, ds, i, h_before)


def liquidation_step(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
    da: float,
) -> LiquidationStepResult:
    """Repay ``da`` of a liquidatable position (``h < 1``)."""
    if not is_liquidatable(position, params):
        raise NotLiquidatable("position health is not below 1")
    return execute_step(position, params, policy, market, da)


def final_step(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
) -> LiquidationStepResult:
    """Seize and sell all remaining collateral; whatever debt is left is bad debt."""
    h_before = _safe_health(position, params)
    i = incentive(policy, h_before)
    if not position.c < (1.0 + i) * position.q:
        raise DomainError("collateral covers (1 + i) q; use liquidation_step instead")
    if position.s == 0.0:
        return _settle(position, params, market, 0.0, 0.0, i, h_before)
    da = position.c / (1.0 + i)
    return _settle(position, params, market, da, position.s, i, h_before)


def run_spiral(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
    step_rule: StepRule,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> SpiralTrajectory:
    """Liquidate step by step until recovery, full repayment, bad debt or ``max_steps``.

    The pool is not replenished between steps and the borrower does nothing.
    """
    if max_steps < 1:
        raise DomainError(f"max_steps must be >= 1, got {max_steps}")
    if not is_liquidatable(position, params):
        raise NotLiquidatable("initial position health is not below 1")
    q_eps = Q_EPSILON_REL * position.q
    trajectory = SpiralTrajectory(initial=position)
    while True:
        da = step_rule.amount(position.q)
        h = health(position, params)
        i = incentive(policy, h)
        if (1.0 + i) * da / position.mark_price > position.s:
            result = final_step(position, params, policy, market)
        else:
            result = execute_step(position, params, policy, market, da)
        trajectory.steps.append(result)
        position, market = result.position_after, result.market_after

        if position.q <= q_eps:
            trajectory.outcome = Outcome.FULLY_REPAID
        elif position.s == 0.0:
            trajectory.outcome = Outcome.BAD_DEBT
            trajectory.bad_debt = position.q
        elif result.h_after >= 1.0:
            trajectory.outcome = Outcome.RECOVERED
        elif len(trajectory.steps) >= max_steps:
            trajectory.outcome = Outcome.MAX_STEPS
        else:
            continue
        return trajectory
