"""Slippage-aware liquidation toxicity: analytic frontiers and a discrete liquidation engine."""

from .analysis import (
    boundary_audit,
    convergence_study,
    effective_frontier,
    finite_difference_dh,
    locate_frontier_empirical,
    market_for_depth,
    market_for_penalty,
)
from .engine import (
    FixedAmount,
    FixedFraction,
    LiquidationStepResult,
    Outcome,
    SpiralTrajectory,
    execute_step,
    final_step,
    liquidation_step,
    run_spiral,
)
from .lending import IncentivePolicy, PolicyKind, Position, RiskParams, health, incentive, ltv
from .market_impact import (
    CpAmmPool,
    LinearImpactModel,
    PenaltyFactor,
    cpamm_log_price_impact_linearized,
    cpamm_penalty_factor,
    cpamm_sell_collateral,
    cpamm_spot_price,
    linear_execute_sale,
    linear_penalty_factor,
    penalty_factor,
)
from .toxicity import (
    ToxicityVerdict,
    boundary_safe_lltv,
    classify,
    frontier_constant_bonus,
    frontier_dynamic_bonus,
    health_differential,
)

__all__ = [
    "boundary_audit",
    "boundary_safe_lltv",
    "classify",
    "convergence_study",
    "cpamm_log_price_impact_linearized",
    "cpamm_penalty_factor",
    "cpamm_sell_collateral",
    "cpamm_spot_price",
    "CpAmmPool",
    "effective_frontier",
    "execute_step",
    "final_step",
    "finite_difference_dh",
    "FixedAmount",
    "FixedFraction",
    "frontier_constant_bonus",
    "frontier_dynamic_bonus",
    "health",
    "health_differential",
    "incentive",
    "IncentivePolicy",
    "linear_execute_sale",
    "linear_penalty_factor",
    "LinearImpactModel",
    "liquidation_step",
    "LiquidationStepResult",
    "locate_frontier_empirical",
    "ltv",
    "market_for_depth",
    "market_for_penalty",
    "Outcome",
    "penalty_factor",
    "PenaltyFactor",
    "PolicyKind",
    "Position",
    "RiskParams",
    "run_spiral",
    "SpiralTrajectory",
    "ToxicityVerdict",
]

__version__ = "0.1.0"
