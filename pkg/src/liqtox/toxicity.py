"""Analytic toxicity conditions for an infinitesimal liquidation step.

Every function takes the penalty factor ``lam`` as an input (a float or a
``PenaltyFactor``), so either impact model can be composed in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import DomainError, NotLiquidatable
from .lending import IncentivePolicy, PolicyKind, Position, RiskParams, health, incentive, ltv
from .market_impact import PenaltyFactor

Lam = Union[float, PenaltyFactor]


@dataclass(frozen=True)
class ToxicityVerdict:
    toxic: bool
    dh_per_da: float
    threshold_ltv: float
    ltv: float
    incentive: float

    @property
    def on_frontier(self) -> bool:
        return self.dh_per_da == 0.0 or self.ltv == self.threshold_ltv


def _lam(lam: Lam) -> float:
    value = float(lam)
    if not value >= 1.0:
        raise DomainError(f"penalty factor must be >= 1, got {value}")
    return value


def health_differential(c: float, q: float, v: float, i: float, lam: Lam) -> float:
    """Rate of health change per unit of debt repaid, ``dh/da``.

    Seizing ``(1 + i) da`` of value and re-marking the rest costs
    ``(1 + i) * lam * da`` of collateral value while debt falls by ``da``.
    """
    lam = _lam(lam)
    if not (c > 0.0 and q > 0.0):
        raise DomainError(f"need c > 0 and q > 0, got c={c}, q={q}")
    if not i >= 0.0:
        raise DomainError(f"bonus must be >= 0, got {i}")
    return (v / q) * (c / q - (1.0 + i) * lam)


def frontier_constant_bonus(i: float, lam: Lam) -> float:
    """LTV above which a constant-bonus step is toxic: ``1 / ((1 + i) lam)``."""
    lam = _lam(lam)
    if not i >= 0.0:
        raise DomainError(f"bonus must be >= 0, got {i}")
    return 1.0 / ((1.0 + i) * lam)


def frontier_dynamic_bonus(i_max: float, v: float, lam: Lam) -> float:
    """LTV above which a health-linked step ``i(h) = i_max (1 - h)`` is toxic."""
    lam = _lam(lam)
    if not i_max >= 0.0:
        raise DomainError(f"i_max must be >= 0, got {i_max}")
    if not 0.0 < v < 1.0:
        raise DomainError(f"v must lie in (0, 1), got {v}")
    return (1.0 + i_max * v * lam) / ((1.0 + i_max) * lam)


def boundary_safe_lltv(lam: Lam) -> float:
    """Largest LLTV for which a health-linked liquidation at ``h = 1`` is not toxic."""
    return 1.0 / _lam(lam)


def frontier_for_policy(policy: IncentivePolicy, v: float, lam: Lam) -> float:
    if policy.kind is PolicyKind.CONSTANT:
        return frontier_constant_bonus(policy.i_max, lam)
    return frontier_dynamic_bonus(policy.i_max, v, lam)


def classify(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    lam: Lam,
    tol: float = 0.0,
) -> ToxicityVerdict:
    """Classify the next infinitesimal liquidation of ``position``.

    The bonus is evaluated at the current health. ``tol`` widens the
    non-toxic band: the verdict is toxic only when ``ltv > threshold + tol``.
    Sitting exactly on the frontier counts as non-toxic.
    """
    h = health(position, params)
    if h > 1.0:
        raise NotLiquidatable(f"health {h:.12g} > 1")
    current_ltv = ltv(position)
    i = incentive(policy, h)
    threshold = frontier_for_policy(policy, params.v, lam)
    dh = health_differential(position.c, position.q, params.v, i, lam)
    return ToxicityVerdict(
        toxic=current_ltv > threshold + tol,
        dh_per_da=dh,
        threshold_ltv=threshold,
        ltv=current_ltv,
        incentive=i,
    )
