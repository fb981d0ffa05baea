"""Borrower positions, health/LTV accounting and liquidation incentives."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, NoDebt, WipedOut


@dataclass(frozen=True)
class Position:
    """Collateral units ``s``, debt ``q`` and the mark price of one collateral unit.

    Units and price are kept apart so a pool price move re-marks the
    remaining collateral without touching ``s``.
    """

    s: float
    q: float
    mark_price: float

    def __post_init__(self):
        if not self.s >= 0.0:
            raise DomainError(f"collateral units must be >= 0, got {self.s}")
        if not self.q >= 0.0:
            raise DomainError(f"debt must be >= 0, got {self.q}")
        if not (self.mark_price > 0.0 and math.isfinite(self.mark_price)):
            raise DomainError(f"mark price must be finite and > 0, got {self.mark_price}")

    @property
    def c(self) -> float:
        """Collateral value in debt units."""
        return self.s * self.mark_price

    @classmethod
    def at_ltv(cls, ltv: float, c: float, price: float = 1.0) -> "Position":
        return cls(s=c / price, q=ltv * c, mark_price=price)


@dataclass(frozen=True)
class RiskParams:
    v: float
    i_max: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.v < 1.0:
            raise DomainError(f"LLTV v must lie in (0, 1), got {self.v}")
        if not self.i_max >= 0.0:
            raise DomainError(f"i_max must be >= 0, got {self.i_max}")


class PolicyKind(enum.Enum):
    CONSTANT = "constant"
    HEALTH_LINKED = "health_linked"


@dataclass(frozen=True)
class IncentivePolicy:
    kind: PolicyKind
    i_max: float

    def __post_init__(self):
        if not self.i_max >= 0.0:
            raise DomainError(f"i_max must be >= 0, got {self.i_max}")

    @classmethod
    def constant(cls, i: float) -> "IncentivePolicy":
        return cls(PolicyKind.CONSTANT, i)

    @classmethod
    def health_linked(cls, i_max: float) -> "IncentivePolicy":
        return cls(PolicyKind.HEALTH_LINKED, i_max)


def ltv(position: Position) -> float:
    """Debt over collateral value. Raises ``WipedOut`` for debt against no collateral."""
    if position.q == 0.0:
        return 0.0
    c = position.c
    if c == 0.0:
        raise WipedOut(f"no collateral value against debt {position.q}")
    return position.q / c


def health(position: Position, params: RiskParams) -> float:
    """``v * c / q``; equals 1 exactly on the liquidation boundary."""
    if position.q == 0.0:
        raise NoDebt("health is undefined for a position without debt")
    return params.v * position.c / position.q


def is_liquidatable(position: Position, params: RiskParams) -> bool:
    return position.q > 0.0 and health(position, params) < 1.0


def incentive(policy: IncentivePolicy, h: float) -> float:
    """Liquidation bonus paid at health ``h``.

    The health-linked schedule is ``i_max * (1 - h)`` clamped to ``[0, i_max]``.
    """
    if not h >= 0.0:
        raise DomainError(f"health must be >= 0, got {h}")
    if policy.kind is PolicyKind.CONSTANT:
        return policy.i_max
    return policy.i_max * min(max(1.0 - h, 0.0), 1.0)
