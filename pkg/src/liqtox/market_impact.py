"""Price-impact models: a fee-less constant-product pool and a linear
slippage model with permanent impact.

Both expose a penalty factor (how much a sale of collateral re-marks the
collateral that is left) and an exact execution primitive used by the
liquidation engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

from .errors import DomainError, MarketExhausted

# floor for the linear model's permanent-impact mark price
MIN_MARK_PRICE = 1e-300


@dataclass(frozen=True)
class CpAmmPool:
    """Constant-product pool with reserves ``x`` (collateral) and ``y`` (debt asset).

    ``k`` defaults to ``x * y``. Swaps keep the original ``k`` and derive the
    new debt reserve as ``k / x'``, so the invariant does not drift over long
    runs of swaps.
    """

    x: float
    y: float
    k: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (math.isfinite(self.x) and self.x > 0):
            raise DomainError(f"collateral reserve must be finite and > 0, got {self.x}")
        if not (math.isfinite(self.y) and self.y > 0):
            raise DomainError(f"debt reserve must be finite and > 0, got {self.y}")
        if self.k is None:
            object.__setattr__(self, "k", self.x * self.y)

    @property
    def price(self) -> float:
        return self.y / self.x


@dataclass(frozen=True)
class LinearImpactModel:
    """Linear slippage ``s(v) = gamma + (sigma / L) * v`` on a sale of value ``v``.

    ``phi`` is the per-unit permanent impact ``sigma / (L * (1 - gamma))``.
    """

    gamma: float
    sigma: float
    L: float

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not self.sigma >= 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")
        if not (self.L > 0.0 and math.isfinite(self.L)):
            raise DomainError(f"L must be finite and > 0, got {self.L}")

    @property
    def phi(self) -> float:
        return self.sigma / (self.L * (1.0 - self.gamma))

    def slippage(self, value: float) -> float:
        return self.gamma + (self.sigma / self.L) * value


Market = Union[CpAmmPool, LinearImpactModel]


@dataclass(frozen=True)
class PenaltyFactor:
    """Liquidity penalty multiplier, always >= 1."""

    value: float

    def __post_init__(self):
        if not self.value >= 1.0:
            raise DomainError(f"penalty factor must be >= 1, got {self.value}")

    def __float__(self) -> float:
        return self.value


def _check_nonnegative(name: str, amount: float) -> None:
    if not (amount >= 0.0 and math.isfinite(amount)):
        raise DomainError(f"{name} must be finite and >= 0, got {amount}")


def cpamm_spot_price(pool: CpAmmPool) -> float:
    return pool.price


def cpamm_sell_collateral(pool: CpAmmPool, ds: float) -> tuple[float, CpAmmPool]:
    """Sell ``ds`` collateral units into the pool.

    Returns ``(proceeds, new_pool)`` where proceeds are debt units paid out.
    """
    _check_nonnegative("ds", ds)
    if ds == 0.0:
        return 0.0, pool
    x_new = pool.x + ds
    # k / x' can round above y for sub-ulp trades
    y_new = min(pool.k / x_new, pool.y)
    return pool.y - y_new, replace(pool, x=x_new, y=y_new)


def cpamm_log_price_impact_linearized(pool: CpAmmPool, ds: float) -> float:
    """First-order log-price change ``-2 ds / x`` of selling ``ds`` units."""
    _check_nonnegative("ds", ds)
    return -2.0 * ds / pool.x


def cpamm_log_price_impact_exact(pool: CpAmmPool, ds: float) -> float:
    # P'/P = (x / (x + ds))^2 exactly on the curve
    _check_nonnegative("ds", ds)
    return -2.0 * math.log1p(ds / pool.x)


def cpamm_penalty_factor(pool: CpAmmPool, c: float) -> PenaltyFactor:
    _check_nonnegative("c", c)
    return PenaltyFactor(float(1.0 + 2.0 * c / pool.y))


def linear_penalty_factor(model: LinearImpactModel, c: float) -> PenaltyFactor:
    _check_nonnegative("c", c)
    return PenaltyFactor(float(1.0 + model.phi * c))


def linear_execute_sale(
    model: LinearImpactModel, value: float, price: float
) -> tuple[float, float]:
    """Sell collateral worth ``value`` (at ``price``) under the linear model.

    Proceeds take the size-dependent discount ``s(value)``; the mark price
    moves permanently by ``-phi * value`` in relative terms. Raises
    ``MarketExhausted`` when the discount reaches 1.
    """
    _check_nonnegative("value", value)
    if not price > 0.0:
        raise DomainError(f"price must be > 0, got {price}")
    if value == 0.0:
        return 0.0, price
    s = model.slippage(value)
    if s >= 1.0:
        raise MarketExhausted(
            f"slippage {s:.6g} >= 1 for sale of value {value:.6g} (L={model.L:.6g})"
        )
    proceeds = value * (1.0 - s)
    new_price = max(price * (1.0 - model.phi * value), MIN_MARK_PRICE)
    return proceeds, new_price


def penalty_factor(market: Market, c: float) -> PenaltyFactor:
    """Dispatch to the penalty factor of whichever impact model ``market`` is."""
    if isinstance(market, CpAmmPool):
        return cpamm_penalty_factor(market, c)
    if isinstance(market, LinearImpactModel):
        return linear_penalty_factor(market, c)
    raise TypeError(f"unsupported market type {type(market).__name__}")
