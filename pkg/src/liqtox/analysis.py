"""Numerical checks of the analytic frontiers against the discrete engine.

``finite_difference_dh`` is the brute-force oracle: it runs one engine step
and differences the health before and after. Nothing in here evaluates the
analytic health differential on the oracle side; analytic values are only
computed for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .engine import execute_step
from .errors import DomainError, NoFrontierInRange
from .lending import IncentivePolicy, PolicyKind, Position, RiskParams, health, incentive
from .market_impact import CpAmmPool, LinearImpactModel, Market, penalty_factor
from .toxicity import (
    boundary_safe_lltv,
    frontier_constant_bonus,
    frontier_dynamic_bonus,
    health_differential,
)

DEFAULT_ETA = 1e-6
DEFAULT_BRACKET = (0.05, 3.0)
# stand-in for y -> infinity; pool arithmetic at this depth is price-inert
INFINITE_DEPTH_RATIO = 1e12


def market_for_depth(
    depth_ratio: float, c: float, price: float = 1.0, kind: str = "cpamm"
) -> Market:
    """Market whose depth relative to collateral value ``c`` is ``depth_ratio``.

    cpamm: debt reserve ``y = depth_ratio * c`` (so lam = 1 + 2 / depth_ratio).
    linear: ``gamma = 0, sigma = 1, L = depth_ratio * c`` (so lam = 1 + 1 / depth_ratio).
    """
    if not depth_ratio > 0.0:
        raise DomainError(f"depth ratio must be > 0, got {depth_ratio}")
    if kind == "cpamm":
        y = depth_ratio * c
        return CpAmmPool(x=y / price, y=y)
    if kind == "linear":
        return LinearImpactModel(gamma=0.0, sigma=1.0, L=depth_ratio * c)
    raise DomainError(f"unknown market kind {kind!r}")


def market_for_penalty(
    lam: float, c: float, price: float = 1.0, kind: str = "cpamm"
) -> Market:
    """Market with penalty factor ``lam`` at collateral value ``c``."""
    if not lam >= 1.0:
        raise DomainError(f"penalty factor must be >= 1, got {lam}")
    if kind == "linear" and lam == 1.0:
        return LinearImpactModel(gamma=0.0, sigma=0.0, L=c)
    if lam == 1.0:
        return market_for_depth(INFINITE_DEPTH_RATIO, c, price, kind)
    ratio = (2.0 if kind == "cpamm" else 1.0) / (lam - 1.0)
    return market_for_depth(ratio, c, price, kind)


def market_price(market: Market, default: float = 1.0) -> float:
    return market.price if isinstance(market, CpAmmPool) else default


def effective_frontier(policy: IncentivePolicy, v: float, lam: float) -> float:
    """Toxicity frontier over all LTVs, including the clamp of the bonus at ``h >= 1``.

    For the health-linked bonus with ``v * lam > 1`` the raw frontier falls
    below ``v``, where the bonus is clamped to zero; the sign change then sits
    at ``1 / lam`` instead.
    """
    if policy.kind is PolicyKind.CONSTANT:
        return frontier_constant_bonus(policy.i_max, lam)
    if v * lam <= 1.0:
        return frontier_dynamic_bonus(policy.i_max, v, lam)
    return boundary_safe_lltv(lam)


def finite_difference_dh(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
    da: float,
) -> float:
    """``(h_after - h_before) / da`` from one exact engine step."""
    step = execute_step(position, params, policy, market, da)
    return (step.h_after - step.h_before) / da


@dataclass(frozen=True)
class FrontierEstimate:
    ltv_star_empirical: float
    ltv_star_analytic: float
    eta: float
    abs_error: float
    iterations: int
    bracket: tuple[float, float]


def locate_frontier_empirical(
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
    c: float = 100.0,
    *,
    price: Optional[float] = None,
    eta: float = DEFAULT_ETA,
    tol: float = 1e-9,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    lam_perturbation: float = 0.0,
) -> FrontierEstimate:
    """Bisect on LTV for the sign change of the finite-difference oracle.

    Collateral value ``c`` (and therefore the penalty factor) is held fixed
    while the debt varies. Each probe repays ``eta * q``. The lower bracket
    end must be benign and the upper end toxic.

    ``lam_perturbation`` scales the penalty factor fed to the analytic
    frontier only; it exists to check that the comparison can fail.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be > 0, got {tol}")
    lo, hi = bracket
    if not 0.0 < lo < hi:
        raise DomainError(f"bad bracket {bracket}")
    if price is None:
        price = market_price(market)

    def toxic(ltv_value: float) -> bool:
        position = Position.at_ltv(ltv_value, c, price)
        return finite_difference_dh(position, params, policy, market, eta * position.q) < 0.0

    if toxic(lo) or not toxic(hi):
        raise NoFrontierInRange(f"no benign-to-toxic sign change on [{lo}, {hi}]")
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if toxic(mid):
            hi = mid
        else:
            lo = mid
        iterations += 1

    lam = float(penalty_factor(market, c)) * (1.0 + lam_perturbation)
    analytic = effective_frontier(policy, params.v, lam)
    empirical = 0.5 * (lo + hi)
    return FrontierEstimate(
        ltv_star_empirical=empirical,
        ltv_star_analytic=analytic,
        eta=eta,
        abs_error=abs(empirical - analytic),
        iterations=iterations,
        bracket=(lo, hi),
    )


@dataclass(frozen=True)
class BoundaryRow:
    v: float
    lam: float
    safe_analytic: bool
    safe_empirical: bool
    dh_empirical: float

    @property
    def agrees(self) -> bool:
        return self.safe_analytic == self.safe_empirical


def boundary_audit(
    v_values: Iterable[float],
    market: Market,
    i_max: float = 0.1,
    c: float = 100.0,
    *,
    price: Optional[float] = None,
    eta: float = DEFAULT_ETA,
    lam_perturbation: float = 0.0,
) -> list[BoundaryRow]:
    """Probe a health-linked liquidation sitting exactly at ``ltv = v`` for each ``v``."""
    if price is None:
        price = market_price(market)
    lam = float(penalty_factor(market, c))
    safe_lltv = boundary_safe_lltv(lam * (1.0 + lam_perturbation))
    policy = IncentivePolicy.health_linked(i_max)
    rows = []
    for v in v_values:
        params = RiskParams(v=v, i_max=i_max)
        position = Position.at_ltv(v, c, price)
        dh = finite_difference_dh(position, params, policy, market, eta * position.q)
        rows.append(BoundaryRow(v, lam, v <= safe_lltv, dh >= 0.0, dh))
    return rows


@dataclass(frozen=True)
class ConvergenceRow:
    eta: float
    dh_empirical: float
    error: float
    ratio: Optional[float]


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: list[ConvergenceRow]
    analytic: float
    order: float
    extrapolated: float

    @property
    def extrapolated_rel_error(self) -> float:
        return abs(self.extrapolated - self.analytic) / abs(self.analytic)


def convergence_study(
    position: Position,
    params: RiskParams,
    policy: IncentivePolicy,
    market: Market,
    etas: Sequence[float],
) -> ConvergenceStudy:
    """Oracle error against the analytic ``dh/da`` for shrinking step fractions.

    ``order`` is the least-squares log-log slope of error against eta.
    ``extrapolated`` is the first-order Richardson limit from the two
    smallest etas.
    """
    etas = list(etas)
    if len(etas) < 2:
        raise DomainError("need at least two step fractions")
    if any(e <= 0.0 for e in etas) or any(b >= a for a, b in zip(etas, etas[1:])):
        raise DomainError("step fractions must be positive and strictly decreasing")
    i = incentive(policy, health(position, params))
    lam = penalty_factor(market, position.c)
    analytic = health_differential(position.c, position.q, params.v, i, lam)

    rows: list[ConvergenceRow] = []
    values = []
    for eta in etas:
        fd = finite_difference_dh(position, params, policy, market, eta * position.q)
        err = abs(fd - analytic)
        ratio = rows[-1].error / err if rows and err > 0.0 else None
        rows.append(ConvergenceRow(eta, fd, err, ratio))
        values.append(fd)

    errors = np.array([r.error for r in rows])
    if np.all(errors > 0.0):
        order = float(np.polyfit(np.log(etas), np.log(errors), 1)[0])
    else:
        order = math.nan
    (e1, f1), (e2, f2) = zip(etas[-2:], values[-2:])
    extrapolated = f2 + (f2 - f1) * e2 / (e1 - e2)
    return ConvergenceStudy(rows=rows, analytic=analytic, order=order, extrapolated=extrapolated)


def cpamm_step_bias(ltv_value: float, i: float, lam: float, eta: float) -> float:
    """Second-order shift of the CP-AMM frontier for a finite constant-bonus step.

    Repaying ``eta * q`` in one exact swap moves the LTV at which health is
    unchanged by about ``ltv^3 (1+i)^2 eta (lam-1) (1 + 3/4 (lam-1))``. Steps
    closer than this to the analytic frontier may go either way.
    """
    excess = lam - 1.0
    return ltv_value**3 * (1.0 + i) ** 2 * eta * excess * (1.0 + 0.75 * excess)
