"""Parameter sweeps over (model, v, i_max, depth ratio, policy).

Each cell carries the exact parameter tuple that produced it. A cell that
fails (invalid parameters, no frontier in range, exhausted market) records
the error and the sweep carries on.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .analysis import (
    DEFAULT_BRACKET,
    effective_frontier,
    finite_difference_dh,
    locate_frontier_empirical,
    market_for_depth,
    market_price,
)
from .engine import FixedFraction, run_spiral
from .errors import DomainError, LiquidationError
from .lending import IncentivePolicy, PolicyKind, Position, RiskParams
from .market_impact import penalty_factor
from .toxicity import boundary_safe_lltv

AXES = ("model", "v", "i_max", "depth_ratio", "policy")

CSV_COLUMNS = (
    "model",
    "v",
    "i_max",
    "depth_ratio",
    "policy",
    "lambda",
    "frontier_analytic",
    "frontier_empirical",
    "abs_error",
    "boundary_safe_analytic",
    "boundary_safe_empirical",
    "outcome",
    "steps",
    "final_health",
    "bad_debt",
    "error",
)


@dataclass(frozen=True)
class SweepSpec:
    axes: dict[str, list]
    c: float = 100.0
    eta: float = 1e-6
    tol: float = 1e-9
    seed: int = 0
    bracket: tuple[float, float] = DEFAULT_BRACKET
    spiral_fraction: float = 0.05
    spiral_max_steps: int = 10_000
    # initial spiral LTV is v * (1 + U(lo, hi)), drawn per cell
    spiral_ltv_jitter: tuple[float, float] = (0.01, 0.3)

    def __post_init__(self):
        missing = [name for name in AXES if name not in self.axes]
        if missing:
            raise DomainError(f"sweep axes missing: {', '.join(missing)}")
        for name in AXES:
            if len(self.axes[name]) == 0:
                raise DomainError(f"sweep axis {name!r} is empty")

    def combinations(self) -> list[dict[str, Any]]:
        values = [self.axes[name] for name in AXES]
        return [dict(zip(AXES, combo)) for combo in itertools.product(*values)]


@dataclass
class SweepResult:
    index: int
    params: dict[str, Any]
    lam: Optional[float] = None
    frontier_analytic: Optional[float] = None
    frontier_empirical: Optional[float] = None
    abs_error: Optional[float] = None
    boundary_safe_analytic: Optional[bool] = None
    boundary_safe_empirical: Optional[bool] = None
    outcome: Optional[str] = None
    steps: Optional[int] = None
    final_health: Optional[float] = None
    bad_debt: Optional[float] = None
    errors: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.errors


@dataclass
class SweepGrid:
    axes: dict[str, list]
    cells: list[SweepResult]


def _policy(kind: str, i_max: float) -> IncentivePolicy:
    return IncentivePolicy(PolicyKind(kind), i_max)


def run_cell(spec: SweepSpec, index: int, cell: dict[str, Any]) -> SweepResult:
    result = SweepResult(index=index, params=dict(cell))
    try:
        params = RiskParams(v=float(cell["v"]), i_max=float(cell["i_max"]))
        policy = _policy(cell["policy"], params.i_max)
        market = market_for_depth(float(cell["depth_ratio"]), spec.c, kind=cell["model"])
    except (DomainError, ValueError) as exc:
        result.errors.append(f"invalid: {exc}")
        return result

    lam = float(penalty_factor(market, spec.c))
    result.lam = lam
    result.frontier_analytic = effective_frontier(policy, params.v, lam)
    price = market_price(market)

    try:
        estimate = locate_frontier_empirical(
            params, policy, market, spec.c, eta=spec.eta, tol=spec.tol, bracket=spec.bracket
        )
        result.frontier_empirical = estimate.ltv_star_empirical
        result.abs_error = estimate.abs_error
    except LiquidationError as exc:
        result.errors.append(f"frontier: {exc}")

    try:
        boundary = Position.at_ltv(params.v, spec.c, price)
        dh = finite_difference_dh(
            boundary,
            params,
            IncentivePolicy.health_linked(params.i_max),
            market,
            spec.eta * boundary.q,
        )
        result.boundary_safe_analytic = params.v <= boundary_safe_lltv(lam)
        result.boundary_safe_empirical = dh >= 0.0
    except LiquidationError as exc:
        result.errors.append(f"boundary: {exc}")

    rng = np.random.default_rng([spec.seed, index])
    ltv0 = params.v * (1.0 + rng.uniform(*spec.spiral_ltv_jitter))
    try:
        trajectory = run_spiral(
            Position.at_ltv(ltv0, spec.c, price),
            params,
            policy,
            market,
            FixedFraction(spec.spiral_fraction),
            max_steps=spec.spiral_max_steps,
        )
        result.outcome = trajectory.outcome.value
        result.steps = len(trajectory.steps)
        result.final_health = trajectory.steps[-1].h_after
        result.bad_debt = trajectory.bad_debt
    except LiquidationError as exc:
        result.errors.append(f"spiral: {exc}")
    return result


def _run_indexed(args: tuple[SweepSpec, int, dict[str, Any]]) -> SweepResult:
    return run_cell(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepGrid:
    """Evaluate every cell of the grid; output order follows the axis product."""
    jobs = [(spec, index, cell) for index, cell in enumerate(spec.combinations())]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_indexed, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cells = [_run_indexed(job) for job in jobs]
    cells.sort(key=lambda r: r.index)
    return SweepGrid(axes={k: list(v) for k, v in spec.axes.items()}, cells=cells)


def format_value(value: Any) -> str:
    """CSV rendering: 12 significant digits for floats, lowercase booleans, blank for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    return str(value)


def sweep_rows(grid: SweepGrid) -> list[list[str]]:
    rows = []
    for cell in grid.cells:
        p = cell.params
        values = [
            p["model"],
            _as_float(p["v"]),
            _as_float(p["i_max"]),
            _as_float(p["depth_ratio"]),
            p["policy"],
            cell.lam,
            cell.frontier_analytic,
            cell.frontier_empirical,
            cell.abs_error,
            cell.boundary_safe_analytic,
            cell.boundary_safe_empirical,
            cell.outcome,
            cell.steps,
            cell.final_health,
            cell.bad_debt,
            "; ".join(cell.errors) or None,
        ]
        rows.append([format_value(v) for v in values])
    return rows


def _as_float(value: Any) -> Any:
    try:
        return float(value)
    except (TypeError, ValueError):
        return value


def sweep_csv(grid: SweepGrid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(sweep_rows(grid))
    return buf.getvalue()
