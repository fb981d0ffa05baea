"""Command-line front end.

    liqtox frontier --config scenario.yaml
    liqtox simulate --config scenario.yaml --out steps.csv
    liqtox sweep    --config grid.yaml --out sweep.csv --seed 7
    liqtox verify   [--config verify.yaml]

Exit codes: 0 success, 1 verification failure, 2 configuration/usage error,
3 position not liquidatable.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from typing import Any, Optional, Sequence

from . import config as cfgmod
from .engine import SpiralTrajectory, run_spiral
from .errors import ConfigError, DomainError, LiquidationError, NotLiquidatable
from .lending import health, is_liquidatable, ltv
from .market_impact import penalty_factor
from .sweep import CSV_COLUMNS, format_value, run_sweep, sweep_csv, sweep_rows
from .toxicity import boundary_safe_lltv, classify, frontier_constant_bonus, frontier_dynamic_bonus

log = logging.getLogger("liqtox")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NOT_LIQUIDATABLE = 3

STEP_COLUMNS = (
    "step",
    "da",
    "ds",
    "proceeds",
    "liquidator_profit",
    "i_applied",
    "h_before",
    "h_after",
    "ltv_before",
    "ltv_after",
    "lambda_before",
    "price_after",
    "s_after",
    "q_after",
    "toxic",
)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[format_value(v) for v in row] for row in rows])
    return buf.getvalue()


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def _records_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    return "".join(
        json.dumps({k: _json_value(v) for k, v in zip(header, row)}) + "\n" for row in rows
    )


def _render(header, rows, fmt: str) -> str:
    return _csv_text(header, rows) if fmt == "csv" else _records_text(header, rows)


def _load_scenario(args) -> cfgmod.ScenarioConfig:
    if not args.config:
        raise ConfigError("--config", "a scenario file is required")
    scenario = cfgmod.load_scenario(args.config)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    return scenario


def frontier_report(scenario: cfgmod.ScenarioConfig) -> dict[str, Any]:
    market = scenario.build_market()
    position = scenario.build_position()
    params = scenario.build_params()
    c = position.c
    if c == 0.0:
        log.warning("collateral value is zero; penalty factor reported as 1")
    lam = float(penalty_factor(market, c))
    report: dict[str, Any] = {
        "collateral_value": c,
        "lambda": lam,
        "frontier_constant": frontier_constant_bonus(params.i_max, lam),
        "frontier_health_linked": frontier_dynamic_bonus(params.i_max, params.v, lam),
        "max_safe_lltv": boundary_safe_lltv(lam),
        "boundary_safe": params.v <= boundary_safe_lltv(lam),
        "ltv": None,
        "health": None,
        "toxic": None,
    }
    if position.q > 0.0 and c > 0.0:
        report["ltv"] = ltv(position)
        report["health"] = health(position, params)
        if is_liquidatable(position, params):
            report["toxic"] = classify(position, params, scenario.build_policy(), lam).toxic
    return report


def cmd_frontier(args) -> int:
    report = frontier_report(_load_scenario(args))
    _emit(_render(list(report), [list(report.values())], args.format), args.out)
    return EXIT_OK


def trajectory_rows(trajectory: SpiralTrajectory, scenario: cfgmod.ScenarioConfig) -> list[list[Any]]:
    params = scenario.build_params()
    policy = scenario.build_policy()
    rows = []
    for n, step in enumerate(trajectory.steps, start=1):
        try:
            toxic: Optional[bool] = classify(step.position_before, params, policy, step.lambda_before).toxic
        except LiquidationError:
            toxic = None
        after = step.position_after
        rows.append([
            n, step.da, step.ds, step.proceeds, step.liquidator_profit, step.i_applied,
            step.h_before, step.h_after, step.ltv_before, step.ltv_after, step.lambda_before,
            after.mark_price, after.s, after.q, toxic,
        ])
    return rows


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    try:
        trajectory = run_spiral(
            scenario.build_position(),
            scenario.build_params(),
            scenario.build_policy(),
            scenario.build_market(),
            scenario.build_step_rule(),
            max_steps=scenario.max_steps,
        )
    except NotLiquidatable as exc:
        print(f"not liquidatable: {exc}", file=sys.stderr)
        return EXIT_NOT_LIQUIDATABLE
    _emit(_render(STEP_COLUMNS, trajectory_rows(trajectory, scenario), args.format), args.out)
    final = trajectory.steps[-1]
    summary = (
        f"outcome={trajectory.outcome.value} steps={len(trajectory.steps)} "
        f"final_health={format_value(final.h_after)} bad_debt={format_value(trajectory.bad_debt)}"
    )
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("--config", "a grid file is required")
    spec = cfgmod.sweep_spec_from_dict(cfgmod.read_yaml(args.config))
    overrides = {k: getattr(args, k) for k in ("seed", "eta", "tol") if getattr(args, k) is not None}
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    grid = run_sweep(spec, workers=args.workers)
    if args.format == "csv":
        text = sweep_csv(grid)
    else:
        text = _records_text(CSV_COLUMNS, sweep_rows(grid))
    _emit(text, args.out)
    bad = sum(not cell.valid for cell in grid.cells)
    log.info("sweep: %d cells, %d with errors", len(grid.cells), bad)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_all

    cfg = cfgmod.VerifyConfig.from_dict(cfgmod.read_yaml(args.config)) if args.config else cfgmod.VerifyConfig()
    overrides = {k: getattr(args, k) for k in ("seed", "eta", "tol") if getattr(args, k) is not None}
    overrides["perturb_lambda"] = args.perturb_lambda
    cfg = dataclasses.replace(cfg, **overrides)
    results = run_all(cfg)
    lines = [r.line() for r in results]
    passed = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liqtox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt: bool = True) -> None:
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--eta", type=float, help="oracle step fraction of current debt")
        p.add_argument("--tol", type=float, help="bisection tolerance on LTV")
        p.add_argument("--seed", type=int)
        if fmt:
            p.add_argument("--format", choices=("csv", "records"), default="csv")

    p = sub.add_parser("frontier", help="penalty factor, frontiers and max safe LLTV")
    common(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("simulate", help="run a liquidation spiral and write per-step output")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    common(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the property suites")
    common(p, fmt=False)
    p.add_argument("--perturb-lambda", type=float, default=0.0,
                   help="relative bump of the analytic penalty factor (sensitivity check)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    for name in ("eta", "tol"):
        value = getattr(args, name, None)
        if value is not None and not value > 0.0:
            print(f"config error: --{name}: must be > 0", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
