"""YAML configuration for scenarios, sweeps and verification runs.

Scenario layout::

    market:
      cpamm: {x: 1000, y: 1000}        # or  linear: {gamma: 0, sigma: 1, L: 1000}
    position: {s: 100, q: 95, price: 1.0}   # price optional for cpamm (pool spot)
    params: {v: 0.8, i_max: 0.05}
    policy: constant                    # or health_linked
    step_rule: {fraction: 0.05}         # or {amount: 2.5}
    max_steps: 100000
    seed: 0

Every violation raises ``ConfigError`` carrying the dotted field path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .engine import DEFAULT_MAX_STEPS, FixedAmount, FixedFraction, StepRule
from .errors import ConfigError
from .lending import IncentivePolicy, PolicyKind, Position, RiskParams
from .market_impact import CpAmmPool, LinearImpactModel, Market
from .sweep import AXES, SweepSpec

PRICE_MATCH_RTOL = 1e-12


def _mapping(raw: Any, path: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(path, f"expected a mapping, got {type(raw).__name__}")
    return raw


def _as_number(value: Any) -> Optional[float]:
    # YAML 1.1 reads exponent literals without a dot (1e-6) as strings
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None
    return None


def _number(raw: dict, key: str, path: str, *, default: Any = ..., low: Optional[float] = None,
            high: Optional[float] = None, low_open: bool = False, high_open: bool = False) -> float:
    where = f"{path}.{key}" if path else key
    if key not in raw:
        if default is ...:
            raise ConfigError(where, "required field missing")
        return default
    value = _as_number(raw[key])
    if value is None:
        raise ConfigError(where, f"expected a number, got {raw[key]!r}")
    if not math.isfinite(value):
        raise ConfigError(where, f"must be finite, got {value}")
    if low is not None and (value <= low if low_open else value < low):
        raise ConfigError(where, f"must be {'>' if low_open else '>='} {low}, got {value}")
    if high is not None and (value >= high if high_open else value > high):
        raise ConfigError(where, f"must be {'<' if high_open else '<='} {high}, got {value}")
    return value


def _integer(raw: dict, key: str, path: str, default: int, low: int) -> int:
    where = f"{path}.{key}" if path else key
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if value < low:
        raise ConfigError(where, f"must be >= {low}, got {value}")
    return value


def _check_keys(raw: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(raw) - allowed)
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(where, "unknown field")


@dataclass(frozen=True)
class ScenarioConfig:
    market_kind: str
    market: dict[str, float]
    position: dict[str, float]
    v: float
    i_max: float
    policy: str
    step_kind: str
    step_value: float
    max_steps: int = DEFAULT_MAX_STEPS
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: Any) -> "ScenarioConfig":
        raw = _mapping(raw, "<root>")
        _check_keys(raw, {"market", "position", "params", "policy", "step_rule", "max_steps", "seed"}, "")

        market_raw = _mapping(raw.get("market"), "market")
        if len(market_raw) != 1 or next(iter(market_raw)) not in ("cpamm", "linear"):
            raise ConfigError("market", "expected exactly one of 'cpamm' or 'linear'")
        kind = next(iter(market_raw))
        body = _mapping(market_raw[kind], f"market.{kind}")
        mpath = f"market.{kind}"
        if kind == "cpamm":
            _check_keys(body, {"x", "y"}, mpath)
            market = {
                "x": _number(body, "x", mpath, low=0.0, low_open=True),
                "y": _number(body, "y", mpath, low=0.0, low_open=True),
            }
        else:
            _check_keys(body, {"gamma", "sigma", "L"}, mpath)
            market = {
                "gamma": _number(body, "gamma", mpath, default=0.0, low=0.0, high=1.0, high_open=True),
                "sigma": _number(body, "sigma", mpath, low=0.0),
                "L": _number(body, "L", mpath, low=0.0, low_open=True),
            }

        pos = _mapping(raw.get("position"), "position")
        _check_keys(pos, {"s", "q", "price"}, "position")
        position = {
            "s": _number(pos, "s", "position", low=0.0),
            "q": _number(pos, "q", "position", low=0.0),
        }
        spot = market["y"] / market["x"] if kind == "cpamm" else None
        if "price" in pos:
            price = _number(pos, "price", "position", low=0.0, low_open=True)
            if spot is not None and abs(price - spot) > PRICE_MATCH_RTOL * spot:
                raise ConfigError("position.price", f"must equal the pool spot price y/x = {spot!r}")
            position["price"] = price
        elif spot is None:
            raise ConfigError("position.price", "required field missing for a linear market")
        else:
            position["price"] = spot

        params = _mapping(raw.get("params"), "params")
        _check_keys(params, {"v", "i_max"}, "params")
        v = _number(params, "v", "params", low=0.0, high=1.0, low_open=True, high_open=True)
        i_max = _number(params, "i_max", "params", default=0.0, low=0.0)

        policy = raw.get("policy", "constant")
        if policy not in {k.value for k in PolicyKind}:
            raise ConfigError("policy", f"expected 'constant' or 'health_linked', got {policy!r}")

        step = _mapping(raw.get("step_rule", {"fraction": 0.05}), "step_rule")
        if len(step) != 1 or next(iter(step)) not in ("fraction", "amount"):
            raise ConfigError("step_rule", "expected exactly one of 'fraction' or 'amount'")
        step_kind = next(iter(step))
        if step_kind == "fraction":
            step_value = _number(step, "fraction", "step_rule", low=0.0, high=1.0, low_open=True)
        else:
            step_value = _number(step, "amount", "step_rule", low=0.0, low_open=True)

        return cls(
            market_kind=kind,
            market=market,
            position=position,
            v=v,
            i_max=i_max,
            policy=policy,
            step_kind=step_kind,
            step_value=step_value,
            max_steps=_integer(raw, "max_steps", "", DEFAULT_MAX_STEPS, 1),
            seed=_integer(raw, "seed", "", 0, 0),
        )

    def to_dict(self) -> dict:
        return {
            "market": {self.market_kind: dict(self.market)},
            "position": dict(self.position),
            "params": {"v": self.v, "i_max": self.i_max},
            "policy": self.policy,
            "step_rule": {self.step_kind: self.step_value},
            "max_steps": self.max_steps,
            "seed": self.seed,
        }

    def build_market(self) -> Market:
        if self.market_kind == "cpamm":
            return CpAmmPool(x=self.market["x"], y=self.market["y"])
        return LinearImpactModel(**self.market)

    def build_position(self) -> Position:
        return Position(s=self.position["s"], q=self.position["q"], mark_price=self.position["price"])

    def build_params(self) -> RiskParams:
        return RiskParams(v=self.v, i_max=self.i_max)

    def build_policy(self) -> IncentivePolicy:
        return IncentivePolicy(PolicyKind(self.policy), self.i_max)

    def build_step_rule(self) -> StepRule:
        if self.step_kind == "fraction":
            return FixedFraction(self.step_value)
        return FixedAmount(self.step_value)


def _float_list(raw: dict, key: str, path: str, default: Optional[list] = None) -> list:
    where = f"{path}.{key}" if path else key
    value = raw.get(key, default)
    if not isinstance(value, list):
        raise ConfigError(where, f"expected a list, got {value!r}")
    if not value:
        raise ConfigError(where, "empty list")
    out = []
    for n, item in enumerate(value):
        number = _as_number(item)
        if number is None:
            raise ConfigError(f"{where}[{n}]", f"expected a number, got {item!r}")
        out.append(number)
    return out


def _pair(raw: dict, key: str, path: str, default: tuple) -> tuple[float, float]:
    values = _float_list(raw, key, path, list(default))
    if len(values) != 2 or not values[0] < values[1]:
        raise ConfigError(f"{path}.{key}" if path else key, "expected [low, high] with low < high")
    return values[0], values[1]


def sweep_spec_from_dict(raw: Any) -> SweepSpec:
    """Sweep layout: ``axes`` (model, v, i_max, depth_ratio, policy) plus run settings.

    Axis values are not range-checked here; an out-of-range value marks only
    its own cells invalid.
    """
    raw = _mapping(raw, "<root>")
    _check_keys(raw, {"axes", "c", "eta", "tol", "seed", "bracket", "spiral"}, "")
    axes_raw = _mapping(raw.get("axes"), "axes")
    _check_keys(axes_raw, set(AXES), "axes")
    defaults = {"model": ["cpamm"], "policy": ["constant"]}
    axes = {}
    for name in AXES:
        value = axes_raw.get(name, defaults.get(name))
        if value is None:
            raise ConfigError(f"axes.{name}", "required field missing")
        if not isinstance(value, list):
            raise ConfigError(f"axes.{name}", f"expected a list, got {value!r}")
        if not value:
            raise ConfigError(f"axes.{name}", "empty list")
        axes[name] = list(value)
    spiral = _mapping(raw.get("spiral", {}), "spiral")
    _check_keys(spiral, {"fraction", "max_steps", "ltv_jitter"}, "spiral")
    return SweepSpec(
        axes=axes,
        c=_number(raw, "c", "", default=100.0, low=0.0, low_open=True),
        eta=_number(raw, "eta", "", default=1e-6, low=0.0, high=1.0, low_open=True),
        tol=_number(raw, "tol", "", default=1e-9, low=0.0, low_open=True),
        seed=_integer(raw, "seed", "", 0, 0),
        bracket=_pair(raw, "bracket", "", (0.05, 3.0)),
        spiral_fraction=_number(spiral, "fraction", "spiral", default=0.05, low=0.0, high=1.0, low_open=True),
        spiral_max_steps=_integer(spiral, "max_steps", "spiral", 10_000, 1),
        spiral_ltv_jitter=_pair(spiral, "ltv_jitter", "spiral", (0.01, 0.3)),
    )


@dataclass(frozen=True)
class VerifyConfig:
    eta: float = 1e-6
    tol: float = 1e-9
    seed: int = 20240611
    infinite_depth_incentives: tuple = (0.01, 0.05, 0.1)
    finite_depth_reserves: tuple = (400.0, 1000.0, 4000.0)
    finite_depth_incentives: tuple = (0.0, 0.05, 0.1)
    dynamic_v: tuple = (0.6, 0.7, 0.8)
    dynamic_i_max: tuple = (0.0, 0.05, 0.1)
    dynamic_lambda: tuple = (1.05, 1.1, 1.25)
    boundary_lambdas: tuple = (1.0, 1.1, 1.25, 1.5)
    boundary_v_range: tuple = (0.5, 0.99)
    boundary_v_step: float = 0.01
    convergence_etas: tuple = (1e-2, 1e-3, 1e-4, 1e-5)
    n_states: int = 10_000
    n_swaps: int = 10_000
    n_spirals: int = 100
    perturb_lambda: float = 0.0

    @classmethod
    def from_dict(cls, raw: Any) -> "VerifyConfig":
        raw = _mapping(raw, "<root>")
        _check_keys(raw, {"verify", "eta", "tol", "seed"}, "")
        body = _mapping(raw.get("verify", {}), "verify")
        _check_keys(body, set(cls.__dataclass_fields__) - {"eta", "tol", "seed", "perturb_lambda"}, "verify")
        d = cls()
        kwargs: dict[str, Any] = {
            "eta": _number(raw, "eta", "", default=d.eta, low=0.0, high=1.0, low_open=True),
            "tol": _number(raw, "tol", "", default=d.tol, low=0.0, low_open=True),
            "seed": _integer(raw, "seed", "", d.seed, 0),
        }
        for name in (
            "infinite_depth_incentives",
            "finite_depth_reserves",
            "finite_depth_incentives",
            "dynamic_v",
            "dynamic_i_max",
            "dynamic_lambda",
            "boundary_lambdas",
            "convergence_etas",
        ):
            if name in body:
                kwargs[name] = tuple(_float_list(body, name, "verify"))
        if "boundary_v_range" in body:
            kwargs["boundary_v_range"] = _pair(body, "boundary_v_range", "verify", d.boundary_v_range)
        if "boundary_v_step" in body:
            kwargs["boundary_v_step"] = _number(body, "boundary_v_step", "verify", low=0.0, low_open=True)
        for name in ("n_states", "n_swaps", "n_spirals"):
            if name in body:
                kwargs[name] = _integer(body, name, "verify", getattr(d, name), 1)
        return cls(**kwargs)


def read_yaml(path: Union[str, Path]) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from exc


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    return ScenarioConfig.from_dict(read_yaml(path))


def dump_scenario(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
