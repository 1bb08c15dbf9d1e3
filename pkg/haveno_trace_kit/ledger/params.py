"""haveno_trace_kit.ledger.params

Every tunable the heuristics use, with the defaults that reproduce the
published Haveno behaviour (24 h trade window, +-5 % amount obfuscation,
four-decimal amounts, [-1 min, +10 min] broadcast window).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import yaml

from .errors import ConfigError
from .model import FeeTier

BTC_AMOUNT_MODES = ("per_output", "per_total")


def parse_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ConfigError(f"floats are not exact; write {value!r} as a string like '5/100'")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational: {value!r}") from e


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_int(value: Any, name: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().lstrip("+-").isdigit():
        return int(value.strip())
    raise ConfigError(f"{name}: expected an integer, got {value!r}")


def parse_float(value: Any, name: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(str(value).strip())
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {value!r}") from None


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def parse_bool(value: Any, name: str) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ConfigError(f"{name}: expected true or false, got {value!r}")


def parse_choice(value: Any, name: str, choices: Tuple[str, ...]) -> str:
    if not isinstance(value, str) or value not in choices:
        raise ConfigError(f"{name} must be one of {choices}, got {value!r}")
    return value


@dataclass(frozen=True)
class HeuristicParams:
    lock_window: int = 24 * 3600
    neighbor_block_tolerance: int = 1
    correlate_before: int = 60
    correlate_after: int = 600
    obfuscation_fraction: Fraction = Fraction(5, 100)
    max_decimal_digits: int = 4
    divisibility_steps: Tuple[Fraction, ...] = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 10))
    required_fee_tier: FeeTier = FeeTier.ELEVATED
    require_equal_fee: bool = True
    symmetric_range: bool = False
    btc_amount_mode: str = "per_output"

    def __post_init__(self):
        for name in ("lock_window", "correlate_before", "correlate_after"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.neighbor_block_tolerance < 0:
            raise ConfigError("neighbor_block_tolerance must be >= 0")
        if not (0 < self.obfuscation_fraction < 1):
            raise ConfigError("obfuscation_fraction must lie in (0, 1)")
        if not (0 <= self.max_decimal_digits <= 12):
            raise ConfigError("max_decimal_digits must lie in [0, 12]")
        if not self.divisibility_steps or any(s <= 0 for s in self.divisibility_steps):
            raise ConfigError("divisibility_steps must be non-empty and positive")
        if self.btc_amount_mode not in BTC_AMOUNT_MODES:
            raise ConfigError(f"btc_amount_mode must be one of {BTC_AMOUNT_MODES}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any] | None) -> "HeuristicParams":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown heuristic params: {unknown}")
        kw: Dict[str, Any] = {}
        for k, v in d.items():
            if k == "obfuscation_fraction":
                kw[k] = parse_fraction(v)
            elif k == "divisibility_steps":
                if not isinstance(v, (list, tuple)):
                    raise ConfigError(f"divisibility_steps: expected a list, got {v!r}")
                # ordered set: keep first occurrence
                kw[k] = tuple(dict.fromkeys(parse_fraction(s) for s in v))
            elif k == "required_fee_tier":
                try:
                    kw[k] = FeeTier.parse(v)
                except (ValueError, TypeError) as e:
                    raise ConfigError(f"required_fee_tier: {e}") from e
            elif k in ("require_equal_fee", "symmetric_range"):
                kw[k] = parse_bool(v, k)
            elif k == "btc_amount_mode":
                kw[k] = parse_choice(v, k, BTC_AMOUNT_MODES)
            else:
                kw[k] = parse_int(v, k)
        return cls(**kw)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lock_window": self.lock_window,
            "neighbor_block_tolerance": self.neighbor_block_tolerance,
            "correlate_before": self.correlate_before,
            "correlate_after": self.correlate_after,
            "obfuscation_fraction": format_fraction(self.obfuscation_fraction),
            "max_decimal_digits": self.max_decimal_digits,
            "divisibility_steps": [format_fraction(s) for s in self.divisibility_steps],
            "required_fee_tier": self.required_fee_tier.label,
            "require_equal_fee": self.require_equal_fee,
            "symmetric_range": self.symmetric_range,
            "btc_amount_mode": self.btc_amount_mode,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def read_yaml_section(path: str | Path | None, section: str) -> Dict[str, Any]:
    """Load one section of a run config. A file without the section key is the section."""
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            cfg = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"bad yaml in {path}: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    if section in cfg:
        return dict(cfg[section] or {})
    if {"generator", "heuristics"} & set(cfg):
        return {}
    return cfg


def load_params(path: str | Path | None) -> HeuristicParams:
    return HeuristicParams.from_dict(read_yaml_section(path, "heuristics"))
