"""haveno_trace_kit.synth.config

Generator knobs. Defaults give a desk-scale corpus of roughly 54k background
Monero txs (about 4 % of them 2-in/2-out) with 220 planted trades, 20 of
them disputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

from ..ledger.errors import ConfigError, ConfigInfeasible
from ..ledger.model import FeeTable, FeeTier
from ..ledger.params import (
    format_fraction,
    parse_bool,
    parse_choice,
    parse_float,
    parse_fraction,
    parse_int,
    read_yaml_section,
)

SHAPES = ("1in1out", "1in2out", "2in2out", "multi_in")
AMOUNT_PROFILES = ("even", "four_decimal", "free")
TRADE_LOG_MODES = ("immediate", "daily_batch")
PAYOUT_DELAYS = ("log_uniform", "uniform")


def _weights(d: Mapping[str, Any], allowed: Tuple[str, ...], name: str) -> Dict[str, float]:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"{name}: unknown keys {unknown}")
    w = {k: float(d.get(k, 0.0)) for k in allowed}
    if any(v < 0 for v in w.values()) or not math.isclose(sum(w.values()), 1.0, abs_tol=1e-9):
        raise ConfigError(f"{name}: weights must be >= 0 and sum to 1, got {w}")
    return w


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_blocks: int = 3000
    block_time_s: int = 120
    start_time: int = 1_737_417_600
    background_tx_rate: float = 18.0
    background_shapes: Dict[str, float] = field(
        default_factory=lambda: {"1in1out": 0.10, "1in2out": 0.70, "2in2out": 0.04, "multi_in": 0.16}
    )
    background_fee_tiers: Dict[str, float] = field(
        default_factory=lambda: {"low": 0.80, "normal": 0.12, "elevated": 0.06, "high": 0.02}
    )
    fee_table: FeeTable = field(default_factory=FeeTable)
    lock_fee_tier: FeeTier = FeeTier.ELEVATED
    uniform_fee_tier: bool = False
    ring_size: int = 16
    decoy_window: int = 1000
    premine_outputs: int = 256
    n_planted_trades: int = 220
    fraction_disputed: Fraction = Fraction(1, 11)
    split_lock_fraction: float = 0.1
    trade_window_s: int = 24 * 3600
    amount_profile: Dict[str, float] = field(default_factory=lambda: {"even": 0.8, "four_decimal": 0.1, "free": 0.1})
    divisibility_steps: Tuple[Fraction, ...] = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 10))
    max_decimal_digits: int = 4
    min_trade_xmr: Fraction = Fraction(1, 10)
    max_trade_xmr: Fraction = Fraction(20)
    rate_schedule: Tuple[Tuple[int, Fraction], ...] = ((0, Fraction(300_000)), (172_800, Fraction(310_000)))
    btc_background_rate: float = 60.0
    btc_round_fraction: float = 0.05
    btc_round_unit_sat: int = 100_000
    obfuscation_fraction: Fraction = Fraction(5, 100)
    stat_shift_max: int = 24 * 3600
    trade_log_mode: str = "immediate"
    payout_delay: str = "log_uniform"

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.n_blocks < 1 or self.block_time_s < 2:
            raise ConfigError("n_blocks must be >= 1 and block_time_s >= 2")
        if self.ring_size < 2:
            raise ConfigError("ring_size must be >= 2")
        if self.decoy_window < self.ring_size:
            raise ConfigError("decoy_window must be >= ring_size")
        if self.premine_outputs < self.ring_size:
            raise ConfigError("premine_outputs must be >= ring_size")
        if self.n_planted_trades < 0 or self.background_tx_rate < 0 or self.btc_background_rate < 0:
            raise ConfigError("counts and rates must be >= 0")
        if not (0 <= self.fraction_disputed <= 1):
            raise ConfigError("fraction_disputed must lie in [0, 1]")
        if not (0 <= self.split_lock_fraction <= 1) or not (0 <= self.btc_round_fraction <= 1):
            raise ConfigError("split_lock_fraction and btc_round_fraction must lie in [0, 1]")
        if not (0 <= self.obfuscation_fraction < 1):
            raise ConfigError("obfuscation_fraction must lie in [0, 1)")
        if not (0 < self.min_trade_xmr < self.max_trade_xmr):
            raise ConfigError("need 0 < min_trade_xmr < max_trade_xmr")
        if self.trade_log_mode not in TRADE_LOG_MODES:
            raise ConfigError(f"trade_log_mode must be one of {TRADE_LOG_MODES}")
        if self.payout_delay not in PAYOUT_DELAYS:
            raise ConfigError(f"payout_delay must be one of {PAYOUT_DELAYS}")
        if self.stat_shift_max < 0 or self.trade_window_s <= 0:
            raise ConfigError("stat_shift_max must be >= 0 and trade_window_s > 0")
        if not self.divisibility_steps or any(s <= 0 for s in self.divisibility_steps):
            raise ConfigError("divisibility_steps must be non-empty and positive")
        _weights(self.background_shapes, SHAPES, "background_shapes")
        _weights(self.background_fee_tiers, tuple(t.label for t in FeeTier), "background_fee_tiers")
        _weights(self.amount_profile, AMOUNT_PROFILES, "amount_profile")
        for tier in FeeTier:
            # the widest background shape (6 in, 2 out) must stay inside its tier
            if self.fee_table.tier_of(self.fee_table.fee_for(tier, 6, 2)) != tier:
                raise ConfigError(f"fee_table: size-scaled {tier.label} fees spill into the next tier")

        if not self.rate_schedule or self.rate_schedule[0][0] != 0:
            raise ConfigError("rate_schedule must start at offset 0")
        offsets = [at for at, _ in self.rate_schedule]
        if offsets != sorted(set(offsets)):
            raise ConfigError("rate_schedule offsets must be strictly increasing")
        grid = Fraction(1, 10**self.max_decimal_digits)
        for s in self.divisibility_steps:
            if (s / grid).denominator != 1:
                raise ConfigInfeasible(f"divisibility step {s} is finer than the {self.max_decimal_digits}-decimal amount grid")
        for at, rate in self.rate_schedule:
            # BTC amount = xmr * rate must be whole satoshi for every grid amount
            if rate <= 0 or (rate * grid).denominator != 1:
                raise ConfigInfeasible(
                    f"rate {rate} at +{at}s: must be a positive multiple of {10**self.max_decimal_digits} sat/XMR "
                    "so payments on the XMR amount grid are whole satoshi"
                )
        if self.n_blocks <= self.lock_horizon_blocks:
            raise ConfigInfeasible(
                f"n_blocks={self.n_blocks} must exceed the lock horizon of {self.lock_horizon_blocks} blocks"
            )

    @property
    def lock_horizon_blocks(self) -> int:
        return math.ceil(self.trade_window_s / self.block_time_s)

    @property
    def n_disputed(self) -> int:
        return int(round(self.fraction_disputed * self.n_planted_trades))

    def rate_at(self, timestamp: int) -> Fraction:
        offset = timestamp - self.start_time
        rate = self.rate_schedule[0][1]
        for at, r in self.rate_schedule:
            if at <= offset:
                rate = r
        return rate

    @classmethod
    def from_dict(cls, d: Mapping[str, Any] | None) -> "GenConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown generator keys: {unknown}")
        kw: Dict[str, Any] = {}
        for k, v in d.items():
            try:
                kw[k] = _parse_value(k, v)
            except (AttributeError, KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"generator.{k}: cannot read {v!r} ({e})") from e
        return cls(**kw)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "n_blocks": self.n_blocks,
            "block_time_s": self.block_time_s,
            "start_time": self.start_time,
            "background_tx_rate": self.background_tx_rate,
            "background_shapes": dict(self.background_shapes),
            "background_fee_tiers": dict(self.background_fee_tiers),
            "fee_table": self.fee_table.to_dict(),
            "lock_fee_tier": self.lock_fee_tier.label,
            "uniform_fee_tier": self.uniform_fee_tier,
            "ring_size": self.ring_size,
            "decoy_window": self.decoy_window,
            "premine_outputs": self.premine_outputs,
            "n_planted_trades": self.n_planted_trades,
            "fraction_disputed": format_fraction(self.fraction_disputed),
            "split_lock_fraction": self.split_lock_fraction,
            "trade_window_s": self.trade_window_s,
            "amount_profile": dict(self.amount_profile),
            "divisibility_steps": [format_fraction(s) for s in self.divisibility_steps],
            "max_decimal_digits": self.max_decimal_digits,
            "min_trade_xmr": format_fraction(self.min_trade_xmr),
            "max_trade_xmr": format_fraction(self.max_trade_xmr),
            "rate_schedule": [{"at_s": at, "rate": format_fraction(r)} for at, r in self.rate_schedule],
            "btc_background_rate": self.btc_background_rate,
            "btc_round_fraction": self.btc_round_fraction,
            "btc_round_unit_sat": self.btc_round_unit_sat,
            "obfuscation_fraction": format_fraction(self.obfuscation_fraction),
            "stat_shift_max": self.stat_shift_max,
            "trade_log_mode": self.trade_log_mode,
            "payout_delay": self.payout_delay,
        }


def _parse_value(k: str, v: Any) -> Any:
    if k in ("fraction_disputed", "min_trade_xmr", "max_trade_xmr", "obfuscation_fraction"):
        return parse_fraction(v)
    if k == "divisibility_steps":
        return tuple(dict.fromkeys(parse_fraction(s) for s in _as_list(v, k)))
    if k == "rate_schedule":
        return tuple((parse_int(e["at_s"], "rate_schedule.at_s"), parse_fraction(e["rate"])) for e in _as_list(v, k))
    if k == "fee_table":
        return FeeTable.from_dict({str(t): parse_int(f, f"fee_table.{t}") for t, f in (v or {}).items()})
    if k == "lock_fee_tier":
        return FeeTier.parse(v)
    if k in ("background_shapes", "background_fee_tiers", "amount_profile"):
        if not isinstance(v, Mapping):
            raise ConfigError(f"{k}: expected a mapping of weights, got {v!r}")
        return {str(kk): parse_float(vv, f"{k}.{kk}") for kk, vv in v.items()}
    if k in ("background_tx_rate", "btc_background_rate", "split_lock_fraction", "btc_round_fraction"):
        return parse_float(v, k)
    if k == "uniform_fee_tier":
        return parse_bool(v, k)
    if k == "trade_log_mode":
        return parse_choice(v, k, TRADE_LOG_MODES)
    if k == "payout_delay":
        return parse_choice(v, k, PAYOUT_DELAYS)
    return parse_int(v, k)


def _as_list(v: Any, name: str) -> list:
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{name}: expected a list, got {v!r}")
    return list(v)


def load_gen_config(path: str | Path | None, **overrides: Any) -> GenConfig:
    d = read_yaml_section(path, "generator")
    d.update({k: v for k, v in overrides.items() if v is not None})
    return GenConfig.from_dict(d)
