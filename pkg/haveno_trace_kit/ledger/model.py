"""haveno_trace_kit.ledger.model

Ledger records for both chains plus the trade metadata Haveno leaks.

Amounts are integers in atomic units (piconero, satoshi). Exchange rates are
`Fraction` satoshi per whole XMR. Nothing here is floating point.

The Monero side keeps only what the trade pattern needs: ring topology,
output counts, fee and block time. Key images, stealth addresses and RingCT
amounts are not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .errors import InvalidRecord

PICONERO_PER_XMR = 10**12
SATOSHI_PER_BTC = 10**8


class FeeTier(IntEnum):
    LOW = 0
    NORMAL = 1
    ELEVATED = 2
    HIGH = 3

    @classmethod
    def parse(cls, value: "str | int | FeeTier") -> "FeeTier":
        if isinstance(value, FeeTier):
            return value
        if isinstance(value, int):
            return cls(value)
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise InvalidRecord(f"unknown fee tier: {value!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


DEFAULT_FEE_TABLE: Dict[FeeTier, int] = {
    FeeTier.LOW: 20_000_000,
    FeeTier.NORMAL: 80_000_000,
    FeeTier.ELEVATED: 320_000_000,
    FeeTier.HIGH: 1_280_000_000,
}


@dataclass(frozen=True)
class FeeTable:
    """Corpus-level tier table: tier -> base fee per tx (piconero).

    A fee belongs to the highest tier whose base it reaches.
    """

    base_fees: Mapping[FeeTier, int] = field(default_factory=lambda: dict(DEFAULT_FEE_TABLE))

    def __post_init__(self):
        fees = [int(self.base_fees[t]) for t in sorted(self.base_fees)]
        if sorted(self.base_fees) != list(FeeTier):
            raise InvalidRecord("fee table must name every tier")
        if any(f <= 0 for f in fees) or any(b <= a for a, b in zip(fees, fees[1:])):
            raise InvalidRecord(f"fee table must be positive and strictly increasing: {fees}")

    def tier_of(self, fee: int) -> FeeTier:
        tier = FeeTier.LOW
        for t in FeeTier:
            if fee >= self.base_fees[t]:
                tier = t
        return tier

    def fee_for(self, tier: FeeTier, n_inputs: int, n_outputs: int) -> int:
        # weight grows with tx size; same tier + same shape -> same fee
        base = int(self.base_fees[tier])
        return base + (n_inputs + n_outputs) * base // 20

    def to_dict(self) -> Dict[str, int]:
        return {t.label: int(self.base_fees[t]) for t in FeeTier}

    @classmethod
    def from_dict(cls, d: Mapping[str, int]) -> "FeeTable":
        return cls({FeeTier.parse(k): int(v) for k, v in d.items()})


@dataclass(frozen=True)
class MoneroOutput:
    output_id: str
    creating_tx: str
    index_in_tx: int


@dataclass(frozen=True)
class MoneroInput:
    ring: Tuple[str, ...]

    def __post_init__(self):
        if not self.ring:
            raise InvalidRecord("ring must not be empty")
        if len(set(self.ring)) != len(self.ring):
            raise InvalidRecord(f"ring members must be distinct: {self.ring}")


@dataclass(frozen=True)
class MoneroTx:
    tx_id: str
    block_height: int
    inputs: Tuple[MoneroInput, ...]
    outputs: Tuple[MoneroOutput, ...]
    fee: int
    fee_tier: FeeTier

    def __post_init__(self):
        if not self.outputs:
            raise InvalidRecord(f"{self.tx_id}: no outputs")
        for i, out in enumerate(self.outputs):
            if out.creating_tx != self.tx_id or out.index_in_tx != i:
                raise InvalidRecord(f"{self.tx_id}: output {out.output_id} misplaced")
        if self.inputs:
            if self.fee <= 0:
                raise InvalidRecord(f"{self.tx_id}: fee must be > 0")
        elif self.fee != 0:
            # only coinbase-style txs have no inputs, and they pay no fee
            raise InvalidRecord(f"{self.tx_id}: tx without inputs must be coinbase (fee 0)")

    @property
    def is_coinbase(self) -> bool:
        return not self.inputs

    @property
    def output_ids(self) -> Tuple[str, ...]:
        return tuple(o.output_id for o in self.outputs)

    @classmethod
    def build(
        cls,
        tx_id: str,
        block_height: int,
        rings: Iterable[Iterable[str]],
        n_outputs: int,
        fee: int,
        fee_tier: "FeeTier | str",
    ) -> "MoneroTx":
        """Convenience constructor: output ids are `<tx_id>:<index>`."""
        outs = tuple(MoneroOutput(f"{tx_id}:{i}", tx_id, i) for i in range(n_outputs))
        ins = tuple(MoneroInput(tuple(r)) for r in rings)
        return cls(tx_id, int(block_height), ins, outs, int(fee), FeeTier.parse(fee_tier))


@dataclass(frozen=True)
class MoneroBlock:
    height: int
    timestamp: int
    tx_ids: Tuple[str, ...]

    def __post_init__(self):
        if self.height < 0:
            raise InvalidRecord(f"negative block height {self.height}")


@dataclass(frozen=True)
class BitcoinTx:
    tx_id: str
    timestamp: int
    amounts: Tuple[int, ...]

    def __post_init__(self):
        if not self.amounts or any(a <= 0 for a in self.amounts):
            raise InvalidRecord(f"{self.tx_id}: amounts must be non-empty and positive")


@dataclass(frozen=True)
class TradeStatRecord:
    trade_id: str
    published_xmr_amount: int
    exchange_rate: Fraction
    published_timestamp: int

    def __post_init__(self):
        if self.published_xmr_amount <= 0:
            raise InvalidRecord(f"{self.trade_id}: published amount must be > 0")
        if not isinstance(self.exchange_rate, Fraction) or self.exchange_rate <= 0:
            raise InvalidRecord(f"{self.trade_id}: exchange rate must be a positive Fraction")


@dataclass(frozen=True)
class TradeLogEvent:
    trade_id: str
    broadcast_timestamp: int


def xmr(value: "str | int | Fraction") -> int:
    """Whole-XMR value (e.g. "1.2345") to piconero, exactly."""
    pico = Fraction(value) * PICONERO_PER_XMR
    if pico.denominator != 1:
        raise InvalidRecord(f"{value!r} XMR is finer than one piconero")
    return int(pico)
