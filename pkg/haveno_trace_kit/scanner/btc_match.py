"""haveno_trace_kit.scanner.btc_match

Reverse the trade-statistics obfuscation and shortlist Bitcoin payments.

Published XMR amounts are the true amount times a factor in [1-d, 1+d], but
the published exchange rate is exact. So for every BTC output inside the
swap's time frame we compute the implied XMR amount and keep it when

  1. it lies in the exact preimage range of the published amount,
  2. it has at most `max_decimal_digits` decimals (the trading UI limit),

and flag it when it is an "even" amount (multiple of a divisibility step).
All predicates use exact rationals; there is no tolerance anywhere.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..ledger.errors import InvalidRate, MissingStat
from ..ledger.model import PICONERO_PER_XMR, BitcoinTx, TradeStatRecord
from ..ledger.params import HeuristicParams
from .correlate import TradeSwapMatch

logger = logging.getLogger(__name__)


# --- exact amount predicates ---

def true_amount_range(stat: TradeStatRecord, params: HeuristicParams) -> Tuple[int, int]:
    """Piconero interval that can have produced the published amount.

    Exact preimage of multiplicative obfuscation: [p/(1+d), p/(1-d)], rounded
    outward. `symmetric_range` switches to [p(1-d), p(1+d)] for comparison.
    """
    p = Fraction(stat.published_xmr_amount)
    d = params.obfuscation_fraction
    if params.symmetric_range:
        lo, hi = p * (1 - d), p * (1 + d)
    else:
        lo, hi = p / (1 + d), p / (1 - d)
    return floor(lo), ceil(hi)


def implied_xmr(amount_sat: int, rate: Fraction) -> Fraction:
    """XMR amount a BTC payment stands for at `rate` satoshi per XMR."""
    rate = Fraction(rate)
    if rate <= 0:
        raise InvalidRate(f"exchange rate must be > 0, got {rate}")
    return Fraction(amount_sat) / rate


def has_max_decimals(x: Fraction, d: int) -> bool:
    if x <= 0:
        raise ValueError(f"amount must be > 0, got {x}")
    return (Fraction(x) * 10**d).denominator == 1


def is_even_amount(x: Fraction, steps: Iterable[Fraction]) -> bool:
    if x <= 0:
        raise ValueError(f"amount must be > 0, got {x}")
    return any((Fraction(x) / s).denominator == 1 for s in steps)


# --- candidate sets ---

@dataclass(frozen=True)
class BtcCandidate:
    btc_tx_id: str
    amount_sat: int
    implied_xmr_piconero: int
    timestamp: int
    distance: int  # |implied - published| in piconero
    in_range: bool = True
    decimals: bool = True
    divisible: bool = False

    def to_dict(self) -> Dict:
        return {
            "btc_tx_id": self.btc_tx_id,
            "amount_sat": self.amount_sat,
            "implied_xmr_piconero": self.implied_xmr_piconero,
            "timestamp": self.timestamp,
            "distance": self.distance,
            "filters": {"range": self.in_range, "decimals": self.decimals, "divisibility": self.divisible},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BtcCandidate":
        f = d.get("filters", {})
        return cls(
            d["btc_tx_id"], int(d["amount_sat"]), int(d["implied_xmr_piconero"]), int(d["timestamp"]),
            int(d["distance"]), bool(f.get("range", True)), bool(f.get("decimals", True)), bool(f.get("divisibility", False)),
        )


@dataclass(frozen=True)
class BtcCandidateSet:
    trade_id: str
    spend_tx_ids: Tuple[str, ...]
    published_xmr_amount: int
    amount_range: Tuple[int, int]
    windows: Tuple[Tuple[int, int], ...]
    candidates: Tuple[BtcCandidate, ...]
    n_in_window: int = 0
    n_in_range: int = 0

    @property
    def n_decimals(self) -> int:
        return len(self.candidates)

    @property
    def divisible_candidates(self) -> Tuple[BtcCandidate, ...]:
        return tuple(c for c in self.candidates if c.divisible)

    def to_dict(self) -> Dict:
        return {
            "trade_id": self.trade_id,
            "spend_tx_ids": list(self.spend_tx_ids),
            "published_xmr_amount": self.published_xmr_amount,
            "amount_range": list(self.amount_range),
            "windows": [list(w) for w in self.windows],
            "candidates": [c.to_dict() for c in self.candidates],
            "counts": {
                "in_window": self.n_in_window,
                "in_range": self.n_in_range,
                "decimals": self.n_decimals,
                "divisibility": len(self.divisible_candidates),
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BtcCandidateSet":
        counts = d.get("counts", {})
        return cls(
            trade_id=d["trade_id"],
            spend_tx_ids=tuple(d["spend_tx_ids"]),
            published_xmr_amount=int(d["published_xmr_amount"]),
            amount_range=(int(d["amount_range"][0]), int(d["amount_range"][1])),
            windows=tuple((int(a), int(b)) for a, b in d["windows"]),
            candidates=tuple(BtcCandidate.from_dict(c) for c in d["candidates"]),
            n_in_window=int(counts.get("in_window", 0)),
            n_in_range=int(counts.get("in_range", 0)),
        )


class BtcTimeline:
    """Bitcoin txs sorted by time for window queries."""

    def __init__(self, txs: Iterable[BitcoinTx]):
        self._txs: List[BitcoinTx] = sorted(txs, key=lambda t: (t.timestamp, t.tx_id))
        self._ts: List[int] = [t.timestamp for t in self._txs]

    def __len__(self) -> int:
        return len(self._txs)

    def between(self, t_start: int, t_end: int) -> Sequence[BitcoinTx]:
        lo = bisect.bisect_left(self._ts, t_start)
        hi = bisect.bisect_right(self._ts, t_end)
        return self._txs[lo:hi]


def swap_windows(match: TradeSwapMatch) -> Tuple[Tuple[int, int], ...]:
    """Union of [earliest lock time, spend time] over the match's swaps, merged."""
    spans = sorted((s.lock_timestamp, s.spend_timestamp) for s in match.swaps)
    merged: List[List[int]] = []
    for a, b in spans:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def _amounts_to_test(tx: BitcoinTx, params: HeuristicParams) -> Tuple[int, ...]:
    if params.btc_amount_mode == "per_total":
        return (sum(tx.amounts),)
    return tx.amounts


def match_btc(
    match: TradeSwapMatch,
    stat: Optional[TradeStatRecord],
    btc: "Sequence[BitcoinTx] | BtcTimeline",
    params: HeuristicParams,
) -> BtcCandidateSet:
    if stat is None or stat.trade_id != match.trade_id:
        raise MissingStat(f"no trade statistics record for {match.trade_id}")
    timeline = btc if isinstance(btc, BtcTimeline) else BtcTimeline(btc)

    rate = stat.exchange_rate
    if rate <= 0:
        raise InvalidRate(f"{stat.trade_id}: exchange rate must be > 0")
    lo, hi = true_amount_range(stat, params)
    published = stat.published_xmr_amount
    # implied piconero = sat * 1e12 * q / p; compare without building Fractions
    p, q = rate.numerator, rate.denominator
    lo_lhs, hi_lhs = lo * p, hi * p
    steps = params.divisibility_steps

    windows = swap_windows(match)
    n_window = n_range = 0
    found: List[BtcCandidate] = []
    for t0, t1 in windows:
        for tx in timeline.between(t0, t1):
            n_window += 1
            best: Optional[BtcCandidate] = None
            any_in_range = False
            for amount in _amounts_to_test(tx, params):
                scaled = amount * PICONERO_PER_XMR * q
                if not (lo_lhs <= scaled <= hi_lhs):
                    continue
                any_in_range = True
                x = implied_xmr(amount, rate)
                if not has_max_decimals(x, params.max_decimal_digits):
                    continue
                pico = int(x * PICONERO_PER_XMR)
                cand = BtcCandidate(
                    btc_tx_id=tx.tx_id,
                    amount_sat=amount,
                    implied_xmr_piconero=pico,
                    timestamp=tx.timestamp,
                    distance=abs(pico - published),
                    divisible=is_even_amount(x, steps),
                )
                if best is None or (cand.distance, not cand.divisible) < (best.distance, not best.divisible):
                    best = cand
            n_range += any_in_range
            if best is not None:
                found.append(best)

    found.sort(key=lambda c: (c.distance, c.btc_tx_id))
    logger.debug("%s: %d in window, %d in range, %d decimals, %d divisible",
                 match.trade_id, n_window, n_range, len(found), sum(c.divisible for c in found))
    return BtcCandidateSet(
        trade_id=match.trade_id,
        spend_tx_ids=tuple(sorted({s.spend_tx_id for s in match.swaps})),
        published_xmr_amount=published,
        amount_range=(lo, hi),
        windows=windows,
        candidates=tuple(found),
        n_in_window=n_window,
        n_in_range=n_range,
    )


def match_all(
    matches: Sequence[TradeSwapMatch],
    stats: Iterable[TradeStatRecord],
    btc: Iterable[BitcoinTx],
    params: HeuristicParams,
) -> List[BtcCandidateSet]:
    by_trade: Dict[str, TradeStatRecord] = {s.trade_id: s for s in stats}
    timeline = BtcTimeline(btc)
    out = [match_btc(m, by_trade.get(m.trade_id), timeline, params) for m in matches]
    out.sort(key=lambda s: s.trade_id)
    logger.info("btc matching: %d trades against %d btc txs", len(out), len(timeline))
    return out
