"""haveno_trace_kit.scanner.correlate

Join swap candidates to TradeLogger broadcasts.

Haveno announces a completed trade on the P2P network right away, which is
roughly when the payout (spend) is broadcast. A swap belongs to a trade when
its spend block time lies in [broadcast - before, broadcast + after]; the
interval is closed on both ends. Trades are matched independently, so one
swap can sit under several trades.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from ..ledger.model import TradeLogEvent
from ..ledger.params import HeuristicParams
from .monero_scan import SwapCandidate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TradeSwapMatch:
    trade_id: str
    broadcast_timestamp: int
    swaps: Tuple[SwapCandidate, ...]
    window: Tuple[int, int]  # (before, after) seconds

    def to_dict(self) -> Dict:
        return {
            "trade_id": self.trade_id,
            "broadcast_timestamp": self.broadcast_timestamp,
            "window": {"before": self.window[0], "after": self.window[1]},
            "swaps": [s.to_dict() for s in self.swaps],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TradeSwapMatch":
        w = d["window"]
        return cls(
            d["trade_id"],
            int(d["broadcast_timestamp"]),
            tuple(SwapCandidate.from_dict(s) for s in d["swaps"]),
            (int(w["before"]), int(w["after"])),
        )


@dataclass
class CorrelationResult:
    matches: List[TradeSwapMatch] = field(default_factory=list)
    unmatched: List[TradeLogEvent] = field(default_factory=list)

    @property
    def n_swaps(self) -> int:
        return sum(len(m.swaps) for m in self.matches)


def correlate(
    candidates: Iterable[SwapCandidate],
    log: Iterable[TradeLogEvent],
    params: HeuristicParams,
) -> CorrelationResult:
    by_time: List[SwapCandidate] = sorted(candidates, key=lambda c: (c.spend_timestamp,) + c.sort_key())
    times: Sequence[int] = [c.spend_timestamp for c in by_time]
    before, after = params.correlate_before, params.correlate_after

    result = CorrelationResult()
    for event in sorted(log, key=lambda e: (e.broadcast_timestamp, e.trade_id)):
        t = event.broadcast_timestamp
        lo = bisect.bisect_left(times, t - before)
        hi = bisect.bisect_right(times, t + after)
        if hi > lo:
            swaps = tuple(sorted(by_time[lo:hi], key=SwapCandidate.sort_key))
            result.matches.append(TradeSwapMatch(event.trade_id, t, swaps, (before, after)))
        else:
            result.unmatched.append(event)

    logger.info("correlation: %d trades matched to %d swaps, %d unmatched",
                len(result.matches), result.n_swaps, len(result.unmatched))
    return result
