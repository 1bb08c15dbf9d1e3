"""haveno_trace_kit.scanner.monero_scan

Reverse scan of the Monero chain for the Haveno swap pattern.

A standard (undisputed) trade leaves three txs:

    lockA (2 outputs, raised fee) --+
                                    +--> spend (2 inputs, 2 outputs), within 24 h
    lockB (2 outputs, same fee)   --+

The arbitrator publishes both locks together, so they land in the same or a
neighbouring block. Each spend input carries one lock output somewhere in its
ring. Which input holds which lock, and which of the two lock outputs is
referenced, are both unknown, so every assignment is accepted.

The scan starts from every spend-shaped tx and walks back through its rings,
which keeps the work proportional to (spend candidates x ring size) rather
than to the number of tx triples.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from ..ledger.index import ChainIndex
from ..ledger.model import MoneroTx
from ..ledger.params import HeuristicParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SwapCandidate:
    spend_tx_id: str
    lock_a_tx_id: str
    lock_b_tx_id: str
    spend_height: int
    spend_timestamp: int
    lock_a_height: int = 0
    lock_b_height: int = 0
    lock_timestamp: int = 0  # earliest of the two lock blocks

    @property
    def triple(self) -> Tuple[str, str, str]:
        a, b = sorted((self.lock_a_tx_id, self.lock_b_tx_id))
        return (self.spend_tx_id, a, b)

    def sort_key(self) -> Tuple:
        return (self.spend_height, self.spend_tx_id, self.lock_a_tx_id, self.lock_b_tx_id)

    def to_dict(self) -> Dict:
        return {
            "spend_tx_id": self.spend_tx_id,
            "lock_a_tx_id": self.lock_a_tx_id,
            "lock_b_tx_id": self.lock_b_tx_id,
            "spend_height": self.spend_height,
            "spend_timestamp": self.spend_timestamp,
            "lock_a_height": self.lock_a_height,
            "lock_b_height": self.lock_b_height,
            "lock_timestamp": self.lock_timestamp,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SwapCandidate":
        return cls(
            d["spend_tx_id"], d["lock_a_tx_id"], d["lock_b_tx_id"],
            int(d["spend_height"]), int(d["spend_timestamp"]),
            int(d.get("lock_a_height", 0)), int(d.get("lock_b_height", 0)), int(d.get("lock_timestamp", 0)),
        )


@dataclass
class FunnelReport:
    total_txs: int = 0
    spend_shape: int = 0
    spends_with_pair: int = 0
    candidates: int = 0

    def to_dict(self) -> Dict[str, int]:
        return {
            "total_txs": self.total_txs,
            "spend_shape": self.spend_shape,
            "spends_with_pair": self.spends_with_pair,
            "candidates": self.candidates,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FunnelReport":
        return cls(int(d["total_txs"]), int(d["spend_shape"]), int(d["spends_with_pair"]), int(d["candidates"]))


@dataclass
class ScanResult:
    candidates: List[SwapCandidate] = field(default_factory=list)
    funnel: FunnelReport = field(default_factory=FunnelReport)


def is_spend_shape(tx: MoneroTx) -> bool:
    return len(tx.inputs) == 2 and len(tx.outputs) == 2


def is_lock_shape(tx: MoneroTx, params: HeuristicParams) -> bool:
    return len(tx.outputs) == 2 and tx.fee_tier >= params.required_fee_tier


def _locks_behind(ring: Sequence[str], index: ChainIndex, params: HeuristicParams, t_from: int, t_to: int) -> Dict[str, MoneroTx]:
    """Lock-shaped creators of ring members, mined in [t_from, t_to]."""
    found: Dict[str, MoneroTx] = {}
    for member in ring:
        tx = index.creator_of(member)
        if tx is None or tx.tx_id in found or not is_lock_shape(tx, params):
            continue
        if t_from <= index.time_of(tx.block_height) <= t_to:
            found[tx.tx_id] = tx
    return found


def find_lock_pair(spend: MoneroTx, index: ChainIndex, params: HeuristicParams) -> List[Tuple[MoneroTx, MoneroTx]]:
    """All unordered lock pairs (lockA, lockB) that fit `spend`.

    Pairs come back with lockA the earlier of the two by (height, tx_id).
    """
    if not is_spend_shape(spend):
        raise ValueError(f"{spend.tx_id} is not spend-shaped")
    t_spend = index.time_of(spend.block_height)
    t_from = t_spend - params.lock_window
    first = _locks_behind(spend.inputs[0].ring, index, params, t_from, t_spend)
    if not first:
        return []
    second = _locks_behind(spend.inputs[1].ring, index, params, t_from, t_spend)

    seen: Set[Tuple[str, str]] = set()
    pairs: List[Tuple[MoneroTx, MoneroTx]] = []
    for a in first.values():
        for b in second.values():
            if a.tx_id == b.tx_id:
                continue
            if abs(a.block_height - b.block_height) > params.neighbor_block_tolerance:
                continue
            if params.require_equal_fee and a.fee != b.fee:
                continue
            lo, hi = sorted((a, b), key=lambda t: (t.block_height, t.tx_id))
            key = (lo.tx_id, hi.tx_id)
            if key in seen:
                continue
            seen.add(key)
            pairs.append((lo, hi))
    pairs.sort(key=lambda p: (p[0].block_height, p[0].tx_id, p[1].block_height, p[1].tx_id))
    return pairs


def _candidates_for(spend: MoneroTx, index: ChainIndex, params: HeuristicParams) -> List[SwapCandidate]:
    t_spend = index.time_of(spend.block_height)
    out = []
    for a, b in find_lock_pair(spend, index, params):
        out.append(
            SwapCandidate(
                spend_tx_id=spend.tx_id,
                lock_a_tx_id=a.tx_id,
                lock_b_tx_id=b.tx_id,
                spend_height=spend.block_height,
                spend_timestamp=t_spend,
                lock_a_height=a.block_height,
                lock_b_height=b.block_height,
                lock_timestamp=min(index.time_of(a.block_height), index.time_of(b.block_height)),
            )
        )
    return out


# worker-process state for parallel scans
_WORKER: Dict[str, object] = {}


def _worker_init(index: ChainIndex, params: HeuristicParams) -> None:
    _WORKER["index"] = index
    _WORKER["params"] = params


def _worker_chunk(spend_ids: List[str]) -> List[SwapCandidate]:
    index: ChainIndex = _WORKER["index"]  # type: ignore[assignment]
    params: HeuristicParams = _WORKER["params"]  # type: ignore[assignment]
    out: List[SwapCandidate] = []
    for tx_id in spend_ids:
        out.extend(_candidates_for(index.tx(tx_id), index, params))
    return out


def scan(index: ChainIndex, params: HeuristicParams, workers: Optional[int] = None) -> ScanResult:
    """Every (spend, lockA, lockB) triple fitting the pattern, plus stage counts.

    Output order is canonical (spend height, spend id, lock ids) whatever
    `workers` is.
    """
    workers = workers or 1
    spends = [tx for tx in index.iter_txs() if is_spend_shape(tx)]

    candidates: List[SwapCandidate] = []
    if workers > 1 and len(spends) > 1:
        ids = [tx.tx_id for tx in spends]
        chunk = max(1, len(ids) // (workers * 4))
        chunks = [ids[i : i + chunk] for i in range(0, len(ids), chunk)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init, initargs=(index, params)) as pool:
            for part in pool.map(_worker_chunk, chunks):
                candidates.extend(part)
    else:
        for tx in spends:
            candidates.extend(_candidates_for(tx, index, params))

    candidates.sort(key=SwapCandidate.sort_key)
    funnel = FunnelReport(
        total_txs=index.n_txs,
        spend_shape=len(spends),
        spends_with_pair=len({c.spend_tx_id for c in candidates}),
        candidates=len(candidates),
    )
    logger.info("scan funnel: %d txs -> %d spend-shaped -> %d with lock pair -> %d candidates",
                funnel.total_txs, funnel.spend_shape, funnel.spends_with_pair, funnel.candidates)
    return ScanResult(candidates, funnel)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("HAVENO_TRACE_WORKERS", "1")))
    except ValueError:
        return 1
