"""haveno_trace_kit.ledger.index

Immutable lookup structure over a Monero-like chain.

`build_index` validates the corpus while it builds (contiguous heights,
strictly increasing time, no dangling or forward ring references) so every
later stage can trust the lookups. After construction nothing mutates, so a
single index can be shared by concurrent readers.
"""

from __future__ import annotations

import bisect
import logging
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import (
    DanglingReference,
    DuplicateOutputId,
    FeeTierMismatch,
    InvalidRecord,
    NonMonotonicTimestamps,
    RingOrderViolation,
    UnknownHeight,
)
from .model import FeeTable, MoneroBlock, MoneroTx

logger = logging.getLogger(__name__)


class ChainIndex:
    __slots__ = ("_blocks", "_timestamps", "_txs", "_creator", "_block_txs", "fee_table")

    def __init__(
        self,
        blocks: Sequence[MoneroBlock],
        txs: Dict[str, MoneroTx],
        creator: Dict[str, str],
        fee_table: Optional[FeeTable] = None,
    ):
        self._blocks: Tuple[MoneroBlock, ...] = tuple(blocks)
        self._timestamps: Tuple[int, ...] = tuple(b.timestamp for b in self._blocks)
        self._txs = txs
        self._creator = creator
        self._block_txs: Tuple[Tuple[MoneroTx, ...], ...] = tuple(
            tuple(txs[t] for t in b.tx_ids) for b in self._blocks
        )
        self.fee_table = fee_table

    # --- sizes ---

    @property
    def n_blocks(self) -> int:
        return len(self._blocks)

    @property
    def n_txs(self) -> int:
        return len(self._txs)

    @property
    def tip_height(self) -> int:
        return len(self._blocks) - 1

    # --- lookups ---

    def time_of(self, height: int) -> int:
        if not 0 <= height < len(self._blocks):
            raise UnknownHeight(height)
        return self._timestamps[height]

    def txs_in_block(self, height: int) -> Tuple[MoneroTx, ...]:
        if not 0 <= height < len(self._blocks):
            raise UnknownHeight(height)
        return self._block_txs[height]

    def tx(self, tx_id: str) -> Optional[MoneroTx]:
        return self._txs.get(tx_id)

    def creator_of(self, output_id: str) -> Optional[MoneroTx]:
        tx_id = self._creator.get(output_id)
        return self._txs[tx_id] if tx_id is not None else None

    def output_height(self, output_id: str) -> Optional[int]:
        tx = self.creator_of(output_id)
        return tx.block_height if tx is not None else None

    def heights_between(self, t_start: int, t_end: int) -> range:
        """Heights whose block timestamp lies in [t_start, t_end]."""
        lo = bisect.bisect_left(self._timestamps, t_start)
        hi = bisect.bisect_right(self._timestamps, t_end)
        return range(lo, max(lo, hi))

    def iter_txs(self) -> Iterator[MoneroTx]:
        """All txs in chain order (height, then position in block)."""
        for txs in self._block_txs:
            yield from txs


def time_of(index: ChainIndex, height: int) -> int:
    return index.time_of(height)


def build_index(
    blocks: Iterable[MoneroBlock],
    txs: Iterable[MoneroTx],
    fee_table: Optional[FeeTable] = None,
) -> ChainIndex:
    ordered: List[MoneroBlock] = sorted(blocks, key=lambda b: b.height)
    for expected, b in enumerate(ordered):
        if b.height != expected:
            raise InvalidRecord(f"block heights must be contiguous from 0; got {b.height} at position {expected}")
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.timestamp <= prev.timestamp:
            raise NonMonotonicTimestamps(
                f"block {cur.height} timestamp {cur.timestamp} <= block {prev.height} timestamp {prev.timestamp}"
            )

    by_id: Dict[str, MoneroTx] = {}
    for tx in txs:
        if tx.tx_id in by_id:
            raise InvalidRecord(f"duplicate tx_id {tx.tx_id}")
        by_id[tx.tx_id] = tx

    placed = set()
    for b in ordered:
        for tx_id in b.tx_ids:
            tx = by_id.get(tx_id)
            if tx is None:
                raise InvalidRecord(f"block {b.height} lists unknown tx {tx_id}")
            if tx.block_height != b.height or tx_id in placed:
                raise InvalidRecord(f"tx {tx_id} placed inconsistently (block_height={tx.block_height}, block={b.height})")
            placed.add(tx_id)
    if len(placed) != len(by_id):
        orphans = sorted(set(by_id) - placed)[:5]
        raise InvalidRecord(f"{len(by_id) - len(placed)} txs not listed in any block, e.g. {orphans}")

    creator: Dict[str, str] = {}
    for tx in by_id.values():
        for out in tx.outputs:
            if out.output_id in creator:
                raise DuplicateOutputId(out.output_id)
            creator[out.output_id] = tx.tx_id

    for tx in by_id.values():
        if fee_table is not None and not tx.is_coinbase and fee_table.tier_of(tx.fee) != tx.fee_tier:
            raise FeeTierMismatch(f"{tx.tx_id}: fee {tx.fee} is tier {fee_table.tier_of(tx.fee).label}, recorded {tx.fee_tier.label}")
        for inp in tx.inputs:
            for member in inp.ring:
                src = creator.get(member)
                if src is None:
                    raise DanglingReference(f"{tx.tx_id} references unknown output {member}")
                if by_id[src].block_height > tx.block_height:
                    raise RingOrderViolation(f"{tx.tx_id} at {tx.block_height} references {member} from {by_id[src].block_height}")

    logger.debug("indexed %d blocks, %d txs, %d outputs", len(ordered), len(by_id), len(creator))
    return ChainIndex(ordered, by_id, creator, fee_table)
