"""Small hand-built chains and configs shared by the tests."""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from haveno_trace_kit.ledger.index import ChainIndex, build_index
from haveno_trace_kit.ledger.model import (
    BitcoinTx,
    FeeTable,
    FeeTier,
    MoneroBlock,
    MoneroTx,
    TradeLogEvent,
    TradeStatRecord,
)
from haveno_trace_kit.ledger.params import HeuristicParams
from haveno_trace_kit.ledger.records import Corpus, CorpusMeta
from haveno_trace_kit.synth.config import GenConfig

T0 = 1_700_000_000
FEES = FeeTable()


class ChainBuilder:
    """Block 0 holds a coinbase with `premine` outputs (`cb0:0`, `cb0:1`, ...)."""

    def __init__(self, block_time: int = 120, premine: int = 64):
        self.block_time = block_time
        self._heights: List[Tuple[int, List[str]]] = []
        self._txs: List[MoneroTx] = []
        self.new_block(T0)
        self.add(MoneroTx.build("cb0", 0, [], premine, 0, FeeTier.LOW))

    @property
    def height(self) -> int:
        return len(self._heights) - 1

    @property
    def now(self) -> int:
        return self._heights[-1][0]

    def new_block(self, timestamp: Optional[int] = None) -> int:
        ts = timestamp if timestamp is not None else self.now + self.block_time
        self._heights.append((ts, []))
        return self.height

    def skip(self, n: int) -> int:
        for _ in range(n):
            self.new_block()
        return self.height

    def add(self, tx: MoneroTx) -> MoneroTx:
        self._heights[-1][1].append(tx.tx_id)
        self._txs.append(tx)
        return tx

    def tx(
        self,
        tx_id: str,
        rings: Sequence[Sequence[str]],
        n_outputs: int,
        tier: str = "low",
        fee: Optional[int] = None,
    ) -> MoneroTx:
        t = FeeTier.parse(tier)
        if fee is None:
            fee = FEES.fee_for(t, len(rings), n_outputs)
        return self.add(MoneroTx.build(tx_id, self.height, rings, n_outputs, fee, FEES.tier_of(fee)))

    @staticmethod
    def decoys(k: int, offset: int = 0) -> List[str]:
        return [f"cb0:{i}" for i in range(offset, offset + k)]

    def blocks(self) -> List[MoneroBlock]:
        return [MoneroBlock(h, ts, tuple(ids)) for h, (ts, ids) in enumerate(self._heights)]

    def txs(self) -> List[MoneroTx]:
        return list(self._txs)

    def index(self) -> ChainIndex:
        return build_index(self.blocks(), self.txs(), FEES)

    def corpus(
        self,
        btc: Iterable[BitcoinTx] = (),
        stats: Iterable[TradeStatRecord] = (),
        log: Iterable[TradeLogEvent] = (),
    ) -> Corpus:
        return Corpus(self.blocks(), self.txs(), list(btc), list(stats), list(log), CorpusMeta(0, T0, self.block_time, FEES))


def plant_swap(
    b: ChainBuilder,
    name: str,
    spend_after_blocks: int = 5,
    split_locks: bool = False,
    lock_tier: str = "elevated",
    fee_b: Optional[int] = None,
    swap_inputs: bool = False,
) -> Tuple[MoneroTx, MoneroTx, MoneroTx]:
    """lockA/lockB then, `spend_after_blocks` later, the spend. Starts a new block."""
    b.new_block()
    lock_a = b.tx(f"{name}-lockA", [b.decoys(4, 0)], 2, lock_tier)
    if split_locks:
        b.new_block()
    lock_b = b.tx(f"{name}-lockB", [b.decoys(4, 4)], 2, lock_tier, fee=fee_b)
    b.skip(spend_after_blocks)
    ring_a = [lock_a.output_ids[0]] + b.decoys(3, 8)
    ring_b = b.decoys(3, 11) + [lock_b.output_ids[1]]
    rings = [ring_b, ring_a] if swap_inputs else [ring_a, ring_b]
    spend = b.tx(f"{name}-spend", rings, 2, "low")
    return lock_a, lock_b, spend


def small_config(seed: int = 0, **overrides) -> GenConfig:
    """A few hundred blocks with a two-hour trade window: seconds to generate."""
    base: Dict = dict(
        seed=seed,
        n_blocks=300,
        background_tx_rate=4.0,
        n_planted_trades=12,
        fraction_disputed="1/4",
        trade_window_s=7200,
        btc_background_rate=60.0,
        stat_shift_max=3600,
    )
    base.update(overrides)
    return GenConfig.from_dict(base)


def small_params(**overrides) -> HeuristicParams:
    return HeuristicParams.from_dict({"lock_window": 7200, **overrides})


def brute_force_triples(index: ChainIndex, params: HeuristicParams) -> Set[Tuple[str, str, str]]:
    """All-triples oracle for the swap pattern, written without the scanner's ring walk."""
    txs = list(index.iter_txs())
    spends = [t for t in txs if len(t.inputs) == 2 and len(t.outputs) == 2]
    locks = [t for t in txs if len(t.outputs) == 2 and t.fee_tier >= params.required_fee_tier]
    found: Set[Tuple[str, str, str]] = set()
    for s in spends:
        t_s = index.time_of(s.block_height)
        ring0, ring1 = set(s.inputs[0].ring), set(s.inputs[1].ring)
        near = [l for l in locks if t_s - params.lock_window <= index.time_of(l.block_height) <= t_s]
        for a in near:
            if not ring0.intersection(a.output_ids):
                continue
            for c in near:
                if c.tx_id == a.tx_id or not ring1.intersection(c.output_ids):
                    continue
                if abs(a.block_height - c.block_height) > params.neighbor_block_tolerance:
                    continue
                if params.require_equal_fee and a.fee != c.fee:
                    continue
                x, y = sorted((a.tx_id, c.tx_id))
                found.add((s.tx_id, x, y))
    return found
