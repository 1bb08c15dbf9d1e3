"""haveno_trace_kit.synth.generator

Deterministic corpus generator: background traffic on both chains plus
planted Haveno trades, and the ground-truth manifest to score against.

A planted standard trade is laid out as

    block hA (= hB, or hB-1)   lockA   1 in / 2 out, lock fee tier
    block hB                   lockB   1 in / 2 out, same fee
    t_pay in (t_hB, bcast)     BTC payment: round(amount * rate) sat + change
    bcast = t_hB + delay       TradeLogger broadcast (delay keeps the spend inside the lock window)
    first block >= bcast, +0..2 blocks
                               spend   2 in / 2 out; ring 1 holds a lockA output, ring 2 a lockB output

Disputed trades reuse the layout with the payout pushed past the lock
window. Every random draw comes from a child of one SeedSequence, so a seed
fixes the whole corpus.
"""

from __future__ import annotations

import bisect
import hashlib
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..ledger.errors import ConfigInfeasible
from ..ledger.model import (
    PICONERO_PER_XMR,
    BitcoinTx,
    FeeTier,
    MoneroBlock,
    MoneroTx,
    TradeLogEvent,
    TradeStatRecord,
)
from ..ledger.records import Corpus, CorpusMeta, rate_from_record, rate_to_record
from ..scanner.btc_match import is_even_amount
from ..scanner.utils import read_ndjson, write_ndjson
from .config import AMOUNT_PROFILES, SHAPES, GenConfig
from .decoys import DecoyPool, sample_ring
from .obfuscation import obfuscate_stat

logger = logging.getLogger(__name__)

GROUND_TRUTH_FILE = "ground_truth.ndjson"
DAY_S = 24 * 3600


@dataclass(frozen=True)
class GroundTruthTrade:
    trade_id: str
    lock_a_tx_id: str
    lock_b_tx_id: str
    spend_tx_id: str
    true_xmr_amount: int
    btc_tx_id: str
    btc_amount_sat: int
    exchange_rate: Fraction
    completion_timestamp: int
    disputed: bool
    amount_profile: str

    def to_record(self) -> Dict[str, Any]:
        return {
            "trade_id": self.trade_id,
            "lock_a_tx_id": self.lock_a_tx_id,
            "lock_b_tx_id": self.lock_b_tx_id,
            "spend_tx_id": self.spend_tx_id,
            "true_xmr_amount": self.true_xmr_amount,
            "btc_tx_id": self.btc_tx_id,
            "btc_amount_sat": self.btc_amount_sat,
            "exchange_rate": rate_to_record(self.exchange_rate),
            "completion_timestamp": self.completion_timestamp,
            "disputed": self.disputed,
            "amount_profile": self.amount_profile,
        }

    @classmethod
    def from_record(cls, d: Dict[str, Any]) -> "GroundTruthTrade":
        return cls(
            trade_id=d["trade_id"],
            lock_a_tx_id=d["lock_a_tx_id"],
            lock_b_tx_id=d["lock_b_tx_id"],
            spend_tx_id=d["spend_tx_id"],
            true_xmr_amount=int(d["true_xmr_amount"]),
            btc_tx_id=d["btc_tx_id"],
            btc_amount_sat=int(d["btc_amount_sat"]),
            exchange_rate=rate_from_record(d["exchange_rate"]),
            completion_timestamp=int(d["completion_timestamp"]),
            disputed=bool(d["disputed"]),
            amount_profile=d.get("amount_profile", "even"),
        )


@dataclass(frozen=True)
class GroundTruth:
    trades: Tuple[GroundTruthTrade, ...] = ()

    def __len__(self) -> int:
        return len(self.trades)

    def by_trade(self) -> Dict[str, GroundTruthTrade]:
        return {t.trade_id: t for t in self.trades}

    @property
    def standard(self) -> Tuple[GroundTruthTrade, ...]:
        return tuple(t for t in self.trades if not t.disputed)

    @property
    def disputed(self) -> Tuple[GroundTruthTrade, ...]:
        return tuple(t for t in self.trades if t.disputed)


def save_ground_truth(gt: GroundTruth, path: str | Path) -> int:
    return write_ndjson((t.to_record() for t in gt.trades), path)


def load_ground_truth(path: str | Path) -> GroundTruth:
    return GroundTruth(tuple(GroundTruthTrade.from_record(r) for r in read_ndjson(path)))


# --- helpers ---

class _Ids:
    """Stable, seed-scoped hex ids: blake2b(seed/kind/n)."""

    def __init__(self, seed: int):
        self._seed = seed
        self._next: Dict[str, int] = {}

    def __call__(self, kind: str, size: int = 16) -> str:
        n = self._next.get(kind, 0)
        self._next[kind] = n + 1
        return hashlib.blake2b(f"{self._seed}/{kind}/{n}".encode("ascii"), digest_size=size).hexdigest()


def _log_uniform_int(rng: np.random.Generator, lo: int, hi: int) -> int:
    return int(round(10 ** rng.uniform(math.log10(lo), math.log10(hi))))


def _block_times(cfg: GenConfig, rng: np.random.Generator) -> List[int]:
    bt = cfg.block_time_s
    jitter = rng.integers(0, max(1, bt // 2), size=cfg.n_blocks)
    jitter[0] = 0
    return [cfg.start_time + h * bt + int(j) for h, j in enumerate(jitter)]


def draw_amount(cfg: GenConfig, profile: str, rng: np.random.Generator) -> Fraction:
    """Trade amount in XMR on the trading-UI grid, following `profile`."""
    lo, hi = cfg.min_trade_xmr, cfg.max_trade_xmr
    if profile == "even":
        steps = [s for s in cfg.divisibility_steps if math.ceil(lo / s) <= math.floor(hi / s)]
        if not steps:
            raise ConfigInfeasible(f"no divisibility step has a multiple in [{lo}, {hi}]")
        step = steps[int(rng.integers(0, len(steps)))]
        k = int(rng.integers(math.ceil(lo / step), math.floor(hi / step) + 1))
        return k * step

    if profile == "four_decimal":
        scale = 10**cfg.max_decimal_digits
        for _ in range(64):
            n = int(rng.integers(math.ceil(lo * scale), math.floor(hi * scale) + 1))
            if n % 10:
                return Fraction(n, scale)
        raise ConfigInfeasible("cannot draw a full-precision amount in the trade range")

    if profile == "free":
        for _ in range(256):
            scale = 10 ** int(rng.integers(1, min(3, cfg.max_decimal_digits) + 1))
            n = int(rng.integers(math.ceil(lo * scale), math.floor(hi * scale) + 1))
            x = Fraction(n, scale)
            if n % 10 and x > 0 and not is_even_amount(x, cfg.divisibility_steps):
                return x
        raise ConfigInfeasible("cannot draw a free (non-even) amount in the trade range")

    raise ValueError(f"unknown amount profile {profile!r}")


@dataclass
class _Plan:
    trade_id: str
    disputed: bool
    profile: str
    amount: Fraction
    rate: Fraction
    lock_a_height: int
    lock_b_height: int
    broadcast: int
    spend_height: int
    btc_timestamp: int
    lock_a: Optional[MoneroTx] = None
    lock_b: Optional[MoneroTx] = None
    spend: Optional[MoneroTx] = None


def _plan_trades(cfg: GenConfig, ts: List[int], rng: np.random.Generator, ids: _Ids) -> List[_Plan]:
    bt, window = cfg.block_time_s, cfg.trade_window_s
    # spend block lands within 4.5 block times of the broadcast; 6 keeps lockA (one block
    # earlier) inside the window as well
    std_lo, std_hi = 600, window - 6 * bt
    if std_hi < std_lo:
        raise ConfigInfeasible(f"trade_window_s={window} leaves no room for a payout delay at block_time_s={bt}")
    dis_lo, dis_hi = window + 6 * bt, window + 6 * bt + window // 2

    n = cfg.n_planted_trades
    disputed = set(int(i) for i in rng.permutation(n)[: cfg.n_disputed])
    profiles = list(AMOUNT_PROFILES)
    weights = np.array([cfg.amount_profile[p] for p in profiles], dtype=float)

    plans: List[_Plan] = []
    for i in range(n):
        is_disputed = i in disputed
        if is_disputed:
            delay = int(rng.integers(dis_lo, dis_hi + 1))
        elif cfg.payout_delay == "log_uniform":
            # most trades pay out within hours; a long tail runs up to the window
            delay = min(std_hi, max(std_lo, _log_uniform_int(rng, std_lo, std_hi)))
        else:
            delay = int(rng.integers(std_lo, std_hi + 1))
        h_max = bisect.bisect_right(ts, ts[-1] - delay - 5 * bt) - 1
        if h_max < 2:
            raise ConfigInfeasible(
                f"n_blocks={cfg.n_blocks} too short for a {'disputed' if is_disputed else 'standard'} "
                f"trade with payout delay {delay}s"
            )
        h_b = int(rng.integers(2, h_max + 1))
        h_a = h_b - 1 if rng.random() < cfg.split_lock_fraction else h_b
        broadcast = ts[h_b] + delay
        first = bisect.bisect_left(ts, broadcast)
        spend_h = min(first + int(rng.integers(0, 3)), cfg.n_blocks - 1)
        profile = profiles[int(rng.choice(len(profiles), p=weights / weights.sum()))]
        amount = draw_amount(cfg, profile, rng)
        plans.append(
            _Plan(
                trade_id=ids("trade", size=8),
                disputed=is_disputed,
                profile=profile,
                amount=amount,
                rate=cfg.rate_at(ts[h_b]),
                lock_a_height=h_a,
                lock_b_height=h_b,
                broadcast=broadcast,
                spend_height=spend_h,
                btc_timestamp=int(rng.integers(ts[h_b] + 60, broadcast - 60 + 1)),
            )
        )
    return plans


class _MoneroBuilder:
    def __init__(self, cfg: GenConfig, ids: _Ids, bg_rng: np.random.Generator, ring_rng: np.random.Generator):
        self.cfg = cfg
        self.ids = ids
        self.bg = bg_rng
        self.ring = ring_rng
        self.pool = DecoyPool()
        self._shape_p = np.array([cfg.background_shapes[s] for s in SHAPES], dtype=float)
        self._tiers = list(FeeTier)
        self._tier_p = np.array([cfg.background_fee_tiers[t.label] for t in self._tiers], dtype=float)

    def _rings(self, n_inputs: int, real: Optional[List[str]] = None) -> List[Tuple[str, ...]]:
        cfg = self.cfg
        rings = []
        for i in range(n_inputs):
            real_id = real[i] if real else self.pool.pick(self.ring, cfg.decoy_window)
            rings.append(sample_ring(self.pool, real_id, cfg.ring_size, self.ring, window=cfg.decoy_window).ring)
        return rings

    def _tier(self) -> FeeTier:
        if self.cfg.uniform_fee_tier:
            return self.cfg.lock_fee_tier
        return self._tiers[int(self.bg.choice(len(self._tiers), p=self._tier_p / self._tier_p.sum()))]

    def _tx(self, height: int, rings: List[Tuple[str, ...]], n_out: int, tier: FeeTier) -> MoneroTx:
        fee = self.cfg.fee_table.fee_for(tier, len(rings), n_out)
        return MoneroTx.build(self.ids("xmr"), height, rings, n_out, fee, tier)

    def coinbase(self, height: int, n_out: int) -> MoneroTx:
        return MoneroTx.build(self.ids("xmr"), height, [], n_out, 0, FeeTier.LOW)

    def background(self, height: int) -> MoneroTx:
        shape = SHAPES[int(self.bg.choice(len(SHAPES), p=self._shape_p / self._shape_p.sum()))]
        if shape == "1in1out":
            n_in, n_out = 1, 1
        elif shape == "1in2out":
            n_in, n_out = 1, 2
        elif shape == "2in2out":
            n_in, n_out = 2, 2
        else:
            n_in, n_out = int(self.bg.integers(3, 7)), int(self.bg.integers(1, 3))
        return self._tx(height, self._rings(n_in), n_out, self._tier())

    def lock(self, height: int) -> MoneroTx:
        return self._tx(height, self._rings(1), 2, self.cfg.lock_fee_tier)

    def spend(self, height: int, lock_a: MoneroTx, lock_b: MoneroTx) -> MoneroTx:
        real = [
            lock_a.output_ids[int(self.ring.integers(0, 2))],
            lock_b.output_ids[int(self.ring.integers(0, 2))],
        ]
        return self._tx(height, self._rings(2, real), 2, self._tier())


def _btc_background(cfg: GenConfig, t0: int, t1: int, rng: np.random.Generator, ids: _Ids) -> List[BitcoinTx]:
    hours = (t1 - t0) / 3600.0
    n = int(rng.poisson(cfg.btc_background_rate * hours)) if hours > 0 else 0
    out: List[BitcoinTx] = []
    for t in sorted(int(x) for x in rng.integers(t0, t1 + 1, size=n)):
        amounts = []
        for _ in range(int(rng.integers(1, 4))):
            if rng.random() < cfg.btc_round_fraction:
                amounts.append(cfg.btc_round_unit_sat * _log_uniform_int(rng, 1, 1000))
            else:
                amounts.append(_log_uniform_int(rng, 10**4, 10**9))
        out.append(BitcoinTx(ids("btc"), t, tuple(amounts)))
    return out


def _logged_broadcast(cfg: GenConfig, broadcast: int) -> int:
    if cfg.trade_log_mode == "daily_batch":
        return (broadcast // DAY_S + 1) * DAY_S
    return broadcast


def generate_corpus(cfg: GenConfig) -> Tuple[Corpus, GroundTruth]:
    root = np.random.SeedSequence(cfg.seed)
    time_rng, bg_rng, trade_rng, ring_rng, btc_rng, stat_rng = (np.random.default_rng(s) for s in root.spawn(6))
    ids = _Ids(cfg.seed)

    ts = _block_times(cfg, time_rng)
    plans = _plan_trades(cfg, ts, trade_rng, ids)
    locks_at: Dict[int, List[Tuple[_Plan, str]]] = {}
    spends_at: Dict[int, List[_Plan]] = {}
    for p in plans:
        locks_at.setdefault(p.lock_a_height, []).append((p, "a"))
        locks_at.setdefault(p.lock_b_height, []).append((p, "b"))
        spends_at.setdefault(p.spend_height, []).append(p)

    xmr = _MoneroBuilder(cfg, ids, bg_rng, ring_rng)
    blocks: List[MoneroBlock] = []
    txs: List[MoneroTx] = []
    for h in range(cfg.n_blocks):
        block_txs = [xmr.coinbase(h, cfg.premine_outputs if h == 0 else 1)]
        if h > 0:
            body = [xmr.background(h) for _ in range(int(bg_rng.poisson(cfg.background_tx_rate)))]
            for p, side in locks_at.get(h, []):
                tx = xmr.lock(h)
                if side == "a":
                    p.lock_a = tx
                else:
                    p.lock_b = tx
                body.append(tx)
            for p in spends_at.get(h, []):
                p.spend = xmr.spend(h, p.lock_a, p.lock_b)
                body.append(p.spend)
            block_txs += [body[int(i)] for i in bg_rng.permutation(len(body))]
        blocks.append(MoneroBlock(h, ts[h], tuple(t.tx_id for t in block_txs)))
        txs.extend(block_txs)
        xmr.pool.extend(o for t in block_txs for o in t.output_ids)

    btc = _btc_background(cfg, ts[0], ts[-1], btc_rng, ids)
    stats: List[TradeStatRecord] = []
    log: List[TradeLogEvent] = []
    truth: List[GroundTruthTrade] = []
    for p in plans:
        sat = p.amount * p.rate
        if sat.denominator != 1:
            raise ConfigInfeasible(f"{p.trade_id}: {p.amount} XMR at {p.rate} sat/XMR is not whole satoshi")
        change = _log_uniform_int(btc_rng, 10**4, 10**8)
        amounts = (int(sat), change) if btc_rng.random() < 0.5 else (change, int(sat))
        pay = BitcoinTx(ids("btc"), p.btc_timestamp, amounts)
        btc.append(pay)

        true_pico = int(p.amount * PICONERO_PER_XMR)
        published, published_ts = obfuscate_stat(true_pico, p.broadcast, stat_rng, cfg.obfuscation_fraction, cfg.stat_shift_max)
        stats.append(TradeStatRecord(p.trade_id, published, p.rate, published_ts))
        log.append(TradeLogEvent(p.trade_id, _logged_broadcast(cfg, p.broadcast)))
        truth.append(
            GroundTruthTrade(
                trade_id=p.trade_id,
                lock_a_tx_id=p.lock_a.tx_id,
                lock_b_tx_id=p.lock_b.tx_id,
                spend_tx_id=p.spend.tx_id,
                true_xmr_amount=true_pico,
                btc_tx_id=pay.tx_id,
                btc_amount_sat=int(sat),
                exchange_rate=p.rate,
                completion_timestamp=p.broadcast,
                disputed=p.disputed,
                amount_profile=p.profile,
            )
        )

    btc.sort(key=lambda t: (t.timestamp, t.tx_id))
    stats.sort(key=lambda s: (s.published_timestamp, s.trade_id))
    log.sort(key=lambda e: (e.broadcast_timestamp, e.trade_id))
    truth.sort(key=lambda t: t.trade_id)

    corpus = Corpus(
        blocks=blocks,
        monero_txs=txs,
        bitcoin_txs=btc,
        trade_stats=stats,
        trade_log=log,
        meta=CorpusMeta(cfg.seed, cfg.start_time, cfg.block_time_s, cfg.fee_table),
    )
    logger.info(
        "generated seed=%d: %d blocks, %d xmr txs, %d btc txs, %d planted trades (%d disputed)",
        cfg.seed, len(blocks), len(txs), len(btc), len(truth), sum(t.disputed for t in truth),
    )
    return corpus, GroundTruth(tuple(truth))
