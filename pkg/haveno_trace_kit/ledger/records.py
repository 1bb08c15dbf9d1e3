"""haveno_trace_kit.ledger.records

Line-delimited record files for a corpus and their codecs.

    blocks.ndjson       height, timestamp, tx_ids
    monero_txs.ndjson   tx_id, block_height, fee, fee_tier, inputs[{ring}], outputs[{output_id}]
    bitcoin_txs.ndjson  tx_id, timestamp, amounts
    trade_stats.ndjson  trade_id, published_xmr_amount, exchange_rate{num,den}, published_timestamp
    trade_log.ndjson    trade_id, broadcast_timestamp
    corpus_meta.json    seed, start_time, block_time_s, fee_table, corpus_digest
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..scanner.utils import canonical_json, read_json, read_ndjson, write_json, write_ndjson
from .errors import InvalidRecord
from .index import ChainIndex, build_index
from .model import (
    BitcoinTx,
    FeeTable,
    FeeTier,
    MoneroBlock,
    MoneroInput,
    MoneroOutput,
    MoneroTx,
    TradeLogEvent,
    TradeStatRecord,
)

logger = logging.getLogger(__name__)

BLOCKS_FILE = "blocks.ndjson"
MONERO_TXS_FILE = "monero_txs.ndjson"
BITCOIN_TXS_FILE = "bitcoin_txs.ndjson"
TRADE_STATS_FILE = "trade_stats.ndjson"
TRADE_LOG_FILE = "trade_log.ndjson"
CORPUS_META_FILE = "corpus_meta.json"


# --- codecs ---

def rate_to_record(rate: Fraction) -> Dict[str, int]:
    return {"num": rate.numerator, "den": rate.denominator}


def rate_from_record(d: Dict[str, Any]) -> Fraction:
    try:
        return Fraction(int(d["num"]), int(d["den"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InvalidRecord(f"bad exchange_rate record {d!r}") from e


def block_to_record(b: MoneroBlock) -> Dict[str, Any]:
    return {"height": b.height, "timestamp": b.timestamp, "tx_ids": list(b.tx_ids)}


def block_from_record(d: Dict[str, Any]) -> MoneroBlock:
    return MoneroBlock(int(d["height"]), int(d["timestamp"]), tuple(d["tx_ids"]))


def monero_tx_to_record(tx: MoneroTx) -> Dict[str, Any]:
    return {
        "tx_id": tx.tx_id,
        "block_height": tx.block_height,
        "fee": tx.fee,
        "fee_tier": tx.fee_tier.label,
        "inputs": [{"ring": list(i.ring)} for i in tx.inputs],
        "outputs": [{"output_id": o.output_id} for o in tx.outputs],
    }


def monero_tx_from_record(d: Dict[str, Any]) -> MoneroTx:
    tx_id = d["tx_id"]
    outs = tuple(MoneroOutput(o["output_id"], tx_id, i) for i, o in enumerate(d["outputs"]))
    ins = tuple(MoneroInput(tuple(i["ring"])) for i in d["inputs"])
    return MoneroTx(tx_id, int(d["block_height"]), ins, outs, int(d["fee"]), FeeTier.parse(d["fee_tier"]))


def bitcoin_tx_to_record(tx: BitcoinTx) -> Dict[str, Any]:
    return {"tx_id": tx.tx_id, "timestamp": tx.timestamp, "amounts": list(tx.amounts)}


def bitcoin_tx_from_record(d: Dict[str, Any]) -> BitcoinTx:
    return BitcoinTx(d["tx_id"], int(d["timestamp"]), tuple(int(a) for a in d["amounts"]))


def stat_to_record(s: TradeStatRecord) -> Dict[str, Any]:
    return {
        "trade_id": s.trade_id,
        "published_xmr_amount": s.published_xmr_amount,
        "exchange_rate": rate_to_record(s.exchange_rate),
        "published_timestamp": s.published_timestamp,
    }


def stat_from_record(d: Dict[str, Any]) -> TradeStatRecord:
    return TradeStatRecord(
        d["trade_id"], int(d["published_xmr_amount"]), rate_from_record(d["exchange_rate"]), int(d["published_timestamp"])
    )


def log_event_to_record(e: TradeLogEvent) -> Dict[str, Any]:
    return {"trade_id": e.trade_id, "broadcast_timestamp": e.broadcast_timestamp}


def log_event_from_record(d: Dict[str, Any]) -> TradeLogEvent:
    return TradeLogEvent(d["trade_id"], int(d["broadcast_timestamp"]))


# --- corpus ---

@dataclass(frozen=True)
class CorpusMeta:
    seed: Optional[int] = None
    start_time: Optional[int] = None
    block_time_s: Optional[int] = None
    fee_table: Optional[FeeTable] = None

    def to_dict(self, digest: str) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "start_time": self.start_time,
            "block_time_s": self.block_time_s,
            "fee_table": self.fee_table.to_dict() if self.fee_table else None,
            "corpus_digest": digest,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "CorpusMeta":
        ft = d.get("fee_table")
        return cls(d.get("seed"), d.get("start_time"), d.get("block_time_s"), FeeTable.from_dict(ft) if ft else None)


@dataclass
class Corpus:
    blocks: List[MoneroBlock] = field(default_factory=list)
    monero_txs: List[MoneroTx] = field(default_factory=list)
    bitcoin_txs: List[BitcoinTx] = field(default_factory=list)
    trade_stats: List[TradeStatRecord] = field(default_factory=list)
    trade_log: List[TradeLogEvent] = field(default_factory=list)
    meta: CorpusMeta = field(default_factory=CorpusMeta)

    def index(self) -> ChainIndex:
        return build_index(self.blocks, self.monero_txs, self.meta.fee_table)

    def record_sets(self) -> Dict[str, List[Dict[str, Any]]]:
        return {
            BLOCKS_FILE: [block_to_record(b) for b in self.blocks],
            MONERO_TXS_FILE: [monero_tx_to_record(t) for t in self.monero_txs],
            BITCOIN_TXS_FILE: [bitcoin_tx_to_record(t) for t in self.bitcoin_txs],
            TRADE_STATS_FILE: [stat_to_record(s) for s in self.trade_stats],
            TRADE_LOG_FILE: [log_event_to_record(e) for e in self.trade_log],
        }

    def digest(self) -> str:
        return corpus_digest(self.record_sets())


def corpus_digest(record_sets: Dict[str, List[Dict[str, Any]]]) -> str:
    """Order-independent hash over canonical record encodings."""
    leaves = sorted(
        hashlib.sha256(f"{kind}\t{canonical_json(rec)}".encode("utf-8")).hexdigest()
        for kind, recs in record_sets.items()
        for rec in recs
    )
    h = hashlib.sha256()
    for leaf in leaves:
        h.update(leaf.encode("ascii"))
    return h.hexdigest()


def save_corpus(corpus: Corpus, out_dir: str | Path) -> str:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sets = corpus.record_sets()
    for name, rows in sets.items():
        write_ndjson(rows, out / name)
    digest = corpus_digest(sets)
    write_json(corpus.meta.to_dict(digest), out / CORPUS_META_FILE)
    logger.info("wrote corpus to %s (%d blocks, %d xmr txs, %d btc txs, digest %s)",
                out, len(corpus.blocks), len(corpus.monero_txs), len(corpus.bitcoin_txs), digest[:12])
    return digest


def _read_optional(path: Path) -> List[Dict[str, Any]]:
    if not path.exists():
        logger.warning("%s missing; treating as empty", path)
        return []
    return read_ndjson(path)


def load_corpus(in_dir: str | Path) -> Corpus:
    d = Path(in_dir)
    if not (d / BLOCKS_FILE).exists() or not (d / MONERO_TXS_FILE).exists():
        raise InvalidRecord(f"{d} is not a corpus directory (needs {BLOCKS_FILE} and {MONERO_TXS_FILE})")
    meta = CorpusMeta()
    if (d / CORPUS_META_FILE).exists():
        meta = CorpusMeta.from_dict(read_json(d / CORPUS_META_FILE))
    return Corpus(
        blocks=[block_from_record(r) for r in read_ndjson(d / BLOCKS_FILE)],
        monero_txs=[monero_tx_from_record(r) for r in read_ndjson(d / MONERO_TXS_FILE)],
        bitcoin_txs=[bitcoin_tx_from_record(r) for r in _read_optional(d / BITCOIN_TXS_FILE)],
        trade_stats=[stat_from_record(r) for r in _read_optional(d / TRADE_STATS_FILE)],
        trade_log=[log_event_from_record(r) for r in _read_optional(d / TRADE_LOG_FILE)],
        meta=meta,
    )
