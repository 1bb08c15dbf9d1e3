"""haveno_trace_kit.backtest.evaluate

Score pipeline outputs against the generator's ground truth.

Swap detection is judged on unordered triples (spend, {lockA, lockB}).
Standard trades form the truth set; disputed trades are negative controls
and reported separately. Ratios with an empty denominator are None.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import pandas as pd

from ..ledger.errors import CorpusMismatch
from ..ledger.model import PICONERO_PER_XMR
from ..scanner.btc_match import BtcCandidate, BtcCandidateSet, is_even_amount
from ..scanner.correlate import TradeSwapMatch
from ..scanner.monero_scan import FunnelReport, SwapCandidate
from ..synth.generator import GroundTruth, GroundTruthTrade

logger = logging.getLogger(__name__)

# 14-day mainnet snapshot, for scale comparison only
MAINNET_REFERENCE: Dict[str, Any] = {
    "total_txs": 371_206,
    "spend_shape": 14_666,
    "candidates": 671,
    "spend_shape_share": round(14_666 / 371_206, 6),
    "candidate_share_of_spend_shape": round(671 / 14_666, 6),
    "btc_mean_candidates_range": 933,
    "btc_mean_candidates_divisible": 2.5,
    "btc_median_candidates_divisible": 1,
}

PER_TRADE_COLUMNS = [
    "trade_id",
    "disputed",
    "amount_profile",
    "truth_divisible",
    "detected",
    "correlated",
    "n_swaps_matched",
    "in_window",
    "in_range",
    "decimals",
    "divisibility",
    "btc_found",
    "rank_of_truth",
    "rank_divisible",
]


def _ratio(num: int, den: int) -> Optional[float]:
    return round(num / den, 6) if den else None


def _triple(t: GroundTruthTrade) -> Tuple[str, str, str]:
    a, b = sorted((t.lock_a_tx_id, t.lock_b_tx_id))
    return (t.spend_tx_id, a, b)


@dataclass
class EvaluationReport:
    funnel: Dict[str, Any] = field(default_factory=dict)
    swap_detection: Dict[str, Any] = field(default_factory=dict)
    correlation: Dict[str, Any] = field(default_factory=dict)
    btc_matching: Dict[str, Any] = field(default_factory=dict)
    reference: Dict[str, Any] = field(default_factory=lambda: dict(MAINNET_REFERENCE))
    meta: Dict[str, Any] = field(default_factory=dict)
    per_trade: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=PER_TRADE_COLUMNS))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "funnel": self.funnel,
            "swap_detection": self.swap_detection,
            "correlation": self.correlation,
            "btc_matching": self.btc_matching,
            "reference": self.reference,
            "meta": self.meta,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def check_same_corpus(digests: Mapping[str, Optional[str]]) -> Optional[str]:
    """The one corpus digest all named inputs agree on; CorpusMismatch otherwise."""
    known = {name: d for name, d in digests.items() if d}
    distinct = sorted(set(known.values()))
    if len(distinct) > 1:
        detail = ", ".join(f"{k}={v[:12]}" for k, v in sorted(known.items()))
        raise CorpusMismatch(f"inputs come from different corpora: {detail}")
    return distinct[0] if distinct else None


def _rank(cands: Optional[Sequence[BtcCandidate]], btc_tx_id: str) -> Optional[int]:
    if cands is None:
        return None
    for i, c in enumerate(cands, 1):
        if c.btc_tx_id == btc_tx_id:
            return i
    return None


def _stage_stats(series: pd.Series) -> Dict[str, Optional[float]]:
    if series.empty:
        return {"mean": None, "median": None}
    return {"mean": round(float(series.mean()), 4), "median": round(float(series.median()), 4)}


def evaluate(
    candidates: Sequence[SwapCandidate],
    matches: Sequence[TradeSwapMatch],
    btc_sets: Sequence[BtcCandidateSet],
    ground_truth: GroundTruth,
    funnel: Optional[FunnelReport] = None,
    digests: Optional[Mapping[str, Optional[str]]] = None,
    divisibility_steps: Iterable[Fraction] = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)),
    meta: Optional[Mapping[str, Any]] = None,
) -> EvaluationReport:
    corpus_digest = check_same_corpus(digests or {})
    steps = tuple(divisibility_steps)

    detected: Set[Tuple[str, str, str]] = {c.triple for c in candidates}
    standard = ground_truth.standard
    truth = {_triple(t) for t in standard}
    disputed = {_triple(t) for t in ground_truth.disputed}
    tp = len(detected & truth)

    match_by_trade: Dict[str, TradeSwapMatch] = {m.trade_id: m for m in matches}
    btc_by_trade: Dict[str, BtcCandidateSet] = {s.trade_id: s for s in btc_sets}

    rows: List[Dict[str, Any]] = []
    for t in ground_truth.trades:
        m = match_by_trade.get(t.trade_id)
        s = btc_by_trade.get(t.trade_id)
        rank = _rank(s.candidates if s else None, t.btc_tx_id)
        rank_div = _rank(s.divisible_candidates if s else None, t.btc_tx_id)
        rows.append(
            {
                "trade_id": t.trade_id,
                "disputed": t.disputed,
                "amount_profile": t.amount_profile,
                "truth_divisible": is_even_amount(Fraction(t.true_xmr_amount, PICONERO_PER_XMR), steps),
                "detected": _triple(t) in detected,
                "correlated": m is not None and any(c.triple == _triple(t) for c in m.swaps),
                "n_swaps_matched": len(m.swaps) if m else 0,
                "in_window": s.n_in_window if s else 0,
                "in_range": s.n_in_range if s else 0,
                "decimals": s.n_decimals if s else 0,
                "divisibility": len(s.divisible_candidates) if s else 0,
                "btc_found": rank is not None,
                "rank_of_truth": rank if rank is not None else -1,
                "rank_divisible": rank_div if rank_div is not None else -1,
            }
        )
    per_trade = pd.DataFrame(rows, columns=PER_TRADE_COLUMNS)
    std_rows = per_trade[~per_trade["disputed"].astype(bool)] if len(per_trade) else per_trade

    n_std = len(std_rows)
    n_correlated = int(std_rows["correlated"].sum()) if n_std else 0
    n_btc_found = int(std_rows["btc_found"].sum()) if n_std else 0

    sets = pd.DataFrame(
        [
            {
                "in_window": s.n_in_window,
                "in_range": s.n_in_range,
                "decimals": s.n_decimals,
                "divisibility": len(s.divisible_candidates),
            }
            for s in btc_sets
        ],
        columns=["in_window", "in_range", "decimals", "divisibility"],
    )
    found = std_rows[std_rows["btc_found"].astype(bool)] if n_std else std_rows
    ranks = found["rank_of_truth"].astype(int).value_counts().sort_index() if len(found) else pd.Series(dtype=int)
    rank_dist = {str(int(k)): int(v) for k, v in ranks.items()}
    if n_std - n_btc_found:
        rank_dist["missing"] = n_std - n_btc_found

    funnel_d = funnel.to_dict() if funnel else {"candidates": len(candidates)}
    total, spend_shape = funnel_d.get("total_txs"), funnel_d.get("spend_shape")
    funnel_d.update(
        {
            "spend_shape_share": _ratio(spend_shape, total) if total is not None and spend_shape is not None else None,
            "candidate_share_of_spend_shape": _ratio(funnel_d["candidates"], spend_shape) if spend_shape is not None else None,
            "planted_trades": len(ground_truth),
            "trades_matched": len(matches),
            "swaps_matched": sum(len(m.swaps) for m in matches),
            "btc_sets": len(btc_sets),
        }
    )

    report = EvaluationReport(
        funnel=funnel_d,
        swap_detection={
            "detected": len(detected),
            "truth": len(truth),
            "true_positives": tp,
            "precision": _ratio(tp, len(detected)),
            "recall": _ratio(tp, len(truth)),
            "disputed_total": len(disputed),
            "disputed_detected": len(detected & disputed),
            "disputed_recall": _ratio(len(detected & disputed), len(disputed)),
        },
        correlation={
            "standard_trades": n_std,
            "correlated": n_correlated,
            "recall": _ratio(n_correlated, n_std),
            "mean_swaps_per_match": round(sum(len(m.swaps) for m in matches) / len(matches), 4) if matches else None,
        },
        btc_matching={
            "standard_trades": n_std,
            "found": n_btc_found,
            "recall": _ratio(n_btc_found, n_std),
            "per_stage": {col: _stage_stats(sets[col]) for col in sets.columns},
            "rank_of_truth": rank_dist,
            "rank_1_share": _ratio(rank_dist.get("1", 0), n_std),
            "rank_1_share_divisible": _ratio(int((std_rows["rank_divisible"] == 1).sum()) if n_std else 0, n_std),
        },
        meta={**dict(meta or {}), "corpus_digest": corpus_digest},
        per_trade=per_trade,
    )
    logger.info(
        "evaluation: swap recall=%s precision=%s, correlation recall=%s, btc recall=%s",
        report.swap_detection["recall"], report.swap_detection["precision"],
        report.correlation["recall"], report.btc_matching["recall"],
    )
    return report
