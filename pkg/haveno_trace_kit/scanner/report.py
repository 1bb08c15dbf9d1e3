from __future__ import annotations

from typing import Any, Dict, List, Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from ..backtest.evaluate import EvaluationReport


def _pct(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x * 100:.1f}%"


def _num(x: Any) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.2f}"
    return f"{x:,}" if isinstance(x, int) else str(x)


def _funnel_rows(f: Dict[str, Any]) -> List[str]:
    return [
        f"  txs scanned            {_num(f.get('total_txs'))}",
        f"  spend-shaped (2in/2out) {_num(f.get('spend_shape'))}  ({_pct(f.get('spend_shape_share'))})",
        f"  with a lock pair       {_num(f.get('spends_with_pair'))}",
        f"  swap candidates        {_num(f.get('candidates'))}  ({_pct(f.get('candidate_share_of_spend_shape'))} of spend-shaped)",
        f"  trades matched         {_num(f.get('trades_matched'))} of {_num(f.get('planted_trades'))} planted",
        f"  swaps under trades     {_num(f.get('swaps_matched'))}",
    ]


def render_text(report: "EvaluationReport") -> str:
    f, s, c, b, ref, meta = (
        report.funnel, report.swap_detection, report.correlation, report.btc_matching, report.reference, report.meta,
    )
    lines = [
        "Haveno trace report",
        f"seed {meta.get('seed')}  corpus {str(meta.get('corpus_digest'))[:12]}  params {str(meta.get('params_digest'))[:12]}",
        "",
        "Funnel",
        *_funnel_rows(f),
        f"  mainnet reference      {ref['spend_shape']:,} / {ref['total_txs']:,} spend-shaped, {ref['candidates']:,} candidates",
        "",
        "Swap detection",
        f"  recall    {_pct(s.get('recall'))}  ({s.get('true_positives')}/{s.get('truth')} standard trades)",
        f"  precision {_pct(s.get('precision'))}  ({s.get('detected')} detected)",
        f"  disputed  {s.get('disputed_detected')}/{s.get('disputed_total')} detected",
        "",
        "Trade correlation",
        f"  recall    {_pct(c.get('recall'))}  ({c.get('correlated')}/{c.get('standard_trades')})",
        f"  swaps per matched trade {_num(c.get('mean_swaps_per_match'))}",
        "",
        "BTC matching",
        f"  recall    {_pct(b.get('recall'))}  ({b.get('found')}/{b.get('standard_trades')})",
    ]
    for stage_name, st in (b.get("per_stage") or {}).items():
        lines.append(f"  {stage_name:<13} mean {_num(st.get('mean'))}  median {_num(st.get('median'))}")
    lines.append(f"  truth ranked 1st        {_pct(b.get('rank_1_share'))}  (divisible subset {_pct(b.get('rank_1_share_divisible'))})")
    ranks = b.get("rank_of_truth") or {}
    if ranks:
        lines.append("  rank of truth           " + ", ".join(f"{k}: {v}" for k, v in ranks.items()))
    lines.append(
        f"  mainnet reference       {ref['btc_mean_candidates_range']} in range -> "
        f"{ref['btc_mean_candidates_divisible']} divisible (median {ref['btc_median_candidates_divisible']})"
    )
    return "\n".join(lines) + "\n"
