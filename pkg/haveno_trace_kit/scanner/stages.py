"""haveno_trace_kit.scanner.stages

File-in / file-out runners for each pipeline stage, so any stage can be
re-run on its own. Every ndjson output gets a `<name>.meta.json` sidecar
naming the stage, the corpus digest and the params digest it was built from.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

from ..backtest.evaluate import EvaluationReport, check_same_corpus, evaluate
from ..ledger.errors import InvalidRecord, StageError
from ..ledger.params import HeuristicParams
from ..ledger.records import (
    BITCOIN_TXS_FILE,
    CORPUS_META_FILE,
    TRADE_LOG_FILE,
    TRADE_STATS_FILE,
    Corpus,
    bitcoin_tx_from_record,
    load_corpus,
    log_event_from_record,
    log_event_to_record,
    save_corpus,
    stat_from_record,
)
from ..synth.config import GenConfig
from ..synth.generator import GROUND_TRUTH_FILE, GroundTruth, generate_corpus, load_ground_truth, save_ground_truth
from .btc_match import BtcCandidateSet, match_all
from .correlate import TradeSwapMatch, correlate
from .monero_scan import FunnelReport, ScanResult, SwapCandidate, scan
from .report import render_text
from .utils import read_json, read_ndjson, write_json, write_ndjson

logger = logging.getLogger(__name__)

CANDIDATES_FILE = "candidates.ndjson"
FUNNEL_FILE = "funnel.json"
MATCHES_FILE = "matches.ndjson"
UNMATCHED_FILE = "unmatched_trades.ndjson"
BTC_CANDIDATES_FILE = "btc_candidates.ndjson"
REPORT_JSON_FILE = "report.json"
REPORT_TEXT_FILE = "report.txt"
PER_TRADE_FILE = "per_trade.csv"


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Attribute any failure inside the block to pipeline stage `name`."""
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        logger.error("stage %s failed: %s", name, e)
        raise StageError(name, e) from e


def sidecar_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def write_stage_output(
    rows: List[Dict[str, Any]], path: Path, stage_name: str, corpus_digest: Optional[str], params: HeuristicParams
) -> int:
    n = write_ndjson(rows, path)
    write_json(
        {"stage": stage_name, "corpus_digest": corpus_digest, "params_digest": params.digest(), "records": n},
        sidecar_path(path),
    )
    return n


def read_sidecar(path: str | Path) -> Dict[str, Any]:
    meta = sidecar_path(path)
    if not meta.exists():
        logger.warning("%s has no sidecar; provenance unchecked", path)
        return {}
    return read_json(meta)


def _require(path: Path) -> Path:
    if not path.exists():
        raise InvalidRecord(f"missing stage input {path}")
    return path


def corpus_digest_of(corpus_dir: str | Path, corpus: Optional[Corpus] = None) -> str:
    meta = Path(corpus_dir) / CORPUS_META_FILE
    if meta.exists():
        digest = read_json(meta).get("corpus_digest")
        if digest:
            return digest
    return (corpus or load_corpus(corpus_dir)).digest()


def _check_input(corpus_digest: Optional[str], path: Path) -> Optional[str]:
    side = read_sidecar(_require(path))
    return check_same_corpus({"corpus": corpus_digest, path.name: side.get("corpus_digest")})


def _digest_beside(path: Path) -> Optional[str]:
    """Digest of the corpus an input file sits in, if it sits in one."""
    meta = path.parent / CORPUS_META_FILE
    return read_json(meta).get("corpus_digest") if meta.exists() else None


# --- stages ---

def stage_generate(cfg: GenConfig, out_dir: str | Path) -> Tuple[str, GroundTruth]:
    with stage("generate"):
        corpus, truth = generate_corpus(cfg)
        digest = save_corpus(corpus, out_dir)
        save_ground_truth(truth, Path(out_dir) / GROUND_TRUTH_FILE)
        return digest, truth


def scan_files(
    chain_dir: str | Path,
    params: HeuristicParams,
    out_path: str | Path,
    funnel_path: Optional[str | Path] = None,
    workers: Optional[int] = None,
) -> ScanResult:
    """Scan the chain in `chain_dir`; candidates to `out_path`, funnel counts to `funnel_path`."""
    with stage("scan"):
        out = Path(out_path)
        corpus = load_corpus(chain_dir)
        digest = corpus_digest_of(chain_dir, corpus)
        result = scan(corpus.index(), params, workers=workers)
        write_stage_output([c.to_dict() for c in result.candidates], out, "scan", digest, params)
        write_json(
            {**result.funnel.to_dict(), "corpus_digest": digest, "params_digest": params.digest()},
            Path(funnel_path) if funnel_path else out.with_name(FUNNEL_FILE),
        )
        return result


def stage_scan(
    corpus_dir: str | Path, params: HeuristicParams, out_dir: str | Path, workers: Optional[int] = None
) -> ScanResult:
    out = Path(out_dir)
    return scan_files(corpus_dir, params, out / CANDIDATES_FILE, out / FUNNEL_FILE, workers=workers)


def read_candidates(path: str | Path) -> List[SwapCandidate]:
    return [SwapCandidate.from_dict(r) for r in read_ndjson(_require(Path(path)))]


def read_matches(path: str | Path) -> List[TradeSwapMatch]:
    return [TradeSwapMatch.from_dict(r) for r in read_ndjson(_require(Path(path)))]


def read_btc_sets(path: str | Path) -> List[BtcCandidateSet]:
    return [BtcCandidateSet.from_dict(r) for r in read_ndjson(_require(Path(path)))]


def correlate_files(
    candidates_path: str | Path,
    trade_log_path: str | Path,
    params: HeuristicParams,
    out_path: str | Path,
    corpus_digest: Optional[str] = None,
) -> List[TradeSwapMatch]:
    with stage("correlate"):
        cands, log_path, out = Path(candidates_path), Path(trade_log_path), Path(out_path)
        digest = _check_input(corpus_digest or _digest_beside(log_path), cands)
        log = [log_event_from_record(r) for r in read_ndjson(_require(log_path))]
        result = correlate(read_candidates(cands), log, params)
        write_stage_output([m.to_dict() for m in result.matches], out, "correlate", digest, params)
        write_ndjson((log_event_to_record(e) for e in result.unmatched), out.with_name(UNMATCHED_FILE))
        return result.matches


def stage_correlate(
    corpus_dir: str | Path, params: HeuristicParams, work_dir: str | Path, out_dir: Optional[str | Path] = None
) -> List[TradeSwapMatch]:
    with stage("correlate"):
        digest = corpus_digest_of(corpus_dir)
    return correlate_files(
        Path(work_dir) / CANDIDATES_FILE,
        Path(corpus_dir) / TRADE_LOG_FILE,
        params,
        Path(out_dir or work_dir) / MATCHES_FILE,
        corpus_digest=digest,
    )


def match_btc_files(
    matches_path: str | Path,
    stats_path: str | Path,
    btc_path: str | Path,
    params: HeuristicParams,
    out_path: str | Path,
    corpus_digest: Optional[str] = None,
) -> List[BtcCandidateSet]:
    with stage("match-btc"):
        matches, stats, btc = Path(matches_path), Path(stats_path), Path(btc_path)
        digest = check_same_corpus({
            "corpus": corpus_digest,
            stats.name: _digest_beside(stats),
            btc.name: _digest_beside(btc),
        })
        digest = _check_input(digest, matches)
        sets = match_all(
            read_matches(matches),
            [stat_from_record(r) for r in read_ndjson(_require(stats))],
            [bitcoin_tx_from_record(r) for r in read_ndjson(_require(btc))],
            params,
        )
        write_stage_output([s.to_dict() for s in sets], Path(out_path), "match-btc", digest, params)
        return sets


def stage_match_btc(
    corpus_dir: str | Path, params: HeuristicParams, work_dir: str | Path, out_dir: Optional[str | Path] = None
) -> List[BtcCandidateSet]:
    with stage("match-btc"):
        digest = corpus_digest_of(corpus_dir)
    corpus = Path(corpus_dir)
    return match_btc_files(
        Path(work_dir) / MATCHES_FILE,
        corpus / TRADE_STATS_FILE,
        corpus / BITCOIN_TXS_FILE,
        params,
        Path(out_dir or work_dir) / BTC_CANDIDATES_FILE,
        corpus_digest=digest,
    )


def stage_evaluate(
    corpus_dir: str | Path,
    work_dir: str | Path,
    out_dir: Optional[str | Path] = None,
    params: Optional[HeuristicParams] = None,
) -> EvaluationReport:
    with stage("evaluate"):
        work = Path(work_dir)
        out = Path(out_dir or work_dir)
        truth_path = _require(Path(corpus_dir) / GROUND_TRUTH_FILE)
        meta = read_json(_require(Path(corpus_dir) / CORPUS_META_FILE))

        sidecars = {name: read_sidecar(work / name) for name in (CANDIDATES_FILE, MATCHES_FILE, BTC_CANDIDATES_FILE)}
        digests = {"corpus": meta.get("corpus_digest")}
        digests.update({name: s.get("corpus_digest") for name, s in sidecars.items()})
        params_digests = sorted({s["params_digest"] for s in sidecars.values() if s.get("params_digest")})
        if len(params_digests) > 1:
            logger.warning("stages ran with different params: %s", [d[:12] for d in params_digests])

        funnel_path = work / FUNNEL_FILE
        funnel = FunnelReport.from_dict(read_json(funnel_path)) if funnel_path.exists() else None
        params = params or HeuristicParams()
        report = evaluate(
            read_candidates(work / CANDIDATES_FILE),
            read_matches(work / MATCHES_FILE),
            read_btc_sets(work / BTC_CANDIDATES_FILE),
            load_ground_truth(truth_path),
            funnel=funnel,
            digests=digests,
            divisibility_steps=params.divisibility_steps,
            meta={
                "seed": meta.get("seed"),
                "params_digest": params_digests[-1] if len(params_digests) == 1 else params.digest(),
                "params_consistent": len(params_digests) <= 1,
            },
        )
        write_report(report, out)
        return report


def write_report(report: EvaluationReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    write_json(report.to_dict(), out / REPORT_JSON_FILE)
    (out / REPORT_TEXT_FILE).write_text(render_text(report), encoding="utf-8")
    report.per_trade.to_csv(out / PER_TRADE_FILE, index=False)


def run_all(
    cfg: GenConfig, params: HeuristicParams, out_dir: str | Path, workers: Optional[int] = None
) -> EvaluationReport:
    """generate -> scan -> correlate -> match-btc -> evaluate under `out_dir`."""
    out = Path(out_dir)
    corpus_dir = out / "corpus"
    stage_generate(cfg, corpus_dir)
    stage_scan(corpus_dir, params, out, workers=workers)
    stage_correlate(corpus_dir, params, out)
    stage_match_btc(corpus_dir, params, out)
    return stage_evaluate(corpus_dir, out, params=params)
