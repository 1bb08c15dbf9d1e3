"""Default configuration, end to end, over several seeds.

Each seed is a full desk-scale corpus (tens of thousands of txs), so these
are marked slow: `pytest -m "not slow"` skips them.
"""

import statistics
import time
from functools import lru_cache

import pytest

from haveno_trace_kit.backtest.evaluate import evaluate
from haveno_trace_kit.ledger.params import HeuristicParams
from haveno_trace_kit.scanner.btc_match import match_all
from haveno_trace_kit.scanner.correlate import correlate
from haveno_trace_kit.scanner.monero_scan import scan
from haveno_trace_kit.synth.config import GenConfig
from haveno_trace_kit.synth.generator import generate_corpus

SEEDS = (0, 1, 2, 3, 4)

pytestmark = pytest.mark.slow


@lru_cache(maxsize=None)
def _run(seed: int):
    params = HeuristicParams()
    started = time.perf_counter()
    corpus, truth = generate_corpus(GenConfig(seed=seed))
    result = scan(corpus.index(), params)
    elapsed = time.perf_counter() - started
    matches = correlate(result.candidates, corpus.trade_log, params).matches
    sets = match_all(matches, corpus.trade_stats, corpus.bitcoin_txs, params)
    report = evaluate(result.candidates, matches, sets, truth, funnel=result.funnel)
    return report.to_dict(), elapsed


@pytest.mark.parametrize("seed", SEEDS)
def test_every_standard_swap_found_and_no_disputed(seed):
    report, elapsed = _run(seed)
    assert report["funnel"]["total_txs"] >= 50_000
    assert report["swap_detection"]["truth"] == 200
    assert report["swap_detection"]["recall"] == 1.0
    assert report["swap_detection"]["disputed_total"] == 20
    assert report["swap_detection"]["disputed_detected"] == 0
    assert elapsed < 60


@pytest.mark.parametrize("seed", SEEDS)
def test_spend_shape_share_near_four_percent(seed):
    report, _ = _run(seed)
    assert 0.03 <= report["funnel"]["spend_shape_share"] <= 0.05


@pytest.mark.parametrize("seed", SEEDS)
def test_btc_shortlists_stay_small(seed):
    b = _run(seed)[0]["btc_matching"]
    assert b["recall"] >= 0.98
    assert b["per_stage"]["divisibility"]["median"] <= 3
    assert b["rank_1_share"] >= 0.6


def test_rank_1_share_median_over_seeds():
    shares = [_run(seed)[0]["btc_matching"]["rank_1_share"] for seed in SEEDS]
    assert statistics.median(shares) >= 0.6
