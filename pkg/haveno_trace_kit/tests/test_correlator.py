import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from haveno_trace_kit.ledger.model import TradeLogEvent
from haveno_trace_kit.ledger.params import HeuristicParams
from haveno_trace_kit.scanner.correlate import TradeSwapMatch, correlate
from haveno_trace_kit.scanner.monero_scan import SwapCandidate, scan
from haveno_trace_kit.synth.generator import generate_corpus

from .builders import small_config, small_params


def _swap(name: str, t: int, height: int = 10) -> SwapCandidate:
    return SwapCandidate(f"{name}-spend", f"{name}-a", f"{name}-b", height, t, height - 5, height - 5, t - 600)


class TestCorrelateWindow(unittest.TestCase):
    def setUp(self):
        self.params = HeuristicParams()
        self.t = 1_700_000_000

    def test_window_is_closed_on_both_ends(self):
        swaps = [
            _swap("early-out", self.t - 61),
            _swap("early-edge", self.t - 60),
            _swap("late-edge", self.t + 600),
            _swap("late-out", self.t + 601),
        ]
        result = correlate(swaps, [TradeLogEvent("T1", self.t)], self.params)
        self.assertEqual(len(result.matches), 1)
        names = [s.spend_tx_id for s in result.matches[0].swaps]
        self.assertEqual(sorted(names), ["early-edge-spend", "late-edge-spend"])
        self.assertEqual(result.matches[0].window, (60, 600))

    def test_unmatched_event(self):
        result = correlate([_swap("x", self.t)], [TradeLogEvent("T1", self.t + 5000)], self.params)
        self.assertEqual(result.matches, [])
        self.assertEqual([e.trade_id for e in result.unmatched], ["T1"])

    def test_swap_can_sit_under_several_trades(self):
        swaps = [_swap("s", self.t + 100)]
        log = [TradeLogEvent("T1", self.t), TradeLogEvent("T2", self.t + 200)]
        result = correlate(swaps, log, self.params)
        self.assertEqual([m.trade_id for m in result.matches], ["T1", "T2"])
        self.assertEqual(result.n_swaps, 2)

    def test_empty_inputs(self):
        result = correlate([], [], self.params)
        self.assertEqual((result.matches, result.unmatched), ([], []))

    def test_match_round_trip(self):
        m = correlate([_swap("s", self.t)], [TradeLogEvent("T1", self.t)], self.params).matches[0]
        self.assertEqual(TradeSwapMatch.from_dict(m.to_dict()), m)

    def test_wider_window_only_adds(self):
        swaps = [_swap(f"s{i}", self.t + d) for i, d in enumerate((-300, -90, -30, 0, 400, 700, 1200))]
        log = [TradeLogEvent("T1", self.t)]
        narrow = correlate(swaps, log, HeuristicParams(correlate_before=30, correlate_after=300)).matches[0]
        wide = correlate(swaps, log, HeuristicParams(correlate_before=120, correlate_after=900)).matches[0]
        self.assertLess(set(narrow.swaps), set(wide.swaps))


@settings(max_examples=200, deadline=None)
@given(
    offsets=st.lists(st.integers(-3000, 3000), max_size=30),
    before=st.integers(1, 600),
    after=st.integers(1, 1200),
    widen_before=st.integers(0, 600),
    widen_after=st.integers(0, 600),
)
def test_correlation_window_oracle_and_monotonicity(offsets, before, after, widen_before, widen_after):
    t = 1_700_000_000
    swaps = [_swap(f"s{i}", t + d) for i, d in enumerate(offsets)]
    log = [TradeLogEvent("T1", t)]

    def matched(b, a):
        result = correlate(swaps, log, HeuristicParams(correlate_before=b, correlate_after=a))
        return {s.spend_tx_id for m in result.matches for s in m.swaps}

    narrow = matched(before, after)
    assert narrow == {f"s{i}-spend" for i, d in enumerate(offsets) if -before <= d <= after}
    assert narrow <= matched(before + widen_before, after + widen_after)


def test_planted_trades_correlate_to_their_swap():
    corpus, truth = generate_corpus(small_config(seed=31, n_planted_trades=20, fraction_disputed="0"))
    candidates = scan(corpus.index(), small_params()).candidates
    result = correlate(candidates, corpus.trade_log, small_params())
    by_trade = {m.trade_id: m for m in result.matches}
    hits = 0
    for t in truth.trades:
        m = by_trade.get(t.trade_id)
        triple = (t.spend_tx_id, *sorted((t.lock_a_tx_id, t.lock_b_tx_id)))
        hits += m is not None and any(s.triple == triple for s in m.swaps)
    assert hits / len(truth) >= 0.98


def test_spends_delayed_eleven_minutes_do_not_match():
    corpus, truth = generate_corpus(small_config(seed=32, n_planted_trades=15, fraction_disputed="0"))
    candidates = scan(corpus.index(), small_params()).candidates
    # move every broadcast 11 minutes before its spend block time
    spend_time = {c.spend_tx_id: c.spend_timestamp for c in candidates}
    delayed = [TradeLogEvent(t.trade_id, spend_time[t.spend_tx_id] - 660) for t in truth.trades]
    result = correlate(candidates, delayed, small_params())
    for m in result.matches:
        t = truth.by_trade()[m.trade_id]
        assert all(s.spend_tx_id != t.spend_tx_id for s in m.swaps)


def test_daily_batch_breaks_correlation():
    corpus, truth = generate_corpus(small_config(seed=33, n_planted_trades=15, fraction_disputed="0", trade_log_mode="daily_batch"))
    candidates = scan(corpus.index(), small_params()).candidates
    result = correlate(candidates, corpus.trade_log, small_params())
    hits = 0
    for m in result.matches:
        t = truth.by_trade()[m.trade_id]
        hits += any(s.spend_tx_id == t.spend_tx_id for s in m.swaps)
    assert hits <= 1


if __name__ == "__main__":
    unittest.main()
