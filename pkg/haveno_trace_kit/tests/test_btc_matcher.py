import unittest
from fractions import Fraction

import pytest

from haveno_trace_kit.ledger.errors import MissingStat
from haveno_trace_kit.ledger.model import BitcoinTx, TradeStatRecord, xmr
from haveno_trace_kit.ledger.params import HeuristicParams
from haveno_trace_kit.scanner.btc_match import BtcCandidateSet, match_all, match_btc, swap_windows
from haveno_trace_kit.scanner.correlate import TradeSwapMatch, correlate
from haveno_trace_kit.scanner.monero_scan import SwapCandidate, scan
from haveno_trace_kit.synth.generator import generate_corpus

from .builders import small_config, small_params

T = 1_700_000_000
RATE = Fraction(400_000)  # sat per XMR


def _match(trade_id="T1", spans=((T - 1200, T),)):
    swaps = tuple(
        SwapCandidate(f"spend{i}", f"a{i}", f"b{i}", 100 + i, t1, 90, 90, t0)
        for i, (t0, t1) in enumerate(spans)
    )
    return TradeSwapMatch(trade_id, spans[-1][1], swaps, (60, 600))


def _stat(published="2.6", trade_id="T1"):
    return TradeStatRecord(trade_id, xmr(published), RATE, T + 3000)


class TestMatchBtc(unittest.TestCase):
    def test_planted_payment_is_the_only_survivor(self):
        btc = [
            BitcoinTx("pay", T - 600, (1_000_000, 73_211)),  # 2.5 XMR
            BitcoinTx("far", T - 500, (2_000_000,)),  # 5 XMR, out of range
            BitcoinTx("fine", T - 400, (1_000_001,)),  # 2.5000025 XMR, too many decimals
        ]
        result = match_btc(_match(), _stat(), btc, HeuristicParams())
        self.assertEqual([c.btc_tx_id for c in result.candidates], ["pay"])
        c = result.candidates[0]
        self.assertEqual(c.amount_sat, 1_000_000)
        self.assertEqual(c.implied_xmr_piconero, xmr("2.5"))
        self.assertEqual(c.distance, xmr("0.1"))
        self.assertTrue(c.divisible)
        self.assertEqual((result.n_in_window, result.n_in_range, result.n_decimals), (3, 2, 1))

    def test_window_is_closed(self):
        btc = [
            BitcoinTx("before", T - 1201, (1_000_000,)),
            BitcoinTx("start", T - 1200, (1_000_000,)),
            BitcoinTx("end", T, (1_000_000,)),
            BitcoinTx("after", T + 1, (1_000_000,)),
        ]
        result = match_btc(_match(), _stat(), btc, HeuristicParams())
        self.assertEqual(sorted(c.btc_tx_id for c in result.candidates), ["end", "start"])

    def test_sorted_by_distance_then_id(self):
        btc = [
            BitcoinTx("b-exact", T - 10, (1_040_000,)),  # 2.6 XMR, distance 0
            BitcoinTx("c-odd", T - 20, (1_020_400,)),  # 2.551 XMR
            BitcoinTx("a-exact", T - 30, (1_040_000,)),
            BitcoinTx("pay", T - 40, (1_000_000,)),
        ]
        result = match_btc(_match(), _stat(), btc, HeuristicParams())
        self.assertEqual([c.btc_tx_id for c in result.candidates], ["a-exact", "b-exact", "c-odd", "pay"])
        self.assertEqual([c.btc_tx_id for c in result.divisible_candidates], ["a-exact", "b-exact", "pay"])

    def test_per_total_mode_sums_outputs(self):
        btc = [BitcoinTx("split", T - 60, (600_000, 400_000))]
        self.assertEqual(match_btc(_match(), _stat(), btc, HeuristicParams()).candidates, ())
        total = match_btc(_match(), _stat(), btc, HeuristicParams(btc_amount_mode="per_total"))
        self.assertEqual([c.amount_sat for c in total.candidates], [1_000_000])

    def test_best_output_kept_per_tx(self):
        btc = [BitcoinTx("two", T - 60, (1_000_000, 1_040_000))]
        result = match_btc(_match(), _stat(), btc, HeuristicParams())
        self.assertEqual(len(result.candidates), 1)
        self.assertEqual(result.candidates[0].amount_sat, 1_040_000)

    def test_missing_stat(self):
        with self.assertRaises(MissingStat):
            match_btc(_match(), None, [], HeuristicParams())
        with self.assertRaises(MissingStat):
            match_btc(_match(), _stat(trade_id="other"), [], HeuristicParams())
        with self.assertRaises(MissingStat):
            match_all([_match()], [], [], HeuristicParams())

    def test_swap_windows_merge(self):
        m = _match(spans=((T, T + 100), (T + 50, T + 300), (T + 1000, T + 1200)))
        self.assertEqual(swap_windows(m), ((T, T + 300), (T + 1000, T + 1200)))

    def test_set_round_trip(self):
        btc = [BitcoinTx("pay", T - 600, (1_000_000,))]
        s = match_btc(_match(), _stat(), btc, HeuristicParams())
        self.assertEqual(BtcCandidateSet.from_dict(s.to_dict()), s)
        self.assertEqual(s.to_dict()["counts"], {"in_window": 1, "in_range": 1, "decimals": 1, "divisibility": 1})


def _pipeline(seed, **overrides):
    corpus, truth = generate_corpus(small_config(seed=seed, **overrides))
    params = small_params()
    candidates = scan(corpus.index(), params).candidates
    matches = correlate(candidates, corpus.trade_log, params).matches
    return truth, match_all(matches, corpus.trade_stats, corpus.bitcoin_txs, params)


@pytest.mark.parametrize("seed", [3, 4, 5])
def test_filters_only_narrow(seed):
    _, sets = _pipeline(seed)
    assert sets
    for s in sets:
        assert s.n_in_window >= s.n_in_range >= s.n_decimals >= len(s.divisible_candidates)
        lo, hi = s.amount_range
        assert lo <= s.published_xmr_amount <= hi
        assert [c.distance for c in s.candidates] == sorted(c.distance for c in s.candidates)


def test_true_payment_survives_for_every_standard_trade():
    hits = total = 0
    for seed in range(10, 15):
        truth, sets = _pipeline(seed, n_planted_trades=16, fraction_disputed="0")
        by_trade = {s.trade_id: s for s in sets}
        for t in truth.standard:
            total += 1
            s = by_trade.get(t.trade_id)
            hits += s is not None and any(c.btc_tx_id == t.btc_tx_id for c in s.candidates)
    assert hits == total


def test_even_trades_survive_divisibility():
    truth, sets = _pipeline(21, n_planted_trades=20, fraction_disputed="0",
                            amount_profile={"even": 1.0, "four_decimal": 0.0, "free": 0.0})
    by_trade = {s.trade_id: s for s in sets}
    for t in truth.trades:
        assert any(c.btc_tx_id == t.btc_tx_id for c in by_trade[t.trade_id].divisible_candidates)


if __name__ == "__main__":
    unittest.main()
