from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from ..ledger.errors import ConfigError, HavenoTraceError
from ..ledger.params import HeuristicParams, load_params
from ..synth.config import load_gen_config
from .monero_scan import default_workers
from .report import render_text
from .stages import (
    BTC_CANDIDATES_FILE,
    CANDIDATES_FILE,
    MATCHES_FILE,
    REPORT_JSON_FILE,
    correlate_files,
    match_btc_files,
    run_all,
    scan_files,
    stage_correlate,
    stage_evaluate,
    stage_generate,
    stage_match_btc,
    stage_scan,
)

logger = logging.getLogger("haveno_trace_kit")


def _params(args: argparse.Namespace) -> HeuristicParams:
    # --params wins; otherwise a heuristics: section inside --config
    path = getattr(args, "params", None) or getattr(args, "config", None)
    return load_params(path)


def _require_flags(args: argparse.Namespace, mode: str, **flags: str) -> None:
    missing = [flag for attr, flag in flags.items() if not getattr(args, attr)]
    if missing:
        raise ConfigError(f"{mode} also needs {' '.join(missing)}")


def _setup_logging(level: Optional[str]) -> None:
    level = (level or os.environ.get("HAVENO_TRACE_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="haveno-trace",
        description="Link Haveno XMR/BTC trades across chains: generate, scan, correlate, match-btc, evaluate",
    )
    ap.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (env HAVENO_TRACE_LOG_LEVEL)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="Write a synthetic corpus with planted trades")
    g.add_argument("--config", default=None, help="YAML with a generator: section")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True, help="Corpus directory")

    s = sub.add_parser("scan", help="Find (spend, lockA, lockB) swap candidates")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="Corpus directory; --out is then a work directory")
    src.add_argument("--chain", help="Directory with blocks/monero_txs ndjson; --out is then the candidates file")
    s.add_argument("--params", default=None, help="YAML with a heuristics: section")
    s.add_argument("--out", required=True)
    s.add_argument("--funnel", default=None, help="Funnel counts file (default: funnel.json next to --out)")
    s.add_argument("--workers", type=int, default=None, help="Parallel scan processes (env HAVENO_TRACE_WORKERS)")

    c = sub.add_parser("correlate", help="Join swap candidates to TradeLogger broadcasts")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus")
    src.add_argument("--candidates", help="candidates.ndjson; needs --trade-log, --out is then the matches file")
    c.add_argument("--trade-log", default=None)
    c.add_argument("--params", default=None)
    c.add_argument("--work", default=None, help="Directory holding the previous stage's output (default: --out)")
    c.add_argument("--out", required=True)

    m = sub.add_parser("match-btc", help="Shortlist Bitcoin payments per matched trade")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus")
    src.add_argument("--matches", help="matches.ndjson; needs --stats and --btc, --out is then the btc candidates file")
    m.add_argument("--stats", default=None)
    m.add_argument("--btc", default=None)
    m.add_argument("--params", default=None)
    m.add_argument("--work", default=None)
    m.add_argument("--out", required=True)

    e = sub.add_parser("evaluate", help="Score stage outputs against the ground truth")
    e.add_argument("--corpus", required=True)
    e.add_argument("--params", default=None)
    e.add_argument("--work", default=None)
    e.add_argument("--out", required=True)
    e.add_argument("--format", choices=("json", "text"), default="text")

    r = sub.add_parser("run-all", help="generate -> scan -> correlate -> match-btc -> evaluate")
    r.add_argument("--config", default=None)
    r.add_argument("--params", default=None)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", required=True)
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--format", choices=("json", "text"), default="text")
    return ap


def _dispatch(args: argparse.Namespace) -> None:
    quiet = getattr(args, "format", "text") == "json"
    say = (lambda msg: print(msg, file=sys.stderr)) if quiet else print

    if args.command == "generate":
        cfg = load_gen_config(args.config, seed=args.seed)
        digest, truth = stage_generate(cfg, args.out)
        say(f"✅ corpus seed={cfg.seed} -> {args.out} ({len(truth)} planted trades, digest {digest[:12]})")

    elif args.command == "scan":
        workers = args.workers or default_workers()
        if args.chain:
            out = args.out
            result = scan_files(args.chain, _params(args), out, args.funnel, workers=workers)
        else:
            out = os.path.join(args.out, CANDIDATES_FILE)
            result = stage_scan(args.corpus, _params(args), args.out, workers=workers)
        f = result.funnel
        say(f"✅ {f.total_txs} txs -> {f.spend_shape} spend-shaped -> {f.candidates} candidates -> {out}")

    elif args.command == "correlate":
        if args.candidates:
            _require_flags(args, "--candidates", trade_log="--trade-log")
            out = args.out
            matches = correlate_files(args.candidates, args.trade_log, _params(args), out)
        else:
            out = os.path.join(args.out, MATCHES_FILE)
            matches = stage_correlate(args.corpus, _params(args), args.work or args.out, args.out)
        say(f"✅ {len(matches)} trades matched -> {out}")

    elif args.command == "match-btc":
        if args.matches:
            _require_flags(args, "--matches", stats="--stats", btc="--btc")
            out = args.out
            sets = match_btc_files(args.matches, args.stats, args.btc, _params(args), out)
        else:
            out = os.path.join(args.out, BTC_CANDIDATES_FILE)
            sets = stage_match_btc(args.corpus, _params(args), args.work or args.out, args.out)
        say(f"✅ {len(sets)} btc candidate sets -> {out}")

    elif args.command in ("evaluate", "run-all"):
        if args.command == "evaluate":
            report = stage_evaluate(args.corpus, args.work or args.out, args.out, params=_params(args))
        else:
            cfg = load_gen_config(args.config, seed=args.seed)
            report = run_all(cfg, _params(args), args.out, workers=args.workers or default_workers())
        if quiet:
            print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        else:
            print(render_text(report), end="")
        say(f"✅ report -> {os.path.join(args.out, REPORT_JSON_FILE)} (digest {report.digest()[:12]})")


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = _parser().parse_args(argv)
    _setup_logging(args.log_level)
    try:
        _dispatch(args)
    except HavenoTraceError as e:
        logger.error("%s", e)
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except Exception:
        logger.exception("unexpected failure")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
