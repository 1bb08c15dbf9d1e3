"""Repo-root entry point, same as `python -m haveno_trace_kit.scanner.run`.

    python main.py run-all --config config.yaml --out output
"""

from haveno_trace_kit.scanner.run import main

if __name__ == "__main__":
    raise SystemExit(main())
