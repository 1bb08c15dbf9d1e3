"""haveno_trace_kit.ledger.errors

One exception tree for every stage. Each class carries the process exit code
the CLI uses when it escapes a command.
"""

from __future__ import annotations


class HavenoTraceError(Exception):
    exit_code = 1


class ConfigError(HavenoTraceError):
    exit_code = 2


# --- chain model ---

class ChainModelError(HavenoTraceError):
    exit_code = 10


class DanglingReference(ChainModelError):
    exit_code = 11


class DuplicateOutputId(ChainModelError):
    exit_code = 12


class NonMonotonicTimestamps(ChainModelError):
    exit_code = 13


class UnknownHeight(ChainModelError, KeyError):
    exit_code = 14


class InvalidRecord(ChainModelError, ValueError):
    exit_code = 15


class FeeTierMismatch(ChainModelError):
    exit_code = 16


class RingOrderViolation(ChainModelError):
    exit_code = 17


# --- generator ---

class ConfigInfeasible(HavenoTraceError):
    exit_code = 20


class InsufficientDecoys(HavenoTraceError):
    exit_code = 21


# --- matching / evaluation ---

class MissingStat(HavenoTraceError):
    exit_code = 30


class InvalidRate(HavenoTraceError, ValueError):
    exit_code = 31


class CorpusMismatch(HavenoTraceError):
    exit_code = 40


class StageError(HavenoTraceError):
    """Wraps a failure with the pipeline stage it came from."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
