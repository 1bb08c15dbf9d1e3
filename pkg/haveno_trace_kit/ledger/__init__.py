"""Ledger data model, heuristic parameters and the chain index."""

from .index import ChainIndex, build_index, time_of
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
from .params import HeuristicParams, load_params

__all__ = [
    "BitcoinTx",
    "ChainIndex",
    "FeeTable",
    "FeeTier",
    "HeuristicParams",
    "MoneroBlock",
    "MoneroInput",
    "MoneroOutput",
    "MoneroTx",
    "TradeLogEvent",
    "TradeStatRecord",
    "build_index",
    "load_params",
    "time_of",
]
