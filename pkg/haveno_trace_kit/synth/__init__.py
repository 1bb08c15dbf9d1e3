"""Seeded synthetic corpora with planted Haveno trades."""

from .config import GenConfig, load_gen_config
from .decoys import DecoyPool, sample_ring
from .generator import GroundTruth, GroundTruthTrade, generate_corpus, load_ground_truth, save_ground_truth
from .obfuscation import obfuscate_stat

__all__ = [
    "DecoyPool",
    "GenConfig",
    "GroundTruth",
    "GroundTruthTrade",
    "generate_corpus",
    "load_gen_config",
    "load_ground_truth",
    "obfuscate_stat",
    "sample_ring",
    "save_ground_truth",
]
