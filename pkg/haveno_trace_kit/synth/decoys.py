"""haveno_trace_kit.synth.decoys

Ring construction for generated Monero inputs. Decoys come uniformly from a
trailing window of the outputs created so far; gamma-style age selection is
not modelled.
"""

from __future__ import annotations

from typing import Iterable, List, Optional

import numpy as np

from ..ledger.errors import InsufficientDecoys
from ..ledger.model import MoneroInput


class DecoyPool:
    """Output ids in creation order. The generator appends a block's outputs
    only after the block is closed, so rings never reference same-block outputs."""

    def __init__(self, output_ids: Iterable[str] = ()):
        self._ids: List[str] = list(output_ids)

    def __len__(self) -> int:
        return len(self._ids)

    def extend(self, output_ids: Iterable[str]) -> None:
        self._ids.extend(output_ids)

    def recent(self, window: int) -> List[str]:
        return self._ids[-window:] if window > 0 else []

    def pick(self, rng: np.random.Generator, window: int) -> str:
        """One output from the trailing window, used as the real spend."""
        recent = self.recent(window)
        if not recent:
            raise InsufficientDecoys("no outputs exist yet")
        return recent[int(rng.integers(0, len(recent)))]


def sample_ring(
    pool: "DecoyPool | Iterable[str]",
    real_output_id: str,
    ring_size: int,
    rng: np.random.Generator,
    window: Optional[int] = None,
) -> MoneroInput:
    """Ring of `ring_size` members: the real output plus distinct decoys, shuffled.

    `window` limits decoys to the most recent outputs (all of them when None).
    """
    if ring_size < 1:
        raise ValueError("ring_size must be >= 1")
    if isinstance(pool, DecoyPool):
        available = pool.recent(window if window is not None else len(pool))
    else:
        available = list(dict.fromkeys(pool))
        if window is not None:
            available = available[-window:] if window > 0 else []
    need = ring_size - 1
    n_decoys = len(available) - (real_output_id in available)
    if n_decoys < need:
        raise InsufficientDecoys(f"need {need} decoys for {real_output_id}, only {n_decoys} available")

    # need+1 distinct draws, minus the real output if it came up, is a uniform need-subset
    draw = rng.choice(len(available), size=min(len(available), need + 1), replace=False) if need else []
    decoys = [available[int(i)] for i in draw if available[int(i)] != real_output_id][:need]
    members = [real_output_id] + decoys
    order = rng.permutation(len(members))
    return MoneroInput(tuple(members[int(i)] for i in order))
