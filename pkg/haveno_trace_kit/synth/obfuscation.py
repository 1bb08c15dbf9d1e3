"""haveno_trace_kit.synth.obfuscation

What Haveno does to a trade before publishing it in the statistics: scale
the amount by a factor from [1-d, 1+d] and delay the date by up to a day.
The exchange rate is published untouched.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Tuple

import numpy as np

# resolution of the uniform factor draw
FACTOR_STEPS = 10**9


def draw_factor(rng: np.random.Generator, delta: Fraction) -> Fraction:
    """Uniform factor on [1-delta, 1+delta], as an exact rational."""
    u = int(rng.integers(0, FACTOR_STEPS + 1))
    return 1 - delta + 2 * delta * Fraction(u, FACTOR_STEPS)


def obfuscate_stat(
    true_xmr: int,
    completion_ts: int,
    rng: np.random.Generator,
    delta: Fraction = Fraction(5, 100),
    stat_shift_max: int = 24 * 3600,
) -> Tuple[int, int]:
    """(published piconero amount, published timestamp).

    Published amount is round(true * f). Since the true amount is a whole
    piconero, it always lies in the outward-rounded preimage of the result.
    """
    if true_xmr <= 0:
        raise ValueError(f"true amount must be > 0, got {true_xmr}")
    published = round(true_xmr * draw_factor(rng, Fraction(delta)))
    shift = int(rng.integers(0, stat_shift_max + 1))
    return max(1, published), completion_ts + shift
