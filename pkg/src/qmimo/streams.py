"""Counter-based random substreams and ordered parallel trial execution."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .channel import NoiseSources

T = TypeVar("T")


class Tag(enum.IntEnum):
    CHANNEL = 0
    RF_NOISE = 1
    THERMAL = 2
    QUANT = 3
    DROP = 4
    SYMBOLS = 5


def substream(master_seed: int, trial_id: int, stream_tag: int) -> np.random.Generator:
    """Generator keyed by ``(master_seed, trial_id, stream_tag)``.

    The key goes through ``SeedSequence`` hashing, so any trial can be
    reproduced in isolation and in any order.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_id), int(stream_tag)))
    return np.random.Generator(np.random.PCG64(ss))


def noise_sources(master_seed: int, trial_id: int) -> NoiseSources:
    return NoiseSources(
        rf=substream(master_seed, trial_id, Tag.RF_NOISE),
        thermal=substream(master_seed, trial_id, Tag.THERMAL),
        quant=substream(master_seed, trial_id, Tag.QUANT),
    )


def run_trials(fn: Callable[[int], T], trials: int, threads: int = 1) -> list[T]:
    """Evaluate ``fn(i)`` for ``i in range(trials)``; results come back in index order."""
    if threads <= 1 or trials < 2:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials), chunksize=max(1, trials // (4 * threads))))


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with a 95% normal-approximation half-width."""

    mean: float
    ci95: float
    trials: int

    def __float__(self):
        return self.mean


Z95 = 1.959963984540054


def summarize(samples: Sequence[float] | np.ndarray) -> MCEstimate:
    x = np.asarray(samples, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    half = Z95 * x.std(ddof=1) / np.sqrt(x.shape[0])
    return MCEstimate(mean=float(x.mean()), ci95=float(half), trials=int(x.shape[0]))
