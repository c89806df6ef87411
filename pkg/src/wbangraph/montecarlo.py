"""Seeded Monte Carlo estimate of the decoding probability.

Each trial erases every edge independently: edge ``e`` survives iff its
uniform draw in ``[0, 1)`` is below ``p``.  Draws come from numpy's PCG64;
worker ``w`` owns the stream ``SeedSequence(seed).spawn(workers)[w]`` and
consumes one draw per edge, trial after trial, in edge-id order.  The result
is therefore a pure function of ``(graph, p, trials, seed, workers)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .analysis import classify_batch, decodable_table
from .multigraph import MultiGraph

__all__ = ["MonteCarloResult", "TrialConfig", "compare_exact", "simulate"]

# Up to this many edges, decodability is precomputed for every survivor mask.
LOOKUP_MAX_EDGES = 20
_BATCH = 1 << 17


@dataclass(frozen=True)
class TrialConfig:
    p: float
    trials: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"survival probability {self.p} outside [0, 1]")
        if self.trials < 1:
            raise ValueError(f"need at least one trial, got {self.trials}")
        if self.workers < 1:
            raise ValueError(f"need at least one worker, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class MonteCarloResult:
    successes: int
    trials: int
    p: float
    seed: int
    workers: int

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def std_error(self) -> float:
        est = self.estimate
        return math.sqrt(est * (1.0 - est) / self.trials)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["estimate"] = self.estimate
        out["std_error"] = self.std_error
        return out


def _run_worker(
    g: MultiGraph, p: float, trials: int, seed_seq: np.random.SeedSequence, table: Optional[np.ndarray]
) -> int:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    weights = np.left_shift(np.int64(1), np.arange(g.m, dtype=np.int64))
    successes = 0
    done = 0
    while done < trials:
        size = min(_BATCH, trials - done)
        alive = rng.random((size, g.m)) < p
        if table is not None:
            ok = table[alive.astype(np.int64) @ weights]
        else:
            ok = classify_batch(g, alive)
        successes += int(np.count_nonzero(ok))
        done += size
    return successes


def simulate(g: MultiGraph, config: TrialConfig) -> MonteCarloResult:
    table = decodable_table(g) if g.m <= LOOKUP_MAX_EDGES else None
    streams = np.random.SeedSequence(config.seed).spawn(config.workers)
    base, extra = divmod(config.trials, config.workers)
    shares = [base + (w < extra) for w in range(config.workers)]
    if config.workers == 1:
        counts = [_run_worker(g, config.p, shares[0], streams[0], table)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            counts = list(
                pool.map(
                    lambda w: _run_worker(g, config.p, shares[w], streams[w], table),
                    range(config.workers),
                )
            )
    return MonteCarloResult(sum(counts), config.trials, config.p, config.seed, config.workers)


def compare_exact(result: MonteCarloResult, exact: float) -> float:
    """Standard score of the estimate against the exact probability.

    A zero standard error gives ``0.0`` on an exact hit and ``inf`` otherwise.
    """
    diff = result.estimate - exact
    if result.std_error == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / result.std_error
