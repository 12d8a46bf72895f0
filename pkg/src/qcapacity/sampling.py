"""Haar-random channels and Monte Carlo estimates of degradable fractions.

Trial ``i`` of a campaign with master seed ``s`` draws from its own stream
``SeedSequence(s, spawn_key=(i,))``, so results do not depend on how trials
are distributed over workers.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .channel import QuantumChannel, from_isometry
from .degradability import PSD_TOL, Verdict, classify

VERDICTS = tuple(v.value for v in Verdict)


def haar_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed isometry ``C^d_in -> C^d_out`` from a phase-fixed QR of a Ginibre matrix."""
    G = (rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in))) / math.sqrt(2)
    Q, R = np.linalg.qr(G)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def haar_random_channel(d: int, d_env: int, rng: np.random.Generator) -> QuantumChannel:
    if d < 2 or d_env < 1:
        raise ValueError(f"need d >= 2 and d_env >= 1, got d={d}, d_env={d_env}")
    return from_isometry(haar_isometry(d, d * d_env, rng), d_env)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def wilson_halfwidth(fraction: float, n: int, confidence: float = 0.95) -> float:
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    return z / (1 + z * z / n) * math.sqrt(fraction * (1 - fraction) / n + z * z / (4 * n * n))


@dataclass(frozen=True)
class SampleStats:
    d: int
    d_env: int
    n: int
    seed: int
    fractions: dict
    wilson_halfwidth: float

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "dE": self.d_env,
            "n": self.n,
            "seed": self.seed,
            "fractions": dict(self.fractions),
            "wilson_halfwidth": self.wilson_halfwidth,
        }


def _count_verdicts(args) -> Counter:
    d, d_env, seed, start, stop, tol = args
    counts: Counter = Counter()
    for i in range(start, stop):
        T = haar_random_channel(d, d_env, trial_rng(seed, i))
        counts[classify(T, tol).verdict.value] += 1
    return counts


def degradable_fraction(
    d: int, d_env: int, n: int, seed: int, *, tol: float = PSD_TOL, workers: int = 1, chunk: int = 1000
) -> SampleStats:
    """Classify ``n`` Haar-random channels and report the verdict fractions.

    The 95% Wilson half-width refers to the degradable fraction.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    jobs = [(d, d_env, seed, s, min(s + chunk, n), tol) for s in range(0, n, chunk)]
    counts: Counter = Counter()
    if workers <= 1:
        for job in jobs:
            counts.update(_count_verdicts(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for c in pool.map(_count_verdicts, jobs):
                counts.update(c)
    fractions = {v: counts.get(v, 0) / n for v in VERDICTS}
    return SampleStats(d, d_env, n, seed, fractions, wilson_halfwidth(fractions["degradable"], n))
