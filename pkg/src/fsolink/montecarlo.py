"""Stochastic oracle for the dual-hop link: samples the composite channel
and estimates outage and BER with standard errors.

Determinism contract: estimates depend only on (plan, link, request), never
on the worker count.  Samples are produced in fixed-size chunks; chunk ``i``
owns the counter-based Philox stream keyed by (master_seed, i), and chunk
partials are reduced in chunk-index order, so a run with 8 workers is
bit-identical to a single-threaded one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import HopParams
from .dualhop import LinkConfig, Modulation, OutageRequest, ber_conditional
from .special import DomainError

__all__ = [
    "SimPlan",
    "EstimateReport",
    "chunk_stream",
    "sample_channel_gain",
    "estimate_outage",
    "estimate_ber",
]


@dataclass(frozen=True)
class SimPlan:
    """Sample count, reproducibility seed and the chunking that decouples
    determinism from scheduling."""

    n_samples: int
    master_seed: int = 0
    chunk_size: int = 65536

    def __post_init__(self):
        if self.n_samples < 1 or self.chunk_size < 1:
            raise DomainError("n_samples and chunk_size must be >= 1")

    @property
    def n_chunks(self) -> int:
        return -(-self.n_samples // self.chunk_size)


@dataclass(frozen=True)
class EstimateReport:
    """A Monte-Carlo estimate with its standard error and provenance."""

    value: float
    stderr: float
    n: int
    method: str = "monte-carlo"
    seed: int = 0


def chunk_stream(master_seed: int, chunk_index: int) -> np.random.Generator:
    """Independent generator for one chunk: Philox keyed by the 128-bit
    concatenation of master seed and chunk index."""
    key = ((int(master_seed) & 0xFFFFFFFFFFFFFFFF) << 64) | (int(chunk_index) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def sample_channel_gain(hop: HopParams, stream: np.random.Generator, n: int = 1) -> np.ndarray:
    """Draw n gains h = h_a * h_p.

    Turbulence: h_a = X * Y with X ~ Gamma(shape alpha, mean 1) and
    Y ~ Exponential(mean 1) independent.  Pointing: exact inverse-CDF form
    h_p = a0 * U^(1/g^2), U uniform on (0,1); every sample satisfies
    0 < h_p <= a0.
    """
    pt = hop.pointing
    x = stream.gamma(hop.alpha, 1.0 / hop.alpha, n)
    y = stream.standard_exponential(n)
    u = stream.random(n)
    h_a = x * y
    h_p = pt.a0 * u ** (1.0 / (pt.g * pt.g))
    return h_a * h_p


def _min_snr_chunk(link: LinkConfig, plan: SimPlan, index: int) -> np.ndarray:
    lo = index * plan.chunk_size
    n = min(plan.chunk_size, plan.n_samples - lo)
    rng = chunk_stream(plan.master_seed, index)
    h1 = sample_channel_gain(link.hop1, rng, n)
    h2 = sample_channel_gain(link.hop2, rng, n)
    return np.minimum(link.hop1.mu * h1 * h1, link.hop2.mu * h2 * h2)


def _map_chunks(fn, n_chunks: int, n_jobs: int) -> list:
    if n_jobs <= 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, range(n_chunks)))


def estimate_outage(
    link: LinkConfig, req: OutageRequest, plan: SimPlan, n_jobs: int = 1
) -> EstimateReport:
    """Proportion of trials with min(mu1*h1^2, mu2*h2^2) < gamma_th;
    stderr is the binomial sqrt(v*(1-v)/n)."""

    def chunk(i: int) -> int:
        return int(np.count_nonzero(_min_snr_chunk(link, plan, i) < req.gamma_th))

    counts = _map_chunks(chunk, plan.n_chunks, n_jobs)
    hits = 0
    for c in counts:  # fixed chunk-index order
        hits += c
    n = plan.n_samples
    v = hits / n
    return EstimateReport(
        value=v, stderr=math.sqrt(v * (1.0 - v) / n), n=n, seed=plan.master_seed
    )


def estimate_ber(
    link: LinkConfig, mod: Modulation, plan: SimPlan, n_jobs: int = 1
) -> EstimateReport:
    """Sample mean of the conditional BER at the end-to-end SNR; the gain
    draws depend only on (plan, link), so different modulations evaluated
    under one seed share common random numbers."""

    def chunk(i: int) -> tuple[float, float]:
        w = ber_conditional(_min_snr_chunk(link, plan, i), mod)
        return float(np.sum(w)), float(np.sum(w * w))

    partials = _map_chunks(chunk, plan.n_chunks, n_jobs)
    s = 0.0
    s2 = 0.0
    for a, b in partials:  # fixed chunk-index order
        s += a
        s2 += b
    n = plan.n_samples
    mean = s / n
    var = max(s2 - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
    return EstimateReport(
        value=mean, stderr=math.sqrt(var / n), n=n, seed=plan.master_seed
    )
