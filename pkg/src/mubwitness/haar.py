"""Haar-random unitaries and Monte Carlo integration over U(d).

Each sample index owns its own Philox counter block, so the unitary at
``(seed, index)`` does not depend on how samples are batched or split across
workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SamplerConfig:
    dim: int
    seed: int = 0
    chunk_size: int = 4096

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class IntegralEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n_samples, "seed": self.seed}


def index_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Generator that is a pure function of ``(seed, stream, index)``."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index & MASK64, stream]))


def ginibre(rng: np.random.Generator, d: int) -> np.ndarray:
    x = rng.standard_normal((2, d, d))
    return (x[0] + 1j * x[1]) / math.sqrt(2.0)


def haar_from_ginibre(g: np.ndarray) -> np.ndarray:
    """QR-factorise a (stack of) Ginibre matrices and strip the phases of diag(R).

    Without the phase correction the result is not Haar distributed.
    """
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def sample_block(cfg: SamplerConfig, start: int, count: int) -> np.ndarray:
    """Unitaries for indices ``start .. start+count-1`` as a ``(count, d, d)`` stack."""
    d = cfg.dim
    g = np.empty((count, d, d), dtype=np.complex128)
    for k in range(count):
        g[k] = ginibre(index_rng(cfg.seed, start + k), d)
    return haar_from_ginibre(g)


def sample_unitary(cfg: SamplerConfig, index: int) -> np.ndarray:
    if index < 0:
        raise ValueError("index must be >= 0")
    return sample_block(cfg, index, 1)[0]


def _evaluate_many(w, stack: np.ndarray) -> np.ndarray:
    if getattr(w, "evaluate_many", None) is not None:
        return np.asarray(w.evaluate_many(stack), dtype=float)
    if hasattr(w, "evaluate"):
        return np.array([w.evaluate(z) for z in stack], dtype=float)
    return np.array([w(z) for z in stack], dtype=float)


def _chunk_stats(w, cfg: SamplerConfig, start: int, count: int):
    vals = _evaluate_many(w, sample_block(cfg, start, count))
    mean = float(np.mean(vals))
    m2 = float(np.sum((vals - mean) ** 2))
    return count, mean, m2


def integrate(w, cfg: SamplerConfig, n: int, workers: int = 1) -> IntegralEstimate:
    """Monte Carlo mean of the witness ``w`` over ``n`` Haar unitaries.

    ``w`` is a WitnessFunction or any callable on matrices. Chunk statistics
    are merged in chunk order (Chan's update), so the result is bit-identical
    for a fixed ``(seed, n, chunk_size)`` regardless of ``workers``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    starts = list(range(0, n, cfg.chunk_size))
    jobs = [(s, min(cfg.chunk_size, n - s)) for s in starts]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _chunk_stats(w, cfg, *job), jobs))
    else:
        parts = [_chunk_stats(w, cfg, s, c) for s, c in jobs]

    total, mean, m2 = parts[0]
    for cnt, mu, sq in parts[1:]:
        delta = mu - mean
        new_total = total + cnt
        mean = mean + delta * cnt / new_total
        m2 = m2 + sq + delta * delta * total * cnt / new_total
        total = new_total

    var = max(m2, 0.0) / (total - 1)
    return IntegralEstimate(mean=mean, stderr=math.sqrt(var / total), n_samples=total, seed=cfg.seed)
