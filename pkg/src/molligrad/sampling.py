"""Deterministic, seedable sampling via inverse transform.

The generator is numpy's Philox bit generator (Philox4x64 counter-based,
period >= 2^128 per key), keyed by the 64-bit pair (seed, stream_id).
numpy guarantees stream stability for a fixed key across versions and
platforms, which keeps golden tests stable. Stream ids separate roles,
not samples: one vectorized row-major draw fills a whole (count, n) batch,
so the first k rows of a larger batch from the same state are bit-identical
to a batch of size k (the prefix property nested convergence schedules
rely on), and thread count cannot reorder anything.

Every kernel samples by inverse transform. Uniforms are clamped away from
the open-interval endpoints before the transform so unbounded inverse CDFs
stay finite.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch
from .kernels import Kernel

__all__ = [
    "RngState", "SampleBatch", "draw_batch", "uniforms",
    "ks_statistic", "ks_critical", "derive_seed",
    "STREAM_INPUT", "STREAM_PARAMS", "STREAM_INIT", "STREAM_DATA",
]

# stream roles; keep values stable, they are part of the determinism contract
STREAM_INPUT = 0
STREAM_PARAMS = 1
STREAM_INIT = 2
STREAM_DATA = 3

_U64 = 2**64
_GOLDEN = 0x9E3779B97F4A7C15
# smallest/largest uniforms fed to inverse CDFs
_U_LO = 2.0**-53
_U_HI = 1.0 - 2.0**-53


@dataclass(frozen=True)
class RngState:
    """Counter-based generator state: identical (seed, stream_id) reproduces
    the identical sequence on any machine and thread count."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer))
                and isinstance(self.stream_id, (int, np.integer))):
            raise ConfigInvalid("seed and stream_id must be integers")
        if not (0 <= self.seed < _U64 and 0 <= self.stream_id < _U64):
            raise ConfigInvalid("seed and stream_id must be unsigned 64-bit")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, index: int) -> int:
    """Stable per-case seed: golden-ratio stride keeps derived seeds distinct."""
    return (seed + _GOLDEN * (index + 1)) % _U64


def uniforms(state: RngState, count: int, n: int) -> np.ndarray:
    """(count, n) doubles in [2^-53, 1 - 2^-53], row-major draw order."""
    if count < 1 or n < 1:
        raise ConfigInvalid(f"need count >= 1 and n >= 1, got {count}, {n}")
    u = state.generator().random((count, n))
    return np.clip(u, _U_LO, _U_HI)


@dataclass(frozen=True)
class SampleBatch:
    """N points in R^n drawn from a kernel, with per-sample log importance
    weights log pdf_eps(t_i) - log p(t_i). When the sampling distribution is
    the kernel itself every log weight is exactly 0."""

    points: np.ndarray
    log_weights: np.ndarray
    kernel: Kernel
    n: int = field(default=0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        lw = np.asarray(self.log_weights, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ConfigInvalid("points must be (N, n) with N >= 1")
        if lw.shape != (pts.shape[0],):
            raise ConfigInvalid("log_weights must be one scalar per point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "log_weights", lw)
        object.__setattr__(self, "n", pts.shape[1])

    def __len__(self):
        return self.points.shape[0]

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


def draw_batch(kernel: Kernel, n: int, count: int, state: RngState) -> SampleBatch:
    """Draw count i.i.d. points in R^n from the kernel (p = pdf_eps, so the
    importance weights are exactly 1). Fully determined by
    (seed, stream_id, kernel, n, count)."""
    u = uniforms(state, count, n)
    pts = kernel.inv_cdf_array(u)
    return SampleBatch(pts, np.zeros(count), kernel)


def ks_statistic(batch: SampleBatch, kernel: Kernel) -> float:
    """One-sample Kolmogorov-Smirnov statistic against the kernel's CDF."""
    if batch.n != 1:
        raise DimensionMismatch(f"KS check needs 1-d samples, got n={batch.n}")
    x = np.sort(batch.points[:, 0])
    cdf = kernel.cdf_array(x)
    n = x.shape[0]
    up = np.arange(1, n + 1) / n - cdf
    dn = cdf - np.arange(0, n) / n
    return float(max(up.max(), dn.max()))


def ks_critical(n: int, level: float = 0.99) -> float:
    """Asymptotic one-sample KS critical value c(alpha)/sqrt(n).

    c(alpha) = sqrt(-ln(alpha/2)/2); at the 99% level c = 1.6276...
    """
    if n < 1:
        raise ConfigInvalid("n must be >= 1")
    if not 0.0 < level < 1.0:
        raise ConfigInvalid("level must be in (0, 1)")
    alpha = 1.0 - level
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n)
