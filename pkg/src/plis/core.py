"""Shared domain primitives: null distributions, the z-value transform,
and ground-truth error metrics (FDP/TDP).

All arrays are 1-D float64/int8 numpy arrays over an ordered index set
1..m. Values containing NaN/Inf are rejected at ingestion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import ndtri

_CDF_EPS = 1e-15


class PlisError(Exception):
    """Base class for structured errors raised by this package."""


class LengthMismatchError(PlisError):
    pass


class IngestionError(PlisError):
    pass


def as_observations(x) -> np.ndarray:
    """Validate and convert raw observations to a float64 vector.

    NaN/Inf are rejected here rather than silently propagated.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise IngestionError(f"expected a 1-D sequence, got shape {arr.shape}")
    if arr.size < 1:
        raise IngestionError("empty observation sequence")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise IngestionError(f"non-finite observation at position {bad}")
    return arr


def as_binary(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise IngestionError(f"{name} must be 1-D")
    if not np.all((arr == 0) | (arr == 1)):
        raise IngestionError(f"{name} must be binary")
    return arr.astype(np.int8)


@dataclass(frozen=True)
class MetricsPair:
    """False discovery proportion and true discovery proportion."""

    fdp: float
    tdp: float


def compute_fdp_tdp(decisions, truth) -> MetricsPair:
    """FDP = (false rejections) / (rejections or 1); TDP = (true rejections) / (non-nulls or 1)."""
    delta = as_binary(decisions, "decisions")
    theta = as_binary(truth, "truth")
    if delta.shape != theta.shape:
        raise LengthMismatchError(
            f"decisions length {delta.size} != truth length {theta.size}"
        )
    n_rej = int(delta.sum())
    n_alt = int(theta.sum())
    fdp = float(((1 - theta) * delta).sum()) / max(n_rej, 1)
    tdp = float((theta * delta).sum()) / max(n_alt, 1)
    return MetricsPair(fdp=fdp, tdp=tdp)


class NullDistribution:
    """Continuous null law exposing density, CDF and a seeded sampler."""

    def pdf(self, x):
        raise NotImplementedError

    def logpdf(self, x):
        return np.log(self.pdf(x))

    def cdf(self, x):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(NullDistribution):
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not (self.sd > 0):
            raise IngestionError("gaussian sd must be positive")

    def pdf(self, x):
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * np.sqrt(2.0 * np.pi))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.sd
        return -0.5 * z * z - np.log(self.sd) - 0.5 * np.log(2.0 * np.pi)

    def cdf(self, x):
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.sd
        return stats.norm.cdf(z)

    def sample(self, rng, size):
        return rng.normal(self.mean, self.sd, size=size)


STANDARD_NORMAL = Gaussian(0.0, 1.0)


class ScipyNull(NullDistribution):
    """Adapter for any frozen continuous scipy.stats distribution."""

    def __init__(self, frozen):
        self._dist = frozen

    def pdf(self, x):
        return self._dist.pdf(x)

    def logpdf(self, x):
        return self._dist.logpdf(x)

    def cdf(self, x):
        return self._dist.cdf(x)

    def sample(self, rng, size):
        return self._dist.rvs(size=size, random_state=rng)


def z_transform(x, f0: NullDistribution):
    """Map observations to z-values via Phi^{-1}(F0(x)).

    CDF values that are numerically 0 or 1 are clamped to
    [1e-15, 1 - 1e-15]; callers can detect clamping via
    ``z_transform_clamped``.
    """
    u = np.clip(f0.cdf(x), _CDF_EPS, 1.0 - _CDF_EPS)
    return ndtri(u)


def z_transform_clamped(x, f0: NullDistribution) -> np.ndarray:
    """Boolean mask of positions where the z-transform had to clamp F0(x)."""
    u = np.asarray(f0.cdf(x), dtype=np.float64)
    return (u <= _CDF_EPS) | (u >= 1.0 - _CDF_EPS)


def derive_rng(seed: int, *stream) -> np.random.Generator:
    """Counter-based generator for a named substream of a base seed.

    Distinct (seed, stream) pairs give statistically independent streams,
    so replication-level parallelism cannot change any drawn values.
    """
    key = tuple(_stream_part(p) for p in stream)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _stream_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    if isinstance(part, str):
        import zlib

        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"stream parts must be int or str, got {type(part)!r}")
