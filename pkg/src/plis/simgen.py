"""Seeded synthetic-data generators for the simulation studies.

Every generator is a pure function of its parameters and seed: the same
call always returns bit-identical data, and distinct seeds give
independent counter-based random streams, so replication-level
parallelism never changes drawn values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import PlisError, derive_rng

GENERATOR_KINDS = (
    "hmm",
    "hetero_hmm_exp",
    "hetero_hmm_periodic",
    "two_layer_arma",
    "renewal",
    "covariate_adaptive",
    "iid_two_group",
)

NOISE_KINDS = ("iid", "equicorrelated", "ar1")


@dataclass(frozen=True)
class LabeledDataset:
    """Observations with ground-truth states and an optional labeled
    null pool for semi-supervised runs."""

    x: np.ndarray
    truth: np.ndarray
    nulls: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.x.size

    def to_delimited(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("index,x,theta\n")
            for i in range(self.m):
                fh.write(f"{i + 1},{float(self.x[i])!r},{int(self.truth[i])}\n")


@dataclass(frozen=True)
class GeneratorConfig:
    """Declarative description of one simulation cell, resolvable by name."""

    kind: str
    m: int = 2000
    mu: float = 2.6
    params: dict = field(default_factory=dict)
    noise: str = "iid"
    rho: float = 0.0
    n_nulls: int | None = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise PlisError(f"unknown generator {self.kind!r}")
        if self.noise not in NOISE_KINDS:
            raise PlisError(f"unknown noise kind {self.noise!r}")
        if self.m < 1:
            raise PlisError("m must be >= 1")
        if self.noise == "equicorrelated" and not (0 <= self.rho < 1):
            raise PlisError("equicorrelated rho must lie in [0, 1)")
        if self.noise == "ar1" and not (-1 < self.rho < 1):
            raise PlisError("ar1 rho must lie in (-1, 1)")

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "m": self.m,
                "mu": self.mu,
                "params": self.params,
                "noise": self.noise,
                "rho": self.rho,
                "n_nulls": self.n_nulls,
            },
            sort_keys=True,
        )


def _emit(truth: np.ndarray, mu: float, rng: np.random.Generator) -> np.ndarray:
    """Conditional Gaussian draws: N(0,1) under the null, N(mu,1) else."""
    return rng.standard_normal(truth.size) + mu * truth


def _markov_states(m: int, a01, a11, rng: np.random.Generator) -> np.ndarray:
    """Binary chain started at state 0. a01/a11 may be scalars or
    per-transition arrays of length m (entry k drives transition k)."""
    u = rng.random(m)
    a01 = np.broadcast_to(np.asarray(a01, dtype=np.float64), (m,))
    a11 = np.broadcast_to(np.asarray(a11, dtype=np.float64), (m,))
    theta = np.zeros(m, dtype=np.int8)
    for k in range(1, m):
        p_one = a11[k] if theta[k - 1] else a01[k]
        theta[k] = u[k] < p_one
    return theta


def gen_hmm(m: int, a00: float, a11: float, mu: float, seed: int) -> LabeledDataset:
    """Homogeneous two-state chain (started at null) with Gaussian emissions."""
    if not (0 <= a00 <= 1 and 0 <= a11 <= 1):
        raise PlisError("transition probabilities must lie in [0, 1]")
    rng = derive_rng(seed, "gen_hmm")
    theta = _markov_states(m, 1.0 - a00, a11, rng)
    return LabeledDataset(x=_emit(theta, mu, rng), truth=theta)


def hetero_a11(schedule: str, k) -> np.ndarray:
    """Per-transition self-transition probability of the non-null state."""
    k = np.asarray(k, dtype=np.float64)
    if schedule == "exp_decay":
        return 0.9 * np.exp(-k / 1000.0)
    if schedule == "periodic":
        return 0.4 * (1.0 + np.sin(k / 100.0))
    raise PlisError(f"unknown schedule {schedule!r}")


def gen_hetero_hmm(m: int, schedule: str, mu: float, seed: int) -> LabeledDataset:
    """Time-varying chain: a00 = 0.95 fixed, a11 follows the schedule."""
    rng = derive_rng(seed, "gen_hetero_hmm", schedule)
    a11 = hetero_a11(schedule, np.arange(m))
    theta = _markov_states(m, 0.05, a11, rng)
    return LabeledDataset(x=_emit(theta, mu, rng), truth=theta)


def gen_two_layer(m: int, c: float, mu: float, seed: int) -> LabeledDataset:
    """States driven by a latent ARMA(2,1) sequence:
    Z_t = c + Z_{t-1} - 0.5 Z_{t-2} + eps_t + 0.1 eps_{t-1},
    eps ~ N(0, 0.5^2), Z_0 = Z_{-1} = 0; theta_i = 1{Z_i < 0}."""
    if c < 0:
        raise PlisError("c must be nonnegative")
    rng = derive_rng(seed, "gen_two_layer")
    eps = 0.5 * rng.standard_normal(m + 1)
    z = np.zeros(m + 2)
    for t in range(2, m + 2):
        z[t] = c + z[t - 1] - 0.5 * z[t - 2] + eps[t - 1] + 0.1 * eps[t - 2]
    theta = (z[2:] < 0).astype(np.int8)
    return LabeledDataset(x=_emit(theta, mu, rng), truth=theta)


def gen_renewal(m: int, lam: float, mu: float, seed: int) -> LabeledDataset:
    """Alternating null/non-null blocks from a renewal process: null block
    lengths Unif{2..20}, non-null block lengths 1 + Poisson(lam); the
    sequence starts with a null block and is truncated at m."""
    if lam <= 0:
        raise PlisError("lam must be positive")
    rng = derive_rng(seed, "gen_renewal")
    theta = np.zeros(m, dtype=np.int8)
    pos = 0
    non_null = False
    while pos < m:
        gap = int(1 + rng.poisson(lam)) if non_null else int(rng.integers(2, 21))
        if non_null:
            theta[pos : pos + gap] = 1
        pos += gap
        non_null = not non_null
    return LabeledDataset(x=_emit(theta, mu, rng), truth=theta)


_WINDOWS_I = ((201, 500), (801, 1100), (1501, 1800), (2101, 2400))
_WINDOWS_II_DOUBLE = ((201, 350), (1501, 1650))
_WINDOWS_II_SINGLE = ((801, 1000), (2101, 2300))


def covariate_profile(m: int, scenario: str, pi_base: float, mu: float):
    """Per-index signal probability and non-null mean for the
    covariate-modulated independent designs."""
    s = np.arange(1, m + 1, dtype=np.float64)
    pi_s = np.full(m, 0.02)
    if scenario == "i":
        in_window = np.zeros(m, dtype=bool)
        for lo, hi in _WINDOWS_I:
            in_window |= (s >= lo) & (s <= hi)
        pi_s[in_window] = 0.4 * (1.0 + np.sin(0.2 * s[in_window]))
        mean_s = mu + 0.2 * np.sin(0.6 * s)
    elif scenario == "ii":
        for lo, hi in _WINDOWS_II_DOUBLE:
            pi_s[(s >= lo) & (s <= hi)] = 2.0 * pi_base
        for lo, hi in _WINDOWS_II_SINGLE:
            pi_s[(s >= lo) & (s <= hi)] = pi_base
        mean_s = np.full(m, 2.8)
    else:
        raise PlisError(f"unknown scenario {scenario!r}; expected 'i' or 'ii'")
    return np.clip(pi_s, 0.0, 1.0), mean_s


def gen_covariate(m: int, scenario: str, pi_base: float, mu: float, seed: int) -> LabeledDataset:
    """Independent Bernoulli states with location-varying sparsity and
    signal strength (windows of elevated signal probability)."""
    rng = derive_rng(seed, "gen_covariate", scenario)
    pi_s, mean_s = covariate_profile(m, scenario, pi_base, mu)
    theta = (rng.random(m) < pi_s).astype(np.int8)
    x = rng.standard_normal(m) + mean_s * theta
    return LabeledDataset(x=x, truth=theta)


def gen_iid_two_group(m: int, pi: float, mu: float, seed: int) -> LabeledDataset:
    """i.i.d. Bernoulli(pi) states with Gaussian emissions."""
    if not (0 <= pi <= 1):
        raise PlisError("pi must lie in [0, 1]")
    rng = derive_rng(seed, "gen_iid_two_group")
    theta = (rng.random(m) < pi).astype(np.int8)
    return LabeledDataset(x=_emit(theta, mu, rng), truth=theta)


def _correlated_noise(size: int, noise: str, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Second noise component with marginal variance 1/2 and the given
    dependence structure."""
    scale = np.sqrt(0.5)
    if noise == "equicorrelated":
        g = rng.standard_normal()
        h = rng.standard_normal(size)
        return scale * (np.sqrt(rho) * g + np.sqrt(1.0 - rho) * h)
    if noise == "ar1":
        e = rng.standard_normal(size)
        out = np.empty(size)
        out[0] = e[0]
        a = np.sqrt(1.0 - rho * rho)
        for t in range(1, size):
            out[t] = rho * out[t - 1] + a * e[t]
        return scale * out
    raise PlisError(f"unknown noise kind {noise!r}")


def apply_noise(
    truth,
    mu: float,
    noise: str,
    rho: float,
    n_nulls: int | None = None,
    seed: int = 0,
) -> LabeledDataset:
    """Observations mu*theta + eps1 + eps2 with eps1 iid N(0,1/2) and eps2
    dependent with marginal variance 1/2 (unit total variance), plus a
    labeled null pool (default size 2m) drawn with the same noise law."""
    theta = np.asarray(truth, dtype=np.int8)
    m = theta.size
    if n_nulls is None:
        n_nulls = 2 * m
    rng = derive_rng(seed, "apply_noise", noise)
    total = m + n_nulls
    if noise == "iid":
        eps = rng.standard_normal(total)
    else:
        eps1 = np.sqrt(0.5) * rng.standard_normal(total)
        eps = eps1 + _correlated_noise(total, noise, rho, rng)
    x = mu * theta + eps[:m]
    nulls = eps[m:]
    return LabeledDataset(x=x, truth=theta, nulls=nulls)


def generate(config: GeneratorConfig, seed: int) -> LabeledDataset:
    """Resolve a GeneratorConfig into a dataset (registry entry point)."""
    p = config.params
    if config.kind == "hmm":
        data = gen_hmm(config.m, p.get("a00", 0.95), p["a11"], config.mu, seed)
    elif config.kind == "hetero_hmm_exp":
        data = gen_hetero_hmm(config.m, "exp_decay", config.mu, seed)
    elif config.kind == "hetero_hmm_periodic":
        data = gen_hetero_hmm(config.m, "periodic", config.mu, seed)
    elif config.kind == "two_layer_arma":
        data = gen_two_layer(config.m, p.get("c", 0.1), config.mu, seed)
    elif config.kind == "renewal":
        data = gen_renewal(config.m, p.get("lam", 2.0), config.mu, seed)
    elif config.kind == "covariate_adaptive":
        data = gen_covariate(
            config.m, p.get("scenario", "i"), p.get("pi_base", 0.1), config.mu, seed
        )
    elif config.kind == "iid_two_group":
        data = gen_iid_two_group(config.m, p.get("pi", 0.2), config.mu, seed)
    else:  # pragma: no cover - guarded in __post_init__
        raise PlisError(f"unknown generator {config.kind!r}")

    if config.noise != "iid":
        return apply_noise(
            data.truth, config.mu, config.noise, config.rho, config.n_nulls, seed
        )
    if config.n_nulls:
        rng = derive_rng(seed, "nulls_pool")
        return LabeledDataset(
            x=data.x, truth=data.truth, nulls=rng.standard_normal(config.n_nulls)
        )
    return data
