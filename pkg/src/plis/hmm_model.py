"""Two-state hidden-chain working model: Baum-Welch fitting on the
baseline data, posterior computation via forward-backward, and the
per-index test/calibration score pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .baseline import PairedData
from .core import Gaussian, NullDistribution, PlisError, as_observations
from .mirror import ScorePairVector

_SD_FLOOR = 1e-3
_MASS_FLOOR = 1e-8


@dataclass(frozen=True)
class HmmParams:
    """Initial law, 2x2 transition matrix, and Gaussian emissions.

    State 0 is the null state. When ``null_dist`` is set, the state-0
    emission density is taken from it (frozen) instead of the Gaussian
    (mean0, sd0) pair.
    """

    initial: np.ndarray
    transition: np.ndarray
    mean0: float = 0.0
    sd0: float = 1.0
    mean1: float = 2.0
    sd1: float = 1.0
    null_dist: NullDistribution | None = None

    def __post_init__(self):
        pi = np.asarray(self.initial, dtype=np.float64)
        a = np.asarray(self.transition, dtype=np.float64)
        if pi.shape != (2,) or a.shape != (2, 2):
            raise PlisError("initial must be length 2 and transition 2x2")
        if abs(pi.sum() - 1.0) > 1e-12 or np.max(np.abs(a.sum(axis=1) - 1.0)) > 1e-12:
            raise PlisError("probabilities must sum to 1")
        if np.any(pi < 0) or np.any(a < 0):
            raise PlisError("probabilities must be nonnegative")
        if not (self.sd0 > 0 and self.sd1 > 0):
            raise PlisError("emission sds must be positive")
        pi.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "initial", pi)
        object.__setattr__(self, "transition", a)

    def log_emissions(self, x: np.ndarray) -> np.ndarray:
        out = K.gaussian_log_emissions(x, self.mean0, self.sd0, self.mean1, self.sd1)
        if self.null_dist is not None:
            out[:, 0] = self.null_dist.logpdf(x)
        return out

    def log_initial(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.initial)

    def log_transition(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.transition)

    def to_config_text(self) -> str:
        if self.null_dist is not None and not isinstance(self.null_dist, Gaussian):
            raise PlisError("only gaussian frozen nulls are serializable")
        lines = [
            f"pi0 = {float(self.initial[0])!r}",
            f"pi1 = {float(self.initial[1])!r}",
            f"a00 = {float(self.transition[0, 0])!r}",
            f"a01 = {float(self.transition[0, 1])!r}",
            f"a10 = {float(self.transition[1, 0])!r}",
            f"a11 = {float(self.transition[1, 1])!r}",
            f"mean0 = {float(self.mean0)!r}",
            f"sd0 = {float(self.sd0)!r}",
            f"mean1 = {float(self.mean1)!r}",
            f"sd1 = {float(self.sd1)!r}",
            f"frozen_null = {int(self.null_dist is not None)}",
        ]
        if isinstance(self.null_dist, Gaussian):
            lines.append(f"null_mean = {float(self.null_dist.mean)!r}")
            lines.append(f"null_sd = {float(self.null_dist.sd)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config_text(cls, text: str) -> "HmmParams":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = float(value.strip())
        null_dist = None
        if kv.get("frozen_null", 0.0):
            null_dist = Gaussian(kv["null_mean"], kv["null_sd"])
        return cls(
            initial=np.array([kv["pi0"], kv["pi1"]]),
            transition=np.array([[kv["a00"], kv["a01"]], [kv["a10"], kv["a11"]]]),
            mean0=kv["mean0"],
            sd0=kv["sd0"],
            mean1=kv["mean1"],
            sd1=kv["sd1"],
            null_dist=null_dist,
        )


@dataclass(frozen=True)
class EmConfig:
    max_iter: int = 500
    tol: float = 1e-6
    init: HmmParams | None = None
    frozen_null: NullDistribution | None = None


@dataclass(frozen=True)
class EmFitReport:
    iterations: int
    final_loglik: float
    converged: bool
    degenerate: bool
    trace: tuple = field(default=())


def default_init(w: np.ndarray, frozen_null: NullDistribution | None = None) -> HmmParams:
    """Documented default starting point: nulls dominant, non-null mean
    seeded from the top decile of |W|.
    """
    k = max(1, int(math.ceil(0.1 * w.size)))
    top = w[np.argsort(np.abs(w))[-k:]]
    return HmmParams(
        initial=np.array([0.9, 0.1]),
        transition=np.array([[0.9, 0.1], [0.2, 0.8]]),
        mean0=0.0,
        sd0=1.0,
        mean1=float(np.mean(top)),
        sd1=1.0,
        null_dist=frozen_null,
    )


def _loglik(w: np.ndarray, params: HmmParams) -> float:
    _, loglik = K.posterior_null(
        params.log_initial(), params.log_transition(), params.log_emissions(w)
    )
    return float(loglik)


def em_fit(w, config: EmConfig = EmConfig()) -> tuple[HmmParams, EmFitReport]:
    """Baum-Welch fixed-point iteration on the baseline sequence.

    With ``frozen_null`` set, the state-0 emission is pinned and only the
    non-null emission, transition matrix and initial law are updated.
    A degenerate fit (a state losing essentially all responsibility mass)
    falls back to the documented defaults and is flagged; downstream FDR
    validity does not depend on fit quality.
    """
    wv = as_observations(w)
    if wv.size < 2:
        raise PlisError("em_fit needs at least 2 observations")
    params = config.init if config.init is not None else default_init(wv, config.frozen_null)
    if config.frozen_null is not None and params.null_dist is None:
        params = replace(params, null_dist=config.frozen_null)

    if not math.isfinite(config.tol):
        ll = _loglik(wv, params)
        return params, EmFitReport(0, ll, True, False, (ll,))

    trace: list[float] = []
    converged = False
    degenerate = False
    iterations = 0
    for _ in range(config.max_iter):
        gamma, xi_sum, ll = K.baum_welch_estep(
            params.log_initial(), params.log_transition(), params.log_emissions(wv)
        )
        if trace and (ll - trace[-1]) <= config.tol * abs(trace[-1]):
            trace.append(ll)
            converged = True
            break
        trace.append(ll)

        mass = gamma.sum(axis=0)
        if mass.min() < _MASS_FLOOR:
            params = default_init(wv, config.frozen_null)
            degenerate = True
            break

        row_sums = xi_sum.sum(axis=1)
        trans = params.transition.copy()
        for i in range(2):
            if row_sums[i] > 0:
                trans[i] = xi_sum[i] / row_sums[i]
        initial = gamma[0] / gamma[0].sum()
        mean1 = float((gamma[:, 1] * wv).sum() / mass[1])
        sd1 = float(np.sqrt((gamma[:, 1] * (wv - mean1) ** 2).sum() / mass[1]))
        kwargs = dict(
            initial=initial,
            transition=trans,
            mean1=mean1,
            sd1=max(sd1, _SD_FLOOR),
        )
        if config.frozen_null is None:
            mean0 = float((gamma[:, 0] * wv).sum() / mass[0])
            sd0 = float(np.sqrt((gamma[:, 0] * (wv - mean0) ** 2).sum() / mass[0]))
            kwargs.update(mean0=mean0, sd0=max(sd0, _SD_FLOOR))
        else:
            kwargs.update(mean0=params.mean0, sd0=params.sd0, null_dist=config.frozen_null)
        params = replace(params, **kwargs)
        iterations += 1

    final_ll = trace[-1] if trace else _loglik(wv, params)
    if degenerate:
        final_ll = _loglik(wv, params)
    return params, EmFitReport(
        iterations=iterations,
        final_loglik=final_ll,
        converged=converged,
        degenerate=degenerate,
        trace=tuple(trace),
    )


def forward_backward(seq, params: HmmParams) -> np.ndarray:
    """Posterior null probabilities P(state_t = 0 | seq) for every t."""
    x = as_observations(seq)
    gamma0, _ = K.posterior_null(
        params.log_initial(), params.log_transition(), params.log_emissions(x)
    )
    return gamma0


def plis_scores_hmm(
    paired: PairedData, params: HmmParams, method: str = "fast"
) -> ScorePairVector:
    """Per-index posterior-null score pair from the substituted sequences.

    ``fast`` reuses the baseline run's forward/backward messages and
    splices the single changed emission (O(m) overall); ``naive``
    recomputes a full forward-backward pass per substituted sequence
    (O(m^2)) and exists to validate the fast path.
    """
    if method == "fast":
        log_init = params.log_initial()
        log_trans = params.log_transition()
        lem_w = params.log_emissions(paired.w)
        s_x = K.spliced_posteriors(log_init, log_trans, lem_w, params.log_emissions(paired.x))
        s_y = K.spliced_posteriors(log_init, log_trans, lem_w, params.log_emissions(paired.y))
        return ScorePairVector.from_scores(s_x, s_y)
    if method == "naive":
        m = paired.m
        s_x = np.empty(m)
        s_y = np.empty(m)
        for i in range(m):
            xi = paired.w.copy()
            xi[i] = paired.x[i]
            s_x[i] = forward_backward(xi, params)[i]
            yi = paired.w.copy()
            yi[i] = paired.y[i]
            s_y[i] = forward_backward(yi, params)[i]
        return ScorePairVector.from_scores(s_x, s_y)
    raise PlisError(f"unknown scoring method {method!r}")
