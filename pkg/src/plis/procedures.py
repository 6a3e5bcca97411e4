"""End-to-end multiple-testing procedures.

The main procedure draws a synthetic calibration sample from the null
law, combines it pairwise with the test sequence, fits a working model
on the combined baseline data only, scores each index with substituted
sequences, and applies the mirror threshold. Finite-sample FDR control
holds regardless of working-model correctness.

Also provided: the semi-supervised version (labeled null pool instead of
a known null law), a derandomized version (e-value averaging over
repeated calibration draws), and the baselines and variants used for
comparison studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .baseline import PairedData, build_paired
from .core import (
    Gaussian,
    NullDistribution,
    PlisError,
    STANDARD_NORMAL,
    as_observations,
    derive_rng,
    z_transform,
)
from .hmm_model import EmConfig, em_fit, forward_backward, plis_scores_hmm
from .mirror import (
    MirrorDecision,
    ScorePairVector,
    conformal_q_values,
    generalized_e_values,
    mirror_decide,
    select_threshold,
)
from .twogroup_model import kde_fit, density_ratio_scores, plis_scores_twogroup

MODEL_KINDS = ("hmm", "twogroup")


@dataclass(frozen=True)
class WorkingModelSpec:
    """Which working model scores the data, and how the baseline is built."""

    kind: str = "hmm"
    combiner: str = "max_abs"
    em: EmConfig = field(default_factory=EmConfig)
    freeze_null: bool = True

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise PlisError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")


@dataclass(frozen=True)
class ProcedureResult:
    decisions: np.ndarray
    tau: float
    q_values: np.ndarray
    e_values: np.ndarray
    scores: ScorePairVector | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_rejected(self) -> int:
        return int(self.decisions.sum())


def _score_pairs(
    paired: PairedData,
    model: WorkingModelSpec,
    f0: NullDistribution | None,
) -> tuple[ScorePairVector, dict]:
    """Fit the working model on the baseline data W and score every index."""
    if model.kind == "hmm":
        frozen = f0 if (model.freeze_null and f0 is not None) else None
        config = model.em
        if frozen is not None and config.frozen_null is None:
            config = EmConfig(
                max_iter=config.max_iter, tol=config.tol, init=config.init, frozen_null=frozen
            )
        params, report = em_fit(paired.w, config)
        scores = plis_scores_hmm(paired, params)
        diag = {
            "fit_iterations": report.iterations,
            "fit_converged": report.converged,
            "fit_degenerate": report.degenerate,
        }
    else:
        mixture = kde_fit(paired.w)
        scores = plis_scores_twogroup(paired, f0, mixture)
        diag = {"kde_bandwidth": mixture.bandwidth, "kde_degenerate": mixture.degenerate}
    diag["n_candidates"] = int(scores.candidates.sum())
    diag["n_calibration"] = int(scores.calibration.sum())
    return scores, diag


def _check_equivalences(decision: MirrorDecision, alpha: float) -> None:
    """Rejections must coincide with q-value thresholding and with the
    e-BH step-up applied to the generalized e-values."""
    via_q = (decision.q_values <= alpha).astype(np.int8)
    if not np.array_equal(via_q, decision.rejected):
        raise AssertionError("q-value thresholding disagrees with mirror rejections")
    via_e = e_bh(decision.e_values, alpha).astype(np.int8)
    if not np.array_equal(via_e, decision.rejected):
        raise AssertionError("e-BH reconstruction disagrees with mirror rejections")


def _finish(decision: MirrorDecision, scores: ScorePairVector, alpha: float, diag: dict) -> ProcedureResult:
    _check_equivalences(decision, alpha)
    return ProcedureResult(
        decisions=decision.rejected,
        tau=decision.tau,
        q_values=decision.q_values,
        e_values=decision.e_values,
        scores=scores,
        diagnostics=diag,
    )


def plis(
    x,
    f0: NullDistribution,
    model: WorkingModelSpec = WorkingModelSpec(),
    alpha: float = 0.05,
    seed: int = 0,
) -> ProcedureResult:
    """Mirror procedure with a synthetic calibration sample drawn from f0."""
    xv = as_observations(x)
    rng = derive_rng(seed, "plis", "calibration")
    y = f0.sample(rng, xv.size)
    paired = build_paired(xv, y, model.combiner)
    scores, diag = _score_pairs(paired, model, f0)
    decision = mirror_decide(scores, alpha)
    return _finish(decision, scores, alpha, diag)


def semi_supervised_plis(
    x,
    nulls,
    model: WorkingModelSpec = WorkingModelSpec(),
    alpha: float = 0.05,
    seed: int = 0,
) -> ProcedureResult:
    """Mirror procedure when the null law is unknown but a labeled null
    sample of size at least 2m is available.

    The pool is split (seeded permutation) into m calibration values and
    a training remainder; every null-law-dependent quantity is estimated
    from the training split only.
    """
    xv = as_observations(x)
    pool = as_observations(nulls)
    m = xv.size
    if pool.size < 2 * m:
        raise PlisError(
            f"need at least 2*m = {2 * m} labeled nulls, got {pool.size}; "
            "screen hypotheses first to reduce m"
        )
    perm = derive_rng(seed, "ssplis", "split").permutation(pool.size)
    y = pool[perm[:m]]
    train = pool[perm[m:]]
    paired = build_paired(xv, y, model.combiner)

    if model.kind == "hmm":
        f0_hat = Gaussian(float(np.mean(train)), float(np.std(train, ddof=1)))
        scores, diag = _score_pairs(paired, model, f0_hat)
    else:
        f0_kde = kde_fit(train)
        mixture = kde_fit(paired.w)
        s_x = density_ratio_scores(paired.x, f0_kde, mixture)
        s_y = density_ratio_scores(paired.y, f0_kde, mixture)
        scores = ScorePairVector.from_scores(s_x, s_y)
        diag = {
            "kde_bandwidth": mixture.bandwidth,
            "null_kde_bandwidth": f0_kde.bandwidth,
            "n_candidates": int(scores.candidates.sum()),
            "n_calibration": int(scores.calibration.sum()),
        }
    diag["n_train_nulls"] = int(train.size)
    decision = mirror_decide(scores, alpha)
    return _finish(decision, scores, alpha, diag)


def derandomized_plis(
    x,
    f0: NullDistribution,
    model: WorkingModelSpec = WorkingModelSpec(),
    n_runs: int = 30,
    alphas=None,
    alpha: float = 0.05,
    seed: int = 0,
) -> ProcedureResult:
    """Average generalized e-values over repeated calibration draws, then
    apply the e-BH step-up at the target level.

    Per-run levels default to alpha/2; levels above alpha/(1+alpha) make
    the averaged e-values too small to ever clear the e-BH cutoff.
    """
    xv = as_observations(x)
    m = xv.size
    if n_runs < 1:
        raise PlisError("n_runs must be >= 1")
    if alphas is None:
        alphas = np.full(n_runs, alpha / 2.0)
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.size != n_runs:
        raise PlisError(f"alphas must have length {n_runs}")

    e_avg = np.zeros(m)
    for k in range(n_runs):
        rng = derive_rng(seed, "derandomized", k)
        paired = build_paired(xv, f0.sample(rng, m), model.combiner)
        scores, _ = _score_pairs(paired, model, f0)
        tau_k = select_threshold(scores, float(alphas[k]))
        e_avg += generalized_e_values(scores, tau_k)
    e_avg /= n_runs

    decisions = e_bh(e_avg, alpha).astype(np.int8)
    return ProcedureResult(
        decisions=decisions,
        tau=float("nan"),
        q_values=np.ones(m),
        e_values=e_avg,
        scores=None,
        diagnostics={"n_runs": n_runs, "per_run_alpha": tuple(float(a) for a in alphas)},
    )


# ---------------------------------------------------------------------------
# step-up rules and variants
# ---------------------------------------------------------------------------


def e_bh(e, alpha: float) -> np.ndarray:
    """e-value step-up: find the largest i with (i/m) e_(i) >= 1/alpha
    over the descending order statistics, reject everything at or above
    that order statistic."""
    ev = np.asarray(e, dtype=np.float64)
    if np.any(ev < 0) or not np.all(np.isfinite(ev)):
        raise PlisError("e-values must be finite and nonnegative")
    m = ev.size
    desc = np.sort(ev)[::-1]
    i = np.arange(1, m + 1)
    ok = np.flatnonzero(i * desc >= m / alpha)
    if ok.size == 0:
        return np.zeros(m, dtype=bool)
    return ev >= desc[ok[-1]]


def bh(p, alpha: float) -> np.ndarray:
    """Benjamini-Hochberg step-up on p-values."""
    pv = np.asarray(p, dtype=np.float64)
    if np.any(pv < 0) or np.any(pv > 1):
        raise PlisError("p-values must lie in [0, 1]")
    m = pv.size
    order = np.argsort(pv, kind="stable")
    ok = np.flatnonzero(pv[order] <= np.arange(1, m + 1) * alpha / m)
    out = np.zeros(m, dtype=bool)
    if ok.size:
        out[order[: ok[-1] + 1]] = True
    return out


def two_sided_p_values(x, f0: NullDistribution) -> np.ndarray:
    """p_i = 2(1 - Phi(|z_i|)) with z the null-quantile transform of x."""
    from scipy import stats

    z = z_transform(x, f0)
    return 2.0 * stats.norm.sf(np.abs(z))


def conformal_p_values(s_x, s_y) -> np.ndarray:
    """p_i = (1 + #{j : s_j^Y < s_i^X}) / (1 + m)."""
    sx = as_observations(s_x)
    sy = np.sort(as_observations(s_y))
    if sx.size != sy.size:
        raise PlisError("score vectors differ in length")
    return (1.0 + np.searchsorted(sy, sx, side="left")) / (1.0 + sx.size)


def conformal_bh(s_x, s_y, alpha: float, adaptive_factor: float = 1.0) -> np.ndarray:
    """BH applied to conformal p-values built from calibration scores.

    Valid when all null scores are jointly exchangeable with the
    calibration scores (e.g. the pooled-KDE two-group scores); not valid
    for spliced sequence-model scores, which are only pairwise
    exchangeable.
    """
    return bh(conformal_p_values(s_x, s_y), alpha * adaptive_factor)


def storey_null_proportion(p, lam: float = 0.5) -> float:
    """Conservative estimate of the fraction of true nulls."""
    pv = np.asarray(p, dtype=np.float64)
    return min(1.0, (1.0 + np.sum(pv > lam)) / (pv.size * (1.0 - lam)))


def plis_cbh(scores: ScorePairVector, alpha: float) -> np.ndarray:
    """Origin-style conformal variant: FDP-process sums run over all
    indices (no candidate/calibration split) and the threshold grid is
    the test scores only. Conservative under strong dependence."""
    grid = np.sort(scores.s_x)
    all_y = np.sort(scores.s_y)
    all_x = grid
    numer = 1.0 + np.searchsorted(all_y, grid, side="right")
    denom = np.maximum(np.searchsorted(all_x, grid, side="right"), 1)
    ok = np.flatnonzero(numer / denom <= alpha)
    if ok.size == 0:
        return np.zeros(scores.m, dtype=bool)
    return scores.s_x <= grid[ok[-1]]


def plis_sym(scores: ScorePairVector, alpha: float) -> np.ndarray:
    """Anti-symmetric-statistic variant: T_j = s_j^Y - s_j^X, threshold
    the smallest t in {|T_j|} with (1 + #{T <= -t}) / #{T >= t} <= alpha
    (grid points with empty denominator are skipped); reject T_j >= t."""
    t_stat = scores.s_y - scores.s_x
    neg = np.sort(t_stat)
    grid = np.sort(np.abs(t_stat))
    numer = 1.0 + np.searchsorted(neg, -grid, side="right")
    denom = t_stat.size - np.searchsorted(neg, grid, side="left")
    with np.errstate(divide="ignore"):
        ok = np.flatnonzero((denom > 0) & (numer <= alpha * denom))
    if ok.size == 0:
        return np.zeros(scores.m, dtype=bool)
    return t_stat >= grid[ok[0]]


def one_bit_p_values(t_stat) -> np.ndarray:
    """1/2 where the statistic is positive, 1 elsewhere."""
    t = as_observations(t_stat)
    return np.where(t > 0, 0.5, 1.0)


def selective_seqstep_plus(p, c: float, alpha: float, candidates=None) -> np.ndarray:
    """Step-up along a prior ordering: the largest prefix k with
    (1 + #{j <= k : p_j > c}) / max(#{j <= k : p_j <= c}, 1)
    <= ((1-c)/c) alpha; reject the small p-values in that prefix."""
    pv = np.asarray(p, dtype=np.float64)
    m = pv.size
    if not (0 < c < 1):
        raise PlisError("c must lie in (0, 1)")
    small = pv <= c
    n_small = np.cumsum(small)
    n_big = np.arange(1, m + 1) - n_small
    ratio_ok = (1.0 + n_big) <= ((1.0 - c) / c) * alpha * np.maximum(n_small, 1)
    ks = np.arange(1, m + 1) if candidates is None else np.asarray(candidates, dtype=np.int64)
    admissible = ks[ratio_ok[ks - 1]]
    out = np.zeros(m, dtype=bool)
    if admissible.size:
        k_hat = int(admissible.max())
        out[:k_hat] = small[:k_hat]
    return out


def lis_baseline(posteriors, alpha: float) -> np.ndarray:
    """Reject the k smallest posterior null probabilities, where k is the
    largest prefix of the ascending order with running mean <= alpha.
    No finite-sample guarantee; included to study misspecification."""
    lis = np.asarray(posteriors, dtype=np.float64)
    if np.any(lis < 0) or np.any(lis > 1):
        raise PlisError("posterior probabilities must lie in [0, 1]")
    order = np.argsort(lis, kind="stable")
    running = np.cumsum(lis[order]) / np.arange(1, lis.size + 1)
    ok = np.flatnonzero(running <= alpha)
    out = np.zeros(lis.size, dtype=bool)
    if ok.size:
        out[order[: ok[-1] + 1]] = True
    return out


def lis_procedure(x, f0: NullDistribution = STANDARD_NORMAL, alpha: float = 0.05,
                  em: EmConfig | None = None) -> np.ndarray:
    """Fit the hidden-chain model directly on the test sequence (null
    emission frozen at f0) and threshold the resulting posteriors."""
    xv = as_observations(x)
    config = em if em is not None else EmConfig(frozen_null=f0)
    if config.frozen_null is None:
        config = EmConfig(max_iter=config.max_iter, tol=config.tol, init=config.init,
                          frozen_null=f0)
    params, _ = em_fit(xv, config)
    return lis_baseline(forward_backward(xv, params), alpha)


# ---------------------------------------------------------------------------
# method registry (name -> decisions) used by the harness and CLI
# ---------------------------------------------------------------------------


def _decisions(result: ProcedureResult) -> np.ndarray:
    return result.decisions.astype(bool)


def _run_plis(kind):
    def run(x, alpha, seed, f0=STANDARD_NORMAL, nulls=None, combiner="max_abs"):
        model = WorkingModelSpec(kind=kind, combiner=combiner)
        return _decisions(plis(x, f0, model, alpha, seed))

    return run


def _run_ss_plis(kind):
    def run(x, alpha, seed, f0=None, nulls=None, combiner="max_abs"):
        if nulls is None:
            raise PlisError("semi-supervised methods need a labeled nulls pool")
        model = WorkingModelSpec(kind=kind, combiner=combiner)
        return _decisions(semi_supervised_plis(x, nulls, model, alpha, seed))

    return run


def _run_bh(x, alpha, seed, f0=STANDARD_NORMAL, nulls=None, **_):
    return bh(two_sided_p_values(x, f0), alpha)


def _run_conformal_bh(x, alpha, seed, f0=STANDARD_NORMAL, nulls=None, **_):
    xv = as_observations(x)
    rng = derive_rng(seed, "conformal_bh", "calibration")
    y = f0.sample(rng, xv.size)
    pooled = kde_fit(np.concatenate([xv, y]))
    s_x = density_ratio_scores(xv, f0, pooled)
    s_y = density_ratio_scores(y, f0, pooled)
    return conformal_bh(s_x, s_y, alpha)


def _run_variant(variant):
    def run(x, alpha, seed, f0=STANDARD_NORMAL, nulls=None, combiner="max_abs"):
        xv = as_observations(x)
        rng = derive_rng(seed, "plis", "calibration")
        paired = build_paired(xv, f0.sample(rng, xv.size), combiner)
        scores, _ = _score_pairs(paired, WorkingModelSpec(combiner=combiner), f0)
        return variant(scores, alpha)

    return run


def _run_lis(x, alpha, seed, f0=STANDARD_NORMAL, nulls=None, **_):
    return lis_procedure(x, f0, alpha)


def _run_derandomized(x, alpha, seed, f0=STANDARD_NORMAL, nulls=None,
                      combiner="max_abs", n_runs=30, alpha_scale=0.5, kind="twogroup"):
    model = WorkingModelSpec(kind=kind, combiner=combiner)
    alphas = np.full(int(n_runs), alpha * float(alpha_scale))
    return _decisions(
        derandomized_plis(x, f0, model, int(n_runs), alphas, alpha, seed)
    )


METHODS: dict[str, Callable[..., np.ndarray]] = {
    "plis_hm": _run_plis("hmm"),
    "plis_tg": _run_plis("twogroup"),
    "ss_plis_hm": _run_ss_plis("hmm"),
    "ss_plis_tg": _run_ss_plis("twogroup"),
    "bh": _run_bh,
    "conformal_bh": _run_conformal_bh,
    "plis_cbh": _run_variant(plis_cbh),
    "plis_sym": _run_variant(plis_sym),
    "lis": _run_lis,
    "derandomized_plis": _run_derandomized,
}


def run_method(name: str, x, alpha: float, seed: int, **kwargs) -> np.ndarray:
    try:
        fn = METHODS[name]
    except KeyError:
        raise PlisError(
            f"unknown method {name!r}; known: {sorted(METHODS)}"
        ) from None
    return fn(x, alpha, seed, **kwargs)
