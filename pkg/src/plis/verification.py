"""Independent brute-force oracles for cross-checking the production
implementations, plus an exchangeability probe for the spliced
sequence-model scores.

Everything here is deliberately naive and shares no code with the
production paths (no message passing, no sorted sweeps), so that
agreement between the two is meaningful evidence of correctness.
"""

from __future__ import annotations

import itertools

import numpy as np

from .baseline import build_paired
from .core import PlisError, as_observations
from .hmm_model import HmmParams, plis_scores_hmm
from .mirror import ScorePairVector


def oracle_posterior(seq, params: HmmParams) -> np.ndarray:
    """Exact posterior null probabilities by summing over all 2^m state
    paths. Exponential cost; refuses m > 16."""
    x = as_observations(seq)
    m = x.size
    if m > 16:
        raise PlisError("oracle_posterior handles at most m = 16")
    log_emit = params.log_emissions(x)
    log_init = params.log_initial()
    log_trans = params.log_transition()

    path_logp = np.empty(2 ** m)
    paths = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int64)
    for idx, path in enumerate(paths):
        lp = log_init[path[0]] + log_emit[0, path[0]]
        for t in range(1, m):
            lp += log_trans[path[t - 1], path[t]] + log_emit[t, path[t]]
        path_logp[idx] = lp

    path_p = np.exp(path_logp - path_logp.max())
    total = path_p.sum()
    out = np.empty(m)
    for t in range(m):
        out[t] = path_p[paths[:, t] == 0].sum() / total
    return out


def oracle_threshold(scores: ScorePairVector, alpha: float) -> float:
    """Max admissible threshold by evaluating the mirror ratio at every
    candidate value with fresh O(m) counting."""
    candidates = sorted(set(scores.s_x.tolist()) | set(scores.s_y.tolist()))
    best = float("-inf")
    for t in candidates:
        numer = 1
        denom = 0
        for j in range(scores.m):
            if scores.s_y[j] < scores.s_x[j] and scores.s_y[j] <= t:
                numer += 1
            if scores.s_x[j] < scores.s_y[j] and scores.s_x[j] <= t:
                denom += 1
        if numer / max(denom, 1) <= alpha:
            best = max(best, t)
    return best


def exchangeability_probe(params: HmmParams, x, y) -> dict:
    """Structural checks on the spliced sequence-model scores.

    (a) swap-exchange: swapping (x_i, y_i) for a single i exactly swaps
        (s_i^X, s_i^Y) whenever the combined value w_i is unchanged
        (true by construction with the magnitude-keeping combiner);
    (b) joint-exchangeability failure: permuting two *test* values
        x_i <-> x_j changes the combined sequence and hence can change
        scores at third indices.
    """
    xv = as_observations(x)
    yv = as_observations(y)
    m = xv.size
    paired = build_paired(xv, yv)
    base = plis_scores_hmm(paired, params, method="naive")

    swap_holds = True
    for i in range(m):
        x2, y2 = xv.copy(), yv.copy()
        x2[i], y2[i] = yv[i], xv[i]
        swapped = plis_scores_hmm(build_paired(x2, y2), params, method="naive")
        if not (
            swapped.s_x[i] == base.s_y[i]
            and swapped.s_y[i] == base.s_x[i]
            and np.array_equal(np.delete(swapped.s_x, i), np.delete(base.s_x, i))
            and np.array_equal(np.delete(swapped.s_y, i), np.delete(base.s_y, i))
        ):
            swap_holds = False
            break

    third_index_changed = False
    if m >= 3:
        i, j = 0, 1
        x3 = xv.copy()
        x3[i], x3[j] = xv[j], xv[i]
        permuted = plis_scores_hmm(build_paired(x3, yv), params, method="naive")
        others = np.setdiff1d(np.arange(m), [i, j])
        third_index_changed = bool(
            np.any(permuted.s_x[others] != base.s_x[others])
            or np.any(permuted.s_y[others] != base.s_y[others])
        )

    return {"swap_exchange_holds": swap_holds, "third_index_changed": third_index_changed}
