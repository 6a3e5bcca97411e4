"""JIT-compiled numerical kernels for the two-state chain model and for
kernel density evaluation.

Everything here works on plain float64 arrays; log-space recursions keep
long sequences free of underflow. These functions are deliberately
dependency-free so the pure-python oracles in ``verification`` stay
independent of them.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LOG_2PI = float(np.log(2.0 * np.pi))


@njit(cache=True)
def _logaddexp(a, b):
    if a < b:
        a, b = b, a
    if b == -np.inf:
        return a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def log_forward(log_init, log_trans, log_emit):
    """Forward messages alpha[t, j] = log P(obs_1..t, state_t = j)."""
    m = log_emit.shape[0]
    la = np.empty((m, 2))
    la[0, 0] = log_init[0] + log_emit[0, 0]
    la[0, 1] = log_init[1] + log_emit[0, 1]
    for t in range(1, m):
        for j in range(2):
            la[t, j] = (
                _logaddexp(la[t - 1, 0] + log_trans[0, j], la[t - 1, 1] + log_trans[1, j])
                + log_emit[t, j]
            )
    return la


@njit(cache=True)
def log_backward(log_trans, log_emit):
    """Backward messages beta[t, j] = log P(obs_{t+1}..m | state_t = j)."""
    m = log_emit.shape[0]
    lb = np.zeros((m, 2))
    for t in range(m - 2, -1, -1):
        for j in range(2):
            lb[t, j] = _logaddexp(
                log_trans[j, 0] + log_emit[t + 1, 0] + lb[t + 1, 0],
                log_trans[j, 1] + log_emit[t + 1, 1] + lb[t + 1, 1],
            )
    return lb


@njit(cache=True)
def posterior_null(log_init, log_trans, log_emit):
    """P(state_t = 0 | full sequence) for every t, plus the log-likelihood."""
    m = log_emit.shape[0]
    la = log_forward(log_init, log_trans, log_emit)
    lb = log_backward(log_trans, log_emit)
    loglik = _logaddexp(la[m - 1, 0], la[m - 1, 1])
    gamma0 = np.empty(m)
    for t in range(m):
        n0 = la[t, 0] + lb[t, 0]
        n1 = la[t, 1] + lb[t, 1]
        gamma0[t] = np.exp(n0 - _logaddexp(n0, n1))
    return gamma0, loglik


@njit(cache=True)
def spliced_posteriors(log_init, log_trans, log_emit_w, log_emit_sub):
    """Posterior P(state_i = 0 | W with position i replaced) for every i.

    ``log_emit_sub[i, j]`` is the state-j emission log-density of the
    substituted value at position i. Only position i's emission changes,
    so the forward messages up to i-1 and backward messages from i+1 of
    the baseline run can be reused; each index then costs O(1).
    """
    m = log_emit_w.shape[0]
    la = log_forward(log_init, log_trans, log_emit_w)
    lb = log_backward(log_trans, log_emit_w)
    out = np.empty(m)
    for i in range(m):
        n0 = -np.inf
        n1 = -np.inf
        if i == 0:
            pred0 = log_init[0]
            pred1 = log_init[1]
        else:
            pred0 = _logaddexp(la[i - 1, 0] + log_trans[0, 0], la[i - 1, 1] + log_trans[1, 0])
            pred1 = _logaddexp(la[i - 1, 0] + log_trans[0, 1], la[i - 1, 1] + log_trans[1, 1])
        n0 = pred0 + log_emit_sub[i, 0] + lb[i, 0]
        n1 = pred1 + log_emit_sub[i, 1] + lb[i, 1]
        out[i] = np.exp(n0 - _logaddexp(n0, n1))
    return out


@njit(cache=True)
def baum_welch_estep(log_init, log_trans, log_emit):
    """One E-step: state posteriors, pairwise-transition counts, log-likelihood."""
    m = log_emit.shape[0]
    la = log_forward(log_init, log_trans, log_emit)
    lb = log_backward(log_trans, log_emit)
    loglik = _logaddexp(la[m - 1, 0], la[m - 1, 1])
    gamma = np.empty((m, 2))
    for t in range(m):
        for j in range(2):
            gamma[t, j] = np.exp(la[t, j] + lb[t, j] - loglik)
    xi_sum = np.zeros((2, 2))
    for t in range(m - 1):
        for i in range(2):
            for j in range(2):
                xi_sum[i, j] += np.exp(
                    la[t, i]
                    + log_trans[i, j]
                    + log_emit[t + 1, j]
                    + lb[t + 1, j]
                    - loglik
                )
    return gamma, xi_sum, loglik


@njit(cache=True)
def gaussian_log_emissions(x, mean0, sd0, mean1, sd1):
    m = x.shape[0]
    out = np.empty((m, 2))
    c0 = -np.log(sd0) - 0.5 * _LOG_2PI
    c1 = -np.log(sd1) - 0.5 * _LOG_2PI
    for t in range(m):
        z0 = (x[t] - mean0) / sd0
        z1 = (x[t] - mean1) / sd1
        out[t, 0] = c0 - 0.5 * z0 * z0
        out[t, 1] = c1 - 0.5 * z1 * z1
    return out


@njit(cache=True)
def kde_evaluate(sample, bandwidth, query):
    """Gaussian-kernel density estimate evaluated at each query point."""
    n = sample.shape[0]
    q = query.shape[0]
    norm = 1.0 / (n * bandwidth * np.sqrt(2.0 * np.pi))
    out = np.empty(q)
    for i in range(q):
        acc = 0.0
        v = query[i]
        for j in range(n):
            z = (v - sample[j]) / bandwidth
            acc += np.exp(-0.5 * z * z)
        out[i] = acc * norm
    return out
