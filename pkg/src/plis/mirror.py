"""The decision engine: candidate/calibration partition of score pairs,
the mirror false-discovery-proportion process Q(t), its supremum
threshold, conformal q-values, and the generalized e-values built from a
decided threshold.

Score comparisons are exact floating-point comparisons: scores come from
deterministic arithmetic and the swap-invariance guarantees rely on
bitwise-stable behavior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LengthMismatchError, as_observations

# membership codes
REJECTION_CANDIDATE = 1  # s_x < s_y
CALIBRATION = -1  # s_y < s_x
TIE = 0  # never rejectable


@dataclass(frozen=True)
class ScorePairVector:
    """Per-index test/calibration conformity score pairs.

    ``membership`` is +1 on the candidate rejection set (s_x < s_y),
    -1 on the calibration set (s_y < s_x) and 0 on exact ties. Tied
    units are excluded from both sets and are never rejected.
    """

    s_x: np.ndarray
    s_y: np.ndarray
    membership: np.ndarray

    @classmethod
    def from_scores(cls, s_x, s_y) -> "ScorePairVector":
        sx = as_observations(s_x)
        sy = as_observations(s_y)
        if sx.size != sy.size:
            raise LengthMismatchError("score vectors differ in length")
        membership = np.zeros(sx.size, dtype=np.int8)
        membership[sx < sy] = REJECTION_CANDIDATE
        membership[sy < sx] = CALIBRATION
        for arr in (sx, sy, membership):
            arr.setflags(write=False)
        return cls(s_x=sx, s_y=sy, membership=membership)

    @property
    def m(self) -> int:
        return self.s_x.size

    @property
    def candidates(self) -> np.ndarray:
        return self.membership == REJECTION_CANDIDATE

    @property
    def calibration(self) -> np.ndarray:
        return self.membership == CALIBRATION


@dataclass(frozen=True)
class MirrorDecision:
    tau: float  # -inf when no admissible threshold exists
    rejected: np.ndarray
    q_values: np.ndarray
    e_values: np.ndarray


def mirror_q(t: float, scores: ScorePairVector) -> float:
    """Conservative FDP estimate at threshold t."""
    numer = 1 + int(np.sum(scores.s_y[scores.calibration] <= t))
    denom = max(int(np.sum(scores.s_x[scores.candidates] <= t)), 1)
    return numer / denom


def _sweep(scores: ScorePairVector):
    """Q evaluated at every sorted candidate threshold value.

    Returns (grid, q_at_grid). The grid is the sorted multiset of all
    test and calibration scores; running counts make the sweep
    O(m log m).
    """
    grid = np.sort(np.concatenate([scores.s_x, scores.s_y]))
    cal_vals = np.sort(scores.s_y[scores.calibration])
    rej_vals = np.sort(scores.s_x[scores.candidates])
    numer = 1 + np.searchsorted(cal_vals, grid, side="right")
    denom = np.maximum(np.searchsorted(rej_vals, grid, side="right"), 1)
    return grid, numer / denom


def select_threshold(scores: ScorePairVector, alpha: float) -> float:
    """Largest threshold value with Q(t) <= alpha; -inf if none exists."""
    grid, q = _sweep(scores)
    ok = np.flatnonzero(q <= alpha)
    if ok.size == 0:
        return float("-inf")
    return float(grid[ok[-1]])


def conformal_q_values(scores: ScorePairVector) -> np.ndarray:
    """Smallest nominal level at which each candidate unit is rejected.

    min over grid points t >= s_x of Q(t) for candidate-set units;
    1 elsewhere. Values are capped at 1.
    """
    grid, q = _sweep(scores)
    suffix_min = np.minimum.accumulate(q[::-1])[::-1]
    out = np.ones(scores.m)
    cand = scores.candidates
    pos = np.searchsorted(grid, scores.s_x[cand], side="left")
    out[cand] = np.minimum(suffix_min[pos], 1.0)
    return out


def generalized_e_values(scores: ScorePairVector, tau: float, m: int | None = None) -> np.ndarray:
    """e_j = m * delta_j / (1 + #{calibration scores <= tau}).

    Rejected units share one positive value; everything else is 0. The
    resulting vector has null-sum expectation at most m, making it a
    valid input for the e-BH step-up rule.
    """
    if m is None:
        m = scores.m
    if tau == float("-inf"):
        return np.zeros(scores.m)
    rejected = scores.candidates & (scores.s_x <= tau)
    denom = 1 + int(np.sum(scores.s_y[scores.calibration] <= tau))
    return m * rejected.astype(np.float64) / denom


def mirror_decide(scores: ScorePairVector, alpha: float) -> MirrorDecision:
    """Full decision: threshold, rejections, q-values and e-values."""
    tau = select_threshold(scores, alpha)
    if tau == float("-inf"):
        rejected = np.zeros(scores.m, dtype=np.int8)
    else:
        rejected = (scores.candidates & (scores.s_x <= tau)).astype(np.int8)
    q_values = conformal_q_values(scores)
    e_values = generalized_e_values(scores, tau)
    if tau > float("-inf"):
        assert mirror_q(tau, scores) <= alpha
    return MirrorDecision(tau=tau, rejected=rejected, q_values=q_values, e_values=e_values)
