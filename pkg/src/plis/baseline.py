"""Baseline-data construction: symmetric combination of paired test and
calibration values, and the single-position substitution views used for
score computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import LengthMismatchError, PlisError, as_observations

COMBINERS = ("max_abs", "additive")


def combine_max_abs(x: float, y: float) -> float:
    """Keep the value with the larger magnitude (x on ties)."""
    return x if abs(x) >= abs(y) else y


def combine_additive(x: float, y: float) -> float:
    return x + y


def _combine_vec(x: np.ndarray, y: np.ndarray, combiner: str) -> np.ndarray:
    if combiner == "max_abs":
        return np.where(np.abs(x) >= np.abs(y), x, y)
    if combiner == "additive":
        return x + y
    raise PlisError(f"unknown combiner {combiner!r}; expected one of {COMBINERS}")


@dataclass(frozen=True)
class PairedData:
    """Aligned (x_i, y_i, w_i) triples; w is the symmetric combination."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    combiner: str = "max_abs"

    @property
    def m(self) -> int:
        return self.x.size


def build_paired(x, y, combiner: str = "max_abs") -> PairedData:
    xv = as_observations(x)
    yv = as_observations(y)
    if xv.size != yv.size:
        raise LengthMismatchError(f"x length {xv.size} != y length {yv.size}")
    w = _combine_vec(xv, yv, combiner)
    for arr in (xv, yv, w):
        arr.setflags(write=False)
    return PairedData(x=xv, y=yv, w=w, combiner=combiner)


@dataclass(frozen=True)
class SubstitutedSequence:
    """Lazy view of the baseline sequence with one position overridden.

    Avoids materializing m copies of length m; ``materialize`` builds the
    concrete vector when a consumer needs it.
    """

    base: np.ndarray = field(repr=False)
    position: int
    value: float

    def materialize(self) -> np.ndarray:
        out = self.base.copy()
        out[self.position] = self.value
        return out


def substitute(paired: PairedData, i: int, which: str) -> SubstitutedSequence:
    """View of W with position i replaced by x_i ('test') or y_i ('calibration')."""
    if not (0 <= i < paired.m):
        raise IndexError(f"index {i} out of range for m={paired.m}")
    if which == "test":
        value = float(paired.x[i])
    elif which == "calibration":
        value = float(paired.y[i])
    else:
        raise PlisError(f"which must be 'test' or 'calibration', got {which!r}")
    return SubstitutedSequence(base=paired.w, position=i, value=value)
