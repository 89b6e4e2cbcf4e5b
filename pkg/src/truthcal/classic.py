"""Classical calibration measures: ECE, binned ECE, smooth calibration error.

Also the two-sided bounds on the lower distance to calibration implied by
l1-ATB and smCal, and the average-predictor transform used to show that
these measures reward pooled predictions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import BadAlpha, BadBinCount, Inconsistent
from .lipschitz import solve_chain_lp
from .sample import WeightedSample, build_sweep, grouped_masses
from .twobin import l1_atb


def _check_alpha(alpha):
    if not alpha >= 1:
        raise BadAlpha(f"alpha must be >= 1, got {alpha}")


def _power_sum(mass, resid, alpha):
    # sum_i mass_i * |resid_i / mass_i|^alpha, skipping zero-mass groups
    mass = np.broadcast_to(mass, resid.shape)
    safe = np.where(mass > 0, mass, 1.0)
    terms = np.where(mass > 0, mass * np.abs(resid / safe) ** alpha, 0.0)
    return np.sum(terms, axis=-1)


def ece(sample: WeightedSample, alpha: float = 1.0) -> float:
    """l_alpha expected calibration error, grouping by exact prediction value.

    Each distinct value ``v`` contributes ``n_v * |v - ybar_v|^alpha`` where
    ``n_v`` is its weight mass and ``ybar_v`` its mean target.
    """
    _check_alpha(alpha)
    resid = build_sweep(sample).masses
    if alpha == 1:
        return float(np.sum(np.abs(resid)))
    values, inverse = np.unique(sample.predictions, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=sample.weights, minlength=values.size)
    return float(_power_sum(mass, resid, alpha))


def ece_batch(predictions, targets, alpha: float = 1.0) -> np.ndarray:
    """ECE of fixed predictions against each row of ``targets`` (uniform weights)."""
    _check_alpha(alpha)
    r = np.asarray(predictions, dtype=float)
    _, resid = grouped_masses(r, targets)
    _, counts = np.unique(r, return_counts=True)
    return _power_sum(counts / r.size, resid, alpha)


@dataclass(frozen=True, eq=False)
class IntervalPartition:
    """Intervals ``[b_0, b_1), ..., [b_{k-1}, b_k]`` covering [0, 1]."""

    boundaries: np.ndarray

    def __init__(self, boundaries):
        b = np.array(boundaries, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise BadBinCount("need at least two boundaries")
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise BadBinCount("boundaries must increase strictly from 0 to 1")
        b.setflags(write=False)
        object.__setattr__(self, "boundaries", b)

    @property
    def k(self) -> int:
        return int(self.boundaries.size - 1)

    def assign(self, predictions) -> np.ndarray:
        """Bin index of each prediction; 1.0 falls in the last, closed interval."""
        idx = np.searchsorted(self.boundaries, predictions, side="right") - 1
        return np.clip(idx, 0, self.k - 1)


def uniform_intervals(k: int) -> IntervalPartition:
    if int(k) != k or k < 1:
        raise BadBinCount(f"bin count must be a positive integer, got {k}")
    return IntervalPartition(np.linspace(0.0, 1.0, int(k) + 1))


def _sum_by_label(x, labels, k):
    if x.ndim == 1:
        return np.bincount(labels, weights=x, minlength=k)
    return x @ np.eye(k)[labels]


def binned_ece(sample: WeightedSample, partition: IntervalPartition, alpha: float = 1.0) -> float:
    _check_alpha(alpha)
    labels = partition.assign(sample.predictions)
    mass = _sum_by_label(sample.weights, labels, partition.k)
    resid = _sum_by_label(sample.weights * sample.residuals, labels, partition.k)
    return float(_power_sum(mass, resid, alpha))


def binned_ece_batch(predictions, targets, partition: IntervalPartition, alpha: float = 1.0) -> np.ndarray:
    _check_alpha(alpha)
    r = np.asarray(predictions, dtype=float)
    T = r.size
    labels = partition.assign(r)
    mass = _sum_by_label(np.full(T, 1.0 / T), labels, partition.k)
    resid = _sum_by_label((r - np.asarray(targets, dtype=float)) / T, labels, partition.k)
    return _power_sum(mass, resid, alpha)


@dataclass(frozen=True, eq=False)
class LipschitzWitness:
    """Weight function values ``w_i`` at the distinct sorted predictions ``v_i``.

    Any feasible witness extends to a 1-Lipschitz ``w: [0, 1] -> [-1, 1]`` by
    linear interpolation between the ``v_i`` and constants outside them;
    calling the witness evaluates that extension.
    """

    values: np.ndarray
    weights: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.values, self.weights)

    def is_feasible(self, tol: float = 1e-10) -> bool:
        if np.any(np.abs(self.weights) > 1.0 + tol):
            return False
        return bool(np.all(np.abs(np.diff(self.weights)) <= np.diff(self.values) + tol))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["v", "w"])
            for v, w in zip(self.values.tolist(), self.weights.tolist()):
                writer.writerow([repr(v), repr(w)])


def smcal(sample: WeightedSample, lipschitz: bool = True) -> tuple[float, LipschitzWitness]:
    """Smooth calibration error and an optimal weight function.

    Maximizes ``sum_i c_i w_i`` over witnesses bounded by 1 in absolute value
    whose consecutive differences are at most the gaps between distinct
    predictions.  With ``lipschitz=False`` only the box constraint remains and
    the optimum is the l1 ECE.
    """
    sweep = build_sweep(sample)
    gaps = np.diff(sweep.values) if lipschitz else np.full(len(sweep) - 1, np.inf)
    value, w = solve_chain_lp(sweep.masses, gaps)
    # w = 0 is feasible, so the optimum is never negative; + 0.0 clears a -0.0
    return max(value, 0.0) + 0.0, LipschitzWitness(sweep.values, w)


def smcal_value(sample: WeightedSample) -> float:
    return smcal(sample)[0]


class DistCalBounds(NamedTuple):
    lower: float
    upper: float


def distcal_bounds(sample: WeightedSample) -> DistCalBounds:
    """Interval that must contain the lower distance to calibration.

    Intersects ``l1_atb / 3 <= d <= 3 * l1_atb`` with ``smcal / 2 <= d <= 2 * smcal``.
    """
    l1 = l1_atb(sample)
    sm = smcal_value(sample)
    lower = max(l1 / 3.0, sm / 2.0)
    upper = min(3.0 * l1, 2.0 * sm)
    if lower > upper + 1e-10:
        raise Inconsistent(f"distance bounds crossed: lower={lower!r} > upper={upper!r}")
    return DistCalBounds(lower, upper)


def average_predictor(predictions) -> np.ndarray:
    """Replace every prediction by the mean prediction."""
    r = np.asarray(predictions, dtype=float)
    if r.size == 0:
        raise ValueError("no predictions to average")
    if np.all(r == r[0]):
        return r.copy()
    return np.full(r.size, r.mean())
