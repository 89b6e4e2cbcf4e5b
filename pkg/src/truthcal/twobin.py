"""Averaged two-bin calibration error and its l1 variant.

For a threshold ``q`` the predictions split into a lower bin ``r < q`` and an
upper bin ``r >= q``.  Both bin residual sums are constant while ``q`` moves
between consecutive distinct predictions, so the average over
``q ~ Unif[0, 1]`` is a finite sum over ``m + 1`` segments, computed here from
one sort and two running sums.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sample import WeightedSample, build_sweep, grouped_masses


def _segment_lengths(values: np.ndarray) -> np.ndarray:
    # [0, v_1], (v_1, v_2], ..., (v_m, 1]
    return np.diff(np.concatenate(([0.0], values, [1.0])))


def _bin_sums(masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper bin masses on each of the m+1 segments, along the last axis."""
    prefix = np.cumsum(masses, axis=-1)
    suffix = np.flip(np.cumsum(np.flip(masses, axis=-1), axis=-1), axis=-1)
    zero = np.zeros(masses.shape[:-1] + (1,))
    below = np.concatenate((zero, prefix), axis=-1)
    above = np.concatenate((suffix, zero), axis=-1)
    return below, above


def _atb_from_masses(values, masses):
    below, above = _bin_sums(masses)
    return np.sum(_segment_lengths(values) * (below * below + above * above), axis=-1)


def _l1_atb_from_masses(values, masses):
    below, above = _bin_sums(masses)
    return np.sum(_segment_lengths(values) * (np.abs(below) + np.abs(above)), axis=-1)


def atb(sample: WeightedSample) -> float:
    """Averaged two-bin calibration error of ``sample``.

    Returns ``E_q[(sum_{r<q} w(r-y))^2 + (sum_{r>=q} w(r-y))^2]`` with
    ``q ~ Unif[0, 1]``; with uniform weights this is the usual ``1/T^2``
    normalization.  Runs in O(T log T).
    """
    sweep = build_sweep(sample)
    return float(_atb_from_masses(sweep.values, sweep.masses))


def l1_atb(sample: WeightedSample) -> float:
    """l1 variant: the two bin sums enter through absolute values instead of squares."""
    sweep = build_sweep(sample)
    return float(_l1_atb_from_masses(sweep.values, sweep.masses))


def atb_batch(predictions, targets) -> np.ndarray:
    """ATB of fixed predictions against every row of a target matrix (uniform weights)."""
    values, masses = grouped_masses(predictions, targets)
    return _atb_from_masses(values, masses)


def l1_atb_batch(predictions, targets) -> np.ndarray:
    values, masses = grouped_masses(predictions, targets)
    return _l1_atb_from_masses(values, masses)


@dataclass(frozen=True, eq=False)
class SegmentProfile:
    """Piecewise-constant bin sums of the two-bin split.

    For ``q`` in ``(q_lo[i], q_hi[i]]`` the lower bin residual sum is
    ``below[i]`` and the upper one ``above[i]``.  Sums are in sample-count
    units, ``T * sum(w * (r - y))``, i.e. the plain residual sums
    ``sum(r - y)`` for a uniformly weighted sample.  Zero-length segments
    (a prediction exactly at 0 or 1) are omitted.
    """

    q_lo: np.ndarray
    q_hi: np.ndarray
    below: np.ndarray
    above: np.ndarray
    size: int

    def __len__(self):
        return int(self.q_lo.size)

    def atb(self) -> float:
        scale = 1.0 / self.size
        b, a = self.below * scale, self.above * scale
        return float(np.sum((self.q_hi - self.q_lo) * (b * b + a * a)))

    def l1_atb(self) -> float:
        scale = 1.0 / self.size
        return float(np.sum((self.q_hi - self.q_lo) * (np.abs(self.below) + np.abs(self.above))) * scale)

    def rows(self):
        return zip(self.q_lo.tolist(), self.q_hi.tolist(), self.below.tolist(), self.above.tolist())

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["q_lo", "q_hi", "below_sum", "above_sum"])
            for row in self.rows():
                writer.writerow([repr(x) for x in row])


def segment_profile(sample: WeightedSample) -> SegmentProfile:
    sweep = build_sweep(sample)
    cuts = np.concatenate(([0.0], sweep.values, [1.0]))
    below, above = _bin_sums(sweep.masses)
    keep = cuts[1:] > cuts[:-1]
    T = sample.size
    return SegmentProfile(
        q_lo=cuts[:-1][keep],
        q_hi=cuts[1:][keep],
        below=below[keep] * T,
        above=above[keep] * T,
        size=T,
    )
