"""Samples of (prediction, target) pairs and the Bernoulli state model.

A :class:`WeightedSample` holds predictions in [0, 1] together with targets in
[0, 1].  Targets are either realized binary states or ground-truth
probabilities; every measure in the package treats both the same way, since
the sequence form of a calibration error only depends on the residuals
``prediction - target``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptySample, LengthMismatch, OutOfRange, ParseError, TooLarge

ENUMERATION_CAP = 20


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise LengthMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _first_outside_unit(*arrays: np.ndarray) -> int | None:
    bad = np.zeros(arrays[0].shape, dtype=bool)
    for arr in arrays:
        # NaN fails both comparisons and is caught here too
        bad |= ~((arr >= 0.0) & (arr <= 1.0))
    if bad.any():
        return int(np.flatnonzero(bad)[0])
    return None


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Finite list of (prediction, target, weight) records.

    Weights are normalized to sum to one on construction, so a bin's residual
    mass ``sum(w * (r - y))`` is directly the (1/T)-scaled sum used by the
    two-bin and binned errors.  Uniform weights ``1/T`` are the default.
    """

    predictions: np.ndarray
    targets: np.ndarray
    weights: np.ndarray

    def __init__(self, predictions, targets, weights=None):
        r = _as_vector(predictions, "predictions")
        y = _as_vector(targets, "targets")
        if r.size == 0:
            raise EmptySample()
        if r.shape != y.shape:
            raise LengthMismatch(f"{r.size} predictions but {y.size} targets")
        idx = _first_outside_unit(r, y)
        if idx is not None:
            raise OutOfRange(idx)
        if weights is None:
            w = np.full(r.size, 1.0 / r.size)
        else:
            w = _as_vector(weights, "weights")
            if w.shape != r.shape:
                raise LengthMismatch(f"{r.size} predictions but {w.size} weights")
            if not np.all(w >= 0.0) or not np.isfinite(w).all():
                raise OutOfRange(int(np.flatnonzero(~(w >= 0.0) | ~np.isfinite(w))[0]),
                                 "weights must be finite and nonnegative")
            total = w.sum()
            if not total > 0.0:
                raise EmptySample("weights sum to zero")
            w = w / total
        object.__setattr__(self, "predictions", _freeze(r))
        object.__setattr__(self, "targets", _freeze(y))
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def size(self) -> int:
        return int(self.predictions.size)

    def __len__(self) -> int:
        return self.size

    @property
    def residuals(self) -> np.ndarray:
        return self.predictions - self.targets

    @property
    def is_binary(self) -> bool:
        """True when every target is a realized state, exactly 0 or 1."""
        return bool(np.all((self.targets == 0.0) | (self.targets == 1.0)))

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def with_predictions(self, predictions) -> "WeightedSample":
        return WeightedSample(predictions, self.targets, self.weights)


def from_pairs(pairs: Sequence[tuple[float, float]]) -> WeightedSample:
    """Build a uniformly weighted sample from ``(prediction, target)`` pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptySample()
    arr = np.array(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise LengthMismatch("pairs must be (prediction, target) tuples")
    return WeightedSample(arr[:, 0], arr[:, 1])


@dataclass(frozen=True, eq=False)
class SortedSweep:
    """Distinct sorted prediction values with aggregated residual masses.

    Attributes
    ----------
    values : ndarray, shape (m,)
        Strictly increasing distinct predictions ``v_1 < ... < v_m``.
    masses : ndarray, shape (m,)
        ``c_i = sum of w_t * (r_t - target_t)`` over entries with ``r_t == v_i``.
    prefix : ndarray, shape (m,)
        Running sums ``S_i = c_1 + ... + c_i``.
    suffix : ndarray, shape (m,)
        Reverse running sums ``c_i + ... + c_m``; kept alongside the prefix
        so the upper bin never needs the cancellation-prone ``S_m - S_i``.
    """

    values: np.ndarray
    masses: np.ndarray
    prefix: np.ndarray
    suffix: np.ndarray

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def __len__(self) -> int:
        return int(self.values.size)


def build_sweep(sample: WeightedSample) -> SortedSweep:
    # Sorting on (prediction, contribution) fixes the summation order inside
    # each group, so any permutation of the entries gives bit-identical sums.
    # Groups merge at exact floating equality; total work O(T log T).
    contrib = sample.weights * sample.residuals
    order = np.lexsort((contrib, sample.predictions))
    r_sorted = sample.predictions[order]
    starts = np.flatnonzero(np.r_[True, r_sorted[1:] != r_sorted[:-1]])
    values = r_sorted[starts]
    masses = np.add.reduceat(contrib[order], starts)
    prefix = np.cumsum(masses)
    suffix = np.cumsum(masses[::-1])[::-1]
    return SortedSweep(_freeze(values), _freeze(masses), _freeze(prefix), _freeze(suffix))


def grouped_masses(predictions, targets, weights=None) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate residual masses per distinct prediction for many target rows.

    ``targets`` may be a vector or a matrix whose rows are alternative target
    vectors for the same predictions (e.g. every state realization).  Returns
    the sorted distinct values and masses of shape ``targets.shape[:-1] + (m,)``.
    """
    r = np.asarray(predictions, dtype=float)
    y = np.asarray(targets, dtype=float)
    w = np.full(r.size, 1.0 / r.size) if weights is None else np.asarray(weights, dtype=float)
    order = np.argsort(r, kind="stable")
    r_sorted = r[order]
    starts = np.flatnonzero(np.r_[True, r_sorted[1:] != r_sorted[:-1]])
    weighted = (r - y) * w
    masses = np.add.reduceat(weighted[..., order], starts, axis=-1)
    return r_sorted[starts], masses


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Bernoulli means ``p_1..p_T`` of independent binary states."""

    probabilities: np.ndarray

    def __init__(self, probabilities):
        p = _as_vector(probabilities, "probabilities")
        if p.size == 0:
            raise EmptySample("ground truth has no entries")
        idx = _first_outside_unit(p)
        if idx is not None:
            raise OutOfRange(idx)
        object.__setattr__(self, "probabilities", _freeze(p))

    @property
    def size(self) -> int:
        return int(self.probabilities.size)

    def __len__(self) -> int:
        return self.size


def sample_states(truth: GroundTruth, seed) -> np.ndarray:
    """Draw ``y_t ~ Bernoulli(p_t)`` independently; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    return (rng.random(truth.size) < truth.probabilities).astype(float)


def state_matrix(truth: GroundTruth, cap: int = ENUMERATION_CAP) -> tuple[np.ndarray, np.ndarray]:
    """All ``2**T`` state vectors (rows, plain binary order) and their probabilities.

    Row ``i`` is the binary expansion of ``i`` with the first coordinate as the
    most significant bit.
    """
    T = truth.size
    if T > cap:
        raise TooLarge(T, cap)
    codes = np.arange(2**T, dtype=np.int64)
    shifts = np.arange(T - 1, -1, -1, dtype=np.int64)
    states = ((codes[:, None] >> shifts) & 1).astype(float)
    p = truth.probabilities
    probs = np.prod(np.where(states == 1.0, p, 1.0 - p), axis=1)
    return states, probs


def enumerate_states(truth: GroundTruth, cap: int = ENUMERATION_CAP) -> Iterator[tuple[tuple[int, ...], float]]:
    """Yield every realization ``(y_1..y_T)`` with its product-Bernoulli probability."""
    states, probs = state_matrix(truth, cap)
    for row, prob in zip(states, probs):
        yield tuple(int(s) for s in row), float(prob)


def read_csv(path: str | Path) -> WeightedSample:
    """Read a ``prediction,target`` CSV file into a uniformly weighted sample.

    Malformed rows raise :class:`ParseError` carrying the 1-based line number.
    """
    predictions: list[float] = []
    targets: list[float] = []
    lines: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptySample(f"{path}: file is empty")
        if [h.strip().lower() for h in header] != ["prediction", "target"]:
            raise ParseError(1, f"expected header 'prediction,target', got {','.join(header)!r}")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ParseError(line, f"expected 2 fields, got {len(row)}")
            try:
                r, y = float(row[0]), float(row[1])
            except ValueError:
                raise ParseError(line, f"not a number: {','.join(row)!r}") from None
            predictions.append(r)
            targets.append(y)
            lines.append(line)
    if not predictions:
        raise EmptySample(f"{path}: no data rows")
    try:
        return WeightedSample(predictions, targets)
    except OutOfRange as exc:
        raise OutOfRange(exc.index, f"line {lines[exc.index]}: value outside [0, 1]") from None
