"""Unnormalized binned squared errors (UBSE).

A UBSE splits the *indices* of a sample into bins using only the predictions
(and possibly private randomness), then sums the squared bin biases
``Delta_i = sum_{t in B_i} w_t (r_t - y_t)`` without any per-bin
normalization.  Because the partition never looks at the targets, the
expected empirical error separates into the error on the true probabilities
plus a variance term that does not depend on the predictions, which is what
makes every member truthful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BadBinCount, IndexMismatch, LengthMismatch
from .reports import EXACT, MONTE_CARLO, MeasureReport
from .sample import GroundTruth, WeightedSample

DEFAULT_DRAWS = 10_000


@dataclass(frozen=True, eq=False)
class BinPartition:
    """Disjoint bins of 0-based sample indices; empty bins are dropped."""

    bins: tuple[np.ndarray, ...]

    def __init__(self, bins: Sequence[Sequence[int]]):
        arrays = []
        for b in bins:
            arr = np.asarray(b, dtype=np.int64).ravel()
            if arr.size:
                arr.setflags(write=False)
                arrays.append(arr)
        if not arrays:
            raise IndexMismatch("partition has no non-empty bins")
        object.__setattr__(self, "bins", tuple(arrays))

    @property
    def k(self) -> int:
        return len(self.bins)

    def __len__(self) -> int:
        return self.k

    def labels(self, size: int) -> np.ndarray:
        """Bin label per index; raises unless the bins tile ``0..size-1`` exactly."""
        labels = np.full(size, -1, dtype=np.int64)
        for i, b in enumerate(self.bins):
            if b.min() < 0 or b.max() >= size:
                raise IndexMismatch(f"bin {i} has indices outside 0..{size - 1}")
            if np.any(labels[b] != -1) or np.unique(b).size != b.size:
                raise IndexMismatch(f"bin {i} overlaps another bin")
            labels[b] = i
        if np.any(labels == -1):
            missing = int(np.flatnonzero(labels == -1)[0])
            raise IndexMismatch(f"index {missing} is not covered by any bin")
        return labels

    def to_json(self) -> str:
        return json.dumps([(b + 1).tolist() for b in self.bins])

    @classmethod
    def from_json(cls, text: str) -> "BinPartition":
        return cls([np.asarray(b, dtype=np.int64) - 1 for b in json.loads(text)])


@dataclass(frozen=True)
class BinningScheme:
    """Maps predictions and a random generator to a :class:`BinPartition`."""

    name: str
    build: Callable[[np.ndarray, np.random.Generator], BinPartition]
    randomized: bool

    def __call__(self, predictions, rng=None) -> BinPartition:
        return self.build(np.asarray(predictions, dtype=float), np.random.default_rng(rng))


def _bin_biases(residual_mass: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    if residual_mass.ndim == 1:
        return np.bincount(labels, weights=residual_mass, minlength=k)
    return residual_mass @ np.eye(k)[labels]


def ubse_given_partition(sample: WeightedSample, partition: BinPartition) -> float:
    """Sum of squared bin biases for a fixed index partition."""
    labels = partition.labels(sample.size)
    delta = _bin_biases(sample.weights * sample.residuals, labels, partition.k)
    return float(np.sum(delta * delta))


def ubse_batch(predictions, targets, partition: BinPartition) -> np.ndarray:
    """UBSE of fixed predictions and partition against each row of ``targets``."""
    r = np.asarray(predictions, dtype=float)
    labels = partition.labels(r.size)
    delta = _bin_biases((r - np.asarray(targets, dtype=float)) / r.size, labels, partition.k)
    return np.sum(delta * delta, axis=-1)


def ubse_expected(sample: WeightedSample, scheme: BinningScheme,
                  draws: int = DEFAULT_DRAWS, seed: int = 0) -> MeasureReport:
    """UBSE averaged over the scheme's randomness.

    Deterministic schemes are evaluated once and reported as exact.  For
    randomized schemes draw ``i`` uses the generator seeded by ``(seed, i)``,
    so the estimate does not depend on evaluation order.
    """
    if not scheme.randomized:
        value = ubse_given_partition(sample, scheme(sample.predictions, seed))
        return MeasureReport(scheme.name, value, EXACT, stderr=0.0, params={"seed": seed})
    if draws < 1:
        raise ValueError("draws must be at least 1")
    values = np.array([
        ubse_given_partition(sample, scheme(sample.predictions, np.random.default_rng([seed, i])))
        for i in range(draws)
    ])
    stderr = float(values.std(ddof=1) / np.sqrt(draws)) if draws > 1 else None
    return MeasureReport(scheme.name, float(values.mean()), MONTE_CARLO, stderr=stderr,
                         draws=draws, params={"seed": seed})


def default_bin_count(size: int) -> int:
    return max(1, min(size, int(round(size ** (1.0 / 3.0)))))


def quantile_bins(predictions, k: int, seed=0) -> BinPartition:
    """Equal-count bins over the predictions sorted with random tie-breaking.

    Ties are broken by sorting on ``(prediction, nonce)`` with one seeded
    uniform nonce per index.  When ``k`` does not divide ``T`` the first
    ``T mod k`` bins receive one extra index.
    """
    r = np.asarray(predictions, dtype=float)
    T = r.size
    if int(k) != k or not 1 <= k <= T:
        raise BadBinCount(f"bin count must satisfy 1 <= k <= {T}, got {k}")
    k = int(k)
    nonce = np.random.default_rng(seed).random(T)
    order = np.lexsort((nonce, r))
    base, extra = divmod(T, k)
    sizes = np.full(k, base)
    sizes[:extra] += 1
    return BinPartition(np.split(order, np.cumsum(sizes)[:-1]))


def quantile_l2_binece(sample: WeightedSample, k: int | None = None, seed=0) -> float:
    if k is None:
        k = default_bin_count(sample.size)
    return ubse_given_partition(sample, quantile_bins(sample.predictions, k, seed))


def single_bin_scheme() -> BinningScheme:
    return BinningScheme("single-bin", lambda r, rng: BinPartition([np.arange(r.size)]), False)


def fixed_scheme(partition: BinPartition, name: str = "fixed") -> BinningScheme:
    return BinningScheme(name, lambda r, rng: partition, False)


def quantile_scheme(k: int | None = None) -> BinningScheme:
    def build(r, rng):
        bins = default_bin_count(r.size) if k is None else k
        return quantile_bins(r, bins, rng)
    return BinningScheme("quantile", build, True)


def two_bin_threshold_scheme() -> BinningScheme:
    """Split at ``q ~ Unif[0, 1]`` into ``r < q`` and ``r >= q``; its average is ATB."""
    def build(r, rng):
        q = rng.random()
        return BinPartition([np.flatnonzero(r < q), np.flatnonzero(r >= q)])
    return BinningScheme("two-bin-threshold", build, True)


def variance_term(truth: GroundTruth, weights=None) -> float:
    """``sum_t w_t^2 p_t (1 - p_t)``, i.e. ``(1/T^2) sum_t p_t (1 - p_t)`` for uniform weights."""
    p = truth.probabilities
    w = np.full(p.size, 1.0 / p.size) if weights is None else np.asarray(weights, dtype=float)
    return float(np.sum(w * w * p * (1.0 - p)))


def decomposition_rhs(predictions, truth: GroundTruth, measure) -> float:
    """Expected empirical UBSE predicted by the error decomposition.

    ``measure`` is a truthful binned measure: either a registered measure
    flagged ``is_ubse`` (ATB, quantile l2-BinECE) or a deterministic
    :class:`BinningScheme`.  Returns ``Cal(r, p) + (1/T^2) sum p(1-p)``.
    """
    r = np.asarray(predictions, dtype=float)
    if r.size != truth.size:
        raise LengthMismatch(f"{r.size} predictions but {truth.size} probabilities")
    sample = WeightedSample(r, truth.probabilities)
    if isinstance(measure, BinningScheme):
        if measure.randomized:
            raise ValueError("exact decomposition needs a deterministic scheme")
        cal = ubse_given_partition(sample, measure(r))
    elif getattr(measure, "is_ubse", False):
        cal = measure.on_sample(sample)
    else:
        raise ValueError(f"{getattr(measure, 'name', measure)!r} is not a UBSE")
    return cal + variance_term(truth)
