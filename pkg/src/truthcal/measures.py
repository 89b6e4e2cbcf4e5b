"""Named calibration measures with a common call signature.

A :class:`Measure` evaluates ``(predictions, targets)`` to a number.  Measures
that admit it also carry a batched form evaluating one prediction vector
against many target rows at once, which the enumeration oracle relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import classic, twobin, ubse
from .errors import UnknownMeasure
from .sample import WeightedSample

SCALAR_MEASURES = ("atb", "l1_atb", "ece", "binned_ece", "quantile_l2_binece", "smcal")
ALL_MEASURES = SCALAR_MEASURES + ("distcal_bounds",)
DEFAULT_BINNED_ECE_BINS = 10


@dataclass(frozen=True)
class Measure:
    name: str
    on_sample: Callable[[WeightedSample], float]
    batch: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    is_ubse: bool = False

    def __call__(self, predictions, targets) -> float:
        return self.on_sample(WeightedSample(predictions, targets))

    def evaluate_many(self, predictions, targets) -> np.ndarray:
        """Values against each row of a ``(N, T)`` target matrix."""
        r = np.asarray(predictions, dtype=float)
        Y = np.atleast_2d(np.asarray(targets, dtype=float))
        if self.batch is not None:
            return np.asarray(self.batch(r, Y), dtype=float)
        return np.array([self(r, y) for y in Y])


def _quantile_measure(bins, seed) -> Measure:
    def partition(r):
        k = ubse.default_bin_count(r.size) if bins is None else bins
        return ubse.quantile_bins(r, k, seed)

    return Measure(
        "quantile_l2_binece",
        lambda s: ubse.ubse_given_partition(s, partition(s.predictions)),
        lambda r, Y: ubse.ubse_batch(r, Y, partition(r)),
        is_ubse=True,
    )


def get_measure(name: str, alpha: float = 1.0, bins: int | None = None, seed: int = 0) -> Measure:
    """Look up a scalar measure by name.

    ``alpha`` applies to ``ece`` and ``binned_ece``; ``bins`` is the interval
    count for ``binned_ece`` (default 10) and the quantile bin count for
    ``quantile_l2_binece`` (default ``round(T ** (1/3))``); ``seed`` drives
    quantile tie-breaking.
    """
    if name == "atb":
        return Measure("atb", twobin.atb, twobin.atb_batch, is_ubse=True)
    if name == "l1_atb":
        return Measure("l1_atb", twobin.l1_atb, twobin.l1_atb_batch)
    if name == "ece":
        return Measure(
            "ece" if alpha == 1 else f"l{alpha:g}_ece",
            lambda s: classic.ece(s, alpha),
            lambda r, Y: classic.ece_batch(r, Y, alpha),
        )
    if name == "binned_ece":
        partition = classic.uniform_intervals(DEFAULT_BINNED_ECE_BINS if bins is None else bins)
        return Measure(
            f"binned_ece_k{partition.k}" if alpha == 1 else f"l{alpha:g}_binned_ece_k{partition.k}",
            lambda s: classic.binned_ece(s, partition, alpha),
            lambda r, Y: classic.binned_ece_batch(r, Y, partition, alpha),
        )
    if name == "quantile_l2_binece":
        return _quantile_measure(bins, seed)
    if name == "smcal":
        return Measure("smcal", classic.smcal_value)
    raise UnknownMeasure(f"unknown measure {name!r}; choose from {', '.join(SCALAR_MEASURES)}")
