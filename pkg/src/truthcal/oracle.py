"""Reference computations used to validate the fast paths.

Nothing here shares code with the sweep in :mod:`truthcal.twobin`: the naive
two-bin errors recompute every bin sum from scratch, and expected errors over
``y ~ Bernoulli(p)`` are taken by full enumeration or by plain Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import LengthMismatch, TooLarge
from .sample import ENUMERATION_CAP, GroundTruth, WeightedSample, sample_states

EXACT_ENUMERATION = "exact-enumeration"
MONTE_CARLO = "monte-carlo"
_CHUNK_ROWS = 1 << 15


@dataclass(frozen=True)
class ExpectedErrorReport:
    value: float
    method: str
    trials: int | None = None
    stderr: float | None = None

    def to_dict(self):
        out = {"value": self.value, "method": self.method}
        if self.trials is not None:
            out["trials"] = self.trials
        if self.stderr is not None:
            out["stderr"] = self.stderr
        return out


def _evaluate_rows(measure, r, Y) -> np.ndarray:
    many = getattr(measure, "evaluate_many", None)
    if many is not None:
        return many(r, Y)
    return np.array([measure(r, y) for y in Y], dtype=float)


def _state_chunks(p: np.ndarray) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    T = p.size
    shifts = np.arange(T - 1, -1, -1, dtype=np.int64)
    total = 1 << T
    for start in range(0, total, _CHUNK_ROWS):
        codes = np.arange(start, min(total, start + _CHUNK_ROWS), dtype=np.int64)
        states = ((codes[:, None] >> shifts) & 1).astype(float)
        probs = np.prod(np.where(states == 1.0, p, 1.0 - p), axis=1)
        yield states, probs


def _check_lengths(r, truth):
    if r.size != truth.size:
        raise LengthMismatch(f"{r.size} predictions but {truth.size} probabilities")


def expected_error_bruteforce(measure: Callable, predictions, truth: GroundTruth,
                              cap: int = ENUMERATION_CAP) -> ExpectedErrorReport:
    """Exact ``E_{y ~ p}[measure(r, y)]`` by summing over all ``2**T`` states."""
    r = np.asarray(predictions, dtype=float)
    _check_lengths(r, truth)
    if truth.size > cap:
        raise TooLarge(truth.size, cap)
    terms = []
    for states, probs in _state_chunks(truth.probabilities):
        terms.extend((probs * _evaluate_rows(measure, r, states)).tolist())
    return ExpectedErrorReport(math.fsum(terms), EXACT_ENUMERATION)


def expected_error_mc(measure: Callable, predictions, truth: GroundTruth,
                      trials: int, seed: int = 0) -> ExpectedErrorReport:
    """Monte Carlo estimate of the expected error; trial ``i`` uses seed ``(seed, i)``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    r = np.asarray(predictions, dtype=float)
    _check_lengths(r, truth)
    Y = np.stack([sample_states(truth, (seed, i)) for i in range(trials)])
    values = _evaluate_rows(measure, r, Y)
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return ExpectedErrorReport(float(values.mean()), MONTE_CARLO, trials=trials, stderr=stderr)


def _naive_two_bin(sample: WeightedSample, combine) -> float:
    r = sample.predictions
    mass = sample.weights * sample.residuals
    cuts = [0.0] + sorted(set(r.tolist())) + [1.0]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        q = 0.5 * (lo + hi)
        below = float(np.sum(mass[r < q]))
        above = float(np.sum(mass[r >= q]))
        total += (hi - lo) * combine(below, above)
    return total


def atb_naive(sample: WeightedSample) -> float:
    """ATB by recomputing both bin sums independently on every segment (O(T*m))."""
    return _naive_two_bin(sample, lambda b, a: b * b + a * a)


def l1_atb_naive(sample: WeightedSample) -> float:
    return _naive_two_bin(sample, lambda b, a: abs(b) + abs(a))


def two_bin_threshold_mc(sample: WeightedSample, draws: int, seed: int = 0,
                         l1: bool = False) -> tuple[float, float]:
    """Average the two-bin integrand at ``draws`` uniform thresholds.

    Returns ``(mean, stderr)``.
    """
    rng = np.random.default_rng(seed)
    r = sample.predictions
    mass = sample.weights * sample.residuals
    total = float(np.sum(mass))
    vals = []
    for start in range(0, draws, 4096):
        q = rng.random(min(4096, draws - start))
        below = (r[None, :] < q[:, None]).astype(float) @ mass
        above = total - below
        vals.append(np.abs(below) + np.abs(above) if l1 else below**2 + above**2)
    vals = np.concatenate(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(draws))
