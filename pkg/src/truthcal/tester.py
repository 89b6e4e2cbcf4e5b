"""Threshold calibration test driven by ATB.

Draw ``T`` i.i.d. points from a prediction-state distribution, compute ATB of
the empirical sample and accept when it does not exceed ``beta``.  The default
threshold ``1/T`` accepts calibrated sources with probability at least 3/4,
since their expected ATB is at most ``1/(4T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonBinaryTargets, OutOfRange
from .sample import WeightedSample
from .twobin import atb

ACCEPT = "accept"
REJECT = "reject"
SWEEP_COLUMNS = ["T", "gamma", "beta", "acc_calibrated", "acc_miscalibrated", "gap", "stderr"]


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # keep pytest from collecting this class

    statistic: float
    threshold: float
    decision: str

    @property
    def accepted(self) -> bool:
        return self.decision == ACCEPT


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """Finite-support distribution of (prediction, state) pairs.

    Prediction ``values[i]`` occurs with probability ``marginals[i]`` and is
    followed by state 1 with probability ``conditionals[i]``.
    """

    values: np.ndarray
    marginals: np.ndarray
    conditionals: np.ndarray

    def __init__(self, values, marginals, conditionals):
        v = np.array(values, dtype=float)
        m = np.array(marginals, dtype=float)
        c = np.array(conditionals, dtype=float)
        if not v.shape == m.shape == c.shape or v.ndim != 1 or v.size == 0:
            raise ValueError("values, marginals and conditionals must be equal-length vectors")
        for arr in (v, c):
            bad = ~((arr >= 0) & (arr <= 1))
            if bad.any():
                raise OutOfRange(int(np.flatnonzero(bad)[0]))
        if np.any(m < 0) or not math.isclose(m.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("marginals must be nonnegative and sum to 1")
        for name, arr in (("values", v), ("marginals", m), ("conditionals", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_calibrated(self) -> bool:
        support = self.marginals > 0
        return bool(np.all(self.conditionals[support] == self.values[support]))

    def population(self) -> WeightedSample:
        """The distribution itself as a weighted sample with probability targets."""
        return WeightedSample(self.values, self.conditionals, self.marginals)


def calibrated_two_value_source() -> SourceSpec:
    return SourceSpec([0.25, 0.75], [0.5, 0.5], [0.25, 0.75])


def miscalibrated_two_value_source() -> SourceSpec:
    """Predicts 1/4 or 3/4 while the states follow 0.4 and 0.6; population ATB is 0.005625."""
    return SourceSpec([0.25, 0.75], [0.5, 0.5], [0.4, 0.6])


def biased_coin_source(gamma: float) -> SourceSpec:
    """Always predicts 1/2 while the state is 1 with probability ``1/2 + gamma``.

    Its lower distance to calibration is at least ``gamma``.
    """
    if not 0 <= gamma <= 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2], got {gamma}")
    return SourceSpec([0.5], [1.0], [0.5 + gamma])


def calibration_test(sample: WeightedSample, beta: float) -> TestOutcome:
    if not sample.is_binary:
        bad = int(np.flatnonzero((sample.targets != 0.0) & (sample.targets != 1.0))[0])
        raise NonBinaryTargets(f"target at index {bad} is {sample.targets[bad]!r}, not 0 or 1")
    stat = atb(sample)
    return TestOutcome(stat, float(beta), ACCEPT if stat <= beta else REJECT)


def default_threshold(T: int) -> float:
    if T < 1:
        raise ValueError("T must be positive")
    return 1.0 / T


def _seed_key(seed) -> list[int]:
    return list(seed) if isinstance(seed, (tuple, list)) else [seed]


def draw_sample(source: SourceSpec, T: int, seed) -> WeightedSample:
    """``T`` i.i.d. (prediction, state) pairs from ``source``."""
    rng = np.random.default_rng(seed)
    idx = rng.choice(source.values.size, size=T, p=source.marginals)
    states = (rng.random(T) < source.conditionals[idx]).astype(float)
    return WeightedSample(source.values[idx], states)


def trial_statistics(source: SourceSpec, T: int, trials: int, seed) -> np.ndarray:
    """ATB of ``trials`` independent samples; trial ``i`` is seeded by ``(*seed, i)``."""
    key = _seed_key(seed)
    return np.array([atb(draw_sample(source, T, key + [i])) for i in range(trials)])


def _binomial(accepts: int, trials: int) -> tuple[float, float]:
    p = accepts / trials
    return p, math.sqrt(p * (1.0 - p) / trials)


def acceptance_probability(source: SourceSpec, T: int, beta: float, trials: int,
                           seed=0) -> tuple[float, float]:
    """Fraction of trials the test accepts, with its binomial standard error."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    stats = trial_statistics(source, T, trials, seed)
    return _binomial(int(np.count_nonzero(stats <= beta)), trials)


def validity_sweep(
    calibrated: SourceSpec,
    family: Callable[[float], SourceSpec],
    T_grid: Sequence[int],
    trials: int,
    seed: int = 0,
    gammas: Sequence[float] | None = None,
    c_values: Sequence[float] | None = None,
    threshold: Callable[[int], float] = default_threshold,
) -> list[dict]:
    """Acceptance gap between a calibrated source and miscalibrated family members.

    Give fixed ``gammas`` or ``c_values``; the latter uses ``gamma = C / sqrt(T)``
    (capped at 1/2) for every grid point.  Rows come out ordered by ``T`` and
    then by the order of the gamma (or C) list.
    """
    if (gammas is None) == (c_values is None):
        raise ValueError("pass exactly one of gammas or c_values")
    if list(T_grid) != sorted(set(T_grid)):
        raise ValueError("T grid must be strictly increasing")
    rows = []
    for T in T_grid:
        beta = threshold(T)
        cal_stats = trial_statistics(calibrated, T, trials, (seed, T, 0))
        acc_cal, se_cal = _binomial(int(np.count_nonzero(cal_stats <= beta)), trials)
        levels = gammas if gammas is not None else [min(0.5, c / math.sqrt(T)) for c in c_values]
        for j, gamma in enumerate(levels):
            mis_stats = trial_statistics(family(gamma), T, trials, (seed, T, 1, j))
            acc_mis, se_mis = _binomial(int(np.count_nonzero(mis_stats <= beta)), trials)
            rows.append({
                "T": T,
                "gamma": gamma,
                "beta": beta,
                "acc_calibrated": acc_cal,
                "acc_miscalibrated": acc_mis,
                "gap": acc_cal - acc_mis,
                "stderr": math.sqrt(se_cal**2 + se_mis**2),
            })
    return rows
