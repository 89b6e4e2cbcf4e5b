"""Experiment drivers behind the command-line front end.

Each function returns plain rows (lists of dicts) or small dicts so results can
be serialized to JSON/CSV or asserted on directly in tests.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .classic import average_predictor
from .measures import Measure, get_measure
from .oracle import expected_error_bruteforce
from .sample import ENUMERATION_CAP, GroundTruth, WeightedSample
from .errors import TooLarge
from .tester import SourceSpec, draw_sample
from .twobin import atb
from .ubse import decomposition_rhs

TABLE1_TRUTH = (0.25, 0.75)
TABLE1_AVG = (0.5, 0.5)
# fixed row order of the two-sample table
TABLE1_STATES = ((0, 0), (1, 1), (0, 1), (1, 0))


def random_predictions(rng: np.random.Generator, T: int) -> np.ndarray:
    """Predictions in [0, 1], sometimes on a coarse grid so that ties occur."""
    kind = rng.integers(3)
    if kind == 0:
        return rng.random(T)
    if kind == 1:
        return rng.integers(0, 6, size=T) / 5.0
    return np.clip(rng.beta(0.5, 0.5, size=T), 0.0, 1.0)


def random_sample(rng: np.random.Generator, T_max: int, binary: bool | None = None) -> WeightedSample:
    T = int(rng.integers(1, T_max + 1))
    r = random_predictions(rng, T)
    if binary is None:
        binary = bool(rng.integers(2))
    if binary:
        # states loosely tied to the predictions, with a random distortion
        skew = rng.uniform(-0.4, 0.4)
        y = (rng.random(T) < np.clip(r + skew, 0, 1)).astype(float)
    else:
        y = rng.random(T)
    return WeightedSample(r, y)


def table1() -> dict:
    """Per-realization and expected smCal and ATB for the two-sample scenario."""
    truth = GroundTruth(TABLE1_TRUTH)
    predictors = {"avg": np.array(TABLE1_AVG), "truth": np.array(TABLE1_TRUTH)}
    measures = {"smcal": get_measure("smcal"), "atb": get_measure("atb")}
    p = truth.probabilities
    rows = []
    for states in TABLE1_STATES:
        y = np.array(states, dtype=float)
        row = {"states": "(%d,%d)" % states,
               "prob": float(np.prod(np.where(y == 1, p, 1 - p)))}
        for mname, measure in measures.items():
            for pname, r in predictors.items():
                row[f"{mname}_{pname}"] = measure(r, y)
        rows.append(row)
    expected = {"states": "expected", "prob": 1.0}
    for mname, measure in measures.items():
        for pname, r in predictors.items():
            expected[f"{mname}_{pname}"] = expected_error_bruteforce(measure, r, truth).value
    rows.append(expected)
    return {"columns": ["states", "prob", "smcal_avg", "smcal_truth", "atb_avg", "atb_truth"],
            "rows": rows}


def _challengers(rng, p, count):
    T = p.size
    out = [("avg", average_predictor(p))]
    for c in (0.0, 0.5, 1.0):
        out.append((f"const{c:g}", np.full(T, c)))
    while len(out) < count:
        kind = rng.integers(3)
        if kind == 0:
            r = np.clip(p + rng.normal(0, rng.choice([0.01, 0.1, 0.3]), size=T), 0, 1)
            out.append(("perturbed", r))
        elif kind == 1:
            out.append(("random", rng.random(T)))
        else:
            out.append(("constant", np.full(T, rng.random())))
    return out[:count]


def truthfulness(T: int = 8, runs: int = 20, challengers: int = 20, seed: int = 0,
                 measures: Sequence[Measure] | None = None,
                 p_range: tuple[float, float] = (0.0, 1.0), tol: float = 1e-10) -> list[dict]:
    """Compare the truthful report against challengers under brute-force expectation.

    Returns one row per (run, measure) with the expected error of the truthful
    report, the best challenger and whether it beats truth by more than ``tol``.
    """
    if T > ENUMERATION_CAP:
        raise TooLarge(T, ENUMERATION_CAP)
    if measures is None:
        measures = [get_measure(n, seed=seed) for n in
                    ("atb", "quantile_l2_binece", "ece", "binned_ece", "smcal")]
    rng = np.random.default_rng(seed)
    rows = []
    for run in range(runs):
        p = rng.uniform(*p_range, size=T)
        truth = GroundTruth(p)
        rivals = _challengers(rng, p, challengers)
        for measure in measures:
            own = expected_error_bruteforce(measure, p, truth).value
            scores = [(expected_error_bruteforce(measure, r, truth).value, name) for name, r in rivals]
            best, best_name = min(scores)
            rows.append({
                "run": run,
                "measure": measure.name,
                "truth": own,
                "best_challenger": best,
                "challenger": best_name,
                "avg": scores[0][0],
                "beaten": bool(best < own - tol),
            })
    return rows


def scaling_deviations(source: SourceSpec, T_grid: Sequence[int], trials: int,
                       seed: int = 0, bootstrap: int = 200) -> dict:
    """Median ``|ATB(J_S) - ATB(J)|`` per sample size and its log-log slope.

    The population value is ATB of the source's own support weighted by its
    marginals, with the conditional probabilities as targets.  ``median_se``
    is a bootstrap standard error of the median.
    """
    if len(T_grid) < 2:
        raise ValueError("need at least two sample sizes")
    population = atb(source.population())
    boot_rng = np.random.default_rng([seed, 1])
    rows = []
    for T in T_grid:
        dev = np.array([abs(atb(draw_sample(source, T, [seed, T, i])) - population)
                        for i in range(trials)])
        med = float(np.median(dev))
        resampled = np.median(boot_rng.choice(dev, size=(bootstrap, dev.size)), axis=1)
        rows.append({"T": T, "trials": trials, "median_deviation": med,
                     "median_se": float(resampled.std(ddof=1))})
    meds = np.array([row["median_deviation"] for row in rows])
    if np.all(meds > 0):
        slope = float(np.polyfit(np.log10(np.asarray(T_grid, dtype=float)), np.log10(meds), 1)[0])
    else:
        slope = None
    return {"population_atb": population, "rows": rows, "slope": slope}


def avg_dominance(trials: int = 1000, T_max: int = 50, seed: int = 0,
                  measures: Sequence[Measure] | None = None, tol: float = 1e-10) -> list[dict]:
    """Check ``Cal(mean(r), y) <= Cal(r, y)`` on random prediction/state pairs."""
    if measures is None:
        measures = [get_measure("ece", alpha=1), get_measure("ece", alpha=2)]
        measures += [get_measure("binned_ece", bins=k) for k in (1, 4, 16)]
        measures.append(get_measure("smcal"))
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(trials):
        sample = random_sample(rng, T_max, binary=True)
        cases.append((sample.predictions, sample.targets))
    rows = []
    for measure in measures:
        worst = -math.inf
        strict = 0
        violations = 0
        for r, y in cases:
            diff = measure(average_predictor(r), y) - measure(r, y)
            worst = max(worst, diff)
            strict += diff < -tol
            violations += diff > tol
        rows.append({"measure": measure.name, "trials": trials, "max_excess": worst,
                     "strict_wins": int(strict), "violations": int(violations)})
    return rows


def decomposition_checks(trials: int = 500, T_max: int = 10, seed: int = 0,
                         measures: Sequence[Measure] | None = None) -> list[dict]:
    """Largest gap between brute-force expected UBSE and the decomposition formula."""
    if measures is None:
        measures = [get_measure("atb"), get_measure("quantile_l2_binece", seed=seed)]
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(trials):
        T = int(rng.integers(1, T_max + 1))
        cases.append((random_predictions(rng, T), GroundTruth(rng.random(T))))
    rows = []
    for measure in measures:
        worst = 0.0
        for r, truth in cases:
            lhs = expected_error_bruteforce(measure, r, truth).value
            worst = max(worst, abs(lhs - decomposition_rhs(r, truth, measure)))
        rows.append({"measure": measure.name, "trials": trials, "max_abs_error": worst})
    return rows


def rank_preservation_checks(trials: int = 200, T_max: int = 10, seed: int = 0) -> dict:
    """Largest violation of ``E[ATB(r1,y)] - E[ATB(r2,y)] = ATB(r1,p) - ATB(r2,p)``."""
    measure = get_measure("atb")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        T = int(rng.integers(1, T_max + 1))
        p = rng.random(T)
        truth = GroundTruth(p)
        r1, r2 = random_predictions(rng, T), random_predictions(rng, T)
        lhs = (expected_error_bruteforce(measure, r1, truth).value
               - expected_error_bruteforce(measure, r2, truth).value)
        rhs = measure(r1, p) - measure(r2, p)
        worst = max(worst, abs(lhs - rhs))
    return {"trials": trials, "max_abs_error": worst}
