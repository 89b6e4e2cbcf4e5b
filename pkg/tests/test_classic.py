import numpy as np
import pytest
from hypothesis import given, settings
from scipy.optimize import linprog

from truthcal import (
    WeightedSample,
    average_predictor,
    binned_ece,
    build_sweep,
    distcal_bounds,
    ece,
    l1_atb,
    atb,
    smcal,
    uniform_intervals,
)
from truthcal.classic import IntervalPartition, binned_ece_batch, ece_batch
from truthcal.errors import BadAlpha, BadBinCount
from truthcal.experiments import avg_dominance
from truthcal.lipschitz import solve_chain_lp

from conftest import samples


def lp_oracle(c, gaps):
    """max c.w over the chain polytope with a generic LP solver."""
    c = np.asarray(c, dtype=float)
    scale = np.max(np.abs(c))
    if scale == 0:
        return 0.0
    # the solver's tolerances are absolute, so work with a unit-size objective
    c = c / scale
    m = len(c)
    rows, rhs = [], []
    for i, g in enumerate(gaps):
        if not np.isfinite(g):
            continue
        row = np.zeros(m)
        row[i], row[i + 1] = -1.0, 1.0
        rows += [row, -row]
        rhs += [g, g]
    res = linprog(-np.asarray(c), A_ub=np.array(rows) if rows else None, b_ub=rhs or None,
                  bounds=[(-1, 1)] * m, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0
    return -res.fun * scale


def test_ece_examples():
    assert ece(WeightedSample([0.25, 0.75], [0, 1])) == pytest.approx(0.25)
    assert ece(WeightedSample([0.5, 0.5], [0, 1])) == 0.0
    assert ece(WeightedSample([0.4, 0.4], [1, 1]), alpha=2) == pytest.approx(0.36)


def test_bad_alpha():
    with pytest.raises(BadAlpha):
        ece(WeightedSample([0.5], [0]), alpha=0.5)
    with pytest.raises(BadAlpha):
        binned_ece(WeightedSample([0.5], [0]), uniform_intervals(2), alpha=0)


def test_binned_examples():
    assert binned_ece(WeightedSample([0.25, 0.75], [0, 1]), uniform_intervals(2)) == pytest.approx(0.25)
    assert binned_ece(WeightedSample([0.25, 0.75], [1, 0]), uniform_intervals(1)) == 0.0
    assert binned_ece(WeightedSample([0.1, 0.3], [0, 0.4]), uniform_intervals(2)) == pytest.approx(0.0, abs=1e-15)


def test_uniform_intervals():
    np.testing.assert_array_equal(uniform_intervals(2).boundaries, [0, 0.5, 1])
    np.testing.assert_array_equal(uniform_intervals(1).boundaries, [0, 1])
    part = uniform_intervals(2)
    np.testing.assert_array_equal(part.assign([0.0, 0.49, 0.5, 1.0]), [0, 0, 1, 1])
    for bad in (0, -1, 2.5):
        with pytest.raises(BadBinCount):
            uniform_intervals(bad)
    with pytest.raises(BadBinCount):
        IntervalPartition([0.0, 0.6, 0.5, 1.0])


def test_batches_match_scalar(rng):
    r = rng.integers(0, 5, size=10) / 4
    Y = (rng.random((6, 10)) < 0.5).astype(float)
    part = uniform_intervals(3)
    for alpha in (1, 2):
        np.testing.assert_allclose(ece_batch(r, Y, alpha), [ece(WeightedSample(r, y), alpha) for y in Y], atol=1e-15)
        np.testing.assert_allclose(binned_ece_batch(r, Y, part, alpha),
                                   [binned_ece(WeightedSample(r, y), part, alpha) for y in Y], atol=1e-15)


@pytest.mark.parametrize("r, y, expected", [
    ((0.5, 0.5), (0, 0), 0.5),
    ((0.25, 0.75), (1, 0), 0.1875),
    ((0.25, 0.75), (0, 1), 0.0625),
    ((0.0, 1.0, 1.0), (0, 1, 1), 0.0),
])
def test_smcal_examples(r, y, expected):
    value, witness = smcal(WeightedSample(r, y))
    assert value == pytest.approx(expected, abs=1e-15)
    assert witness.is_feasible()
    assert float(build_sweep(WeightedSample(r, y)).masses @ witness.weights) == pytest.approx(value, abs=1e-15)


def test_witness_interpolates():
    _, witness = smcal(WeightedSample([0.25, 0.75], [1, 0]))
    w0, w1 = witness.weights
    assert witness(0.0) == w0 and witness(1.0) == w1
    assert witness(0.5) == pytest.approx(0.5 * (w0 + w1))


def test_chain_solver_vs_lp(rng):
    for _ in range(300):
        m = int(rng.integers(1, 25))
        c = rng.normal(size=m) * rng.choice([1e-3, 1.0])
        gaps = rng.random(m - 1) * rng.choice([0.05, 0.5, 2.0])
        value, w = solve_chain_lp(c, gaps)
        assert value == pytest.approx(lp_oracle(c, gaps), abs=1e-10)
        assert value == pytest.approx(float(c @ w), abs=1e-10)
        assert np.all(np.abs(w) <= 1 + 1e-10)
        assert np.all(np.abs(np.diff(w)) <= gaps + 1e-10)


@settings(max_examples=200, deadline=None)
@given(samples(max_size=40))
def test_smcal_vs_lp_oracle(s):
    sweep = build_sweep(s)
    value, witness = smcal(s)
    assert value == pytest.approx(max(0.0, lp_oracle(sweep.masses, np.diff(sweep.values))), abs=1e-10)
    assert witness.is_feasible(1e-10)
    assert float(sweep.masses @ witness.weights) == pytest.approx(value, abs=1e-10)


def test_smcal_dominates_random_witnesses(rng):
    for _ in range(5):
        T = int(rng.integers(2, 30))
        s = WeightedSample(rng.random(T), (rng.random(T) < 0.5).astype(float))
        sweep = build_sweep(s)
        value, _ = smcal(s)
        gaps = np.diff(sweep.values)
        W = np.empty((10_000, len(sweep)))
        W[:, 0] = rng.uniform(-1, 1, size=10_000)
        for i, g in enumerate(gaps):
            # clipping is 1-Lipschitz, so the walk stays feasible
            W[:, i + 1] = np.clip(W[:, i] + rng.uniform(-g, g, size=10_000), -1, 1)
        assert np.max(W @ sweep.masses) <= value + 1e-10


@settings(max_examples=200, deadline=None)
@given(samples())
def test_box_only_smcal_is_ece(s):
    value, _ = smcal(s, lipschitz=False)
    assert value == pytest.approx(ece(s), abs=1e-10)


def test_witness_csv(tmp_path):
    path = tmp_path / "w.csv"
    smcal(WeightedSample([0.25, 0.75], [1, 0]))[1].to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "v,w" and len(lines) == 3
    assert [line.split(",")[0] for line in lines[1:]] == ["0.25", "0.75"]


def test_distcal_examples(rng):
    p = rng.random(10)
    assert distcal_bounds(WeightedSample(p, p)) == (0.0, 0.0)
    lo, hi = distcal_bounds(WeightedSample([0.5, 0.5], [0, 0]))
    assert lo == pytest.approx(0.25) and hi == pytest.approx(1.0)


@settings(max_examples=300, deadline=None)
@given(samples(max_size=60))
def test_sandwich(s):
    sm, a, b = smcal(s)[0], atb(s), l1_atb(s)
    assert 2 / 3 * sm <= b + 1e-10 and b <= 6 * sm + 1e-10
    assert 2 / 9 * sm * sm <= a + 1e-10 and a <= 6 * sm + 1e-10
    lo, hi = distcal_bounds(s)
    assert lo <= hi + 1e-10


def test_average_predictor():
    np.testing.assert_array_equal(average_predictor([0.25, 0.75]), [0.5, 0.5])
    np.testing.assert_allclose(average_predictor([0, 1, 1]), [2 / 3] * 3)
    const = np.full(5, 0.1 + 0.2)
    np.testing.assert_array_equal(average_predictor(const), const)
    with pytest.raises(ValueError):
        average_predictor([])


def test_avg_dominance_small():
    rows = avg_dominance(trials=200, T_max=20, seed=1)
    assert all(row["violations"] == 0 for row in rows)
    assert any(row["strict_wins"] > 0 for row in rows)
