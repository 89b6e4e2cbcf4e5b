import numpy as np
import pytest

from truthcal import (
    BinPartition,
    GroundTruth,
    WeightedSample,
    atb,
    decomposition_rhs,
    expected_error_bruteforce,
    get_measure,
    quantile_bins,
    quantile_l2_binece,
    ubse_expected,
    ubse_given_partition,
)
from truthcal.errors import BadBinCount, IndexMismatch, LengthMismatch
from truthcal.ubse import (
    default_bin_count,
    fixed_scheme,
    quantile_scheme,
    single_bin_scheme,
    two_bin_threshold_scheme,
    ubse_batch,
    variance_term,
)

EXAMPLE = WeightedSample([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])


def _bins(partition):
    return sorted(sorted(b.tolist()) for b in partition.bins)


def test_given_partition_example():
    part = BinPartition([[0, 1], [2, 3]])
    assert ubse_given_partition(EXAMPLE, part) == pytest.approx(0.01125, abs=1e-15)


def test_single_bin_is_squared_bias(rng):
    r, y = rng.random(9), rng.random(9)
    s = WeightedSample(r, y)
    value = ubse_given_partition(s, BinPartition([range(9)]))
    assert value == pytest.approx(np.mean(r - y) ** 2, abs=1e-15)


def test_zero_when_exact(rng):
    p = rng.random(6)
    part = BinPartition([[0, 5], [1, 2, 3], [4]])
    assert ubse_given_partition(WeightedSample(p, p), part) == 0.0


@pytest.mark.parametrize("bins", [[[0, 1], [2]], [[0, 1], [1, 2, 3]], [[0, 1, 2, 3, 4]], [[0, 0], [1, 2, 3]]])
def test_index_mismatch(bins):
    with pytest.raises(IndexMismatch):
        ubse_given_partition(EXAMPLE, BinPartition(bins))


def test_empty_bins_dropped():
    assert BinPartition([[0, 1], [], [2, 3]]).k == 2


def test_partition_json_round_trip():
    part = BinPartition([[1, 3], [2, 0]])
    assert part.to_json() == "[[2, 4], [3, 1]]"
    again = BinPartition.from_json(part.to_json())
    assert [b.tolist() for b in again.bins] == [[1, 3], [2, 0]]


def test_quantile_bins_example():
    part = quantile_bins([0.9, 0.1, 0.5, 0.3], 2)
    assert [b.tolist() for b in part.bins] == [[1, 3], [2, 0]]
    assert part.to_json() == "[[2, 4], [3, 1]]"


def test_quantile_bins_extremes(rng):
    r = rng.random(7)
    assert _bins(quantile_bins(r, 7)) == [[i] for i in range(7)]
    assert _bins(quantile_bins(r, 1)) == [list(range(7))]


def test_quantile_bins_uneven_sizes():
    sizes = [b.size for b in quantile_bins(np.linspace(0, 1, 11), 3).bins]
    assert sizes == [4, 4, 3]


@pytest.mark.parametrize("k", [0, 5, 1.5])
def test_quantile_bad_k(k):
    with pytest.raises(BadBinCount):
        quantile_bins([0.1, 0.2, 0.3, 0.4], k)


def test_quantile_ties_depend_on_seed_only():
    r = np.full(12, 0.5)
    a = [_bins(quantile_bins(r, 3, seed)) for seed in range(6)]
    assert a == [_bins(quantile_bins(r, 3, seed)) for seed in range(6)]
    assert len({str(x) for x in a}) > 1


def test_quantile_ignores_targets():
    r = [0.3, 0.3, 0.3, 0.6]
    y1 = WeightedSample(r, [0, 1, 0, 1])
    y2 = WeightedSample(r, [1, 1, 0, 0])
    part = quantile_bins(r, 2, seed=4)
    # same partition regardless of targets, so values follow the partition formula
    assert quantile_l2_binece(y1, 2, seed=4) == ubse_given_partition(y1, part)
    assert quantile_l2_binece(y2, 2, seed=4) == ubse_given_partition(y2, part)


def test_quantile_measure_examples(rng):
    assert quantile_l2_binece(EXAMPLE, 2) == pytest.approx(0.01125, abs=1e-15)
    p = rng.random(8)
    assert quantile_l2_binece(WeightedSample(p, p), 2) == 0.0
    r, y = rng.random(8), rng.random(8)
    assert quantile_l2_binece(WeightedSample(r, y), 1) == pytest.approx(np.mean(r - y) ** 2, abs=1e-15)


def test_default_bin_count():
    assert default_bin_count(1) == 1
    assert default_bin_count(8) == 2
    assert default_bin_count(1000) == 10


def test_batch_matches_scalar(rng):
    r = rng.random(6)
    part = BinPartition([[0, 2], [1, 3, 4], [5]])
    Y = (rng.random((5, 6)) < 0.5).astype(float)
    np.testing.assert_allclose(ubse_batch(r, Y, part),
                               [ubse_given_partition(WeightedSample(r, y), part) for y in Y], atol=1e-15)


def test_expected_deterministic_scheme_is_exact(rng):
    s = WeightedSample(rng.random(5), rng.random(5))
    rep = ubse_expected(s, single_bin_scheme(), draws=10, seed=3)
    assert rep.method == "exact" and rep.stderr == 0.0
    assert rep.value == pytest.approx(np.mean(s.residuals) ** 2, abs=1e-15)


def test_expected_two_bin_scheme_is_atb(rng):
    s = WeightedSample(rng.random(10), (rng.random(10) < 0.5).astype(float))
    rep = ubse_expected(s, two_bin_threshold_scheme(), draws=20_000, seed=1)
    assert rep.method == "monte-carlo" and rep.draws == 20_000
    assert abs(rep.value - atb(s)) <= 5 * rep.stderr


def test_expected_quantile_without_ties_is_constant(rng):
    s = WeightedSample(rng.random(9), rng.random(9))
    values = {ubse_expected(s, quantile_scheme(3), draws=20, seed=seed).value for seed in range(4)}
    assert len(values) == 1


def test_expected_reproducible(rng):
    s = WeightedSample(np.full(6, 0.4), [0, 1, 1, 0, 1, 1])
    a = ubse_expected(s, quantile_scheme(2), draws=50, seed=9)
    b = ubse_expected(s, quantile_scheme(2), draws=50, seed=9)
    assert a.value == b.value and a.stderr == b.stderr


def test_decomposition_table_value():
    truth = GroundTruth([0.25, 0.75])
    assert decomposition_rhs([0.5, 0.5], truth, get_measure("atb")) == pytest.approx(0.09375, abs=1e-15)


def test_decomposition_truthful_report_is_variance_only(rng):
    p = rng.random(7)
    truth = GroundTruth(p)
    assert decomposition_rhs(p, truth, get_measure("atb")) == pytest.approx(np.sum(p * (1 - p)) / 49, abs=1e-15)


def test_decomposition_degenerate_truth(rng):
    p = (rng.random(6) < 0.5).astype(float)
    r = rng.random(6)
    truth = GroundTruth(p)
    assert decomposition_rhs(r, truth, get_measure("atb")) == atb(WeightedSample(r, p))


def test_decomposition_matches_bruteforce(rng):
    for _ in range(20):
        T = int(rng.integers(1, 9))
        r, truth = rng.random(T), GroundTruth(rng.random(T))
        for m in (get_measure("atb"), get_measure("quantile_l2_binece", seed=5)):
            lhs = expected_error_bruteforce(m, r, truth).value
            assert lhs == pytest.approx(decomposition_rhs(r, truth, m), abs=1e-10)


def test_decomposition_fixed_scheme(rng):
    part = BinPartition([[0, 3], [1], [2, 4]])
    scheme = fixed_scheme(part)
    r, truth = rng.random(5), GroundTruth(rng.random(5))
    lhs = expected_error_bruteforce(lambda rr, y: ubse_given_partition(WeightedSample(rr, y), part), r, truth).value
    assert lhs == pytest.approx(decomposition_rhs(r, truth, scheme), abs=1e-10)


def test_decomposition_rejects_non_ubse():
    with pytest.raises(ValueError):
        decomposition_rhs([0.5], GroundTruth([0.5]), get_measure("ece"))
    with pytest.raises(ValueError):
        decomposition_rhs([0.5], GroundTruth([0.5]), two_bin_threshold_scheme())
    with pytest.raises(LengthMismatch):
        decomposition_rhs([0.5, 0.1], GroundTruth([0.5]), get_measure("atb"))


def test_truthfulness_small(rng):
    for m in (get_measure("atb"), get_measure("quantile_l2_binece", seed=2)):
        for _ in range(5):
            T = int(rng.integers(1, 8))
            p = rng.random(T)
            truth = GroundTruth(p)
            own = expected_error_bruteforce(m, p, truth).value
            for _ in range(20):
                other = expected_error_bruteforce(m, rng.random(T), truth).value
                assert own <= other + 1e-12


def test_partition_invariance_of_truthful_error(rng):
    T = 7
    p = rng.random(T)
    truth = GroundTruth(p)
    target = np.sum(p * (1 - p)) / T**2
    for _ in range(10):
        labels = rng.integers(0, 3, size=T)
        part = BinPartition([np.flatnonzero(labels == j) for j in range(3)])
        value = expected_error_bruteforce(
            lambda r, y: ubse_given_partition(WeightedSample(r, y), part), p, truth).value
        assert value == pytest.approx(target, abs=1e-10)


def test_completeness_bound(rng):
    for T in (1, 2, 5, 50):
        p = rng.random(T)
        assert decomposition_rhs(p, GroundTruth(p), get_measure("atb")) <= 1 / (4 * T)
    half = np.full(4, 0.5)
    assert decomposition_rhs(half, GroundTruth(half), get_measure("atb")) == 1 / 16


def test_variance_term_weighted():
    assert variance_term(GroundTruth([0.5, 0.5]), [0.25, 0.75]) == pytest.approx(0.625 * 0.25)
