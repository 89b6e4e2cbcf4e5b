"""Truthful calibration measures: averaged two-bin error, UBSEs and classical baselines."""

from .classic import (
    DistCalBounds,
    IntervalPartition,
    LipschitzWitness,
    average_predictor,
    binned_ece,
    distcal_bounds,
    ece,
    smcal,
    uniform_intervals,
)
from .errors import CalibrationError
from .measures import Measure, get_measure
from .oracle import ExpectedErrorReport, atb_naive, expected_error_bruteforce, expected_error_mc
from .reports import MeasureReport
from .sample import (
    GroundTruth,
    SortedSweep,
    WeightedSample,
    build_sweep,
    enumerate_states,
    from_pairs,
    read_csv,
    sample_states,
)
from .tester import (
    SourceSpec,
    TestOutcome,
    acceptance_probability,
    calibration_test,
    default_threshold,
    draw_sample,
    validity_sweep,
)
from .twobin import SegmentProfile, atb, l1_atb, segment_profile
from .ubse import (
    BinningScheme,
    BinPartition,
    decomposition_rhs,
    quantile_bins,
    quantile_l2_binece,
    ubse_expected,
    ubse_given_partition,
)

__version__ = "0.1.0"
