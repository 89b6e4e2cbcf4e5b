"""Command-line front end.

    truthcal measure --input data.csv --measures atb,smcal
    truthcal table1
    truthcal truthfulness --T 8 --trials 20
    truthcal scaling --T 100,1000,10000 --trials 200
    truthcal test --input data.csv --beta auto
    truthcal test --sweep --c-values 0,1,2,3 --format csv
    truthcal avg-dominance
    truthcal decompose

Every randomized command takes ``--seed`` (default 0); the same flags always
produce byte-identical output.  Errors go to stderr as ``error: <Code>: ...``
with exit status 1.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import experiments
from .classic import distcal_bounds
from .errors import CalibrationError, UnknownMeasure
from .measures import ALL_MEASURES, get_measure
from .reports import MeasureReport, dumps_csv, dumps_json
from .sample import read_csv
from .tester import (
    SWEEP_COLUMNS,
    biased_coin_source,
    calibrated_two_value_source,
    calibration_test,
    default_threshold,
    miscalibrated_two_value_source,
    validity_sweep,
)

DEFAULT_SEED = 0
SOURCES = {
    "calibrated": calibrated_two_value_source,
    "miscalibrated": miscalibrated_two_value_source,
}


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    measures: list[str] = field(default_factory=list)
    alpha: float = 1.0
    bins: int | None = None
    seed: int = DEFAULT_SEED
    trials: int | None = None
    T_grid: list[int] = field(default_factory=list)
    output: Path | None = None
    format: str = "json"

    def __post_init__(self):
        unknown = [m for m in self.measures if m not in ALL_MEASURES]
        if unknown:
            raise UnknownMeasure(f"unknown measure(s) {', '.join(unknown)}; "
                                 f"choose from {', '.join(ALL_MEASURES)}")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _config(args, T_default=()) -> RunConfig:
    measures = getattr(args, "measures", None)
    T = getattr(args, "T", None)
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        measures=[m.strip() for m in measures.split(",")] if measures else [],
        alpha=getattr(args, "alpha", 1.0),
        bins=getattr(args, "bins", None),
        seed=args.seed,
        trials=getattr(args, "trials", None),
        T_grid=_int_list(T) if T else list(T_default),
        output=args.output,
        format=args.format,
    )


def cmd_measure(cfg: RunConfig) -> list[MeasureReport]:
    sample = read_csv(cfg.input)
    reports = []
    for name in cfg.measures or list(ALL_MEASURES):
        if name == "distcal_bounds":
            lo, hi = distcal_bounds(sample)
            reports.append(MeasureReport(name, None, lower=lo, upper=hi))
            continue
        measure = get_measure(name, alpha=cfg.alpha, bins=cfg.bins, seed=cfg.seed)
        params = {}
        if name in ("ece", "binned_ece"):
            params["alpha"] = cfg.alpha
        if name in ("binned_ece", "quantile_l2_binece") and cfg.bins is not None:
            params["bins"] = cfg.bins
        if name == "quantile_l2_binece":
            params["seed"] = cfg.seed
        reports.append(MeasureReport(measure.name, measure.on_sample(sample), params=params))
    return reports


def _emit(cfg: RunConfig, payload: dict, columns: list[str], rows: list[dict]) -> str:
    if cfg.format == "csv":
        text = dumps_csv(columns, rows)
    else:
        text = dumps_json({"command": cfg.command, "seed": cfg.seed, **payload})
    if cfg.output is not None:
        cfg.output.write_text(text)
    else:
        sys.stdout.write(text)
    return text


def _run(args) -> None:
    command = args.command
    if command == "measure":
        cfg = _config(args)
        reports = cmd_measure(cfg)
        rows = [r.to_dict() for r in reports]
        _emit(cfg, {"input": str(cfg.input), "reports": rows},
              ["measure", "value", "lower", "upper", "method", "stderr"], rows)
    elif command == "table1":
        cfg = _config(args)
        table = experiments.table1()
        _emit(cfg, {"table": table["rows"]}, table["columns"], table["rows"])
    elif command == "truthfulness":
        cfg = _config(args, T_default=[8])
        measures = None
        if cfg.measures:
            measures = [get_measure(m, alpha=cfg.alpha, bins=cfg.bins, seed=cfg.seed) for m in cfg.measures]
        rows = experiments.truthfulness(T=cfg.T_grid[0], runs=cfg.trials or 20,
                                        challengers=args.challengers, seed=cfg.seed,
                                        measures=measures, p_range=tuple(_float_list(args.p_range)))
        beaten = sorted({row["measure"] for row in rows if row["beaten"]})
        _emit(cfg, {"rows": rows, "beaten_measures": beaten},
              ["run", "measure", "truth", "best_challenger", "challenger", "avg", "beaten"], rows)
    elif command == "scaling":
        cfg = _config(args, T_default=[100, 1000, 10000])
        result = experiments.scaling_deviations(SOURCES[args.source](), cfg.T_grid,
                                                cfg.trials or 200, seed=cfg.seed)
        rows = [dict(row, slope=result["slope"]) for row in result["rows"]]
        _emit(cfg, {"source": args.source, **result},
              ["T", "trials", "median_deviation", "median_se", "slope"], rows)
    elif command == "test":
        cfg = _config(args, T_default=[50, 200, 1000])
        if args.sweep:
            gammas = _float_list(args.gammas) if args.gammas else None
            c_values = None if gammas else _float_list(args.c_values)
            rows = validity_sweep(biased_coin_source(0.0), biased_coin_source, cfg.T_grid,
                                  cfg.trials or 500, seed=cfg.seed, gammas=gammas, c_values=c_values)
            _emit(cfg, {"rows": rows}, SWEEP_COLUMNS, rows)
        else:
            if cfg.input is None:
                raise CalibrationError("test needs --input unless --sweep is given")
            sample = read_csv(cfg.input)
            beta = default_threshold(sample.size) if args.beta == "auto" else float(args.beta)
            outcome = calibration_test(sample, beta)
            row = {"T": sample.size, "statistic": outcome.statistic,
                   "threshold": outcome.threshold, "decision": outcome.decision}
            _emit(cfg, row, list(row), [row])
    elif command == "avg-dominance":
        cfg = _config(args, T_default=[50])
        rows = experiments.avg_dominance(trials=cfg.trials or 1000, T_max=cfg.T_grid[0], seed=cfg.seed)
        _emit(cfg, {"rows": rows}, ["measure", "trials", "max_excess", "strict_wins", "violations"], rows)
    elif command == "decompose":
        cfg = _config(args, T_default=[10])
        trials = cfg.trials or 500
        rows = experiments.decomposition_checks(trials=trials, T_max=cfg.T_grid[0], seed=cfg.seed)
        rank = experiments.rank_preservation_checks(trials=trials, T_max=cfg.T_grid[0], seed=cfg.seed)
        rows.append({"measure": "atb_rank_preservation", **rank})
        _emit(cfg, {"rows": rows}, ["measure", "trials", "max_abs_error"], rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="truthcal", description="Truthful calibration measures")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", type=Path, help="write here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="compute measures on a CSV sample")
    p.add_argument("--input", type=Path, required=True, help="CSV with header prediction,target")
    p.add_argument("--measures", default=",".join(ALL_MEASURES))
    p.add_argument("--alpha", type=float, default=1.0, help="exponent for ece/binned_ece")
    p.add_argument("--bins", type=int, help="bin count for binned_ece / quantile_l2_binece")

    sub.add_parser("table1", parents=[common], help="two-sample smCal vs ATB table")

    p = sub.add_parser("truthfulness", parents=[common], help="truth vs challengers, brute force")
    p.add_argument("--T", default="8", help="sequence length (<= 20)")
    p.add_argument("--trials", type=int, default=20, help="number of random ground truths")
    p.add_argument("--challengers", type=int, default=20)
    p.add_argument("--measures")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--bins", type=int)
    p.add_argument("--p-range", default="0,1", help="ground truth drawn uniformly from LO,HI")

    p = sub.add_parser("scaling", parents=[common], help="sample-complexity scaling of ATB")
    p.add_argument("--T", default="100,1000,10000", help="comma-separated sample sizes")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--source", choices=sorted(SOURCES), default="miscalibrated")

    p = sub.add_parser("test", parents=[common], help="ATB calibration test or validity sweep")
    p.add_argument("--input", type=Path)
    p.add_argument("--beta", default="auto", help="'auto' (1/T) or a number")
    p.add_argument("--sweep", action="store_true", help="run the validity sweep instead")
    p.add_argument("--T", default="50,200,1000")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--gammas", help="fixed miscalibration levels")
    p.add_argument("--c-values", default="0,1,2,3", help="levels gamma = C/sqrt(T)")

    p = sub.add_parser("avg-dominance", parents=[common], help="average-predictor dominance suite")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--T", default="50", help="maximum sample length")

    p = sub.add_parser("decompose", parents=[common], help="error decomposition checks")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--T", default="10", help="maximum sample length")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except CalibrationError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IOError: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: ValueError: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
