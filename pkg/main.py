"""
Command-line entry point for event-based phase retrieval experiments.

    event-phase single --method both --seed 3
    event-phase sweep-intensity --workers 4 --out tmp/fig_rmse
    event-phase sweep-delta
    event-phase baseline
    event-phase simulate-events --noise-free --events tmp/phase0.csv
    event-phase from-events --events tmp/phase0.csv --reference phase0
    event-phase presets
"""

import argparse
import sys
from typing import Dict, List, Optional

from handlers.event_handlers import run_from_events, simulate_events_csv
from handlers.experiment_handlers import (
    preset_table,
    run_baseline,
    run_delta_sweep,
    run_intensity_sweep,
    run_single,
)
from models.config import EXIT_CONFIG_ERROR, EXIT_FAILURE, EXIT_IO_ERROR, EXIT_OK
from models.exceptions import ConfigurationError, EventStreamError, SamplingError, StorageError
from utils.config_file import load_config
from utils.logger import logger, set_level


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="flat key = value config file")
    common.add_argument("--seed", type=int, default=None, help="global RNG seed")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--method", choices=["tie", "tee", "both"], default=None, help="retrieval method(s)")
    common.add_argument("--target", default=None, help="preset name or weight file")
    common.add_argument("--intensity", type=float, default=None, help="focus-plane intensity level I")
    common.add_argument("--two-delta", type=float, default=None, help="translation distance 2*delta in meters")
    common.add_argument("--workers", type=int, default=None, help="parallel sweep cells")
    common.add_argument("--noise-free", action="store_true", help="disable Poisson, readout and threshold noise")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="event-phase",
        description="Phase retrieval from axial intensity (TIE) or event (TEE) derivatives",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("single", parents=[common], help="one retrieval of the configured target")
    sub.add_parser("sweep-intensity", parents=[common], help="RMSE against intensity level")
    sub.add_parser("sweep-delta", parents=[common], help="TEE RMSE against translation distance")
    sub.add_parser("baseline", parents=[common], help="noise-free phase 0 and phase 3 retrieval")
    sub.add_parser("presets", parents=[common], help="print the preset Zernike weights")

    simulate = sub.add_parser("simulate-events", parents=[common], help="write a simulated event CSV")
    simulate.add_argument("--events", default=None, help="output CSV path")

    from_events = sub.add_parser("from-events", parents=[common], help="retrieve phase from an event CSV")
    from_events.add_argument("--events", required=True, help="event CSV path")
    from_events.add_argument("--reference", default=None, help="reference raster or preset to score against")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    return {
        "seed": args.seed,
        "output_dir": args.out,
        "method": args.method,
        "target": args.target,
        "intensity": args.intensity,
        "two_delta": args.two_delta,
        "workers": args.workers,
        "noise_free": True if args.noise_free else None,
        "reference": getattr(args, "reference", None),
    }


def _print_rows(rows: List[dict], columns: List[str]) -> None:
    print("\t".join(columns))
    for row in rows:
        print("\t".join(f"{row.get(c, '')}" for c in columns))


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "presets":
        _print_rows(preset_table(), ["preset", "index", "weight"])
        return EXIT_OK

    config = load_config(args.config, _overrides(args))
    if args.command == "single":
        for report in run_single(config):
            print(f"{report.method}\t{report.phase_id}\trmse={report.rmse:.6f}\tC={report.c_used:g}")
    elif args.command == "sweep-intensity":
        _, summary = run_intensity_sweep(config)
        _print_rows(summary, ["method", "I", "mean_rmse", "std_rmse", "count"])
    elif args.command == "sweep-delta":
        _, summary = run_delta_sweep(config)
        _print_rows(summary, ["two_delta", "mean_rmse", "std_rmse", "count"])
    elif args.command == "baseline":
        for method, value in run_baseline(config).items():
            print(f"{method}\tmean_rmse={value:.6f}")
    elif args.command == "simulate-events":
        path, count = simulate_events_csv(config, args.events)
        print(f"{count} events -> {path}")
    elif args.command == "from-events":
        report, _ = run_from_events(args.events, config, args.reference)
        if report is not None:
            print(f"tee\t{report.phase_id}\trmse={report.rmse:.6f}\tC={report.c_used:g}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    try:
        return dispatch(args)
    except (ConfigurationError, SamplingError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (StorageError, EventStreamError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO_ERROR
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
