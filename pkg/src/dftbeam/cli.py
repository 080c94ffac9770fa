"""Command-line entry point.

    dftbeam run --config cfg.json [--seed N] [--drops N] [--output PATH] [--format csv|json]
    dftbeam sweep --config cfg.json --axis snr|k_db|margin_n --values a,b,c
    dftbeam count --scheme two_step --m 128 --ns 4 --nu 2 --n 1

Exit status: 0 on success, 2 on invalid input, 1 on runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from dftbeam.experiment import (
    ConfigError,
    ExperimentConfig,
    SWEEP_AXES,
    emit,
    render,
    run_experiment,
    sweep,
)
from dftbeam.selection import SELECTORS, comparison_count

log = logging.getLogger("dftbeam")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="flat JSON experiment config")
    p.add_argument("--seed", type=int)
    p.add_argument("--drops", type=int)
    p.add_argument("--output", help="result file (default: config value, else stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", type=int, default=1, help="parallel sweep points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dftbeam", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_options(sub.add_parser("run", help="run one experiment"))

    sp = sub.add_parser("sweep", help="sweep one axis of a config")
    _add_run_options(sp)
    sp.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sp.add_argument("--values", required=True, help="comma separated axis values")

    cp = sub.add_parser("count", help="print comparison counts of a selection scheme")
    cp.add_argument("--scheme", required=True, choices=SELECTORS)
    cp.add_argument("--m", type=int, required=True)
    cp.add_argument("--ns", type=int, required=True)
    cp.add_argument("--nu", type=int, required=True)
    cp.add_argument("--n", type=int, default=1, help="two-step margin")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {k: getattr(args, k) for k in ("seed", "drops", "output", "format")
                 if getattr(args, k) is not None}
    return cfg.replace(**overrides) if overrides else cfg


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("values", f"not a comma separated list of numbers: {text!r}") from None


def _write(rows, cfg: ExperimentConfig) -> None:
    if cfg.output:
        emit(rows, cfg.format, cfg.output)
        log.info("wrote %d rows to %s", len(rows), cfg.output)
    else:
        sys.stdout.write(render(rows, cfg.format))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "count":
            print(comparison_count(args.scheme, args.m, args.ns, args.nu, args.n))
            return EXIT_OK
        cfg = _load(args)
        if args.command == "run":
            rows = run_experiment(cfg)
        else:
            rows = sweep(cfg, args.axis, _parse_values(args.values), workers=args.workers)
        _write(rows, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
