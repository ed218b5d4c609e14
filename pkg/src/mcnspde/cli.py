"""Command line front end for convergence studies and statistical validation.

Three subcommands:

* ``heat``      strong-convergence study for the heat steppers,
* ``wave``      strong-convergence study for the wave stepper,
* ``validate``  statistical checks of the noise quadrature moments.

Study results go out as CSV (``N,tau,rms_error,standard_error``) to
``--out`` or stdout; a human-readable summary accompanies them on stdout
when the CSV goes to a file.  ``--config`` reads ``key = value`` defaults
(keys are flag names with dashes or underscores); explicit flags win.
Exit codes: 0 success, 1 failed validation checks, 2 bad configuration or
I/O trouble.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .harness import (
    EQUATION_WAVE,
    StudyConfig,
    desk_heat_config,
    desk_wave_config,
    csv_text,
    emit_csv,
    paper_heat_config,
    paper_wave_config,
    report_text,
    run_study,
)
from .heat import ConfigError
from .validation import validate_statistics

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2


def _parse_n_list(text: str) -> tuple[int, ...]:
    """Parse '8,16,32' or a doubling range '8..256' into resolutions."""
    text = text.strip()
    for sep in ("...", ".."):
        if sep in text:
            lo_s, hi_s = text.split(sep, 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo < 1 or hi < lo:
                raise ValueError(f"bad resolution range {text!r}")
            values = []
            n = lo
            while n <= hi:
                values.append(n)
                n *= 2
            return tuple(values)
    return tuple(int(part) for part in text.split(",") if part.strip())


def _add_common_flags(parser: argparse.ArgumentParser, defaults: StudyConfig) -> None:
    parser.add_argument("--n-list", type=_parse_n_list, default=defaults.n_list,
                        help="comma list or doubling range (e.g. 8..256) of step counts")
    parser.add_argument("--k", type=int, default=defaults.k,
                        help="interior spatial nodes")
    parser.add_argument("--mc", type=int, default=defaults.mc_count,
                        help="Monte Carlo realizations")
    parser.add_argument("--seed", type=int, default=defaults.base_seed,
                        help="base seed; realization r uses seed XOR r")
    parser.add_argument("--master-steps", type=int, default=defaults.master_steps,
                        help="master grid steps (power of two)")
    parser.add_argument("--workers", type=int, default=1,
                        help="process count for the realization loop")
    parser.add_argument("--out", type=Path, default=None,
                        help="CSV destination (stdout if omitted)")
    parser.add_argument("--report", type=Path, default=None,
                        help="also write the human-readable summary here")
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value file of flag defaults")
    parser.add_argument("--paper", action="store_true",
                        help="full-scale preset: N up to 1024, 1000 realizations, "
                             "finer master grid")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcnspde",
        description="Strong convergence studies for stochastic heat and wave steppers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    heat_defaults = desk_heat_config()
    heat = sub.add_parser("heat", help="heat equation convergence study")
    heat.add_argument("--scheme", choices=("em", "mcn"), default=heat_defaults.scheme,
                      help="implicit Euler-Maruyama or corrected Crank-Nicolson")
    heat.add_argument("--exact-mode", choices=("continuous", "semidiscrete"),
                      default=heat_defaults.exact_mode,
                      help="exact-solution decay rates: PDE spectrum or grid spectrum")
    _add_common_flags(heat, heat_defaults)

    wave_defaults = desk_wave_config()
    wave = sub.add_parser("wave", help="wave equation convergence study")
    wave.add_argument("--n-ref", type=int, default=wave_defaults.n_ref,
                      help="reference mesh resolution")
    wave.add_argument("--norm", choices=("h1_displacement", "l2_velocity"),
                      default=wave_defaults.error_norm,
                      help="error norm reported in the CSV")
    _add_common_flags(wave, wave_defaults)

    validate = sub.add_parser("validate", help="statistical quadrature checks")
    validate.add_argument("--samples", type=int, default=100_000,
                          help="Monte Carlo samples per check")
    validate.add_argument("--seed", type=int, default=20260814)
    validate.add_argument("--out", type=Path, default=None,
                          help="write the check report here as well as stdout")
    validate.add_argument("--config", type=Path, default=None,
                          help="key=value file of flag defaults")

    return parser


def _load_config_file(path: Path) -> dict[str, str]:
    values = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (want key = value): {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_file(parser_args: list[str], args: argparse.Namespace,
                       subparser: argparse.ArgumentParser) -> argparse.Namespace:
    """Re-parse with file values as defaults so explicit flags still win."""
    file_values = _load_config_file(args.config)
    defaults = {}
    for key, value in file_values.items():
        if not hasattr(args, key):
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(args, key)
        if key == "n_list":
            defaults[key] = _parse_n_list(value)
        elif isinstance(current, bool):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            defaults[key] = int(value)
        elif isinstance(current, Path) or key in ("out", "report"):
            defaults[key] = Path(value)
        else:
            defaults[key] = value
    subparser.set_defaults(**defaults)
    return subparser.parse_args(parser_args)


def _study_config(args: argparse.Namespace, equation: str) -> StudyConfig:
    if equation == EQUATION_WAVE:
        config = desk_wave_config() if not args.paper else paper_wave_config()
        config = dataclasses.replace(
            config, n_ref=args.n_ref, error_norm=args.norm
        ) if not args.paper else dataclasses.replace(config, error_norm=args.norm)
    else:
        config = desk_heat_config() if not args.paper else paper_heat_config()
        config = dataclasses.replace(
            config, scheme=args.scheme, exact_mode=args.exact_mode
        )
    overrides = {}
    if not args.paper:
        overrides.update(
            n_list=tuple(args.n_list),
            mc_count=args.mc,
            master_steps=args.master_steps,
        )
        if equation == EQUATION_WAVE:
            overrides["n_ref"] = args.n_ref
    overrides.update(k=args.k, base_seed=args.seed, workers=args.workers)
    return dataclasses.replace(config, **overrides)


def _run_study_command(args: argparse.Namespace, equation: str) -> int:
    config = _study_config(args, equation)
    table = run_study(config)
    if args.out is not None:
        emit_csv(table, args.out)
        sys.stdout.write(report_text(table, config))
    else:
        sys.stdout.write(csv_text(table))
    if args.report is not None:
        args.report.write_text(report_text(table, config))
    return EXIT_OK


def _run_validate_command(args: argparse.Namespace) -> int:
    report = validate_statistics(samples=args.samples, seed=args.seed)
    sys.stdout.write(report.text())
    if args.out is not None:
        args.out.write_text(report.text())
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None) is not None:
            # Pull the chosen subparser back out to merge file defaults.
            sub_actions = [
                a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
            ]
            subparser = sub_actions[0].choices[args.command]
            args = _apply_config_file(argv[1:], args, subparser)
            args.command = argv[0]
        if args.command == "validate":
            return _run_validate_command(args)
        return _run_study_command(args, args.command)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
