"""Command-line front end.

Exit codes: 0 all claims pass, 1 a claim failed, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ConvergenceFailure, DegenerateRicci, DomainError, QuadratureFailure
from .report import (
    CLAIM_COLUMNS,
    COLLAPSE_COLUMNS,
    CURVATURE_COLUMNS,
    FLOW_COLUMNS,
    SOLVE_COLUMNS,
    ConfigError,
    RunConfig,
    asymptotic_claims,
    claim_rows,
    collapse_summary,
    collapse_table,
    curvature_table,
    flow_table,
    run_verification,
    solve_table,
    table_json,
    to_csv,
    write_outputs,
)

EXIT_OK, EXIT_CLAIM, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("solve", "curvature", "flow", "asym", "collapse", "verify")
CONFIG_KEYS = {"n", "s_min", "s_max", "grid", "out", "format", "seed", "k_max"}
DEFAULT_OUT = "solitonlab_out"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--s-min", type=float, dest="s_min")
    common.add_argument("--s-max", type=float, dest="s_max")
    common.add_argument("--grid", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json", "both"))
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--k-max", type=int, dest="k_max", help="last k of the collapsing sequence")

    parser = _Parser(prog="solitonlab", description="Numerical checks on the U(n)-invariant steady Kahler-Ricci soliton family.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _parse_tol(items) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance override must be NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {item!r}") from exc
    return out


def read_config_file(path: str) -> tuple[dict[str, str], dict[str, float]]:
    """Flat key=value lines; '#' starts a comment; tol.NAME=VALUE sets a tolerance."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values, tols = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        if key.startswith("tol."):
            tols.update(_parse_tol([f"{key[4:]}={value}"]))
        elif key in CONFIG_KEYS:
            values[key] = value
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return values, tols


def resolve_config(args: argparse.Namespace) -> tuple[RunConfig, int]:
    file_values, file_tols = read_config_file(args.config) if args.config else ({}, {})

    def pick(name, cast, default):
        flag = getattr(args, name)
        if flag is not None:
            return flag
        if name in file_values:
            try:
                return cast(file_values[name])
            except ValueError as exc:
                raise ConfigError(f"bad value for {name}: {file_values[name]!r}") from exc
        return default

    tols = {**file_tols, **_parse_tol(args.tol)}
    cfg = RunConfig(
        n=pick("n", int, 2),
        s_range=(pick("s_min", float, -20.0), pick("s_max", float, 200.0)),
        grid_count=pick("grid", int, 200),
        tolerance_overrides=tols,
        output_dir=pick("out", str, os.environ.get("SOLITONLAB_OUT") or DEFAULT_OUT),
        format=pick("format", str, "both"),
        seed=pick("seed", int, 0),
    )
    k_max = pick("k_max", int, 40)
    if k_max < 10:
        raise ConfigError("k_max must be >= 10")
    return cfg, k_max


def _claims_exit(results) -> int:
    return EXIT_CLAIM if any(r.status == "fail" for r in results) else EXIT_OK


def run_command(command: str, cfg: RunConfig, k_max: int = 40) -> tuple[list[Path], int]:
    out, fmt = cfg.output_dir, cfg.format
    if command == "solve":
        rows = solve_table(cfg)
        return write_outputs(out, "solve", fmt, to_csv(SOLVE_COLUMNS, rows), table_json(SOLVE_COLUMNS, rows)), EXIT_OK
    if command == "curvature":
        rows = curvature_table(cfg)
        return (write_outputs(out, "curvature", fmt, to_csv(CURVATURE_COLUMNS, rows),
                              table_json(CURVATURE_COLUMNS, rows)), EXIT_OK)
    if command == "flow":
        rows = flow_table(cfg)
        return write_outputs(out, "flow", fmt, to_csv(FLOW_COLUMNS, rows), table_json(FLOW_COLUMNS, rows)), EXIT_OK
    if command == "asym":
        results = asymptotic_claims(cfg)
        obj = {"config": cfg.echo(), "claims": [r.as_record() for r in results]}
        return write_outputs(out, "asym", fmt, to_csv(CLAIM_COLUMNS, claim_rows(results)), obj), _claims_exit(results)
    if command == "collapse":
        rows = collapse_table(cfg, k_max)
        results = collapse_summary(cfg, k_max)
        obj = {"config": cfg.echo(), "records": table_json(COLLAPSE_COLUMNS, rows),
               "claims": [r.as_record() for r in results]}
        return write_outputs(out, "collapse", fmt, to_csv(COLLAPSE_COLUMNS, rows), obj), _claims_exit(results)
    if command == "verify":
        report = run_verification(cfg)
        csv_text = to_csv(("module",) + CLAIM_COLUMNS,
                          [(m,) + row for m, res in report.modules.items() for row in claim_rows(res)])
        # the JSON report is always written; CSV only when asked for
        paths = write_outputs(out, "verify", "both" if fmt != "json" else "json",
                              csv_text if fmt != "json" else None, report.to_json_obj())
        return paths, EXIT_OK if report.passed else EXIT_CLAIM
    raise ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, k_max = resolve_config(args)
        paths, code = run_command(args.command, cfg, k_max)
    except (ConfigError, DomainError) as exc:
        print(f"solitonlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceFailure, QuadratureFailure, DegenerateRicci, ArithmeticError) as exc:
        print(f"solitonlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    if code == EXIT_CLAIM:
        print("solitonlab: at least one claim failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
