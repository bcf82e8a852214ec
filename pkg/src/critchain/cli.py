"""Command-line entry point ``critchain``."""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__, faults, fisher
from .check import format_report, report_csv, run_check
from .config import Axis, SweepConfig, apply_config_text, parse_phi_list, read_config_text
from .errors import ConfigError, ConventionError, CritchainError, RangeError, UnstableRegime
from .figures import FIGURES, PlotSpec, Table, write_plots
from .model import Regime, validate_params
from .sweep import COLUMNS, default_jobs, run_sweep, write_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ORACLE = 2

# CLI flag -> config key.
PARAM_FLAGS = {
    "omega0": "omega0",
    "thop": "thop",
    "g": "g",
    "kappa_ph": "kappa_ph",
    "eta": "eta",
    "sites": "sites",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file (or a CSV written by a previous run)")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=None, help="also write SVG plots")
    p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None, help="add Fock-space oracle columns")
    p.add_argument("--jobs", type=_positive_int, help="worker processes (default: $CRITCHAIN_JOBS or 1)")
    p.add_argument("--nmax", type=_positive_int, help="Fock cutoff for oracle columns")
    p.add_argument("--omega0", type=float)
    p.add_argument("--thop", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--kappa-ph", dest="kappa_ph", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--sites", type=int)
    p.add_argument("--phi", help="comma-separated homodyne phases, e.g. 0,0.25pi,1.2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="critchain", description="Critical quantum metrology of a cavity coupled to a tight-binding chain.")
    parser.add_argument("--version", action="version", version=f"critchain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in FIGURES:
        _common(sub.add_parser(name, help=f"data for {name}"))
    sw = sub.add_parser("sweep", help="generic N-axis parameter sweep")
    _common(sw)
    sw.add_argument("--regime", choices=[r.value for r in Regime])
    sw.add_argument("--quantity", choices=["fisher", "qfi", "spectrum", "current"])
    sw.add_argument(
        "--axis",
        action="append",
        default=None,
        help="axis spec name:lo:hi:count[:linear|log] or name=v1,v2 (repeatable)",
    )
    sw.add_argument("--name", help="output file stem (default: sweep)")
    ck = sub.add_parser("check", help="engine versus oracle consistency report")
    _common(ck)
    ck.add_argument("--inject-fault", choices=faults.KNOWN, action="append", help="perturb one ingredient by 1%%")
    return parser


def resolve_config(args: argparse.Namespace) -> tuple[SweepConfig, bool, bool]:
    """Defaults, then the config file, then flags. Returns (config, phi_given, g_given)."""
    cfg = SweepConfig(jobs=default_jobs())
    phi_given = g_given = False
    if args.config:
        text = read_config_text(args.config)
        before = cfg
        cfg = apply_config_text(cfg, text, sweep_keys=args.command == "sweep")
        phi_given = cfg.phi != before.phi
        g_given = cfg.params.get("g") != before.params.get("g")

    params = dict(cfg.params)
    for flag, key in PARAM_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            params[key] = v
            g_given = g_given or key == "g"
    updates = {"params": params}
    if args.phi is not None:
        updates["phi"] = parse_phi_list(args.phi)
        phi_given = True
    for key in ("out", "svg", "oracle", "jobs", "nmax"):
        v = getattr(args, key)
        if v is not None:
            updates[key] = v
    if args.command == "sweep":
        if args.regime is not None:
            updates["regime"] = args.regime
        if args.quantity is not None:
            updates["quantity"] = args.quantity
        if args.axis:
            updates["axes"] = tuple(Axis.parse(a) for a in args.axis)
        if args.name is not None:
            updates["name"] = args.name
    cfg = cfg.with_(**updates)
    try:
        validate_params(cfg.system_params(), Regime.CHAIN_LOSS)
    except UnstableRegime:
        pass  # regime existence is judged per grid point
    return cfg, phi_given, g_given


def _emit(table: Table, cfg: SweepConfig, convention) -> list[str]:
    run_cfg = table.config.with_(out=cfg.out, svg=cfg.svg, jobs=cfg.jobs, oracle=cfg.oracle, nmax=cfg.nmax)
    result = run_sweep(run_cfg, convention=convention)
    os.makedirs(cfg.out, exist_ok=True)
    written = [write_csv(result, os.path.join(cfg.out, run_cfg.name + ".csv"))]
    if cfg.svg and table.plots:
        written += write_plots(result, table, cfg.out)
    return written


def cmd_figure(name: str, cfg: SweepConfig, phi_given: bool, g_given: bool) -> int:
    convention = fisher.arbitrate_convention()
    for table in FIGURES[name](cfg, phi_given=phi_given, g_given=g_given):
        for path in _emit(table, cfg, convention):
            print(path)
    return EXIT_OK


def cmd_sweep(cfg: SweepConfig) -> int:
    convention = fisher.arbitrate_convention()
    # A plain sweep gets one line plot along its axis when it is 1-D.
    plots = ()
    axes = cfg.grid_axes
    if len(axes) == 1:
        plots = (PlotSpec("", "line", axes[0].name, COLUMNS[cfg.quantity][0], title=cfg.name),)
    for path in _emit(Table(cfg, plots), cfg, convention):
        print(path)
    return EXIT_OK


def cmd_check(cfg: SweepConfig, inject: list | None) -> int:
    if inject:
        os.environ[faults.ENV_VAR] = ",".join(inject)
    report = run_check(cfg.nmax)
    sys.stdout.write(format_report(report))
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "check.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report_csv(report))
    print(path)
    return report.exit_code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, phi_given, g_given = resolve_config(args)
        if args.command == "check":
            return cmd_check(cfg, args.inject_fault)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        return cmd_figure(args.command, cfg, phi_given, g_given)
    except ConventionError as exc:
        print(f"critchain: convention arbitration failed: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (ConfigError, RangeError) as exc:
        print(f"critchain: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CritchainError as exc:
        print(f"critchain: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"critchain: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
