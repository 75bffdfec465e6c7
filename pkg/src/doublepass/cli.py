"""Command-line front end: ``doublepass {figure,sweep,validate}``.

Output files are CSV by default: ``# key=value`` metadata lines, one header
row, then data rows with 12 significant digits. The metadata includes the
``command`` that regenerates the file. Without ``--out`` files go to
``$DOUBLEPASS_OUTPUT_DIR`` (default: the working directory); ``--out -``
writes to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
from pathlib import Path

from . import __version__
from .figures import (
    DEFAULT_POINTS,
    FIGURES,
    KAPPA2_WINDOW,
    QUANTITIES,
    SWEEP_AXES,
    SweepRange,
    Table,
    figure_table,
    sweep_table,
)
from .params import DEFAULT_OMEGA_T

OUTPUT_DIR_ENV = "DOUBLEPASS_OUTPUT_DIR"
SIG_DIGITS = 12

FIGURE_HELP = """\
figure ids (abscissa, then one column per curve, then classical limits):
  4a   ideal memory, coherent average fidelity, n = 4, 8, 20, vs kappa2
  4b   ideal memory, qubit average fidelity vs kappa2
  5    ideal EPR variance vs kappa2
  6    ideal spin squeezing in dB and g_opt vs kappa2
  7a   coherent fidelity with losses, r = eta = 7.5%, vs kappa2
  7b   qubit fidelity with losses, r = eta = 7.5%, vs kappa2
  8a   maximal coherent fidelity (n = 8) vs r, eta = 5, 10, 25%
  8b   maximal qubit fidelity vs r, eta = 5, 10, 25%
  9a   EPR variance with losses, r = eta = 10%, vs kappa2
  9b   kappa-optimized EPR variance vs r, eta = 5, 10, 25%, with kappa2_opt
  10a  squeezing with losses, r = eta = 10%, and g_opt vs kappa2
  10b  maximal squeezing vs r, eta = 5, 10, 25%, with kappa2_opt

Ids follow the reference figure numbering. Where those labels are ambiguous
(the noisy EPR and squeezing figures), the id is fixed by the parameter set:
7 -> r = eta = 7.5%; 9a, 10a -> r = eta = 10%; 8, 9b, 10b -> eta families
{5, 10, 25}%. Optimized curves search kappa2 in [0.01, 8]; the window is
recorded in the file header.
"""


def _fmt(v: float) -> str:
    return f"{v:.{SIG_DIGITS}g}"


def _round(v: float) -> float:
    return float(_fmt(v))


def render(table: Table, fmt: str = "csv") -> str:
    if fmt == "json":
        doc = {"meta": table.meta, "columns": list(table.columns),
               "rows": [[_round(v) for v in row] for row in table.rows]}
        return json.dumps(doc, indent=1) + "\n"
    lines = [f"# {k}={v}" for k, v in table.meta.items()]
    lines.append(",".join(table.columns))
    lines += [",".join(_fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def read_header(path) -> dict:
    """Metadata of a CSV or JSON output file."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["meta"]
    meta = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition("=")
        meta[key] = value
    return meta


def read_body(path) -> str:
    """Everything after the metadata (CSV) or the data part (JSON)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return json.dumps([doc["columns"], doc["rows"]])
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("# "))


def _write(text: str, out: str | None, default_name: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    path = Path(out) if out else Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {path}", file=sys.stderr)


def _parse_range(text: str) -> float | SweepRange:
    """``value`` or ``start:stop:steps``."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 3:
            return SweepRange(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(f"expected VALUE or START:STOP:STEPS, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doublepass",
        description="Double-pass light-atom memory and EPR source: figure data, "
                    "sweeps and oracle validation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="write the data of one figure",
                         epilog=FIGURE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    fig.add_argument("id", choices=list(FIGURES), metavar="ID",
                     help="one of " + ", ".join(FIGURES))
    fig.add_argument("--points", type=int, default=DEFAULT_POINTS,
                     help=f"abscissa points (default {DEFAULT_POINTS})")
    _output_args(fig)

    sw = sub.add_parser(
        "sweep", help="evaluate a figure of merit on a parameter grid",
        description="Each axis takes VALUE or START:STOP:STEPS (steps >= 2). "
                    "Swept axes form a Cartesian grid in the order kappa2, r, eta, n.")
    sw.add_argument("--quantity", choices=QUANTITIES, required=True)
    sw.add_argument("--kappa2", type=_parse_range, default=1.0)
    sw.add_argument("--r", type=_parse_range, default=0.0)
    sw.add_argument("--eta", type=_parse_range, default=0.0)
    sw.add_argument("--n", type=_parse_range, default=8.0, help="mean photon number")
    sw.add_argument("--optimize", choices=("none", "kappa2"), default="none",
                    help="optimize kappa2 at every grid point (g_opt is always optimized)")
    sw.add_argument("--kappa2-window", type=float, nargs=2, default=KAPPA2_WINDOW,
                    metavar=("LO", "HI"))
    sw.add_argument("--omega-T", type=float, default=DEFAULT_OMEGA_T,
                    help="Larmor phase over the pulse (default 2*pi*50)")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes")
    _output_args(sw)

    val = sub.add_parser("validate", help="oracle-vs-analytic and invariant checks")
    val.add_argument("level", choices=("fast", "full"), nargs="?", default="fast",
                     help="fast: N=1000 slices; full: N=8000 and tighter tolerances")
    return parser


def _output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output path, '-' for stdout (default: ${OUTPUT_DIR_ENV}/...)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _canonical(args: argparse.Namespace) -> str:
    """Command line that reproduces the data, without output options."""
    if args.command == "figure":
        return shlex.join(["figure", args.id, "--points", str(args.points)])
    cmd = ["sweep", "--quantity", args.quantity]
    for axis in SWEEP_AXES:
        v = getattr(args, axis)
        if isinstance(v, SweepRange):
            cmd += [f"--{axis}", f"{v.start!r}:{v.stop!r}:{v.steps}"]
        else:
            cmd += [f"--{axis}", repr(v)]
    cmd += ["--optimize", args.optimize, "--kappa2-window", *map(repr, args.kappa2_window),
            "--omega-T", repr(args.omega_T)]
    return shlex.join(cmd)


def cmd_figure(args) -> int:
    table = figure_table(args.id, args.points)
    table.meta["command"] = _canonical(args)
    _write(render(table, args.format), args.out, f"figure_{args.id}.{args.format}")
    return 0


def cmd_sweep(args, parser) -> int:
    ranges = {a: getattr(args, a) for a in SWEEP_AXES if isinstance(getattr(args, a), SweepRange)}
    fixed = {a: getattr(args, a) for a in SWEEP_AXES if a not in ranges}
    if not ranges:
        parser.error("sweep: give at least one axis as START:STOP:STEPS")
    lo, hi = args.kappa2_window
    if not 0 <= lo < hi:
        parser.error("sweep: --kappa2-window needs 0 <= LO < HI")
    try:
        table = sweep_table(args.quantity, fixed, ranges, args.optimize == "kappa2",
                            (lo, hi), args.omega_T, args.jobs)
    except ValueError as exc:
        parser.error(f"sweep: {exc}")
    table.meta["command"] = _canonical(args)
    _write(render(table, args.format), args.out, f"sweep_{args.quantity}.{args.format}")
    return 0


def cmd_validate(args) -> int:
    from .validation import run_checks

    results = run_checks(args.level)
    width = max(len(c.name) for c in results)
    print(f"{'check':<{width}}  {'max deviation':>13}  {'tolerance':>9}  status")
    for c in results:
        status = "ok" if c.passed else "FAIL"
        print(f"{c.name:<{width}}  {c.deviation:13.3e}  {c.tolerance:9.1e}  {status}")
    failed = [c for c in results if not c.passed]
    if failed:
        print(f"FAILED: {failed[0].name}")
        return 1
    print(f"all {len(results)} checks passed ({args.level})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "figure":
        if args.points < 2:
            parser.error("figure: --points must be >= 2")
        return cmd_figure(args)
    if args.command == "sweep":
        return cmd_sweep(args, parser)
    return cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
