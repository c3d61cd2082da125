"""Command-line front end.

Verbs: ``curve``, ``zeta``, ``threshold``, ``iterations``, ``simulate`` and
``verify``. Defaults may come from a ``key = value`` config file named by
``--config`` or the ``SCREENLAB_CONFIG`` environment variable; flags win.

Exit status: 0 success, 1 usage or domain error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable, Optional, Sequence, TextIO

from . import __version__
from .bayes_core import (
    PrevalenceShift,
    TestCharacteristics,
    fdr,
    ppv,
    ppv_at_threshold,
    prevalence_threshold,
    zeta,
)
from .dynamics import ProgramConfig, paradox_summary, run_trajectory
from .errors import ScreenlabError
from .oracle import MIN_SAMPLES, RNG_ALGORITHM
from .serial_testing import iterations_to_target, iterations_to_threshold
from .verify import run_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2

CONFIG_ENV = "SCREENLAB_CONFIG"
LADDER_ROWS = 64

CURVE_HEADER = ("phi", "ppv", "fdr")
SIMULATE_HEADER = (
    "step", "prevalence", "ppv", "fdr", "zeta_vs_baseline",
    "scenario", "pti_required", "below_threshold",
)
VERIFY_HEADER = ("check", "case", "reference", "observed", "deviation", "tolerance", "passed")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def fmt(value: Any) -> str:
    """Render one CSV cell: 12 significant digits, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict[str, Any]
    seed: Optional[int] = None
    tool_version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def comment_lines(self) -> list[str]:
        # the timestamp goes only to the sidecar so CSV bodies stay byte-stable
        lines = [f"# tool=screenlab {self.tool_version}", f"# subcommand={self.subcommand}"]
        lines += [f"# param.{k}={fmt(v)}" for k, v in self.parameters.items()]
        if self.seed is not None:
            lines += [f"# seed={self.seed}", f"# rng={RNG_ALGORITHM}"]
        return lines


def write_csv(
    rows: Iterable[Sequence[Any]],
    header: Sequence[str],
    manifest: RunManifest,
    out: TextIO,
    extra_comments: Sequence[str] = (),
) -> None:
    for line in [*manifest.comment_lines(), *extra_comments]:
        out.write(line + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def emit_csv(
    path: Optional[str],
    rows: Iterable[Sequence[Any]],
    header: Sequence[str],
    manifest: RunManifest,
    extra_comments: Sequence[str] = (),
) -> None:
    """Write CSV to ``path`` (plus a ``.manifest.json`` sidecar) or to stdout."""
    if path is None:
        write_csv(rows, header, manifest, sys.stdout, extra_comments)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(rows, header, manifest, fh, extra_comments)
    with open(path + ".manifest.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Split an emitted CSV into its ``#`` metadata and data rows."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


# ---------------------------------------------------------------------------
# Config file
# ---------------------------------------------------------------------------

_BOOL_KEYS = {"to_threshold", "stop_at_threshold"}


def load_config(path: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key in _BOOL_KEYS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"{path}:{lineno}: {key} must be true or false")
            values[key] = value.lower() in ("true", "1", "yes")
        else:
            values[key] = value
    return values


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _add_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sensitivity", type=float, help="test sensitivity a")
    p.add_argument("--specificity", type=float, help="test specificity b")


def build_parser() -> _Parser:
    parser = _Parser(prog="screenlab", description="Predictive-value dynamics of screening tests.")
    parser.add_argument("--version", action="version", version=f"screenlab {__version__}")
    parser.add_argument("--config", help="key = value defaults file (overrides $SCREENLAB_CONFIG)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("curve", help="PPV/FDR screening curve as CSV")
    _add_test_flags(p)
    p.add_argument("--phi-min", type=float, default=0.0)
    p.add_argument("--phi-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("zeta", help="retained PPV fraction after a prevalence drop")
    _add_test_flags(p)
    p.add_argument("--prevalence", type=float, help="baseline prevalence phi0")
    p.add_argument("--reduction", type=float, help="absolute prevalence drop k")
    p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("threshold", help="prevalence threshold and the PPV there")
    _add_test_flags(p)

    p = sub.add_parser("iterations", help="consecutive positives needed to reach a PPV")
    _add_test_flags(p)
    p.add_argument("--prevalence", type=float)
    p.add_argument("--target", type=float)
    p.add_argument("--to-threshold", action="store_true",
                   help="target the PPV at the prevalence threshold")

    p = sub.add_parser("simulate", help="screen-and-treat trajectory as CSV")
    _add_test_flags(p)
    p.add_argument("--prevalence", type=float, help="initial prevalence phi0")
    p.add_argument("--coverage", type=float, default=1.0)
    p.add_argument("--efficacy", type=float, default=1.0)
    p.add_argument("--incidence", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--stop-at-threshold", action="store_true")
    p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("verify", help="check closed forms against the oracles")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=20200101)
    p.add_argument("--sweep", type=int, default=1000, help="random cases per exact check")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--inject-fault", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command}: missing required option(s): {flags}")


def _test(args: argparse.Namespace) -> TestCharacteristics:
    _require(args, "sensitivity", "specificity")
    return TestCharacteristics(args.sensitivity, args.specificity)


def _params(args: argparse.Namespace, *names: str) -> dict[str, Any]:
    return {n: getattr(args, n) for n in names}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_curve(args: argparse.Namespace) -> int:
    test = _test(args)
    lo, hi, n = args.phi_min, args.phi_max, args.points
    if not (0.0 <= lo < hi <= 1.0):
        raise UsageError("curve: need 0 <= --phi-min < --phi-max <= 1")
    if n < 2:
        raise UsageError("curve: --points must be >= 2")

    rows = []
    for i in range(n):
        phi = hi if i == n - 1 else lo + (hi - lo) * i / (n - 1)
        try:
            rho = ppv(test, phi)
            rows.append((phi, rho, fdr(test, phi)))
        except ScreenlabError:
            rows.append((phi, None, None))

    pe = prevalence_threshold(test)
    try:
        rho_e: Any = ppv_at_threshold(test)
    except ScreenlabError:
        rho_e = "undefined"
    manifest = RunManifest("curve", _params(args, "sensitivity", "specificity",
                                            "phi_min", "phi_max", "points"))
    emit_csv(args.csv, rows, CURVE_HEADER, manifest,
             [f"# phi_e={fmt(pe)}", f"# ppv_at_phi_e={fmt(rho_e)}"])
    return EXIT_OK


def cmd_zeta(args: argparse.Namespace) -> int:
    test = _test(args)
    _require(args, "prevalence", "reduction")
    shift = PrevalenceShift.from_values(args.prevalence, args.reduction)
    rep = zeta(test, shift)
    print(f"zeta            {rep.zeta:.6f}")
    print(f"baseline_ppv    {rep.baseline_ppv:.6f}  (phi0={shift.baseline.value:g})")
    print(f"shifted_ppv     {rep.shifted_ppv:.6f}  (phik={shift.shifted.value:g})")
    print(f"phi_e           {rep.threshold:.6f}")
    print(f"scenario        {rep.scenario.label}")
    if args.csv:
        manifest = RunManifest("zeta", _params(args, "sensitivity", "specificity",
                                               "prevalence", "reduction"))
        row = (shift.baseline.value, shift.shifted.value, rep.baseline_ppv,
               rep.shifted_ppv, rep.zeta, rep.threshold, rep.scenario.label)
        emit_csv(args.csv, [row], ("phi0", "phik", "baseline_ppv", "shifted_ppv",
                                   "zeta", "phi_e", "scenario"), manifest)
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace) -> int:
    test = _test(args)
    print(f"youden_j        {test.youden_j:.6f}")
    print(f"lr_positive     {test.lr_positive:.6f}")
    print(f"phi_e           {prevalence_threshold(test):.6f}")
    if test.specificity < 1.0:
        print(f"omega           {test.omega:.6f}")
        print(f"ppv_at_phi_e    {ppv_at_threshold(test):.6f}")
    else:
        print("ppv_at_phi_e    undefined (specificity 1)")
    return EXIT_OK


def cmd_iterations(args: argparse.Namespace) -> int:
    test = _test(args)
    _require(args, "prevalence")
    if args.to_threshold and args.target is not None:
        raise UsageError("iterations: give either --target or --to-threshold, not both")
    if args.to_threshold:
        plan = iterations_to_threshold(test, args.prevalence)
    elif args.target is not None:
        plan = iterations_to_target(test, args.prevalence, args.target)
    else:
        raise UsageError("iterations: one of --target or --to-threshold is required")
    print(f"target_ppv      {plan.target_ppv:.6f}")
    print(f"iterations      {plan.iterations}")
    print(f"omega           {plan.omega:.6f}")
    print("positives  ppv")
    for j, rho in enumerate(plan.per_step_ppv[:LADDER_ROWS], 1):
        print(f"{j:9d}  {rho:.6f}")
    if plan.iterations > LADDER_ROWS:
        print(f"... {plan.iterations - LADDER_ROWS} more rows not shown")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    test = _test(args)
    _require(args, "prevalence")
    config = ProgramConfig(
        test=test,
        initial_prevalence=args.prevalence,
        coverage=args.coverage,
        treatment_efficacy=args.efficacy,
        incidence=args.incidence,
        steps=args.steps,
        stop_at_threshold=args.stop_at_threshold,
    )
    records = run_trajectory(config)
    rows = [
        (r.step, r.prevalence, r.ppv, r.fdr, r.zeta_vs_baseline, r.scenario.label,
         r.pti_required, r.below_threshold)
        for r in records
    ]
    summary = paradox_summary(records)
    manifest = RunManifest("simulate", _params(
        args, "sensitivity", "specificity", "prevalence", "coverage", "efficacy",
        "incidence", "steps", "stop_at_threshold"))
    emit_csv(args.csv, rows, SIMULATE_HEADER, manifest, [
        f"# phi_e={fmt(prevalence_threshold(test))}",
        f"# crossing_step={fmt(summary.crossing_step)}",
        f"# zeta_loss={fmt(summary.zeta_loss)}",
        f"# max_pti={fmt(summary.max_pti)}",
    ])
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples < MIN_SAMPLES:
        raise UsageError(f"verify: --samples must be >= {MIN_SAMPLES}")
    if args.sweep < 1:
        raise UsageError("verify: --sweep must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("verify: --seed must be an unsigned 64-bit integer")
    results = run_checks(args.samples, args.seed, args.sweep, args.inject_fault)

    by_check: dict[str, list] = {}
    for r in results:
        by_check.setdefault(r.check, []).append(r)
    out = sys.stderr if args.csv is None else sys.stdout
    for name, rs in by_check.items():
        worst = max(rs, key=lambda r: r.deviation / r.tolerance if r.tolerance else r.deviation)
        ok = all(r.passed for r in rs)
        print(f"{'PASS' if ok else 'FAIL'}  {name:<17} max deviation {worst.deviation:.3g}"
              f" (tolerance {worst.tolerance:g}, {len(rs)} row(s))", file=out)

    manifest = RunManifest("verify", _params(args, "samples", "sweep"), seed=args.seed)
    rows = [(r.check, r.case, r.reference, r.observed, r.deviation, r.tolerance, r.passed)
            for r in results]
    emit_csv(args.csv, rows, VERIFY_HEADER, manifest)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


COMMANDS = {
    "curve": cmd_curve,
    "zeta": cmd_zeta,
    "threshold": cmd_threshold,
    "iterations": cmd_iterations,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        known, _ = parser.parse_known_args(argv)
        config_path = known.config or os.environ.get(CONFIG_ENV)
        if config_path:
            defaults = load_config(config_path)
            sub = parser._subparsers._group_actions[0].choices  # type: ignore[union-attr]
            if known.command in sub:
                target = sub[known.command]
                valid = {a.dest for a in target._actions}
                target.set_defaults(**{k: v for k, v in defaults.items() if k in valid})
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScreenlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
