"""
Command-line entry point.

    python -m src.cli.cli construct --set N=3 --out results/
    python -m src.cli.cli verify-prop21 --spec specs/prop21_p2.json --out results/
    python -m src.cli.cli report results/a/report.json results/b/report.json --out results/

Every experiment subcommand takes either a JSON spec ({"kind", "parameters",
"seed"}) or builds one from --set key=value pairs (values are parsed as JSON,
falling back to plain strings, so --set eps=1/4 works).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from config import EXIT_PASS, EXIT_SPEC_ERROR
from src.cli.report import FORMATS, emit_report, load_reports, print_summary
from src.cli.runner import RunOptions, encode_report, exit_code_for, exit_code_for_error, run_experiment
from src.common.errors import CapExceededError, LabError, SpecError
from src.common.protocol import ExperimentSpec, decode_spec

logger = logging.getLogger(__name__)

# subcommand -> (default kind, kinds accepted from a --spec file)
SUBCOMMANDS = {
    "construct": ("build_stages", ("build_stages",)),
    "ball": ("ball", ("ball",)),
    "slice": ("slice", ("slice",)),
    "diameter": ("diameter", ("diameter",)),
    "verify-prop21": ("prop21", ("prop21",)),
    "verify-k0-open": ("k0_open", ("k0_open",)),
    "verify-k0-combo": ("k0_small_combo", ("k0_small_combo",)),
    "verify-thm-combo": ("thm_combo", ("thm_combo",)),
    "verify-thm-open": ("thm_open", ("thm_open",)),
    "verify-lemma24": ("lemma24", ("lemma24",)),
    "verify-l1sum": ("l1sum_inclusion", ("l1sum_inclusion", "l1sum_combo_transfer")),
}


def _parse_assignment(text: str) -> tuple:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise SpecError("--set", f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def load_spec(command: str, spec_path, assignments) -> ExperimentSpec:
    """
    Spec from --spec (if any) with --set overrides applied.

    Raises:
        SpecError: unreadable JSON, a kind the subcommand does not run, a bad --set
    """
    default_kind, accepted = SUBCOMMANDS[command]
    if spec_path is not None:
        try:
            data = json.loads(Path(spec_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise SpecError("$", f"invalid JSON in {spec_path}: {e}")
        spec = decode_spec(data)
        if spec.kind not in accepted:
            raise SpecError("kind", f"{command} runs {', '.join(accepted)}, got {spec.kind!r}")
    else:
        spec = ExperimentSpec(default_kind)
    parameters = dict(spec.parameters)
    for text in assignments or ():
        key, value = _parse_assignment(text)
        parameters[key] = value
    return ExperimentSpec(spec.kind, parameters, spec.seed)


def _cmd_experiment(args: argparse.Namespace) -> int:
    options = RunOptions(
        seed=args.seed,
        cap_vertices=args.cap_vertices,
        cap_sums=args.cap_sums,
        timing=args.timing,
        recheck=args.recheck,
    )
    try:
        spec = load_spec(args.command, args.spec, args.set)
        report = run_experiment(spec, options)
    except LabError as e:
        code = exit_code_for_error(e)
        if isinstance(e, SpecError):
            print(f"Spec error at {e.field}: {e}", file=sys.stderr)
        elif isinstance(e, CapExceededError):
            print(f"Cap exceeded ({e.cap_name}): {e}", file=sys.stderr)
        else:
            print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return code

    encoded = [encode_report(report)]
    for path in emit_report(encoded, args.format, args.out):
        logger.info("wrote %s", path)
    print_summary(encoded)
    return exit_code_for([report])


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        encoded = load_reports(args.reports)
        emit_report(encoded, args.format, args.out)
    except LabError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SPEC_ERROR
    print_summary(encoded)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Exact certificates for slices and weak neighbourhoods of diameter two")
    parser.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    sub = parser.add_subparsers(dest="command", required=True)

    for name, (kind, _) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"Run a {kind} experiment")
        p.add_argument("--spec", type=Path, default=None, help="Experiment spec JSON file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override one spec parameter")
        p.add_argument("--out", type=Path, default=Path("results"), help="Output directory")
        p.add_argument("--seed", type=int, default=None, help="Seed for randomized suites")
        p.add_argument("--cap-vertices", type=int, default=RunOptions.cap_vertices)
        p.add_argument("--cap-sums", type=int, default=RunOptions.cap_sums)
        p.add_argument("--format", choices=FORMATS, default="both")
        p.add_argument("--timing", action="store_true", help="Record wall-clock time in the report")
        p.add_argument("--recheck", action="store_true", help="Re-verify every certificate from its payload")
        p.set_defaults(func=_cmd_experiment)

    p_report = sub.add_parser("report", help="Aggregate report.json files into one CSV")
    p_report.add_argument("reports", nargs="+", type=Path)
    p_report.add_argument("--out", type=Path, default=Path("results"))
    p_report.add_argument("--format", choices=FORMATS, default="csv")
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    return int(args.func(args))


if __name__ == "__main__":
    raise SystemExit(main())
