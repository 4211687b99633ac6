"""
Report output: JSON, CSV and the console summary.

The CSV is derived from the encoded JSON, never from live objects, so
`report` can aggregate files written by earlier runs with the same code.
This module and cli.py are the only places that print.

CSV columns (config.CSV_COLUMNS):
  experiment    spec kind
  kind          certificate kind, or "-" for artifact-only experiments
  N             ledger size, empty when not applicable
  parameters    canonical JSON of the certificate parameters
  bound         exact bound ("p/q", or "(s)^(1/p)" for p-norm handles)
  bound_approx  decimal rendering of bound, approximate, never used for decisions
  verdict       pass | fail | n/a
"""

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from config import APPROX_DIGITS, CSV_COLUMNS, REPORT_CSV_NAME, REPORT_JSON_NAME
from src.common.errors import PreconditionError, StructuralError
from src.common.protocol import canonical_json_bytes, decode_bound

FORMATS = ("json", "csv", "both")


def _render_bound(encoded) -> tuple:
    """(exact, approx) strings for an encoded bound."""
    if encoded is None:
        return "", ""
    value = decode_bound(encoded)
    if isinstance(value, Fraction):
        return str(value), f"{float(value):.{APPROX_DIGITS}g}"
    approx = float(value.power_sum) ** (1 / value.p)
    return str(value), f"{approx:.{APPROX_DIGITS}g}"


def csv_rows(encoded_reports: Iterable[dict]) -> list:
    rows = []
    for report in encoded_reports:
        if not isinstance(report, dict) or "spec" not in report:
            raise StructuralError("report JSON must be an object with a 'spec' field")
        experiment = report["spec"]["kind"]
        certificates = report.get("certificates", [])
        if not certificates:
            bound, approx = _render_bound(report.get("value"))
            rows.append([experiment, "-", "", "{}", bound, approx, "n/a"])
            continue
        for cert in certificates:
            bound, approx = _render_bound(cert["bound"])
            rows.append(
                [
                    experiment,
                    cert["kind"],
                    "" if cert.get("N") is None else str(cert["N"]),
                    canonical_json_bytes(cert.get("parameters", {})).decode("utf-8"),
                    bound,
                    approx,
                    cert["verdict"],
                ]
            )
    return rows


def render_csv(encoded_reports: Iterable[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(csv_rows(encoded_reports))
    return buffer.getvalue()


def render_json(encoded_reports: Sequence[dict]) -> str:
    return json.dumps(list(encoded_reports), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_report(encoded_reports: Sequence[dict], fmt: str = "both", out_dir: Optional[Path] = None) -> list:
    """
    Write report.json and/or summary.csv into out_dir (cwd if None).

    Output depends only on the encoded reports, so identical runs give
    identical bytes.

    Returns:
        list of written paths

    Raises:
        PreconditionError: empty report list or unknown format
    """
    if not encoded_reports:
        raise PreconditionError("emit_report needs at least one report")
    if fmt not in FORMATS:
        raise PreconditionError(f"format must be one of {FORMATS}, got {fmt!r}")
    out_dir = Path(out_dir) if out_dir is not None else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = out_dir / REPORT_JSON_NAME
        path.write_text(render_json(encoded_reports), encoding="utf-8")
        written.append(path)
    if fmt in ("csv", "both"):
        path = out_dir / REPORT_CSV_NAME
        path.write_text(render_csv(encoded_reports), encoding="utf-8")
        written.append(path)
    return written


def load_reports(paths: Sequence[Path]) -> list:
    """Encoded reports from report.json files (each a list or a single report)."""
    out = []
    for path in paths:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        out.extend(data if isinstance(data, list) else [data])
    return out


def print_summary(encoded_reports: Sequence[dict]):
    print("\n" + "=" * 60)
    for row in csv_rows(encoded_reports):
        experiment, kind, N, _, bound, approx, verdict = row
        label = experiment if kind == "-" else f"{experiment}/{kind}"
        where = f" N={N}" if N else ""
        print(f"{verdict.upper():5} {label}{where}  bound={bound} (~{approx})")
    print("=" * 60)
