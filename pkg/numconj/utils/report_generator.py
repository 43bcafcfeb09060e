"""Report envelopes and their JSON / CSV / text renderings."""

from __future__ import annotations

import csv
import io
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema
import mpmath
from jinja2 import BaseLoader, Environment
from rich.console import Console
from rich.table import Table

from .apery import AperyRow, BrunReport, DeltaRow, RunReport
from .bhargava import AxiomReport
from .conjectures import CheckResult, CheckStatus, ConjectureId, ScanReport
from .exactmath import DEFAULT_DIGIT_CAP, FactoredNat, RenderLimitError, format_rational, int_setting

console = Console(stderr=True)

TOOL_NAME = "numconj"

PAYLOAD_TYPES = ("scan", "axioms", "factorial", "apery_table", "delta", "runs", "preconditions")

EXIT_CODES = {CheckStatus.VERIFIED: 0, CheckStatus.VIOLATED: 1, CheckStatus.INCONCLUSIVE: 2}

REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["tool", "version", "config", "payload_type", "payload", "summary_status"],
    "properties": {
        "tool": {"const": TOOL_NAME},
        "version": {"type": "string"},
        "config": {"type": "object", "required": ["subcommand"]},
        "payload_type": {"enum": list(PAYLOAD_TYPES)},
        "payload": {
            "type": "object",
            "required": ["columns", "rows"],
            "properties": {
                "columns": {"type": "array", "items": {"type": "string"}},
                "rows": {"type": "array", "items": {"type": "object"}},
            },
        },
        "summary_status": {"enum": [s.value for s in CheckStatus]},
        "run": {
            "type": "object",
            "properties": {"timestamp": {"type": "string"}, "wall_time": {"type": "number"}},
        },
    },
}


@dataclass
class ReportConfig:
    """Report rendering configuration."""

    digit_cap: int = DEFAULT_DIGIT_CAP
    decimal_digits: int = 15


@dataclass
class ReportEnvelope:
    """A complete, self-describing run report."""

    version: str
    config: dict[str, Any]
    payload_type: str
    payload: dict[str, Any]
    summary_status: CheckStatus
    run: dict[str, Any] | None = None
    tool: str = TOOL_NAME
    title: str = ""
    summary_lines: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.summary_status]

    def to_dict(self) -> dict[str, Any]:
        data = {
            "tool": self.tool,
            "version": self.version,
            "config": self.config,
            "payload_type": self.payload_type,
            "payload": self.payload,
            "summary_status": self.summary_status.value,
        }
        if self.run is not None:
            data["run"] = self.run
        return data


def load_report(text: str) -> dict[str, Any]:
    """Parse a JSON report and validate it against the envelope schema."""
    data = json.loads(text)
    jsonschema.validate(data, REPORT_SCHEMA)
    return data


def _factored(value: FactoredNat | None) -> list[str] | None:
    return None if value is None else value.to_json()


def _result_entry(result: CheckResult) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "n": result.n,
        "status": result.status.value,
        "detail": result.detail,
        "truncation": dict(sorted(result.truncation.items())),
    }
    if result.conjecture is ConjectureId.C4:
        entry.update(
            tightest_k=result.tightest_k,
            slack=result.slack,
            equality_k=list(result.equality_ks),
            witness=list(result.witness) if isinstance(result.witness, tuple) else None,
        )
    else:
        entry.update(
            ratio=_factored(result.witness if isinstance(result.witness, FactoredNat) else None),
            expected=_factored(result.expected),
            branch=result.branch,
        )
    entry["violation"] = result.violation.value if result.violation else None
    return entry


def scan_payload(report: ScanReport) -> dict[str, Any]:
    rows = [_result_entry(r) for r in report.results]
    if report.conjecture is ConjectureId.C4:
        columns = ["n", "status", "tightest_k", "slack"]
    else:
        columns = ["n", "status", "ratio"]
    return {
        "columns": columns,
        "conjecture": report.conjecture.value,
        "range": [report.n_lo, report.n_hi],
        "counts": report.counts,
        "rows": rows,
        "non_verified": [row for row in rows if row["status"] != CheckStatus.VERIFIED.value],
        "equality_witnesses": [list(w) for w in report.equality_witnesses],
    }


def axiom_payload(report: AxiomReport) -> dict[str, Any]:
    failing_n = {n for n, _ in report.axiom2_failures}
    rows = [
        {
            "n": n,
            "tested": n not in report.untested,
            "axiom2_ok": n not in failing_n,
            "axiom3_ok": n not in report.axiom3_failures,
        }
        for n in range(report.n_max + 1)
    ]
    return {
        "columns": ["n", "tested", "axiom2_ok", "axiom3_ok"],
        "provider": report.provider,
        "n_max": report.n_max,
        "axiom1_ok": report.axiom1_ok,
        "axiom2_failures": [list(f) for f in report.axiom2_failures],
        "axiom3_failures": list(report.axiom3_failures),
        "untested": list(report.untested),
        "rows": rows,
    }


def factorial_payload(
    set_name: str, values: Sequence[tuple[int, FactoredNat]], digit_cap: int = DEFAULT_DIGIT_CAP
) -> dict[str, Any]:
    rows = []
    for n, value in values:
        try:
            integer: str | None = str(value.to_integer(max_digits=digit_cap))
        except RenderLimitError:
            integer = None
        rows.append({"n": n, "factored": value.to_json(), "value": integer,
                     "rendered": value.render()})
    return {"columns": ["n", "factored", "value"], "set": set_name, "rows": rows}


def factorial_line(set_name: str, row: dict[str, Any]) -> str:
    """``5!_P = 2^7 · 3^2 · 5 = 5760``."""
    head = f"{row['n']}!_{set_name} = {row['rendered']}"
    if row["value"] is None:
        return f"{head} (integer form above the digit cap)"
    if row["value"] == row["rendered"]:
        return head
    return f"{head} = {row['value']}"


def apery_table_payload(rows: Sequence[AperyRow]) -> dict[str, Any]:
    return {
        "columns": ["n", "A", "B", "e", "x", "y"],
        "rows": [
            {"n": r.n, "A": str(r.a), "B": format_rational(r.b), "e": str(r.e),
             "x": str(r.x), "y": str(r.y)}
            for r in rows
        ],
    }


def delta_payload(deltas: Sequence[DeltaRow]) -> dict[str, Any]:
    return {
        "columns": ["n", "delta", "sign"],
        "index_origin": 0,
        "rows": [{"n": d.n, "delta": format_rational(d.delta), "sign": d.sign.value} for d in deltas],
    }


def run_payload(report: RunReport) -> dict[str, Any]:
    return {
        "columns": ["n", "sign"],
        "index_origin": 0,
        "n_max": report.n_max,
        "counts": report.counts,
        "runs": [list(r) for r in report.runs],
        "longest_run": report.longest_run,
        "first_run_start": list(report.first_run_start),
        "negative_fraction": format_rational(report.negative_fraction),
        "rows": [{"n": n, "sign": s.value} for n, s in enumerate(report.signs)],
    }


def preconditions_payload(report: BrunReport) -> dict[str, Any]:
    return {
        "columns": ["check", "n"],
        "n_max": report.n_max,
        "passed": report.passed,
        "y0_zero": report.y0_zero,
        "rows": [{"check": check, "n": n} for check, n in report.failures],
    }


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return "*".join(str(v) for v in value) if value else "1"
    return str(value)


def _decimal(text: str, digits: int) -> str:
    num, _, den = text.partition("/")
    with mpmath.workdps(digits + 10):
        return mpmath.nstr(mpmath.mpf(int(num)) / int(den or 1), digits)


TEXT_TEMPLATE = """{{ title }}
{% for line in summary %}{{ line }}
{% endfor %}{% if table %}
{% for line in table %}{{ line }}
{% endfor %}{% endif %}"""


class ReportGenerator:
    """Serialize report envelopes; identical envelopes give identical bytes."""

    def __init__(self, config: ReportConfig | None = None):
        self.config = config or ReportConfig()
        self._template = Environment(loader=BaseLoader(), keep_trailing_newline=True).from_string(
            TEXT_TEMPLATE
        )

    def emit(self, envelope: ReportEnvelope, fmt: str) -> bytes:
        if fmt == "json":
            return self._generate_json(envelope)
        if fmt == "csv":
            return self._generate_csv(envelope)
        if fmt == "text":
            return self._generate_text(envelope)
        raise ValueError(f"unknown report format: {fmt}")

    def write(self, envelope: ReportEnvelope, fmt: str, out: Path | None) -> None:
        """Write to ``out``, or to stdout when no path is given."""
        data = self.emit(envelope, fmt)
        if out is None:
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
            return
        out.write_bytes(data)
        console.print(f"[green]{fmt.upper()} report: {out}[/green]")

    def _generate_json(self, envelope: ReportEnvelope) -> bytes:
        return (json.dumps(envelope.to_dict(), indent=2, sort_keys=True) + "\n").encode()

    def _generate_csv(self, envelope: ReportEnvelope) -> bytes:
        buffer = io.StringIO()
        columns = envelope.payload["columns"]
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in envelope.payload["rows"]:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buffer.getvalue().encode()

    def _generate_text(self, envelope: ReportEnvelope) -> bytes:
        if envelope.payload_type == "factorial":
            lines = [factorial_line(envelope.payload["set"], row) for row in envelope.payload["rows"]]
            return "".join(f"{line}\n" for line in [*envelope.summary_lines, *lines]).encode()
        summary = list(envelope.summary_lines)
        summary.append(f"status: {envelope.summary_status.value}")
        if envelope.run is not None:
            summary.append(f"generated: {envelope.run['timestamp']} ({envelope.run['wall_time']:.3f}s)")
        table = self._text_table(envelope.payload)
        text = self._template.render(
            title=envelope.title or f"{envelope.tool} {envelope.payload_type}",
            summary=summary,
            table=table,
        )
        return text.encode()

    def _text_table(self, payload: dict[str, Any]) -> list[str]:
        columns = payload["columns"]
        body = []
        for row in payload["rows"]:
            cells = []
            for c in columns:
                cell = _cell(row.get(c))
                if c in ("B", "delta") and "/" in cell:
                    cell = f"{cell} ≈ {_decimal(cell, self.config.decimal_digits)}"
                cells.append(cell)
            body.append(cells)
        if not body:
            return []
        widths = [max(len(c), *(len(r[i]) for r in body)) for i, c in enumerate(columns)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths, strict=True)).rstrip()]
        lines.append("  ".join("-" * w for w in widths))
        lines.extend(
            "  ".join(cell.ljust(w) for cell, w in zip(r, widths, strict=True)).rstrip() for r in body
        )
        return lines

    def print_summary(self, envelope: ReportEnvelope) -> None:
        """Print a summary table to the diagnostic stream."""
        table = Table(title=envelope.title or "Run Summary")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", style="green")

        table.add_row("Payload", envelope.payload_type)
        for key, value in sorted(envelope.payload.get("counts", {}).items()):
            table.add_row(key.capitalize(), str(value))
        table.add_row("Rows", str(len(envelope.payload["rows"])))
        table.add_row("Status", envelope.summary_status.value)
        table.add_row("Exit code", str(envelope.exit_code))
        if envelope.run is not None:
            table.add_row("Wall time", f"{envelope.run['wall_time']:.3f}s")

        console.print(table)


def decimal_approximation(value: Fraction, digits: int = 15) -> str:
    return _decimal(format_rational(value), digits)


def create_report_generator(config: dict) -> ReportGenerator:
    """Create a report generator from the ``reports`` configuration section."""
    report_config = ReportConfig(
        digit_cap=int_setting("reports", config, "digit_cap", DEFAULT_DIGIT_CAP),
        decimal_digits=int_setting("reports", config, "decimal_digits", 15),
    )
    return ReportGenerator(report_config)
