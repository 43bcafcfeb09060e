"""Command-line entry point for numconj."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, NoReturn

import jsonschema
import yaml
from deepdiff import DeepDiff
from rich.console import Console

from . import __version__
from .utils.apery import (
    FLOAT_CHECK_MIN_DPS,
    apery_rows,
    brun_preconditions,
    cross_check_signs,
    delta_rows,
    negative_run_scan,
)
from .utils.bhargava import (
    TruncationPolicy,
    TruncationUnstableError,
    axioms_check,
    classical_factorial,
    create_truncation_policy,
    pointwise_product,
    prime_factorial_closed,
    prime_power_factorial,
    set_factorial,
)
from .utils.conjectures import CheckStatus, ConjectureId, P0Convention, scan
from .utils.exactmath import (
    DomainError,
    InvariantViolation,
    NumconjError,
    UsageError,
    int_setting,
    legendre_factorial,
)
from .utils.primes import ConstellationKind
from .utils.report_generator import (
    EXIT_CODES,
    ReportEnvelope,
    ReportGenerator,
    apery_table_payload,
    axiom_payload,
    create_report_generator,
    delta_payload,
    factorial_payload,
    load_report,
    preconditions_payload,
    run_payload,
    scan_payload,
)

console = Console(stderr=True)

DEFAULT_CONFIG = Path("config/verification.yaml")
USAGE_EXIT = 3

AXIOM_PROVIDERS = ("prime-closed", "pfact", "classical", "product")


def load_config(config_path: Path | None) -> dict:
    """Load configuration from YAML; the default file is optional, an explicit one is not."""
    path = config_path or DEFAULT_CONFIG
    if not path.exists():
        if config_path is not None:
            raise UsageError(f"Config file not found: {config_path}")
        return {}
    with open(path) as f:
        try:
            config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise UsageError(f"Invalid config {path}: {e}") from e
    if not isinstance(config, dict):
        raise UsageError(f"Config {path} must be a mapping of sections")
    return config


def config_section(config: dict, name: str) -> dict:
    section = config.get(name) or {}
    if not isinstance(section, dict):
        raise UsageError(f"Config section {name!r} must be a mapping")
    return section


@dataclass
class RunConfig:
    """Everything needed to reproduce one run; embedded verbatim in its report."""

    subcommand: str
    action: str | None = None
    set_kind: str | None = None
    n: int | None = None
    table: bool = False
    closed_form: bool = False
    n_lo: int | None = None
    n_hi: int | None = None
    p0: str = P0Convention.ONE.value
    which: str | None = None
    n_max: int | None = None
    cross_check: bool = False
    float_check_min_dps: int = FLOAT_CHECK_MIN_DPS
    window: int = 64
    initial_factor: int = TruncationPolicy.initial_factor
    max_members: int = TruncationPolicy.max_members
    doublings_required: int = TruncationPolicy.doublings_required
    sieve_ceiling: int = TruncationPolicy.sieve_ceiling
    format: str = "json"
    jobs: int = 1
    out: str | None = None
    reproducible: bool = False

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(
            initial_factor=self.initial_factor,
            max_members=self.max_members,
            doublings_required=self.doublings_required,
            sieve_ceiling=self.sieve_ceiling,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"Unknown config keys in report: {', '.join(unknown)}")
        return cls(**data)


class NumconjArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports bad usage as ``UsageError`` instead of exiting."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _natural(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from e
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def build_parser() -> NumconjArgumentParser:
    common = NumconjArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json", help="Report format")
    common.add_argument("--truncate-cap", type=_positive, default=None, help="Maximum truncation size M")
    common.add_argument("--jobs", type=_positive, default=1, help="Worker processes")
    common.add_argument("--out", type=Path, default=None, help="Write the report here instead of stdout")
    common.add_argument("--config", type=Path, default=None, help=f"Configuration file (default {DEFAULT_CONFIG})")
    common.add_argument(
        "--reproducible",
        action="store_true",
        help="Omit timestamp and wall time so repeated runs are byte-identical",
    )

    parser = NumconjArgumentParser(
        prog="numconj",
        description="Generalized factorials, prime-constellation conjectures and Apery sequences",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=NumconjArgumentParser)

    factorial = sub.add_parser("factorial", parents=[common], help="Compute n!_X")
    factorial.add_argument("--set", dest="set_kind", required=True, choices=[k.value for k in ConstellationKind])
    factorial.add_argument("--n", type=_natural, required=True)
    factorial.add_argument("--closed-form", action="store_true", help="Use the closed form (nat and P only)")
    factorial.add_argument("--table", action="store_true", help="Emit 0!_X through n!_X")

    conjecture = sub.add_parser("conjecture", parents=[common], help="Scan a conjecture over a range of n")
    conjecture.add_argument("action", choices=[c.value for c in ConjectureId])
    conjecture.add_argument("--from", dest="n_lo", type=_natural, required=True)
    conjecture.add_argument("--to", dest="n_hi", type=_natural, required=True)
    conjecture.add_argument("--p0", choices=[c.value for c in P0Convention], default=None)

    apery = sub.add_parser("apery", parents=[common], help="Apery rows, delta_n and their signs")
    apery.add_argument("action", choices=["table", "delta", "runs", "preconditions"])
    apery.add_argument("--nmax", dest="n_max", type=_natural, required=True)
    apery.add_argument(
        "--cross-check",
        action="store_true",
        help="With 'runs', also compare exact signs against high-precision floats",
    )

    axioms = sub.add_parser("axioms", parents=[common], help="Check the abstract factorial axioms")
    axioms.add_argument("--which", choices=AXIOM_PROVIDERS, required=True)
    axioms.add_argument("--nmax", dest="n_max", type=_natural, required=True)

    rerun = sub.add_parser("rerun", parents=[common], help="Re-execute a JSON report and diff the payload")
    rerun.add_argument("--report", type=Path, required=True)

    return parser


def build_run_config(args: argparse.Namespace, config: dict) -> RunConfig:
    """Merge YAML defaults with command-line flags."""
    truncation = create_truncation_policy(config_section(config, "truncation"))
    apery_config = config_section(config, "apery")
    run = RunConfig(
        subcommand=args.subcommand,
        action=getattr(args, "action", None),
        set_kind=getattr(args, "set_kind", None),
        n=getattr(args, "n", None),
        table=getattr(args, "table", False),
        closed_form=getattr(args, "closed_form", False),
        n_lo=getattr(args, "n_lo", None),
        n_hi=getattr(args, "n_hi", None),
        p0=getattr(args, "p0", None) or config_section(config, "conjectures").get("p0_convention", "one"),
        which=getattr(args, "which", None),
        n_max=getattr(args, "n_max", None),
        cross_check=getattr(args, "cross_check", False),
        float_check_min_dps=int_setting("apery", apery_config, "float_check_min_dps", FLOAT_CHECK_MIN_DPS),
        window=int_setting("apery", apery_config, "window", 64),
        initial_factor=truncation.initial_factor,
        max_members=args.truncate_cap or truncation.max_members,
        doublings_required=truncation.doublings_required,
        sieve_ceiling=truncation.sieve_ceiling,
        format=args.format,
        jobs=args.jobs,
        out=str(args.out) if args.out else None,
        reproducible=args.reproducible,
    )
    try:
        P0Convention(run.p0)
    except ValueError as e:
        raise UsageError(f"Unknown p0 convention: {run.p0!r}") from e
    return run


def _envelope(run: RunConfig, payload_type: str, payload: dict, status: CheckStatus, **extra: Any) -> ReportEnvelope:
    return ReportEnvelope(
        version=__version__,
        config=run.to_dict(),
        payload_type=payload_type,
        payload=payload,
        summary_status=status,
        **extra,
    )


def _run_factorial(run: RunConfig, digit_cap: int) -> ReportEnvelope:
    kind = ConstellationKind.parse(run.set_kind)
    assert run.n is not None
    if run.closed_form and kind is ConstellationKind.P:
        compute = prime_factorial_closed
    elif run.closed_form and kind is ConstellationKind.NATURALS:
        compute = legendre_factorial
    elif run.closed_form:
        raise UsageError(f"No closed form for {kind.value}; drop --closed-form")
    else:
        policy = run.policy

        def compute(n: int):
            return set_factorial(kind, n, policy)

    ns = range(run.n + 1) if run.table else [run.n]
    values = []
    try:
        for n in ns:
            values.append((n, compute(n)))
    except TruncationUnstableError as e:
        console.print(f"[yellow]{e}[/yellow]")
        return _envelope(
            run, "factorial", factorial_payload(kind.value, values, digit_cap),
            CheckStatus.INCONCLUSIVE, summary_lines=[f"inconclusive: {e}"],
        )
    return _envelope(run, "factorial", factorial_payload(kind.value, values, digit_cap), CheckStatus.VERIFIED)


def _run_conjecture(run: RunConfig) -> ReportEnvelope:
    assert run.n_lo is not None and run.n_hi is not None
    conjecture = ConjectureId(run.action)
    report = scan(
        conjecture, run.n_lo, run.n_hi, run.policy, P0Convention(run.p0), jobs=run.jobs, show_progress=True
    )
    counts = report.counts
    return _envelope(
        run, "scan", scan_payload(report), report.summary_status,
        title=f"{conjecture.value} scan [{run.n_lo}, {run.n_hi}]",
        summary_lines=[f"{status}: {count}" for status, count in counts.items()],
    )


def _run_apery(run: RunConfig) -> ReportEnvelope:
    assert run.n_max is not None
    title = f"apery {run.action} n<={run.n_max}"
    try:
        if run.action == "table":
            return _envelope(run, "apery_table", apery_table_payload(apery_rows(run.n_max)),
                             CheckStatus.VERIFIED, title=title)
        if run.action == "delta":
            if run.n_max < 2:
                raise DomainError(f"delta needs --nmax >= 2, got {run.n_max}")
            return _envelope(run, "delta", delta_payload(delta_rows(apery_rows(run.n_max))),
                             CheckStatus.VERIFIED, title=title,
                             summary_lines=["delta index starts at n=0"])
        if run.action == "runs":
            report = negative_run_scan(run.n_max, jobs=run.jobs, window=run.window)
            payload = run_payload(report)
            status = CheckStatus.VERIFIED
            lines = [f"longest negative run: {report.longest_run}"]
            if run.cross_check:
                disagreements = cross_check_signs(run.n_max, run.float_check_min_dps)
                payload["float_disagreements"] = disagreements
                if disagreements:
                    status = CheckStatus.VIOLATED
                lines.append(f"float sign disagreements: {len(disagreements)}")
            return _envelope(run, "runs", payload, status, title=title, summary_lines=lines)
        report_b = brun_preconditions(run.n_max)
        status = CheckStatus.VERIFIED if report_b.passed else CheckStatus.VIOLATED
        return _envelope(run, "preconditions", preconditions_payload(report_b), status, title=title,
                         summary_lines=[f"y_0 = 0: {report_b.y0_zero}"])
    except InvariantViolation as e:
        console.print(f"[bold red]{e}[/bold red]")
        return _envelope(run, "apery_table", {"columns": [], "rows": [], "error": str(e)},
                         CheckStatus.VIOLATED, title=title, summary_lines=[str(e)])


def _axiom_provider(which: str):
    if which == "prime-closed":
        return prime_factorial_closed
    if which == "pfact":
        return prime_power_factorial
    if which == "classical":
        return classical_factorial
    return pointwise_product(prime_factorial_closed, prime_power_factorial)


def _run_axioms(run: RunConfig) -> ReportEnvelope:
    assert run.n_max is not None and run.which is not None
    report = axioms_check(_axiom_provider(run.which), run.n_max, name=run.which)
    if not report.passed:
        status = CheckStatus.VIOLATED
    elif report.untested:
        status = CheckStatus.INCONCLUSIVE
    else:
        status = CheckStatus.VERIFIED
    return _envelope(run, "axioms", axiom_payload(report), status, title=f"axioms {run.which} n<={run.n_max}")


def execute(run: RunConfig, generator: ReportGenerator) -> ReportEnvelope:
    """Run the computation a config describes and wrap it in an envelope."""
    started = time.perf_counter()
    if run.subcommand == "factorial":
        envelope = _run_factorial(run, generator.config.digit_cap)
    elif run.subcommand == "conjecture":
        envelope = _run_conjecture(run)
    elif run.subcommand == "apery":
        envelope = _run_apery(run)
    elif run.subcommand == "axioms":
        envelope = _run_axioms(run)
    else:
        raise UsageError(f"Cannot execute subcommand {run.subcommand!r}")
    if not run.reproducible:
        envelope.run = {
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_time": round(time.perf_counter() - started, 6),
        }
    return envelope


def rerun(report_path: Path, args: argparse.Namespace, generator: ReportGenerator) -> ReportEnvelope:
    """Re-execute the config stored in a JSON report and compare payloads."""
    try:
        stored = load_report(report_path.read_text())
    except OSError as e:
        raise UsageError(f"Cannot read report {report_path}: {e}") from e
    except ValueError as e:
        raise UsageError(f"Invalid report {report_path}: {e}") from e
    except jsonschema.ValidationError as e:
        raise UsageError(f"Report {report_path} does not match the envelope schema: {e.message}") from e

    run = RunConfig.from_dict(stored["config"])
    run.jobs = args.jobs
    run.reproducible = args.reproducible
    envelope = execute(run, generator)

    fresh = json.loads(json.dumps(envelope.payload))
    diff = DeepDiff(stored["payload"], fresh)
    if diff:
        console.print(f"[red]Payload differs from {report_path}:[/red]")
        console.print(diff.pretty())
        envelope.summary_status = CheckStatus.VIOLATED
    else:
        console.print(f"[green]Payload reproduces {report_path}[/green]")
        envelope.summary_status = CheckStatus.VERIFIED
    envelope.summary_lines.append(f"rerun of {report_path}: {'identical' if not diff else 'differs'}")
    return envelope


def dispatch(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run, emit the report and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args.config)
        generator = create_report_generator(config_section(config, "reports"))
        if args.subcommand == "rerun":
            envelope = rerun(args.report, args, generator)
        else:
            envelope = execute(build_run_config(args, config), generator)
    except (UsageError, DomainError) as e:
        console.print(f"[red]Error: {e}[/red]")
        return USAGE_EXIT
    except NumconjError as e:
        console.print(f"[bold red]{e}[/bold red]")
        return EXIT_CODES[CheckStatus.VIOLATED]

    try:
        generator.write(envelope, args.format, args.out)
    except OSError as e:
        console.print(f"[red]Cannot write report: {e}[/red]")
        return USAGE_EXIT

    generator.print_summary(envelope)
    return envelope.exit_code


def main() -> int:
    """Main entry point for the numconj command."""
    return dispatch()


if __name__ == "__main__":
    sys.exit(main())
