"""Verification harness for the constellation-factorial and prime-inequality conjectures."""

from __future__ import annotations

import time
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn

from .bhargava import DEFAULT_POLICY, TruncationPolicy, TruncationUnstableError, set_factorial_detail
from .exactmath import DivisibilityViolation, DomainError, FactoredNat, factored_div_exact, vp
from .parallel import ordered_map
from .primes import ConstellationKind, prime_list

console = Console(stderr=True)


class ConjectureId(Enum):
    C1 = "c1"  # n!_P2 / n!_P = 2 w_2(n)
    C2 = "c2"  # n!_P3 / n!_P = 3! w_2(n) w_3(n) (even), 2 (odd)
    C3 = "c3"  # n!_P4 / n!_P2 = 3 w_3(n) (even), 1 (odd)
    C4 = "c4"  # p_n >= p_k + p_{n-k-1}

    @property
    def first_n(self) -> int:
        return 2 if self is ConjectureId.C4 else 1


class CheckStatus(Enum):
    """Per-item verdicts, ordered by severity."""

    VERIFIED = "verified"
    INCONCLUSIVE = "inconclusive"
    VIOLATED = "violated"

    @property
    def severity(self) -> int:
        return _SEVERITY[self]


_SEVERITY = {CheckStatus.VERIFIED: 0, CheckStatus.INCONCLUSIVE: 1, CheckStatus.VIOLATED: 2}


class ViolationKind(Enum):
    VALUE = "value"  # the ratio exists but differs from the conjectured value
    DIVISIBILITY = "divisibility"  # the ratio is not even an integer
    INEQUALITY = "inequality"


class P0Convention(Enum):
    ONE = "one"  # p_0 = 1
    SKIP = "skip"  # k runs to n-2 only


def worst_status(statuses: Iterable[CheckStatus]) -> CheckStatus:
    return max(statuses, key=lambda s: s.severity, default=CheckStatus.VERIFIED)


@dataclass
class CheckResult:
    """Verdict of one conjecture at one n."""

    conjecture: ConjectureId
    n: int
    status: CheckStatus
    witness: FactoredNat | tuple[int, int] | None = None
    expected: FactoredNat | None = None
    violation: ViolationKind | None = None
    branch: str | None = None
    truncation: dict[str, int] = field(default_factory=dict)
    tightest_k: int | None = None
    slack: int | None = None
    equality_ks: tuple[int, ...] = ()
    detail: str = ""


@dataclass
class ScanReport:
    """Aggregated verdicts over [n_lo, n_hi], ordered by n."""

    conjecture: ConjectureId
    n_lo: int
    n_hi: int
    results: list[CheckResult] = field(default_factory=list)
    equality_witnesses: list[tuple[int, int]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def counts(self) -> dict[str, int]:
        counts = {status.value: 0 for status in CheckStatus}
        for r in self.results:
            counts[r.status.value] += 1
        return counts

    @property
    def non_verified(self) -> list[CheckResult]:
        return [r for r in self.results if r.status is not CheckStatus.VERIFIED]

    @property
    def summary_status(self) -> CheckStatus:
        return worst_status(r.status for r in self.results)


# Ratio conjectures: (numerator set, denominator set, conjectured ratio)
def _c1_expected(n: int) -> tuple[FactoredNat, str | None]:
    return FactoredNat.from_exponents({2: 1 + vp(n, 2)}), None


def _c2_expected(n: int) -> tuple[FactoredNat, str]:
    if n % 2 == 0:
        return FactoredNat.from_exponents({2: 1 + vp(n, 2), 3: 1 + vp(n, 3)}), "even"
    return FactoredNat.from_exponents({2: 1}), "odd"


def _c3_expected(n: int) -> tuple[FactoredNat, str]:
    if n % 2 == 0:
        return FactoredNat.from_exponents({3: 1 + vp(n, 3)}), "even"
    return FactoredNat(), "odd"


_RATIO_CONJECTURES = {
    ConjectureId.C1: (ConstellationKind.P2, ConstellationKind.P, _c1_expected),
    ConjectureId.C2: (ConstellationKind.P3, ConstellationKind.P, _c2_expected),
    ConjectureId.C3: (ConstellationKind.P4, ConstellationKind.P2, _c3_expected),
}


def _check_ratio(conjecture: ConjectureId, n: int, policy: TruncationPolicy) -> CheckResult:
    if n < 1:
        raise DomainError(f"{conjecture.value} needs n >= 1, got {n}")
    top_kind, bottom_kind, expected_of = _RATIO_CONJECTURES[conjecture]
    expected, branch = expected_of(n)
    result = CheckResult(conjecture, n, CheckStatus.INCONCLUSIVE, expected=expected, branch=branch)
    try:
        top = set_factorial_detail(top_kind, n, policy)
        bottom = set_factorial_detail(bottom_kind, n, policy)
    except TruncationUnstableError as e:
        result.detail = f"truncation cap: {e}"
        result.truncation = {e.kind.value: e.truncation}
        return result
    result.truncation = {top_kind.value: top.truncation_used, bottom_kind.value: bottom.truncation_used}

    try:
        ratio = factored_div_exact(top.value, bottom.value)
    except DivisibilityViolation as e:
        result.status = CheckStatus.VIOLATED
        result.violation = ViolationKind.DIVISIBILITY
        result.detail = f"{n}!_{bottom_kind.value} does not divide {n}!_{top_kind.value} at p={e.prime}"
        console.print(f"[bold red]{conjecture.value} n={n}: {result.detail}[/bold red]")
        return result

    result.witness = ratio
    if ratio == expected:
        result.status = CheckStatus.VERIFIED
    else:
        result.status = CheckStatus.VIOLATED
        result.violation = ViolationKind.VALUE
        result.detail = f"ratio {ratio.render()} != {expected.render()}"
        console.print(f"[red]{conjecture.value} n={n}: {result.detail}[/red]")
    return result


def check_c1(n: int, policy: TruncationPolicy = DEFAULT_POLICY) -> CheckResult:
    return _check_ratio(ConjectureId.C1, n, policy)


def check_c2(n: int, policy: TruncationPolicy = DEFAULT_POLICY) -> CheckResult:
    return _check_ratio(ConjectureId.C2, n, policy)


def check_c3(n: int, policy: TruncationPolicy = DEFAULT_POLICY) -> CheckResult:
    return _check_ratio(ConjectureId.C3, n, policy)


def _prime_array(n_hi: int, p0: P0Convention) -> np.ndarray:
    """Index i holds p_i; index 0 holds 1 under the ``one`` convention, else 0 (unused)."""
    head = 1 if p0 is P0Convention.ONE else 0
    return np.array([head, *prime_list(n_hi)], dtype=np.int64)


def _c4_at(n: int, primes: np.ndarray, p0: P0Convention) -> CheckResult:
    k_max = n - 1 if p0 is P0Convention.ONE else n - 2
    result = CheckResult(ConjectureId.C4, n, CheckStatus.VERIFIED)
    if k_max < 1:
        result.detail = "empty k range"
        return result
    ks = np.arange(1, k_max + 1)
    slack = primes[n] - primes[ks] - primes[n - ks - 1]
    tight = int(np.argmin(slack))
    result.tightest_k = int(ks[tight])
    result.slack = int(slack[tight])
    result.equality_ks = tuple(int(k) for k in ks[slack == 0])
    if result.slack < 0:
        k = result.tightest_k
        result.status = CheckStatus.VIOLATED
        result.violation = ViolationKind.INEQUALITY
        result.witness = (n, k)
        result.detail = f"p_{n}={primes[n]} < p_{k}+p_{n - k - 1}={primes[k] + primes[n - k - 1]}"
        console.print(f"[bold red]c4: {result.detail}[/bold red]")
    return result


def check_c4(n: int, p0: P0Convention = P0Convention.ONE) -> CheckResult:
    """p_n >= p_k + p_{n-k-1} for every admissible k."""
    if n < 2:
        raise DomainError(f"c4 needs n >= 2, got {n}")
    return _c4_at(n, _prime_array(n, p0), p0)


def _ratio_worker(args: tuple[ConjectureId, int, TruncationPolicy]) -> CheckResult:
    conjecture, n, policy = args
    return _check_ratio(conjecture, n, policy)


def scan(
    conjecture: ConjectureId,
    n_lo: int,
    n_hi: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
    p0: P0Convention = P0Convention.ONE,
    jobs: int = 1,
    show_progress: bool = False,
) -> ScanReport:
    """Check every n in [n_lo, n_hi]; results are ordered by n whatever the evaluation order."""
    conjecture = ConjectureId(conjecture)
    if n_lo < conjecture.first_n or n_hi < n_lo - 1:
        raise DomainError(f"invalid range [{n_lo}, {n_hi}] for {conjecture.value}")
    started = time.perf_counter()
    report = ScanReport(conjecture, n_lo, n_hi)
    ns = range(n_lo, n_hi + 1)

    if conjecture is ConjectureId.C4:
        primes = _prime_array(max(n_hi, 2), p0)
        report.results = [_c4_at(n, primes, p0) for n in ns]
        report.equality_witnesses = [(r.n, k) for r in report.results for k in r.equality_ks]
    elif jobs > 1 or not show_progress:
        report.results = ordered_map(_ratio_worker, [(conjecture, n, policy) for n in ns], jobs)
    else:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            task = progress.add_task(f"Checking {conjecture.value}...", total=len(ns))
            for n in ns:
                report.results.append(_check_ratio(conjecture, n, policy))
                progress.update(task, advance=1, description=f"Checking {conjecture.value} n={n}")

    report.results.sort(key=lambda r: r.n)
    report.wall_time = time.perf_counter() - started
    counts = report.counts
    console.print(
        f"[dim]{conjecture.value} [{n_lo}, {n_hi}]: {counts['verified']} verified, "
        f"{counts['violated']} violated, {counts['inconclusive']} inconclusive[/dim]"
    )
    return report
