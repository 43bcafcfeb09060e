"""Apery sequences, Brun's criterion sequences and the second difference quotient delta_n."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import mpmath
from rich.console import Console

from .exactmath import DomainError, InvariantViolation, lcm_upto
from .parallel import ordered_map

console = Console(stderr=True)

FLOAT_CHECK_MIN_DPS = 200


class Sign(Enum):
    NEG = "neg"
    ZERO = "zero"
    POS = "pos"

    @classmethod
    def of(cls, value: Fraction | int) -> Sign:
        if value < 0:
            return cls.NEG
        return cls.POS if value > 0 else cls.ZERO


@dataclass(frozen=True)
class AperyRow:
    """n, A_n, B_n, e_n and Brun's x_n = e_n A_n, y_n = e_n B_n."""

    n: int
    a: int
    b: Fraction
    e: int
    x: int
    y: int


@dataclass(frozen=True)
class DeltaRow:
    n: int
    delta: Fraction
    sign: Sign


@dataclass
class BrunReport:
    """Brun-criterion preconditions over rows 0..n_max."""

    n_max: int
    failures: list[tuple[str, int]] = field(default_factory=list)
    y0_zero: bool = False

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class RunReport:
    """Signs of delta_0..delta_{n_max-2} and maximal runs of negative values."""

    n_max: int
    counts: dict[str, int]
    runs: list[tuple[int, int]]
    first_run_start: list[int]
    signs: list[Sign] = field(default_factory=list)

    @property
    def longest_run(self) -> int:
        return self.runs[0][1] if self.runs else 0

    @property
    def negative_fraction(self) -> Fraction:
        total = sum(self.counts.values())
        return Fraction(self.counts[Sign.NEG.value], total) if total else Fraction(0)


def apery_polynomial(n: int) -> int:
    """P(n) = 34n^3 + 51n^2 + 27n + 5."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return ((34 * n + 51) * n + 27) * n + 5


def apery_rows(n_max: int) -> list[AperyRow]:
    """Rows 0..n_max with exact integrality checks on A_n and y_n."""
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    a: list[int] = [1, 5]
    b: list[Fraction] = [Fraction(0), Fraction(6)]
    for m in range(1, n_max):
        cube = (m + 1) ** 3
        numerator = apery_polynomial(m) * a[m] - m**3 * a[m - 1]
        if numerator % cube:
            raise InvariantViolation(m + 1, f"A-recurrence numerator not divisible by {cube}")
        a.append(numerator // cube)
        b.append((apery_polynomial(m) * b[m] - m**3 * b[m - 1]) / cube)

    rows = []
    lcm = 1
    for n in range(n_max + 1):
        if n:
            lcm = math.lcm(lcm, n)
        e = 2 * lcm**3
        y = e * b[n]
        if y.denominator != 1:
            raise InvariantViolation(n, f"e_n B_n = {y} is not an integer")
        rows.append(AperyRow(n=n, a=a[n], b=b[n], e=e, x=e * a[n], y=y.numerator))
    return rows


def weight(n: int) -> int:
    """e_n = 2 lcm{1..n}^3."""
    return 2 * lcm_upto(n) ** 3


def _quotient(rows: Sequence[AperyRow], n: int) -> Fraction:
    dx = rows[n + 1].x - rows[n].x
    if dx == 0:
        raise ZeroDivisionError(f"x_{n + 1} = x_{n}")
    return Fraction(rows[n + 1].y - rows[n].y, dx)


def delta(n: int, rows: Sequence[AperyRow]) -> DeltaRow:
    """delta_n = Dy_{n+1}/Dx_{n+1} - Dy_n/Dx_n, straight from the raw rows."""
    if n < 0 or len(rows) < n + 3:
        raise DomainError(f"delta_{n} needs rows through {n + 2}")
    value = _quotient(rows, n + 1) - _quotient(rows, n)
    return DeltaRow(n, value, Sign.of(value))


def delta_rows(rows: Sequence[AperyRow]) -> list[DeltaRow]:
    """All computable delta_n, reusing each difference quotient once."""
    quotients = [_quotient(rows, n) for n in range(len(rows) - 1)]
    out = []
    for n in range(len(quotients) - 1):
        value = quotients[n + 1] - quotients[n]
        out.append(DeltaRow(n, value, Sign.of(value)))
    return out


def zeta3_estimate(n: int, rows: Sequence[AperyRow] | None = None) -> Fraction:
    """B_n / A_n."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rows = rows if rows is not None and len(rows) > n else apery_rows(n)
    return rows[n].b / rows[n].a


def brun_preconditions(n_max: int, rows: Sequence[AperyRow] | None = None) -> BrunReport:
    """Check x_n increasing positive integers, y_n > 0 for n >= 1, y_n/x_n increasing."""
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    rows = list(rows) if rows is not None else apery_rows(n_max)
    report = BrunReport(n_max=n_max, y0_zero=rows[0].y == 0)
    for row in rows[: n_max + 1]:
        if row.x <= 0:
            report.failures.append(("x_positive", row.n))
        if row.n >= 1 and row.y <= 0:
            report.failures.append(("y_positive", row.n))
    for lo, hi in zip(rows[:n_max], rows[1 : n_max + 1], strict=True):
        if hi.x <= lo.x:
            report.failures.append(("x_increasing", lo.n))
        if Fraction(hi.y, hi.x) <= Fraction(lo.y, lo.x):
            report.failures.append(("ratio_increasing", lo.n))
    for check, n in report.failures:
        console.print(f"[red]brun precondition {check} fails at n={n}[/red]")
    return report


def _sign_window(window: tuple[list[int], list[int]]) -> list[Sign]:
    xs, ys = window
    quotients = [Fraction(ys[i + 1] - ys[i], xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
    return [Sign.of(quotients[i + 1] - quotients[i]) for i in range(len(quotients) - 1)]


def negative_runs(signs: Sequence[Sign]) -> list[tuple[int, int]]:
    """Maximal runs (start, length) of NEG, longest first, then by start."""
    runs, start = [], None
    for i, s in enumerate([*signs, Sign.ZERO]):
        if s is Sign.NEG and start is None:
            start = i
        elif s is not Sign.NEG and start is not None:
            runs.append((start, i - start))
            start = None
    return sorted(runs, key=lambda r: (-r[1], r[0]))


def negative_run_scan(n_max: int, jobs: int = 1, window: int = 64) -> RunReport:
    """Exact signs of delta_0..delta_{n_max-2} and the negative-run table."""
    if n_max < 3:
        raise DomainError(f"n_max must be >= 3, got {n_max}")
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    rows = apery_rows(n_max)
    xs = [r.x for r in rows]
    ys = [r.y for r in rows]
    count = n_max - 1
    # windows overlap by two rows so every delta is computed exactly once
    windows = [
        (xs[lo : min(lo + window, count) + 2], ys[lo : min(lo + window, count) + 2])
        for lo in range(0, count, window)
    ]
    signs = [s for chunk in ordered_map(_sign_window, windows, jobs) for s in chunk]
    counts = {s.value: 0 for s in Sign}
    for s in signs:
        counts[s.value] += 1
    runs = negative_runs(signs)
    longest = runs[0][1] if runs else 0
    first_run_start = [
        min(start for start, length in runs if length >= size + 1) for size in range(longest)
    ]
    console.print(
        f"[dim]delta signs n<={count - 1}: {counts['neg']} neg, {counts['zero']} zero, "
        f"{counts['pos']} pos; longest negative run {longest}[/dim]"
    )
    return RunReport(n_max, counts, runs, first_run_start, signs)


def float_dps_for(n: int, dps: int = FLOAT_CHECK_MIN_DPS) -> int:
    """Working precision for delta_n; |delta_n| shrinks roughly like 10^(-3n)."""
    return max(dps, 4 * n + 50)


def delta_sign_float(n: int, rows: Sequence[AperyRow], dps: int = FLOAT_CHECK_MIN_DPS) -> Sign | None:
    """Sign of delta_n in mpmath floating point; None when below the working precision."""
    with mpmath.workdps(float_dps_for(n, dps)):
        x = [mpmath.mpf(rows[i].x) for i in range(n, n + 3)]
        y = [mpmath.mpf(rows[i].y) for i in range(n, n + 3)]
        q0 = (y[1] - y[0]) / (x[1] - x[0])
        q1 = (y[2] - y[1]) / (x[2] - x[1])
        value = q1 - q0
        if value == 0 or abs(value) < mpmath.mpf(10) ** (-(mpmath.mp.dps - 10)):
            return None
        return Sign.NEG if value < 0 else Sign.POS


def cross_check_signs(n_max: int, dps: int = FLOAT_CHECK_MIN_DPS) -> list[int]:
    """Indices where the exact and floating signs of delta_n disagree."""
    if dps < 1:
        raise DomainError(f"dps must be >= 1, got {dps}")
    rows = apery_rows(n_max)
    disagreements = []
    for row in delta_rows(rows):
        approx = delta_sign_float(row.n, rows, dps)
        if approx is not None and approx is not row.sign:
            disagreements.append(row.n)
    if disagreements:
        console.print(f"[red]exact/float sign disagreement at n={disagreements}[/red]")
    return disagreements


def zeta3_bracket(terms: int = 10**6, dps: int = 40) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Enclosure of zeta(3) from the partial sum S_N and the integral tail bounds."""
    if terms < 1:
        raise DomainError(f"terms must be >= 1, got {terms}")
    with mpmath.workdps(dps):
        partial = mpmath.fsum(mpmath.mpf(1) / (k * k * k) for k in range(1, terms + 1))
        lower = partial + mpmath.mpf(1) / (2 * (terms + 1) ** 2)
        upper = partial + mpmath.mpf(1) / (2 * terms**2)
    return lower, upper
