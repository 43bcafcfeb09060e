"""Bhargava p-orderings and generalized factorials."""

from __future__ import annotations

import functools
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

from rich.console import Console

from .exactmath import (
    ONE,
    DivisibilityViolation,
    DomainError,
    FactoredNat,
    InsufficientElementsError,
    NumconjError,
    factored_div_exact,
    factored_mul,
    int_setting,
    legendre_factorial,
    require_prime,
    vp,
)
from .primes import DEFAULT_SIEVE_CEILING, ConstellationKind, ConstellationSet, nth_prime, prime_table

console = Console(stderr=True)

FactorialProvider = Callable[[int], FactoredNat]


class TruncationUnstableError(NumconjError):
    """A p-sequence of an infinite set did not stabilize under the truncation policy."""

    def __init__(self, kind: ConstellationKind, n: int, prime: int, truncation: int, reason: str):
        self.kind = kind
        self.n = n
        self.prime = prime
        self.truncation = truncation
        self.reason = reason
        super().__init__(f"{n}!_{kind.value}: p={prime} inconclusive at M={truncation} ({reason})")


@dataclass(frozen=True)
class TruncationPolicy:
    """How infinite sets are truncated before running the greedy construction."""

    initial_factor: int = 4
    max_members: int = 2**16
    doublings_required: int = 2
    sieve_ceiling: int = DEFAULT_SIEVE_CEILING

    def __post_init__(self) -> None:
        for name in ("initial_factor", "max_members", "doublings_required"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.sieve_ceiling < 2:
            raise DomainError(f"sieve_ceiling must be >= 2, got {self.sieve_ceiling}")

    def initial_members(self, n: int) -> int:
        return self.initial_factor * (n + 1)


DEFAULT_POLICY = TruncationPolicy()


def create_truncation_policy(config: dict) -> TruncationPolicy:
    """Create a truncation policy from the ``truncation`` configuration section."""
    return TruncationPolicy(
        initial_factor=int_setting("truncation", config, "initial_factor", DEFAULT_POLICY.initial_factor),
        max_members=int_setting("truncation", config, "max_members", DEFAULT_POLICY.max_members),
        doublings_required=int_setting(
            "truncation", config, "doublings_required", DEFAULT_POLICY.doublings_required
        ),
        sieve_ceiling=int_setting(
            "truncation", config, "sieve_ceiling", DEFAULT_POLICY.sieve_ceiling, minimum=2
        ),
    )


@dataclass
class POrdering:
    """A greedy p-ordering a_0..a_k and the exponents of nu_1..nu_k."""

    set_id: str
    p: int
    elements: list[int]
    exponents: list[int]

    def recompute_exponents(self) -> list[int]:
        return [
            sum(vp(a_k - a_i, self.p) for a_i in self.elements[:k])
            for k, a_k in enumerate(self.elements)
            if k
        ]


@dataclass(frozen=True)
class StabilizedPSequence:
    """Exponents nu_1..nu_n of a truncated infinite set and whether they settled.

    Instances are shared through the memo cache, so every field is immutable.
    """

    kind: ConstellationKind
    p: int
    exponents: tuple[int, ...]
    truncation_used: int
    stable: bool
    reason: str = ""
    history: tuple[tuple[int, tuple[int, ...]], ...] = ()


@dataclass
class AxiomReport:
    """Outcome of checking the abstract-factorial axioms on [0, n_max]."""

    provider: str
    n_max: int
    axiom1_ok: bool = True
    axiom2_failures: list[tuple[int, int]] = field(default_factory=list)
    axiom3_failures: list[int] = field(default_factory=list)
    untested: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.axiom1_ok and not self.axiom2_failures and not self.axiom3_failures


@dataclass(frozen=True)
class BinomialViolation:
    """Witness that n!_a / (k!_a (n-k)!_a) is not an integer."""

    n: int
    k: int
    prime: int


def greedy_p_ordering(
    members: Sequence[int],
    p: int,
    k_max: int,
    start: int | None = None,
    set_id: str = "finite",
) -> POrdering:
    """Greedy p-ordering of a finite sorted set up to index k_max.

    a_0 is the smallest element unless ``start`` forces it; each later a_k minimizes
    v_p(prod_{i<k}(a_k - a_i)), ties going to the smallest candidate.
    """
    require_prime(p)
    if len(members) < k_max + 1:
        raise InsufficientElementsError(f"{len(members)} elements, {k_max + 1} needed")
    pool = sorted(set(members))
    if len(pool) != len(members):
        raise DomainError("members must be distinct")
    first = pool[0] if start is None else start
    if first not in pool:
        raise DomainError(f"start {start} is not a member")

    # running valuation of prod(c - a_i) per candidate, in sorted order
    unused = [c for c in pool if c != first]
    totals = [vp(c - first, p) for c in unused]
    elements, exponents = [first], []
    for _ in range(k_max):
        best = min(range(len(unused)), key=totals.__getitem__)
        chosen = unused.pop(best)
        exponents.append(totals.pop(best))
        elements.append(chosen)
        for i, c in enumerate(unused):
            totals[i] += vp(c - chosen, p)
    return POrdering(set_id=set_id, p=p, elements=elements, exponents=exponents)


def all_p_orderings(members: Sequence[int], p: int, k_max: int) -> Iterator[POrdering]:
    """Every p-ordering of a small finite set, over every a_0 and every tie choice."""

    def extend(elements: list[int], exponents: list[int]) -> Iterator[POrdering]:
        if len(elements) == k_max + 1:
            yield POrdering("finite", p, list(elements), list(exponents))
            return
        scores = {
            c: sum(vp(c - a, p) for a in elements) for c in members if c not in elements
        }
        low = min(scores.values())
        for c, score in scores.items():
            if score == low:
                yield from extend([*elements, c], [*exponents, score])

    for a0 in members:
        yield from extend([a0], [])


def residue_classes_reach(members: Sequence[int], p: int, needed: int) -> bool:
    """True when the members occupy at least ``needed`` residue classes mod p."""
    seen: set[int] = set()
    for a in members:
        seen.add(a % p)
        if len(seen) >= needed:
            return True
    return False


_constellations: dict[tuple[ConstellationKind, int], ConstellationSet] = {}


def _constellation(kind: ConstellationKind, ceiling: int) -> ConstellationSet:
    key = (kind, ceiling)
    if key not in _constellations:
        _constellations[key] = ConstellationSet(kind, ceiling)
    return _constellations[key]


@functools.lru_cache(maxsize=4096)
def stabilized_p_sequence(
    kind: ConstellationKind,
    p: int,
    n: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> StabilizedPSequence:
    """nu_1..nu_n for an infinite set, doubling the truncation until they settle."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    kind = ConstellationKind.parse(kind)
    source = _constellation(kind, policy.sieve_ceiling)
    m = policy.initial_members(n)
    history: list[tuple[int, tuple[int, ...]]] = []
    agreements = 0
    while True:
        if m > policy.max_members:
            return StabilizedPSequence(
                kind, p, history[-1][1] if history else (), history[-1][0] if history else m,
                stable=False, reason=f"truncation cap {policy.max_members} reached", history=tuple(history),
            )
        try:
            prefix = source.first(m)
        except InsufficientElementsError as e:
            return StabilizedPSequence(
                kind, p, history[-1][1] if history else (), m,
                stable=False, reason=str(e), history=tuple(history),
            )
        exponents = tuple(greedy_p_ordering(prefix, p, n, set_id=kind.value).exponents)
        if history and history[-1][1] == exponents:
            agreements += 1
        else:
            agreements = 0
        history.append((m, exponents))
        if agreements >= policy.doublings_required:
            return StabilizedPSequence(kind, p, exponents, m, stable=True, history=tuple(history))
        m *= 2


@dataclass(frozen=True)
class FactorialDetail:
    """A constructed set factorial with the largest truncation any prime needed."""

    kind: ConstellationKind
    n: int
    value: FactoredNat
    truncation_used: int
    primes_examined: tuple[int, ...] = ()


def set_factorial(
    kind: ConstellationKind,
    n: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> FactoredNat:
    """n!_X = prod_p p^{nu_n(X, p)} for one of the constellation sets."""
    return set_factorial_detail(ConstellationKind.parse(kind), n, policy).value


@functools.lru_cache(maxsize=1024)
def set_factorial_detail(
    kind: ConstellationKind,
    n: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> FactorialDetail:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    kind = ConstellationKind.parse(kind)
    if n == 0:
        return FactorialDetail(kind, 0, ONE, 0)
    m = policy.initial_members(n)
    if m > policy.max_members:
        raise TruncationUnstableError(kind, n, 2, m, "initial truncation above the cap")
    try:
        prefix = _constellation(kind, policy.sieve_ceiling).first(m)
    except InsufficientElementsError as e:
        raise TruncationUnstableError(kind, n, 2, m, str(e)) from e

    exponents: dict[int, int] = {}
    examined: list[int] = []
    truncation = m
    span = prefix[-1] - prefix[0]
    # a prime above the span sees pairwise distinct residues and contributes nothing
    for p in prime_table(max(span, 2)).upto(span):
        if residue_classes_reach(prefix, p, n + 1):
            continue
        seq = stabilized_p_sequence(kind, p, n, policy)
        if not seq.stable:
            console.print(f"[yellow]{n}!_{kind.value}: p={p} unstable ({seq.reason})[/yellow]")
            raise TruncationUnstableError(kind, n, p, seq.truncation_used, seq.reason)
        exponents[p] = seq.exponents[n - 1]
        examined.append(p)
        truncation = max(truncation, seq.truncation_used)
    return FactorialDetail(
        kind, n, FactoredNat.from_exponents(exponents), truncation, tuple(examined)
    )


def set_factorial_provider(kind: ConstellationKind, policy: TruncationPolicy = DEFAULT_POLICY) -> FactorialProvider:
    kind = ConstellationKind.parse(kind)
    return functools.partial(set_factorial, kind, policy=policy)


def prime_factorial_closed(n: int) -> FactoredNat:
    """Closed form of n!_P: exponent of p is sum_m floor((n-1) / (p^m (p-1)))."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n <= 1:
        return ONE
    exponents = {}
    for p in prime_table(max(n, 2)).upto(n):
        e, q = 0, p - 1
        while q <= n - 1:
            e += (n - 1) // q
            q *= p
        exponents[p] = e
    return FactoredNat.from_exponents(exponents)


def classical_factorial(n: int) -> FactoredNat:
    return legendre_factorial(n)


def prime_power_factorial(n: int) -> FactoredNat:
    """f(0) = f(1) = 1 and f(n) = p_{n-1}! for n >= 2."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n <= 1:
        return ONE
    return legendre_factorial(nth_prime(n - 1))


def pointwise_product(f: FactorialProvider, g: FactorialProvider) -> FactorialProvider:
    def product(n: int) -> FactoredNat:
        return factored_mul(f(n), g(n))

    return product


def generalized_binomial(n: int, k: int, fact: FactorialProvider) -> int | BinomialViolation:
    """n!_a / (k!_a (n-k)!_a), or the violation witness when it is not integral."""
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    try:
        quotient = factored_div_exact(fact(n), factored_mul(fact(k), fact(n - k)))
    except DivisibilityViolation as e:
        return BinomialViolation(n, k, e.prime)
    return quotient.to_integer(max_digits=None)


def axioms_check(fact: FactorialProvider, n_max: int, name: str = "provider") -> AxiomReport:
    """Check 0!_a = 1, integral binomials, and n! | n!_a on [0, n_max]."""
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    report = AxiomReport(provider=name, n_max=n_max)

    values: dict[int, FactoredNat] = {}
    for n in range(n_max + 1):
        try:
            values[n] = fact(n)
        except TruncationUnstableError:
            report.untested.append(n)

    report.axiom1_ok = values.get(0) == ONE if 0 in values else False
    for n in range(1, n_max + 1):
        if n not in values:
            continue
        if not legendre_factorial(n).divides(values[n]):
            report.axiom3_failures.append(n)
        for k in range(n + 1):
            if k not in values or n - k not in values:
                continue
            if not factored_mul(values[k], values[n - k]).divides(values[n]):
                report.axiom2_failures.append((n, k))

    status = "[green]pass[/green]" if report.passed else "[red]fail[/red]"
    console.print(f"[dim]axioms {name} n<={n_max}: {status}[/dim]")
    return report
