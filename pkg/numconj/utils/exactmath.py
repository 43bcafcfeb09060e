"""Exact integer, rational and factored-integer arithmetic."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

# BigNat / BigInt are Python ints, BigRat is an always-reduced Fraction.
BigRat = Fraction

DEFAULT_DIGIT_CAP = 100_000


class NumconjError(Exception):
    """Base class for all library errors."""


class DomainError(NumconjError, ValueError):
    """Argument outside the domain of an operation."""


class UndefinedValuationError(DomainError):
    """The p-adic valuation of zero was requested."""


class EmptyDomainError(DomainError):
    """A sieve or set was requested over an empty range."""


class InsufficientElementsError(DomainError):
    """A set has fewer elements than a construction needs."""


class PrimeIndexError(DomainError, IndexError):
    """A prime index outside the supported range."""


class DivisibilityViolation(NumconjError, ArithmeticError):
    """Exact division failed; ``prime`` is the first offending prime."""

    def __init__(self, prime: int, message: str | None = None):
        self.prime = prime
        super().__init__(message or f"divisibility violated at prime {prime}")


class InvariantViolation(NumconjError, ArithmeticError):
    """A computed sequence broke an invariant at index ``n``."""

    def __init__(self, n: int, message: str):
        self.n = n
        super().__init__(f"n={n}: {message}")


class RenderLimitError(NumconjError, OverflowError):
    """Integer rendering refused because it exceeds the digit cap."""


class UsageError(NumconjError):
    """Bad command line or configuration."""


def int_setting(section: str, config: dict, key: str, default: int, minimum: int = 1) -> int:
    """Read an integer setting, rejecting non-integers and values below ``minimum``."""
    value = config.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise UsageError(f"{section}.{key} must be an integer >= {minimum}, got {value!r}")
    return value


def require_prime(p: int) -> None:
    """Raise DomainError unless p is a prime."""
    if not isinstance(p, int) or not sympy.isprime(p):
        raise DomainError(f"{p!r} is not a prime")


def vp(n: int, p: int) -> int:
    """Unchecked p-adic valuation of a nonzero integer (hot-path helper)."""
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def padic_valuation(n: int, p: int) -> int:
    """Return the largest e with p^e dividing n."""
    if n == 0:
        raise UndefinedValuationError("valuation of 0 is undefined")
    require_prime(p)
    return vp(n, p)


def padic_power_part(n: int, p: int) -> int:
    """Return w_p(n), the highest power of p dividing n (a power, not an exponent)."""
    return p ** padic_valuation(n, p)


def lcm_upto(n: int) -> int:
    """lcm{1, ..., n}; the empty range gives 1."""
    if n < 0:
        raise DomainError(f"lcm_upto needs n >= 0, got {n}")
    return math.lcm(*range(1, n + 1)) if n else 1


def is_reduced(q: Fraction) -> bool:
    return q.denominator >= 1 and math.gcd(q.numerator, q.denominator) == 1


def format_rational(q: Fraction) -> str:
    """Render an exact rational as ``num/den``."""
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or 1))


@dataclass(frozen=True)
class FactoredNat(Mapping[int, int]):
    """A positive integer held as prime -> exponent; the empty mapping is 1."""

    factors: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        prev = 0
        for p, e in self.factors:
            if p <= prev:
                raise DomainError("factor primes must be strictly increasing")
            if e < 1:
                raise DomainError(f"exponent of {p} must be >= 1, got {e}")
            prev = p

    @classmethod
    def from_exponents(cls, exponents: Mapping[int, int] | Iterable[tuple[int, int]]) -> FactoredNat:
        """Build from a prime -> exponent mapping, dropping zero exponents."""
        items = exponents.items() if isinstance(exponents, Mapping) else exponents
        merged: dict[int, int] = {}
        for p, e in items:
            if e < 0:
                raise DomainError(f"negative exponent {e} for {p}")
            if e:
                merged[p] = merged.get(p, 0) + e
        return cls(tuple(sorted(merged.items())))

    @classmethod
    def from_integer(cls, m: int) -> FactoredNat:
        if m < 1:
            raise DomainError(f"FactoredNat needs a positive integer, got {m}")
        return cls.from_exponents(sympy.factorint(m))

    @classmethod
    def prime_power(cls, p: int, e: int) -> FactoredNat:
        return cls(((p, e),)) if e else cls()

    def __getitem__(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        raise KeyError(p)

    def __iter__(self) -> Iterator[int]:
        return (p for p, _ in self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def exponent(self, p: int) -> int:
        return self.get(p, 0)

    def is_one(self) -> bool:
        return not self.factors

    def digits_estimate(self) -> int:
        """Upper estimate of the decimal digit count of the rendered integer."""
        # slack absorbs rounding at exact powers of ten
        return int(sum(e * math.log10(p) for p, e in self.factors) + 1e-6) + 1

    def to_integer(self, max_digits: int | None = DEFAULT_DIGIT_CAP) -> int:
        if max_digits is not None and self.digits_estimate() > max_digits:
            raise RenderLimitError(
                f"~{self.digits_estimate()} digits exceeds the cap of {max_digits}"
            )
        return math.prod(p**e for p, e in self.factors)

    def divides(self, other: FactoredNat) -> bool:
        return all(other.exponent(p) >= e for p, e in self.factors)

    def __mul__(self, other: FactoredNat) -> FactoredNat:
        return factored_mul(self, other)

    def __truediv__(self, other: FactoredNat) -> FactoredNat:
        return factored_div_exact(self, other)

    def render(self, separator: str = " · ") -> str:
        """``2^7 · 3^2 · 5``; the unit renders as ``1``."""
        if not self.factors:
            return "1"
        return separator.join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)

    def to_json(self) -> list[str]:
        return [f"{p}^{e}" for p, e in self.factors]

    @classmethod
    def from_json(cls, items: Iterable[str]) -> FactoredNat:
        pairs = []
        for item in items:
            p, _, e = item.partition("^")
            pairs.append((int(p), int(e or 1)))
        return cls.from_exponents(pairs)

    def __repr__(self) -> str:
        return f"FactoredNat({dict(self.factors)})"


ONE = FactoredNat()


def factored_mul(a: FactoredNat, b: FactoredNat) -> FactoredNat:
    return FactoredNat.from_exponents([*a.factors, *b.factors])


def factored_div_exact(a: FactoredNat, b: FactoredNat) -> FactoredNat:
    """Exponent-wise a / b; raises DivisibilityViolation if b does not divide a."""
    result = dict(a.factors)
    for p, e in b.factors:
        have = result.get(p, 0)
        if have < e:
            raise DivisibilityViolation(p, f"{p}^{e} does not divide {p}^{have}")
        result[p] = have - e
    return FactoredNat.from_exponents(result)


def legendre_factorial(n: int) -> FactoredNat:
    """n! in factored form via Legendre's formula."""
    if n < 0:
        raise DomainError(f"factorial needs n >= 0, got {n}")
    exponents = {}
    for p in sympy.primerange(2, n + 1):
        e, q = 0, n
        while q:
            q //= p
            e += q
        exponents[int(p)] = e
    return FactoredNat.from_exponents(exponents)
