"""Prime sieving and the prime constellation sets."""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np
from rich.console import Console

from .exactmath import DomainError, EmptyDomainError, InsufficientElementsError, PrimeIndexError

console = Console(stderr=True)

DEFAULT_SIEVE_CEILING = 20_000_000


class ConstellationKind(Enum):
    """Integer sets whose generalized factorials are studied."""

    NATURALS = "nat"
    P = "P"
    P2 = "P2"  # twin primes p, p+2
    P3 = "P3"  # triplets p, p+2, p+6
    P4 = "P4"  # quadruplets p, p+2, p+6, p+8

    @property
    def offsets(self) -> tuple[int, ...]:
        return _OFFSETS[self]

    @classmethod
    def parse(cls, value: str | ConstellationKind) -> ConstellationKind:
        if isinstance(value, ConstellationKind):
            return value
        for kind in cls:
            if value in (kind.value, kind.name):
                return kind
        raise DomainError(f"unknown constellation kind: {value!r}")


_OFFSETS = {
    ConstellationKind.NATURALS: (0,),
    ConstellationKind.P: (0,),
    ConstellationKind.P2: (0, 2),
    ConstellationKind.P3: (0, 2, 6),
    ConstellationKind.P4: (0, 2, 6, 8),
}


def _sieve_mask(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """All primes <= limit, sorted."""

    limit: int
    primes: tuple[int, ...]
    mask: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def __contains__(self, value: object) -> bool:
        return isinstance(value, int) and 0 <= value <= self.limit and bool(self.mask[value])

    def extend(self, limit: int) -> PrimeTable:
        """Return a new table covering ``limit``; this table is left untouched."""
        if limit <= self.limit:
            return self
        return sieve_upto(limit)

    def upto(self, bound: int) -> tuple[int, ...]:
        return self.primes[: bisect.bisect_right(self.primes, bound)]


def sieve_upto(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes over [0, limit]."""
    if limit < 2:
        raise EmptyDomainError(f"no primes below {limit}")
    mask = _sieve_mask(limit)
    mask.flags.writeable = False
    primes = tuple(int(p) for p in np.flatnonzero(mask))
    return PrimeTable(limit=limit, primes=primes, mask=mask)


class _SharedSieve:
    """Process-wide prime table, grown by doubling and replaced on growth."""

    def __init__(self, initial: int = 1 << 12):
        self._lock = threading.Lock()
        self._table = sieve_upto(initial)

    def table(self, limit: int) -> PrimeTable:
        with self._lock:
            if limit > self._table.limit:
                self._table = self._table.extend(max(limit, 2 * self._table.limit))
            return self._table


_shared = _SharedSieve()


def prime_table(limit: int) -> PrimeTable:
    """A table covering at least ``limit`` from the shared cache."""
    return _shared.table(limit)


def nth_prime(n: int, p0_is_one: bool = False) -> int:
    """The 1-indexed n-th prime (p_1 = 2); with ``p0_is_one`` p_0 is 1."""
    if n == 0 and p0_is_one:
        return 1
    if n <= 0:
        raise PrimeIndexError(f"prime index must be >= 1, got {n}")
    return prime_list(n)[n - 1]


def prime_list(count: int) -> tuple[int, ...]:
    """The first ``count`` primes."""
    # Rosser's bound p_n < n(ln n + ln ln n) for n >= 6
    bound = 15 if count < 6 else int(count * (math.log(count) + math.log(math.log(count)))) + 1
    table = prime_table(bound)
    return table.primes[:count]


def constellation_tuples(kind: ConstellationKind, limit: int) -> list[int]:
    """Start points p of every full pattern p + offsets lying <= limit."""
    kind = ConstellationKind.parse(kind)
    if limit < 2:
        raise EmptyDomainError(f"no constellation members below {limit}")
    if kind is ConstellationKind.NATURALS:
        return list(range(limit + 1))
    return np.flatnonzero(_start_mask(kind, prime_table(limit).mask[: limit + 1])).tolist()


def _start_mask(kind: ConstellationKind, mask: np.ndarray) -> np.ndarray:
    span = kind.offsets[-1]
    size = len(mask) - span
    if size <= 0:
        return np.zeros(0, dtype=bool)
    starts = mask[:size].copy()
    for off in kind.offsets[1:]:
        starts &= mask[off : off + size]
    return starts


def constellation_members(kind: ConstellationKind, limit: int) -> list[int]:
    """Sorted union of all members of complete patterns lying <= limit."""
    kind = ConstellationKind.parse(kind)
    if limit < 2:
        raise EmptyDomainError(f"no constellation members below {limit}")
    if kind is ConstellationKind.NATURALS:
        return list(range(limit + 1))
    mask = prime_table(limit).mask[: limit + 1]
    if kind is ConstellationKind.P:
        return np.flatnonzero(mask).tolist()
    starts = _start_mask(kind, mask)
    members = np.zeros(limit + 1, dtype=bool)
    for off in kind.offsets:
        members[off : off + len(starts)] |= starts
    return np.flatnonzero(members).tolist()


class ConstellationSet:
    """Lazily sieved view of one constellation; hands out sorted prefixes."""

    def __init__(self, kind: ConstellationKind, ceiling: int = DEFAULT_SIEVE_CEILING):
        self.kind = ConstellationKind.parse(kind)
        self.ceiling = ceiling
        self._lock = threading.Lock()
        self._limit = 0
        self._members: list[int] = []

    def first(self, count: int) -> tuple[int, ...]:
        """The ``count`` smallest members."""
        if self.kind is ConstellationKind.NATURALS:
            return tuple(range(count))
        with self._lock:
            limit = max(self._limit, 64)
            while len(self._members) < count:
                if self._limit >= self.ceiling:
                    console.print(
                        f"[yellow]{self.kind.value}: only {len(self._members)} members "
                        f"below sieve ceiling {self.ceiling}[/yellow]"
                    )
                    raise InsufficientElementsError(
                        f"{self.kind.value} has {len(self._members)} members <= {self.ceiling}, "
                        f"{count} needed"
                    )
                limit = min(self.ceiling, max(limit * 2, count * 16))
                self._members = constellation_members(self.kind, limit)
                self._limit = limit
            return tuple(self._members[:count])
