"""Tests for p-orderings, generalized factorials and the axiom checker."""

from __future__ import annotations

import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numconj.utils.bhargava import (
    BinomialViolation,
    TruncationPolicy,
    TruncationUnstableError,
    all_p_orderings,
    axioms_check,
    classical_factorial,
    create_truncation_policy,
    generalized_binomial,
    greedy_p_ordering,
    pointwise_product,
    prime_factorial_closed,
    prime_power_factorial,
    residue_classes_reach,
    set_factorial,
    set_factorial_detail,
    set_factorial_provider,
    stabilized_p_sequence,
)
from numconj.utils.exactmath import (
    ONE,
    DomainError,
    FactoredNat,
    InsufficientElementsError,
    UsageError,
)
from numconj.utils.primes import ConstellationKind, ConstellationSet, prime_list

KINDS = [ConstellationKind.P, ConstellationKind.P2, ConstellationKind.P3, ConstellationKind.P4]


class TestGreedyPOrdering:
    """Tests for the greedy p-ordering construction."""

    def test_naturals_prefix(self):
        """Test {0..6} at p=2 gives the valuations of 1!, 2!, 3!."""
        ordering = greedy_p_ordering(range(7), 2, 3)
        assert ordering.elements == [0, 1, 2, 3]
        assert ordering.exponents == [0, 1, 1]

    def test_primes_start_at_two(self):
        """Test the first step over the primes picks 3 after 2."""
        ordering = greedy_p_ordering(prime_list(20), 2, 1)
        assert ordering.elements == [2, 3]
        assert ordering.exponents == [0]

    def test_twin_primes(self):
        """Test twin primes at p=2 give exponents [1, 3] with a_2 = 7."""
        twins = ConstellationSet(ConstellationKind.P2).first(20)
        ordering = greedy_p_ordering(twins, 2, 2)
        assert ordering.elements == [3, 5, 7]
        assert ordering.exponents == [1, 3]

    def test_forced_start(self):
        """Test a forced a_0 is honored."""
        ordering = greedy_p_ordering(range(7), 2, 2, start=4)
        assert ordering.elements[0] == 4
        assert ordering.exponents == [0, 1]

    def test_exponents_recompute(self):
        """Test recorded exponents match the valuations of the products."""
        ordering = greedy_p_ordering(prime_list(40), 3, 12)
        assert ordering.recompute_exponents() == ordering.exponents

    def test_errors(self):
        """Test too-small sets, duplicates, foreign starts and composite moduli."""
        with pytest.raises(InsufficientElementsError):
            greedy_p_ordering([1, 2], 2, 2)
        with pytest.raises(DomainError):
            greedy_p_ordering([1, 1, 2], 2, 1)
        with pytest.raises(DomainError):
            greedy_p_ordering([1, 2, 3], 2, 1, start=7)
        with pytest.raises(DomainError):
            greedy_p_ordering([1, 2, 3], 4, 1)

    @settings(max_examples=60, deadline=None)
    @given(
        st.sets(st.integers(min_value=-50, max_value=200), min_size=4, max_size=9),
        st.sampled_from([2, 3, 5]),
        st.integers(min_value=1, max_value=3),
    )
    def test_invariance(self, members: set[int], p: int, k_max: int):
        """Test every p-ordering, from every a_0, yields the greedy exponents."""
        members_sorted = sorted(members)
        greedy = greedy_p_ordering(members_sorted, p, k_max).exponents
        for a0 in members_sorted:
            assert greedy_p_ordering(members_sorted, p, k_max, start=a0).exponents == greedy
        assert {tuple(o.exponents) for o in all_p_orderings(members_sorted, p, k_max)} == {
            tuple(greedy)
        }

    def test_residue_classes(self):
        """Test the residue-class counter."""
        assert residue_classes_reach([3, 5, 7], 3, 3)
        assert not residue_classes_reach([5, 11, 17], 3, 2)


class TestStabilizedPSequence:
    """Tests for truncation doubling on infinite sets."""

    def test_primes_p2(self):
        """Test (P, 2, 2) stabilizes at [0, 1]."""
        seq = stabilized_p_sequence(ConstellationKind.P, 2, 2)
        assert seq.stable
        assert seq.exponents == (0, 1)
        assert len(seq.history) == 3
        assert seq.truncation_used == 48

    def test_cached_result_is_immutable(self):
        """Test the memoized sequence cannot be altered by a caller."""
        seq = stabilized_p_sequence(ConstellationKind.P, 2, 2)
        with pytest.raises(dataclasses.FrozenInstanceError):
            seq.exponents = (9, 9)  # type: ignore[misc]
        assert isinstance(seq.exponents, tuple)
        assert all(isinstance(exps, tuple) for _, exps in seq.history)
        assert stabilized_p_sequence(ConstellationKind.P, 2, 2) is seq

    @pytest.mark.parametrize(("p", "expected"), [(2, (1,)), (3, (0,))])
    def test_twins_first_step(self, p: int, expected: tuple[int, ...]):
        """Test twin primes at n=1."""
        seq = stabilized_p_sequence(ConstellationKind.P2, p, 1)
        assert seq.stable
        assert seq.exponents == expected

    def test_cap_is_inconclusive(self, tiny_policy: TruncationPolicy):
        """Test hitting the cap reports instability instead of a value."""
        seq = stabilized_p_sequence(ConstellationKind.P2, 2, 1, tiny_policy)
        assert not seq.stable
        assert "cap" in seq.reason

    def test_sieve_ceiling_is_inconclusive(self):
        """Test running out of members below the ceiling is inconclusive."""
        policy = TruncationPolicy(sieve_ceiling=200)
        seq = stabilized_p_sequence(ConstellationKind.P4, 2, 3, policy)
        assert not seq.stable

    def test_bad_n(self):
        """Test n < 1 is rejected."""
        with pytest.raises(DomainError):
            stabilized_p_sequence(ConstellationKind.P, 2, 0)


class TestSetFactorial:
    """Tests for generalized factorials of the constellation sets."""

    @pytest.mark.parametrize("kind", list(ConstellationKind))
    def test_zero(self, kind: ConstellationKind):
        """Test 0!_X = 1 for every set."""
        assert set_factorial(kind, 0) == ONE

    @pytest.mark.parametrize(
        ("kind", "n", "expected"),
        [
            (ConstellationKind.P, 1, 1),
            (ConstellationKind.P, 2, 2),
            (ConstellationKind.P2, 1, 2),
            (ConstellationKind.P2, 2, 8),
            (ConstellationKind.P3, 2, 24),
            (ConstellationKind.P4, 1, 2),
            (ConstellationKind.P4, 2, 24),
            (ConstellationKind.NATURALS, 4, 24),
        ],
    )
    def test_known_values(self, kind: ConstellationKind, n: int, expected: int):
        """Test hand-checked small factorials."""
        assert set_factorial(kind, n).to_integer() == expected

    @pytest.mark.parametrize("n", range(11))
    def test_classical_recovery(self, n: int):
        """Test the naturals give the classical factorial."""
        assert set_factorial(ConstellationKind.NATURALS, n).to_integer() == math.factorial(n)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_closed_form_matches_construction(self, n: int):
        """Test the closed form for the primes agrees with the greedy construction."""
        assert set_factorial(ConstellationKind.P, n) == prime_factorial_closed(n)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_subset_divisibility(self, n: int):
        """Test n!_P | n!_P2 | n!_P4 and n!_P | n!_P3."""
        values = {kind: set_factorial(kind, n) for kind in KINDS}
        assert values[ConstellationKind.P].divides(values[ConstellationKind.P2])
        assert values[ConstellationKind.P2].divides(values[ConstellationKind.P4])
        assert values[ConstellationKind.P].divides(values[ConstellationKind.P3])

    def test_detail(self):
        """Test the detail record carries the truncation and examined primes."""
        detail = set_factorial_detail(ConstellationKind.P2, 2)
        assert detail.value == FactoredNat.from_exponents({2: 3})
        assert detail.truncation_used >= TruncationPolicy().initial_members(2)
        assert 2 in detail.primes_examined

    def test_accepts_kind_names(self):
        """Test string kinds are accepted."""
        assert set_factorial("P2", 2) == set_factorial(ConstellationKind.P2, 2)

    def test_negative_n(self):
        """Test negative n is rejected."""
        with pytest.raises(DomainError):
            set_factorial(ConstellationKind.P, -1)

    def test_unstable_carries_prime(self, tiny_policy: TruncationPolicy):
        """Test an unstable p-sequence raises with the failing prime."""
        with pytest.raises(TruncationUnstableError) as exc_info:
            set_factorial(ConstellationKind.P2, 1, tiny_policy)
        assert exc_info.value.prime == 2
        assert exc_info.value.kind is ConstellationKind.P2

    def test_initial_truncation_above_cap(self, tiny_policy: TruncationPolicy):
        """Test an initial truncation above the cap is inconclusive."""
        with pytest.raises(TruncationUnstableError):
            set_factorial(ConstellationKind.P3, 5, tiny_policy)


class TestClosedFormsAndProviders:
    """Tests for closed forms and factorial providers."""

    @pytest.mark.parametrize(
        ("n", "expected"), [(0, 1), (1, 1), (2, 2), (3, 24), (4, 48), (5, 5760)]
    )
    def test_prime_factorial_closed(self, n: int, expected: int):
        """Test closed-form n!_P values."""
        assert prime_factorial_closed(n).to_integer() == expected

    def test_prime_factorial_closed_exponents(self):
        """Test 5!_P exponents."""
        assert dict(prime_factorial_closed(5)) == {2: 7, 3: 2, 5: 1}

    def test_prime_power_factorial(self):
        """Test f(n) = p_{n-1}! with f(0) = f(1) = 1."""
        assert [prime_power_factorial(n).to_integer() for n in range(5)] == [1, 1, 2, 6, 120]

    def test_set_provider(self):
        """Test a set provider computes n!_X."""
        provider = set_factorial_provider("P2")
        assert provider(2).to_integer() == 8

    def test_pointwise_product(self):
        """Test the pointwise product multiplies values."""
        product = pointwise_product(classical_factorial, prime_factorial_closed)
        assert product(3).to_integer() == 6 * 24


class TestGeneralizedBinomial:
    """Tests for generalized binomial coefficients."""

    def test_values(self):
        """Test binomials of the prime factorial."""
        assert generalized_binomial(3, 1, prime_factorial_closed) == 12
        assert generalized_binomial(4, 2, prime_factorial_closed) == 12
        assert generalized_binomial(7, 0, prime_factorial_closed) == 1

    def test_classical(self):
        """Test classical binomials are recovered."""
        assert generalized_binomial(10, 4, classical_factorial) == math.comb(10, 4)

    def test_violation_witness(self):
        """Test a non-integral binomial returns its witness."""

        def identity(n: int) -> FactoredNat:
            return FactoredNat.from_integer(max(n, 1))

        assert generalized_binomial(3, 1, identity) == BinomialViolation(3, 1, 2)

    def test_k_out_of_range(self):
        """Test k outside [0, n] is rejected."""
        with pytest.raises(DomainError):
            generalized_binomial(3, 4, classical_factorial)


class TestAxiomsCheck:
    """Tests for the abstract-factorial axiom checker."""

    @pytest.mark.parametrize(
        "provider", [prime_factorial_closed, classical_factorial, prime_power_factorial]
    )
    def test_providers_pass(self, provider):
        """Test the known abstract factorials pass on [0, 10]."""
        report = axioms_check(provider, 10)
        assert report.passed
        assert report.axiom1_ok
        assert not report.untested

    @pytest.mark.parametrize(
        ("f", "g"),
        [
            (classical_factorial, prime_factorial_closed),
            (prime_factorial_closed, prime_factorial_closed),
        ],
    )
    def test_semigroup_closure(self, f, g):
        """Test the pointwise product of passing providers passes."""
        assert axioms_check(pointwise_product(f, g), 10).passed

    def test_failures_reported(self):
        """Test axiom 2 and axiom 3 failures are listed."""

        def identity(n: int) -> FactoredNat:
            return FactoredNat.from_integer(max(n, 1))

        report = axioms_check(identity, 4, name="identity")
        assert not report.passed
        assert (3, 1) in report.axiom2_failures
        assert report.axiom3_failures == [3, 4]

    def test_axiom1_failure(self):
        """Test 0!_a != 1 fails axiom 1."""
        report = axioms_check(lambda n: FactoredNat.from_integer(2), 2)
        assert not report.axiom1_ok
        assert not report.passed

    def test_untested(self, tiny_policy: TruncationPolicy):
        """Test inconclusive values mark n untested rather than failed."""
        report = axioms_check(set_factorial_provider(ConstellationKind.P2, tiny_policy), 3)
        assert report.untested == [1, 2, 3]
        assert report.axiom1_ok
        assert report.passed


class TestTruncationConfig:
    """Tests for building the policy from configuration."""

    def test_defaults(self):
        """Test an empty section yields the default policy."""
        assert create_truncation_policy({}) == TruncationPolicy()

    def test_overrides(self, sample_config: dict):
        """Test values are read from the truncation section."""
        policy = create_truncation_policy(sample_config["truncation"])
        assert policy.max_members == 4096
        assert policy.sieve_ceiling == 2_000_000
        assert policy.initial_members(3) == 16

    @pytest.mark.parametrize(
        ("key", "value"),
        [
            ("initial_factor", 0),
            ("max_members", -1),
            ("doublings_required", 0),
            ("sieve_ceiling", 1),
            ("max_members", "lots"),
            ("initial_factor", True),
        ],
    )
    def test_invalid_values_rejected(self, key: str, value):
        """Test out-of-range or non-integer settings are usage errors."""
        with pytest.raises(UsageError, match=f"truncation.{key}"):
            create_truncation_policy({key: value})

    def test_direct_construction_checked(self):
        """Test a policy built in code is validated too."""
        with pytest.raises(DomainError):
            TruncationPolicy(initial_factor=0)
        with pytest.raises(DomainError):
            TruncationPolicy(sieve_ceiling=1)


@pytest.mark.slow
class TestAxiomsAtScale:
    """Acceptance-scale axiom checks."""

    def test_prime_closed_to_30(self):
        """Test the closed-form prime factorial passes every axiom on [0, 30]."""
        report = axioms_check(prime_factorial_closed, 30)
        assert report.passed
        assert report.axiom1_ok
        assert not report.untested
