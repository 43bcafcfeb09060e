"""Tests for exact arithmetic helpers and FactoredNat."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from numconj.utils.exactmath import (
    ONE,
    DivisibilityViolation,
    DomainError,
    FactoredNat,
    RenderLimitError,
    UndefinedValuationError,
    factored_div_exact,
    factored_mul,
    format_rational,
    is_reduced,
    lcm_upto,
    legendre_factorial,
    padic_power_part,
    padic_valuation,
    parse_rational,
    require_prime,
)

positive = st.integers(min_value=1, max_value=10**12)
small_primes = st.sampled_from([2, 3, 5, 7, 11, 13, 97])


class TestPadicValuation:
    """Tests for p-adic valuations and power parts."""

    def test_known_values(self):
        """Test valuations of a few hand-checked integers."""
        assert padic_valuation(12, 2) == 2
        assert padic_valuation(12, 3) == 1
        assert padic_valuation(12, 5) == 0
        assert padic_valuation(-48, 2) == 4

    def test_power_part(self):
        """Test w_p(n) is a power of p, not an exponent."""
        assert padic_power_part(12, 2) == 4
        assert padic_power_part(18, 3) == 9
        assert padic_power_part(7, 2) == 1

    def test_zero_is_undefined(self):
        """Test the valuation of zero raises."""
        with pytest.raises(UndefinedValuationError):
            padic_valuation(0, 2)

    def test_non_prime_rejected(self):
        """Test a composite modulus is a domain error."""
        with pytest.raises(DomainError):
            padic_valuation(12, 4)
        with pytest.raises(DomainError):
            padic_valuation(12, 1)

    @given(positive, small_primes)
    def test_valuation_matches_factorization(self, n: int, p: int):
        """Test v_p(n) agrees with sympy's factorization."""
        assert padic_valuation(n, p) == sympy.factorint(n).get(p, 0)

    @given(positive, small_primes)
    def test_power_part_divides_exactly(self, n: int, p: int):
        """Test n / w_p(n) is an integer coprime to p."""
        w = padic_power_part(n, p)
        assert n % w == 0
        assert (n // w) % p != 0


class TestRequirePrime:
    """Tests for the public primality guard."""

    @pytest.mark.parametrize("p", [2, 3, 97])
    def test_accepts_primes(self, p: int):
        """Test primes pass silently."""
        require_prime(p)

    @pytest.mark.parametrize("p", [0, 1, 4, -3, 2.0])
    def test_rejects_non_primes(self, p):
        """Test non-primes and non-integers raise DomainError."""
        with pytest.raises(DomainError):
            require_prime(p)


class TestLcmAndRationals:
    """Tests for lcm_upto and rational formatting."""

    def test_lcm_small(self):
        """Test lcm{1..n} for small n, including the empty range."""
        assert [lcm_upto(n) for n in range(7)] == [1, 1, 2, 6, 12, 60, 60]

    @given(st.integers(min_value=0, max_value=500))
    def test_lcm_divisibility_chain(self, n: int):
        """Test lcm_upto(n) is a multiple of every k <= n and divides lcm_upto(n + 1)."""
        value = lcm_upto(n)
        assert all(value % k == 0 for k in range(1, n + 1))
        assert lcm_upto(n + 1) % value == 0

    def test_lcm_negative(self):
        """Test negative n is rejected."""
        with pytest.raises(DomainError):
            lcm_upto(-1)

    def test_format_rational(self):
        """Test rationals render as num/den, integers included."""
        assert format_rational(Fraction(-115, 386)) == "-115/386"
        assert format_rational(Fraction(0)) == "0/1"
        assert format_rational(Fraction(6, 3)) == "2/1"

    def test_parse_rational(self):
        """Test parsing accepts num/den and bare integers."""
        assert parse_rational("-115/386") == Fraction(-115, 386)
        assert parse_rational("7") == Fraction(7)

    @given(st.integers(), st.integers(min_value=1))
    def test_fractions_stay_reduced(self, num: int, den: int):
        """Test Fraction normalization keeps values reduced and round-trips."""
        q = Fraction(num, den)
        assert is_reduced(q)
        assert parse_rational(format_rational(q)) == q


class TestFactoredNat:
    """Tests for the factored natural number type."""

    def test_render_and_json(self):
        """Test text and JSON renderings of 5760."""
        value = FactoredNat.from_integer(5760)
        assert value.render() == "2^7 · 3^2 · 5"
        assert value.to_json() == ["2^7", "3^2", "5^1"]
        assert FactoredNat.from_json(value.to_json()) == value

    def test_one(self):
        """Test the empty factorization is 1."""
        assert ONE.is_one()
        assert ONE.render() == "1"
        assert ONE.to_integer() == 1
        assert ONE.to_json() == []

    def test_mapping_interface(self):
        """Test FactoredNat behaves as a prime -> exponent mapping."""
        value = FactoredNat.from_exponents({3: 2, 2: 1, 7: 0})
        assert dict(value) == {2: 1, 3: 2}
        assert value.exponent(5) == 0
        assert 7 not in value

    def test_invalid_factors(self):
        """Test unsorted primes and zero exponents are rejected."""
        with pytest.raises(DomainError):
            FactoredNat(((3, 1), (2, 1)))
        with pytest.raises(DomainError):
            FactoredNat(((2, 0),))
        with pytest.raises(DomainError):
            FactoredNat.from_integer(0)

    def test_exact_division(self):
        """Test division succeeds when exponents allow it."""
        a = FactoredNat.from_exponents({2: 3, 3: 1})
        b = FactoredNat.from_exponents({2: 1})
        assert factored_div_exact(a, b) == FactoredNat.from_exponents({2: 2, 3: 1})
        assert a / a == ONE

    def test_division_violation_carries_prime(self):
        """Test a failed division names the offending prime."""
        with pytest.raises(DivisibilityViolation) as exc_info:
            factored_div_exact(FactoredNat.from_integer(12), FactoredNat.from_integer(10))
        assert exc_info.value.prime == 5

    def test_render_limit(self):
        """Test rendering beyond the digit cap is refused."""
        big = FactoredNat.prime_power(2, 10_000)
        with pytest.raises(RenderLimitError):
            big.to_integer(max_digits=100)
        assert big.to_integer(max_digits=None) == 2**10_000

    @given(positive, positive)
    def test_multiplication_matches_integers(self, a: int, b: int):
        """Test factored multiplication agrees with integer multiplication."""
        product = factored_mul(FactoredNat.from_integer(a), FactoredNat.from_integer(b))
        assert product.to_integer() == a * b

    @given(positive, positive)
    def test_divides_matches_integers(self, a: int, b: int):
        """Test divides() agrees with integer divisibility."""
        fa, fb = FactoredNat.from_integer(a), FactoredNat.from_integer(b)
        assert fa.divides(fb) == (b % a == 0)

    @given(positive)
    def test_digits_estimate_is_upper_bound(self, n: int):
        """Test the digit estimate never undercounts."""
        assert FactoredNat.from_integer(n).digits_estimate() >= len(str(n))


class TestLegendreFactorial:
    """Tests for the classical factorial in factored form."""

    @pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 30])
    def test_matches_math_factorial(self, n: int):
        """Test Legendre's formula reproduces n!."""
        assert legendre_factorial(n).to_integer() == math.factorial(n)

    def test_negative(self):
        """Test negative n is rejected."""
        with pytest.raises(DomainError):
            legendre_factorial(-1)
