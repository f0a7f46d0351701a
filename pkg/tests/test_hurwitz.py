"""Exact arithmetic tests for the Hurwitz order."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatapprox.errors import ValidationError
from quatapprox.hurwitz import (
    OMEGA,
    ONE,
    UNITS,
    ZERO,
    HurwitzInt,
    HurwitzRational,
    I,
    J,
    K,
    RationalQuaternion,
    RealQuaternion,
    div_rem_left,
    div_rem_right,
    enumerate_by_norm,
    exact_right_div,
    fractional_part,
    gcd_left,
    gcd_right,
    is_prime,
    lipschitz_count_formula,
    separation_gap,
    to_rational,
)


def H(a, b, c, d):
    return HurwitzInt(a, b, c, d)


def Hd(A, B, C, D):
    return HurwitzInt.from_doubled(A, B, C, D)


# ---------------------------------------------------------------------------
# construction / representation
# ---------------------------------------------------------------------------

class TestConstruction:
    def test_integer_coords(self):
        x = H(1, -2, 3, 0)
        assert x.doubled == (2, -4, 6, 0)
        assert x.coords() == (1, -2, 3, 0)

    def test_doubled_parity_enforced(self):
        with pytest.raises(ValidationError):
            Hd(1, 0, 0, 0)
        with pytest.raises(ValidationError):
            Hd(2, 1, 1, 1)

    def test_from_coords_rejects_non_half_integers(self):
        with pytest.raises(ValidationError):
            HurwitzInt.from_coords((Fraction(1, 3), 0, 0, 0))
        x = HurwitzInt.from_coords(
            (Fraction(1, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2))
        )
        assert x.doubled == (1, -1, 1, 1)

    def test_str_canonical(self):
        assert str(ZERO) == "0"
        assert str(ONE) == "1"
        assert str(-ONE) == "-1"
        assert str(I) == "i"
        assert str(H(0, -1, 0, 2)) == "-i+2k"
        assert str(OMEGA) == "1/2+1/2i+1/2j+1/2k"
        assert str(Hd(-3, 1, -1, 5)) == "-3/2+1/2i-1/2j+5/2k"

    def test_parse_round_trip(self):
        for x in (ZERO, ONE, I, J, K, OMEGA, Hd(-3, 1, -1, 5), H(7, 0, -2, 0)):
            assert HurwitzInt.parse(str(x)) == x

    def test_parse_rejects_garbage(self):
        for bad in ("", "1+", "i+i", "1/3", "2x", "++1"):
            with pytest.raises(ValidationError):
                HurwitzInt.parse(bad)

    def test_overflow_guard(self):
        big = 1 << 62
        with pytest.raises(OverflowError):
            H(big, 0, 0, 0)


# ---------------------------------------------------------------------------
# ring structure (frozen small cases)
# ---------------------------------------------------------------------------

class TestRingBasics:
    def test_quaternion_table(self):
        assert I * J == K
        assert J * I == -K
        assert J * K == I
        assert K * I == J
        assert I * I == -ONE
        assert I * J * K == -ONE

    def test_omega_is_sixth_root_shifted(self):
        # omega^2 = omega - 1, so omega satisfies x^2 - x + 1.
        assert OMEGA * OMEGA == OMEGA - ONE
        assert OMEGA.norm_sq() == 1

    def test_norm_two_factorisation(self):
        one_i = H(1, 1, 0, 0)
        assert one_i * H(1, -1, 0, 0) == H(2, 0, 0, 0)
        assert one_i.norm_sq() == 2

    def test_units(self):
        assert len(UNITS) == 24
        assert len(set(UNITS)) == 24
        assert all(u.norm_sq() == 1 for u in UNITS)
        assert all(u.is_unit() for u in UNITS)
        assert not H(1, 1, 0, 0).is_unit()

    def test_int_scalar_mul(self):
        assert 3 * OMEGA == OMEGA * 3 == Hd(3, 3, 3, 3)


# ---------------------------------------------------------------------------
# division with remainder
# ---------------------------------------------------------------------------

class TestDivision:
    def test_simple_right(self):
        q, r = div_rem_right(H(7, 0, 0, 0), H(2, 1, 0, 0))
        assert (q, r) == (H(3, -1, 0, 0), H(0, -1, 0, 0))

    def test_exact_right(self):
        q, r = div_rem_right(H(3, 3, -1, 1), H(3, 0, 0, 1))
        assert r == ZERO
        assert q == H(1, 1, 0, 0)

    def test_tie_is_deterministic(self):
        # 1/(1+i) has all four coordinate gaps exactly 1/2; the lex-smallest
        # doubled nearest point must be chosen every run.
        q, r = div_rem_right(ONE, H(1, 1, 0, 0))
        assert (q, r) == (H(0, -1, 0, 0), H(0, 1, 0, 0))

    def test_half_coords(self):
        q, r = div_rem_right(OMEGA, ONE)
        assert (q, r) == (OMEGA, ZERO)

    def test_remainder_strictly_smaller(self):
        xs = [H(5, -3, 2, 7), Hd(9, 1, -3, 5), H(0, 4, 0, -6), OMEGA * 5]
        ys = [H(1, 1, 0, 0), H(2, 1, 0, 0), OMEGA, H(3, 0, 0, 1)]
        for x in xs:
            for y in ys:
                q, r = div_rem_right(x, y)
                assert x == q * y + r
                assert r.norm_sq() < y.norm_sq()
                ql, rl = div_rem_left(x, y)
                assert x == y * ql + rl
                assert rl.norm_sq() < y.norm_sq()

    def test_zero_divisor_rejected(self):
        with pytest.raises(ValidationError):
            div_rem_right(ONE, ZERO)


class TestGcd:
    def test_gcd_right_ramified(self):
        g = gcd_right(H(1, 1, 0, 0), H(2, 0, 0, 0))
        assert g.norm_sq() == 2

    def test_gcd_right_coprime(self):
        g = gcd_right(H(2, 1, 0, 0), H(3, 0, 0, 0))
        assert g.norm_sq() == 1

    def test_gcd_left_unit_invariance(self):
        # A right gcd is unchanged (after canonicalisation) when both
        # inputs are scaled by the same unit on the left.
        x, y = H(4, 2, 0, 2), H(2, -2, 2, 0)
        g = gcd_right(x, y)
        for u in UNITS[:6]:
            assert gcd_right(u * x, u * y) == g

    def test_gcd_swap(self):
        x, y = H(4, 2, 0, 2), H(2, -2, 2, 0)
        assert gcd_right(x, y) == gcd_right(y, x)

    def test_gcd_zero_cases(self):
        assert gcd_right(H(3, 1, 0, 0), ZERO).norm_sq() == H(3, 1, 0, 0).norm_sq()
        with pytest.raises(ValidationError):
            gcd_right(ZERO, ZERO)

    def test_exact_right_div(self):
        x = H(1, 1, 0, 0) * H(2, 1, 1, 0)
        assert exact_right_div(x, H(2, 1, 1, 0)) == H(1, 1, 0, 0)
        with pytest.raises(ValidationError):
            exact_right_div(ONE, H(1, 1, 0, 0))

    def test_gcd_left_basic(self):
        # 2 = (1+i)(1-i), so 1+i divides 2 on the left.
        assert gcd_left(H(1, 1, 0, 0), H(2, 0, 0, 0)).norm_sq() == 2
        # 2 left-divides 2i outright (2i = 2*i).
        assert gcd_left(H(2, 0, 0, 0), H(0, 2, 0, 0)).norm_sq() == 4


class TestPrimality:
    def test_small_cases(self):
        assert is_prime(H(1, 1, 0, 0))
        assert not is_prime(H(2, 0, 0, 0))
        assert not is_prime(OMEGA)
        assert is_prime(H(1, 1, 1, 0))
        assert is_prime(Hd(3, 1, 1, 1))
        assert not is_prime(H(2, 1, 0, 0) * H(1, 1, 1, 0))


# ---------------------------------------------------------------------------
# enumeration by norm
# ---------------------------------------------------------------------------

class TestEnumeration:
    def test_frozen_counts(self):
        assert len(enumerate_by_norm(1)) == 24
        assert len(enumerate_by_norm(1, order="lipschitz")) == 8
        assert len(enumerate_by_norm(2)) == 24
        assert len(enumerate_by_norm(3)) == 96
        assert len(enumerate_by_norm(4)) == 24

    def test_count_formulas_match(self):
        from sympy import divisors

        for m in range(1, 61):
            assert (
                len(enumerate_by_norm(m, order="lipschitz"))
                == lipschitz_count_formula(m)
            )
            sigma_odd = sum(d for d in divisors(m) if d % 2 == 1)
            assert len(enumerate_by_norm(m)) == 24 * sigma_odd

    def test_sorted_and_unique(self):
        xs = enumerate_by_norm(5)
        keys = [x.sort_key() for x in xs]
        assert keys == sorted(keys)
        assert len(set(xs)) == len(xs)
        assert all(x.norm_sq() == 5 for x in xs)

    def test_norm_one_is_units(self):
        assert set(enumerate_by_norm(1)) == set(UNITS)

    def test_bad_norm(self):
        with pytest.raises(ValidationError):
            enumerate_by_norm(0)


# ---------------------------------------------------------------------------
# fractional part / fundamental domain
# ---------------------------------------------------------------------------

class TestFractionalPart:
    def test_plain_floor(self):
        frac, lat = fractional_part(RealQuaternion(1.25, 0.5, 0.75, 0.6))
        assert lat == Hd(1, 1, 1, 1)
        assert frac.coords == pytest.approx((0.75, 0.0, 0.25, 0.1))

    def test_already_reduced(self):
        frac, lat = fractional_part(RealQuaternion(0.25, 0.5, 0.75, 0.3))
        assert lat == ZERO
        assert frac.coords == (0.25, 0.5, 0.75, 0.3)

    def test_needs_half_shift(self):
        frac, lat = fractional_part(RealQuaternion(0.25, 0.5, 0.75, 0.8))
        assert frac.in_delta()
        assert lat.doubled[3] % 2 == 1  # half-odd shift engaged
        x = RealQuaternion(0.25, 0.5, 0.75, 0.8)
        rebuilt = tuple(f + l for f, l in zip(frac.coords, lat.to_floats()))
        assert rebuilt == pytest.approx(x.coords)

    def test_random_property(self):
        import random

        rnd = random.Random(20260815)
        for _ in range(500):
            x = RealQuaternion(*(rnd.uniform(-8, 8) for _ in range(4)))
            frac, lat = fractional_part(x)
            assert frac.in_delta()
            rebuilt = tuple(f + l for f, l in zip(frac.coords, lat.to_floats()))
            assert rebuilt == pytest.approx(x.coords, abs=1e-12)


# ---------------------------------------------------------------------------
# rational quaternions / separation
# ---------------------------------------------------------------------------

class TestRational:
    def test_value_coords(self):
        v = HurwitzRational(H(1, 1, 0, 0), H(1, 0, 1, 0)).value()
        assert v.coords == (
            Fraction(1, 2),
            Fraction(1, 2),
            Fraction(-1, 2),
            Fraction(-1, 2),
        )

    def test_reduced_keeps_value(self):
        x = HurwitzRational(H(2, 2, 0, 0), H(2, 0, 0, 0))
        r = x.reduced()
        assert r.value() == x.value()
        assert r.q.norm_sq() < x.q.norm_sq()

    def test_parse_round_trip(self):
        x = HurwitzRational(H(1, -2, 0, 3), OMEGA * 3)
        assert HurwitzRational.parse(str(x)) == x

    def test_to_rational(self):
        v = to_rational(HurwitzRational(H(1, 1, 0, 0), H(2, 0, 0, 0)))
        assert v.coords == (Fraction(1, 2), Fraction(1, 2), 0, 0)

    def test_zero_denominator(self):
        with pytest.raises(ValidationError):
            HurwitzRational(ONE, ZERO)


class TestSeparation:
    def test_distinct_integers(self):
        g2 = separation_gap(
            HurwitzRational(ONE, ONE), HurwitzRational(H(2, 0, 0, 0), ONE)
        )
        assert g2 == 1

    def test_frozen_half_gap(self):
        # (1+i)*2^-1 = (1/2, 1/2, 0, 0) and 1*(1+i)^-1 = (1/2, -1/2, 0, 0):
        # the gap is exactly 1, comfortably above the bound 1/(2*2).
        a = HurwitzRational(H(1, 1, 0, 0), H(2, 0, 0, 0))
        b = HurwitzRational(ONE, H(1, 1, 0, 0))
        g2 = separation_gap(a, b)
        assert g2 == 1
        assert g2 >= Fraction(1, a.q.norm_sq() * b.q.norm_sq())

    def test_unit_denominators_attain_bound(self):
        g2 = separation_gap(
            HurwitzRational(ZERO, ONE), HurwitzRational(ONE, ONE)
        )
        assert g2 == 1 == Fraction(1, 1 * 1)

    def test_equal_values_rejected(self):
        # (1+i)*2^-1 and 1*(1-i)^-1 are the same point written two ways.
        a = HurwitzRational(H(1, 1, 0, 0), H(2, 0, 0, 0))
        b = HurwitzRational(ONE, H(1, -1, 0, 0))
        assert a.value() == b.value()
        with pytest.raises(ValidationError):
            separation_gap(a, b)

    def test_exhaustive_small_norms(self):
        # Every pair of distinct values p*q^-1 with norm_sq(q) <= 5 obeys
        # gap^2 >= 1/(n1*n2); the checked set is generated from division
        # ladders to keep it small but adversarial.
        vals = []
        for nq in range(1, 6):
            for q in enumerate_by_norm(nq)[:4]:
                for p in (ZERO, ONE, I, OMEGA, H(1, 1, 0, 0)):
                    vals.append(HurwitzRational(p, q))
        seen = {}
        for x in vals:
            seen.setdefault(x.value(), x)
        uniq = list(seen.values())
        for i, a in enumerate(uniq):
            for b in uniq[i + 1:]:
                g2 = separation_gap(a, b)
                assert g2 >= Fraction(
                    1, a.q.norm_sq() * b.q.norm_sq()
                )


# ---------------------------------------------------------------------------
# algebraic laws (randomised)
# ---------------------------------------------------------------------------

doubled_pair = st.integers(min_value=-40, max_value=40)


@st.composite
def hurwitz_ints(draw):
    parity = draw(st.booleans())
    vals = [draw(doubled_pair) for _ in range(4)]
    coords = [2 * v + (1 if parity else 0) for v in vals]
    return HurwitzInt.from_doubled(*coords)


@st.composite
def nonzero_hurwitz_ints(draw):
    x = draw(hurwitz_ints())
    if x.is_zero():
        x = x + ONE
    return x


class TestAlgebraicLaws:
    @given(hurwitz_ints(), hurwitz_ints(), hurwitz_ints())
    def test_mul_associative(self, x, y, z):
        assert (x * y) * z == x * (y * z)

    @given(hurwitz_ints(), hurwitz_ints(), hurwitz_ints())
    def test_distributive(self, x, y, z):
        assert x * (y + z) == x * y + x * z
        assert (y + z) * x == y * x + z * x

    @given(hurwitz_ints())
    def test_identity_and_negation(self, x):
        assert x * ONE == ONE * x == x
        assert x + (-x) == ZERO

    @given(hurwitz_ints(), hurwitz_ints())
    def test_norm_multiplicative(self, x, y):
        assert (x * y).norm_sq() == x.norm_sq() * y.norm_sq()

    @given(hurwitz_ints(), hurwitz_ints())
    def test_conjugate_antihomomorphism(self, x, y):
        assert (x * y).conjugate() == y.conjugate() * x.conjugate()
        assert x * x.conjugate() == HurwitzInt(x.norm_sq(), 0, 0, 0)

    @given(hurwitz_ints(), nonzero_hurwitz_ints())
    @settings(max_examples=200)
    def test_div_rem_reconstruction(self, x, y):
        q, r = div_rem_right(x, y)
        assert x == q * y + r
        assert r.norm_sq() < y.norm_sq()
        ql, rl = div_rem_left(x, y)
        assert x == y * ql + rl
        assert rl.norm_sq() < y.norm_sq()

    @given(nonzero_hurwitz_ints(), nonzero_hurwitz_ints())
    @settings(max_examples=100)
    def test_gcd_divides_both(self, x, y):
        g = gcd_right(x, y)
        assert div_rem_right(x, g)[1] == ZERO
        assert div_rem_right(y, g)[1] == ZERO
