"""Core p-adic arithmetic: canonical form, precision accounting, norms."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from padic_potts.padic import (
    MixedPrimeError,
    PadicError,
    PadicNorm,
    PadicNumber,
    PrecisionExhaustedError,
    equal_to_precision,
    is_prime,
    parse_rational,
)

from oracles import rational_digits


def test_from_rational_zero():
    z = PadicNumber.from_rational(0, 1, 3, 6)
    assert z.zero
    assert z.norm().is_zero


def test_from_rational_prime_itself():
    x = PadicNumber.from_rational(3, 1, 3, 6)
    assert x.v == 1 and x.unit == 1
    assert x.norm() == Fraction(1, 3)


def test_from_rational_five_thirds():
    x = PadicNumber.from_rational(5, 3, 3, 6)
    assert x.v == -1
    assert x.digits(6) == [2, 1, 0, 0, 0, 0]
    assert x.norm() == 3
    v, digs = rational_digits(5, 3, 3, 6)
    assert (v, digs) == (x.v, x.digits(6))


def test_from_rational_matches_oracle_random():
    rng = random.Random(0)
    for _ in range(300):
        p = rng.choice([2, 3, 5, 7, 13])
        num = rng.randint(-500, 500)
        den = rng.randint(1, 500)
        if num == 0:
            continue
        x = PadicNumber.from_rational(num, den, p, 10)
        v, digs = rational_digits(num, den, p, 10)
        assert x.v == v and x.digits(10) == digs


def test_rejects_bad_inputs():
    with pytest.raises(PadicError):
        PadicNumber.from_rational(1, 0, 3, 6)
    with pytest.raises(PadicError):
        PadicNumber.from_rational(1, 2, 4, 6)
    with pytest.raises(PadicError):
        PadicNumber.from_rational(1, 2, 3, 0)


def test_add_identity_and_valuation_additivity():
    x = PadicNumber.from_rational(7, 2, 5, 8)
    zero = PadicNumber.make_zero(5, 8)
    assert (x + zero) == x
    three = PadicNumber.from_int(3, 3, 8)
    sq = three * three
    assert sq.v == 2 and sq.unit == 1


def test_add_digit_expansion():
    one = PadicNumber.from_int(1, 5, 6)
    p2 = PadicNumber.from_int(25, 5, 6)
    s = one + p2
    assert s.v == 0
    assert s.digits(6) == [1, 0, 1, 0, 0, 0]


def test_add_cancellation_reduces_precision():
    x = PadicNumber.from_int(1 + 3**4, 3, 8)
    y = -PadicNumber.from_int(1, 3, 8)
    s = x + y
    assert s.v == 4
    assert s.prec == 4  # 8 tracked digits, 4 cancelled


def test_add_full_cancellation_is_exhausted_not_zero():
    x = PadicNumber.from_int(7, 3, 6)
    s = x + (-x)
    assert s.exhausted and not s.zero
    assert s.v == 6  # |s|_3 <= 3^-6 certified
    with pytest.raises(PrecisionExhaustedError):
        s.norm()
    with pytest.raises(PrecisionExhaustedError):
        _ = PadicNumber.from_int(1, 3, 6) / s


def test_division_by_exact_zero():
    with pytest.raises(PadicError):
        _ = PadicNumber.from_int(1, 3, 6) / PadicNumber.make_zero(3, 6)


def test_mixed_primes_rejected():
    with pytest.raises(MixedPrimeError):
        _ = PadicNumber.from_int(1, 3, 6) + PadicNumber.from_int(1, 5, 6)


def test_norm_of_units_and_zero():
    assert PadicNumber.from_int(-1, 7, 6).norm() == 1
    assert PadicNumber.make_zero(7, 6).norm().is_zero
    assert PadicNumber.from_rational(5, 3, 3, 6).norm() == 3


def test_digits_beyond_precision_rejected():
    x = PadicNumber.from_int(7, 3, 4)
    with pytest.raises(PrecisionExhaustedError):
        x.digits(5)


def test_equal_to_precision_basic():
    p = 3
    x = PadicNumber.from_int(10, p, 8)
    assert equal_to_precision(x, x, 8)
    m = 5
    y = PadicNumber.from_int(1 + p**m, p, 8)
    one = PadicNumber.one(p, 8)
    assert equal_to_precision(one, y, m)
    y2 = PadicNumber.from_int(1 + p ** (m - 1), p, 8)
    assert not equal_to_precision(one, y2, m)


def test_pow_and_division_roundtrip():
    x = PadicNumber.from_rational(7, 9, 5, 10)
    y = x**3
    assert y.v == 3 * x.v
    back = y / (x * x)
    assert equal_to_precision(back, x, 9)
    inv = x**-1
    assert equal_to_precision(inv * x, PadicNumber.one(5, 10), 9)


def test_ultrametric_inequality_random():
    rng = random.Random(1)
    for _ in range(500):
        p = rng.choice([2, 3, 5, 7])
        a = rng.randint(-10**6, 10**6)
        b = rng.randint(1, 10**4)
        c = rng.randint(-10**6, 10**6)
        d = rng.randint(1, 10**4)
        if a == 0 or c == 0 or a * d + c * b == 0:
            continue
        x = PadicNumber.from_rational(a, b, p, 24)
        y = PadicNumber.from_rational(c, d, p, 24)
        s = x + y
        lhs = s.norm_upper_bound().as_fraction()
        nx, ny = x.norm().as_fraction(), y.norm().as_fraction()
        assert lhs <= max(nx, ny)
        if nx != ny:
            assert not s.is_zeroish
            assert s.norm().as_fraction() == max(nx, ny)


def test_norm_multiplicativity_random():
    rng = random.Random(2)
    for _ in range(500):
        p = rng.choice([2, 3, 5, 7])
        a, b = rng.randint(1, 10**6), rng.randint(1, 10**4)
        c, d = rng.randint(1, 10**6), rng.randint(1, 10**4)
        x = PadicNumber.from_rational(a, b, p, 20)
        y = PadicNumber.from_rational(c, d, p, 20)
        assert (x * y).norm() == x.norm() * y.norm()


def test_canonical_round_trip():
    rng = random.Random(3)
    for _ in range(200):
        p = rng.choice([2, 3, 5])
        num = rng.randint(-10**5, 10**5) or 1
        den = rng.randint(1, 10**4)
        x = PadicNumber.from_rational(num, den, p, 12)
        rebuilt = sum(d * p**i for i, d in enumerate(x.digits(12)))
        y = PadicNumber(p, x.v, rebuilt, 12) if rebuilt % p else None
        assert y is not None  # x0 > 0 by canonical form
        assert equal_to_precision(x, y, 12)


def test_rational_consistency():
    # arithmetic, then one conversion == convert, then arithmetic
    rng = random.Random(4)
    for _ in range(200):
        p = rng.choice([3, 5, 7])
        fa = Fraction(rng.randint(-99, 99) or 1, rng.randint(1, 99))
        fb = Fraction(rng.randint(-99, 99) or 1, rng.randint(1, 99))
        xa = PadicNumber.from_rational(fa.numerator, fa.denominator, p, 16)
        xb = PadicNumber.from_rational(fb.numerator, fb.denominator, p, 16)
        for op, fop in ((xa + xb, fa + fb), (xa * xb, fa * fb), (xa - xb, fa - fb)):
            if fop == 0:
                assert op.is_zeroish
                continue
            direct = PadicNumber.from_rational(fop.numerator, fop.denominator, p, 16)
            assert equal_to_precision(op, direct, min(op.prec, 12))


def test_norm_total_order_and_multiplication():
    a = PadicNorm(3, 2)
    b = PadicNorm(3, -1)
    z = PadicNorm.zero(3)
    assert z < a < b
    assert a * b == PadicNorm(3, 1)
    assert (a * z).is_zero
    assert a <= Fraction(1, 9) and b == 3


def test_rendering_and_json():
    x = PadicNumber.from_rational(5, 3, 3, 6)
    assert str(x) == "3^-1 * (2 + 1*3) [prec 6]"
    assert x.digit_str() == "2 1 0 0 0 0"
    d = x.to_json_dict()
    assert d == {"p": 3, "v": -1, "digits": [2, 1, 0, 0, 0, 0], "precision": 6, "zero": False}
    z = PadicNumber.make_zero(3, 6)
    assert z.to_json_dict()["zero"] is True
    e = PadicNumber.make_exhausted(3, 9)
    assert e.to_json_dict()["exhausted"] is True
    assert str(e) == "O(3^9)"


def test_parse_rational():
    assert parse_rational("3") == (3, 1)
    assert parse_rational("-5/9") == (-5, 9)
    with pytest.raises(PadicError):
        parse_rational("1/0")


def test_is_prime():
    assert [n for n in range(2, 30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert is_prime(2**31 - 1)
    assert not is_prime(2**31)


def test_with_abs_prec():
    x = PadicNumber.from_int(1 + 3 + 9, 3, 10)
    t = x.with_abs_prec(2)
    assert t.prec == 2 and t.digits(2) == [1, 1]
    gone = x.with_abs_prec(0)
    assert gone.exhausted and gone.v == 0


def test_tracked_precision_never_overstated():
    # differential soundness: random op chains at low precision, mirrored
    # on exact Fractions; the claimed absolute precision must always hold
    rng = random.Random(6)
    for _ in range(400):
        p = rng.choice([2, 3, 5, 7])
        depth = rng.randrange(2, 8)
        frac = Fraction(rng.randint(-40, 40) or 1, rng.randint(1, 40))
        x = PadicNumber.from_rational(frac.numerator, frac.denominator, p, 6)
        for _ in range(depth):
            g = Fraction(rng.randint(-40, 40) or 1, rng.randint(1, 40))
            y = PadicNumber.from_rational(g.numerator, g.denominator, p, 6)
            op = rng.choice("+-*/e")
            if op == "+":
                x, frac = x + y, frac + g
            elif op == "-":
                x, frac = x - y, frac - g
            elif op == "*":
                x, frac = x * y, frac * g
            elif op == "/":
                x, frac = x / y, frac / g
            else:
                n = rng.randrange(0, 4)
                x, frac = x**n, frac**n
            if x.is_zeroish:
                break
        if x.zero:
            assert frac == 0
            continue
        if x.exhausted:
            # |true value| must respect the certified bound
            if frac != 0:
                assert _vp(frac, p) >= x.v
            continue
        assert frac != 0
        assert _vp(frac, p) == x.v
        # unit digits agree with the exact value modulo p^prec
        mod = p**x.prec
        fu = frac / Fraction(p) ** x.v
        want = fu.numerator * pow(fu.denominator, -1, mod) % mod
        assert x.unit == want


def _vp(frac: Fraction, p: int) -> int:
    v = 0
    n = frac.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = frac.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v
