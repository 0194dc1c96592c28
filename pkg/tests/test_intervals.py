import random
from fractions import Fraction as F

import pytest

from growthcert.errors import SingularEnclosure
from growthcert.exactnum import SquareMatrix
from growthcert.intervals import (
    ComplexInterval,
    RationalInterval,
    cmat_contains_exact,
    cmat_det_small,
    cmat_from_exact,
    cmat_identity,
    cmat_inverse,
    cmat_mul,
    cmat_sub,
    dyadic_ceil,
    dyadic_floor,
    sqrt_lower,
    sqrt_upper,
)

M = SquareMatrix.from_rows


def test_dyadic_bracketing():
    rng = random.Random(3)
    for _ in range(200):
        x = F(rng.randint(-10**6, 10**6), rng.randint(1, 10**6))
        lo, hi = dyadic_floor(x, 20), dyadic_ceil(x, 20)
        assert lo <= x <= hi
        assert hi - lo <= 4 * abs(x) * F(1, 2**20)  # ~20 significant bits
        assert lo.denominator & (lo.denominator - 1) == 0  # power of two


def test_sqrt_bounds():
    assert sqrt_lower(F(4)) == 2
    assert sqrt_upper(F(4)) == 2
    rng = random.Random(17)
    for _ in range(100):
        x = F(rng.randint(0, 10**8), rng.randint(1, 10**4))
        lo, hi = sqrt_lower(x, 48), sqrt_upper(x, 48)
        assert lo * lo <= x <= hi * hi
        assert hi - lo <= F(1, 2**40)


def test_rational_interval_arithmetic():
    a = RationalInterval(F(1), F(2))
    b = RationalInterval(F(-3), F(-1))
    assert (a + b) == RationalInterval(F(-2), F(1))
    assert (a * b) == RationalInterval(F(-6), F(-1))
    assert a.contains(F(3, 2))
    assert not a.contains(F(3))
    assert RationalInterval(F(-1), F(1)).contains_zero()
    with pytest.raises(ValueError):
        RationalInterval(F(2), F(1))


def test_rational_interval_containment_is_preserved():
    # interval arithmetic must contain the corresponding exact arithmetic
    rng = random.Random(29)
    for _ in range(150):
        x = F(rng.randint(-50, 50), rng.randint(1, 20))
        y = F(rng.randint(-50, 50), rng.randint(1, 20))
        ix = RationalInterval(x - F(1, 64), x + F(1, 64))
        iy = RationalInterval(y - F(1, 64), y + F(1, 64))
        assert (ix + iy).contains(x + y)
        assert (ix * iy).contains(x * y)
        assert ix.pow_int(3).contains(x**3)


def test_complex_interval_mag():
    z = ComplexInterval.point(F(3), F(4))
    m = z.mag(64)
    assert m.contains(F(5))
    assert m.hi - m.lo <= F(1, 2**48)
    zero = ComplexInterval.point(F(0))
    assert zero.mag().lo == 0


def test_complex_interval_products_contain_truth():
    rng = random.Random(41)
    for _ in range(100):
        a_re, a_im = F(rng.randint(-9, 9), 4), F(rng.randint(-9, 9), 4)
        b_re, b_im = F(rng.randint(-9, 9), 4), F(rng.randint(-9, 9), 4)
        za = ComplexInterval.point(a_re, a_im)
        zb = ComplexInterval.point(b_re, b_im)
        prod = za * zb
        assert prod.contains(a_re * b_re - a_im * b_im, a_re * b_im + a_im * b_re)
        assert (za + zb).contains(a_re + b_re, a_im + b_im)
        assert za.pow_int(4).contains(
            (a_re**2 - a_im**2) ** 2 - (2 * a_re * a_im) ** 2,
            2 * (a_re**2 - a_im**2) * (2 * a_re * a_im),
        )


def test_cmat_mul_matches_exact():
    rng = random.Random(53)
    for _ in range(30):
        a = M([[rng.randint(-5, 5) for _ in range(3)] for _ in range(3)])
        b = M([[rng.randint(-5, 5) for _ in range(3)] for _ in range(3)])
        prod = cmat_mul(cmat_from_exact(a), cmat_from_exact(b))
        assert cmat_contains_exact(prod, a * b)


def test_cmat_det_small_contains_exact_det():
    rng = random.Random(59)
    for _ in range(30):
        a = M([[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)])
        det = cmat_det_small(cmat_from_exact(a))
        assert det.contains(a.det())


def test_cmat_inverse_contains_exact_inverse():
    rng = random.Random(61)
    done = 0
    while done < 20:
        a = M([[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)])
        if a.det() == 0:
            continue
        inv = cmat_inverse(cmat_from_exact(a), round_bits=256)
        assert cmat_contains_exact(inv, a.inverse())
        prod = cmat_mul(cmat_from_exact(a), inv)
        assert cmat_contains_exact(prod, SquareMatrix.identity(3))
        done += 1


def test_cmat_inverse_rejects_singular():
    singular = M([[1, 2], [2, 4]])
    with pytest.raises(SingularEnclosure):
        cmat_inverse(cmat_from_exact(singular))


def test_cmat_sub_identity():
    a = cmat_from_exact(M([[1, 2], [3, 4]]))
    z = cmat_sub(a, a)
    assert cmat_contains_exact(z, M([[0, 0], [0, 0]]))
    assert cmat_contains_exact(cmat_identity(2), SquareMatrix.identity(2))
