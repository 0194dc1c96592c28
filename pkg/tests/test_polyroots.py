import random
from fractions import Fraction as F

from growthcert.intervals import RationalInterval
from growthcert.polyroots import (
    cauchy_bound,
    certified_root_structure,
    count_real_roots,
    isolate_real_roots,
    modulus_enclosures,
    poly_div_exact,
    poly_eval,
    poly_from,
    poly_gcd,
    poly_mul,
    rational_roots,
    refine_real_root,
    squarefree_part,
    sturm_chain,
    yun_decomposition,
)


def _poly_with_roots(roots):
    f = poly_from([F(1)])
    for r in roots:
        f = poly_mul(f, poly_from([-r, F(1)]))
    return f


def test_poly_eval_and_div():
    f = poly_from([F(1), F(-3), F(2)])  # 2x^2 - 3x + 1
    assert poly_eval(f, F(1)) == 0
    assert poly_eval(f, F(1, 2)) == 0
    assert poly_eval(f, F(0)) == 1
    g = poly_from([F(-1), F(1)])  # x - 1
    q = poly_div_exact(f, g)
    assert poly_mul(q, g) == f


def test_gcd_and_squarefree():
    f = _poly_with_roots([F(1), F(1), F(2)])
    g = _poly_with_roots([F(1), F(3)])
    gcd = poly_gcd(f, g)
    assert rational_roots(gcd) == [F(1)]
    sf = squarefree_part(f)
    assert sorted(rational_roots(sf)) == [F(1), F(2)]
    assert squarefree_part(sf) == sf


def test_yun_decomposition_reconstructs():
    rng = random.Random(13)
    for _ in range(25):
        roots = [F(rng.randint(-4, 4)) for _ in range(rng.randint(1, 3))]
        mults = [rng.randint(1, 3) for _ in roots]
        f = poly_from([F(1)])
        for r, m in zip(roots, mults):
            for _ in range(m):
                f = poly_mul(f, poly_from([-r, F(1)]))
        prod = poly_from([F(1)])
        for part, mult in yun_decomposition(f):
            for _ in range(mult):
                prod = poly_mul(prod, part)
        assert prod == f


def test_rational_roots_exhaustive():
    rng = random.Random(37)
    for _ in range(50):
        roots = sorted(
            set(F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(3))
        )
        f = _poly_with_roots(roots)
        # scale by an integer: roots must be unchanged
        f = tuple(3 * c for c in f)
        assert sorted(rational_roots(f)) == roots


def test_rational_roots_skips_irrational():
    f = poly_from([F(-2), F(0), F(1)])  # x^2 - 2
    assert rational_roots(f) == []


def test_cauchy_bound_dominates_roots():
    roots = [F(5), F(-7), F(1, 2)]
    f = _poly_with_roots(roots)
    bound = cauchy_bound(f)
    assert all(abs(r) <= bound for r in roots)


def test_sturm_counts():
    f = _poly_with_roots([F(-1), F(0), F(3)])
    chain = sturm_chain(f)
    assert count_real_roots(f, F(-10), F(10), chain) == 3
    assert count_real_roots(f, F(1, 2), F(10), chain) == 1
    assert count_real_roots(f, F(4), F(10), chain) == 0


def test_isolate_and_refine():
    roots = [F(-3, 2), F(1, 3), F(2)]
    f = _poly_with_roots(roots)
    ivs = isolate_real_roots(f)
    assert len(ivs) == 3
    for iv, r in zip(sorted(ivs, key=lambda i: i.lo), roots):
        tight = refine_real_root(f, iv, F(1, 2**30))
        assert tight.contains(r)
        assert tight.hi - tight.lo <= F(1, 2**30)


def test_certified_root_structure_real_only():
    roots = [F(-2), F(1, 2), F(4)]
    f = _poly_with_roots(roots)
    real_ivs, boxes = certified_root_structure(f, F(1, 2**20))
    assert boxes == []
    assert len(real_ivs) == 3
    for iv, r in zip(sorted(real_ivs, key=lambda i: i.lo), roots):
        assert iv.contains(r)


def test_certified_root_structure_complex():
    # (x^2 + 1)(x - 2): one real root, one conjugate pair
    f = poly_mul(poly_from([F(1), F(0), F(1)]), poly_from([F(-2), F(1)]))
    real_ivs, boxes = certified_root_structure(f, F(1, 2**16))
    assert len(real_ivs) == 1 and real_ivs[0].contains(F(2))
    assert len(boxes) == 2
    assert any(b.contains(F(0), F(1)) for b in boxes)
    assert any(b.contains(F(0), F(-1)) for b in boxes)


def test_modulus_enclosures_contain_true_moduli():
    f = poly_mul(poly_from([F(1), F(0), F(1)]), poly_from([F(-3), F(1)]))
    encls = modulus_enclosures(f, F(1, 2**12))
    assert len(encls) == 3
    hits_one = sum(1 for e in encls if e.contains(F(1)))
    hits_three = sum(1 for e in encls if e.contains(F(3)))
    assert hits_one == 2 and hits_three == 1


def test_modulus_enclosures_random_rational_roots():
    rng = random.Random(71)
    for _ in range(20):
        roots = sorted(set(F(rng.randint(-8, 8), rng.randint(1, 3)) for _ in range(3)))
        f = _poly_with_roots(roots)
        encls = modulus_enclosures(f, F(1, 2**16))
        assert len(encls) == len(roots)
        moduli = sorted(abs(r) for r in roots)
        for enc, m in zip(sorted(encls, key=lambda e: e.lo), moduli):
            assert enc.contains(m)
