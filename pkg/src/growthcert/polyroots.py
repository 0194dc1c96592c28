"""Exact polynomial arithmetic over Q and certified root enclosures.

Polynomials are tuples of Fractions, ascending degree, trimmed.  Real roots
are isolated and refined with exact Sturm sequences.  Non-real roots get
axis-aligned boxes: floating seeds from mpmath.polyroots are promoted to
exact rational centers, then Weierstrass correction terms W_i computed in
exact arithmetic give inclusion disks of radius n|W_i| whose union contains
every root, with k-disk connected components containing exactly k roots.
Every containment decision below is an exact rational comparison.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .errors import PrecisionExhausted
from .intervals import ComplexInterval, RationalInterval, sqrt_upper

Poly = tuple[Fraction, ...]


def poly_from(coeffs) -> Poly:
    """Ascending coefficients, trimmed of leading zeros."""
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def poly_degree(f: Poly) -> int:
    return len(f) - 1


def poly_eval(f: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(f):
        acc = acc * x + c
    return acc


def poly_eval_complex(f: Poly, z: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    """Horner over exact complex rationals represented as (re, im)."""
    re, im = Fraction(0), Fraction(0)
    zr, zi = z
    for c in reversed(f):
        re, im = re * zr - im * zi + c, re * zi + im * zr
    return re, im


def poly_deriv(f: Poly) -> Poly:
    return poly_from(i * c for i, c in enumerate(f) if i > 0)


def poly_add(f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    fs = list(f) + [Fraction(0)] * (n - len(f))
    gs = list(g) + [Fraction(0)] * (n - len(g))
    return poly_from(a + b for a, b in zip(fs, gs))


def poly_neg(f: Poly) -> Poly:
    return tuple(-c for c in f)


def poly_scale(f: Poly, c: Fraction) -> Poly:
    return poly_from(Fraction(c) * x for x in f)


def poly_mul(f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ()
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly_from(out)


def poly_divmod(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(f)
    quo = [Fraction(0)] * max(0, len(f) - len(g) + 1)
    dg, lead = len(g) - 1, g[-1]
    while len(rem) - 1 >= dg and any(rem):
        while rem and rem[-1] == 0:
            rem.pop()
        if len(rem) - 1 < dg:
            break
        shift = len(rem) - 1 - dg
        factor = rem[-1] / lead
        quo[shift] = factor
        for i, c in enumerate(g):
            rem[shift + i] -= factor * c
    return poly_from(quo), poly_from(rem)


def poly_div_exact(f: Poly, g: Poly) -> Poly:
    q, r = poly_divmod(f, g)
    if r:
        raise ValueError("division is not exact")
    return q


def poly_monic(f: Poly) -> Poly:
    if not f:
        return f
    return poly_scale(f, 1 / f[-1])


def poly_gcd(f: Poly, g: Poly) -> Poly:
    a, b = f, g
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return ()
    return poly_monic(a)


def squarefree_part(f: Poly) -> Poly:
    """f / gcd(f, f'), monic; same distinct roots, all simple."""
    if poly_degree(f) <= 0:
        return poly_monic(f)
    g = poly_gcd(f, poly_deriv(f))
    if poly_degree(g) == 0:
        return poly_monic(f)
    return poly_monic(poly_div_exact(f, g))


def yun_decomposition(f: Poly) -> list[tuple[Poly, int]]:
    """Squarefree factorization f = prod a_i^i (char 0, Yun's algorithm)."""
    f = poly_monic(f)
    if poly_degree(f) <= 0:
        return []
    d = poly_deriv(f)
    g = poly_gcd(f, d)
    if poly_degree(g) == 0:
        return [(f, 1)]
    out = []
    c = poly_div_exact(f, g)
    w = poly_add(poly_div_exact(d, g), poly_neg(poly_deriv(c)))
    i = 1
    while poly_degree(c) > 0:
        a = poly_gcd(c, w)
        if poly_degree(a) > 0:
            out.append((poly_monic(a), i))
        c = poly_div_exact(c, a)
        w = poly_add(poly_div_exact(w, a), poly_neg(poly_deriv(c)))
        i += 1
        if i > poly_degree(f) + 1:
            raise AssertionError("Yun decomposition failed to terminate")
    return out


def cauchy_bound(f: Poly) -> Fraction:
    """Strict bound: every root z has |z| < the returned value."""
    if poly_degree(f) < 1:
        raise ValueError("need degree >= 1")
    lead = abs(f[-1])
    return 1 + max(abs(c) / lead for c in f[:-1])


# ---------------------------------------------------------------------------
# Sturm sequences (real roots, exact)


def sturm_chain(f: Poly) -> list[Poly]:
    chain = [f, poly_deriv(f)]
    while poly_degree(chain[-1]) > 0:
        rem = poly_divmod(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append(poly_neg(rem))
    return [c for c in chain if c]


def _sign_variations(chain: list[Poly], x: Fraction) -> int:
    signs = []
    for g in chain:
        v = poly_eval(g, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(f: Poly, a: Fraction, b: Fraction, chain=None) -> int:
    """Distinct real roots of squarefree f in the half-open interval (a, b]."""
    chain = chain or sturm_chain(f)
    return _sign_variations(chain, a) - _sign_variations(chain, b)


def _nonroot_point(f: Poly, a: Fraction, b: Fraction) -> Fraction:
    """A point strictly inside (a, b) where f does not vanish."""
    span = b - a
    for k in range(2, poly_degree(f) + 4):
        m = a + span / k
        if poly_eval(f, m) != 0:
            return m
    raise AssertionError("polynomial vanished at more points than its degree")


def isolate_real_roots(f: Poly) -> list[RationalInterval]:
    """Disjoint intervals, one simple real root each, for squarefree f.

    Rational roots may come back as degenerate point intervals.
    """
    if poly_degree(f) < 1:
        return []
    chain = sturm_chain(f)
    m = cauchy_bound(f)
    out: list[RationalInterval] = []

    def split(lo, hi, v_lo, v_hi):
        cnt = v_lo - v_hi
        if cnt == 0:
            return
        if cnt == 1:
            out.append(RationalInterval(lo, hi))
            return
        mid = _nonroot_point(f, lo, hi)
        v_mid = _sign_variations(chain, mid)
        split(lo, mid, v_lo, v_mid)
        split(mid, hi, v_mid, v_hi)

    split(-m, m, _sign_variations(chain, -m), _sign_variations(chain, m))
    out.sort(key=lambda iv: iv.lo)
    return out


def refine_real_root(f: Poly, iv: RationalInterval, width: Fraction, chain=None) -> RationalInterval:
    """Shrink an isolating interval below the width target by bisection."""
    chain = chain or sturm_chain(f)
    lo, hi = iv.lo, iv.hi
    v_lo = _sign_variations(chain, lo)
    while hi - lo > width:
        mid = _nonroot_point(f, lo, hi)
        # keep the midpoint from drifting: _nonroot_point starts at (lo+hi)/2
        v_mid = _sign_variations(chain, mid)
        if v_lo - v_mid == 1:
            hi = mid
        else:
            lo, v_lo = mid, v_mid
    return RationalInterval(lo, hi)


def simplest_rational_in(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo == hi:
        return lo
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational_in(-hi, -lo)
    floor_lo = lo.numerator // lo.denominator
    if floor_lo + 1 <= hi:
        return Fraction(floor_lo + (0 if lo == floor_lo else 1))
    fa, fb = lo - floor_lo, hi - floor_lo
    if fa == 0:
        return Fraction(floor_lo)
    inner = simplest_rational_in(1 / fb, 1 / fa)
    return floor_lo + 1 / inner


def rational_roots(f: Poly) -> list[Fraction]:
    """All rational roots of squarefree f, each verified by exact evaluation.

    Candidates come from isolating intervals refined until a rational root,
    if present, is the simplest rational inside; absence of a candidate
    after the denominator cap means the root is irrational (or enormous).
    """
    roots = []
    chain = sturm_chain(f)
    for iv in isolate_real_roots(f):
        if iv.is_point():
            roots.append(iv.lo)
            continue
        found = None
        width = Fraction(1, 2**64)
        for _ in range(4):
            iv = refine_real_root(f, iv, width, chain)
            cand = simplest_rational_in(iv.lo, iv.hi)
            if poly_eval(f, cand) == 0:
                found = cand
                break
            width = width * Fraction(1, 2**64)
        if found is not None:
            roots.append(found)
    return sorted(roots)


# ---------------------------------------------------------------------------
# complex enclosures (Weierstrass inclusion disks)


def _mpf_to_fraction(x) -> Fraction:
    if not mpmath.isfinite(x):
        raise PrecisionExhausted("non-finite root seed")
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(man) * (Fraction(2) ** exp)
    return -v if sign else v


def _weierstrass_disks(f: Poly, dps: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    """(center_re, center_im, radius) disks whose union contains all roots.

    Requires distinct seed points; radius n|W_i| with W_i computed exactly
    from the rationalized seeds, so the inclusion is certified regardless
    of seed quality (bad seeds just give useless fat disks).
    """
    n = poly_degree(f)
    if n == 1:
        return [(-f[0] / f[1], Fraction(0), Fraction(0))]
    monic = poly_monic(f)
    with mpmath.workdps(dps):
        coeffs = [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) for c in reversed(monic)]
        approx = mpmath.polyroots(coeffs, maxsteps=100 + 10 * n, extraprec=4 * dps)
        seeds = [(_mpf_to_fraction(r.real), _mpf_to_fraction(r.imag)) for r in approx]
    if len({s for s in seeds}) != n:
        raise PrecisionExhausted("coincident root seeds")
    disks = []
    for i, z in enumerate(seeds):
        num = poly_eval_complex(monic, z)
        den = (Fraction(1), Fraction(0))
        for j, w in enumerate(seeds):
            if j == i:
                continue
            dr, di = z[0] - w[0], z[1] - w[1]
            den = (den[0] * dr - den[1] * di, den[0] * di + den[1] * dr)
        dd = den[0] * den[0] + den[1] * den[1]
        wsq = (num[0] * num[0] + num[1] * num[1]) / dd
        radius = n * sqrt_upper(wsq, 96)
        disks.append((z[0], z[1], radius))
    return disks


def _disk_components(disks) -> list[list[int]]:
    n = len(disks)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            (xr, xi, r1), (yr, yi, r2) = disks[i], disks[j]
            dist_sq = (xr - yr) ** 2 + (xi - yi) ** 2
            if dist_sq <= (r1 + r2) ** 2:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def weierstrass_boxes(f: Poly, dps: int) -> list[ComplexInterval]:
    """One certified box per root (with multiplicity of overlap components).

    A component of k mutually overlapping disks contains exactly k roots;
    its hull box is reported k times, which is sound for every consumer
    that treats the result as a multiset of per-root enclosures.
    """
    disks = _weierstrass_disks(f, dps)
    boxes = []
    for group in _disk_components(disks):
        re_lo = min(disks[i][0] - disks[i][2] for i in group)
        re_hi = max(disks[i][0] + disks[i][2] for i in group)
        im_lo = min(disks[i][1] - disks[i][2] for i in group)
        im_hi = max(disks[i][1] + disks[i][2] for i in group)
        hull = ComplexInterval.from_box(re_lo, re_hi, im_lo, im_hi)
        boxes.extend([hull] * len(group))
    return boxes


def certified_root_structure(
    f: Poly, width: Fraction, max_attempts: int = 10
) -> tuple[list[RationalInterval], list[ComplexInterval]]:
    """Split roots of squarefree f into real intervals and off-axis boxes.

    Real count is exact (Sturm); escalation doubles mpmath precision until
    exactly degree-minus-real boxes are certified off the real axis and all
    enclosures meet the width target.
    """
    n = poly_degree(f)
    chain = sturm_chain(f)
    real_ivs = [refine_real_root(f, iv, width, chain) for iv in isolate_real_roots(f)]
    rho = len(real_ivs)
    if rho == n:
        return real_ivs, []
    dps = 30
    for _ in range(max_attempts):
        try:
            boxes = weierstrass_boxes(f, dps)
        except PrecisionExhausted:
            dps *= 2
            continue
        off_axis = [b for b in boxes if not b.im.contains_zero()]
        if len(off_axis) == n - rho and all(b.max_width <= width for b in off_axis):
            return real_ivs, off_axis
        dps *= 2
    raise PrecisionExhausted(f"could not certify root structure at width {width}")


def modulus_enclosures(f: Poly, width: Fraction) -> list[RationalInterval]:
    """Absolute values of all roots of f (with multiplicity), sorted descending.

    Rational roots yield exact point intervals; everything else is a
    certified enclosure no wider than the target.
    """
    out: list[RationalInterval] = []
    for factor, mult in yun_decomposition(f):
        if poly_degree(factor) == 0:
            continue
        exact = {r: None for r in rational_roots(factor)}
        if len(exact) == poly_degree(factor):
            for r in exact:
                out.extend([RationalInterval.point(abs(r))] * mult)
            continue
        real_ivs, boxes = certified_root_structure(factor, width)
        for iv in real_ivs:
            out.extend([iv.abs_interval()] * mult)
        for b in boxes:
            out.extend([b.mag(96)] * mult)
    out.sort(key=lambda iv: (iv.mid, iv.lo), reverse=True)
    return out
