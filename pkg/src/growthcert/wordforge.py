"""Basis preparation between pair selection and cone certification.

Diagonalize A with certified enclosures (exact when the charpoly splits
over Q), balance norms by a centralizer conjugation or bounded word
replacement, fall back to the trace route and role swap, pick the place
and wedge degree with a certified spectral gap, and repair B's corner
entry through the Vandermonde amplification backed by the almost-algebra
diagnostics.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import (
    BalanceFailed,
    Inconclusive,
    L2Unreachable,
    NoGap,
    NoStabilization,
    NotConnected,
    SingularEnclosure,
    SwapFailed,
)
from .exactnum import ARCH, Place, PlaceSet, SquareMatrix, Word, abs_value
from .intervals import (
    ComplexInterval,
    RationalInterval,
    cmat_adjugate,
    cmat_det_small,
    cmat_from_exact,
    cmat_inverse,
    cmat_mul,
    cmat_sub,
    sqrt_upper,
)
from .pingpong import LConditions, check_l_conditions, entry_bounds
from .polyroots import certified_root_structure, rational_roots, squarefree_part
from .spectra import char_poly, eigen_report, l1_gap_report, wedge_diag, wedge_power

SYM_A = Word.generator(0)
SYM_B = Word.generator(1)


def substitute_word(symbolic: Word, word_a: Word, word_b: Word) -> Word:
    """Expand a word over the two-letter alphabet {A, B} into generator words."""
    out = Word(())
    for idx, sign in symbolic.letters:
        if idx not in (0, 1):
            raise ValueError("symbolic words use letters 0 (A) and 1 (B) only")
        base = word_a if idx == 0 else word_b
        out = out * (base if sign == 1 else base.inverse())
    return out


# ---------------------------------------------------------------------------
# diagonalization


def _kernel_vector(m: SquareMatrix) -> tuple[Fraction, ...]:
    """One nonzero kernel vector of a singular matrix, by exact elimination."""
    n = m.n
    rows = [list(r) for r in m.entries]
    pivots: dict[int, int] = {}
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, n) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(n):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        pivots[col] = rank
        rank += 1
    free = next(c for c in range(n) if c not in pivots)
    vec = [Fraction(0)] * n
    vec[free] = Fraction(1)
    for col, r in pivots.items():
        vec[col] = -rows[r][free]
    return tuple(vec)


def _interval_mid(x) -> float:
    if isinstance(x, ComplexInterval):
        m = x.mag_sq()
        return math.sqrt(float((m.lo + m.hi) / 2))
    return abs(float(x))


def diagonalize_exact(a: SquareMatrix, sort_place: Place = ARCH):
    """Exact eigenbasis when the charpoly splits into distinct rationals.

    Returns (diag, p_rows, p_inv_rows) with eigenvalues sorted by modulus
    descending at sort_place (ties broken by value), or None when the
    spectrum is not fully rational.
    """
    f = char_poly(a).poly
    roots = rational_roots(f)
    if len(roots) != a.n or len(set(roots)) != a.n:
        return None
    order = sorted(roots, key=lambda lam: (-abs_value(lam, sort_place), lam))
    columns = [_kernel_vector(a - SquareMatrix.identity(a.n).scale(lam)) for lam in order]
    p = SquareMatrix.from_rows([[columns[j][i] for j in range(a.n)] for i in range(a.n)])
    return tuple(order), p.entries, p.inverse().entries


def diagonalize_enclosed(a: SquareMatrix, bits: int = 128):
    """Certified interval eigenbasis for a squarefree-charpoly matrix.

    Eigenvectors come from columns of adj(A - lambda I); the normalizing
    entry is pinned to exactly 1 since the true eigenvector scaled by its
    own coordinate has it there.  Raises SingularEnclosure or
    PrecisionExhausted when enclosures are too wide; callers escalate bits.
    """
    n = a.n
    f = char_poly(a).poly
    width = Fraction(1, 2**bits) * max(Fraction(1), a.max_abs_entry())
    real_ivs, boxes = certified_root_structure(f, width)
    lambdas = [ComplexInterval(iv, RationalInterval.point(0)) for iv in real_ivs]
    lambdas += list(boxes)
    lambdas.sort(
        key=lambda z: (
            -_interval_mid(z),
            -float((z.re.lo + z.re.hi) / 2),
            -float((z.im.lo + z.im.hi) / 2),
        )
    )
    ea = cmat_from_exact(a)
    columns = []
    for lam in lambdas:
        shift = tuple(
            tuple(lam if i == j else ComplexInterval.point(0) for j in range(n))
            for i in range(n)
        )
        adj = cmat_adjugate(cmat_sub(ea, shift))
        best_col, best_lo = None, Fraction(0)
        for j in range(n):
            col = [adj[i][j] for i in range(n)]
            lo = max(x.mag_sq().lo for x in col)
            if lo > best_lo:
                best_col, best_lo = col, lo
        if best_col is None:
            raise SingularEnclosure("no adjugate column certified nonzero")
        pivot_i = max(range(n), key=lambda i: best_col[i].mag_sq().lo)
        inv = best_col[pivot_i].recip()
        col = [(x * inv).round_out(4 * bits) for x in best_col]
        col[pivot_i] = ComplexInterval.point(1)
        columns.append(col)
    p = tuple(tuple(columns[j][i] for j in range(n)) for i in range(n))
    p_inv = cmat_inverse(p, round_bits=4 * bits)
    return tuple(lambdas), p, p_inv


def _rows_mul(x, y, exact: bool, bits: int = 128):
    if exact:
        n = len(x)
        return tuple(
            tuple(sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n))
            for i in range(n)
        )
    return cmat_mul(x, y, round_bits=4 * bits)


def _diag_rows(diag, exact: bool):
    n = len(diag)
    zero = Fraction(0) if exact else ComplexInterval.point(0)
    return tuple(tuple(diag[i] if i == j else zero for j in range(n)) for i in range(n))


def _identity_rows(n: int, exact: bool):
    one = Fraction(1) if exact else ComplexInterval.point(1)
    zero = Fraction(0) if exact else ComplexInterval.point(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def _norm_bounds(rows, v: Place, bits: int = 96) -> tuple[Fraction, Fraction]:
    """(lower, upper) bounds on the max entry modulus at the place."""
    bounds = [entry_bounds(x, v, bits) for row in rows for x in row]
    return max(lo for lo, _ in bounds), max(hi for _, hi in bounds)


def _global_norm_bounds(rows, s: PlaceSet, exact: bool, bits: int = 96):
    """Max over the places of S; interval data restricts to the archimedean one."""
    places = list(s) if exact else [ARCH]
    pairs = [_norm_bounds(rows, v, bits) for v in places]
    return max(lo for lo, _ in pairs), max(hi for _, hi in pairs)


@dataclass(frozen=True)
class ConjugatedPair:
    """The pair in a basis where A is diagonal, with the certified relation.

    orig_a and orig_b stay exact in the input basis so spectral data
    (charpoly, gap grid) never depends on enclosures.  a_diag and b_rows
    live in the eigenbasis: Fractions on the exact path, ComplexIntervals
    otherwise.  constants records the (c1, c2) certifying
    norm(B) <= c1 * norm(A)^c2 when norm_relation is B_prec_A or swapped.
    """

    orig_a: SquareMatrix
    orig_b: SquareMatrix
    word_a: Word
    word_b: Word
    basis: tuple
    basis_inv: tuple
    a_diag: tuple
    b_rows: tuple
    exact: bool
    places: PlaceSet
    norm_relation: str
    constants: tuple
    trace_m: int | None = None

    @property
    def n(self) -> int:
        return len(self.a_diag)

    @property
    def balanced(self) -> bool:
        return self.norm_relation in ("B_prec_A", "swapped")


def _certify_b_prec_a(a_diag, b_rows, s, exact, bits, candidates=((1, 1), (1, 2))):
    """First (c1, c2) with norm(B) <= c1*norm(A)^c2 certified, or None."""
    an_lo, _ = _global_norm_bounds(_diag_rows(a_diag, exact), s, exact, bits)
    _, bn_hi = _global_norm_bounds(b_rows, s, exact, bits)
    for c1, c2 in candidates:
        if bn_hi <= Fraction(c1) * an_lo ** int(c2):
            return Fraction(c1), Fraction(c2)
    return None


def _trace_abs_bounds(b_rows, s, exact, bits):
    """Bounds on max over S of |tr B|; interval path is archimedean-only."""
    n = len(b_rows)
    if exact:
        tr = sum(b_rows[i][i] for i in range(n))
        vals = [abs_value(tr, v) for v in s]
        return max(vals), max(vals)
    tr = b_rows[0][0]
    for i in range(1, n):
        tr = tr + b_rows[i][i]
    m = tr.mag(bits)
    return m.lo, m.hi


def _balance_exponents(b_rows, v: Place, bits: int) -> tuple[int, ...]:
    """Integer log-2 scales minimizing the largest conjugated entry, greedily.

    Conjugating by diag(2^k_i) scales entry (i, j) by 2^(k_j - k_i); float
    logs suffice because the choice only needs to be a good heuristic,
    never a certificate.
    """
    n = len(b_rows)
    logs = {}
    for i in range(n):
        for j in range(n):
            hi = entry_bounds(b_rows[i][j], v, bits)[1]
            if hi > 0:
                logs[(i, j)] = math.log2(float(hi))
    k = [0] * n
    if not logs:
        return tuple(k)

    def cost(ks):
        return max(w + ks[j] - ks[i] for (i, j), w in logs.items())

    for _ in range(4096):
        improved = False
        for i in range(n):
            for delta in (1, -1):
                trial = list(k)
                trial[i] += delta
                if cost(trial) < cost(k):
                    k = trial
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break
    return tuple(k)


def _apply_centralizer(b_rows, k, exact: bool):
    """Conjugate by diag(2^k_i), returning the new rows and the D, D^-1 rows."""
    n = len(b_rows)
    if all(x == 0 for x in k):
        return b_rows, None, None
    d = [Fraction(2) ** ki for ki in k]
    if exact:
        out = tuple(tuple(b_rows[i][j] * d[j] / d[i] for j in range(n)) for i in range(n))
        d_rows = _diag_rows(d, True)
        d_inv_rows = _diag_rows([1 / x for x in d], True)
    else:
        out = tuple(
            tuple(b_rows[i][j] * ComplexInterval.point(d[j] / d[i]) for j in range(n))
            for i in range(n)
        )
        d_rows = _diag_rows([ComplexInterval.point(x) for x in d], False)
        d_inv_rows = _diag_rows([ComplexInterval.point(1 / x) for x in d], False)
    return out, d_rows, d_inv_rows


def _symbolic_words(max_len: int, require_b: bool = True):
    """Words over {A, B} by total length then lexicographic order (A < B)."""
    for length in range(1, max_len + 1):
        for mask in range(2**length):
            letters = tuple(((mask >> (length - 1 - t)) & 1, 1) for t in range(length))
            if require_b and not any(i == 1 for i, _ in letters):
                continue
            yield Word(letters)


def _eval_symbolic(word: Word, a_diag, b_rows, exact: bool, bits: int = 128):
    a_rows = _diag_rows(a_diag, exact)
    acc = _identity_rows(len(a_diag), exact)
    for idx, sign in word.letters:
        if sign != 1:
            raise ValueError("positive words only")
        acc = _rows_mul(acc, a_rows if idx == 0 else b_rows, exact, bits)
    return acc


def balance_or_trace(
    a: SquareMatrix,
    b: SquareMatrix,
    s: PlaceSet,
    word_a: Word | None = None,
    word_b: Word | None = None,
    m_cap: int = 8,
    bits: int = 128,
) -> ConjugatedPair:
    """Diagonalize A, balance scales, and certify a norm or trace relation.

    Tries, in order: the direct norm comparison after a centralizer
    rebalancing, the trace route (norm(A)^m * max |tr B| >= norm(B) for
    m up to m_cap), and replacement of B by bounded words in A and B.
    The centralizer element is a power-of-2 diagonal; a global scalar acts
    trivially under conjugation, so no determinant normalization is applied.
    """
    f = char_poly(a).poly
    if squarefree_part(f) != f:
        raise ValueError("A must have a squarefree characteristic polynomial")
    word_a = word_a if word_a is not None else SYM_A
    word_b = word_b if word_b is not None else SYM_B
    exact_basis = diagonalize_exact(a)
    if exact_basis is not None:
        a_diag, p, p_inv = exact_basis
        exact = True
        b_rows = _rows_mul(_rows_mul(p_inv, b.entries, True), p, True)
    else:
        a_diag, p, p_inv = diagonalize_enclosed(a, bits)
        exact = False
        b_rows = _rows_mul(_rows_mul(p_inv, cmat_from_exact(b), False, bits), p, False, bits)

    k = _balance_exponents(b_rows, ARCH, 96)
    b_rows, d_rows, d_inv_rows = _apply_centralizer(b_rows, k, exact)
    if d_rows is not None:
        p = _rows_mul(p, d_rows, exact, bits)
        p_inv = _rows_mul(d_inv_rows, p_inv, exact, bits)

    def make(relation, consts, new_word_b, new_b_rows, trace_m=None):
        return ConjugatedPair(
            orig_a=a,
            orig_b=b,
            word_a=word_a,
            word_b=new_word_b,
            basis=p,
            basis_inv=p_inv,
            a_diag=a_diag,
            b_rows=new_b_rows,
            exact=exact,
            places=s,
            norm_relation=relation,
            constants=consts,
            trace_m=trace_m,
        )

    an_lo, _ = _global_norm_bounds(_diag_rows(a_diag, exact), s, exact, bits)

    def relation_for(rows, bword):
        certified = _certify_b_prec_a(a_diag, rows, s, exact, bits)
        if certified is not None:
            return make("B_prec_A", certified, bword, rows)
        _, rn_hi = _global_norm_bounds(rows, s, exact, bits)
        rtr_lo, _ = _trace_abs_bounds(rows, s, exact, bits)
        for m in range(m_cap + 1):
            if an_lo**m * rtr_lo >= rn_hi:
                return make("trace_big", (Fraction(1), Fraction(1)), bword, rows, trace_m=m)
        return None

    pair = relation_for(b_rows, word_b)
    if pair is not None:
        return pair
    for cand in _symbolic_words(m_cap):
        if cand == SYM_B:
            continue
        rows = _eval_symbolic(cand, a_diag, b_rows, exact, bits)
        pair = relation_for(rows, substitute_word(cand, word_a, word_b))
        if pair is not None:
            return pair
    raise BalanceFailed(
        f"no norm or trace relation certified with words of length up to {m_cap}"
    )


def diagonalized_pair(
    a: SquareMatrix,
    b: SquareMatrix,
    s: PlaceSet,
    word_a: Word,
    word_b: Word,
    sort_place: Place = ARCH,
    bits: int = 128,
) -> ConjugatedPair:
    """The pair in A's eigenbasis with no balancing or word replacement.

    Deterministic in its inputs: eigenvalues sort by modulus at sort_place,
    eigenvectors carry pinned normalizations, so a verifier replaying from
    the words alone lands in the same basis.  Finite sort places need a
    rational eigenbasis.  The result is unbalanced (norm_relation "none");
    it feeds wedge_pair and the cone checks, not role selection.
    """
    f = char_poly(a).poly
    if squarefree_part(f) != f:
        raise ValueError("A must have a squarefree characteristic polynomial")
    exact_basis = diagonalize_exact(a, sort_place=sort_place)
    if exact_basis is not None:
        a_diag, p, p_inv = exact_basis
        exact = True
        b_rows = _rows_mul(_rows_mul(p_inv, b.entries, True), p, True)
    else:
        if not sort_place.is_archimedean:
            raise Inconclusive("finite sort place needs a rational eigenbasis")
        a_diag, p, p_inv = diagonalize_enclosed(a, bits)
        exact = False
        b_rows = _rows_mul(_rows_mul(p_inv, cmat_from_exact(b), False, bits), p, False, bits)
    return ConjugatedPair(
        orig_a=a,
        orig_b=b,
        word_a=word_a,
        word_b=word_b,
        basis=p,
        basis_inv=p_inv,
        a_diag=a_diag,
        b_rows=b_rows,
        exact=exact,
        places=s,
        norm_relation="none",
        constants=(Fraction(1), Fraction(1)),
    )


def swap_roles(pair: ConjugatedPair, s: PlaceSet, bits: int = 128) -> ConjugatedPair:
    """Interchange A and B after the trace route, rediagonalizing around B.

    Requires norm(A)^m <= sqrt(norm(B)) for the recorded trace exponent
    (checked as a squared inequality) and a certified conditioning bound
    max(norm(C), norm(C^-1)) <= max(2, norm(A'))^n on the new basis.
    """
    if pair.norm_relation != "trace_big":
        raise ValueError("swap applies only after the trace route")
    an_hi = _global_norm_bounds(_diag_rows(pair.a_diag, pair.exact), s, pair.exact)[1]
    bn_lo = _global_norm_bounds(pair.b_rows, s, pair.exact)[0]
    m = pair.trace_m or 0
    if not an_hi ** (2 * m) <= bn_lo:
        raise SwapFailed("norm(A)^m exceeds sqrt(norm(B)): swap inequality not certified")

    b = pair.orig_b
    exact_basis = diagonalize_exact(b)
    if exact_basis is not None:
        new_diag, c, c_inv = exact_basis
        new_exact = True
        new_b_rows = _rows_mul(_rows_mul(c_inv, pair.orig_a.entries, True), c, True)
    else:
        if squarefree_part(char_poly(b).poly) != char_poly(b).poly:
            raise SwapFailed("B has repeated eigenvalues: no certified eigenbasis")
        new_diag, c, c_inv = diagonalize_enclosed(b, bits)
        new_exact = False
        new_b_rows = _rows_mul(
            _rows_mul(c_inv, cmat_from_exact(pair.orig_a), False, bits), c, False, bits
        )

    cn_hi = _global_norm_bounds(c, s, new_exact)[1]
    ci_hi = _global_norm_bounds(c_inv, s, new_exact)[1]
    new_an_lo = _global_norm_bounds(_diag_rows(new_diag, new_exact), s, new_exact)[0]
    cond_bound = max(Fraction(2), new_an_lo) ** len(new_diag)
    if not (cn_hi <= cond_bound and ci_hi <= cond_bound):
        raise SwapFailed("eigenbasis conditioning bound not certified")

    certified = _certify_b_prec_a(new_diag, new_b_rows, s, new_exact, bits)
    if certified is None:
        raise SwapFailed("swapped pair does not certify the norm relation")
    return ConjugatedPair(
        orig_a=pair.orig_b,
        orig_b=pair.orig_a,
        word_a=pair.word_b,
        word_b=pair.word_a,
        basis=c,
        basis_inv=c_inv,
        a_diag=new_diag,
        b_rows=new_b_rows,
        exact=new_exact,
        places=s,
        norm_relation="swapped",
        constants=certified,
        trace_m=None,
    )


def select_place_and_wedge(pair: ConjugatedPair, s: PlaceSet) -> tuple[Place, int]:
    """Place of maximal norm(A) and the smallest wedge degree with a gap.

    Works off the exact original A (spectral data is basis independent).
    Places are ordered by the top eigenvalue modulus, largest first; wedge
    degrees run 1..n-1.  Finite places are skipped for interval-basis
    pairs, which cannot certify ultrametric cone bounds.
    """
    if not pair.balanced:
        raise ValueError("pair must certify the norm relation before selection")
    a = pair.orig_a
    grid = l1_gap_report(a, s)
    report = eigen_report(a, s)

    def place_key(v: Place):
        if v.is_archimedean:
            top = report.arch_moduli[0]
            return (-float((top.lo + top.hi) / 2), v.sort_key)
        vals = report.valuations_at(v)
        return (-float(Fraction(v.prime) ** -min(vals)), v.sort_key)

    for v in sorted(s, key=place_key):
        if not pair.exact and not v.is_archimedean:
            continue
        for m in range(1, a.n):
            if grid.get((v, m)):
                return v, m
    summary = ", ".join(
        f"{v}/m={m}:{'T' if ok else 'F'}"
        for (v, m), ok in sorted(grid.items(), key=lambda kv: (kv[0][0].sort_key, kv[0][1]))
    )
    raise NoGap(f"no certified spectral gap; grid: {summary}")


# ---------------------------------------------------------------------------
# wedge-level data


def _wedge_rows(rows, m: int, exact: bool):
    """Compound matrix of an entry grid; generic over exact and interval entries."""
    if exact:
        return wedge_power(SquareMatrix.from_rows([list(r) for r in rows]), m).entries
    n = len(rows)
    subs = list(combinations(range(n), m))
    out = []
    for rset in subs:
        line = []
        for cset in subs:
            sub = tuple(tuple(rows[i][j] for j in cset) for i in rset)
            line.append(cmat_det_small(sub))
        out.append(tuple(line))
    return tuple(out)


def wedge_pair(pair: ConjugatedPair, v: Place, m: int, bits: int = 96):
    """Wedge images (diag of A, rows of B) sorted top-modulus-first at v.

    The sort is a heuristic (float midpoints); a wrong order can only make
    downstream certification fail, never certify something false.
    """
    if not pair.exact and not v.is_archimedean:
        raise ValueError("interval basis data cannot certify finite places")
    wa = wedge_diag(list(pair.a_diag), m)
    wb = _wedge_rows(pair.b_rows, m, pair.exact)
    if pair.exact:
        order = sorted(range(len(wa)), key=lambda i: (-abs_value(wa[i], v), i))
    else:
        order = sorted(range(len(wa)), key=lambda i: (-_interval_mid(wa[i]), i))
    wa_sorted = tuple(wa[i] for i in order)
    wb_sorted = tuple(tuple(wb[i][j] for j in order) for i in order)
    return wa_sorted, wb_sorted


# ---------------------------------------------------------------------------
# corner amplification


@dataclass(frozen=True)
class AmplifyResult:
    """A word over {A, B} with a certified lower bound on one target entry.

    The recorded (p, k, ell) satisfy: the entry modulus is at least
    p * norm(A)^(-k) * norm(B)^ell for the true norms at the place, with
    k the total A-exponent and ell the number of B factors in the word.
    """

    word: Word
    path: tuple
    entry_lower: Fraction
    p: Fraction
    k: int
    ell: int


def _diag_power(diag, k: int, exact: bool, bits: int):
    if exact:
        return [Fraction(x) ** k for x in diag]
    return [x.pow_int(k, round_bits=4 * bits) for x in diag]


def amplify_entry(
    a_diag,
    b_rows,
    target: tuple[int, int],
    c: Fraction,
    v: Place,
    bits: int = 96,
) -> AmplifyResult:
    """Bounded word in {A, B} whose target entry is certifiably large.

    Entries with |B_st| > c * norm(B) form a digraph; a walk i -> ... -> j
    is folded one hop at a time, each hop choosing the power k in 0..n-1
    maximizing the certified entry bound of W * A^k * B.  The n powers
    cannot all give small entries: the hop coefficients solve a Vandermonde
    system with one large component and determinant bounded away from zero
    for distinct eigenvalues.
    """
    exact = not isinstance(a_diag[0], ComplexInterval)
    n = len(a_diag)
    i, j = target
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("target out of range")
    bn_hi = _norm_bounds(b_rows, v, bits)[1]
    an_lo = _norm_bounds(_diag_rows(a_diag, exact), v, bits)[0]

    def large(s, t):
        return entry_bounds(b_rows[s][t], v, bits)[0] > c * bn_hi

    def result(word, path, lower, total_k, total_ell):
        p = lower * an_lo**total_k / bn_hi**total_ell
        return AmplifyResult(word, tuple(path), lower, p, total_k, total_ell)

    if large(i, j):
        return result(SYM_B, (i, j), entry_bounds(b_rows[i][j], v, bits)[0], 0, 1)

    # shortest walk with >= 2 edges: BFS seeded from the out-neighbors of i
    edges = {s: [t for t in range(n) if large(s, t)] for s in range(n)}
    parent: dict[int, int] = {}
    queue = deque()
    for t in edges[i]:
        parent[t] = i
        queue.append(t)
    while queue:
        node = queue.popleft()
        if node == j:
            break
        for t in edges[node]:
            if t not in parent:
                parent[t] = node
                queue.append(t)
    if j not in parent:
        raise NotConnected(f"no large-entry walk from {i} to {j} at level {c}")
    # take at least one parent step: when i == j the walk is a cycle
    walk = [j, parent[j]]
    while walk[-1] != i:
        walk.append(parent[walk[-1]])
    walk.reverse()

    word = SYM_B
    rows = b_rows
    total_k, total_ell = 0, 1
    for hop in range(1, len(walk) - 1):
        target_col = walk[hop + 1]
        best = None
        for kpow in range(n):
            mid = _diag_rows(_diag_power(a_diag, kpow, exact, bits), exact)
            cand = _rows_mul(_rows_mul(rows, mid, exact, bits), b_rows, exact, bits)
            lower = entry_bounds(cand[i][target_col], v, bits)[0]
            if best is None or lower > best[0]:
                best = (lower, kpow, cand)
        lower, kpow, rows = best
        word = word * SYM_A**kpow * SYM_B
        total_k += kpow
        total_ell += 1
    final_lower = entry_bounds(rows[i][j], v, bits)[0]
    if final_lower == 0:
        raise Inconclusive("amplification walk degraded to an uncertified entry")
    return result(word, walk, final_lower, total_k, total_ell)


def ensure_l2(
    pair: ConjugatedPair,
    v: Place,
    m: int,
    word_cap: int = 8,
    constants=(Fraction(1), Fraction(1), Fraction(1), Fraction(2)),
    bits: int = 96,
) -> tuple[Word, LConditions, Word]:
    """Replace B by a bounded word until the corner condition certifies.

    Candidates come first from corner amplification, then from the
    length-then-lex word search.  The size constant c3 may grow by powers
    of 16 (recorded in the returned conditions) since word replacement
    inflates norms polynomially.  Returns the B word in the original
    generators, the certified conditions, and the symbolic replacement
    over {A, B}.
    """
    wa, wb = wedge_pair(pair, v, m, bits)
    exact = pair.exact
    c2, d2, c3, d3 = (Fraction(x) for x in constants)

    def conditions_with_l3(rows, propagate: bool):
        for t in range(0, 33, 4):
            try:
                cond = check_l_conditions(wa, rows, v, (c2, d2, c3 * 2**t, d3), bits)
            except Inconclusive:
                if propagate:
                    raise
                return None
            if cond.l3:
                return cond
        return None

    cond = conditions_with_l3(wb, propagate=True)
    if cond is not None and cond.l1 and cond.l2:
        return pair.word_b, cond, SYM_B

    candidates = []
    an_hi = _norm_bounds(_diag_rows(wa, exact), v, bits)[1]
    for m_c in (1, 2, 3, 4):
        level = 1 / max(Fraction(2), an_hi) ** m_c
        try:
            amp = amplify_entry(wa, wb, (0, 0), level, v, bits)
        except (NotConnected, Inconclusive):
            continue
        if len(amp.word.letters) <= word_cap and amp.word not in candidates:
            candidates.append(amp.word)
    candidates.extend(
        w for w in _symbolic_words(word_cap) if w != SYM_B and w not in candidates
    )

    for cand in candidates:
        rows = _eval_symbolic(cand, wa, wb, exact, max(bits, 128))
        cond = conditions_with_l3(rows, propagate=False)
        if cond is not None and cond.l1 and cond.l2:
            return substitute_word(cand, pair.word_a, pair.word_b), cond, cand
    raise L2Unreachable(
        f"no replacement word of length up to {word_cap} certifies the corner condition"
    )


# ---------------------------------------------------------------------------
# almost-algebras


def _frob(x_rows, y_rows) -> Fraction:
    return sum(a * b for rx, ry in zip(x_rows, y_rows) for a, b in zip(rx, ry))


def _mat_sub(x, y):
    return tuple(tuple(a - b for a, b in zip(rx, ry)) for rx, ry in zip(x, y))


def _mat_scale(x, c: Fraction):
    return tuple(tuple(c * a for a in row) for row in x)


def _project_residual(x, ortho):
    """x minus its projection onto the span; exact, plus the coefficients."""
    coeffs = []
    res = x
    for o in ortho:
        c = _frob(res, o) / _frob(o, o)
        coeffs.append(c)
        res = _mat_sub(res, _mat_scale(o, c))
    return res, coeffs


@dataclass(frozen=True)
class AlmostAlgebra:
    """Stabilized product-closed span with certified closure defect.

    ortho_basis holds exact orthogonal (unnormalized) representatives;
    basis_matrices are their normalizations to within 2^-64, orthonormal
    to that tolerance.  closure_defect bounds the distance from the span
    of any product of normalized basis elements; defect_sq is the exact
    square backing it.
    """

    basis_matrices: tuple
    ortho_basis: tuple
    epsilon: Fraction
    epsilon_ladder: tuple
    dimension: int
    stabilized_k: int
    closure_defect: Fraction
    defect_sq: Fraction


def build_almost_algebra(blocks, epsilon: Fraction) -> AlmostAlgebra:
    """Grow the span of the blocks until products stay epsilon-close.

    A product of normalized basis elements at distance > epsilon from the
    current span is admitted as a new direction; when a full pass admits
    nothing, the span has stabilized.  Inputs with tr(X X^t) > 1 are
    rescaled by powers of 2 (the span and all normalized quantities are
    scale invariant).  Distance comparisons are exact via squares.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rows_list = []
    for blk in blocks:
        rows = (
            blk.entries
            if isinstance(blk, SquareMatrix)
            else tuple(tuple(Fraction(x) for x in row) for row in blk)
        )
        while _frob(rows, rows) > 1:
            rows = _mat_scale(rows, Fraction(1, 2))
        rows_list.append(rows)
    if not rows_list:
        raise ValueError("need at least one block")
    cap = len(rows_list[0]) ** 2

    ortho: list = []
    for rows in rows_list:
        res, _ = _project_residual(rows, ortho)
        if _frob(res, res) > 0:
            ortho.append(res)

    ladder = []
    k = 1
    while True:
        if k > cap + 1:
            raise NoStabilization("span kept growing past the dimension bound")
        ladder.append(epsilon)
        admitted = False
        dim = len(ortho)
        for ii in range(dim):
            for jj in range(dim):
                prod = _rows_mul(ortho[ii], ortho[jj], True)
                res, _ = _project_residual(prod, ortho)
                scale = _frob(ortho[ii], ortho[ii]) * _frob(ortho[jj], ortho[jj])
                if _frob(res, res) > epsilon**2 * scale:
                    ortho.append(res)
                    admitted = True
        if not admitted or len(ortho) >= cap:
            # a full matrix space cannot grow further; products stay inside
            break
        k += 1

    defect_sq = Fraction(0)
    dim = len(ortho)
    for ii in range(dim):
        for jj in range(dim):
            prod = _rows_mul(ortho[ii], ortho[jj], True)
            res, _ = _project_residual(prod, ortho)
            scale = _frob(ortho[ii], ortho[ii]) * _frob(ortho[jj], ortho[jj])
            defect_sq = max(defect_sq, _frob(res, res) / scale)
    assert defect_sq <= epsilon**2
    defect = Fraction(0) if defect_sq == 0 else min(sqrt_upper(defect_sq, 64), epsilon)

    normalized = []
    for o in ortho:
        nsq = _frob(o, o)
        normalized.append(_mat_scale(o, Fraction(1) if nsq == 1 else 1 / sqrt_upper(nsq, 64)))
    return AlmostAlgebra(
        basis_matrices=tuple(normalized),
        ortho_basis=tuple(ortho),
        epsilon=epsilon,
        epsilon_ladder=tuple(ladder),
        dimension=dim,
        stabilized_k=k,
        closure_defect=defect,
        defect_sq=defect_sq,
    )


def algebra_defect(aa: AlmostAlgebra, assoc_cap: int = 8) -> Fraction:
    """Largest normalized product-to-span distance, with associativity folded in.

    Exactly zero if and only if the span is closed under products (a
    subspace closed under matrix multiplication is automatically an
    associative algebra).  The structure-constant associativity defect is
    computed only up to assoc_cap dimensions; beyond that the product part
    already decides exactness.
    """
    ortho = aa.ortho_basis
    dim = len(ortho)
    norms = [_frob(o, o) for o in ortho]
    worst_sq = Fraction(0)
    coeff = {}
    for ii in range(dim):
        for jj in range(dim):
            prod = _rows_mul(ortho[ii], ortho[jj], True)
            res, cs = _project_residual(prod, ortho)
            coeff[(ii, jj)] = cs
            worst_sq = max(worst_sq, _frob(res, res) / (norms[ii] * norms[jj]))
    if dim <= assoc_cap:
        for ii in range(dim):
            for jj in range(dim):
                for kk in range(dim):
                    delta_sq = Fraction(0)
                    for ll in range(dim):
                        lhs = sum(coeff[(ii, jj)][mm] * coeff[(mm, kk)][ll] for mm in range(dim))
                        rhs = sum(coeff[(jj, kk)][mm] * coeff[(ii, mm)][ll] for mm in range(dim))
                        delta_sq += (lhs - rhs) ** 2 * norms[ll]
                    worst_sq = max(worst_sq, delta_sq / (norms[ii] * norms[jj] * norms[kk]))
    return Fraction(0) if worst_sq == 0 else sqrt_upper(worst_sq, 64)
