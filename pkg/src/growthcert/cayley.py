"""Cayley ball enumeration, growth estimation, and regular pair search.

Balls are enumerated breadth-first with exact deduplication: a matrix is a
hashable tuple of Fractions, so two words are identified exactly when they
are equal in the group, never because floats collided.  Growth estimates
derived from counts are certified dyadic lower bounds; the exponential-vs-
polynomial verdict and the degree fit are float heuristics, clearly labeled,
and never feed a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, Inconclusive, InsufficientData, PairNotFound
from .exactnum import PlaceSet, SquareMatrix, Word, s_support
from .polyroots import poly_degree, squarefree_part
from .spectra import char_poly, discriminant, l1_gap_report, wedge_power


def charpoly_is_squarefree(mat: SquareMatrix) -> bool:
    """Distinct eigenvalues, i.e. the matrix is regular semisimple."""
    f = char_poly(mat).poly
    return poly_degree(squarefree_part(f)) == poly_degree(f)


def _alphabet(gens: list[SquareMatrix]) -> list[tuple[Word, SquareMatrix]]:
    """Generators then inverses, as (letter word, matrix); exact duplicates dropped."""
    letters = []
    seen = set()
    for i, g in enumerate(gens):
        if g.entries not in seen:
            seen.add(g.entries)
            letters.append((Word(((i, 1),)), g))
    for i, g in enumerate(gens):
        inv = g.inverse()
        if inv.entries not in seen:
            seen.add(inv.entries)
            letters.append((Word(((i, -1),)), inv))
    return letters


def _bfs_ball(gens, radius, budget, want_words):
    """Breadth-first ball with exact dedup.

    Returns (counts, exhausted, elements) where counts[k] = |B(k)| and
    elements is the shortlex-ordered list of (word, matrix) excluding the
    identity (only populated when want_words).  Raises BudgetExceeded with
    the completed-radius counts attached.
    """
    if not gens:
        raise ValueError("empty generator list")
    n = gens[0].n
    ident = SquareMatrix.identity(n)
    letters = _alphabet(gens)
    ball = {ident.entries}
    frontier = [(Word(), ident)]
    counts = [1]
    elements: list[tuple[Word, SquareMatrix]] = []
    exhausted = False
    for _ in range(radius):
        new_frontier = []
        for word, mat in frontier:
            for lw, lm in letters:
                nxt = mat * lm
                if nxt.entries in ball:
                    continue
                if len(ball) >= budget:
                    raise BudgetExceeded(
                        f"ball exceeded budget {budget}", partial=list(counts)
                    )
                ball.add(nxt.entries)
                entry = (word * lw, nxt)
                new_frontier.append(entry)
                if want_words:
                    elements.append(entry)
        counts.append(len(ball))
        frontier = new_frontier
        if not frontier:
            exhausted = True
            break
    return counts, exhausted, elements


def integer_nth_root(x: int, n: int) -> int:
    """floor(x^(1/n)) for x >= 0, n >= 1, in exact integer arithmetic."""
    if x < 0 or n < 1:
        raise ValueError("need x >= 0, n >= 1")
    if x == 0:
        return 0
    if n == 1:
        return x
    r = 1 << -(-x.bit_length() // n)
    while True:
        nr = ((n - 1) * r + x // r ** (n - 1)) // n
        if nr >= r:
            break
        r = nr
    while r**n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def nth_root_floor(count: int, n: int, grid_bits: int = 20) -> Fraction:
    """Largest multiple of 2^-grid_bits whose n-th power is <= count.

    Certified by integer comparison; this is the exact dyadic lower bound
    on count^(1/n) used in growth estimates.
    """
    scale = 1 << grid_bits
    k = integer_nth_root(count * scale**n, n)
    assert k**n <= count * scale**n < (k + 1) ** n
    return Fraction(k, scale)


@dataclass(frozen=True)
class GrowthReport:
    """Ball sizes plus certified estimates and labeled heuristics.

    ball_sizes: (radius, size) pairs from radius 0.  omega_estimates:
    certified dyadic lower bounds size^(1/n).  poly_fit_degree and verdict
    are float-fit heuristics for human triage, never certificates.
    """

    ball_sizes: tuple[tuple[int, int], ...]
    alphabet_size: int
    exhausted: bool
    omega_estimates: tuple[tuple[int, Fraction], ...]
    poly_fit_degree: int | None
    verdict: str

    def csv(self) -> str:
        lines = ["n,count"]
        lines.extend(f"{n},{c}" for n, c in self.ball_sizes)
        return "\n".join(lines) + "\n"


def _poly_fit_degree(sizes: list[tuple[int, int]]) -> int | None:
    """Rounded log-log slope over the tail half of the data."""
    pts = [(n, c) for n, c in sizes if n >= 1 and c >= 1]
    if len(pts) < 4:
        return None
    tail = pts[len(pts) // 2 :]
    if len(tail) < 2:
        return None
    xs = [math.log(n) for n, _ in tail]
    ys = [math.log(c) for _, c in tail]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    denom = sum((x - mx) ** 2 for x in xs)
    if denom == 0:
        return None
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / denom
    return round(slope)


def _sse(xs: list[float], ys: list[float]) -> float:
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    denom = sum((x - mx) ** 2 for x in xs)
    if denom == 0:
        return float("inf")
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / denom
    inter = my - slope * mx
    return sum((y - (slope * x + inter)) ** 2 for x, y in zip(xs, ys))


def _verdict(sizes: list[tuple[int, int]], exhausted: bool) -> str:
    if exhausted:
        # a stabilized ball means a finite group: constant growth
        return "polynomial-evidence"
    pts = [(n, c) for n, c in sizes if n >= 1 and c >= 1]
    if len(pts) < 4:
        return "insufficient-data"
    ns = [float(n) for n, _ in pts]
    logn = [math.log(n) for n, _ in pts]
    logc = [math.log(c) for _, c in pts]
    sse_exp = _sse(ns, logc)
    sse_poly = _sse(logn, logc)
    return "exponential-evidence" if sse_exp < sse_poly else "polynomial-evidence"


def _build_report(counts: list[int], exhausted: bool, alphabet_size: int) -> GrowthReport:
    sizes = tuple(enumerate(counts))
    estimates = tuple(
        (n, nth_root_floor(c, n)) for n, c in sizes if n >= 1
    )
    return GrowthReport(
        ball_sizes=sizes,
        alphabet_size=alphabet_size,
        exhausted=exhausted,
        omega_estimates=estimates,
        poly_fit_degree=0 if exhausted else _poly_fit_degree(list(sizes)),
        verdict=_verdict(list(sizes), exhausted),
    )


def enumerate_ball(
    gens: list[SquareMatrix], radius: int, budget: int = 10**6
) -> GrowthReport:
    """Exact |B_S(n)| for n = 0..radius over the symmetrized alphabet.

    BudgetExceeded carries the completed-radius counts in .partial as a
    GrowthReport so callers can still write a table.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    letters = _alphabet(gens)
    try:
        counts, exhausted, _ = _bfs_ball(gens, radius, budget, want_words=False)
    except BudgetExceeded as exc:
        exc.partial = _build_report(exc.partial, False, len(letters))
        raise
    return _build_report(counts, exhausted, len(letters))


def estimate_omega(report: GrowthReport) -> Fraction:
    """Empirical growth estimate from sampled radii.

    Exactly 1 when the ball stabilized (the group is finite); otherwise the
    certified dyadic root bound at the largest sampled radius.  Ball sizes
    are submultiplicative, so per-radius roots decrease toward the true
    rate: the deepest sample is the meaningful one.  Empirical only; a
    certified lower bound for the rate itself needs a freeness certificate.
    """
    if report.exhausted:
        return Fraction(1)
    if len(report.omega_estimates) < 2:
        raise InsufficientData("need at least two ball radii")
    return report.omega_estimates[-1][1]


# ---------------------------------------------------------------------------
# regular pair search


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [list(r) for r in rows if any(r)]
    rank = 0
    cols = len(rows[0]) if rows else 0
    pivot_col = 0
    while rows and pivot_col < cols:
        piv = next((i for i, r in enumerate(rows) if r[pivot_col] != 0), None)
        if piv is None:
            pivot_col += 1
            continue
        rows[0], rows[piv] = rows[piv], rows[0]
        lead = rows[0][pivot_col]
        rows[0] = [x / lead for x in rows[0]]
        rows = [rows[0]] + [
            [x - r[pivot_col] * y for x, y in zip(r, rows[0])] if r[pivot_col] != 0 else r
            for r in rows[1:]
        ]
        rank += 1
        rows = rows[1:]
        pivot_col += 1
    return rank


def shemesh_no_common_eigenvector(a: SquareMatrix, b: SquareMatrix) -> bool:
    """True when A and B share no eigenvector over the algebraic closure.

    The intersection of the kernels of all commutators [A^k, B^l]
    (1 <= k, l < n) is nonzero exactly when a common eigenvector exists;
    ranks over Q equal ranks over any extension, so the rational kernel
    computation decides the closure question.
    """
    n = a.n
    a_pows = [a]
    b_pows = [b]
    for _ in range(n - 2):
        a_pows.append(a_pows[-1] * a)
        b_pows.append(b_pows[-1] * b)
    stacked: list[list[Fraction]] = []
    for ak in a_pows:
        for bl in b_pows:
            comm = ak * bl - bl * ak
            stacked.extend([list(row) for row in comm.entries])
    if not any(any(r) for r in stacked):
        return False  # everything commutes; common eigenvector exists
    return _rank(stacked) == n


class _EchelonSpan:
    """Incremental row space over Q for vectorized matrices."""

    def __init__(self, dim: int):
        self.dim = dim
        self.pivots: dict[int, list[Fraction]] = {}

    def reduce(self, vec: list[Fraction]) -> list[Fraction]:
        v = list(vec)
        for col in sorted(self.pivots):
            if v[col] != 0:
                pivot = self.pivots[col]
                f = v[col]
                v = [x - f * y for x, y in zip(v, pivot)]
        return v

    def insert(self, vec: list[Fraction]) -> bool:
        v = self.reduce(vec)
        lead = next((i for i, x in enumerate(v) if x != 0), None)
        if lead is None:
            return False
        lv = v[lead]
        self.pivots[lead] = [x / lv for x in v]
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def generated_algebra_dimension(a: SquareMatrix, b: SquareMatrix) -> int:
    """Dimension of the unital algebra generated by A and B inside n x n.

    Closure of span{I} under left multiplication by A and B; every word is
    reached because words factor letter by letter.
    """
    n = a.n
    span = _EchelonSpan(n * n)
    queue = [SquareMatrix.identity(n)]
    span.insert([x for row in queue[0].entries for x in row])
    while queue:
        m = queue.pop()
        for g in (a, b):
            p = g * m
            if span.insert([x for row in p.entries for x in row]):
                queue.append(p)
        if span.rank == n * n:
            break
    return span.rank


@dataclass(frozen=True)
class RegularPair:
    """First BFS pair passing regularity and genericity gates.

    word_a/word_b are shortlex-first words over the symmetrized alphabet;
    l1_grid is the per-(place, wedge) gap verdict for A; genericity records
    the Shemesh and Burnside outcomes, including purely informational wedge
    level records.
    """

    word_a: Word
    word_b: Word
    matrix_a: SquareMatrix
    matrix_b: SquareMatrix
    disc: Fraction
    l1_grid: dict
    genericity: dict


def find_regular_pair(
    gens: list[SquareMatrix],
    depth: int = 4,
    s: PlaceSet | None = None,
    budget: int = 10**6,
) -> RegularPair:
    """Scan the ball in shortlex order for a certified (A, B) seed pair.

    A: first element with squarefree characteristic polynomial whose (L1)
    gap grid has at least one certified-true entry.  B: first element
    sharing no eigenvector with A (Shemesh) such that A, B generate the
    full matrix algebra (Burnside).  Wedge-level genericity for
    2 <= m <= n/2 is recorded on the result but not required.
    """
    if s is None:
        s = s_support(gens)
    n = gens[0].n
    _, _, elements = _bfs_ball(gens, depth, budget, want_words=True)
    a_choice = None
    for word, mat in elements:
        if not charpoly_is_squarefree(mat):
            continue
        try:
            grid = l1_gap_report(mat, s)
        except Inconclusive:
            continue
        if any(grid.values()):
            a_choice = (word, mat, grid)
            break
    if a_choice is None:
        raise PairNotFound(f"no regular (L1)-capable element within radius {depth}")
    word_a, mat_a, grid = a_choice
    for word_b, mat_b in elements:
        if mat_b == mat_a:
            continue
        if not shemesh_no_common_eigenvector(mat_a, mat_b):
            continue
        dim = generated_algebra_dimension(mat_a, mat_b)
        if dim != n * n:
            continue
        genericity = {
            "shemesh": True,
            "burnside_dim": dim,
            "wedges": {},
        }
        for m in range(2, n // 2 + 1):
            wa, wb = wedge_power(mat_a, m), wedge_power(mat_b, m)
            genericity["wedges"][m] = {
                "shemesh": shemesh_no_common_eigenvector(wa, wb),
                "burnside_dim": generated_algebra_dimension(wa, wb),
            }
        return RegularPair(
            word_a=word_a,
            word_b=word_b,
            matrix_a=mat_a,
            matrix_b=mat_b,
            disc=discriminant(squarefree_part(char_poly(mat_a).poly)),
            l1_grid=grid,
            genericity=genericity,
        )
    raise PairNotFound(f"no generic partner for A within radius {depth}")
