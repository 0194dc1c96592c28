"""Exact arithmetic over Q with places.

Rationals are stdlib Fraction throughout; "p/q" strings are the only
serialized form (never floats).  A place is either the archimedean absolute
value or a p-adic one; a PlaceSet is a finite set of places containing the
archimedean one, which is what all product-formula style bounds range over.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import GrowthcertError, WordIndexError

Rational = Fraction


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p" into a Fraction. Rejects floats and empty input."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    if any(c in s for c in ".eE") and not s.lstrip("+-").isdigit():
        raise ValueError(f"rational literal must be p/q, got {text!r}")
    return Fraction(s)


def format_rational(x: Fraction) -> str:
    """Canonical "p/q" form; integers render without the slash."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# primes and valuations


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; the base set covers all n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        x = rng.randrange(2, n)
        y, c, d = x, rng.randrange(1, n), 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gcd(abs(x - y), n)
        if d != n:
            return d


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| as {p: multiplicity}; n must be nonzero."""
    if n == 0:
        raise ValueError("cannot factor 0")
    n = abs(n)
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    rng = random.Random(0xFAC7)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.append(d)
        stack.append(m // d)
    return dict(sorted(out.items()))


def padic_valuation(x: Fraction, p: int) -> int:
    """v_p(x) for nonzero rational x.

    v_p(a/b) = v_p(a) - v_p(b); raises on x = 0 (valuation is +infinity).
    """
    if x == 0:
        raise ValueError("v_p(0) is +infinity")
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# places


@dataclass(frozen=True, order=True)
class Place:
    """One absolute value on Q: archimedean, or p-adic for a prime p.

    Ordering puts the archimedean place first, then primes ascending, which
    fixes iteration order everywhere (deterministic output requirement).
    """

    sort_key: int
    prime: int | None = None

    @staticmethod
    def archimedean() -> "Place":
        return Place(0, None)

    @staticmethod
    def finite(p: int) -> "Place":
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return Place(p, p)

    @property
    def is_archimedean(self) -> bool:
        return self.prime is None

    def __str__(self) -> str:
        return "archimedean" if self.prime is None else f"finite:{self.prime}"

    @staticmethod
    def parse(text: str) -> "Place":
        if text == "archimedean":
            return Place.archimedean()
        if text.startswith("finite:"):
            return Place.finite(int(text.split(":", 1)[1]))
        raise ValueError(f"bad place literal {text!r}")


ARCH = Place.archimedean()


@dataclass(frozen=True)
class PlaceSet:
    """Finite set of places, always containing the archimedean one."""

    places: tuple[Place, ...]

    def __post_init__(self):
        seen = sorted(set(self.places) | {ARCH})
        object.__setattr__(self, "places", tuple(seen))

    @staticmethod
    def from_primes(primes) -> "PlaceSet":
        return PlaceSet(tuple(Place.finite(p) for p in primes))

    def __iter__(self):
        return iter(self.places)

    def __len__(self):
        return len(self.places)

    def __contains__(self, v: Place) -> bool:
        return v in self.places

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(v.prime for v in self.places if v.prime is not None)

    def union(self, other: "PlaceSet") -> "PlaceSet":
        return PlaceSet(self.places + other.places)

    def __str__(self) -> str:
        return "{" + ", ".join(str(v) for v in self.places) + "}"


def abs_value(x: Fraction, v: Place) -> Fraction:
    """|x|_v as an exact rational.

    Archimedean: ordinary absolute value.  p-adic: p^(-v_p(x)), |0| = 0.
    Both are genuinely rational-valued on rational input, so no rounding.
    """
    x = Fraction(x)
    if v.is_archimedean:
        return abs(x)
    if x == 0:
        return Fraction(0)
    val = padic_valuation(x, v.prime)
    return Fraction(1, v.prime**val) if val >= 0 else Fraction(v.prime ** (-val))


# ---------------------------------------------------------------------------
# matrices


def _as_fraction_rows(rows) -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(tuple(Fraction(x) for x in row) for row in rows)
    n = len(out)
    if n == 0 or any(len(r) != n for r in out):
        raise ValueError("matrix must be square and nonempty")
    return out


@dataclass(frozen=True)
class SquareMatrix:
    """Immutable square matrix over Q.

    Hashable (used as BFS dictionary key), with exact determinant, inverse
    via adjugate-free Gauss-Jordan, and integer powers including negatives.
    """

    entries: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def from_rows(rows) -> "SquareMatrix":
        return SquareMatrix(_as_fraction_rows(rows))

    @staticmethod
    def identity(n: int) -> "SquareMatrix":
        return SquareMatrix(
            tuple(
                tuple(Fraction(1 if i == j else 0) for j in range(n))
                for i in range(n)
            )
        )

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i]

    def __mul__(self, other: "SquareMatrix") -> "SquareMatrix":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        cols = tuple(zip(*other.entries))
        return SquareMatrix(
            tuple(
                tuple(sum(a * b for a, b in zip(row, col)) for col in cols)
                for row in self.entries
            )
        )

    def __add__(self, other: "SquareMatrix") -> "SquareMatrix":
        return SquareMatrix(
            tuple(
                tuple(a + b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.entries, other.entries)
            )
        )

    def __sub__(self, other: "SquareMatrix") -> "SquareMatrix":
        return SquareMatrix(
            tuple(
                tuple(a - b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.entries, other.entries)
            )
        )

    def __neg__(self) -> "SquareMatrix":
        return self.scale(Fraction(-1))

    def scale(self, c: Fraction) -> "SquareMatrix":
        c = Fraction(c)
        return SquareMatrix(tuple(tuple(c * x for x in row) for row in self.entries))

    def transpose(self) -> "SquareMatrix":
        return SquareMatrix(tuple(zip(*self.entries)))

    def trace(self) -> Fraction:
        return sum((self.entries[i][i] for i in range(self.n)), Fraction(0))

    def det(self) -> Fraction:
        """Exact determinant by fraction Gaussian elimination."""
        n = self.n
        m = [list(row) for row in self.entries]
        det = Fraction(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
                det = -det
            det *= m[col][col]
            inv = 1 / m[col][col]
            for r in range(col + 1, n):
                if m[r][col] != 0:
                    f = m[r][col] * inv
                    for c in range(col, n):
                        m[r][c] -= f * m[col][c]
        return det

    def inverse(self) -> "SquareMatrix":
        """Exact inverse via Gauss-Jordan; raises on singular input."""
        n = self.n
        m = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
             for i, row in enumerate(self.entries)]
        for col in range(n):
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            m[col], m[piv] = m[piv], m[col]
            inv = 1 / m[col][col]
            m[col] = [x * inv for x in m[col]]
            for r in range(n):
                if r != col and m[r][col] != 0:
                    f = m[r][col]
                    m[r] = [a - f * b for a, b in zip(m[r], m[col])]
        return SquareMatrix(tuple(tuple(row[n:]) for row in m))

    def __pow__(self, k: int) -> "SquareMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        result = SquareMatrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_identity(self) -> bool:
        return self == SquareMatrix.identity(self.n)

    def max_abs_entry(self) -> Fraction:
        return max(abs(x) for row in self.entries for x in row)


def require_unimodular(m: SquareMatrix) -> SquareMatrix:
    """Ingestion gate for group elements: det must be exactly 1."""
    d = m.det()
    if d != 1:
        raise GrowthcertError(f"generator must have determinant 1, got {format_rational(d)}")
    return m


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """Word in the generators: a sequence of (index, sign) letters.

    Sign is +1 or -1 (inverse letter).  Token string form is space-separated
    indices with "^-1" marking inverses, e.g. "0 1 0^-1".
    """

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for idx, s in self.letters:
            if s not in (1, -1):
                raise ValueError("letter sign must be +1 or -1")
            if idx < 0:
                raise WordIndexError(f"negative generator index {idx}")

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((i, -s) for i, s in reversed(self.letters)))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        return Word(self.letters * k)

    def __str__(self) -> str:
        return " ".join(f"{i}" if s == 1 else f"{i}^-1" for i, s in self.letters)

    @staticmethod
    def parse(text: str) -> "Word":
        letters = []
        for tok in text.split():
            if tok.endswith("^-1"):
                letters.append((int(tok[:-3]), -1))
            else:
                letters.append((int(tok), 1))
        return Word(tuple(letters))

    @staticmethod
    def generator(i: int) -> "Word":
        return Word(((i, 1),))


def evaluate_word(word: Word, gens: list[SquareMatrix]) -> SquareMatrix:
    """Multiply out a word over the generator list (inverses exact)."""
    if not gens:
        raise ValueError("empty generator list")
    n = gens[0].n
    result = SquareMatrix.identity(n)
    for idx, sign in word.letters:
        if idx >= len(gens):
            raise WordIndexError(f"letter index {idx} out of range for {len(gens)} generators")
        g = gens[idx]
        result = result * (g if sign == 1 else g.inverse())
    return result


# ---------------------------------------------------------------------------
# norms and support


@dataclass(frozen=True)
class NormProfile:
    """Max-entry norm of a matrix at each place of an S-set, plus the max."""

    per_place: tuple[tuple[Place, Fraction], ...]

    def at(self, v: Place) -> Fraction:
        for place, value in self.per_place:
            if place == v:
                return value
        raise KeyError(str(v))

    @property
    def global_norm(self) -> Fraction:
        return max(value for _, value in self.per_place)


def matrix_norm(a: SquareMatrix, s: PlaceSet) -> NormProfile:
    """Entrywise-max norm at every place of s; exact rationals."""
    rows = []
    for v in s:
        rows.append((v, max(abs_value(x, v) for row in a.entries for x in row)))
    return NormProfile(tuple(rows))


def s_support(gens: list[SquareMatrix]) -> PlaceSet:
    """Places where some generator entry fails to be integral.

    Determinant-one matrices have adjugate inverses over the same
    denominators, so entry denominators of the generators alone determine
    the support; the archimedean place is always included.
    """
    primes: set[int] = set()
    for g in gens:
        for row in g.entries:
            for x in row:
                if x.denominator != 1:
                    primes.update(factorize(x.denominator))
    return PlaceSet.from_primes(sorted(primes))


def product_formula_check(x: Fraction) -> Fraction:
    """Product of |x|_v over the archimedean place and all primes of x.

    Equals 1 for every nonzero rational; exposed for tests.
    """
    if x == 0:
        raise ValueError("product formula needs nonzero input")
    primes: set[int] = set()
    if abs(x.numerator) != 1:
        primes |= set(factorize(x.numerator))
    if x.denominator != 1:
        primes |= set(factorize(x.denominator))
    total = abs(x)
    for p in sorted(primes):
        total *= abs_value(x, Place.finite(p))
    return total
