"""Polynomials and small dense matrices over the prime field Z_p.

Polynomials are stored constant-term first, so ``(1, 1, 1)`` is X^2+X+1.
Matrices are tuples of row tuples with entries in [0, p).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import ShapeError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise ValueError(f"p must be prime, got {p!r}")
    return p


def _trim(coeffs) -> tuple[int, ...]:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True, order=True)
class PolyModP:
    """A polynomial over Z_p; ``coeffs[i]`` is the coefficient of X^i."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(c % self.p for c in self.coeffs))

    @classmethod
    def x_minus(cls, p: int, a: int) -> "PolyModP":
        return cls(p, (-a, 1))

    @classmethod
    def one(cls, p: int) -> "PolyModP":
        return cls(p, (1,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    @property
    def sort_key(self) -> tuple:
        # lexicographic, constant term first; lower degree sorts first
        return (self.degree, self.coeffs)

    def __add__(self, other: "PolyModP") -> "PolyModP":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return PolyModP(self.p, (x + y for x, y in zip(a, b)))

    def __neg__(self) -> "PolyModP":
        return PolyModP(self.p, (-c for c in self.coeffs))

    def __sub__(self, other: "PolyModP") -> "PolyModP":
        return self + (-other)

    def __mul__(self, other: "PolyModP") -> "PolyModP":
        if self.is_zero or other.is_zero:
            return PolyModP(self.p, ())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return PolyModP(self.p, out)

    def __pow__(self, k: int) -> "PolyModP":
        result = PolyModP.one(self.p)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def monic(self) -> "PolyModP":
        inv = pow(self.coeffs[-1], -1, self.p)
        return PolyModP(self.p, (c * inv for c in self.coeffs))

    def divmod(self, other: "PolyModP") -> tuple["PolyModP", "PolyModP"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        rem = list(self.coeffs)
        inv = pow(other.coeffs[-1], -1, p)
        dq = len(rem) - len(other.coeffs) + 1
        quo = [0] * max(dq, 0)
        for i in range(dq - 1, -1, -1):
            c = rem[i + other.degree] * inv % p
            quo[i] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[i + j] = (rem[i + j] - c * b) % p
        return PolyModP(p, quo), PolyModP(p, rem)

    def __mod__(self, other: "PolyModP") -> "PolyModP":
        return self.divmod(other)[1]

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            if i == 0:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}{mono}")
        return "+".join(terms)


def poly_gcd(a: PolyModP, b: PolyModP) -> PolyModP:
    while not b.is_zero:
        a, b = b, a % b
    return a.monic() if not a.is_zero else a


def _monic_polys(p: int, d: int):
    # constant term is the most significant key
    for lower in itertools.product(range(p), repeat=d):
        yield PolyModP(p, lower + (1,))


@lru_cache(maxsize=None)
def _irreducibles(p: int, d: int) -> tuple[PolyModP, ...]:
    out = []
    smaller = [f for k in range(1, d // 2 + 1) for f in _irreducibles(p, k)]
    for f in _monic_polys(p, d):
        if d == 1 and f.coeffs[0] == 0:
            continue
        if f.coeffs[0] == 0:
            continue
        if all(not (f % g).is_zero for g in smaller):
            out.append(f)
    return tuple(out)


def irreducible_polys(p: int, d: int) -> list[PolyModP]:
    """All monic irreducibles of degree ``d`` over Z_p other than X."""
    check_prime(p)
    if d < 1:
        raise ValueError("degree must be at least 1")
    return list(_irreducibles(p, d))


def mobius(n: int) -> int:
    result, m, q = 1, n, 2
    while q * q <= m:
        if m % q == 0:
            m //= q
            if m % q == 0:
                return 0
            result = -result
        q += 1
    if m > 1:
        result = -result
    return result


def necklace_count(p: int, d: int) -> int:
    """Number of monic irreducibles of degree d over Z_p (X included)."""
    total = sum(mobius(e) * p ** (d // e) for e in range(1, d + 1) if d % e == 0)
    return total // d


def factor(f: PolyModP) -> list[tuple[PolyModP, int]]:
    """Factor a monic polynomial into irreducible powers by trial division."""
    out = []
    rest = f
    d = 1
    while rest.degree > 0:
        if d > rest.degree:
            raise ValueError(f"cannot factor {f}")
        candidates = _irreducibles(f.p, d)
        if d == 1:
            candidates = (PolyModP(f.p, (0, 1)),) + candidates
        for g in candidates:
            k = 0
            while True:
                q, r = rest.divmod(g)
                if not r.is_zero:
                    break
                rest, k = q, k + 1
            if k:
                out.append((g, k))
        d += 1
    return out


# -- matrices over Z_p ------------------------------------------------------

Mat = tuple[tuple[int, ...], ...]


def mat(rows, p: int) -> Mat:
    return tuple(tuple(int(x) % p for x in row) for row in rows)


def identity(n: int) -> Mat:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def zeros(n: int) -> Mat:
    return tuple((0,) * n for _ in range(n))


def mat_mul_p(a: Mat, b: Mat, p: int) -> Mat:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) % p for col in cols) for row in a)


def mat_add_p(a: Mat, b: Mat, p: int) -> Mat:
    return tuple(tuple((x + y) % p for x, y in zip(r, s)) for r, s in zip(a, b))


def mat_scale_p(a: Mat, c: int, p: int) -> Mat:
    return tuple(tuple(x * c % p for x in row) for row in a)


def rank_p(a, p: int) -> int:
    rows = [list(r) for r in a]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] % p), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] % p:
                c = rows[r][col]
                rows[r] = [(x - c * y) % p for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def det_p(a: Mat, p: int) -> int:
    rows = [list(r) for r in a]
    n = len(rows)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] % p), None)
        if pivot is None:
            return 0
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det = det * rows[col][col] % p
        inv = pow(rows[col][col], -1, p)
        for r in range(col + 1, n):
            c = rows[r][col] * inv % p
            if c:
                rows[r] = [(x - c * y) % p for x, y in zip(rows[r], rows[col])]
    return det % p


def eval_poly_mod_p(f: PolyModP, a: Mat) -> Mat:
    p = f.p
    n = len(a)
    acc = zeros(n)
    for c in reversed(f.coeffs):
        acc = mat_add_p(mat_mul_p(acc, a, p), mat_scale_p(identity(n), c, p), p)
    return acc


def min_poly_mod_p(a: Mat, p: int) -> PolyModP:
    """Monic minimal polynomial of a square matrix over Z_p (Krylov method)."""
    n = len(a)
    if n == 0:
        return PolyModP.one(p)
    powers = [identity(n)]
    while True:
        k = len(powers)
        # solve sum_{i<k} c_i A^i = -A^k, or find that no solution exists
        target = mat_mul_p(powers[-1], a, p) if k > 0 else identity(n)
        coeffs = _solve_combination([_flat(m) for m in powers], _flat(target), p)
        if coeffs is not None:
            return PolyModP(p, tuple(-c for c in coeffs) + (1,))
        powers.append(target)


def _flat(m: Mat) -> list[int]:
    return [x for row in m for x in row]


def _solve_combination(vectors: list[list[int]], target: list[int], p: int):
    """Coefficients c with sum c_i v_i = target over Z_p, or None."""
    k = len(vectors)
    # augmented system with one row per coordinate
    rows = [[v[r] for v in vectors] + [target[r]] for r in range(len(target))]
    pivots = []
    rank = 0
    for col in range(k):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] % p), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] % p:
                c = rows[r][col]
                rows[r] = [(x - c * y) % p for x, y in zip(rows[r], rows[rank])]
        pivots.append(col)
        rank += 1
    if any(rows[r][k] % p for r in range(rank, len(rows))):
        return None
    sol = [0] * k
    for r, col in enumerate(pivots):
        sol[col] = rows[r][k]
    return sol


def mat_power_p(a: Mat, k: int, p: int) -> Mat:
    result = identity(len(a))
    for _ in range(k):
        result = mat_mul_p(result, a, p)
    return result


def elementary_divisors_mod_p(a: Mat, p: int) -> list[tuple[PolyModP, tuple[int, ...]]]:
    """Elementary divisors grouped by irreducible factor, as (f, partition)."""
    n = len(a)
    out = []
    for f, mult in factor(min_poly_mod_p(a, p)):
        fa = eval_poly_mod_p(f, a)
        nullities = [0]
        power = identity(n)
        for _ in range(mult):
            power = mat_mul_p(power, fa, p)
            nullities.append(n - rank_p(power, p))
        d = f.degree
        at_least = [(nullities[k] - nullities[k - 1]) // d for k in range(1, mult + 1)]
        parts = []
        for k in range(mult, 0, -1):
            exactly = at_least[k - 1] - (at_least[k] if k < mult else 0)
            parts.extend([k] * exactly)
        out.append((f, tuple(parts)))
    return out


def char_poly_mod_p(a: Mat, p: int) -> PolyModP:
    result = PolyModP.one(p)
    for f, parts in elementary_divisors_mod_p(a, p):
        result = result * f ** sum(parts)
    return result


def companion(f: PolyModP) -> Mat:
    """Companion matrix with ones on the superdiagonal and -coefficients in the last row."""
    d = f.degree
    p = f.p
    rows = []
    for i in range(d - 1):
        rows.append(tuple(int(j == i + 1) for j in range(d)))
    rows.append(tuple(-c % p for c in f.coeffs[:d]))
    return tuple(rows)


def block_diag(blocks: list[Mat]) -> Mat:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[off + i][off + j] = x
        off += len(b)
    return tuple(tuple(r) for r in out)


def rational_canonical_form(divisors: list[tuple[PolyModP, tuple[int, ...]]]) -> Mat:
    blocks = []
    for f, parts in divisors:
        for k in parts:
            blocks.append(companion(f ** k))
    return block_diag(blocks)


def partitions(n: int, max_part: int | None = None):
    """Partitions of n as weakly decreasing tuples, largest first."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def gl_order(n: int, q: int) -> int:
    out = 1
    for i in range(n):
        out *= q**n - q**i
    return out


def centralizer_order(divisors: list[tuple[PolyModP, tuple[int, ...]]]) -> int:
    """Order of the centralizer in GL(n, p) of a matrix with these elementary divisors."""
    out = Fraction(1)
    for f, parts in divisors:
        q = f.p ** f.degree
        conj = [sum(1 for x in parts if x > i) for i in range(parts[0])] if parts else []
        out *= q ** sum(c * c for c in conj)
        for k in set(parts):
            for j in range(1, parts.count(k) + 1):
                out *= Fraction(q**j - 1, q**j)
    assert out.denominator == 1
    return int(out)


def check_square(a) -> None:
    if any(len(row) != len(a) for row in a):
        raise ShapeError("matrix must be square")
