"""Finite abelian p-groups and their endomorphism matrices.

A group ``Z_{p^e1}^n1 x ... x Z_{p^ek}^nk`` (e1 > ... > ek) is a
:class:`GroupShape`.  Coordinates are listed layer by layer, largest
exponent first.  An endomorphism is stored as a full integer matrix whose
row ``r`` is reduced modulo ``p^{e_r}``; entries of a block above the
diagonal (row exponent larger than column exponent) carry the factor
``p^{e_row - e_col}``.  With this layout the cross-layer reduction and
embedding conventions both reduce to "multiply as integers, then reduce row
``r`` mod ``p^{e_r}``".
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import polys
from .errors import ShapeError
from .polys import PolyModP, check_prime

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class GroupShape:
    p: int
    layers: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        check_prime(self.p)
        layers = tuple((int(e), int(n)) for e, n in self.layers)
        object.__setattr__(self, "layers", layers)
        exps = [e for e, _ in layers]
        if any(e <= 0 for e in exps) or any(n <= 0 for _, n in layers):
            raise ShapeError(f"exponents and multiplicities must be positive: {layers}")
        if any(a <= b for a, b in zip(exps, exps[1:])):
            raise ShapeError(f"exponents must be strictly decreasing: {layers}")

    @classmethod
    def from_exponents(cls, p: int, exponents) -> "GroupShape":
        """Shape of Z_{p^e} x ... for an unordered list of exponents (zeros dropped)."""
        counts: dict[int, int] = {}
        for e in exponents:
            if e < 0:
                raise ShapeError("negative exponent")
            if e:
                counts[e] = counts.get(e, 0) + 1
        return cls(p, tuple(sorted(counts.items(), reverse=True)))

    @classmethod
    def cyclic(cls, p: int, e: int) -> "GroupShape":
        return cls.from_exponents(p, [e])

    @classmethod
    def elementary(cls, p: int, n: int) -> "GroupShape":
        return cls.from_exponents(p, [1] * n)

    @cached_property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for e, n in self.layers for _ in range(n))

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        return tuple(self.p**e for e in self.exponents)

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def log_order(self) -> int:
        return sum(self.exponents)

    @property
    def order(self) -> int:
        return shape_order(self)

    @property
    def is_homocyclic(self) -> bool:
        return len(self.layers) <= 1

    @property
    def is_elementary(self) -> bool:
        return not self.layers or self.layers == ((1, self.layers[0][1]),)

    @cached_property
    def layer_slices(self) -> tuple[slice, ...]:
        out, start = [], 0
        for _, n in self.layers:
            out.append(slice(start, start + n))
            start += n
        return tuple(out)

    def unit_group_order(self) -> int:
        """|Aut(M)| from the block description of GL(M)."""
        p = self.p
        total = 1
        for i, (ei, ni) in enumerate(self.layers):
            total *= p ** ((ei - 1) * ni * ni) * polys.gl_order(ni, p)
            for j, (ej, nj) in enumerate(self.layers):
                if i != j:
                    total *= p ** (min(ei, ej) * ni * nj)
        return total

    def describe(self) -> str:
        if not self.layers:
            return "0"
        parts = []
        for e, n in self.layers:
            base = f"Z_{self.p ** e}"
            parts.append(base if n == 1 else f"{base}^{n}")
        return " x ".join(parts)

    def spec(self) -> str:
        """Shape in the command-line grammar, e.g. ``2^2^1 x 2^1^2``."""
        if not self.layers:
            return f"{self.p}^1^0"
        return " x ".join(f"{self.p}^{e}^{n}" for e, n in self.layers)

    def __str__(self) -> str:
        return self.describe()


def shape_order(shape: GroupShape) -> int:
    order = shape.p**shape.log_order
    if order > INT64_MAX:
        raise OverflowError(f"group order {shape.p}^{shape.log_order} exceeds the exact range")
    return order


@dataclass(frozen=True)
class GroupElement:
    shape: GroupShape
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.shape.rank:
            raise ShapeError("coordinate count does not match the shape")
        reduced = tuple(int(c) % m for c, m in zip(self.coords, self.shape.moduli))
        object.__setattr__(self, "coords", reduced)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        _same_shape(self.shape, other.shape)
        return GroupElement(self.shape, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __rmul__(self, k: int) -> "GroupElement":
        return GroupElement(self.shape, tuple(k * a for a in self.coords))

    def order(self) -> int:
        best = 1
        for c, m in zip(self.coords, self.shape.moduli):
            best = max(best, m // math.gcd(c, m))
        return best


def _same_shape(a: GroupShape, b: GroupShape) -> None:
    if a != b:
        raise ShapeError(f"shape mismatch: {a} vs {b}")


def structured_ok(shape: GroupShape, entries) -> bool:
    exps = shape.exponents
    p = shape.p
    for r, row in enumerate(entries):
        for c, x in enumerate(row):
            if exps[r] > exps[c] and x % p ** (exps[r] - exps[c]):
                return False
    return True


@dataclass(frozen=True)
class StructuredMatrix:
    """An endomorphism of ``shape`` written as a matrix of block form."""

    shape: GroupShape
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.shape.rank
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ShapeError(f"expected a {n}x{n} matrix for {self.shape}")
        rows = tuple(tuple(x % m for x in row) for row, m in zip(rows, self.shape.moduli))
        if not structured_ok(self.shape, rows):
            raise ShapeError("upper blocks must be divisible by p^(e_i - e_j)")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, shape: GroupShape) -> "StructuredMatrix":
        return cls(shape, polys.identity(shape.rank))

    @classmethod
    def zero(cls, shape: GroupShape) -> "StructuredMatrix":
        return cls(shape, polys.zeros(shape.rank))

    @classmethod
    def scalar(cls, shape: GroupShape, c: int) -> "StructuredMatrix":
        n = shape.rank
        return cls(shape, tuple(tuple(c if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def from_array(cls, shape: GroupShape, arr) -> "StructuredMatrix":
        return cls(shape, tuple(tuple(int(x) for x in row) for row in np.asarray(arr)))

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.shape.rank, self.shape.rank)

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(x for row in self.entries for x in row)

    def block(self, i: int, j: int) -> tuple[tuple[int, ...], ...]:
        rs, cs = self.shape.layer_slices[i], self.shape.layer_slices[j]
        return tuple(row[cs] for row in self.entries[rs])

    def __matmul__(self, other: "StructuredMatrix") -> "StructuredMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "StructuredMatrix") -> "StructuredMatrix":
        _same_shape(self.shape, other.shape)
        return StructuredMatrix(
            self.shape,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __sub__(self, other: "StructuredMatrix") -> "StructuredMatrix":
        _same_shape(self.shape, other.shape)
        return StructuredMatrix(
            self.shape,
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __pow__(self, k: int) -> "StructuredMatrix":
        result = StructuredMatrix.identity(self.shape)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def apply(self, x: GroupElement) -> GroupElement:
        return mat_apply(self, x)

    def is_unit(self) -> bool:
        return is_unit(self)

    def inverse(self) -> "StructuredMatrix":
        if not self.is_unit():
            raise ValueError("matrix is not invertible")
        # A^|GL(M)| = 1
        return self ** (self.shape.unit_group_order() - 1)

    def reduce_mod_p(self) -> polys.Mat:
        return reduce_mod_p(self)

    def __str__(self) -> str:
        return "[" + "; ".join(",".join(str(x) for x in row) for row in self.entries) + "]"


def mat_apply(a: StructuredMatrix, x: GroupElement) -> GroupElement:
    _same_shape(a.shape, x.shape)
    out = []
    for row, m in zip(a.entries, a.shape.moduli):
        out.append(sum(r * c for r, c in zip(row, x.coords)) % m)
    return GroupElement(a.shape, tuple(out))


def mat_mul(a: StructuredMatrix, b: StructuredMatrix) -> StructuredMatrix:
    _same_shape(a.shape, b.shape)
    cols = list(zip(*b.entries))
    return StructuredMatrix(
        a.shape,
        tuple(
            tuple(sum(x * y for x, y in zip(row, col)) % m for col in cols)
            for row, m in zip(a.entries, a.shape.moduli)
        ),
    )


def is_unit(a: StructuredMatrix) -> bool:
    p = a.shape.p
    for i in range(len(a.shape.layers)):
        if polys.det_p(polys.mat(a.block(i, i), p), p) == 0:
            return False
    return True


def reduce_mod_p(a: StructuredMatrix) -> polys.Mat:
    return polys.mat(a.entries, a.shape.p)


def min_poly_mod_p(abar: polys.Mat, p: int) -> PolyModP:
    return polys.min_poly_mod_p(abar, p)


def elementary_divisors_mod_p(abar: polys.Mat, p: int):
    return polys.elementary_divisors_mod_p(abar, p)


def irreducible_polys(p: int, d: int) -> list[PolyModP]:
    return polys.irreducible_polys(p, d)


def eval_poly_at_matrix(g: PolyModP | tuple[int, ...], a: StructuredMatrix) -> StructuredMatrix:
    """g(A) where g is lifted to Z[X] with least non-negative coefficients."""
    coeffs = g.coeffs if isinstance(g, PolyModP) else tuple(g)
    acc = StructuredMatrix.zero(a.shape)
    for c in reversed(coeffs):
        acc = acc @ a
        if c:
            acc = acc + StructuredMatrix.scalar(a.shape, c)
    return acc


def block_diagonal(shape: GroupShape, blocks) -> StructuredMatrix:
    """Assemble a matrix from square blocks placed along the diagonal, in coordinate order."""
    return StructuredMatrix(shape, polys.block_diag([tuple(tuple(r) for r in b) for b in blocks]))


# -- element sets as numpy arrays ------------------------------------------


def all_elements(shape: GroupShape) -> np.ndarray:
    """Every element, in lexicographic coordinate order (first coordinate slowest)."""
    shape_order(shape)
    if shape.rank == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(m, dtype=np.int64) for m in shape.moduli], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def radix_weights(moduli) -> np.ndarray:
    w = np.ones(len(moduli), dtype=np.int64)
    for i in range(len(moduli) - 2, -1, -1):
        w[i] = w[i + 1] * moduli[i + 1]
    return w


def encode(shape: GroupShape, arr: np.ndarray) -> np.ndarray:
    """Integer code of each element row; codes agree with :func:`all_elements` positions."""
    if shape.rank == 0:
        return np.zeros(len(arr), dtype=np.int64)
    return arr @ radix_weights(shape.moduli)


def decode(shape: GroupShape, codes) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, shape.rank), dtype=np.int64)
    rest = codes.ravel().copy()
    for i in range(shape.rank - 1, -1, -1):
        m = shape.moduli[i]
        out[:, i] = rest % m
        rest //= m
    return out


def apply_batch(a: StructuredMatrix | np.ndarray, xs: np.ndarray, moduli) -> np.ndarray:
    """Apply a matrix to each row of ``xs``."""
    arr = a.to_array() if isinstance(a, StructuredMatrix) else a
    return (xs @ arr.T) % np.asarray(moduli, dtype=np.int64)


def matmul_batch(a: np.ndarray, b: np.ndarray, moduli) -> np.ndarray:
    """Batched structured product; either operand may carry a leading batch axis."""
    return np.matmul(a, b) % np.asarray(moduli, dtype=np.int64)[:, None]


def matrix_radix(shape: GroupShape) -> np.ndarray:
    mods = [m for m in shape.moduli for _ in range(shape.rank)]
    return radix_weights(mods)


def encode_matrices(shape: GroupShape, mats: np.ndarray) -> np.ndarray:
    n = shape.rank
    flat = mats.reshape(-1, n * n)
    return flat @ matrix_radix(shape)


def enumerate_coords(moduli):
    return itertools.product(*[range(m) for m in moduli])
