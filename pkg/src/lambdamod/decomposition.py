"""Lambda-modules, their prime and f-primary splittings, and direct sums.

A Lambda-module is a finite abelian p-group together with the automorphism
by which ``t`` acts.  Subgroups are handled as explicit element sets (the
groups in scope have at most a few thousand elements) and converted to
standalone modules by :func:`standardize_subgroup`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import polys
from .algebra import (
    GroupElement,
    GroupShape,
    StructuredMatrix,
    all_elements,
    apply_batch,
    decode,
    encode,
    eval_poly_at_matrix,
    reduce_mod_p,
)
from .errors import NotInvariantError, PreconditionError, ShapeError
from .polys import PolyModP


@dataclass(frozen=True)
class LambdaModule:
    shape: GroupShape
    action: StructuredMatrix

    def __post_init__(self):
        if self.action.shape != self.shape:
            raise ShapeError("action lives on a different shape")
        if not self.action.is_unit():
            raise ValueError("t must act by an automorphism")

    @classmethod
    def zero(cls, p: int) -> "LambdaModule":
        shape = GroupShape(p, ())
        return cls(shape, StructuredMatrix.identity(shape))

    @classmethod
    def from_rows(cls, shape: GroupShape, rows) -> "LambdaModule":
        return cls(shape, StructuredMatrix(shape, rows))

    @classmethod
    def cyclic(cls, p: int, e: int, b: int) -> "LambdaModule":
        return cls.from_rows(GroupShape.cyclic(p, e), [[b]])

    @property
    def p(self) -> int:
        return self.shape.p

    @property
    def order(self) -> int:
        return self.shape.order

    @cached_property
    def elements(self) -> np.ndarray:
        return all_elements(self.shape)

    @cached_property
    def one_minus_t(self) -> StructuredMatrix:
        return StructuredMatrix.identity(self.shape) - self.action

    def __str__(self) -> str:
        return f"({self.shape.describe()}, t={self.action})"


@dataclass(frozen=True)
class GeneralModule:
    """A module of arbitrary finite order, kept as its p-primary pieces."""

    components: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        out = 1
        for m in self.components.values():
            out *= m.order
        return out


# -- element-set helpers -----------------------------------------------------


def element_orders(shape: GroupShape, xs: np.ndarray) -> np.ndarray:
    if shape.rank == 0:
        return np.ones(len(xs), dtype=np.int64)
    mods = np.asarray(shape.moduli, dtype=np.int64)
    return (mods // np.gcd(xs, mods)).max(axis=1)


def span(shape: GroupShape, gens: np.ndarray) -> np.ndarray:
    """Sorted codes of the subgroup generated by the rows of ``gens``."""
    mods = np.asarray(shape.moduli, dtype=np.int64)
    current = np.zeros((1, shape.rank), dtype=np.int64)
    for g in np.asarray(gens, dtype=np.int64).reshape(-1, shape.rank):
        o = int(element_orders(shape, g[None, :])[0])
        multiples = (np.arange(o, dtype=np.int64)[:, None] * g[None, :]) % mods
        summed = (current[:, None, :] + multiples[None, :, :]).reshape(-1, shape.rank) % mods
        codes = np.unique(encode(shape, summed))
        current = decode(shape, codes)
    return np.unique(encode(shape, current))


def log_p(p: int, value: int) -> int:
    k = 0
    while value > 1:
        if value % p:
            raise ValueError(f"{value} is not a power of {p}")
        value //= p
        k += 1
    return k


def _p_basis(shape: GroupShape, codes: np.ndarray) -> list[np.ndarray]:
    """A basis of the subgroup with the given codes, cyclic orders non-increasing.

    Repeatedly take the first element of largest order modulo the span chosen so
    far, and correct it by an element of that span so that its order does not
    drop in the quotient.
    """
    p = shape.p
    mods = np.asarray(shape.moduli, dtype=np.int64)
    elems = decode(shape, codes)
    basis: list[np.ndarray] = []
    chosen = np.zeros(1, dtype=np.int64)
    while len(chosen) < len(codes):
        chosen_rows = decode(shape, chosen)
        rel = np.full(len(elems), -1)
        f = 0
        scaled = elems.copy()
        while (rel < 0).any():
            inside = np.isin(encode(shape, scaled), chosen)
            rel[(rel < 0) & inside] = f
            scaled = (scaled * p) % mods
            f += 1
        idx = int(np.argmax(rel))
        f = int(rel[idx])
        x = elems[idx]
        target = encode(shape, ((p**f) * x % mods)[None, :])[0]
        shifted = encode(shape, (chosen_rows * p**f) % mods)
        hit = np.nonzero(shifted == target)[0]
        if not len(hit):
            raise AssertionError("no order-preserving lift found")
        y = (x - chosen_rows[hit[0]]) % mods
        basis.append(y)
        chosen = span(shape, np.array(basis))
    return basis


@dataclass(frozen=True, eq=False)
class SubmoduleBasis:
    """A t-invariant subgroup of ``ambient`` presented as a standalone module.

    ``embedding`` has one column per standardized coordinate: the ambient
    element that coordinate vector maps to.
    """

    ambient: LambdaModule
    generators: tuple[GroupElement, ...]
    standardized: LambdaModule
    embedding: np.ndarray
    codes: np.ndarray

    @property
    def order(self) -> int:
        return len(self.codes)

    def embed(self, coords) -> GroupElement:
        vec = (self.embedding @ np.asarray(coords, dtype=np.int64)) % np.asarray(
            self.ambient.shape.moduli, dtype=np.int64
        )
        return GroupElement(self.ambient.shape, tuple(int(v) for v in vec))

    def embed_all(self) -> np.ndarray:
        xs = all_elements(self.standardized.shape)
        return apply_batch(self.embedding, xs, self.ambient.shape.moduli)


def _as_rows(shape: GroupShape, gens) -> np.ndarray:
    rows = []
    for g in gens:
        coords = g.coords if isinstance(g, GroupElement) else tuple(g)
        if len(coords) != shape.rank:
            raise ShapeError("generator has the wrong number of coordinates")
        rows.append(coords)
    return np.array(rows, dtype=np.int64).reshape(-1, shape.rank) % np.asarray(
        shape.moduli, dtype=np.int64
    )


def standardize_subgroup(ambient: LambdaModule, gens, close: bool = True) -> SubmoduleBasis:
    """Present the submodule spanned by ``gens`` as a module on a standard shape.

    With ``close`` the generators are first closed under the action of t;
    otherwise a span that is not t-invariant raises :class:`NotInvariantError`.
    """
    shape = ambient.shape
    mods = shape.moduli
    rows = _as_rows(shape, gens)
    codes = span(shape, rows)
    while True:
        moved = apply_batch(ambient.action, decode(shape, codes), mods)
        outside = ~np.isin(encode(shape, moved), codes)
        if not outside.any():
            break
        if not close:
            raise NotInvariantError("span of the generators is not t-invariant")
        rows = np.vstack([rows, moved[outside][:1]])
        codes = span(shape, rows)

    basis = _p_basis(shape, codes)
    basis_rows = np.array(basis, dtype=np.int64).reshape(-1, shape.rank)
    exps = [log_p(shape.p, int(o)) for o in element_orders(shape, basis_rows)]
    sub_shape = GroupShape.from_exponents(shape.p, exps)
    embedding = basis_rows.T

    # coordinates of each subgroup element in the new basis
    coords = all_elements(sub_shape)
    images = apply_batch(embedding, coords, mods)
    lookup = dict(zip(encode(shape, images).tolist(), map(tuple, coords.tolist())))
    if len(lookup) != len(codes):
        raise AssertionError("basis does not generate the subgroup injectively")
    moved = apply_batch(ambient.action, embedding.T, mods)
    cols = [lookup[int(c)] for c in encode(shape, moved)]
    action = StructuredMatrix(sub_shape, tuple(zip(*cols)) if cols else ())
    gens_out = tuple(GroupElement(shape, tuple(int(v) for v in r)) for r in rows)
    return SubmoduleBasis(ambient, gens_out, LambdaModule(sub_shape, action), embedding, codes)


def submodule_codes(module: LambdaModule, mat: StructuredMatrix) -> np.ndarray:
    """Sorted codes of the image of an endomorphism."""
    images = apply_batch(mat, module.elements, module.shape.moduli)
    return np.unique(encode(module.shape, images))


# -- splittings --------------------------------------------------------------


def prime_components(module) -> GeneralModule:
    """Split a module of composite order into its p-primary parts.

    Accepts a :class:`GeneralModule`, a single :class:`LambdaModule`, or a
    sequence of prime-power modules forming a block-diagonal presentation.
    """
    if isinstance(module, GeneralModule):
        parts = list(module.components.values())
    elif isinstance(module, LambdaModule):
        parts = [module]
    else:
        parts = list(module)
    out: dict[int, LambdaModule] = {}
    for part in parts:
        if not isinstance(part, LambdaModule):
            raise PreconditionError("composite modules must be given in blocked form")
        if part.order == 1:
            continue
        if part.p in out:
            out[part.p] = direct_sum([out[part.p], part])
        else:
            out[part.p] = part
    return GeneralModule(dict(sorted(out.items())))


@dataclass(frozen=True, eq=False)
class DirectSum:
    module: LambdaModule
    permutation: tuple[int, ...]  # merged coordinate i came from input coordinate permutation[i]


def direct_sum_with_permutation(parts) -> DirectSum:
    parts = list(parts)
    if not parts:
        raise PreconditionError("direct sum of nothing")
    ps = {m.p for m in parts}
    if len(ps) != 1:
        raise PreconditionError("direct sum needs a single prime")
    p = ps.pop()
    exps = [e for m in parts for e in m.shape.exponents]
    big = polys.block_diag([m.action.entries for m in parts])
    # stable sort of coordinates by exponent, largest first
    perm = tuple(sorted(range(len(exps)), key=lambda i: -exps[i]))
    shape = GroupShape.from_exponents(p, exps)
    rows = tuple(tuple(big[perm[i]][perm[j]] for j in range(len(perm))) for i in range(len(perm)))
    return DirectSum(LambdaModule(shape, StructuredMatrix(shape, rows)), perm)


def direct_sum(parts) -> LambdaModule:
    return direct_sum_with_permutation(parts).module


def f_primary_components(module: LambdaModule) -> list[tuple[PolyModP, SubmoduleBasis]]:
    """The components M_f, one per irreducible factor of the reduced minimal polynomial."""
    if module.order == 1:
        return []
    p = module.p
    n = module.shape.log_order
    factors = polys.factor(polys.min_poly_mod_p(reduce_mod_p(module.action), p))
    out = []
    for i, (f, _) in enumerate(factors):
        big_f = PolyModP.one(p)
        for j, (g, k) in enumerate(factors):
            if j != i:
                big_f = big_f * g**k
        # lift with least non-negative coefficients, then raise to the n-th power
        projector = eval_poly_at_matrix(big_f, module.action) ** n
        cols = list(zip(*projector.entries))
        out.append((f, standardize_subgroup(module, cols)))
    return out


def lambda_isomorphic(m: LambdaModule, n: LambdaModule) -> bool:
    """Module isomorphism: equal groups and conjugate actions, checked per f-primary piece."""
    from .conjugacy import actions_conjugate

    if m.shape != n.shape:
        return False
    if m.order == 1:
        return True
    if m.action == n.action:
        return True
    cm = f_primary_components(m)
    cn = f_primary_components(n)
    if [f for f, _ in cm] != [f for f, _ in cn]:
        return False
    for (_, a), (_, b) in zip(cm, cn):
        if a.standardized.shape != b.standardized.shape:
            return False
    for (_, a), (_, b) in zip(cm, cn):
        if not actions_conjugate(a.standardized.action, b.standardized.action):
            return False
    return True
