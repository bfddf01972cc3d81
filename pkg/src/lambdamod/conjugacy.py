"""Conjugacy in GL(M): exhaustive oracle, class partitions, fingerprints, RCF fast path."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import polys
from .algebra import (
    GroupShape,
    StructuredMatrix,
    all_elements,
    apply_batch,
    encode_matrices,
    eval_poly_at_matrix,
    matmul_batch,
    reduce_mod_p,
)
from .errors import BudgetExceeded, ShapeError
from .polys import PolyModP

DEFAULT_BUDGET = 10**6
BUDGET_ENV = "LAMBDA_CLASSIFY_BUDGET"


def current_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    return int(raw)


def within_budget(shape: GroupShape, budget: int | None = None) -> bool:
    limit = current_budget() if budget is None else budget
    return shape.unit_group_order() <= limit


def check_budget(shape: GroupShape, budget: int | None = None) -> None:
    if not within_budget(shape, budget):
        raise BudgetExceeded(
            f"|GL({shape})| = {shape.unit_group_order()} exceeds the enumeration budget"
        )


@dataclass(frozen=True)
class ConjugacyWitness:
    """A unit P with P A P^-1 = B."""

    conjugator: StructuredMatrix


# -- enumeration of GL(M) ----------------------------------------------------


@lru_cache(maxsize=None)
def _gl_block(p: int, e: int, n: int) -> np.ndarray:
    """All of GL(n, Z_{p^e}) as an array (count, n, n)."""
    m = p**e
    count = m ** (n * n)
    idx = np.arange(count, dtype=np.int64)
    flat = np.empty((count, n * n), dtype=np.int64)
    for k in range(n * n - 1, -1, -1):
        flat[:, k] = idx % m
        idx //= m
    mats = flat.reshape(count, n, n)
    dets = np.rint(np.linalg.det((mats % p).astype(float))).astype(np.int64) % p
    return mats[dets != 0]


def _entry_values(shape: GroupShape, r: int, c: int) -> np.ndarray:
    p = shape.p
    er, ec = shape.exponents[r], shape.exponents[c]
    if er > ec:
        return p ** (er - ec) * np.arange(p**ec, dtype=np.int64)
    return np.arange(p**er, dtype=np.int64)


@lru_cache(maxsize=8)
def _units(shape: GroupShape) -> tuple[np.ndarray, np.ndarray]:
    n = shape.rank
    factors = []
    layer_of = [i for i, (_, k) in enumerate(shape.layers) for _ in range(k)]
    for i, (e, k) in enumerate(shape.layers):
        factors.append(("block", shape.layer_slices[i], _gl_block(shape.p, e, k)))
    for r in range(n):
        for c in range(n):
            if layer_of[r] != layer_of[c]:
                factors.append(("entry", (r, c), _entry_values(shape, r, c)))
    total = 1
    for _, _, vals in factors:
        total *= len(vals)
    out = np.zeros((total, n, n), dtype=np.int64)
    idx = np.arange(total, dtype=np.int64)
    for kind, where, vals in reversed(factors):
        pick = idx % len(vals)
        idx //= len(vals)
        if kind == "block":
            out[:, where, where] = vals[pick]
        else:
            out[:, where[0], where[1]] = vals[pick]
    codes = encode_matrices(shape, out)
    order = np.argsort(codes, kind="stable")
    return out[order], codes[order]


def units_array(shape: GroupShape, budget: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """All units as an array sorted row-major lexicographically, with their codes."""
    check_budget(shape, budget)
    return _units(shape)


def enumerate_units(shape: GroupShape, budget: int | None = None):
    units, _ = units_array(shape, budget)
    for u in units:
        yield StructuredMatrix.from_array(shape, u)


def _unit_group_generators(m: int) -> list[int]:
    units = [u for u in range(1, m) if np.gcd(u, m) == 1] if m > 1 else []
    gens: list[int] = []
    reached = {1 % m} if m > 1 else set()
    for u in units:
        if u in reached:
            continue
        gens.append(u)
        frontier = list(reached)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = x * g % m
                    if y not in reached:
                        reached.add(y)
                        nxt.append(y)
            frontier = nxt
    return gens


@lru_cache(maxsize=None)
def unit_generators(shape: GroupShape) -> tuple[StructuredMatrix, ...]:
    """Generators of GL(M): in-layer transvections and scalings, cross-layer transvections."""
    n = shape.rank
    p = shape.p
    exps = shape.exponents
    gens = []

    def elementary(r, c, val):
        rows = [[int(i == j) for j in range(n)] for i in range(n)]
        rows[r][c] = val
        return StructuredMatrix(shape, rows)

    for i, (e, k) in enumerate(shape.layers):
        sl = shape.layer_slices[i]
        first = sl.start
        for u in _unit_group_generators(p**e):
            gens.append(elementary(first, first, u))
        for r in range(sl.start, sl.stop):
            for c in range(sl.start, sl.stop):
                if r != c:
                    gens.append(elementary(r, c, 1))
    for r in range(n):
        for c in range(n):
            if exps[r] != exps[c]:
                gens.append(elementary(r, c, p ** max(exps[r] - exps[c], 0)))
    return tuple(gens)


def _generator_arrays(shape: GroupShape):
    gens = unit_generators(shape)
    return [(g.to_array(), g.inverse().to_array()) for g in gens]


# -- oracle --------------------------------------------------------------------


def are_conjugate_oracle(a: StructuredMatrix, b: StructuredMatrix, budget: int | None = None):
    """Exhaustive search for P in GL(M) with P A = B P; returns the least such P or None."""
    if a.shape != b.shape:
        raise ShapeError("matrices live on different shapes")
    shape = a.shape
    units, _ = units_array(shape, budget)
    mods = shape.moduli
    chunk = 1 << 16
    aa, bb = a.to_array(), b.to_array()
    for start in range(0, len(units), chunk):
        block = units[start : start + chunk]
        lhs = matmul_batch(block, aa, mods)
        rhs = matmul_batch(bb, block, mods)
        hits = np.nonzero((lhs == rhs).all(axis=(1, 2)))[0]
        if len(hits):
            return ConjugacyWitness(StructuredMatrix.from_array(shape, block[hits[0]]))
    return None


@lru_cache(maxsize=8)
def _class_labels(shape: GroupShape) -> np.ndarray:
    units, codes = _units(shape)
    mods = shape.moduli
    rows, cols = [], []
    base = np.arange(len(units))
    for g, gi in _generator_arrays(shape):
        conj = matmul_batch(matmul_batch(g, units, mods), gi, mods)
        target = np.searchsorted(codes, encode_matrices(shape, conj))
        rows.append(base)
        cols.append(target)
    rows = np.concatenate(rows) if rows else base
    cols = np.concatenate(cols) if cols else base
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(len(units),) * 2)
    _, labels = connected_components(graph, directed=False)
    # renumber classes by their least member
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return remap[labels]


def class_partition(shape: GroupShape, budget: int | None = None):
    """(units, codes, labels): every unit with the index of its conjugacy class."""
    units, codes = units_array(shape, budget)
    return units, codes, _class_labels(shape)


def gl_f_mask(shape: GroupShape, units: np.ndarray, f: PolyModP) -> np.ndarray:
    """Which units reduce mod p to a matrix whose minimal polynomial is a power of f."""
    p = shape.p
    n = shape.rank
    bar = units % p
    acc = np.zeros_like(bar)
    eye = np.eye(n, dtype=np.int64)
    for c in reversed(f.coeffs):
        acc = (np.matmul(acc, bar) + c * eye) % p
    power = acc
    for _ in range(n - 1):
        power = np.matmul(power, acc) % p
    return ~power.any(axis=(1, 2))


def orbit_codes(a: StructuredMatrix) -> np.ndarray:
    """Sorted codes of the conjugacy class of ``a``, by closure under the generators."""
    shape = a.shape
    mods = shape.moduli
    gens = _generator_arrays(shape)
    frontier = a.to_array()[None]
    seen = encode_matrices(shape, frontier)
    while len(frontier):
        new = np.concatenate(
            [matmul_batch(matmul_batch(g, frontier, mods), gi, mods) for g, gi in gens]
        )
        codes, idx = np.unique(encode_matrices(shape, new), return_index=True)
        fresh = ~np.isin(codes, seen)
        frontier = new[idx[fresh]]
        seen = np.union1d(seen, codes[fresh])
    return seen


def _rcf_classes(shape: GroupShape, f: PolyModP):
    n = shape.rank
    p = shape.p
    if n % f.degree:
        return []
    total = polys.gl_order(n, p)
    out = []
    for lam in polys.partitions(n // f.degree):
        divisors = [(f, lam)]
        rep = StructuredMatrix(shape, polys.rational_canonical_form(divisors))
        out.append((rep, total // polys.centralizer_order(divisors)))
    return out


def conjugacy_classes(shape: GroupShape, f: PolyModP, budget: int | None = None, seeds=None):
    """Classes of GL(M)_f as (representative, class size) pairs.

    Elementary abelian shapes use rational canonical forms; other shapes
    partition the enumerated unit group.  With ``seeds`` the classes of the
    given matrices are grown by conjugating with generators instead, and the
    seeds serve as representatives.
    """
    if seeds is not None:
        return [(s, len(orbit_codes(s))) for s in seeds]
    if shape.is_elementary and shape.rank:
        return _rcf_classes(shape, f)
    units, _, labels = class_partition(shape, budget)
    mask = gl_f_mask(shape, units, f)
    sel = labels[mask]
    picked = units[mask]
    uniq, first, counts = np.unique(sel, return_index=True, return_counts=True)
    return [
        (StructuredMatrix.from_array(shape, picked[i]), int(c))
        for i, c in sorted(zip(first, counts), key=lambda t: t[0])
    ]


# -- invariants ------------------------------------------------------------------


def _probe_family(p: int) -> list[tuple[int, ...]]:
    """Integer polynomials: X - c and its powers with the root lifted as is, plus monic quadratics."""
    probes = []
    for c in range(p):
        probes.append((-c, 1))
    for lower in np.ndindex(p, p):
        probes.append(tuple(int(x) for x in lower) + (1,))
    for c in range(p):
        root = np.polynomial.Polynomial((-c, 1))
        for m in range(2, 5):
            probes.append(tuple(int(x) for x in (root**m).coef))
    return probes


def fingerprint(a: StructuredMatrix) -> tuple[int, ...]:
    """Orders of ker g(A) intersected with p^s M over a fixed probe family.

    Conjugate matrices have equal fingerprints; equal fingerprints prove nothing.
    """
    shape = a.shape
    p = shape.p
    elems = all_elements(shape)
    mods = np.asarray(shape.moduli, dtype=np.int64)
    top = shape.exponents[0] if shape.rank else 0
    layers = []
    for s in range(top + 1):
        layers.append(np.unique((elems * p**s) % mods, axis=0))
    out = []
    for g in _probe_family(p):
        ga = eval_poly_at_matrix(g, a)
        for sub in layers:
            img = apply_batch(ga, sub, shape.moduli)
            out.append(int((img == 0).all(axis=1).sum()))
    return tuple(out)


def rcf_conjugate(abar, bbar, p: int) -> bool:
    """Similarity over Z_p, decided by elementary divisors."""
    if len(abar) != len(bbar):
        return False
    da = sorted(polys.elementary_divisors_mod_p(abar, p), key=lambda t: (t[0].sort_key, t[1]))
    db = sorted(polys.elementary_divisors_mod_p(bbar, p), key=lambda t: (t[0].sort_key, t[1]))
    return da == db


def actions_conjugate(a: StructuredMatrix, b: StructuredMatrix, budget: int | None = None) -> bool:
    """Decide conjugacy in GL(M) by the cheapest sound route available."""
    if a.shape != b.shape:
        return False
    if a == b:
        return True
    shape = a.shape
    if shape.rank == 1:
        return False  # Aut of a cyclic group is abelian
    if shape.is_elementary:
        return rcf_conjugate(reduce_mod_p(a), reduce_mod_p(b), shape.p)
    if fingerprint(a) != fingerprint(b):
        return False
    if within_budget(shape, budget):
        return are_conjugate_oracle(a, b, budget) is not None
    raise BudgetExceeded(f"cannot decide conjugacy on {shape} within the budget")


def same_class(a: StructuredMatrix, b: StructuredMatrix) -> bool:
    units, codes, labels = class_partition(a.shape)
    ia = np.searchsorted(codes, encode_matrices(a.shape, a.to_array()[None]))[0]
    ib = np.searchsorted(codes, encode_matrices(b.shape, b.to_array()[None]))[0]
    return labels[ia] == labels[ib]
