import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambdamod import polys
from lambdamod.algebra import GroupShape, StructuredMatrix, all_elements
from lambdamod.conjugacy import units_array
from lambdamod.decomposition import LambdaModule, lambda_isomorphic, log_p
from lambdamod.errors import PreconditionError
from lambdamod.polys import PolyModP
from lambdamod.quandle import (
    QuandleTable,
    alexander_quandle,
    count_connected,
    count_quandles,
    enumerate_quandles,
    extend,
    extend_padded,
    extend_to_order,
    image_module,
    is_connected,
    quandle_isomorphic_bruteforce,
    quandle_isomorphism,
    quandles_isomorphic,
)
from lambdamod.tables import enumerate_modules, image_order

from checks import extension_failures

QUANDLES = {2: [1, 1, 3, 7, 23], 3: [1, 2, 11, 45, 233], 5: [1, 4, 39, 277, 2369]}
CONNECTED = {2: [1, 0, 1, 2, 9], 3: [1, 1, 8, 30, 166], 5: [1, 3, 34, 230, 2016]}


def mod(p, exps, rows=None):
    shape = GroupShape.from_exponents(p, exps)
    if rows is None:
        return LambdaModule(shape, StructuredMatrix.identity(shape))
    return LambdaModule.from_rows(shape, rows)


def plain_table(module):
    """x * y = t x + (1 - t) y, written out with python integers."""
    shape = module.shape
    elems = [tuple(int(v) for v in x) for x in all_elements(shape)]
    index = {x: i for i, x in enumerate(elems)}
    t = module.action.entries
    n, mods = shape.rank, shape.moduli
    op = np.zeros((len(elems), len(elems)), dtype=np.int64)
    for i, x in enumerate(elems):
        tx = [sum(t[r][c] * x[c] for c in range(n)) for r in range(n)]
        for j, y in enumerate(elems):
            ty = [sum(t[r][c] * y[c] for c in range(n)) for r in range(n)]
            z = tuple((tx[r] + y[r] - ty[r]) % mods[r] for r in range(n))
            op[i, j] = index[z]
    return op


def sweep_classes(p, n):
    """Isomorphism classes of Alexander quandles of order p^n, from every unit on every group."""
    reps = []
    for lam in polys.partitions(n):
        shape = GroupShape.from_exponents(p, lam)
        units, _ = units_array(shape)
        for u in units:
            q = QuandleTable(plain_table(LambdaModule(shape, StructuredMatrix.from_array(shape, u))))
            if not any(quandle_isomorphism(q, r) is not None for r in reps):
                reps.append(q)
    return len(reps)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_count_formulas(p):
    assert [count_quandles(p, n) for n in range(5)] == QUANDLES[p]
    assert [count_connected(p, n) for n in range(5)] == CONNECTED[p]


@pytest.mark.parametrize("p,n", [(2, n) for n in range(5)] + [(3, n) for n in range(5)] + [(5, n) for n in range(4)])
def test_enumeration_counts(p, n):
    assert len(enumerate_quandles(p, n)) == QUANDLES[p][n]
    assert len(enumerate_quandles(p, n, connected_only=True)) == CONNECTED[p][n]


@pytest.mark.parametrize("p,n,expected", [(2, 2, 3), (2, 3, 7), (3, 2, 11)])
def test_independent_sweep(p, n, expected):
    # no table, no image criterion: every unit on every group, deduplicated by bijection search
    assert sweep_classes(p, n) == expected == count_quandles(p, n)


def test_trivial_quandle():
    q = alexander_quandle(mod(3, [2]))
    assert (q.op == np.arange(9)[:, None]).all()


def test_table_matches_plain_arithmetic():
    for m in (mod(2, [2, 1], [[3, 0], [1, 1]]), mod(3, [1, 1], [[0, 1], [2, 0]]), mod(5, [1], [[3]])):
        assert np.array_equal(alexander_quandle(m).op, plain_table(m))


def test_axiom_checks_reject_bad_tables():
    assert QuandleTable(np.array([[1, 1], [0, 0]])).axiom_failures()
    assert QuandleTable(np.array([[0, 0], [0, 1]])).axiom_failures()
    # idempotent, right-invertible but not distributive
    op = np.array([[0, 2, 1], [1, 1, 0], [2, 0, 2]])
    assert QuandleTable(op).axiom_failures() == ["(x*y)*z = (x*z)*(y*z) fails"]


def test_connected_examples():
    assert not is_connected(mod(2, [1, 1]))
    assert is_connected(mod(3, [1], [[2]]))
    assert not is_connected(mod(2, [2], [[3]]))


def test_image_module_examples():
    assert image_module(mod(2, [2, 1])).order == 1
    img = image_module(mod(2, [2], [[3]]))
    assert img.shape == GroupShape.cyclic(2, 1) and img.action.entries == ((1,),)
    comp = mod(2, [1, 1], polys.companion(PolyModP(2, (1, 1, 1))))
    assert lambda_isomorphic(image_module(comp), comp)


def test_quandles_isomorphic_examples():
    m = mod(2, [2], [[3]])
    assert quandles_isomorphic(m, m)
    assert quandles_isomorphic(mod(2, [2]), mod(2, [1, 1]))
    assert quandles_isomorphic(m, mod(2, [1, 1], [[1, 1], [0, 1]]))


def test_bruteforce_examples():
    trivial = QuandleTable(origin=mod(2, [2]))
    dihedral = QuandleTable(origin=mod(2, [2], [[3]]))
    assert quandle_isomorphic_bruteforce(trivial, trivial)
    assert not quandle_isomorphic_bruteforce(trivial, dihedral)
    other = QuandleTable(origin=mod(2, [1, 1], [[1, 1], [0, 1]]))
    assert quandle_isomorphic_bruteforce(dihedral, other)
    f = quandle_isomorphism(dihedral, other)
    a, b = dihedral.op, other.op
    assert all(b[f[x], f[y]] == f[a[x, y]] for x in range(4) for y in range(4))


def test_extend_examples():
    z = extend(LambdaModule.zero(2))
    assert z.extended.order == 1
    res = extend(mod(2, [1]))
    assert res.extended.order == 4 and res.image_matches() and res.intertwines()
    same = extend(mod(3, [1], [[2]]))
    assert same.extended == mod(3, [1], [[2]]) and same.steps == ()


def test_extend_to_order_examples():
    m = extend_to_order(LambdaModule.zero(3), 2)
    assert m.shape == GroupShape.cyclic(3, 2) and image_order(m) == 1
    m = extend_to_order(mod(2, [1]), 3)
    assert m.order == 8 and lambda_isomorphic(image_module(m), mod(2, [1]))
    n = mod(2, [1, 1], [[1, 1], [0, 1]])
    assert extend_to_order(n, 3) == extend(n).extended
    with pytest.raises(PreconditionError, match="2i - j"):
        extend_to_order(mod(2, [1]), 1)


@pytest.mark.parametrize("p", [2, 3])
def test_extension_contract(p):
    bad = []
    for k in range(4):
        if p**k > 27:
            break
        for row in enumerate_modules(p, k).rows:
            bad += [f"{row.family} {row.parameters}: {e}" for e in extension_failures(row.module)]
    assert bad == []


@pytest.mark.parametrize("p,n", [(2, n) for n in range(5)] + [(3, n) for n in range(4)] + [(5, n) for n in range(3)])
def test_emitted_tables_satisfy_axioms(p, n):
    for q in enumerate_quandles(p, n):
        assert q.table.axiom_failures() == []
        q.table.drop_table()


def test_enumerated_images_realized():
    for q in enumerate_quandles(3, 3):
        assert q.module.order == 27
        assert lambda_isomorphic(image_module(q.module), q.image)


def test_order_sixteen_pairs_sample():
    qs = enumerate_quandles(2, 4)
    for a, b in itertools.combinations(qs[:8], 2):
        assert quandles_isomorphic(a.module, b.module) == quandle_isomorphic_bruteforce(a.table, b.table)


SHAPES = [GroupShape.from_exponents(2, e) for e in ([2, 1], [1, 1, 1], [3])] + [
    GroupShape.from_exponents(3, e) for e in ([2], [1, 1])
]


@given(st.sampled_from(SHAPES), st.integers(0, 10**6), st.integers(0, 10**6))
def test_image_criterion_agrees_with_bruteforce(shape, i, j):
    units, _ = units_array(shape)
    a = LambdaModule(shape, StructuredMatrix.from_array(shape, units[i % len(units)]))
    b = LambdaModule(shape, StructuredMatrix.from_array(shape, units[j % len(units)]))
    qa, qb = QuandleTable(plain_table(a)), QuandleTable(plain_table(b))
    assert quandles_isomorphic(a, b) == quandle_isomorphic_bruteforce(qa, qb)


@given(st.sampled_from(SHAPES), st.integers(0, 10**6))
def test_every_alexander_table_is_a_quandle(shape, i):
    units, _ = units_array(shape)
    m = LambdaModule(shape, StructuredMatrix.from_array(shape, units[i % len(units)]))
    assert alexander_quandle(m).axiom_failures() == []
    assert is_connected(m) == (image_order(m) == m.order)


@given(st.sampled_from(SHAPES), st.integers(0, 10**6), st.integers(0, 3))
def test_padded_extension_properties(shape, i, extra):
    units, _ = units_array(shape)
    n = LambdaModule(shape, StructuredMatrix.from_array(shape, units[i % len(units)]))
    k = 2 * log_p(n.p, n.order) - log_p(n.p, image_order(n)) + extra
    res = extend_padded(n, k)
    assert res.extended.order == n.p**k
    assert res.image_matches() and res.intertwines()
