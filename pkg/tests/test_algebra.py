import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambdamod import polys
from lambdamod.algebra import (
    GroupElement,
    GroupShape,
    StructuredMatrix,
    all_elements,
    apply_batch,
    eval_poly_at_matrix,
    irreducible_polys,
    is_unit,
    mat_apply,
    mat_mul,
    reduce_mod_p,
    shape_order,
)
from lambdamod.errors import ShapeError
from lambdamod.polys import PolyModP

Z4Z2 = GroupShape.from_exponents(2, [2, 1])


def el(shape, *coords):
    return GroupElement(shape, coords)


def sm(shape, rows):
    return StructuredMatrix(shape, rows)


def small_shapes():
    return [
        GroupShape.from_exponents(2, e)
        for e in ([1], [2], [1, 1], [2, 1], [3], [2, 2], [2, 1, 1], [1, 1, 1], [3, 1])
    ] + [GroupShape.from_exponents(3, e) for e in ([1], [2], [1, 1], [2, 1])]


def all_structured(shape):
    """Every structured matrix on a tiny shape, written out entry by entry."""
    p, ex = shape.p, shape.exponents
    ranges = []
    for r in range(shape.rank):
        for c in range(shape.rank):
            step = p ** max(0, ex[r] - ex[c])
            ranges.append(range(0, p ** ex[r], step))
    for flat in itertools.product(*ranges):
        n = shape.rank
        yield sm(shape, [flat[i * n : (i + 1) * n] for i in range(n)])


def test_shape_order_examples():
    assert shape_order(Z4Z2) == 8
    assert shape_order(GroupShape.cyclic(3, 4)) == 81
    assert shape_order(GroupShape.from_exponents(2, [2, 1, 1])) == 16
    assert shape_order(GroupShape(5, ())) == 1


def test_shape_validation():
    with pytest.raises(ShapeError):
        GroupShape(2, ((1, 1), (2, 1)))
    with pytest.raises(ValueError):
        GroupShape(4, ((1, 1),))
    assert GroupShape.from_exponents(2, [1, 2, 1, 0]).layers == ((2, 1), (1, 2))
    assert Z4Z2.spec() == "2^2^1 x 2^1^1"


def test_mat_apply_examples():
    ident = StructuredMatrix.identity(Z4Z2)
    assert mat_apply(ident, el(Z4Z2, 3, 1)) == el(Z4Z2, 3, 1)
    assert mat_apply(sm(Z4Z2, [[1, 2], [1, 1]]), el(Z4Z2, 1, 0)) == el(Z4Z2, 1, 1)
    assert mat_apply(sm(Z4Z2, [[3, 0], [1, 1]]), el(Z4Z2, 2, 1)) == el(Z4Z2, 2, 1)


def test_structure_rejects_bad_upper_block():
    with pytest.raises(ShapeError):
        sm(Z4Z2, [[1, 1], [0, 1]])


@pytest.mark.parametrize("shape", small_shapes()[:6], ids=str)
def test_matrices_are_exactly_the_endomorphisms(shape):
    # oracle: an integer matrix is an endomorphism iff it maps the generators
    # to elements of the right order; count those and compare with |M(M)|
    p, ex, n = shape.p, shape.exponents, shape.rank
    ends = 0
    elems = all_elements(shape)
    orders = [p**e for e in ex]
    for images in itertools.product(range(len(elems)), repeat=n):
        ok = all(
            all((orders[j] * int(elems[images[j]][r])) % p ** ex[r] == 0 for r in range(n))
            for j in range(n)
        )
        ends += ok
    assert ends == sum(1 for _ in all_structured(shape))


def test_nilpotent_square_matches_composition():
    nmat = sm(Z4Z2, [[0, 0], [1, 0]])
    sq = mat_mul(nmat, nmat)
    for x in all_elements(Z4Z2):
        g = el(Z4Z2, *x)
        assert mat_apply(sq, g) == mat_apply(nmat, mat_apply(nmat, g))


@pytest.mark.parametrize("shape", small_shapes(), ids=str)
def test_is_unit_matches_bijectivity(shape):
    count = 0
    elems = all_elements(shape)
    for a in all_structured(shape):
        img = apply_batch(a, elems, shape.moduli)
        bij = len(np.unique(img, axis=0)) == len(elems)
        assert is_unit(a) == bij
        count += bij
    assert count == shape.unit_group_order()


def test_is_unit_examples():
    assert is_unit(StructuredMatrix.identity(Z4Z2))
    assert not is_unit(sm(Z4Z2, [[2, 0], [0, 1]]))
    assert is_unit(sm(Z4Z2, [[1, 2], [1, 1]]))


def test_reduce_mod_p_examples():
    assert reduce_mod_p(sm(Z4Z2, [[3, 0], [1, 1]])) == ((1, 0), (1, 1))
    for a in all_structured(Z4Z2):
        assert reduce_mod_p(a)[0][1] == 0


def test_min_poly_examples():
    x1 = PolyModP(2, (1, 1))
    assert polys.min_poly_mod_p(polys.identity(2), 2) == x1
    f = PolyModP(2, (1, 1, 1))
    assert polys.min_poly_mod_p(polys.companion(f), 2) == f
    assert polys.min_poly_mod_p(((1, 0), (1, 1)), 2) == x1**2


def test_elementary_divisor_examples():
    assert polys.elementary_divisors_mod_p(polys.identity(3), 3) == [(PolyModP.x_minus(3, 1), (1, 1, 1))]
    g = PolyModP(2, (1, 1)) ** 2
    assert polys.elementary_divisors_mod_p(polys.companion(g), 2) == [(PolyModP(2, (1, 1)), (2,))]
    f = PolyModP(3, (1, 0, 1))  # X^2 + 1 is irreducible mod 3
    assert polys.elementary_divisors_mod_p(polys.companion(f), 3) == [(f, (1,))]


def test_irreducible_counts():
    assert irreducible_polys(2, 2) == [PolyModP(2, (1, 1, 1))]
    assert set(irreducible_polys(3, 1)) == {PolyModP.x_minus(3, 1), PolyModP.x_minus(3, 2)}
    assert len(irreducible_polys(2, 4)) == 3
    for p in (2, 3, 5):
        for d in (1, 2, 3):
            expected = polys.necklace_count(p, d) - (1 if d == 1 else 0)
            assert len(irreducible_polys(p, d)) == expected


def test_irreducibles_have_no_roots_or_factors():
    for p in (2, 3):
        for d in (2, 3):
            for f in irreducible_polys(p, d):
                assert all(f(x) != 0 for x in range(p))
                assert polys.factor(f) == [(f, 1)]


def test_eval_poly_examples():
    ident = StructuredMatrix.identity(Z4Z2)
    # integer lift X - 1, not the residue X + 1
    assert eval_poly_at_matrix((-1, 1), ident) == StructuredMatrix.zero(Z4Z2)
    a = sm(Z4Z2, [[1, 2], [1, 1]])
    assert eval_poly_at_matrix(PolyModP(2, (0, 1)), a) == a
    # (X-1)^2 lifted to integers is X^2 - 2X + 1, zero at [[1,0],[1,1]]
    b = sm(Z4Z2, [[1, 0], [1, 1]])
    g = eval_poly_at_matrix((1, -2, 1), b)
    for x in all_elements(Z4Z2):
        assert mat_apply(g, el(Z4Z2, *x)) == el(Z4Z2, 0, 0)


@st.composite
def structured(draw, shape=Z4Z2):
    p, ex, n = shape.p, shape.exponents, shape.rank
    rows = []
    for r in range(n):
        row = []
        for c in range(n):
            step = p ** max(0, ex[r] - ex[c])
            row.append(draw(st.integers(0, p ** ex[r] // step - 1)) * step)
        rows.append(row)
    return sm(shape, rows)


@given(structured(), structured(), st.integers(0, 3), st.integers(0, 1))
def test_mat_mul_is_composition(a, b, x0, x1):
    x = el(Z4Z2, x0, x1)
    assert mat_apply(mat_mul(a, b), x) == mat_apply(a, mat_apply(b, x))


@given(structured(), st.integers(0, 3), st.integers(0, 1), st.integers(0, 3), st.integers(0, 1))
def test_mat_apply_is_additive(a, x0, x1, y0, y1):
    x, y = el(Z4Z2, x0, x1), el(Z4Z2, y0, y1)
    assert mat_apply(a, x + y) == mat_apply(a, x) + mat_apply(a, y)


@given(structured())
def test_unit_inverse(a):
    if is_unit(a):
        assert mat_mul(a, a.inverse()) == StructuredMatrix.identity(Z4Z2)
