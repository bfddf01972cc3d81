import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambdamod import polys
from lambdamod.algebra import GroupShape, StructuredMatrix, encode, mat_mul
from lambdamod.conjugacy import are_conjugate_oracle, units_array, within_budget
from lambdamod.decomposition import (
    GeneralModule,
    LambdaModule,
    direct_sum,
    f_primary_components,
    lambda_isomorphic,
    prime_components,
    standardize_subgroup,
)
from lambdamod.errors import NotInvariantError
from lambdamod.polys import PolyModP
from lambdamod.tables import enumerate_modules

from checks import decomposition_failures


def module(p, exps, rows):
    return LambdaModule.from_rows(GroupShape.from_exponents(p, exps), rows)


def test_standardize_whole_module():
    m = module(2, [2, 1], [[3, 0], [1, 1]])
    sub = standardize_subgroup(m, [(1, 0), (0, 1)])
    assert sub.standardized.shape == m.shape
    assert lambda_isomorphic(sub.standardized, m)


def test_standardize_induced_action():
    m = LambdaModule.cyclic(2, 2, 3)
    sub = standardize_subgroup(m, [(2,)])
    assert sub.standardized.shape == GroupShape.cyclic(2, 1)
    assert sub.standardized.action.entries == ((1,),)


def test_standardize_closure():
    m = LambdaModule.from_rows(GroupShape.elementary(2, 2), polys.companion(PolyModP(2, (1, 1, 1))))
    with pytest.raises(NotInvariantError):
        standardize_subgroup(m, [(1, 0)], close=False)
    assert standardize_subgroup(m, [(1, 0)]).order == 4


def test_prime_components_examples():
    assert prime_components(GeneralModule()).components == {}
    a, b = LambdaModule.cyclic(2, 2, 3), LambdaModule.cyclic(3, 1, 2)
    comps = prime_components([a, b])
    assert sorted(comps.components) == [2, 3]
    assert comps.order == 12
    assert prime_components(a).components == {2: a}
    assert prime_components([LambdaModule.zero(2)]).components == {}


def test_single_factor_is_whole_module():
    m = module(2, [2, 1], [[1, 0], [1, 1]])
    comps = f_primary_components(m)
    assert len(comps) == 1 and comps[0][1].order == m.order


def test_direct_sum_example():
    s = direct_sum([LambdaModule.cyclic(3, 1, 1), LambdaModule.cyclic(3, 1, 2)])
    assert s.shape == GroupShape.elementary(3, 2)
    assert s.action.entries == ((1, 0), (0, 2))


def test_lambda_isomorphic_examples():
    a = module(2, [2, 1], [[3, 0], [1, 1]])
    assert lambda_isomorphic(a, a)
    assert lambda_isomorphic(a, module(2, [2, 1], [[1, 0], [1, 1]]))
    assert not lambda_isomorphic(LambdaModule.cyclic(3, 2, 4), LambdaModule.cyclic(3, 2, 7))


def test_mixed_factors_split():
    # diag(1, 2) plus the companion of X^2 + 1 over Z_3
    m = direct_sum(
        [
            LambdaModule.cyclic(3, 1, 1),
            LambdaModule.cyclic(3, 1, 2),
            LambdaModule.from_rows(GroupShape.elementary(3, 2), polys.companion(PolyModP(3, (1, 0, 1)))),
        ]
    )
    comps = f_primary_components(m)
    assert sorted(c.order for _, c in comps) == [3, 3, 9]
    assert decomposition_failures(m) == []


@pytest.mark.parametrize("p,n", [(2, n) for n in range(5)] + [(3, n) for n in range(4)])
def test_decomposition_on_table(p, n):
    bad = []
    for row in enumerate_modules(p, n).rows:
        bad += [f"{row.family} {row.parameters}: {e}" for e in decomposition_failures(row.module)]
    assert bad == []


@pytest.mark.slow
def test_decomposition_on_table_p3_n4():
    bad = []
    for row in enumerate_modules(3, 4).rows:
        bad += [f"{row.family} {row.parameters}: {e}" for e in decomposition_failures(row.module)]
    assert bad == []


SHAPES = [GroupShape.from_exponents(2, e) for e in ([2, 1], [3, 1], [2, 1, 1], [1, 1, 1])] + [
    GroupShape.from_exponents(3, e) for e in ([2, 1], [1, 1, 1])
]


@given(st.sampled_from(SHAPES), st.integers(0, 10**6), st.integers(0, 10**6))
def test_isomorphism_is_conjugation_invariant(shape, i, j):
    units, _ = units_array(shape)
    a = StructuredMatrix.from_array(shape, units[i % len(units)])
    q = StructuredMatrix.from_array(shape, units[j % len(units)])
    b = mat_mul(mat_mul(q, a), q.inverse())
    assert lambda_isomorphic(LambdaModule(shape, a), LambdaModule(shape, b))


@given(st.sampled_from(SHAPES), st.integers(0, 10**6), st.integers(0, 10**6))
def test_isomorphism_agrees_with_oracle(shape, i, j):
    units, _ = units_array(shape)
    a = StructuredMatrix.from_array(shape, units[i % len(units)])
    b = StructuredMatrix.from_array(shape, units[j % len(units)])
    assert within_budget(shape)
    expect = are_conjugate_oracle(a, b) is not None
    assert lambda_isomorphic(LambdaModule(shape, a), LambdaModule(shape, b)) == expect


@given(st.sampled_from(SHAPES), st.integers(0, 10**6))
def test_components_properties_random(shape, i):
    units, _ = units_array(shape)
    m = LambdaModule(shape, StructuredMatrix.from_array(shape, units[i % len(units)]))
    assert decomposition_failures(m) == []
    # every component is t-invariant
    for _, c in f_primary_components(m):
        moved = encode(shape, (m.action.to_array() @ c.embed_all().T).T % np.asarray(shape.moduli))
        assert np.isin(moved, c.codes).all()
