from collections import Counter

import numpy as np
import pytest

from lambdamod import polys
from lambdamod.algebra import GroupShape, StructuredMatrix
from lambdamod.conjugacy import class_partition
from lambdamod.decomposition import LambdaModule, lambda_isomorphic
from lambdamod.polys import PolyModP
from lambdamod.tables import (
    count_modules,
    enumerate_modules,
    families,
    family_rows,
    image_order,
    verify_table,
)

EXPECTED = {2: [1, 1, 5, 15, 59], 3: [1, 2, 14, 62, 344], 5: [1, 4, 44, 324, 2864]}


def oracle_classes(p, n):
    """(shape, image order) for one unit per conjugacy class, over every group of order p^n."""
    out = Counter()
    for lam in polys.partitions(n):
        shape = GroupShape.from_exponents(p, lam)
        units, _, labels = class_partition(shape)
        _, first = np.unique(labels, return_index=True)
        for i in first:
            m = LambdaModule(shape, StructuredMatrix.from_array(shape, units[i]))
            out[(shape.exponents, image_order(m))] += 1
    return out


def test_count_examples():
    assert count_modules(2, 4) == 59
    assert count_modules(2, 2) == 5
    assert count_modules(3, 3) == 62
    assert count_modules(7, 0) == 1
    with pytest.raises(ValueError):
        count_modules(4, 2)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_count_formula_values(p):
    assert [count_modules(p, n) for n in range(5)] == EXPECTED[p]


def test_image_order_examples():
    assert image_order(LambdaModule(GroupShape.from_exponents(3, [2, 1]), StructuredMatrix.identity(GroupShape.from_exponents(3, [2, 1])))) == 1
    assert image_order(LambdaModule.cyclic(2, 2, 3)) == 2
    comp = LambdaModule.from_rows(GroupShape.elementary(2, 2), polys.companion(PolyModP(2, (1, 1, 1))))
    assert image_order(comp) == 4


@pytest.mark.parametrize("p,n", [(p, n) for p in (2, 3, 5) for n in range(5) if (p, n) != (5, 4)])
def test_enumeration_matches_count(p, n):
    report = enumerate_modules(p, n)
    assert report.grand_total == len(report.rows) == count_modules(p, n)
    assert sum(report.per_shape.values()) == report.grand_total
    assert sum(report.per_stratum.values()) == report.grand_total


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)])
def test_table_matches_independent_class_count(p, n):
    # the oracle side never looks at the table
    oracle = oracle_classes(p, n)
    table = Counter((r.shape.exponents, r.image_order) for r in enumerate_modules(p, n).rows)
    assert table == oracle


def test_zero_module_row():
    rows = enumerate_modules(5, 0).rows
    assert len(rows) == 1 and rows[0].module.order == 1 and rows[0].image_order == 1


@pytest.mark.parametrize("p,n", [(2, n) for n in range(5)] + [(3, n) for n in range(5)] + [(5, 2), (5, 3)])
def test_verify_table(p, n):
    report = verify_table(p, n)
    assert report.ok, {k: c.failures for k, c in report.checks.items()}


def test_verify_partial_marker():
    report = verify_table(3, 4)
    assert report.ok and report.partial
    assert report.checks["completeness"].status == "partial"
    assert any("Z_3^4" in note and "skipped: budget" in note for note in report.checks["completeness"].notes)
    assert all(c.status == "pass" for k, c in report.checks.items() if k != "completeness")


def test_verify_trivial():
    report = verify_table(2, 0)
    assert report.ok and not report.partial


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_family_strata_formulas(p, n):
    for fam in families(n):
        rows = family_rows(p, fam)
        assert len(rows) == fam.total(p), fam.ident
        got = Counter(r.stratum for r in rows)
        assert {k: v for k, v in got.items()} == {k: f(p) for k, f in fam.strata.items() if f(p)}, fam.ident


def test_printed_and_generated_coincide_at_two():
    for fam in families(4):
        assert fam.number_total(2) == fam.total(2)
        assert {k: f(2) for k, f in fam.number_column.items()} == {k: f(2) for k, f in fam.strata.items()}


def test_corrected_unipotent_rows_at_three():
    # the two-parameter sibling rows split 2p+2 classes per b as {eta in 0,1} and {lambda a unit}
    fams = {f.ident: f for f in families(4) if f.exponents == (2, 1, 1)}
    eta, lam = fams["upper-shear+eta"], fams["two-way-shear"]
    assert eta.total(3) + lam.total(3) == eta.number_total(3) + lam.number_total(3)
    rows = family_rows(3, eta)
    by_b = {}
    for r in rows:
        by_b.setdefault(r.parameters["b"], []).append(r.module)
    for mods in by_b.values():
        for i in range(len(mods)):
            for j in range(i + 1, len(mods)):
                assert not lambda_isomorphic(mods[i], mods[j])


def test_rows_are_deterministic():
    a = [(r.family, tuple(r.parameters.items()), r.matrix.key) for r in enumerate_modules(3, 3).rows]
    b = [(r.family, tuple(r.parameters.items()), r.matrix.key) for r in enumerate_modules(3, 3).rows]
    assert a == b
