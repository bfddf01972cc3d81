"""The catalogue of Lambda-modules of order p^n, n <= 4, with its counts and a verifier.

Every family is data: a parameter range, a matrix builder, the irreducible
factors its action is claimed to have mod p, and the expected number of rows
in each |(1-t)M| stratum as a function of p.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable

import numpy as np

from . import polys
from .algebra import GroupShape, StructuredMatrix, encode_matrices, reduce_mod_p
from .conjugacy import (
    class_partition,
    fingerprint,
    within_budget,
)
from .decomposition import LambdaModule, direct_sum, log_p, span
from .polys import PolyModP

MAX_N = 4


def count_modules(p: int, n: int) -> int:
    """Number of Lambda-modules of order p^n up to isomorphism."""
    polys.check_prime(p)
    formulas = {
        0: 1,
        1: p - 1,
        2: 2 * p**2 - p - 1,
        3: 3 * p**3 - 2 * p**2 - 1,
        4: 5 * p**4 - 2 * p**3 - 2 * p - 1,
    }
    if n not in formulas:
        raise ValueError(f"n must be between 0 and {MAX_N}, got {n}")
    return formulas[n]


def image_order(module: LambdaModule) -> int:
    """|(1-t)M|, from the span of the images of the standard generators."""
    if module.order == 1:
        return 1
    cols = np.array(module.one_minus_t.entries, dtype=np.int64).T
    return len(span(module.shape, cols))


# -- table rows ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TableRow:
    shape: GroupShape
    family: str
    parameters: dict
    module: LambdaModule
    image_order: int
    factors: tuple[PolyModP, ...] = ()

    @property
    def stratum(self) -> int:
        return log_p(self.shape.p, self.image_order)

    @property
    def matrix(self) -> StructuredMatrix:
        return self.module.action


@dataclass(frozen=True)
class ClassificationReport:
    p: int
    n: int
    rows: tuple[TableRow, ...]
    per_shape: dict
    per_stratum: dict
    grand_total: int


@dataclass(frozen=True)
class Family:
    ident: str
    exponents: tuple[int, ...]
    params: Callable[[int], Iterable[dict]]
    build: Callable[[int, dict], LambdaModule]
    factors: Callable[[int, dict], tuple[PolyModP, ...]]
    strata: dict  # stratum exponent -> count formula in p
    total: Callable[[int], int]
    # the catalogue's printed counts, where they differ from the generated ones
    printed_strata: dict | None = None
    printed_total: Callable[[int], int] | None = None

    @property
    def number_column(self) -> dict:
        return self.printed_strata if self.printed_strata is not None else self.strata

    @property
    def number_total(self) -> Callable[[int], int]:
        return self.printed_total if self.printed_total is not None else self.total


def _units(m: int) -> list[int]:
    return [b for b in range(1, m) if b % _prime_of(m)] if m > 1 else []


def _prime_of(m: int) -> int:
    for q in range(2, m + 1):
        if m % q == 0:
            return q
    raise ValueError(m)


def _lin(p: int, *roots: int) -> tuple[PolyModP, ...]:
    return tuple(sorted({PolyModP.x_minus(p, r % p) for r in roots}, key=lambda f: f.sort_key))


def _mod(p: int, exps, rows) -> LambdaModule:
    return LambdaModule.from_rows(GroupShape.from_exponents(p, exps), rows)


def _poly_params(f: PolyModP, name: str) -> dict:
    return {f"{name}_{i}": c for i, c in enumerate(f.coeffs[:-1])}


def _poly_of(p: int, params: dict, name: str, degree: int) -> PolyModP:
    return PolyModP(p, tuple(params[f"{name}_{i}"] for i in range(degree)) + (1,))


def _companion_module(f: PolyModP) -> LambdaModule:
    return _mod(f.p, [1] * f.degree, polys.companion(f))


def _jordan(b: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(b if i == j else int(j == i + 1) for j in range(k)) for i in range(k))


def _sum(*parts: LambdaModule) -> LambdaModule:
    return direct_sum(parts)


def _nondecreasing(values, k):
    return itertools.combinations_with_replacement(values, k)


# parameter helpers


def _cyclic_family(e: int, strata: dict, total) -> Family:
    return Family(
        "cyclic",
        (e,),
        lambda p: ({"b": b} for b in _units(p**e)),
        lambda p, q: _mod(p, [e], [[q["b"]]]),
        lambda p, q: _lin(p, q["b"]),
        strata,
        total,
    )


def _elementary_diag(k: int, strata: dict, total) -> Family:
    names = "bcde"[:k]
    return Family(
        "diagonal",
        (1,) * k,
        lambda p: (dict(zip(names, v)) for v in _nondecreasing(range(1, p), k)),
        lambda p, q: _mod(p, [1] * k, [[q[names[i]] if i == j else 0 for j in range(k)] for i in range(k)]),
        lambda p, q: _lin(p, *(q[x] for x in names)),
        strata,
        total,
    )


def _irr(p: int, d: int) -> list[PolyModP]:
    return polys.irreducible_polys(p, d)


def _half(x: int) -> int:
    assert x % 2 == 0
    return x // 2


def _families_n1() -> list[Family]:
    return [_cyclic_family(1, {0: lambda p: 1, 1: lambda p: p - 2}, lambda p: p - 1)]


def _families_n2() -> list[Family]:
    return [
        _cyclic_family(
            2,
            {0: lambda p: 1, 1: lambda p: p - 1, 2: lambda p: (p - 2) * p},
            lambda p: p**2 - p,
        ),
        _elementary_diag(
            2,
            {0: lambda p: 1, 1: lambda p: p - 2, 2: lambda p: comb(p - 1, 2)},
            lambda p: comb(p, 2),
        ),
        Family(
            "jordan",
            (1, 1),
            lambda p: ({"b": b} for b in range(1, p)),
            lambda p, q: _mod(p, [1, 1], _jordan(q["b"], 2)),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 2: lambda p: p - 2},
            lambda p: p - 1,
        ),
        Family(
            "companion",
            (1, 1),
            lambda p: (_poly_params(f, "b") for f in _irr(p, 2)),
            lambda p, q: _companion_module(_poly_of(p, q, "b", 2)),
            lambda p, q: (_poly_of(p, q, "b", 2),),
            {2: lambda p: _half(p**2 - p)},
            lambda p: _half(p**2 - p),
        ),
    ]


def _families_n3() -> list[Family]:
    return [
        _cyclic_family(
            3,
            {0: lambda p: 1, 1: lambda p: p - 1, 2: lambda p: p * (p - 1), 3: lambda p: p**2 * (p - 2)},
            lambda p: p**3 - p**2,
        ),
        Family(
            "diagonal",
            (2, 1),
            lambda p: ({"b": b, "c": c} for b in _units(p**2) for c in range(1, p)),
            lambda p, q: _mod(p, [2, 1], [[q["b"], 0], [0, q["c"]]]),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {
                0: lambda p: 1,
                1: lambda p: 2 * p - 3,
                2: lambda p: (p - 2) * (2 * p - 1),
                3: lambda p: p * (p - 2) ** 2,
            },
            lambda p: p * (p - 1) ** 2,
        ),
        Family(
            "lower-shear",
            (2, 1),
            lambda p: ({"b": b} for b in range(1, p)),
            lambda p, q: _mod(p, [2, 1], [[q["b"], 0], [1, q["b"]]]),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 3: lambda p: p - 2},
            lambda p: p - 1,
        ),
        Family(
            "upper-shear",
            (2, 1),
            lambda p: ({"b": b, "gamma": g} for b in range(1, p) for g in range(p)),
            lambda p, q: _mod(p, [2, 1], [[q["b"], p], [q["gamma"], q["b"]]]),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 2: lambda p: p - 1, 3: lambda p: p * (p - 2)},
            lambda p: p * (p - 1),
        ),
        _elementary_diag(
            3,
            {0: lambda p: 1, 1: lambda p: p - 2, 2: lambda p: comb(p - 1, 2), 3: lambda p: comb(p, 3)},
            lambda p: comb(p + 1, 3),
        ),
        Family(
            "jordan+diagonal",
            (1, 1, 1),
            lambda p: ({"b": b, "c": c} for b in range(1, p) for c in range(1, p)),
            lambda p, q: _sum(_mod(p, [1, 1], _jordan(q["b"], 2)), _mod(p, [1], [[q["c"]]])),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {1: lambda p: 1, 2: lambda p: 2 * (p - 2), 3: lambda p: (p - 2) ** 2},
            lambda p: (p - 1) ** 2,
        ),
        Family(
            "jordan",
            (1, 1, 1),
            lambda p: ({"b": b} for b in range(1, p)),
            lambda p, q: _mod(p, [1, 1, 1], _jordan(q["b"], 3)),
            lambda p, q: _lin(p, q["b"]),
            {2: lambda p: 1, 3: lambda p: p - 2},
            lambda p: p - 1,
        ),
        Family(
            "companion",
            (1, 1, 1),
            lambda p: (_poly_params(f, "b") for f in _irr(p, 3)),
            lambda p, q: _companion_module(_poly_of(p, q, "b", 3)),
            lambda p, q: (_poly_of(p, q, "b", 3),),
            {3: lambda p: (p**3 - p) // 3},
            lambda p: (p**3 - p) // 3,
        ),
        Family(
            "companion+diagonal",
            (1, 1, 1),
            lambda p: (
                {**_poly_params(f, "b"), "c": c} for f in _irr(p, 2) for c in range(1, p)
            ),
            lambda p, q: _sum(_companion_module(_poly_of(p, q, "b", 2)), _mod(p, [1], [[q["c"]]])),
            lambda p, q: (_poly_of(p, q, "b", 2),) + _lin(p, q["c"]),
            {2: lambda p: _half(p**2 - p), 3: lambda p: _half((p**2 - p) * (p - 2))},
            lambda p: _half(p * (p - 1) ** 2),
        ),
    ]


def _families_n4() -> list[Family]:
    def quad(p, q, name="b"):
        return _poly_of(p, q, name, 2)

    return [
        _cyclic_family(
            4,
            {
                0: lambda p: 1,
                1: lambda p: p - 1,
                2: lambda p: p * (p - 1),
                3: lambda p: p**2 * (p - 1),
                4: lambda p: p**3 * (p - 2),
            },
            lambda p: p**3 * (p - 1),
        ),
        Family(
            "diagonal",
            (3, 1),
            lambda p: ({"b": b, "c": c} for b in _units(p**3) for c in range(1, p)),
            lambda p, q: _mod(p, [3, 1], [[q["b"], 0], [0, q["c"]]]),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {
                0: lambda p: 1,
                1: lambda p: 2 * p - 3,
                2: lambda p: 2 * (p - 1) ** 2,
                3: lambda p: p * (p - 2) * (2 * p - 1),
                4: lambda p: p**2 * (p - 2) ** 2,
            },
            lambda p: p**2 * (p - 1) ** 2,
        ),
        Family(
            "lower-shear",
            (3, 1),
            lambda p: ({"b": b} for b in _units(p**2)),
            lambda p, q: _mod(p, [3, 1], [[q["b"], 0], [1, q["b"]]]),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 2: lambda p: p - 1, 4: lambda p: p * (p - 2)},
            lambda p: p * (p - 1),
        ),
        Family(
            "upper-shear",
            (3, 1),
            lambda p: ({"b": b, "gamma": g} for b in _units(p**2) for g in range(p)),
            lambda p, q: _mod(p, [3, 1], [[q["b"], p**2], [q["gamma"], q["b"]]]),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 2: lambda p: p**2 - 1, 4: lambda p: p**2 * (p - 2)},
            lambda p: p**2 * (p - 1),
        ),
        Family(
            "diagonal",
            (2, 2),
            lambda p: ({"b": b, "c": c} for b, c in _nondecreasing(_units(p**2), 2)),
            lambda p, q: _mod(p, [2, 2], [[q["b"], 0], [0, q["c"]]]),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {
                0: lambda p: 1,
                1: lambda p: p - 1,
                2: lambda p: p * (p - 2) + comb(p, 2),
                3: lambda p: p * (p - 1) * (p - 2),
                4: lambda p: comb(p * (p - 2) + 1, 2),
            },
            lambda p: comb(p * (p - 1) + 1, 2),
        ),
        Family(
            "upper-nilpotent",
            (2, 2),
            lambda p: ({"b": b} for b in _units(p**2)),
            lambda p, q: _mod(p, [2, 2], [[q["b"], p], [0, q["b"]]]),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 2: lambda p: p - 1, 4: lambda p: p * (p - 2)},
            lambda p: p * (p - 1),
        ),
        Family(
            "scalar+p*companion",
            (2, 2),
            lambda p: ({"b": b, **_poly_params(f, "b")} for b in range(1, p) for f in _irr(p, 2)),
            lambda p, q: _mod(
                p, [2, 2], [[q["b"], p], [-p * q["b_0"], q["b"] - p * q["b_1"]]]
            ),
            lambda p, q: _lin(p, q["b"]),
            {2: lambda p: _half(p**2 - p), 4: lambda p: _half((p**2 - p) * (p - 2))},
            lambda p: _half(p * (p - 1) ** 2),
        ),
        Family(
            "jordan-lift",
            (2, 2),
            lambda p: (
                {"b": b, "alpha": a, "gamma": g}
                for b in range(1, p)
                for a in range(p)
                for g in range(p)
            ),
            lambda p, q: _mod(
                p, [2, 2], [[q["b"] + p * q["alpha"], 1], [p * q["gamma"], q["b"]]]
            ),
            lambda p, q: _lin(p, q["b"]),
            {2: lambda p: p, 3: lambda p: p * (p - 1), 4: lambda p: p**2 * (p - 2)},
            lambda p: p**2 * (p - 1),
        ),
        Family(
            "companion-lift",
            (2, 2),
            lambda p: (
                {"alpha": a, "beta": be, **_poly_params(f, "b")}
                for f in _irr(p, 2)
                for a in range(p)
                for be in range(p)
            ),
            lambda p, q: _mod(
                p,
                [2, 2],
                [[p * q["alpha"], 1 + p * q["beta"]], [-q["b_0"], -q["b_1"]]],
            ),
            lambda p, q: (quad(p, q),),
            {4: lambda p: _half(p**2 * (p**2 - p))},
            lambda p: _half(p**2 * (p**2 - p)),
        ),
        Family(
            "diagonal",
            (2, 1, 1),
            lambda p: (
                {"b": b, "c": c, "d": d}
                for b in _units(p**2)
                for c, d in _nondecreasing(range(1, p), 2)
            ),
            lambda p, q: _mod(p, [2, 1, 1], [[q["b"], 0, 0], [0, q["c"], 0], [0, 0, q["d"]]]),
            lambda p, q: _lin(p, q["b"], q["c"], q["d"]),
            {
                0: lambda p: 1,
                1: lambda p: 2 * p - 3,
                2: lambda p: _half((p - 2) * (5 * p - 3)),
                3: lambda p: _half((p - 2) * (3 * p**2 - 6 * p + 1)),
                4: lambda p: _half(p * (p - 1) * (p - 2) ** 2),
            },
            lambda p: _half(p**2 * (p - 1) ** 2),
        ),
        Family(
            "lower-shear+diagonal",
            (2, 1, 1),
            lambda p: ({"b": b, "c": c} for b in range(1, p) for c in range(1, p)),
            lambda p, q: _mod(p, [2, 1, 1], [[q["b"], 0, 0], [1, q["b"], 0], [0, 0, q["c"]]]),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {1: lambda p: 1, 2: lambda p: p - 2, 3: lambda p: p - 2, 4: lambda p: (p - 2) ** 2},
            lambda p: (p - 1) ** 2,
        ),
        # Every eta != 0 is conjugate to eta = 1 here (rescale the last
        # coordinate); the invariant lives in the two-way-shear entry instead.
        # Same number of classes overall, different split between the two.
        Family(
            "upper-shear+eta",
            (2, 1, 1),
            lambda p: ({"b": b, "eta": h} for b in range(1, p) for h in range(2)),
            lambda p, q: _mod(
                p, [2, 1, 1], [[q["b"], p, 0], [0, q["b"], 0], [q["eta"], 0, q["b"]]]
            ),
            lambda p, q: _lin(p, q["b"]),
            {1: lambda p: 1, 2: lambda p: 1, 4: lambda p: 2 * (p - 2)},
            lambda p: 2 * (p - 1),
            printed_strata={1: lambda p: 1, 2: lambda p: p - 1, 4: lambda p: p * (p - 2)},
            printed_total=lambda p: p * (p - 1),
        ),
        Family(
            "two-way-shear",
            (2, 1, 1),
            lambda p: ({"b": b, "lambda": m} for b in range(1, p) for m in range(1, p)),
            lambda p, q: _mod(
                p, [2, 1, 1], [[q["b"], p, 0], [q["lambda"], q["b"], 0], [0, 0, q["b"]]]
            ),
            lambda p, q: _lin(p, q["b"]),
            {2: lambda p: p - 1, 4: lambda p: (p - 1) * (p - 2)},
            lambda p: (p - 1) ** 2,
            printed_strata={2: lambda p: 1, 4: lambda p: p - 2},
            printed_total=lambda p: p - 1,
        ),
        Family(
            "cyclic+jordan",
            (2, 1, 1),
            lambda p: ({"b": b, "c": c} for b in _units(p**2) for c in range(1, p)),
            lambda p, q: _sum(_mod(p, [2], [[q["b"]]]), _mod(p, [1, 1], _jordan(q["c"], 2))),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {
                1: lambda p: 1,
                2: lambda p: 2 * p - 3,
                3: lambda p: (p - 2) * (2 * p - 1),
                4: lambda p: p * (p - 2) ** 2,
            },
            lambda p: p * (p - 1) ** 2,
        ),
        Family(
            "cyclic-shift",
            (2, 1, 1),
            lambda p: ({"b": b} for b in range(1, p)),
            lambda p, q: _mod(p, [2, 1, 1], [[q["b"], 0, 0], [0, q["b"], 1], [1, 0, q["b"]]]),
            lambda p, q: _lin(p, q["b"]),
            {2: lambda p: 1, 4: lambda p: p - 2},
            lambda p: p - 1,
        ),
        Family(
            "cyclic-shift+eta",
            (2, 1, 1),
            lambda p: ({"b": b, "eta": h} for b in range(1, p) for h in range(p)),
            lambda p, q: _mod(
                p, [2, 1, 1], [[q["b"], p, 0], [0, q["b"], 1], [q["eta"], 0, q["b"]]]
            ),
            lambda p, q: _lin(p, q["b"]),
            {2: lambda p: 1, 3: lambda p: p - 1, 4: lambda p: p * (p - 2)},
            lambda p: p * (p - 1),
        ),
        _elementary_diag(
            4,
            {
                0: lambda p: 1,
                1: lambda p: p - 2,
                2: lambda p: comb(p - 1, 2),
                3: lambda p: comb(p, 3),
                4: lambda p: comb(p + 1, 4),
            },
            lambda p: comb(p + 2, 4),
        ),
        Family(
            "jordan+diagonal",
            (1, 1, 1, 1),
            lambda p: (
                {"b": b, "c": c, "d": d}
                for b in range(1, p)
                for c, d in _nondecreasing(range(1, p), 2)
            ),
            lambda p, q: _sum(
                _mod(p, [1, 1], _jordan(q["b"], 2)), _mod(p, [1, 1], [[q["c"], 0], [0, q["d"]]])
            ),
            lambda p, q: _lin(p, q["b"], q["c"], q["d"]),
            {
                1: lambda p: 1,
                2: lambda p: 2 * (p - 2),
                3: lambda p: _half((p - 2) * (3 * p - 5)),
                4: lambda p: _half((p - 1) * (p - 2) ** 2),
            },
            lambda p: _half(p * (p - 1) ** 2),
        ),
        Family(
            "jordan+jordan",
            (1, 1, 1, 1),
            lambda p: ({"b": b, "c": c} for b, c in _nondecreasing(range(1, p), 2)),
            lambda p, q: _sum(_mod(p, [1, 1], _jordan(q["b"], 2)), _mod(p, [1, 1], _jordan(q["c"], 2))),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {2: lambda p: 1, 3: lambda p: p - 2, 4: lambda p: comb(p - 1, 2)},
            lambda p: comb(p, 2),
        ),
        Family(
            "jordan3+diagonal",
            (1, 1, 1, 1),
            lambda p: ({"b": b, "c": c} for b in range(1, p) for c in range(1, p)),
            lambda p, q: _sum(_mod(p, [1, 1, 1], _jordan(q["b"], 3)), _mod(p, [1], [[q["c"]]])),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {2: lambda p: 1, 3: lambda p: 2 * (p - 2), 4: lambda p: (p - 2) ** 2},
            lambda p: (p - 1) ** 2,
        ),
        Family(
            "jordan",
            (1, 1, 1, 1),
            lambda p: ({"b": b} for b in range(1, p)),
            lambda p, q: _mod(p, [1] * 4, _jordan(q["b"], 4)),
            lambda p, q: _lin(p, q["b"]),
            {3: lambda p: 1, 4: lambda p: p - 2},
            lambda p: p - 1,
        ),
        Family(
            "companion-pair",
            (1, 1, 1, 1),
            lambda p: (
                {**_poly_params(f, "b"), **_poly_params(g, "c")}
                for f, g in _nondecreasing(sorted(_irr(p, 2), key=lambda f: f.coeffs), 2)
            ),
            lambda p, q: _sum(
                _companion_module(quad(p, q, "b")), _companion_module(quad(p, q, "c"))
            ),
            lambda p, q: tuple(
                sorted({quad(p, q, "b"), quad(p, q, "c")}, key=lambda f: f.sort_key)
            ),
            {4: lambda p: comb(_half(p**2 - p) + 1, 2)},
            lambda p: comb(_half(p**2 - p) + 1, 2),
        ),
        Family(
            "companion-jordan",
            (1, 1, 1, 1),
            lambda p: (_poly_params(f, "b") for f in _irr(p, 2)),
            lambda p, q: _mod(
                p,
                [1] * 4,
                [
                    [0, 1, 1, 0],
                    [-q["b_0"], -q["b_1"], 0, 1],
                    [0, 0, 0, 1],
                    [0, 0, -q["b_0"], -q["b_1"]],
                ],
            ),
            lambda p, q: (quad(p, q),),
            {4: lambda p: _half(p**2 - p)},
            lambda p: _half(p**2 - p),
        ),
        Family(
            "companion",
            (1, 1, 1, 1),
            lambda p: (_poly_params(f, "b") for f in _irr(p, 4)),
            lambda p, q: _companion_module(_poly_of(p, q, "b", 4)),
            lambda p, q: (_poly_of(p, q, "b", 4),),
            {4: lambda p: (p**4 - p**2) // 4},
            lambda p: (p**4 - p**2) // 4,
        ),
        Family(
            "upper-shear+diagonal",
            (2, 1, 1),
            lambda p: (
                {"b": b, "gamma": g, "c": c}
                for b in range(1, p)
                for g in range(p)
                for c in range(1, p)
                if b != c
            ),
            lambda p, q: _sum(
                _mod(p, [2, 1], [[q["b"], p], [q["gamma"], q["b"]]]), _mod(p, [1], [[q["c"]]])
            ),
            lambda p, q: _lin(p, q["b"], q["c"]),
            {
                2: lambda p: p - 2,
                3: lambda p: (p - 2) * (2 * p - 1),
                4: lambda p: p * (p - 2) * (p - 3),
            },
            lambda p: p * (p - 1) * (p - 2),
        ),
        Family(
            "cubic+diagonal",
            (1, 1, 1, 1),
            lambda p: ({**_poly_params(f, "b"), "c": c} for f in _irr(p, 3) for c in range(1, p)),
            lambda p, q: _sum(_companion_module(_poly_of(p, q, "b", 3)), _mod(p, [1], [[q["c"]]])),
            lambda p, q: (_poly_of(p, q, "b", 3),) + _lin(p, q["c"]),
            {3: lambda p: (p**3 - p) // 3, 4: lambda p: (p**3 - p) * (p - 2) // 3},
            lambda p: (p**3 - p) * (p - 1) // 3,
        ),
        Family(
            "cyclic+companion",
            (2, 1, 1),
            lambda p: ({"b": b, **_poly_params(f, "c")} for b in _units(p**2) for f in _irr(p, 2)),
            lambda p, q: _sum(_mod(p, [2], [[q["b"]]]), _companion_module(quad(p, q, "c"))),
            lambda p, q: (quad(p, q, "c"),) + _lin(p, q["b"]),
            {
                2: lambda p: _half(p**2 - p),
                3: lambda p: _half((p**2 - p) * (p - 1)),
                4: lambda p: _half((p**2 - p) * p * (p - 2)),
            },
            lambda p: _half(p**2 * (p - 1) ** 2),
        ),
        Family(
            "companion+diagonal",
            (1, 1, 1, 1),
            lambda p: (
                {**_poly_params(f, "b"), "c": c, "d": d}
                for f in _irr(p, 2)
                for c, d in _nondecreasing(range(1, p), 2)
            ),
            lambda p, q: _sum(
                _companion_module(quad(p, q)), _mod(p, [1, 1], [[q["c"], 0], [0, q["d"]]])
            ),
            lambda p, q: (quad(p, q),) + _lin(p, q["c"], q["d"]),
            {
                2: lambda p: _half(p**2 - p),
                3: lambda p: _half((p**2 - p) * (p - 2)),
                4: lambda p: _half((p**2 - p) * comb(p - 1, 2)),
            },
            lambda p: p**2 * (p - 1) ** 2 // 4,
        ),
        Family(
            "jordan+companion",
            (1, 1, 1, 1),
            lambda p: ({"b": b, **_poly_params(f, "c")} for b in range(1, p) for f in _irr(p, 2)),
            lambda p, q: _sum(_mod(p, [1, 1], _jordan(q["b"], 2)), _companion_module(quad(p, q, "c"))),
            lambda p, q: (quad(p, q, "c"),) + _lin(p, q["b"]),
            {3: lambda p: _half(p**2 - p), 4: lambda p: _half((p**2 - p) * (p - 2))},
            lambda p: _half(p * (p - 1) ** 2),
        ),
    ]


def families(n: int) -> list[Family]:
    if n == 0:
        return [
            Family(
                "zero",
                (),
                lambda p: iter([{}]),
                lambda p, q: LambdaModule.zero(p),
                lambda p, q: (),
                {0: lambda p: 1},
                lambda p: 1,
            )
        ]
    builders = {1: _families_n1, 2: _families_n2, 3: _families_n3, 4: _families_n4}
    if n not in builders:
        raise ValueError(f"n must be between 0 and {MAX_N}, got {n}")
    return builders[n]()


def family_rows(p: int, fam: Family) -> list[TableRow]:
    rows = []
    for params in fam.params(p):
        module = fam.build(p, params)
        rows.append(
            TableRow(
                module.shape,
                fam.ident,
                dict(params),
                module,
                image_order(module),
                fam.factors(p, params),
            )
        )
    return rows


def enumerate_modules(p: int, n: int) -> ClassificationReport:
    """One row per isomorphism class of Lambda-modules of order p^n."""
    polys.check_prime(p)
    rows: list[TableRow] = []
    for fam in families(n):
        rows.extend(family_rows(p, fam))
    per_shape = Counter(r.shape.describe() for r in rows)
    per_stratum = Counter(r.stratum for r in rows)
    return ClassificationReport(
        p,
        n,
        tuple(rows),
        dict(per_shape),
        dict(sorted(per_stratum.items())),
        len(rows),
    )


# -- verification -----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    status: str = "pass"  # pass, fail or partial
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.status = "fail"
        self.failures.append(msg)

    def skip(self, msg: str) -> None:
        if self.status == "pass":
            self.status = "partial"
        self.notes.append(msg)


@dataclass
class VerificationReport:
    p: int
    n: int
    checks: dict

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks.values())

    @property
    def partial(self) -> bool:
        return any(c.status == "partial" for c in self.checks.values())


def _factor_set(row: TableRow) -> tuple[PolyModP, ...]:
    if row.module.order == 1:
        return ()
    mp = polys.min_poly_mod_p(reduce_mod_p(row.matrix), row.shape.p)
    return tuple(sorted((f for f, _ in polys.factor(mp)), key=lambda f: f.sort_key))


def _all_divisor_data(p: int, n: int):
    """Every elementary-divisor multiset of an invertible n x n matrix over Z_p."""
    pieces = []
    for d in range(1, n + 1):
        for f in polys.irreducible_polys(p, d):
            pieces.append(f)

    def rec(i, left):
        if left == 0:
            yield ()
            return
        if i == len(pieces):
            return
        f = pieces[i]
        yield from rec(i + 1, left)
        for m in range(1, left // f.degree + 1):
            for lam in polys.partitions(m):
                for rest in rec(i + 1, left - m * f.degree):
                    yield ((f, lam),) + rest

    return list(rec(0, n))


def _divisor_key(abar, p):
    return tuple(sorted(((f.coeffs, lam) for f, lam in polys.elementary_divisors_mod_p(abar, p))))


def verify_table(p: int, n: int, budget: int | None = None) -> VerificationReport:
    """Soundness, distinctness, completeness, counts and strata of the generated table."""
    report = enumerate_modules(p, n)
    checks = {k: CheckResult(k) for k in ("soundness", "distinctness", "completeness", "counts", "strata")}

    for row in report.rows:
        if row.module.order > 1 and not row.matrix.is_unit():
            checks["soundness"].fail(f"{row.family} {row.parameters}: not a unit")
        claimed = tuple(sorted(row.factors, key=lambda f: f.sort_key))
        if _factor_set(row) != claimed:
            checks["soundness"].fail(f"{row.family} {row.parameters}: factors differ")

    by_shape: dict = {}
    for row in report.rows:
        by_shape.setdefault(row.shape, []).append(row)

    for shape, rows in by_shape.items():
        label = shape.describe() if shape.rank else "0"
        keys = [r.matrix.key for r in rows]
        if len(set(keys)) != len(keys):
            checks["distinctness"].fail(f"{label}: repeated matrices")
        if shape.rank <= 1:
            # Aut of a cyclic group is abelian: distinct matrices are distinct classes
            units = shape.unit_group_order() if shape.rank else 1
            if len(rows) != units:
                checks["completeness"].fail(f"{label}: {len(rows)} rows for {units} units")
            continue
        if shape.is_elementary:
            divs = [_divisor_key(reduce_mod_p(r.matrix), p) for r in rows]
            if len(set(divs)) != len(divs):
                checks["distinctness"].fail(f"{label}: rows with equal elementary divisors")
            expected = {
                tuple(sorted((f.coeffs, lam) for f, lam in data))
                for data in _all_divisor_data(p, shape.rank)
            }
            if set(divs) != expected:
                checks["completeness"].fail(f"{label}: elementary divisor data not covered")
        if within_budget(shape, budget):
            units, codes, labels = class_partition(shape, budget)
            mats = np.array([r.matrix.to_array() for r in rows])
            idx = np.searchsorted(codes, encode_matrices(shape, mats))
            found = labels[idx]
            if len(set(found.tolist())) != len(rows):
                checks["distinctness"].fail(f"{label}: two rows are conjugate")
            total = int(labels.max()) + 1
            if total != len(rows):
                checks["completeness"].fail(f"{label}: {total} classes but {len(rows)} rows")
        elif not shape.is_elementary:
            prints = Counter(fingerprint(r.matrix) for r in rows)
            unresolved = sum(c for c in prints.values() if c > 1)
            checks["distinctness"].skip(
                f"{label}: skipped: budget; fingerprints separate {len(rows) - unresolved} of {len(rows)} rows"
            )
            checks["completeness"].skip(f"{label}: skipped: budget")
        else:
            checks["completeness"].skip(
                f"{label}: skipped: budget; covered by elementary divisor data only (fast path)"
            )

    expected_total = count_modules(p, n)
    if report.grand_total != expected_total:
        checks["counts"].fail(f"grand total {report.grand_total} != {expected_total}")
    for fam in families(n):
        got = [r for r in report.rows if r.family == fam.ident and r.shape.exponents == fam.exponents]
        if len(got) != fam.total(p):
            checks["counts"].fail(f"{fam.ident} {fam.exponents}: {len(got)} != {fam.total(p)}")
        strata = Counter(r.stratum for r in got)
        for k, formula in fam.strata.items():
            if strata.get(k, 0) != formula(p):
                checks["strata"].fail(
                    f"{fam.ident} {fam.exponents} stratum p^{k}: {strata.get(k, 0)} != {formula(p)}"
                )
        extra = set(strata) - set(fam.strata)
        for k in extra:
            checks["strata"].fail(f"{fam.ident} {fam.exponents}: unexpected stratum p^{k}")
        if fam.printed_total is not None and fam.printed_total(p) != len(got):
            checks["counts"].notes.append(
                f"{fam.ident} {fam.exponents}: printed number {fam.printed_total(p)}, "
                f"generated {len(got)} (corrected representatives)"
            )
    return VerificationReport(p, n, checks)
