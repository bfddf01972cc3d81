"""Alexander quandles: tables, axioms, isomorphism, extensions and enumeration."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import polys
from .algebra import GroupShape, StructuredMatrix, all_elements, apply_batch, encode
from .decomposition import (
    LambdaModule,
    direct_sum_with_permutation,
    lambda_isomorphic,
    log_p,
    standardize_subgroup,
)
from .errors import BudgetExceeded, PreconditionError
from .tables import MAX_N, enumerate_modules, image_order

BRUTEFORCE_LIMIT = 16


def count_quandles(p: int, n: int) -> int:
    polys.check_prime(p)
    formulas = {
        0: 1,
        1: p - 1,
        2: 2 * p**2 - 2 * p - 1,
        3: 3 * p**3 - 4 * p**2 + p - 3,
        4: 5 * p**4 - 6 * p**3 + p**2 - 6 * p - 1,
    }
    if n not in formulas:
        raise ValueError(f"n must be between 0 and {MAX_N}, got {n}")
    return formulas[n]


def count_connected(p: int, n: int) -> int:
    polys.check_prime(p)
    formulas = {
        0: 1,
        1: p - 2,
        2: 2 * p**2 - 3 * p - 1,
        3: 3 * p**3 - 6 * p**2 + p,
        4: 5 * p**4 - 9 * p**3 + p**2 - 2 * p + 1,
    }
    if n not in formulas:
        raise ValueError(f"n must be between 0 and {MAX_N}, got {n}")
    return formulas[n]


# -- tables ----------------------------------------------------------------------


def _module_table(module: LambdaModule) -> np.ndarray:
    shape = module.shape
    if shape.rank == 0:
        return np.zeros((1, 1), dtype=np.int64)
    xs = module.elements
    tx = apply_batch(module.action, xs, shape.moduli)
    sy = apply_batch(module.one_minus_t, xs, shape.moduli)
    mods = np.asarray(shape.moduli, dtype=np.int64)
    prod = (tx[:, None, :] + sy[None, :, :]) % mods
    return encode(shape, prod.reshape(-1, shape.rank)).reshape(len(xs), len(xs))


class QuandleTable:
    """A finite quandle as an operation table on 0..size-1, op[x, y] = x * y.

    Tables built from a module are computed on first use; ``image`` records the
    module N = (1-t)M the quandle was built to realize, when known.
    """

    def __init__(self, op=None, origin: LambdaModule | None = None, image: LambdaModule | None = None):
        if op is None and origin is None:
            raise ValueError("need an operation table or an origin module")
        self._op = None if op is None else np.asarray(op, dtype=np.int64)
        self.origin = origin
        self.image = image

    @property
    def op(self) -> np.ndarray:
        if self._op is None:
            self._op = _module_table(self.origin)
        return self._op

    @property
    def size(self) -> int:
        if self._op is None:
            return self.origin.order
        return len(self._op)

    def drop_table(self) -> None:
        if self.origin is not None:
            self._op = None

    def axiom_failures(self, distributive: bool = True) -> list[str]:
        out = []
        if not check_idempotent(self.op):
            out.append("x*x = x fails")
        if not check_right_invertible(self.op):
            out.append("right translations are not bijections")
        if distributive and not check_right_distributive(self.op):
            out.append("(x*y)*z = (x*z)*(y*z) fails")
        return out


def check_idempotent(op: np.ndarray) -> bool:
    return bool((np.diagonal(op) == np.arange(len(op))).all())


def check_right_invertible(op: np.ndarray) -> bool:
    n = len(op)
    cols = np.sort(op, axis=0)
    return bool((cols == np.arange(n)[:, None]).all())


def check_right_distributive(op: np.ndarray) -> bool:
    """Exhaustive over all triples, one right translation at a time."""
    small = op.astype(np.int32 if len(op) > 32000 else np.int16)
    cols = np.ascontiguousarray(small.T)
    for r in cols:
        # (x*y)*z versus (x*z)*(y*z), for all x, y at once
        if not np.array_equal(np.take(r, small), small.take(r, axis=0).take(r, axis=1)):
            return False
    return True


def alexander_quandle(module: LambdaModule, check: bool = True) -> QuandleTable:
    """x * y = t x + (1 - t) y on the elements of ``module`` in code order."""
    q = QuandleTable(origin=module)
    if check:
        bad = q.axiom_failures()
        if bad:
            raise AssertionError("; ".join(bad))
    return q


def is_connected(module: LambdaModule) -> bool:
    if module.order == 1:
        return True
    return module.one_minus_t.is_unit()


def image_module(module: LambdaModule) -> LambdaModule:
    """(1-t)M with its induced action, on a standard shape."""
    if module.order == 1 or not any(any(r) for r in module.one_minus_t.entries):
        return LambdaModule.zero(module.p)
    cols = list(zip(*module.one_minus_t.entries))
    return standardize_subgroup(module, cols, close=False).standardized


def quandles_isomorphic(m: LambdaModule, n: LambdaModule) -> bool:
    """Alexander quandles are isomorphic iff equal order and isomorphic (1-t)-images."""
    if m.order != n.order:
        return False
    if m.order == 1:
        return True
    return lambda_isomorphic(image_module(m), image_module(n))


# -- brute-force quandle isomorphism ---------------------------------------------------


def _profiles(op: np.ndarray) -> list[tuple]:
    n = len(op)
    out = []
    for x in range(n):
        col = op[:, x]
        seen = np.zeros(n, dtype=bool)
        cycles = []
        for s in range(n):
            if seen[s]:
                continue
            k, y = 0, s
            while not seen[y]:
                seen[y] = True
                y = col[y]
                k += 1
            cycles.append(k)
        out.append(
            (
                int((op[x, :] == x).sum()),
                int((op[:, x] == np.arange(n)).sum()),
                tuple(sorted(cycles)),
            )
        )
    return out


def quandle_isomorphism(q1: QuandleTable, q2: QuandleTable, limit: int = BRUTEFORCE_LIMIT):
    """A bijection f with f(x*y) = f(x)*f(y), as a list, or None.

    Exhaustive backtracking: each new assignment is propagated through the
    products it determines, and candidates are restricted to elements with the
    same local profile.
    """
    if q1.size != q2.size:
        return None
    n = q1.size
    if n > limit:
        raise BudgetExceeded(f"brute-force quandle isomorphism is limited to {limit} elements")
    a, b = q1.op, q2.op
    pa, pb = _profiles(a), _profiles(b)
    if sorted(pa) != sorted(pb):
        return None
    candidates = [[y for y in range(n) if pb[y] == pa[x]] for x in range(n)]

    def propagate(f, inv, x, y):
        stack = [(x, y)]
        assigned = [x]
        f[x], inv[y] = y, x
        while stack:
            u, _ = stack.pop()
            for v in range(n):
                if f[v] < 0:
                    continue
                for s, t in ((u, v), (v, u)):
                    src, dst = int(a[s, t]), int(b[f[s], f[t]])
                    if f[src] >= 0:
                        if f[src] != dst:
                            return False, assigned
                    elif inv[dst] >= 0 or pa[src] != pb[dst]:
                        return False, assigned
                    else:
                        f[src], inv[dst] = dst, src
                        assigned.append(src)
                        stack.append((src, dst))
        return True, assigned

    def search(f, inv):
        free = [x for x in range(n) if f[x] < 0]
        if not free:
            return list(f)
        x = min(free, key=lambda z: len(candidates[z]))
        for y in candidates[x]:
            if inv[y] >= 0:
                continue
            ok, assigned = propagate(f, inv, x, y)
            if ok:
                found = search(f, inv)
                if found is not None:
                    return found
            for z in assigned:
                inv[f[z]] = -1
                f[z] = -1
        return None

    return search([-1] * n, [-1] * n)


def quandle_isomorphic_bruteforce(q1: QuandleTable, q2: QuandleTable, limit: int = BRUTEFORCE_LIMIT) -> bool:
    return quandle_isomorphism(q1, q2, limit) is not None


# -- extensions ------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionStep:
    p: int
    case: int  # 1, or 2 when a and b had to be replaced first
    coordinate: int
    exponents_before: tuple[int, ...]
    exponents_after: tuple[int, ...]
    image_before: int
    image_after: int

    @property
    def index(self) -> int:
        """|M_{i+1} / M_i|."""
        return self.p ** (sum(self.exponents_after) - sum(self.exponents_before))

    @property
    def image_growth(self) -> int:
        return self.image_after // self.image_before

    @property
    def rank_preserved(self) -> bool:
        return len(self.exponents_before) == len(self.exponents_after)


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    """M with (1-t)M = N.  Column j of ``inclusion`` is the image in M of basis vector j of N."""

    source: LambdaModule
    extended: LambdaModule
    inclusion: np.ndarray
    steps: tuple[ExtensionStep, ...] = field(default_factory=tuple)

    def embed_all(self) -> np.ndarray:
        """Images in M of the elements of N, in N's code order."""
        if self.source.order == 1:
            return np.zeros((1, self.extended.shape.rank), dtype=np.int64)
        return apply_batch(self.inclusion, self.source.elements, self.extended.shape.moduli)

    def image_matches(self) -> bool:
        m = self.extended
        img = apply_batch(m.one_minus_t, m.elements, m.shape.moduli)
        return set(encode(m.shape, img).tolist()) == set(encode(m.shape, self.embed_all()).tolist())

    def intertwines(self) -> bool:
        """The inclusion carries t on N to t on M."""
        if self.source.order == 1:
            return True
        mods = np.asarray(self.extended.shape.moduli, dtype=np.int64)[:, None]
        lhs = (self.extended.action.to_array() @ self.inclusion) % mods
        rhs = (self.inclusion @ self.source.action.to_array()) % mods
        return bool((lhs == rhs).all())


class _Stage:
    """M_i as coordinates with exponents, alpha_i : M_i -> N and iota : N -> M_i."""

    def __init__(self, n_module: LambdaModule):
        self.p = n_module.p
        self.n_shape = n_module.shape
        self.n_mods = np.asarray(n_module.shape.moduli, dtype=np.int64)
        self.exps = list(n_module.shape.exponents)
        self.alpha = n_module.one_minus_t.to_array().copy()  # columns: alpha_i(v_c) in N
        self.iota = np.eye(len(self.exps), dtype=np.int64)  # columns: iota(basis of N) in M_i

    @property
    def mods(self) -> np.ndarray:
        return np.array([self.p**e for e in self.exps], dtype=np.int64)

    def elements(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(m) for m in self.mods], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def alpha_of(self, xs: np.ndarray) -> np.ndarray:
        return (xs @ self.alpha.T) % self.n_mods

    def n_codes(self, ys: np.ndarray) -> np.ndarray:
        return encode(self.n_shape, ys)

    def image_codes(self) -> np.ndarray:
        return np.unique(self.n_codes(self.alpha_of(self.elements())))


def _first(mask: np.ndarray) -> int:
    hits = np.nonzero(mask)[0]
    if not len(hits):
        raise AssertionError("no admissible element found")
    return int(hits[0])


def _step(stage: _Stage) -> ExtensionStep:
    p = stage.p
    n_elems = all_elements(stage.n_shape)
    n_codes = stage.n_codes(n_elems)
    p_n = set(stage.n_codes((n_elems * p) % stage.n_mods).tolist())
    m_elems = stage.elements()
    mods = stage.mods
    images = stage.alpha_of(m_elems)
    image_codes = stage.n_codes(images)
    image_set = set(image_codes.tolist())
    outside_pm = ((m_elems % p) != 0).any(axis=1)

    # a not in pM_i with alpha_i(a) in pN (exists by a counting argument)
    in_pn = np.isin(image_codes, list(p_n))
    a = m_elems[_first(outside_pm & in_pn)]
    target = stage.n_codes(stage.alpha_of(a[None]))[0]
    b = n_elems[_first(stage.n_codes((n_elems * p) % stage.n_mods) == target)]
    case = 1
    if int(stage.n_codes(b[None])[0]) in image_set:
        case = 2
        c = m_elems[_first(image_codes == stage.n_codes(b[None])[0])]
        a1 = (a - p * c) % mods
        p_images = stage.n_codes((n_elems * p) % stage.n_mods)
        ok = ~np.isin(n_codes, list(image_set)) & np.isin(p_images, list(image_set))
        b = n_elems[_first(ok)]
        d = m_elems[_first(image_codes == stage.n_codes(((b * p) % stage.n_mods)[None])[0])]
        a = d
        if not (a % p).any():
            a = (d + a1) % mods
        if not (a % p).any():
            raise AssertionError("neither choice of epsilon leaves pM_i")

    # Case 1: normalize a to (p w, 1, 0)
    exps = stage.exps
    units = [c for c in range(len(exps)) if a[c] % p]
    s = max(units, key=lambda c: (exps[c], -c))
    big = p ** max(exps)
    a_s_inv = pow(int(a[s]), -1, big)
    low = [c for c in range(len(exps)) if c != s and exps[c] <= exps[s]]
    k = {c: (a_s_inv * int(a[c])) % (p ** exps[c]) for c in low}
    # new basis u_s = v_s + sum k_c v_c; coordinates x'_c = x_c - x_s k_c
    for c in low:
        stage.alpha[:, s] = (stage.alpha[:, s] + k[c] * stage.alpha[:, c]) % stage.n_mods
    for c in low:
        stage.iota[c, :] = (stage.iota[c, :] - stage.iota[s, :] * k[c]) % (p ** exps[c])
    a = a.copy()
    for c in low:
        a[c] = (a[c] - a[s] * k[c]) % (p ** exps[c])
    a = (a * a_s_inv) % stage.mods
    b = (b * a_s_inv) % stage.n_mods
    high = [c for c in range(len(exps)) if exps[c] > exps[s]]
    if a[s] != 1 or any(a[c] for c in low) or any(a[c] % p for c in high):
        raise AssertionError("normalization of a failed")
    w = {c: int(a[c]) // p for c in high}

    before = tuple(exps)
    image_before = len(stage.image_codes())
    correction = np.zeros(len(stage.n_mods), dtype=np.int64)
    for c in high:
        correction += w[c] * stage.alpha[:, c]
    stage.alpha[:, s] = (b - correction) % stage.n_mods
    stage.exps[s] += 1
    stage.iota[s, :] = (stage.iota[s, :] * p) % (p ** stage.exps[s])
    return ExtensionStep(p, case, s, before, tuple(stage.exps), image_before, len(stage.image_codes()))


def extend(n: LambdaModule) -> ExtensionResult:
    """A module M containing N with (1-t)M = N and |M/N| = |N/(1-t)N|."""
    if n.order == 1:
        return ExtensionResult(n, n, np.zeros((0, 0), dtype=np.int64))
    k = log_p(n.p, n.order) - log_p(n.p, image_order(n))
    stage = _Stage(n)
    steps = [_step(stage) for _ in range(k)]

    # t on M_k is 1 - iota alpha_k; then sort coordinates by exponent, largest first
    exps = stage.exps
    mods = stage.mods[:, None]
    t = (np.eye(len(exps), dtype=np.int64) - stage.iota @ stage.alpha) % mods
    perm = sorted(range(len(exps)), key=lambda i: -exps[i])
    shape = GroupShape.from_exponents(n.p, [exps[i] for i in perm])
    t = t[np.ix_(perm, perm)]
    module = LambdaModule(shape, StructuredMatrix.from_array(shape, t))
    return ExtensionResult(n, module, stage.iota[perm, :], tuple(steps))


def extend_padded(n: LambdaModule, target: int) -> ExtensionResult:
    """extend(n) followed by an identity-action cyclic summand bringing the order to p^target."""
    i = log_p(n.p, n.order)
    j = log_p(n.p, image_order(n))
    if 2 * i - j > target:
        raise PreconditionError(
            f"no module of order p^{target} has this image: need 2i - j <= n, got 2*{i} - {j} = {2 * i - j}"
        )
    res = extend(n)
    pad = target - (2 * i - j)
    if pad == 0:
        return res
    padding = LambdaModule.cyclic(n.p, pad, 1)
    if res.extended.order == 1:
        return ExtensionResult(n, padding, np.zeros((1, 0), dtype=np.int64), res.steps)
    ds = direct_sum_with_permutation([res.extended, padding])
    incl = np.vstack([res.inclusion, np.zeros((1, res.inclusion.shape[1]), dtype=np.int64)])
    return ExtensionResult(n, ds.module, incl[list(ds.permutation), :], res.steps)


def extend_to_order(n: LambdaModule, target: int) -> LambdaModule:
    """A module of order p^target whose (1-t)-image is N."""
    return extend_padded(n, target).extended


@dataclass(frozen=True, eq=False)
class QuandleEntry:
    image: LambdaModule
    module: LambdaModule
    family: str
    parameters: dict
    connected: bool

    @cached_property
    def table(self) -> QuandleTable:
        return QuandleTable(origin=self.module, image=self.image)


def enumerate_quandles(p: int, n: int, connected_only: bool = False) -> list[QuandleEntry]:
    """One Alexander quandle of order p^n per isomorphism class."""
    polys.check_prime(p)
    if not 0 <= n <= MAX_N:
        raise ValueError(f"n must be between 0 and {MAX_N}, got {n}")
    out = []
    for i in range(n + 1):
        if connected_only and i != n:
            continue
        for row in enumerate_modules(p, i).rows:
            j = row.stratum
            if 2 * i - j > n:
                continue
            connected = i == j == n
            if connected_only and not connected:
                continue
            module = extend_to_order(row.module, n)
            out.append(QuandleEntry(row.module, module, row.family, row.parameters, connected))
    return out
