"""Vectorized truth tables over bit-indexed model spaces.

A model over domain {e1..en} is a bit mask: one bit per unary atom and one
per binary pair, in a fixed order, so mask order is the canonical model
enumeration order.  A formula compiles to a table that lists its truth for
every assignment of the bits it actually reads (its support); bits outside
the support provably cannot change the value.  This keeps exhaustive
equivalence sweeps exact while staying small: only the support grows
tables, not the domain size.

Spatial conjunction becomes a disjoint-subset convolution over the
splittable support bits, computed by ranked zeta/Moebius transforms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import syntax as S
from .normalform import (
    GenStar, canonicalize_star, ext_atoms, gccat_atoms,
)
from .semantics import GuardExceeded, Model, guard_bits

__all__ = [
    "ModelSpace", "Table", "compile_fo", "compile_role", "compile_stars",
    "conv", "TabulationUnsupported",
]

CONV_GUARD = 20


class TabulationUnsupported(S.RoleLogicError):
    """The node cannot be tabulated; callers fall back to direct evaluation."""


class ModelSpace:
    """Bit layout for all models over a signature and a domain size."""

    def __init__(self, sig: S.Signature, size: int):
        if size < 1:
            raise S.RoleLogicError("domain size must be at least 1")
        self.sig = sig
        self.size = size
        self.domain = tuple(f"e{i + 1}" for i in range(size))
        atoms: list[tuple] = []
        for a in sig.unaries:
            for el in self.domain:
                atoms.append(("u", a, el))
        for f in sig.binaries:
            for e1 in self.domain:
                for e2 in self.domain:
                    atoms.append(("b", f, e1, e2))
        self.atoms = tuple(atoms)
        self.bit = {atom: i for i, atom in enumerate(atoms)}
        self.nbits = len(atoms)
        self.splittable_bits = frozenset(
            i for i, atom in enumerate(atoms) if sig.is_splittable(atom[1])
        )
        self._acyclic_cache: dict[tuple[str, ...], "Table"] = {}

    def unary_bit(self, name: str, el: str) -> int:
        return self.bit[("u", name, el)]

    def binary_bit(self, name: str, e1: str, e2: str) -> int:
        return self.bit[("b", name, e1, e2)]

    def model_from_mask(self, mask: int) -> Model:
        unary = {a: set() for a in self.sig.unaries}
        binary = {f: set() for f in self.sig.binaries}
        for i, atom in enumerate(self.atoms):
            if mask >> i & 1:
                if atom[0] == "u":
                    unary[atom[1]].add(atom[2])
                else:
                    binary[atom[1]].add((atom[2], atom[3]))
        return Model(self.domain, unary, binary)

    def mask_of(self, m: Model) -> int:
        mask = 0
        for a in self.sig.unaries:
            for el in m.unary_of(a):
                mask |= 1 << self.unary_bit(a, el)
        for f in self.sig.binaries:
            for e1, e2 in m.binary_of(f):
                mask |= 1 << self.binary_bit(f, e1, e2)
        return mask


@lru_cache(maxsize=None)
def _popcount(nbits: int) -> np.ndarray:
    pc = np.zeros(1 << nbits, dtype=np.int8)
    for j in range(nbits):
        pc[1 << j: 1 << (j + 1)] = pc[: 1 << j] + 1
    return pc


@lru_cache(maxsize=None)
def _gather_indices(old: tuple[int, ...], new: tuple[int, ...]) -> np.ndarray:
    """Index of each new-support assignment inside the old-support table."""

    pos = {bit: i for i, bit in enumerate(old)}
    out = np.zeros(1 << len(new), dtype=np.int64)
    grid = np.arange(1 << len(new), dtype=np.int64)
    for j, bit in enumerate(new):
        if bit in pos:
            out |= ((grid >> j) & 1) << pos[bit]
    return out


@dataclass(eq=False)
class Table:
    space: ModelSpace
    support: tuple[int, ...]  # sorted bit indices
    values: np.ndarray  # bool, length 2 ** len(support)

    @staticmethod
    def const(space: ModelSpace, value: bool) -> "Table":
        return Table(space, (), np.array([value], dtype=bool))

    @staticmethod
    def bit_table(space: ModelSpace, bit: int) -> "Table":
        return Table(space, (bit,), np.array([False, True]))

    def is_const(self) -> bool:
        return not self.support

    def expand(self, new_support: tuple[int, ...]) -> np.ndarray:
        if new_support == self.support:
            return self.values
        return self.values[_gather_indices(self.support, new_support)]

    def shrink(self) -> "Table":
        """Drop support bits the table provably ignores."""

        vals = self.values
        support = list(self.support)
        j = 0
        while j < len(support):
            k = len(support)
            view = vals.reshape(1 << (k - j - 1), 2, 1 << j)
            if bool(np.array_equal(view[:, 0, :], view[:, 1, :])):
                vals = view[:, 0, :].reshape(-1)
                del support[j]
            else:
                j += 1
        return Table(self.space, tuple(support), vals)

    def truth(self, mask: int) -> bool:
        idx = 0
        for j, bit in enumerate(self.support):
            idx |= ((mask >> bit) & 1) << j
        return bool(self.values[idx])


def _check_support(space: ModelSpace, support: tuple[int, ...], what: str) -> None:
    limit = min(guard_bits(), space.nbits)
    if len(support) > limit:
        raise GuardExceeded(
            f"{what} reads {len(support)} model bits, beyond the 2^{limit} table guard"
        )


def _merge(a: Table, b: Table) -> tuple[tuple[int, ...], np.ndarray, np.ndarray]:
    sup = tuple(sorted(set(a.support) | set(b.support)))
    _check_support(a.space, sup, "a subformula")
    return sup, a.expand(sup), b.expand(sup)


def t_not(a: Table) -> Table:
    return Table(a.space, a.support, ~a.values)


def t_and(a: Table, b: Table) -> Table:
    sup, va, vb = _merge(a, b)
    return Table(a.space, sup, va & vb)


def t_or(a: Table, b: Table) -> Table:
    sup, va, vb = _merge(a, b)
    return Table(a.space, sup, va | vb)


def t_count(space: ModelSpace, tables: list[Table], op: str, k: int) -> Table:
    sup: set[int] = set()
    for t in tables:
        sup |= set(t.support)
    support = tuple(sorted(sup))
    _check_support(space, support, "a counting quantifier")
    total = np.zeros(1 << len(support), dtype=np.int16)
    for t in tables:
        total += t.expand(support)
    if op == ">=":
        vals = total >= k
    elif op == "<=":
        vals = total <= k
    else:
        vals = total == k
    return Table(space, support, vals)


def _zeta(arr: np.ndarray, sbits: int, sign: int) -> np.ndarray:
    v = arr.reshape(-1, 1 << sbits).copy()
    for j in range(sbits):
        view = v.reshape(-1, 1 << (sbits - j - 1), 2, 1 << j)
        if sign > 0:
            view[:, :, 1, :] += view[:, :, 0, :]
        else:
            view[:, :, 1, :] -= view[:, :, 0, :]
    return v.reshape(arr.shape)


def conv(a: Table, b: Table) -> Table:
    """Disjoint-cover convolution: true at m when the splittable support
    bits of m split into halves making both operands true.

    Non-splittable bits are shared by both halves, so they pass through
    pointwise.  Bits outside the supports can be split arbitrarily.
    """

    space = a.space
    sup = tuple(sorted(set(a.support) | set(b.support)))
    spl = tuple(bit for bit in sup if bit in space.splittable_bits)
    shared = tuple(bit for bit in sup if bit not in space.splittable_bits)
    if len(sup) > CONV_GUARD:
        raise GuardExceeded(
            f"spatial convolution over {len(sup)} bits exceeds its 2^{CONV_GUARD} guard"
        )
    if not spl:
        sup2, va, vb = _merge(a, b)
        return Table(space, sup2, va & vb)

    layout = spl + shared  # splittable bits low
    va = a.expand(layout).astype(np.int32)
    vb = b.expand(layout).astype(np.int32)
    s = len(spl)
    p = len(shared)
    va = va.reshape(1 << p, 1 << s)
    vb = vb.reshape(1 << p, 1 << s)
    pc = _popcount(s)

    ranks_a = np.unique(pc[np.nonzero(va.any(axis=0))[0]]) if va.any() else np.array([], int)
    ranks_b = np.unique(pc[np.nonzero(vb.any(axis=0))[0]]) if vb.any() else np.array([], int)
    out = np.zeros((1 << p, 1 << s), dtype=bool)
    if len(ranks_a) and len(ranks_b):
        za = {int(r): _zeta(np.where(pc == r, va, 0), s, +1).astype(np.int64)
              for r in ranks_a}
        zb = {int(r): _zeta(np.where(pc == r, vb, 0), s, +1).astype(np.int64)
              for r in ranks_b}
        for r in range(int(ranks_a.min() + ranks_b.min()),
                       min(s, int(ranks_a.max() + ranks_b.max())) + 1):
            acc = None
            for i in ranks_a:
                j = r - int(i)
                if j in zb:
                    term = za[int(i)] * zb[j]
                    acc = term if acc is None else acc + term
            if acc is None:
                continue
            acc = _zeta(acc, s, -1)
            sel = pc == r
            out[:, sel] |= acc[:, sel] > 0

    flat = out.reshape(-1)
    result = Table(space, layout, flat)
    # restore the sorted-support convention
    return Table(space, sup, result.expand(sup))


# ---------------------------------------------------------------------------
# Compilers


def compile_fo(space: ModelSpace, f: S.Formula, val: dict[str, str]) -> Table:
    def var(name: str) -> str:
        try:
            return val[name]
        except KeyError:
            raise S.RoleLogicError(f"unbound variable {name!r}")

    match f:
        case S.PredU(name, x):
            return Table.bit_table(space, space.unary_bit(name, var(x)))
        case S.PredB(name, x, y):
            return Table.bit_table(space, space.binary_bit(name, var(x), var(y)))
        case S.Eq(x, y):
            return Table.const(space, var(x) == var(y))
        case S.TrueFormula():
            return Table.const(space, True)
        case S.FalseFormula():
            return Table.const(space, False)
        case S.Emp():
            return _emp_table(space)
        case S.Not(a):
            return t_not(compile_fo(space, a, val))
        case S.And(l, r):
            return t_and(compile_fo(space, l, val), compile_fo(space, r, val))
        case S.Or(l, r):
            return t_or(compile_fo(space, l, val), compile_fo(space, r, val))
        case S.Implies(l, r):
            return t_or(t_not(compile_fo(space, l, val)), compile_fo(space, r, val))
        case S.ExistsGeq(k, x, body):
            tables = [compile_fo(space, body, {**val, x: d}) for d in space.domain]
            return t_count(space, tables, ">=", k)
        case S.ExistsEq(k, x, body):
            tables = [compile_fo(space, body, {**val, x: d}) for d in space.domain]
            return t_count(space, tables, "==", k)
        case S.ExistsLeq(k, x, body):
            tables = [compile_fo(space, body, {**val, x: d}) for d in space.domain]
            return t_count(space, tables, "<=", k)
        case S.Forall(x, body):
            tables = [compile_fo(space, body, {**val, x: d}) for d in space.domain]
            return t_count(space, tables, "==", len(space.domain))
        case S.Spatial(l, r):
            return conv(compile_fo(space, l, val), compile_fo(space, r, val))
        case S.Acyclic(fields):
            return _acyclic_table(space, fields)
        case _:
            raise TabulationUnsupported(
                f"cannot tabulate {type(f).__name__}; use the direct evaluator"
            )


def compile_role(space: ModelSpace, f: S.Formula, pair: tuple[str, str]) -> Table:
    c1, c2 = pair
    match f:
        case S.UnaryAtom(name):
            return Table.bit_table(space, space.unary_bit(name, c1))
        case S.BinaryAtom(name):
            return Table.bit_table(space, space.binary_bit(name, c2, c1))
        case S.Id():
            return Table.const(space, c2 == c1)
        case S.TrueFormula():
            return Table.const(space, True)
        case S.FalseFormula():
            return Table.const(space, False)
        case S.Emp():
            return _emp_table(space)
        case S.Not(a):
            return t_not(compile_role(space, a, pair))
        case S.And(l, r):
            return t_and(compile_role(space, l, pair), compile_role(space, r, pair))
        case S.Or(l, r):
            return t_or(compile_role(space, l, pair), compile_role(space, r, pair))
        case S.Implies(l, r):
            return t_or(t_not(compile_role(space, l, pair)), compile_role(space, r, pair))
        case S.Shift(a):
            return compile_role(space, a, (c2, c2))
        case S.Inv(a):
            return compile_role(space, a, (c2, c1))
        case S.CardGeq(k, a):
            tables = [compile_role(space, a, (d, c1)) for d in space.domain]
            return t_count(space, tables, ">=", k)
        case S.Spatial(l, r):
            return conv(compile_role(space, l, pair), compile_role(space, r, pair))
        case S.Acyclic(fields):
            return _acyclic_table(space, fields)
        case _ if isinstance(f, S.SUGAR_NODES + S.DERIVED_NODES):
            raise S.NotCoreError("tabulation needs a core role formula; desugar first")
        case _:
            raise TabulationUnsupported(
                f"cannot tabulate {type(f).__name__}; use the direct evaluator"
            )


def _emp_table(space: ModelSpace) -> Table:
    support = tuple(sorted(space.splittable_bits))
    _check_support(space, support, "emp")
    vals = np.zeros(1 << len(support), dtype=bool)
    vals[0] = True
    return Table(space, support, vals)


def _acyclic_table(space: ModelSpace, fields: tuple[str, ...]) -> Table:
    cached = space._acyclic_cache.get(fields)
    if cached is not None:
        return cached
    bits: list[int] = []
    edges: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for f in fields:
        for e1 in space.domain:
            for e2 in space.domain:
                bits.append(space.binary_bit(f, e1, e2))
                edges.append((e1, e2))
    support = tuple(sorted(set(bits)))
    _check_support(space, support, "acyclic")
    pos = {bit: j for j, bit in enumerate(support)}
    vals = np.zeros(1 << len(support), dtype=bool)
    for idx in range(1 << len(support)):
        adj: dict[str, set[str]] = {d: set() for d in space.domain}
        for bit, (e1, e2) in zip(bits, edges):
            if idx >> pos[bit] & 1:
                adj[e1].add(e2)
        vals[idx] = _dag(space.domain, adj)
    table = Table(space, support, vals)
    space._acyclic_cache[fields] = table
    return table


def _dag(domain: tuple[str, ...], adj: dict[str, set[str]]) -> bool:
    state: dict[str, int] = {}

    def visit(node: str) -> bool:
        state[node] = 1
        for nxt in adj[node]:
            mark = state.get(nxt)
            if mark == 1:
                return False
            if mark is None and not visit(nxt):
                return False
        state[node] = 2
        return True

    return all(state.get(d) == 2 or visit(d) for d in domain)


# ---------------------------------------------------------------------------
# Star disjunctions, factored by per-element extension types


def compile_stars(space: ModelSpace, stars: list[GenStar],
                  val: dict[str, str]) -> Table:
    """Table of a star disjunction under one valuation.

    The representation is factored: inside-atom bits over the valuation
    image, plus one extension id per outside element.  Bits between two
    outside elements are invisible to every star, so they stay out of the
    support.
    """

    alive: list[GenStar] = []
    for star in stars:
        star = canonicalize_star(star)
        if any(val[y] != val[x] for y, x in star.eq):
            continue
        svals = tuple(val[v] for v in star.gccat.vars)
        if len(set(svals)) != len(svals):
            continue
        alive.append(star)
    if not alive:
        return Table.const(space, False)

    sig = alive[0].gccat.sig
    svars = alive[0].gccat.vars
    for star in alive[1:]:
        if star.gccat.vars != svars:
            raise S.RoleLogicError("stars disagree on surviving variables")
    svals = tuple(val[v] for v in svars)
    outside = tuple(d for d in space.domain if d not in svals)
    k = len(outside)

    inside_bits = [_inside_bit(space, atom, svals) for atom in gccat_atoms(sig, svars)]
    eatoms = ext_atoms(sig, svars)
    n_ext = len(eatoms)
    ext_bits = [
        [_ext_bit(space, atom, svals, d) for atom in eatoms] for d in outside
    ]
    n_in = len(inside_bits)
    rep_low_to_high: list[int] = []
    for d_bits in reversed(ext_bits):
        rep_low_to_high.extend(d_bits)
    rep_low_to_high.extend(inside_bits)
    _check_support(space, tuple(rep_low_to_high), "a star disjunction")

    E = 1 << n_ext
    grid_shape = (E,) * k
    acc = np.zeros((1 << n_in,) + grid_shape, dtype=bool)
    axes = [np.arange(E).reshape((1,) * i + (E,) + (1,) * (k - i - 1))
            for i in range(k)]

    for star in alive:
        allowed = np.ones(E, dtype=bool)
        counting: list[tuple[int, str, int]] = []
        for t, c in star.gamma:
            if c.kind == "exact" and c.n == 0:
                allowed[t.bits] = False
            else:
                counting.append((t.bits, c.kind, c.n))
        if k == 0:
            # no outside elements: every count is zero
            if all(n == 0 for _, _, n in counting):
                acc[star.gccat.bits] = True
            continue
        cond = np.ones(grid_shape, dtype=bool)
        for ax in axes:
            cond &= allowed[ax]
        for tbits, kind, n in counting:
            cnt = np.zeros(grid_shape, dtype=np.int8)
            for ax in axes:
                cnt = cnt + (ax == tbits)
            cond &= (cnt == n) if kind == "exact" else (cnt >= n)
        acc[star.gccat.bits] |= cond

    flat = acc.reshape(-1)
    layout = tuple(rep_low_to_high)
    table = Table(space, layout, flat)
    support = tuple(sorted(layout))
    return Table(space, support, table.expand(support))


def _inside_bit(space: ModelSpace, atom: tuple, svals: tuple[str, ...]) -> int:
    match atom:
        case ("u", a, i):
            return space.unary_bit(a, svals[i])
        case ("b", f, i, j):
            return space.binary_bit(f, svals[i], svals[j])
    raise AssertionError


def _ext_bit(space: ModelSpace, atom: tuple, svals: tuple[str, ...], d: str) -> int:
    match atom:
        case ("u", a):
            return space.unary_bit(a, d)
        case ("s", f):
            return space.binary_bit(f, d, d)
        case ("xo", f, i):
            return space.binary_bit(f, d, svals[i])
        case ("xi", f, i):
            return space.binary_bit(f, svals[i], d)
    raise AssertionError
