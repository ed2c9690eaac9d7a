"""Atomic-type cubes, neighborhood extensions, and counting stars.

A quantifier-depth-one formula normalizes to a disjunction of generalized
stars: an equality prefix, a complete atom cube over the surviving
variables, and per-extension constraints on how many outside elements
realize each neighborhood type.  Constraints are intervals (``Exact`` or
``AtLeast``, default ``AtLeast(0)``), which keeps disjunctions small.

Cubes and extensions are bit vectors over deterministically ordered atom
universes, so disjointness and merging are integer operations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce

from . import syntax as S
from .semantics import Model, Valuation, EvalError

__all__ = [
    "CatCube", "EqPrefix", "Gccat", "Extension", "CountConstraint", "GenStar",
    "cube_atoms", "gccat_atoms", "ext_atoms",
    "to_cat", "cat_to_eqcat", "extensions_of", "depth_one_nf",
    "star_eval", "star_to_fo", "make_star",
]

EXT_UNIVERSE_GUARD = 20
CUBE_UNIVERSE_GUARD = 22


# ---------------------------------------------------------------------------
# Atom universes


@lru_cache(maxsize=None)
def cube_atoms(sig: S.Signature, vars: tuple[str, ...]) -> tuple[tuple, ...]:
    """Every atom over the variables, equalities included."""

    n = len(vars)
    atoms: list[tuple] = []
    for a in sig.unaries:
        for i in range(n):
            atoms.append(("u", a, i))
    for f in sig.binaries:
        for i in range(n):
            for j in range(n):
                atoms.append(("b", f, i, j))
    for i in range(n):
        for j in range(n):
            atoms.append(("e", i, j))
    return tuple(atoms)


@lru_cache(maxsize=None)
def gccat_atoms(sig: S.Signature, vars: tuple[str, ...]) -> tuple[tuple, ...]:
    """Non-equality atoms over the variables."""

    n = len(vars)
    atoms: list[tuple] = []
    for a in sig.unaries:
        for i in range(n):
            atoms.append(("u", a, i))
    for f in sig.binaries:
        for i in range(n):
            for j in range(n):
                atoms.append(("b", f, i, j))
    return tuple(atoms)


@lru_cache(maxsize=None)
def ext_atoms(sig: S.Signature, vars: tuple[str, ...]) -> tuple[tuple, ...]:
    """Atoms linking a fresh element to itself and to the variables."""

    n = len(vars)
    atoms: list[tuple] = []
    for a in sig.unaries:
        atoms.append(("u", a))
    for f in sig.binaries:
        atoms.append(("s", f))
        for i in range(n):
            atoms.append(("xo", f, i))
        for i in range(n):
            atoms.append(("xi", f, i))
    return tuple(atoms)


def _bits_to_set(bits: int, atoms: tuple) -> frozenset:
    return frozenset(a for i, a in enumerate(atoms) if bits >> i & 1)


# ---------------------------------------------------------------------------
# Cubes, extensions, stars


@dataclass(frozen=True)
class CatCube:
    """Complete atomic type: decides every atom over its variables."""

    sig: S.Signature
    vars: tuple[str, ...]
    bits: int

    @property
    def atoms(self) -> tuple[tuple, ...]:
        return cube_atoms(self.sig, self.vars)

    def positives(self) -> frozenset:
        return _bits_to_set(self.bits, self.atoms)

    def truth(self, atom: tuple) -> bool:
        return bool(self.bits >> self.atoms.index(atom) & 1)


EqPrefix = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Gccat:
    """Cube over distinct variables: equalities are forced to x_i = x_i only."""

    sig: S.Signature
    vars: tuple[str, ...]
    bits: int

    @property
    def atoms(self) -> tuple[tuple, ...]:
        return gccat_atoms(self.sig, self.vars)

    def positives(self) -> frozenset:
        return _bits_to_set(self.bits, self.atoms)

    def truth(self, atom: tuple) -> bool:
        return bool(self.bits >> self.atoms.index(atom) & 1)


@dataclass(frozen=True)
class Extension:
    """Atomic type of a fresh element relative to the variable list."""

    sig: S.Signature
    vars: tuple[str, ...]
    bits: int

    @property
    def atoms(self) -> tuple[tuple, ...]:
        return ext_atoms(self.sig, self.vars)

    def positives(self) -> frozenset:
        return _bits_to_set(self.bits, self.atoms)

    def is_empty(self) -> bool:
        return self.bits == 0

    def disjoint(self, other: "Extension") -> bool:
        return (self.bits & other.bits) == 0

    def union(self, other: "Extension") -> "Extension":
        return Extension(self.sig, self.vars, self.bits | other.bits)


@dataclass(frozen=True)
class CountConstraint:
    kind: str  # 'exact' | 'atleast'
    n: int

    def __post_init__(self):
        if self.kind not in ("exact", "atleast"):
            raise S.RoleLogicError(f"bad count constraint kind {self.kind!r}")
        if self.n < 0:
            raise S.RoleLogicError("negative count constraint")

    def admits(self, count: int) -> bool:
        if self.kind == "exact":
            return count == self.n
        return count >= self.n


UNCONSTRAINED = CountConstraint("atleast", 0)


@dataclass(frozen=True)
class GenStar:
    """Equality prefix, variable cube, and sparse per-extension counts."""

    eq: EqPrefix
    gccat: Gccat
    gamma: tuple[tuple[Extension, CountConstraint], ...]

    @property
    def vars(self) -> tuple[str, ...]:
        return self.gccat.vars

    @property
    def all_vars(self) -> tuple[str, ...]:
        return tuple(y for y, _ in self.eq) + self.gccat.vars

    def gamma_map(self) -> dict[Extension, CountConstraint]:
        return dict(self.gamma)

    def constraint(self, ext: Extension) -> CountConstraint:
        for t, c in self.gamma:
            if t == ext:
                return c
        return UNCONSTRAINED


def make_star(eq, gccat: Gccat, gamma: dict[Extension, CountConstraint]) -> GenStar:
    items = tuple(sorted(
        ((t, c) for t, c in gamma.items() if c != UNCONSTRAINED),
        key=lambda tc: tc[0].bits,
    ))
    return GenStar(tuple(eq), gccat, items)


def star_partition(star: GenStar) -> frozenset[frozenset[str]]:
    """Equality classes over the star's full variable list."""

    classes: dict[str, set[str]] = {x: {x} for x in star.gccat.vars}
    for y, x in star.eq:
        classes[x].add(y)
    return frozenset(frozenset(c) for c in classes.values())


def canonicalize_star(star: GenStar) -> GenStar:
    """Re-express a star so the highest-named variable of each equality
    class is its survivor, the convention ``cat_to_eqcat`` uses."""

    want: dict[str, str] = {}
    for cls in star_partition(star):
        rep = max(cls)
        for v in cls:
            want[v] = rep
    old = star.gccat.vars
    if all(want[v] == v for v in old):
        return star
    new = tuple(sorted({want[v] for v in old}))
    rename = {v: want[v] for v in old}
    remap = [new.index(rename[v]) for v in old]

    g = star.gccat
    new_gatoms = gccat_atoms(g.sig, new)
    gidx = {a: i for i, a in enumerate(new_gatoms)}
    gbits = 0
    for k, atom in enumerate(g.atoms):
        if not (g.bits >> k & 1):
            continue
        match atom:
            case ("u", a, i):
                gbits |= 1 << gidx[("u", a, remap[i])]
            case ("b", f, i, j):
                gbits |= 1 << gidx[("b", f, remap[i], remap[j])]
    new_gccat = Gccat(g.sig, new, gbits)

    new_eatoms = ext_atoms(g.sig, new)
    eidx = {a: i for i, a in enumerate(new_eatoms)}

    def move_ext(e: Extension) -> Extension:
        bits = 0
        for k, atom in enumerate(e.atoms):
            if not (e.bits >> k & 1):
                continue
            match atom:
                case ("u", a):
                    bits |= 1 << eidx[("u", a)]
                case ("s", f):
                    bits |= 1 << eidx[("s", f)]
                case ("xo", f, i):
                    bits |= 1 << eidx[("xo", f, remap[i])]
                case ("xi", f, i):
                    bits |= 1 << eidx[("xi", f, remap[i])]
        return Extension(e.sig, new, bits)

    gamma = {move_ext(t): c for t, c in star.gamma}
    prefix = tuple(sorted((v, want[v]) for v in want if want[v] != v))
    return GenStar(prefix, new_gccat, tuple(
        sorted(gamma.items(), key=lambda tc: tc[0].bits)
    ))


# ---------------------------------------------------------------------------
# Quantifier-free evaluation against an atom assignment


def _eval_given(f: S.Formula, lookup) -> bool:
    match f:
        case S.PredU() | S.PredB() | S.Eq():
            return lookup(f)
        case S.TrueFormula():
            return True
        case S.FalseFormula():
            return False
        case S.Not(a):
            return not _eval_given(a, lookup)
        case S.And(l, r):
            return _eval_given(l, lookup) and _eval_given(r, lookup)
        case S.Or(l, r):
            return _eval_given(l, lookup) or _eval_given(r, lookup)
        case S.Implies(l, r):
            return (not _eval_given(l, lookup)) or _eval_given(r, lookup)
        case _:
            raise S.UnsupportedNodeError(
                f"quantifier-free formula expected, found {type(f).__name__}"
            )


def to_cat(f: S.Formula, vars: tuple[str, ...], sig: S.Signature) -> list[CatCube]:
    """Complete atomic types entailing the quantifier-free formula.

    Equality-contradictory cubes are dropped; the disjunction of the
    result is equivalent to the input.
    """

    vars = tuple(vars)
    extra = S.free_vars(f) - set(vars)
    if extra:
        raise S.RoleLogicError(f"free variables outside the list: {sorted(extra)}")
    atoms = cube_atoms(sig, vars)
    if len(atoms) > CUBE_UNIVERSE_GUARD:
        raise S.RoleLogicError(f"cube universe of {len(atoms)} atoms exceeds the guard")
    index = {a: i for i, a in enumerate(atoms)}
    vix = {v: i for i, v in enumerate(vars)}

    out: list[CatCube] = []
    for bits in range(1 << len(atoms)):
        def lookup(node, bits=bits):
            match node:
                case S.PredU(name, x):
                    return bool(bits >> index[("u", name, vix[x])] & 1)
                case S.PredB(name, x, y):
                    return bool(bits >> index[("b", name, vix[x], vix[y])] & 1)
                case S.Eq(x, y):
                    return bool(bits >> index[("e", vix[x], vix[y])] & 1)
            raise AssertionError

        if not _eval_given(f, lookup):
            continue
        cube = CatCube(sig, vars, bits)
        if cat_to_eqcat(cube) is None:
            continue
        out.append(cube)
    return out


def cat_to_eqcat(cube: CatCube) -> tuple[EqPrefix, Gccat] | None:
    """Split a cube into an equality prefix and a distinct-variable cube.

    Returns None when the cube's equalities contradict its other literals.
    Merged variables are replaced by the highest-indexed member of their
    equality class.
    """

    vars = cube.vars
    n = len(vars)
    atoms = cube.atoms
    index = {a: i for i, a in enumerate(atoms)}

    def truth(atom) -> bool:
        return bool(cube.bits >> index[atom] & 1)

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        if not truth(("e", i, i)):
            return None
    for i in range(n):
        for j in range(n):
            if truth(("e", i, j)):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    # negative equality literal inside one class is a contradiction
    for i in range(n):
        for j in range(n):
            if find(i) == find(j) and not truth(("e", i, j)):
                return None
    rep = [max(k for k in range(n) if find(k) == find(i)) for i in range(n)]

    polarity: dict[tuple, bool] = {}
    for atom in atoms:
        match atom:
            case ("u", a, i):
                mapped = ("u", a, rep[i])
            case ("b", f, i, j):
                mapped = ("b", f, rep[i], rep[j])
            case _:
                continue
        t = truth(atom)
        if polarity.setdefault(mapped, t) != t:
            return None

    survivors = tuple(vars[i] for i in range(n) if rep[i] == i)
    sidx = {i: k for k, i in enumerate(j for j in range(n) if rep[j] == j)}
    gatoms = gccat_atoms(cube.sig, survivors)
    bits = 0
    for k, atom in enumerate(gatoms):
        match atom:
            case ("u", a, i):
                orig = ("u", a, [o for o in range(n) if rep[o] == o][i])
            case ("b", f, i, j):
                keep = [o for o in range(n) if rep[o] == o]
                orig = ("b", f, keep[i], keep[j])
        if polarity[orig]:
            bits |= 1 << k
    prefix = tuple(
        (vars[i], vars[rep[i]]) for i in range(n) if rep[i] != i
    )
    return prefix, Gccat(cube.sig, survivors, bits)


def extensions_of(sig: S.Signature, vars: tuple[str, ...]) -> list[Extension]:
    vars = tuple(vars)
    atoms = ext_atoms(sig, vars)
    if len(atoms) > EXT_UNIVERSE_GUARD:
        raise S.RoleLogicError(
            f"extension universe of 2^{len(atoms)} entries exceeds the guard"
        )
    return [Extension(sig, vars, bits) for bits in range(1 << len(atoms))]


# ---------------------------------------------------------------------------
# Depth-one normal form


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative integers summing to `total`."""

    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


_Branch = tuple[tuple[tuple[S.Formula, bool], ...], tuple[tuple[S.Formula, int, int | None], ...]]


def _cross(xs: list[_Branch], ys: list[_Branch]) -> list[_Branch]:
    return [(a1 + a2, c1 + c2) for a1, c1 in xs for a2, c2 in ys]


def _dnf(f: S.Formula, pos: bool, bound: str) -> list[_Branch]:
    """Disjunctive normal form over atoms and count literals.

    Count literals record a body (with the quantified variable renamed to
    ``bound``) and an inclusive interval for how many elements satisfy it.
    """

    def counts(body: S.Formula, var: str, intervals: list[tuple[int, int | None]]) -> list[_Branch]:
        renamed = S.subst_vars(body, {var: bound})
        return [((), ((renamed, lo, hi),)) for lo, hi in intervals]

    match f:
        case S.PredU() | S.PredB() | S.Eq():
            return [(((f, not pos),), ())]
        case S.TrueFormula():
            return [((), ())] if pos else []
        case S.FalseFormula():
            return [] if pos else [((), ())]
        case S.Not(a):
            return _dnf(a, not pos, bound)
        case S.And(l, r):
            if pos:
                return _cross(_dnf(l, True, bound), _dnf(r, True, bound))
            return _dnf(l, False, bound) + _dnf(r, False, bound)
        case S.Or(l, r):
            if pos:
                return _dnf(l, True, bound) + _dnf(r, True, bound)
            return _cross(_dnf(l, False, bound), _dnf(r, False, bound))
        case S.Implies(l, r):
            if pos:
                return _dnf(l, False, bound) + _dnf(r, True, bound)
            return _cross(_dnf(l, True, bound), _dnf(r, False, bound))
        case S.ExistsGeq(k, v, body):
            if pos:
                return counts(body, v, [(k, None)])
            return counts(body, v, [(0, k - 1)]) if k > 0 else []
        case S.ExistsEq(k, v, body):
            if pos:
                return counts(body, v, [(k, k)])
            intervals: list[tuple[int, int | None]] = [(k + 1, None)]
            if k > 0:
                intervals.append((0, k - 1))
            return counts(body, v, intervals)
        case S.ExistsLeq(k, v, body):
            if pos:
                return counts(body, v, [(0, k)])
            return counts(body, v, [(k + 1, None)])
        case S.Forall(v, body):
            if pos:
                return counts(S.Not(body), v, [(0, 0)])
            return counts(S.Not(body), v, [(1, None)])
        case _:
            raise S.UnsupportedNodeError(
                f"depth-one normal form: unsupported node {type(f).__name__}"
            )


def _pick_bound(vars: tuple[str, ...]) -> str:
    for cand in ("x", "z", "w", "u"):
        if cand not in vars:
            return cand
    k = 0
    while f"x{k}" in vars:
        k += 1
    return f"x{k}"


def _analyze_body(body: S.Formula, gccat: Gccat, bound: str,
                  sig: S.Signature) -> tuple[int, list[Extension]]:
    """Count base witnesses among the variables and collect the realizable
    extensions of a count-literal body, given the surrounding cube."""

    svars = gccat.vars
    pos = {v: i for i, v in enumerate(svars)}

    def cube_lookup(node) -> bool:
        match node:
            case S.PredU(name, x):
                return gccat.truth(("u", name, pos[x]))
            case S.PredB(name, x, y):
                return gccat.truth(("b", name, pos[x], pos[y]))
            case S.Eq(x, y):
                return x == y
        raise AssertionError

    base = 0
    for w in svars:
        if _eval_given(S.subst_vars(body, {bound: w}), cube_lookup):
            base += 1

    realizable: list[Extension] = []
    for ext in extensions_of(sig, svars):
        def ext_lookup(node, ext=ext) -> bool:
            match node:
                case S.PredU(name, x):
                    if x == bound:
                        return ("u", name) in ext.positives()
                    return gccat.truth(("u", name, pos[x]))
                case S.PredB(name, x, y):
                    if x == bound and y == bound:
                        return ("s", name) in ext.positives()
                    if x == bound:
                        return ("xo", name, pos[y]) in ext.positives()
                    if y == bound:
                        return ("xi", name, pos[x]) in ext.positives()
                    return gccat.truth(("b", name, pos[x], pos[y]))
                case S.Eq(x, y):
                    if x == y:
                        return True
                    return False  # bound is fresh; survivors are distinct
            raise AssertionError

        if _eval_given(body, ext_lookup):
            realizable.append(ext)
    return base, realizable


def _decompose(extset: list[Extension], lo: int, hi: int | None,
               max_count: int) -> list[dict[Extension, CountConstraint]]:
    if max(lo, hi or 0) > max_count:
        raise S.RoleLogicError(
            f"count {max(lo, hi or 0)} exceeds the composition limit {max_count}"
        )
    if not extset:
        return [{}] if lo == 0 else []
    out: list[dict[Extension, CountConstraint]] = []
    if hi is None:
        for comp in _compositions(lo, len(extset)):
            out.append({
                t: CountConstraint("atleast", c) for t, c in zip(extset, comp)
            })
    else:
        for total in range(lo, hi + 1):
            for comp in _compositions(total, len(extset)):
                out.append({
                    t: CountConstraint("exact", c) for t, c in zip(extset, comp)
                })
    return out


def _merge_constraint(a: CountConstraint, b: CountConstraint) -> CountConstraint | None:
    if a.kind == "exact" and b.kind == "exact":
        return a if a.n == b.n else None
    if a.kind == "exact":
        return a if a.n >= b.n else None
    if b.kind == "exact":
        return b if b.n >= a.n else None
    return CountConstraint("atleast", max(a.n, b.n))


def depth_one_nf(f: S.Formula, sig: S.Signature,
                 vars: tuple[str, ...] | None = None,
                 max_count: int = 4) -> list[GenStar]:
    """Normalize a depth-at-most-one formula to a star disjunction.

    The disjunction of the returned stars is equivalent to the input on
    every model; disjuncts need not be mutually exclusive.
    """

    if vars is None:
        vars = tuple(sorted(S.free_vars(f)))
    vars = tuple(vars)
    depth, _ = metrics_checked(f)
    if depth > 1:
        raise S.RoleLogicError(f"quantifier depth {depth} is beyond the normal form")
    extra = S.free_vars(f) - set(vars)
    if extra:
        raise S.RoleLogicError(f"free variables outside the list: {sorted(extra)}")

    bound = _pick_bound(vars)
    stars: list[GenStar] = []
    seen: set[GenStar] = set()
    for atom_lits, count_lits in _dnf(f, True, bound):
        free = reduce(
            S.And,
            [lit if not neg else S.Not(lit) for lit, neg in atom_lits],
            S.TRUE,
        )
        for cube in to_cat(free, vars, sig):
            eqc = cat_to_eqcat(cube)
            if eqc is None:
                continue
            prefix, gccat = eqc
            repmap = dict(prefix)
            options: list[list[dict[Extension, CountConstraint]]] = []
            feasible = True
            for body, lo, hi in count_lits:
                body2 = S.subst_vars(body, repmap)
                base, extset = _analyze_body(body2, gccat, bound, sig)
                lo2 = max(lo - base, 0)
                hi2 = None if hi is None else hi - base
                if hi2 is not None and hi2 < 0:
                    feasible = False
                    break
                choices = _decompose(extset, lo2, hi2, max_count)
                if not choices:
                    feasible = False
                    break
                options.append(choices)
            if not feasible:
                continue
            for combo in itertools.product(*options):
                gamma: dict[Extension, CountConstraint] = {}
                ok = True
                for part in combo:
                    for t, c in part.items():
                        if t in gamma:
                            merged = _merge_constraint(gamma[t], c)
                            if merged is None:
                                ok = False
                                break
                            gamma[t] = merged
                        else:
                            gamma[t] = c
                    if not ok:
                        break
                if not ok:
                    continue
                star = make_star(prefix, gccat, gamma)
                if star not in seen:
                    seen.add(star)
                    stars.append(star)
    return stars


def metrics_checked(f: S.Formula) -> tuple[int, int]:
    try:
        return S.metrics(f)
    except S.UnsupportedNodeError as exc:
        raise S.RoleLogicError(f"normal form rejects this formula: {exc}")


# ---------------------------------------------------------------------------
# Star semantics and printing


def _realized_extension(m: Model, sig: S.Signature, svals: tuple[str, ...],
                        vars: tuple[str, ...], d: str) -> int:
    bits = 0
    for k, atom in enumerate(ext_atoms(sig, vars)):
        match atom:
            case ("u", a):
                hit = d in m.unary_of(a)
            case ("s", frel):
                hit = (d, d) in m.binary_of(frel)
            case ("xo", frel, i):
                hit = (d, svals[i]) in m.binary_of(frel)
            case ("xi", frel, i):
                hit = (svals[i], d) in m.binary_of(frel)
        if hit:
            bits |= 1 << k
    return bits


def star_eval(star: GenStar, m: Model, v: Valuation, sig: S.Signature) -> bool:
    """Direct semantics of a generalized star."""

    def val(name: str) -> str:
        try:
            return v[name]
        except KeyError:
            raise EvalError(f"unbound variable {name!r}")

    for y, x in star.eq:
        if val(y) != val(x):
            return False
    svars = star.gccat.vars
    svals = tuple(val(x) for x in svars)
    if len(set(svals)) != len(svals):
        return False
    for k, atom in enumerate(star.gccat.atoms):
        match atom:
            case ("u", a, i):
                hit = svals[i] in m.unary_of(a)
            case ("b", frel, i, j):
                hit = (svals[i], svals[j]) in m.binary_of(frel)
        if hit != star.gccat.truth(atom):
            return False
    counts: dict[int, int] = {}
    inside = set(svals)
    for d in m.domain:
        if d in inside:
            continue
        bits = _realized_extension(m, sig, svals, svars, d)
        counts[bits] = counts.get(bits, 0) + 1
    for t, c in star.gamma:
        if not c.admits(counts.get(t.bits, 0)):
            return False
    return True


def ext_to_fo(ext: Extension, bound: str) -> S.Formula:
    """The extension as a cube formula over the fresh variable."""

    vars = ext.vars
    conj: list[S.Formula] = [S.Not(S.Eq(bound, x)) for x in vars]
    for k, atom in enumerate(ext.atoms):
        match atom:
            case ("u", a):
                lit: S.Formula = S.PredU(a, bound)
            case ("s", frel):
                lit = S.PredB(frel, bound, bound)
            case ("xo", frel, i):
                lit = S.PredB(frel, bound, vars[i])
            case ("xi", frel, i):
                lit = S.PredB(frel, vars[i], bound)
        conj.append(lit if ext.bits >> k & 1 else S.Not(lit))
    if not conj:
        return S.TRUE
    return reduce(S.And, conj)


def star_to_fo(star: GenStar) -> S.Formula:
    """Print-ready first-order form: prefix, cube, then count atoms."""

    conj: list[S.Formula] = [S.Eq(y, x) for y, x in star.eq]
    svars = star.gccat.vars
    for k, atom in enumerate(star.gccat.atoms):
        match atom:
            case ("u", a, i):
                lit: S.Formula = S.PredU(a, svars[i])
            case ("b", frel, i, j):
                lit = S.PredB(frel, svars[i], svars[j])
        conj.append(lit if star.gccat.bits >> k & 1 else S.Not(lit))
    for i in range(len(svars)):
        for j in range(i + 1, len(svars)):
            conj.append(S.Not(S.Eq(svars[i], svars[j])))
    bound = _pick_bound(star.all_vars)
    for t, c in star.gamma:
        body = ext_to_fo(t, bound)
        if c.kind == "exact":
            conj.append(S.ExistsEq(c.n, bound, body))
        elif c.n > 0:
            conj.append(S.ExistsGeq(c.n, bound, body))
    if not conj:
        return S.TRUE
    return reduce(S.And, conj)
