"""Spatial conjunction of counting stars and its elimination.

Each star translates to a marked multiset of neighborhood atoms: ``One``
atoms demand exactly one witness of an extension, ``Any`` atoms allow any
number.  Markers record which operand a witness came from, which keeps
witnesses from the two sides distinct while merging.  Combining two stars
enumerates the complete matchings of ``One`` atoms (rules pairing One/One,
One/Any and Any/One), adds the merged ``Any`` atoms for every compatible
pair, and reads each surviving multiset back into a star.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import reduce

from . import syntax as S
from . import records
from .normalform import (
    CountConstraint, Extension, GenStar, Gccat,
    canonicalize_star, depth_one_nf, extensions_of, ext_to_fo,
    make_star, star_partition, star_to_fo,
)
from .semantics import Model

__all__ = [
    "MARK1", "MARK2", "MARK12", "SpatialAtom", "SpatialStar",
    "star_to_spatial", "ispand", "kispand", "combine_stars",
    "eliminate_spatial", "eliminate_to_stars", "to_first_order",
    "spatial_star_formula", "marked_model", "marked_signature",
]

MARK1 = frozenset({1})
MARK2 = frozenset({2})
MARK12 = frozenset({1, 2})

MATCHING_GUARD = 1_000_000


@dataclass(frozen=True)
class SpatialAtom:
    kind: str  # 'one' | 'any'
    ext: Extension
    marker: frozenset[int]

    def __post_init__(self):
        if self.kind not in ("one", "any"):
            raise S.RoleLogicError(f"bad spatial atom kind {self.kind!r}")
        if self.marker not in (MARK1, MARK2, MARK12):
            raise S.RoleLogicError("spatial atoms carry marker {1}, {2} or {1,2}")


@dataclass(frozen=True)
class SpatialStar:
    """Marked multiset form of a star; Any atoms are deduplicated."""

    eq: tuple[tuple[str, str], ...]
    gccat: Gccat
    atoms: tuple[SpatialAtom, ...]

    def ones(self) -> list[Extension]:
        return [a.ext for a in self.atoms if a.kind == "one"]

    def anys(self) -> list[Extension]:
        return [a.ext for a in self.atoms if a.kind == "any"]


def star_to_spatial(star: GenStar, marker: frozenset[int]) -> SpatialStar:
    """Exact(i) becomes i One atoms; AtLeast(i) adds an Any atom as well.

    Unconstrained extensions (the AtLeast(0) default) contribute a single
    Any atom, so every extension of the universe is represented.
    """

    if marker not in (MARK1, MARK2, MARK12):
        raise S.RoleLogicError("translation markers are {1}, {2} or {1,2}")
    sig = star.gccat.sig
    atoms: list[SpatialAtom] = []
    for ext in extensions_of(sig, star.gccat.vars):
        c = star.constraint(ext)
        for _ in range(c.n if c.kind == "exact" else c.n):
            atoms.append(SpatialAtom("one", ext, marker))
        if c.kind == "atleast":
            atoms.append(SpatialAtom("any", ext, marker))
    atoms.sort(key=lambda a: (a.kind, a.ext.bits))
    return SpatialStar(star.eq, star.gccat, tuple(atoms))


def ispand(t1: Extension, t2: Extension) -> Extension | None:
    """Merge two extensions; defined only when their positives are disjoint."""

    if t1.sig != t2.sig or t1.vars != t2.vars:
        raise S.RoleLogicError("extensions live in different universes")
    if t1.bits & t2.bits:
        return None
    return t1.union(t2)


def kispand(g1: Gccat, g2: Gccat) -> Gccat | None:
    """Merge two variable cubes; defined when their positives are disjoint."""

    if g1.sig != g2.sig or g1.vars != g2.vars:
        raise S.RoleLogicError("cubes live in different universes")
    if g1.bits & g2.bits:
        return None
    return Gccat(g1.sig, g1.vars, g1.bits | g2.bits)


# ---------------------------------------------------------------------------
# Star combination


def combine_stars(c1: GenStar, c2: GenStar) -> list[GenStar]:
    """All stars whose disjunction is equivalent to ``c1 * c2``."""

    if c1.gccat.sig != c2.gccat.sig:
        raise S.RoleLogicError("stars over different signatures")
    if tuple(sorted(c1.all_vars)) != tuple(sorted(c2.all_vars)):
        raise S.RoleLogicError("stars over different variable lists")
    if star_partition(c1) != star_partition(c2):
        return []  # incompatible equality assumptions
    c1 = canonicalize_star(c1)
    c2 = canonicalize_star(c2)
    eq = c1.eq
    merged = kispand(c1.gccat, c2.gccat)
    if merged is None:
        return []

    s1 = star_to_spatial(c1, MARK1)
    s2 = star_to_spatial(c2, MARK2)
    ones1 = s1.ones()
    ones2 = s2.ones()
    anys1 = s1.anys()
    anys2 = s2.anys()

    any_pairs_bits: set[int] = set()
    for t1 in anys1:
        for t2 in anys2:
            if not (t1.bits & t2.bits):
                any_pairs_bits.add(t1.bits | t2.bits)

    sig = c1.gccat.sig
    vars = c1.gccat.vars
    results: set[tuple[tuple[int, int], ...]] = set()
    budget = [MATCHING_GUARD]

    def assign_ones2(i: int, leftover: list[Extension], acc: Counter) -> None:
        if budget[0] <= 0:
            raise S.RoleLogicError("star combination matching search exceeded its guard")
        budget[0] -= 1
        if i == len(leftover):
            results.add(tuple(sorted(acc.items())))
            return
        t2 = leftover[i]
        seen: set[int] = set()
        for t1 in anys1:
            if t1.bits & t2.bits:
                continue
            u = t1.bits | t2.bits
            if u in seen:
                continue
            seen.add(u)
            acc[u] += 1
            assign_ones2(i + 1, leftover, acc)
            acc[u] -= 1

    def assign_ones1(i: int, used2: list[bool], acc: Counter) -> None:
        if budget[0] <= 0:
            raise S.RoleLogicError("star combination matching search exceeded its guard")
        budget[0] -= 1
        if i == len(ones1):
            leftover = [t for t, used in zip(ones2, used2) if not used]
            assign_ones2(0, leftover, acc)
            return
        t1 = ones1[i]
        tried: set[tuple[int, bool]] = set()
        for j, t2 in enumerate(ones2):
            if used2[j] or (t1.bits & t2.bits):
                continue
            key = (t2.bits, True)
            if key in tried:
                continue
            tried.add(key)
            used2[j] = True
            acc[t1.bits | t2.bits] += 1
            assign_ones1(i + 1, used2, acc)
            acc[t1.bits | t2.bits] -= 1
            used2[j] = False
        for t2 in anys2:
            if t1.bits & t2.bits:
                continue
            key = (t2.bits, False)
            if key in tried:
                continue
            tried.add(key)
            acc[t1.bits | t2.bits] += 1
            assign_ones1(i + 1, used2, acc)
            acc[t1.bits | t2.bits] -= 1

    assign_ones1(0, [False] * len(ones2), Counter())

    out: list[GenStar] = []
    seen_stars: set[GenStar] = set()
    for ones12 in sorted(results):
        gamma: dict[Extension, CountConstraint] = {}
        one_counts = dict(ones12)
        for ext in extensions_of(sig, vars):
            n = one_counts.get(ext.bits, 0)
            if ext.bits in any_pairs_bits:
                gamma[ext] = CountConstraint("atleast", n)
            else:
                gamma[ext] = CountConstraint("exact", n)
        star = make_star(eq, merged, gamma)
        if star not in seen_stars:
            seen_stars.add(star)
            out.append(star)
    return out


# ---------------------------------------------------------------------------
# Elimination driver


def _check_operand(f: S.Formula, sig: S.Signature) -> None:
    for g in S.walk(f):
        if isinstance(g, S.Lfp):
            raise S.RoleLogicError("least fixpoints cannot appear under a spatial conjunction")
        if isinstance(g, S.Acyclic):
            raise S.RoleLogicError("acyclic cannot appear under a spatial conjunction")
        if isinstance(g, S.Emp):
            raise S.RoleLogicError(
                "emp under a spatial conjunction is only supported as a direct operand"
            )
    depth, _ = S.metrics(f)
    if depth > 1:
        raise S.RoleLogicError(
            f"spatial operand has quantifier depth {depth}: not in the decidable fragment"
        )


def _combine_lists(lhs: S.Formula, rhs: S.Formula, sig: S.Signature) -> list[GenStar]:
    _check_operand(lhs, sig)
    _check_operand(rhs, sig)
    vars = tuple(sorted(S.free_vars(lhs) | S.free_vars(rhs)))
    stars1 = depth_one_nf(lhs, sig, vars)
    stars2 = depth_one_nf(rhs, sig, vars)
    out: list[GenStar] = []
    seen: set[GenStar] = set()
    for a in stars1:
        for b in stars2:
            for star in combine_stars(a, b):
                if star not in seen:
                    seen.add(star)
                    out.append(star)
    return out


def _stars_to_formula(stars: list[GenStar]) -> S.Formula:
    if not stars:
        return S.FALSE
    return reduce(S.Or, [star_to_fo(s) for s in stars])


def to_first_order(f: S.Formula, sig: S.Signature) -> S.Formula:
    """Role formulas desugar and translate at the pair (x, y); first-order
    input passes through."""

    from .printer import dialect_of

    if dialect_of(f) == "role":
        core = records.desugar(f, sig)
        return S.rl2_to_fo(core, "x", "y", sig)
    return f


def _elim(f: S.Formula, sig: S.Signature) -> S.Formula:
    match f:
        case S.Spatial(l, r):
            le = _elim(l, sig)
            re_ = _elim(r, sig)
            if isinstance(le, S.Emp):
                return re_
            if isinstance(re_, S.Emp):
                return le
            return _stars_to_formula(_combine_lists(le, re_, sig))
        case S.Not(a):
            return S.Not(_elim(a, sig))
        case S.And(l, r):
            return S.And(_elim(l, sig), _elim(r, sig))
        case S.Or(l, r):
            return S.Or(_elim(l, sig), _elim(r, sig))
        case S.Implies(l, r):
            return S.Implies(_elim(l, sig), _elim(r, sig))
        case S.ExistsGeq(k, v, body):
            return S.ExistsGeq(k, v, _elim(body, sig))
        case S.ExistsEq(k, v, body):
            return S.ExistsEq(k, v, _elim(body, sig))
        case S.ExistsLeq(k, v, body):
            return S.ExistsLeq(k, v, _elim(body, sig))
        case S.Forall(v, body):
            return S.Forall(v, _elim(body, sig))
        case _:
            return f


def _require_splittable(sig: S.Signature) -> None:
    if sig.nonsplittable:
        raise S.RoleLogicError(
            "spatial elimination needs an all-splittable signature"
        )


def eliminate_spatial(f: S.Formula, sig: S.Signature) -> S.Formula:
    """Replace every spatial conjunction, innermost first, by a disjunction
    of stars; the result contains no Spatial node and is equivalent."""

    _require_splittable(sig)
    return _elim(to_first_order(f, sig), sig)


def eliminate_to_stars(f: S.Formula, sig: S.Signature) -> list[GenStar]:
    """Like eliminate_spatial, but hand back the final star disjunction.

    The input (after translation) must be a single spatial conjunction, or
    a formula of depth at most one, so the whole result is one star list.
    """

    _require_splittable(sig)
    fo = to_first_order(f, sig)
    if isinstance(fo, S.Spatial):
        le = _elim(fo.lhs, sig)
        re_ = _elim(fo.rhs, sig)
        if isinstance(le, S.Emp):
            le, re_ = re_, le
        if isinstance(re_, S.Emp):
            _check_operand(le, sig)
            return depth_one_nf(le, sig, tuple(sorted(S.free_vars(le))))
        return _combine_lists(le, re_, sig)
    out = _elim(fo, sig)
    return depth_one_nf(out, sig, tuple(sorted(S.free_vars(out))))


# ---------------------------------------------------------------------------
# Marked spatial form as an explicit formula (used to validate star_to_spatial)


def marked_signature(sig: S.Signature) -> tuple[S.Signature, str, str]:
    b1, b2 = "B1", "B2"
    while sig.is_declared(b1) or sig.is_declared(b2):
        b1 += "_"
        b2 += "_"
    return sig.with_unaries(b1, b2), b1, b2


def _mark_formula(marker: frozenset[int], var: str, b1: str, b2: str) -> S.Formula:
    lit1: S.Formula = S.PredU(b1, var)
    lit2: S.Formula = S.PredU(b2, var)
    return S.And(
        lit1 if 1 in marker else S.Not(lit1),
        lit2 if 2 in marker else S.Not(lit2),
    )


def _guard(vars: tuple[str, ...], bound: str, body: S.Formula) -> S.Formula:
    conj = [S.Not(S.Eq(bound, x)) for x in vars]
    if not conj:
        return S.Forall(bound, body)
    return S.Forall(bound, S.Implies(reduce(S.And, conj), body))


def _allempty(vars: tuple[str, ...], bound: str, sig: S.Signature,
              b1: str, b2: str) -> S.Formula:
    empty = Extension(sig, vars, 0)
    return S.And(ext_to_fo(empty, bound),
                 _mark_formula(frozenset(), bound, b1, b2))


def _gccat_formula(g: Gccat) -> S.Formula:
    conj: list[S.Formula] = []
    for k, atom in enumerate(g.atoms):
        match atom:
            case ("u", a, i):
                lit: S.Formula = S.PredU(a, g.vars[i])
            case ("b", frel, i, j):
                lit = S.PredB(frel, g.vars[i], g.vars[j])
        conj.append(lit if g.bits >> k & 1 else S.Not(lit))
    for i in range(len(g.vars)):
        for j in range(i + 1, len(g.vars)):
            conj.append(S.Not(S.Eq(g.vars[i], g.vars[j])))
    if not conj:
        return S.TRUE
    return reduce(S.And, conj)


def spatial_star_formula(ss: SpatialStar, sig: S.Signature
                         ) -> tuple[S.Formula, S.Signature]:
    """Spell the marked multiset out as a formula with real spatial nodes.

    Returns the formula over the marker-extended signature.  Evaluating it
    on a marked model is the reference semantics for the translation.
    """

    marked_sig, b1, b2 = marked_signature(sig)
    vars = ss.gccat.vars
    bound = "x"
    while bound in vars:
        bound += "_"
    allempty = _allempty(vars, bound, sig, b1, b2)

    def kstr() -> S.Formula:
        return S.And(_gccat_formula(ss.gccat), _guard(vars, bound, allempty))

    def neighborhood(ext: Extension, marker) -> S.Formula:
        marked = S.And(ext_to_fo(ext, bound), _mark_formula(marker, bound, b1, b2))
        return _guard(vars, bound, S.Or(marked, allempty))

    def one_neighborhood(ext: Extension, marker) -> S.Formula:
        marked = S.And(ext_to_fo(ext, bound), _mark_formula(marker, bound, b1, b2))
        return S.And(neighborhood(ext, marker), S.ExistsEq(1, bound, marked))

    parts: list[S.Formula] = [kstr()]
    for atom in ss.atoms:
        if atom.kind == "one":
            parts.append(one_neighborhood(atom.ext, atom.marker))
        else:
            parts.append(neighborhood(atom.ext, atom.marker))
    spatial = reduce(S.Spatial, parts)
    conj = [S.Eq(y, x) for y, x in ss.eq]
    formula = spatial if not conj else S.And(reduce(S.And, conj), spatial)
    return formula, marked_sig


def marked_model(m: Model, image: set[str], marker: frozenset[int],
                 b1: str, b2: str) -> Model:
    """Extend a model with marker predicates on everything outside the image."""

    outside = frozenset(d for d in m.domain if d not in image)
    unary = dict(m.unary)
    unary[b1] = outside if 1 in marker else frozenset()
    unary[b2] = outside if 2 in marker else frozenset()
    return Model(m.domain, unary, m.binary)
