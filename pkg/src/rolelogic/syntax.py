"""Signatures and formula ASTs.

Three formula families share one node hierarchy:

* role formulas: variable-free, evaluated against a pair of model elements
  (``UnaryAtom`` .. ``Box`` plus record sugar),
* first-order formulas with counting quantifiers (``PredU`` .. ``Lfp``),
* second-order formulas (first-order plus ``ExistsRel``/``ForallRel``).

Boolean connectives (``Not``/``And``/``Or``/``Implies``), ``Spatial``,
``Acyclic`` and the truth constants are shared by all families; the family
of a tree is determined by its leaves.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field


class RoleLogicError(Exception):
    """Base class for all errors raised by this package."""


class SignatureError(RoleLogicError):
    pass


class NotCoreError(RoleLogicError):
    """A role formula still contains sugar or derived nodes."""


class UnsupportedNodeError(RoleLogicError):
    pass


IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

# Grammar keywords; predicate names must stay clear of them so parsed and
# printed formulas round-trip.
RESERVED_NAMES = frozenset(
    {
        "id", "true", "false", "emp", "inv", "sh", "card", "fc", "edges",
        "acyclic", "exists", "forall", "exists2", "forall2", "lfp", "model",
        "domain", "sig", "unary", "binary", "nonsplit", "let", "formula",
        "role", "fields", "slots", "identities", "simultaneous",
    }
)


@dataclass(frozen=True)
class Signature:
    """Declared unary and binary predicate names with splittability flags."""

    unaries: tuple[str, ...] = ()
    binaries: tuple[str, ...] = ()
    nonsplittable: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "unaries", tuple(self.unaries))
        object.__setattr__(self, "binaries", tuple(self.binaries))
        object.__setattr__(self, "nonsplittable", frozenset(self.nonsplittable))
        seen = set()
        for name in self.unaries + self.binaries:
            if not IDENT_RE.match(name):
                raise SignatureError(f"bad predicate name {name!r}")
            if name in RESERVED_NAMES:
                raise SignatureError(f"predicate name {name!r} is reserved")
            if name in seen:
                raise SignatureError(f"predicate {name!r} declared twice")
            seen.add(name)
        bad = self.nonsplittable - seen
        if bad:
            raise SignatureError(f"nonsplittable names not declared: {sorted(bad)}")

    def is_unary(self, name: str) -> bool:
        return name in self.unaries

    def is_binary(self, name: str) -> bool:
        return name in self.binaries

    def is_declared(self, name: str) -> bool:
        return name in self.unaries or name in self.binaries

    def is_splittable(self, name: str) -> bool:
        return name not in self.nonsplittable

    @property
    def names(self) -> tuple[str, ...]:
        return self.unaries + self.binaries

    def with_unaries(self, *extra: str) -> "Signature":
        return Signature(self.unaries + tuple(extra), self.binaries, self.nonsplittable)


# ---------------------------------------------------------------------------
# Formula nodes


@dataclass(frozen=True)
class Formula:
    def __str__(self):  # pragma: no cover - convenience only
        from .printer import print_formula, dialect_of

        return print_formula(self, dialect_of(self))


# Shared connectives and constants.


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


TRUE = TrueFormula()
FALSE = FalseFormula()


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Spatial(Formula):
    """Spatial conjunction: the model's tuples split into two halves."""

    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Acyclic(Formula):
    """The union of the named binary relations has no directed cycle."""

    fields: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))


# Role-formula leaves and operators.


@dataclass(frozen=True)
class UnaryAtom(Formula):
    name: str


@dataclass(frozen=True)
class BinaryAtom(Formula):
    name: str


@dataclass(frozen=True)
class Id(Formula):
    pass


@dataclass(frozen=True)
class Emp(Formula):
    pass


@dataclass(frozen=True)
class Inv(Formula):
    arg: Formula


@dataclass(frozen=True)
class Shift(Formula):
    arg: Formula


@dataclass(frozen=True)
class CardGeq(Formula):
    count: int
    arg: Formula

    def __post_init__(self):
        if self.count < 0:
            raise RoleLogicError("negative count in card node")


@dataclass(frozen=True)
class CardLeq(Formula):
    count: int
    arg: Formula

    def __post_init__(self):
        if self.count < 0:
            raise RoleLogicError("negative count in card node")


@dataclass(frozen=True)
class CardEq(Formula):
    count: int
    arg: Formula

    def __post_init__(self):
        if self.count < 0:
            raise RoleLogicError("negative count in card node")


@dataclass(frozen=True)
class Box(Formula):
    """Universal shorthand: true when the argument holds for every object."""

    arg: Formula


# Record sugar (desugared by the records module).


@dataclass(frozen=True)
class FieldComplement(Formula):
    field: str


@dataclass(frozen=True)
class Edges(Formula):
    pass


@dataclass(frozen=True)
class CardBound:
    """Multiplicity annotation on a record atom: =k, <=k or >=k."""

    op: str
    count: int

    def __post_init__(self):
        if self.op not in ("=", "<=", ">="):
            raise RoleLogicError(f"bad bound operator {self.op!r}")
        if self.count < 0:
            raise RoleLogicError("negative count in record bound")


@dataclass(frozen=True)
class Field(Formula):
    field: str
    bound: CardBound
    arg: Formula


@dataclass(frozen=True)
class Multifield(Formula):
    field: str
    arg: Formula


@dataclass(frozen=True)
class Slot(Formula):
    arg: Formula
    bound: CardBound
    field: str


@dataclass(frozen=True)
class Multislot(Formula):
    arg: Formula
    field: str


# First-order leaves and quantifiers.


@dataclass(frozen=True)
class PredU(Formula):
    name: str
    var: str


@dataclass(frozen=True)
class PredB(Formula):
    name: str
    var1: str
    var2: str


@dataclass(frozen=True)
class Eq(Formula):
    var1: str
    var2: str


@dataclass(frozen=True)
class ExistsGeq(Formula):
    count: int
    var: str
    body: Formula

    def __post_init__(self):
        if self.count < 0:
            raise RoleLogicError("negative count in quantifier")


@dataclass(frozen=True)
class ExistsEq(Formula):
    count: int
    var: str
    body: Formula

    def __post_init__(self):
        if self.count < 0:
            raise RoleLogicError("negative count in quantifier")


@dataclass(frozen=True)
class ExistsLeq(Formula):
    count: int
    var: str
    body: Formula

    def __post_init__(self):
        if self.count < 0:
            raise RoleLogicError("negative count in quantifier")


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class RelApp(Formula):
    """Application of a bound relation variable (lfp or second order)."""

    name: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Lfp(Formula):
    """Applied least fixpoint: (lfp P (formals) . body)(actuals)."""

    rel: str
    formals: tuple[str, ...]
    body: Formula
    actuals: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "formals", tuple(self.formals))
        object.__setattr__(self, "actuals", tuple(self.actuals))
        if len(set(self.formals)) != len(self.formals):
            raise RoleLogicError("lfp formal variables must be distinct")
        if len(self.formals) != len(self.actuals):
            raise RoleLogicError("lfp arity mismatch")


# Second-order quantifiers.


@dataclass(frozen=True)
class ExistsRel(Formula):
    rel: str
    arity: int
    body: Formula


@dataclass(frozen=True)
class ForallRel(Formula):
    rel: str
    arity: int
    body: Formula


RoleFormula = Formula
FoFormula = Formula
SolFormula = Formula

_BINARY_NODES = (And, Or, Implies, Spatial)
_ROLE_UNARY = (Not, Inv, Shift, Box)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _BINARY_NODES):
        return (f.lhs, f.rhs)
    if isinstance(f, (Not, Inv, Shift, Box)):
        return (f.arg,)
    if isinstance(f, (CardGeq, CardLeq, CardEq)):
        return (f.arg,)
    if isinstance(f, (Field, Multifield, Slot, Multislot)):
        return (f.arg,)
    if isinstance(f, (ExistsGeq, ExistsEq, ExistsLeq, Forall)):
        return (f.body,)
    if isinstance(f, (ExistsRel, ForallRel)):
        return (f.body,)
    if isinstance(f, Lfp):
        return (f.body,)
    return ()


def walk(f: Formula):
    yield f
    for child in children(f):
        yield from walk(child)


def free_vars(f: Formula) -> frozenset[str]:
    match f:
        case PredU(_, v):
            return frozenset({v})
        case PredB(_, v1, v2) | Eq(v1, v2):
            return frozenset({v1, v2})
        case RelApp(_, args):
            return frozenset(args)
        case ExistsGeq(_, v, body) | ExistsEq(_, v, body) | ExistsLeq(_, v, body):
            return free_vars(body) - {v}
        case Forall(v, body):
            return free_vars(body) - {v}
        case Lfp(_, formals, body, actuals):
            return (free_vars(body) - set(formals)) | set(actuals)
        case _:
            out: frozenset[str] = frozenset()
            for child in children(f):
                out |= free_vars(child)
            return out


def subst_vars(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free variables; bound variables shadow the mapping."""

    if not mapping:
        return f

    def ren(v: str) -> str:
        return mapping.get(v, v)

    match f:
        case PredU(name, v):
            return PredU(name, ren(v))
        case PredB(name, v1, v2):
            return PredB(name, ren(v1), ren(v2))
        case Eq(v1, v2):
            return Eq(ren(v1), ren(v2))
        case RelApp(name, args):
            return RelApp(name, tuple(ren(a) for a in args))
        case ExistsGeq(k, v, body):
            inner = {k2: v2 for k2, v2 in mapping.items() if k2 != v}
            return ExistsGeq(k, v, subst_vars(body, inner))
        case ExistsEq(k, v, body):
            inner = {k2: v2 for k2, v2 in mapping.items() if k2 != v}
            return ExistsEq(k, v, subst_vars(body, inner))
        case ExistsLeq(k, v, body):
            inner = {k2: v2 for k2, v2 in mapping.items() if k2 != v}
            return ExistsLeq(k, v, subst_vars(body, inner))
        case Forall(v, body):
            inner = {k2: v2 for k2, v2 in mapping.items() if k2 != v}
            return Forall(v, subst_vars(body, inner))
        case Lfp(rel, formals, body, actuals):
            inner = {k2: v2 for k2, v2 in mapping.items() if k2 not in formals}
            return Lfp(rel, formals, subst_vars(body, inner), tuple(ren(a) for a in actuals))
        case Not(a):
            return Not(subst_vars(a, mapping))
        case And(l, r):
            return And(subst_vars(l, mapping), subst_vars(r, mapping))
        case Or(l, r):
            return Or(subst_vars(l, mapping), subst_vars(r, mapping))
        case Implies(l, r):
            return Implies(subst_vars(l, mapping), subst_vars(r, mapping))
        case Spatial(l, r):
            return Spatial(subst_vars(l, mapping), subst_vars(r, mapping))
        case ExistsRel(rel, arity, body):
            return ExistsRel(rel, arity, subst_vars(body, mapping))
        case ForallRel(rel, arity, body):
            return ForallRel(rel, arity, subst_vars(body, mapping))
        case _:
            return f


def subst_preds(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename predicate symbols (used to build split copies)."""

    match f:
        case PredU(name, v):
            return PredU(mapping.get(name, name), v)
        case PredB(name, v1, v2):
            return PredB(mapping.get(name, name), v1, v2)
        case UnaryAtom(name):
            return UnaryAtom(mapping.get(name, name))
        case BinaryAtom(name):
            return BinaryAtom(mapping.get(name, name))
        case Not(a):
            return Not(subst_preds(a, mapping))
        case And(l, r):
            return And(subst_preds(l, mapping), subst_preds(r, mapping))
        case Or(l, r):
            return Or(subst_preds(l, mapping), subst_preds(r, mapping))
        case Implies(l, r):
            return Implies(subst_preds(l, mapping), subst_preds(r, mapping))
        case Spatial(l, r):
            return Spatial(subst_preds(l, mapping), subst_preds(r, mapping))
        case ExistsGeq(k, v, body):
            return ExistsGeq(k, v, subst_preds(body, mapping))
        case ExistsEq(k, v, body):
            return ExistsEq(k, v, subst_preds(body, mapping))
        case ExistsLeq(k, v, body):
            return ExistsLeq(k, v, subst_preds(body, mapping))
        case Forall(v, body):
            return Forall(v, subst_preds(body, mapping))
        case Lfp(rel, formals, body, actuals):
            return Lfp(rel, formals, subst_preds(body, mapping), actuals)
        case ExistsRel(rel, arity, body):
            return ExistsRel(rel, arity, subst_preds(body, mapping))
        case ForallRel(rel, arity, body):
            return ForallRel(rel, arity, subst_preds(body, mapping))
        case Acyclic(fields):
            return Acyclic(tuple(mapping.get(n, n) for n in fields))
        case _:
            return f


SUGAR_NODES = (FieldComplement, Edges, Field, Multifield, Slot, Multislot)
DERIVED_NODES = (CardLeq, CardEq, Box)


def is_core(f: Formula) -> bool:
    """Core role formulas carry no sugar and no derived card/box nodes."""

    return not any(isinstance(g, SUGAR_NODES + DERIVED_NODES) for g in walk(f))


def _contains_card(f: Formula) -> bool:
    return any(isinstance(g, (CardGeq, CardLeq, CardEq, Box)) for g in walk(f))


def is_star_free_eligible(f: Formula) -> bool:
    """No counting construct may sit inside another counting construct."""

    for g in walk(f):
        if isinstance(g, (CardGeq, CardLeq, CardEq, Box)):
            if _contains_card(g.arg):
                return False
    return True


def metrics(f: Formula) -> tuple[int, int]:
    """Quantifier depth and counting degree of a first-order formula.

    Every counting quantifier contributes one level of depth regardless of
    its count.  The degree is the least p such that each =i / <=i fits C_{p+1}
    (i <= p) and each >=k does too (k <= p+1).
    """

    match f:
        case PredU() | PredB() | Eq() | TrueFormula() | FalseFormula() | RelApp():
            return (0, 0)
        case Not(a):
            return metrics(a)
        case And(l, r) | Or(l, r) | Implies(l, r):
            dl, gl = metrics(l)
            dr, gr = metrics(r)
            return (max(dl, dr), max(gl, gr))
        case ExistsGeq(k, _, body):
            d, g = metrics(body)
            return (d + 1, max(g, k - 1 if k > 0 else 0))
        case ExistsEq(k, _, body) | ExistsLeq(k, _, body):
            d, g = metrics(body)
            return (d + 1, max(g, k))
        case Forall(_, body):
            d, g = metrics(body)
            return (d + 1, g)
        case _:
            raise UnsupportedNodeError(f"metrics: unsupported node {type(f).__name__}")


def check_lfp_positive(body: Formula, rel: str) -> None:
    """Reject bodies where the fixpoint relation occurs non-positively.

    Bodies of =k / <=k quantifiers are mixed-polarity contexts, so the
    relation may not occur there at all.
    """

    def occurs(f: Formula) -> bool:
        return any(isinstance(g, RelApp) and g.name == rel for g in walk(f))

    def go(f: Formula, positive: bool) -> None:
        match f:
            case RelApp(name, _) if name == rel:
                if not positive:
                    raise RoleLogicError(f"relation {rel!r} occurs non-positively in lfp body")
            case Not(a):
                go(a, not positive)
            case Implies(l, r):
                go(l, not positive)
                go(r, positive)
            case ExistsEq(_, _, b) | ExistsLeq(_, _, b):
                if occurs(b):
                    raise RoleLogicError(
                        f"relation {rel!r} occurs under a non-monotone counting quantifier"
                    )
            case _:
                for child in children(f):
                    go(child, positive)

    go(body, True)


def rl2_to_fo(f: Formula, c1: str, c2: str, sig: Signature) -> Formula:
    """Translate a core role formula to first-order logic with counting.

    ``c1``/``c2`` name the two components of the evaluation pair.  Counting
    nodes quantify a variable picked from the name pool so that the result
    reuses two variable names whenever possible.
    """

    pool = [c1]
    if c2 != c1:
        pool.append(c2)

    def pick(avoid: str) -> str:
        for name in pool:
            if name != avoid:
                return name
        for cand in ("x", "y", "z", "w"):
            if cand not in pool:
                pool.append(cand)
                warnings.warn("rl2_to_fo introduced an extra variable name")
                return cand
        cand = f"v{len(pool)}"
        pool.append(cand)
        warnings.warn("rl2_to_fo introduced an extra variable name")
        return cand

    def go(g: Formula, a: str, b: str) -> Formula:
        match g:
            case UnaryAtom(name):
                return PredU(name, a)
            case BinaryAtom(name):
                return PredB(name, b, a)
            case Id():
                return Eq(b, a)
            case TrueFormula():
                return TRUE
            case FalseFormula():
                return FALSE
            case Emp():
                return Emp()
            case Not(arg):
                return Not(go(arg, a, b))
            case And(l, r):
                return And(go(l, a, b), go(r, a, b))
            case Or(l, r):
                return Or(go(l, a, b), go(r, a, b))
            case Implies(l, r):
                return Implies(go(l, a, b), go(r, a, b))
            case Shift(arg):
                return go(arg, b, b)
            case Inv(arg):
                return go(arg, b, a)
            case CardGeq(k, arg):
                v = pick(a)
                return ExistsGeq(k, v, go(arg, v, a))
            case Spatial(l, r):
                return Spatial(go(l, a, b), go(r, a, b))
            case Acyclic(fields):
                return Acyclic(fields)
            case _:
                raise NotCoreError(
                    f"rl2_to_fo: formula is not core (found {type(g).__name__})"
                )

    return go(f, c1, c2)
