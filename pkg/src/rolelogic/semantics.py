"""Finite models and the reference evaluators.

``eval_role`` follows the pair-environment clauses of role logic,
``eval_fo`` is Tarskian with counting quantifiers and an iterated least
fixpoint, and ``eval_sol`` adds brute-force relation quantifiers.  Spatial
conjunction is evaluated by streaming over all ways to split the model's
tuples, short-circuiting on the first satisfying split.
"""

from __future__ import annotations

import itertools
import os
from typing import Iterable, Iterator, Mapping, NamedTuple

from . import syntax as S

__all__ = [
    "Model", "Pair", "Valuation", "EvalError", "GuardExceeded",
    "splits", "eval_role", "eval_fo", "eval_sol", "guard_bits",
]


class EvalError(S.RoleLogicError):
    pass


class GuardExceeded(S.RoleLogicError):
    pass


DEFAULT_GUARD_BITS = 24


def guard_bits() -> int:
    """Enumeration budget in bits; ROLELOGIC_MAX_TUPLES overrides it."""

    raw = os.environ.get("ROLELOGIC_MAX_TUPLES")
    if raw is None:
        return DEFAULT_GUARD_BITS
    try:
        return int(raw)
    except ValueError:
        raise S.RoleLogicError(f"bad ROLELOGIC_MAX_TUPLES value {raw!r}")


class Pair(NamedTuple):
    c1: str
    c2: str


Valuation = Mapping[str, str]


class Model:
    """Finite relational structure over a fixed domain.

    Predicates missing from the given interpretations are empty; passing a
    signature completes and validates the entries.
    """

    __slots__ = ("domain", "unary", "binary", "_key")

    def __init__(self, domain: Iterable[str],
                 unary: Mapping[str, Iterable[str]] | None = None,
                 binary: Mapping[str, Iterable[tuple[str, str]]] | None = None,
                 sig: S.Signature | None = None):
        self.domain: tuple[str, ...] = tuple(domain)
        if not self.domain:
            raise EvalError("model domain must be nonempty")
        if len(set(self.domain)) != len(self.domain):
            raise EvalError("duplicate element in domain")
        dom = set(self.domain)
        un = {name: frozenset(vals) for name, vals in (unary or {}).items()}
        bi = {name: frozenset(tuple(p) for p in vals) for name, vals in (binary or {}).items()}
        if sig is not None:
            for name in un:
                if not sig.is_unary(name):
                    raise EvalError(f"{name!r} is not a declared unary predicate")
            for name in bi:
                if not sig.is_binary(name):
                    raise EvalError(f"{name!r} is not a declared binary predicate")
            for name in sig.unaries:
                un.setdefault(name, frozenset())
            for name in sig.binaries:
                bi.setdefault(name, frozenset())
        for name, vals in un.items():
            if not vals <= dom:
                raise EvalError(f"unary {name!r} mentions elements outside the domain")
        for name, pairs in bi.items():
            for a, b in pairs:
                if a not in dom or b not in dom:
                    raise EvalError(f"binary {name!r} mentions elements outside the domain")
        self.unary = un
        self.binary = bi
        self._key = (
            self.domain,
            tuple(sorted((n, tuple(sorted(v))) for n, v in un.items())),
            tuple(sorted((n, tuple(sorted(v))) for n, v in bi.items())),
        )

    def unary_of(self, name: str) -> frozenset[str]:
        try:
            return self.unary[name]
        except KeyError:
            raise EvalError(f"predicate {name!r} missing from model")

    def binary_of(self, name: str) -> frozenset[tuple[str, str]]:
        try:
            return self.binary[name]
        except KeyError:
            raise EvalError(f"predicate {name!r} missing from model")

    def replace(self, **interps) -> "Model":
        un = dict(self.unary)
        bi = dict(self.binary)
        for name, val in interps.items():
            vals = frozenset(val)
            if any(isinstance(x, tuple) for x in vals) or name in bi:
                bi[name] = frozenset(vals)
            else:
                un[name] = vals
        return Model(self.domain, un, bi)

    def __eq__(self, other):
        return isinstance(other, Model) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Model(domain={self.domain!r}, unary={dict(self.unary)!r}, binary={dict(self.binary)!r})"

    def to_text(self) -> str:
        lines = ["model {", f"  domain {', '.join(self.domain)};"]
        for name in sorted(self.unary):
            vals = sorted(self.unary[name])
            if vals:
                lines.append(f"  {name} = {{ {', '.join(vals)} }};")
        for name in sorted(self.binary):
            pairs = sorted(self.binary[name])
            if pairs:
                body = ", ".join(f"({a}, {b})" for a, b in pairs)
                lines.append(f"  {name} = {{ {body} }};")
        lines.append("}")
        return "\n".join(lines)


def _splittable_tuples(m: Model, sig: S.Signature) -> list[tuple]:
    """All true tuples of splittable predicates, in canonical order."""

    out: list[tuple] = []
    for name in sig.unaries:
        if sig.is_splittable(name):
            for el in sorted(m.unary_of(name)):
                out.append(("u", name, el))
    for name in sig.binaries:
        if sig.is_splittable(name):
            for pair in sorted(m.binary_of(name)):
                out.append(("b", name, pair))
    return out


def splits(m: Model, parts: int, sig: S.Signature) -> Iterator[tuple[Model, ...]]:
    """Stream every way to deal the splittable true tuples into the parts.

    Non-splittable interpretations are copied into every part; recombining
    the parts by union restores the model.
    """

    if parts < 1:
        raise EvalError("parts must be at least 1")
    tuples = _splittable_tuples(m, sig)
    if parts > 1 and len(tuples) * (parts - 1).bit_length() > guard_bits():
        raise GuardExceeded(
            f"split enumeration over {len(tuples)} tuples into {parts} parts exceeds the guard"
        )
    base_unary = {
        name: (m.unary_of(name) if not sig.is_splittable(name) else frozenset())
        for name in sig.unaries
    }
    base_binary = {
        name: (m.binary_of(name) if not sig.is_splittable(name) else frozenset())
        for name in sig.binaries
    }
    for assignment in itertools.product(range(parts), repeat=len(tuples)):
        unaries = [dict((n, set(v)) for n, v in base_unary.items()) for _ in range(parts)]
        binaries = [dict((n, set(v)) for n, v in base_binary.items()) for _ in range(parts)]
        for (kind, name, item), part in zip(tuples, assignment):
            if kind == "u":
                unaries[part][name].add(item)
            else:
                binaries[part][name].add(item)
        yield tuple(
            Model(m.domain, unaries[i], binaries[i]) for i in range(parts)
        )


def _acyclic(m: Model, fields: tuple[str, ...]) -> bool:
    """Cycle check on the union of the named relations; self-loops count."""

    edges: dict[str, set[str]] = {d: set() for d in m.domain}
    for name in fields:
        for a, b in m.binary_of(name):
            edges[a].add(b)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node: str) -> bool:
        state[node] = 1
        for nxt in edges[node]:
            mark = state.get(nxt)
            if mark == 1:
                return False
            if mark is None and not visit(nxt):
                return False
        state[node] = 2
        return True

    return all(state.get(d) == 2 or visit(d) for d in m.domain)


def _is_emp(m: Model, sig: S.Signature) -> bool:
    for name in sig.unaries:
        if sig.is_splittable(name) and m.unary_of(name):
            return False
    for name in sig.binaries:
        if sig.is_splittable(name) and m.binary_of(name):
            return False
    return True


def eval_role(f: S.Formula, m: Model, p: Pair, sig: S.Signature) -> bool:
    """Evaluate a core role formula at a pair of elements."""

    match f:
        case S.UnaryAtom(name):
            return p.c1 in m.unary_of(name)
        case S.BinaryAtom(name):
            return (p.c2, p.c1) in m.binary_of(name)
        case S.Id():
            return p.c2 == p.c1
        case S.TrueFormula():
            return True
        case S.FalseFormula():
            return False
        case S.Emp():
            return _is_emp(m, sig)
        case S.Not(arg):
            return not eval_role(arg, m, p, sig)
        case S.And(l, r):
            return eval_role(l, m, p, sig) and eval_role(r, m, p, sig)
        case S.Or(l, r):
            return eval_role(l, m, p, sig) or eval_role(r, m, p, sig)
        case S.Implies(l, r):
            return (not eval_role(l, m, p, sig)) or eval_role(r, m, p, sig)
        case S.Shift(arg):
            return eval_role(arg, m, Pair(p.c2, p.c2), sig)
        case S.Inv(arg):
            return eval_role(arg, m, Pair(p.c2, p.c1), sig)
        case S.CardGeq(k, arg):
            hits = 0
            for d in m.domain:
                if eval_role(arg, m, Pair(d, p.c1), sig):
                    hits += 1
                    if hits >= k:
                        return True
            return hits >= k
        case S.Spatial(l, r):
            return any(
                eval_role(l, m1, p, sig) and eval_role(r, m2, p, sig)
                for m1, m2 in splits(m, 2, sig)
            )
        case S.Acyclic(fields):
            return _acyclic(m, fields)
        case _ if isinstance(f, S.SUGAR_NODES + S.DERIVED_NODES):
            raise S.NotCoreError(
                f"eval_role needs a core formula (found {type(f).__name__}); desugar first"
            )
        case _:
            raise EvalError(f"not a role formula: {type(f).__name__}")


def _lfp_value(f: S.Lfp, m: Model, v: Valuation, sig: S.Signature,
               renv: Mapping[str, frozenset]) -> frozenset:
    S.check_lfp_positive(f.body, f.rel)
    current: frozenset = frozenset()
    space = list(itertools.product(m.domain, repeat=len(f.formals)))
    for _ in range(len(space) + 1):
        new = frozenset(
            tup for tup in space
            if eval_fo(
                f.body, m,
                {**v, **dict(zip(f.formals, tup))},
                sig, {**renv, f.rel: current},
            )
        )
        if new == current:
            return current
        current = new
    return current


def eval_fo(f: S.Formula, m: Model, v: Valuation, sig: S.Signature,
            renv: Mapping[str, frozenset] | None = None) -> bool:
    """Evaluate a first-order formula under a valuation."""

    renv = renv or {}

    def var(name: str) -> str:
        try:
            return v[name]
        except KeyError:
            raise EvalError(f"unbound variable {name!r}")

    match f:
        case S.PredU(name, x):
            return var(x) in m.unary_of(name)
        case S.PredB(name, x, y):
            return (var(x), var(y)) in m.binary_of(name)
        case S.Eq(x, y):
            return var(x) == var(y)
        case S.RelApp(name, args):
            if name not in renv:
                raise EvalError(f"unbound relation variable {name!r}")
            return tuple(var(a) for a in args) in renv[name]
        case S.TrueFormula():
            return True
        case S.FalseFormula():
            return False
        case S.Emp():
            return _is_emp(m, sig)
        case S.Not(arg):
            return not eval_fo(arg, m, v, sig, renv)
        case S.And(l, r):
            return eval_fo(l, m, v, sig, renv) and eval_fo(r, m, v, sig, renv)
        case S.Or(l, r):
            return eval_fo(l, m, v, sig, renv) or eval_fo(r, m, v, sig, renv)
        case S.Implies(l, r):
            return (not eval_fo(l, m, v, sig, renv)) or eval_fo(r, m, v, sig, renv)
        case S.ExistsGeq(k, x, body):
            hits = 0
            for d in m.domain:
                if eval_fo(body, m, {**v, x: d}, sig, renv):
                    hits += 1
                    if hits >= k:
                        return True
            return hits >= k
        case S.ExistsEq(k, x, body):
            hits = sum(1 for d in m.domain if eval_fo(body, m, {**v, x: d}, sig, renv))
            return hits == k
        case S.ExistsLeq(k, x, body):
            hits = sum(1 for d in m.domain if eval_fo(body, m, {**v, x: d}, sig, renv))
            return hits <= k
        case S.Forall(x, body):
            return all(eval_fo(body, m, {**v, x: d}, sig, renv) for d in m.domain)
        case S.Spatial(l, r):
            return any(
                eval_fo(l, m1, v, sig, renv) and eval_fo(r, m2, v, sig, renv)
                for m1, m2 in splits(m, 2, sig)
            )
        case S.Lfp(_, _, _, actuals):
            table = _lfp_value(f, m, v, sig, renv)
            return tuple(var(a) for a in actuals) in table
        case S.Acyclic(fields):
            return _acyclic(m, fields)
        case _:
            raise EvalError(f"not a first-order formula: {type(f).__name__}")


def _rel_interpretations(m: Model, arity: int) -> Iterator[frozenset]:
    space = list(itertools.product(m.domain, repeat=arity))
    if len(m.domain) ** arity > 9:
        raise GuardExceeded(
            f"relation quantifier over |D|^{arity} = {len(space)} tuples exceeds the guard"
        )
    for bits in range(1 << len(space)):
        yield frozenset(t for i, t in enumerate(space) if bits >> i & 1)


def eval_sol(f: S.Formula, m: Model, v: Valuation, sig: S.Signature,
             renv: Mapping[str, frozenset] | None = None) -> bool:
    """Evaluate a second-order formula by enumerating relation values."""

    renv = renv or {}
    match f:
        case S.ExistsRel(rel, arity, body):
            return any(
                eval_sol(body, m, v, sig, {**renv, rel: interp})
                for interp in _rel_interpretations(m, arity)
            )
        case S.ForallRel(rel, arity, body):
            return all(
                eval_sol(body, m, v, sig, {**renv, rel: interp})
                for interp in _rel_interpretations(m, arity)
            )
        case S.Not(arg):
            return not eval_sol(arg, m, v, sig, renv)
        case S.And(l, r):
            return eval_sol(l, m, v, sig, renv) and eval_sol(r, m, v, sig, renv)
        case S.Or(l, r):
            return eval_sol(l, m, v, sig, renv) or eval_sol(r, m, v, sig, renv)
        case S.Implies(l, r):
            return (not eval_sol(l, m, v, sig, renv)) or eval_sol(r, m, v, sig, renv)
        case S.ExistsGeq(k, x, body):
            hits = 0
            for d in m.domain:
                if eval_sol(body, m, {**v, x: d}, sig, renv):
                    hits += 1
                    if hits >= k:
                        return True
            return hits >= k
        case S.ExistsEq(k, x, body):
            hits = sum(1 for d in m.domain if eval_sol(body, m, {**v, x: d}, sig, renv))
            return hits == k
        case S.ExistsLeq(k, x, body):
            hits = sum(1 for d in m.domain if eval_sol(body, m, {**v, x: d}, sig, renv))
            return hits <= k
        case S.Forall(x, body):
            return all(eval_sol(body, m, {**v, x: d}, sig, renv) for d in m.domain)
        case _:
            return eval_fo(f, m, v, sig, renv)
