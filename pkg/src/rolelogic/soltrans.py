"""Second-order encodings of spatial conjunction and least fixpoints.

``to_sol`` replaces each spatial conjunction with existentially quantified
split copies of the splittable predicates, and each least fixpoint with a
universal quantification over its fixpoints.  ``btr_reduce`` does the
split-copy construction without the quantifier: for formulas built from
first-order pieces with only disjunction and spatial conjunction, the
result is a first-order formula over an extended vocabulary that is
satisfiable on a domain exactly when the input is.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from . import syntax as S

__all__ = ["ExtendedSignature", "to_sol", "btr_reduce"]


@dataclass(frozen=True)
class ExtendedSignature:
    """Base signature plus the split copies of the splittable predicates.

    ``primed``/``doubled`` name the copies of the outermost split; nested
    splits contribute further copies, all listed in the extras.
    """

    base: S.Signature
    primed: tuple[tuple[str, str], ...]
    doubled: tuple[tuple[str, str], ...]
    extra_unaries: tuple[str, ...] = ()
    extra_binaries: tuple[str, ...] = ()

    def primed_map(self) -> dict[str, str]:
        return dict(self.primed)

    def doubled_map(self) -> dict[str, str]:
        return dict(self.doubled)

    @property
    def new_names(self) -> tuple[str, ...]:
        return self.extra_unaries + self.extra_binaries

    @property
    def signature(self) -> S.Signature:
        return S.Signature(
            self.base.unaries + self.extra_unaries,
            self.base.binaries + self.extra_binaries,
            self.base.nonsplittable,
        )


def _fresh(base: str, suffix: str, used: set[str]) -> str:
    name = f"{base}{suffix}"
    bump = 2
    while name in used:
        name = f"{base}{suffix}{bump}"
        bump += 1
    used.add(name)
    return name


def _split_names(sig: S.Signature, used: set[str]) -> ExtendedSignature:
    primed = []
    doubled = []
    for name in sig.names:
        if sig.is_splittable(name):
            primed.append((name, _fresh(name, "__1", used)))
            doubled.append((name, _fresh(name, "__2", used)))
    return ExtendedSignature(sig, tuple(primed), tuple(doubled))


def _partition_constraints(sig: S.Signature, ext: ExtendedSignature) -> list[S.Formula]:
    one = ext.primed_map()
    two = ext.doubled_map()
    out: list[S.Formula] = []
    for a in sig.unaries:
        if not sig.is_splittable(a):
            continue
        x = "x"
        both = S.Or(S.PredU(one[a], x), S.PredU(two[a], x))
        same = S.And(
            S.Implies(S.PredU(a, x), both),
            S.Implies(both, S.PredU(a, x)),
        )
        apart = S.Not(S.And(S.PredU(one[a], x), S.PredU(two[a], x)))
        out.append(S.Forall(x, S.And(same, apart)))
    for f in sig.binaries:
        if not sig.is_splittable(f):
            continue
        x, y = "x", "y"
        both = S.Or(S.PredB(one[f], x, y), S.PredB(two[f], x, y))
        same = S.And(
            S.Implies(S.PredB(f, x, y), both),
            S.Implies(both, S.PredB(f, x, y)),
        )
        apart = S.Not(S.And(S.PredB(one[f], x, y), S.PredB(two[f], x, y)))
        out.append(S.Forall(x, S.Forall(y, S.And(same, apart))))
    return out


def _used_names(f: S.Formula, sig: S.Signature) -> set[str]:
    used = set(sig.names)
    for g in S.walk(f):
        match g:
            case S.PredU(name, _) | S.PredB(name, _, _) | S.RelApp(name, _):
                used.add(name)
            case S.Lfp(rel, _, _, _):
                used.add(rel)
            case S.ExistsRel(rel, _, _) | S.ForallRel(rel, _, _):
                used.add(rel)
    return used


def _split_body(lhs: S.Formula, rhs: S.Formula, sig: S.Signature,
                ext: ExtendedSignature) -> S.Formula:
    parts = _partition_constraints(sig, ext)
    parts.append(S.subst_preds(lhs, ext.primed_map()))
    parts.append(S.subst_preds(rhs, ext.doubled_map()))
    return reduce(S.And, parts)


def to_sol(f: S.Formula, sig: S.Signature) -> S.Formula:
    """Spatial-free, fixpoint-free second-order form of a formula."""

    used = _used_names(f, sig)

    def go(g: S.Formula) -> S.Formula:
        match g:
            case S.Spatial(l, r):
                ext = _split_names(sig, used)
                body = _split_body(go(l), go(r), sig, ext)
                for name, copy in reversed(ext.primed + ext.doubled):
                    body = S.ExistsRel(copy, 1 if sig.is_unary(name) else 2, body)
                return body
            case S.Lfp(rel, formals, lbody, actuals):
                fixed = S.Forall(
                    formals[0],
                    _forall_rest(formals[1:], _iff(go(lbody), S.RelApp(rel, formals))),
                ) if formals else _iff(go(lbody), S.RelApp(rel, ()))
                return S.ForallRel(
                    rel, len(formals),
                    S.Implies(fixed, S.RelApp(rel, actuals)),
                )
            case S.Not(a):
                return S.Not(go(a))
            case S.And(l, r):
                return S.And(go(l), go(r))
            case S.Or(l, r):
                return S.Or(go(l), go(r))
            case S.Implies(l, r):
                return S.Implies(go(l), go(r))
            case S.ExistsGeq(k, v, body):
                return S.ExistsGeq(k, v, go(body))
            case S.ExistsEq(k, v, body):
                return S.ExistsEq(k, v, go(body))
            case S.ExistsLeq(k, v, body):
                return S.ExistsLeq(k, v, go(body))
            case S.Forall(v, body):
                return S.Forall(v, go(body))
            case S.ExistsRel(rel, arity, body):
                return S.ExistsRel(rel, arity, go(body))
            case S.ForallRel(rel, arity, body):
                return S.ForallRel(rel, arity, go(body))
            case _:
                return g

    return go(f)


def _forall_rest(vars: tuple[str, ...], body: S.Formula) -> S.Formula:
    for v in reversed(vars):
        body = S.Forall(v, body)
    return body


def _iff(a: S.Formula, b: S.Formula) -> S.Formula:
    return S.And(S.Implies(a, b), S.Implies(b, a))


def _is_interesting(f: S.Formula) -> bool:
    match f:
        case S.Spatial(l, r) | S.Or(l, r):
            return _is_interesting(l) and _is_interesting(r)
        case _:
            return not any(
                isinstance(g, (S.Spatial, S.Lfp, S.ExistsRel, S.ForallRel, S.Emp))
                for g in S.walk(f)
            )


def btr_reduce(f: S.Formula, sig: S.Signature) -> tuple[S.Formula, ExtendedSignature]:
    """Satisfiability-preserving first-order reduction.

    The input must be built from first-order formulas using only
    disjunction and spatial conjunction.  Split copies become free
    predicates of the extended signature; satisfiability is preserved
    per domain size.
    """

    if not _is_interesting(f):
        raise S.RoleLogicError(
            "btr_reduce needs a formula built from first-order pieces with | and * only"
        )
    used = _used_names(f, sig)
    introduced_u: list[str] = []
    introduced_b: list[str] = []
    primed: list[tuple[str, str]] = []
    doubled: list[tuple[str, str]] = []

    def go(g: S.Formula) -> S.Formula:
        match g:
            case S.Spatial(l, r):
                ext = _split_names(sig, used)
                if not primed:
                    primed.extend(ext.primed)
                    doubled.extend(ext.doubled)
                for name, copy in ext.primed + ext.doubled:
                    (introduced_u if sig.is_unary(name) else introduced_b).append(copy)
                return _split_body(go(l), go(r), sig, ext)
            case S.Or(l, r):
                return S.Or(go(l), go(r))
            case _:
                return g

    reduced = go(f)
    return reduced, ExtendedSignature(
        sig, tuple(primed), tuple(doubled),
        tuple(introduced_u), tuple(introduced_b),
    )
