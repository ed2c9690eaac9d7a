"""Record sugar and role-constraint translation.

``expand_sugar`` rewrites field complements, edges and record atoms into
plain card formulas; ``reduce_derived`` then turns the derived card forms
and boxes into the core fragment (``card>=`` as the only counting node).
``desugar`` chains both.
"""

from __future__ import annotations

from functools import reduce

from . import syntax as S
from .parser import RoleDecl

__all__ = [
    "expand_sugar", "reduce_derived", "desugar",
    "translate_role", "translate_simultaneous",
]


def _or_all(parts: list[S.Formula]) -> S.Formula:
    if not parts:
        return S.FALSE
    return reduce(S.Or, parts)


def _and_all(parts: list[S.Formula]) -> S.Formula:
    if not parts:
        return S.TRUE
    return reduce(S.And, parts)


def _spatial_all(parts: list[S.Formula]) -> S.Formula:
    if not parts:
        return S.TRUE
    return reduce(S.Spatial, parts)


def _others(field: str, sig: S.Signature) -> list[str]:
    if not sig.binaries:
        raise S.RoleLogicError("field complement needs at least one declared binary")
    return [g for g in sig.binaries if g != field]


def _card(bound: S.CardBound, arg: S.Formula) -> S.Formula:
    if bound.op == "=":
        return S.CardEq(bound.count, arg)
    if bound.op == "<=":
        return S.CardLeq(bound.count, arg)
    return S.CardGeq(bound.count, arg)


def _multifield_body(field: str, arg: S.Formula, sig: S.Signature) -> S.Formula:
    # outgoing edges other than "field into arg" are forbidden
    return _or_all(
        [S.BinaryAtom(g) for g in _others(field, sig)]
        + [S.And(S.BinaryAtom(field), S.Not(arg))]
    )


def _multislot_body(field: str, arg: S.Formula, sig: S.Signature) -> S.Formula:
    return _or_all(
        [S.Inv(S.BinaryAtom(g)) for g in _others(field, sig)]
        + [S.And(S.Inv(S.BinaryAtom(field)), S.Not(arg))]
    )


def expand_sugar(f: S.Formula, sig: S.Signature) -> S.Formula:
    """Remove record atoms, ``fc`` and ``edges``; keeps derived card forms."""

    match f:
        case S.FieldComplement(field):
            return _or_all([S.BinaryAtom(g) for g in _others(field, sig)])
        case S.Edges():
            if not sig.binaries:
                raise S.RoleLogicError("edges needs at least one declared binary")
            return _or_all([S.BinaryAtom(g) for g in sig.binaries])
        case S.Multifield(field, arg):
            return S.CardEq(0, _multifield_body(field, expand_sugar(arg, sig), sig))
        case S.Field(field, bound, arg):
            inner = expand_sugar(arg, sig)
            return S.And(
                _card(bound, S.And(inner, S.BinaryAtom(field))),
                S.CardEq(0, _multifield_body(field, inner, sig)),
            )
        case S.Multislot(arg, field):
            return S.CardEq(0, _multislot_body(field, expand_sugar(arg, sig), sig))
        case S.Slot(arg, bound, field):
            inner = expand_sugar(arg, sig)
            return S.And(
                _card(bound, S.And(inner, S.Inv(S.BinaryAtom(field)))),
                S.CardEq(0, _multislot_body(field, inner, sig)),
            )
        case S.Not(a):
            return S.Not(expand_sugar(a, sig))
        case S.And(l, r):
            return S.And(expand_sugar(l, sig), expand_sugar(r, sig))
        case S.Or(l, r):
            return S.Or(expand_sugar(l, sig), expand_sugar(r, sig))
        case S.Implies(l, r):
            return S.Implies(expand_sugar(l, sig), expand_sugar(r, sig))
        case S.Spatial(l, r):
            return S.Spatial(expand_sugar(l, sig), expand_sugar(r, sig))
        case S.Inv(a):
            return S.Inv(expand_sugar(a, sig))
        case S.Shift(a):
            return S.Shift(expand_sugar(a, sig))
        case S.Box(a):
            return S.Box(expand_sugar(a, sig))
        case S.CardGeq(k, a):
            return S.CardGeq(k, expand_sugar(a, sig))
        case S.CardLeq(k, a):
            return S.CardLeq(k, expand_sugar(a, sig))
        case S.CardEq(k, a):
            return S.CardEq(k, expand_sugar(a, sig))
        case _:
            return f


def reduce_derived(f: S.Formula) -> S.Formula:
    """Rewrite card=/card<=/box into card>= combinations."""

    match f:
        case S.CardEq(k, a):
            inner = reduce_derived(a)
            return S.And(S.CardGeq(k, inner), S.Not(S.CardGeq(k + 1, inner)))
        case S.CardLeq(k, a):
            return S.Not(S.CardGeq(k + 1, reduce_derived(a)))
        case S.Box(a):
            return S.Not(S.CardGeq(1, S.Not(reduce_derived(a))))
        case S.Not(a):
            return S.Not(reduce_derived(a))
        case S.And(l, r):
            return S.And(reduce_derived(l), reduce_derived(r))
        case S.Or(l, r):
            return S.Or(reduce_derived(l), reduce_derived(r))
        case S.Implies(l, r):
            return S.Implies(reduce_derived(l), reduce_derived(r))
        case S.Spatial(l, r):
            return S.Spatial(reduce_derived(l), reduce_derived(r))
        case S.Inv(a):
            return S.Inv(reduce_derived(a))
        case S.Shift(a):
            return S.Shift(reduce_derived(a))
        case S.CardGeq(k, a):
            return S.CardGeq(k, reduce_derived(a))
        case _ if isinstance(f, S.SUGAR_NODES):
            raise S.RoleLogicError("expand_sugar must run before reduce_derived")
        case _:
            return f


def desugar(f: S.Formula, sig: S.Signature) -> S.Formula:
    """Establish the core form: no sugar, card>= as the only counting node."""

    return reduce_derived(expand_sugar(f, sig))


ONE = S.CardBound("=", 1)


def translate_role(d: RoleDecl, sig: S.Signature) -> S.Formula:
    """Closed-record reading of a role declaration."""

    if d.header_fields:
        raise S.RoleLogicError("plain roles take no header fields")
    return _translate(d, sig, simultaneous=False)


def translate_simultaneous(d: RoleDecl, sig: S.Signature) -> S.Formula:
    """Open-record reading: the role claims its own edges, frees the rest."""

    return _translate(d, sig, simultaneous=True)


def _translate(d: RoleDecl, sig: S.Signature, simultaneous: bool) -> S.Formula:
    for f in d.acyclic:
        if not sig.is_binary(f):
            raise S.RoleLogicError(f"undeclared binary predicate {f!r}")
    for f, _ in d.fields:
        if not sig.is_binary(f):
            raise S.RoleLogicError(f"undeclared binary predicate {f!r}")
    for _, f in d.slots:
        if not sig.is_binary(f):
            raise S.RoleLogicError(f"undeclared binary predicate {f!r}")

    parts: list[S.Formula] = []
    if d.fields:
        fields = _spatial_all([S.Field(f, ONE, setf) for f, setf in d.fields])
        if simultaneous:
            fields = S.Spatial(
                fields,
                S.CardEq(0, _or_all([S.BinaryAtom(f) for f, _ in d.fields])),
            )
        parts.append(fields)
    if d.slots:
        slots = _spatial_all([S.Slot(setf, ONE, f) for setf, f in d.slots])
        if simultaneous and d.header_fields:
            slots = S.Spatial(
                slots,
                S.CardEq(0, _or_all([S.Inv(S.BinaryAtom(g)) for g in d.header_fields])),
            )
        parts.append(slots)
    if d.identities:
        parts.append(_and_all(
            [S.Box(S.Implies(S.BinaryAtom(f), S.Inv(S.BinaryAtom(g))))
             for f, g in d.identities]
        ))
    if d.acyclic:
        parts.append(S.Acyclic(d.acyclic))
    return _and_all(parts)
