"""Precedence-aware printers for the role and first-order dialects.

Binding strength, loosest to tightest: ``=>``, record arrows, ``|``, ``*``,
``&``, prefix operators, atoms.  A binary node's child is printed bare only
when it is an atom, a prefix application, or the same operator on its
associative side; any other operator child is parenthesized.  Quantifiers
(and record arrows) take their body greedily, so they are parenthesized
whenever they appear under an operator.
"""

from __future__ import annotations

from . import syntax as S

_LEFT = "left"
_RIGHT = "right"

_BIN_OPS = {
    S.Implies: ("=>", _RIGHT),
    S.Or: ("|", _LEFT),
    S.Spatial: ("*", _LEFT),
    S.And: ("&", _LEFT),
}


def dialect_of(f: S.Formula) -> str:
    """Guess the dialect from the leaves; pure boolean trees print as role."""

    for g in S.walk(f):
        if isinstance(
            g,
            (S.PredU, S.PredB, S.Eq, S.ExistsGeq, S.ExistsEq, S.ExistsLeq,
             S.Forall, S.Lfp, S.RelApp, S.ExistsRel, S.ForallRel),
        ):
            return "fo"
    return "role"


def print_formula(f: S.Formula, dialect: str = "role") -> str:
    if dialect == "role":
        return _role(f)
    if dialect == "fo":
        return _fo(f)
    raise S.RoleLogicError(f"unknown dialect {dialect!r}")


# -- role dialect -----------------------------------------------------------


def _is_role_atom(f: S.Formula) -> bool:
    return isinstance(
        f,
        (S.UnaryAtom, S.BinaryAtom, S.Id, S.TrueFormula, S.FalseFormula,
         S.Emp, S.Edges, S.FieldComplement, S.Acyclic, S.Box),
    )


def _role_operand(f: S.Formula) -> str:
    """Operand of a prefix operator: atoms stay bare, the rest get parens."""

    if _is_role_atom(f):
        return _role(f)
    return f"({_role(f)})"


def _role_child(parent, side: str, f: S.Formula) -> str:
    if type(f) is type(parent):
        _, assoc = _BIN_OPS[type(parent)]
        if assoc == side:
            return _role(f)
        return f"({_role(f)})"
    if type(f) in _BIN_OPS or isinstance(f, (S.Field, S.Multifield, S.Slot, S.Multislot)):
        return f"({_role(f)})"
    return _role(f)


def _arrow(base: str, b: S.CardBound) -> str:
    if b.op == "=" and b.count == 1:
        return base
    return f"{base}({b.op}{b.count})"


def _role(f: S.Formula) -> str:
    match f:
        case S.UnaryAtom(name) | S.BinaryAtom(name):
            return name
        case S.Id():
            return "id"
        case S.TrueFormula():
            return "true"
        case S.FalseFormula():
            return "false"
        case S.Emp():
            return "emp"
        case S.Edges():
            return "edges"
        case S.FieldComplement(field):
            return f"fc({field})"
        case S.Acyclic(fields):
            return f"acyclic({', '.join(fields)})"
        case S.Box(arg):
            return f"[{_role(arg)}]"
        case S.Not(arg):
            return f"!{_role_operand(arg)}"
        case S.Inv(arg):
            return f"inv {_role_operand(arg)}"
        case S.Shift(arg):
            return f"sh {_role_operand(arg)}"
        case S.CardGeq(k, arg):
            return f"card>={k} {_role_operand(arg)}"
        case S.CardLeq(k, arg):
            return f"card<={k} {_role_operand(arg)}"
        case S.CardEq(k, arg):
            return f"card={k} {_role_operand(arg)}"
        case S.Field(field, bound, arg):
            return f"{field} {_arrow('->', bound)} {_role_child(f, '', arg)}"
        case S.Multifield(field, arg):
            return f"{field} ->* {_role_child(f, '', arg)}"
        case S.Slot(arg, bound, field):
            return f"{_role_child(f, '', arg)} {_arrow('<-', bound)} {field}"
        case S.Multislot(arg, field):
            return f"{_role_child(f, '', arg)} <-* {field}"
        case S.And() | S.Or() | S.Implies() | S.Spatial():
            op, _ = _BIN_OPS[type(f)]
            return f"{_role_child(f, _LEFT, f.lhs)} {op} {_role_child(f, _RIGHT, f.rhs)}"
        case _:
            raise S.RoleLogicError(f"not a role formula: {type(f).__name__}")


# -- first-order dialect ----------------------------------------------------


def _is_fo_atom(f: S.Formula) -> bool:
    return isinstance(
        f,
        (S.PredU, S.PredB, S.RelApp, S.TrueFormula, S.FalseFormula,
         S.Emp, S.Acyclic, S.Lfp),
    )


_QUANT = (S.ExistsGeq, S.ExistsEq, S.ExistsLeq, S.Forall, S.ExistsRel, S.ForallRel)


def _fo_operand(f: S.Formula) -> str:
    if _is_fo_atom(f):
        return _fo(f)
    return f"({_fo(f)})"


def _fo_child(parent, side: str, f: S.Formula) -> str:
    if type(f) is type(parent):
        _, assoc = _BIN_OPS[type(parent)]
        if assoc == side:
            return _fo(f)
        return f"({_fo(f)})"
    if type(f) in _BIN_OPS or isinstance(f, _QUANT) or isinstance(f, S.Eq):
        return f"({_fo(f)})"
    return _fo(f)


def _fo(f: S.Formula) -> str:
    match f:
        case S.PredU(name, v):
            return f"{name}({v})"
        case S.PredB(name, v1, v2):
            return f"{name}({v1}, {v2})"
        case S.RelApp(name, args):
            return f"{name}({', '.join(args)})"
        case S.Eq(v1, v2):
            return f"{v1} = {v2}"
        case S.TrueFormula():
            return "true"
        case S.FalseFormula():
            return "false"
        case S.Emp():
            return "emp"
        case S.Acyclic(fields):
            return f"acyclic({', '.join(fields)})"
        case S.Not(arg):
            return f"!{_fo_operand(arg)}"
        case S.ExistsGeq(k, v, body):
            return f"exists>={k} {v}. {_fo(body)}"
        case S.ExistsEq(k, v, body):
            return f"exists={k} {v}. {_fo(body)}"
        case S.ExistsLeq(k, v, body):
            return f"exists<={k} {v}. {_fo(body)}"
        case S.Forall(v, body):
            return f"forall {v}. {_fo(body)}"
        case S.ExistsRel(rel, arity, body):
            return f"exists2 {rel}/{arity}. {_fo(body)}"
        case S.ForallRel(rel, arity, body):
            return f"forall2 {rel}/{arity}. {_fo(body)}"
        case S.Lfp(rel, formals, body, actuals):
            return (
                f"(lfp {rel} ({', '.join(formals)}) . {_fo(body)})"
                f"({', '.join(actuals)})"
            )
        case S.And() | S.Or() | S.Implies() | S.Spatial():
            op, _ = _BIN_OPS[type(f)]
            return f"{_fo_child(f, _LEFT, f.lhs)} {op} {_fo_child(f, _RIGHT, f.rhs)}"
        case _:
            raise S.RoleLogicError(f"not a first-order formula: {type(f).__name__}")
