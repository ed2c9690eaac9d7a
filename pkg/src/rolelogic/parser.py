"""Tokenizer and recursive-descent parsers.

Covers the role and first-order formula dialects, formula files (optional
``sig { ... }`` header, ``let`` bindings, one ``formula`` statement), model
files, and role declaration files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import syntax as S
from .semantics import Model

__all__ = [
    "ParseError",
    "parse_formula",
    "parse_formula_file",
    "parse_model_file",
    "parse_role_file",
    "FormulaFile",
    "RoleDecl",
]


class ParseError(S.RoleLogicError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'nat', 'sym', 'eof'
    text: str
    line: int
    col: int


_SYMBOLS = [
    "->*", "->", "<-*", "<-", ">=", "<=", "=>", "=", "|", "*", "&", "!",
    "[", "]", "(", ")", "{", "}", ",", ";", ".", ":", "/",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+|//[^\n]*)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<nat>\d+)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + r")"
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        chunk = m.group(0)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Tokens:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise self.error(f"expected {text!r}, found {t.text!r}")
        return self.next()

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind != "eof":
            self.next()
            return True
        return False

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t.kind != "ident":
            raise self.error(f"expected {what}, found {t.text!r}")
        return self.next().text

    def nat(self) -> int:
        t = self.peek()
        if t.kind != "nat":
            raise self.error(f"expected a number, found {t.text!r}")
        return int(self.next().text)

    def at_end(self) -> bool:
        return self.peek().kind == "eof"


# ---------------------------------------------------------------------------
# Formulas


class _FormulaParser:
    def __init__(self, ts: _Tokens, sig: S.Signature, dialect: str,
                 bindings: dict[str, S.Formula] | None = None):
        self.ts = ts
        self.sig = sig
        self.dialect = dialect
        self.bindings = bindings or {}
        self.rel_scope: list[str] = []

    def parse(self) -> S.Formula:
        return self.implies()

    def implies(self) -> S.Formula:
        lhs = self.arrow() if self.dialect == "role" else self.or_()
        if self.ts.accept("=>"):
            return S.Implies(lhs, self.implies())
        return lhs

    # Record arrows sit between => and |; the role dialect only.
    def arrow(self) -> S.Formula:
        lhs = self.or_()
        t = self.ts.peek()
        if t.text in ("->", "->*") and t.kind == "sym":
            if not isinstance(lhs, S.BinaryAtom):
                raise self.ts.error("record arrow needs a field name on the left")
            op = self.ts.next().text
            if op == "->*":
                return S.Multifield(lhs.name, self.or_())
            bound = self._arrow_bound()
            return S.Field(lhs.name, bound, self.or_())
        if t.text in ("<-", "<-*") and t.kind == "sym":
            op = self.ts.next().text
            if op == "<-*":
                field = self.ts.ident("field name")
                self._check_binary(field)
                return S.Multislot(lhs, field)
            bound = self._arrow_bound()
            field = self.ts.ident("field name")
            self._check_binary(field)
            return S.Slot(lhs, bound, field)
        return lhs

    def _arrow_bound(self) -> S.CardBound:
        # "->(=2)" and friends; a plain arrow means exactly one.
        if self.ts.peek().text == "(" and self.ts.peek(1).text in ("=", "<=", ">="):
            self.ts.expect("(")
            op = self.ts.next().text
            count = self.ts.nat()
            self.ts.expect(")")
            return S.CardBound(op, count)
        return S.CardBound("=", 1)

    def or_(self) -> S.Formula:
        lhs = self.spatial()
        while self.ts.accept("|"):
            lhs = S.Or(lhs, self.spatial())
        return lhs

    def spatial(self) -> S.Formula:
        lhs = self.and_()
        while self.ts.accept("*"):
            lhs = S.Spatial(lhs, self.and_())
        return lhs

    def and_(self) -> S.Formula:
        lhs = self.unary()
        while self.ts.accept("&"):
            lhs = S.And(lhs, self.unary())
        return lhs

    def unary(self) -> S.Formula:
        t = self.ts.peek()
        if t.text == "!":
            self.ts.next()
            return S.Not(self.unary())
        if self.dialect == "role":
            if t.text == "inv":
                self.ts.next()
                return S.Inv(self.unary())
            if t.text == "sh":
                self.ts.next()
                return S.Shift(self.unary())
            if t.text == "card":
                self.ts.next()
                op = self.ts.next()
                if op.text not in (">=", "<=", "="):
                    raise ParseError("expected >=, <= or = after card", op.line, op.col)
                count = self.ts.nat()
                arg = self.unary()
                if op.text == ">=":
                    return S.CardGeq(count, arg)
                if op.text == "<=":
                    return S.CardLeq(count, arg)
                return S.CardEq(count, arg)
        else:
            if t.text in ("exists", "forall", "exists2", "forall2"):
                return self.quantifier()
        return self.atom()

    def quantifier(self) -> S.Formula:
        t = self.ts.next()
        if t.text == "forall":
            var = self.ts.ident("variable")
            self.ts.expect(".")
            return S.Forall(var, self.implies())
        if t.text == "exists":
            op = self.ts.next()
            if op.text not in (">=", "<=", "="):
                raise ParseError("expected >=, <= or = after exists", op.line, op.col)
            count = self.ts.nat()
            var = self.ts.ident("variable")
            self.ts.expect(".")
            body = self.implies()
            if op.text == ">=":
                return S.ExistsGeq(count, var, body)
            if op.text == "<=":
                return S.ExistsLeq(count, var, body)
            return S.ExistsEq(count, var, body)
        # second-order quantifiers
        rel = self.ts.ident("relation variable")
        self.ts.expect("/")
        arity = self.ts.nat()
        self.ts.expect(".")
        self.rel_scope.append(rel)
        try:
            body = self.implies()
        finally:
            self.rel_scope.pop()
        if t.text == "exists2":
            return S.ExistsRel(rel, arity, body)
        return S.ForallRel(rel, arity, body)

    def atom(self) -> S.Formula:
        t = self.ts.peek()
        if t.text == "(":
            if self.ts.peek(1).text == "lfp" and self.dialect == "fo":
                return self.lfp()
            self.ts.next()
            inner = self.implies()
            self.ts.expect(")")
            return inner
        if t.text == "[" and self.dialect == "role":
            self.ts.next()
            inner = self.implies()
            self.ts.expect("]")
            return S.Box(inner)
        if t.kind != "ident":
            raise self.ts.error(f"expected a formula, found {t.text!r}")
        word = self.ts.next().text
        if word == "true":
            return S.TRUE
        if word == "false":
            return S.FALSE
        if word == "acyclic":
            self.ts.expect("(")
            names = [self.ts.ident("field name")]
            while self.ts.accept(","):
                names.append(self.ts.ident("field name"))
            self.ts.expect(")")
            for n in names:
                self._check_binary(n)
            return S.Acyclic(tuple(names))
        if self.dialect == "role":
            return self.role_atom(word)
        return self.fo_atom(word)

    def role_atom(self, word: str) -> S.Formula:
        if word == "id":
            return S.Id()
        if word == "emp":
            return S.Emp()
        if word == "edges":
            return S.Edges()
        if word == "fc":
            self.ts.expect("(")
            name = self.ts.ident("field name")
            self.ts.expect(")")
            self._check_binary(name)
            return S.FieldComplement(name)
        if word in self.bindings:
            return self.bindings[word]
        if self.sig.is_unary(word):
            return S.UnaryAtom(word)
        if self.sig.is_binary(word):
            return S.BinaryAtom(word)
        raise self.ts.error(f"undeclared predicate {word!r}")

    def fo_atom(self, word: str) -> S.Formula:
        if self.ts.peek().text == "(":
            self.ts.next()
            args = [self.ts.ident("variable")]
            while self.ts.accept(","):
                args.append(self.ts.ident("variable"))
            self.ts.expect(")")
            if word in self.rel_scope:
                return S.RelApp(word, tuple(args))
            if self.sig.is_unary(word):
                if len(args) != 1:
                    raise self.ts.error(f"{word!r} is unary")
                return S.PredU(word, args[0])
            if self.sig.is_binary(word):
                if len(args) != 2:
                    raise self.ts.error(f"{word!r} is binary")
                return S.PredB(word, args[0], args[1])
            raise self.ts.error(f"undeclared predicate {word!r}")
        if word == "emp":
            return S.Emp()
        if word in self.bindings:
            return self.bindings[word]
        if self.ts.accept("="):
            other = self.ts.ident("variable")
            return S.Eq(word, other)
        raise self.ts.error(f"expected '(' or '=' after {word!r}")

    def lfp(self) -> S.Formula:
        self.ts.expect("(")
        self.ts.expect("lfp")
        rel = self.ts.ident("relation variable")
        self.ts.expect("(")
        formals = [self.ts.ident("variable")]
        while self.ts.accept(","):
            formals.append(self.ts.ident("variable"))
        self.ts.expect(")")
        self.ts.expect(".")
        self.rel_scope.append(rel)
        try:
            body = self.implies()
        finally:
            self.rel_scope.pop()
        self.ts.expect(")")
        self.ts.expect("(")
        actuals = [self.ts.ident("variable")]
        while self.ts.accept(","):
            actuals.append(self.ts.ident("variable"))
        self.ts.expect(")")
        return S.Lfp(rel, tuple(formals), body, tuple(actuals))

    def _check_binary(self, name: str) -> None:
        if not self.sig.is_binary(name):
            raise self.ts.error(f"undeclared binary predicate {name!r}")


def parse_formula(text: str, sig: S.Signature, dialect: str = "role",
                  bindings: dict[str, S.Formula] | None = None) -> S.Formula:
    if dialect not in ("role", "fo"):
        raise S.RoleLogicError(f"unknown dialect {dialect!r}")
    ts = _Tokens(text)
    parser = _FormulaParser(ts, sig, dialect, bindings)
    formula = parser.parse()
    if not ts.at_end():
        raise ts.error(f"trailing input {ts.peek().text!r}")
    return formula


# ---------------------------------------------------------------------------
# Formula files


@dataclass(frozen=True)
class FormulaFile:
    sig: S.Signature
    bindings: dict[str, S.Formula]
    formula: S.Formula


def _parse_sig_block(ts: _Tokens) -> S.Signature:
    ts.expect("sig")
    ts.expect("{")
    unaries: list[str] = []
    binaries: list[str] = []
    nonsplit: list[str] = []
    while not ts.accept("}"):
        kind = ts.ident("'unary', 'binary' or 'nonsplit'")
        if kind not in ("unary", "binary", "nonsplit"):
            raise ts.error(f"unknown sig clause {kind!r}")
        names = [ts.ident("predicate name")]
        while ts.accept(","):
            names.append(ts.ident("predicate name"))
        ts.expect(";")
        {"unary": unaries, "binary": binaries, "nonsplit": nonsplit}[kind].extend(names)
    return S.Signature(tuple(unaries), tuple(binaries), frozenset(nonsplit))


def parse_formula_file(text: str, default_sig: S.Signature | None = None,
                       dialect: str = "role") -> FormulaFile:
    ts = _Tokens(text)
    if ts.peek().text == "sig":
        sig = _parse_sig_block(ts)
    elif default_sig is not None:
        sig = default_sig
    else:
        raise ts.error("formula file needs a sig header (none supplied elsewhere)")
    bindings: dict[str, S.Formula] = {}
    formula: S.Formula | None = None
    while not ts.at_end():
        if ts.accept("let"):
            name = ts.ident("binding name")
            if sig.is_declared(name) or name in RESERVED_FILE_NAMES:
                raise ts.error(f"binding name {name!r} clashes with a declared name")
            ts.expect("=")
            parser = _FormulaParser(ts, sig, dialect, bindings)
            bindings[name] = parser.implies()
            ts.expect(";")
        elif ts.accept("formula"):
            parser = _FormulaParser(ts, sig, dialect, bindings)
            formula = parser.implies()
            ts.expect(";")
        else:
            raise ts.error("expected 'let' or 'formula'")
    if formula is None:
        raise ts.error("formula file contains no 'formula' statement")
    return FormulaFile(sig, bindings, formula)


RESERVED_FILE_NAMES = S.RESERVED_NAMES


# ---------------------------------------------------------------------------
# Model files


def parse_model_file(text: str, sig: S.Signature | None = None) -> tuple[Model, S.Signature]:
    """Parse a model file; infer a signature from the shapes if none given."""

    ts = _Tokens(text)
    ts.expect("model")
    ts.expect("{")
    ts.expect("domain")
    domain = [ts.ident("element name")]
    while ts.accept(","):
        domain.append(ts.ident("element name"))
    ts.expect(";")
    unary: dict[str, frozenset[str]] = {}
    binary: dict[str, frozenset[tuple[str, str]]] = {}
    while not ts.accept("}"):
        name = ts.ident("predicate name")
        ts.expect("=")
        ts.expect("{")
        elems: set[str] = set()
        pairs: set[tuple[str, str]] = set()
        while not ts.accept("}"):
            if ts.accept("("):
                a = ts.ident("element name")
                ts.expect(",")
                b = ts.ident("element name")
                ts.expect(")")
                pairs.add((a, b))
            else:
                elems.add(ts.ident("element name"))
            if ts.peek().text != "}":
                ts.expect(",")
        ts.expect(";")
        if elems and pairs:
            raise ts.error(f"predicate {name!r} mixes elements and pairs")
        if pairs or (sig is not None and sig.is_binary(name)):
            binary[name] = frozenset(pairs)
        else:
            unary[name] = frozenset(elems)
    if not ts.at_end():
        raise ts.error("trailing input after model block")
    if sig is None:
        sig = S.Signature(tuple(sorted(unary)), tuple(sorted(binary)))
    model = Model(tuple(domain), unary, binary, sig=sig)
    return model, sig


# ---------------------------------------------------------------------------
# Role declaration files


@dataclass(frozen=True)
class RoleDecl:
    name: str
    header_fields: tuple[str, ...] = ()
    fields: tuple[tuple[str, S.Formula], ...] = ()
    slots: tuple[tuple[S.Formula, str], ...] = ()
    identities: tuple[tuple[str, str], ...] = ()
    acyclic: tuple[str, ...] = ()
    simultaneous: bool = False


def parse_role_file(text: str, default_sig: S.Signature | None = None
                    ) -> tuple[list[RoleDecl], S.Signature]:
    ts = _Tokens(text)
    if ts.peek().text == "sig":
        sig = _parse_sig_block(ts)
    elif default_sig is not None:
        sig = default_sig
    else:
        raise ts.error("role file needs a sig header (none supplied elsewhere)")
    decls: list[RoleDecl] = []
    while not ts.at_end():
        decls.append(_parse_role_decl(ts, sig))
    return decls, sig


def _parse_role_decl(ts: _Tokens, sig: S.Signature) -> RoleDecl:
    simultaneous = ts.accept("simultaneous")
    ts.expect("role")
    name = ts.ident("role name")
    header: list[str] = []
    if ts.accept("["):
        if not simultaneous:
            raise ts.error("header fields are only allowed on simultaneous roles")
        header.append(ts.ident("field name"))
        while ts.accept(","):
            header.append(ts.ident("field name"))
        ts.expect("]")
    ts.expect("{")
    fields: list[tuple[str, S.Formula]] = []
    slots: list[tuple[S.Formula, str]] = []
    identities: list[tuple[str, str]] = []
    acyclic: list[str] = []

    def binary(n: str) -> str:
        if not sig.is_binary(n):
            raise ts.error(f"undeclared binary predicate {n!r}")
        return n

    while not ts.accept("}"):
        clause = ts.ident("role clause")
        if clause == "fields":
            while True:
                f = binary(ts.ident("field name"))
                ts.expect(":")
                parser = _FormulaParser(ts, sig, "role")
                fields.append((f, parser.or_()))
                if not ts.accept(","):
                    break
        elif clause == "slots":
            while True:
                parser = _FormulaParser(ts, sig, "role")
                setf = parser.atom()
                ts.expect(".")
                slots.append((setf, binary(ts.ident("field name"))))
                if not ts.accept(","):
                    break
        elif clause == "identities":
            while True:
                f = binary(ts.ident("field name"))
                ts.expect(".")
                g = binary(ts.ident("field name"))
                identities.append((f, g))
                if not ts.accept(","):
                    break
        elif clause == "acyclic":
            while True:
                acyclic.append(binary(ts.ident("field name")))
                if not ts.accept(","):
                    break
        else:
            raise ts.error(f"unknown role clause {clause!r}")
        ts.expect(";")
    return RoleDecl(name, tuple(header), tuple(fields), tuple(slots),
                    tuple(identities), tuple(acyclic), simultaneous)
