"""Brute-force finite-model oracle.

``bounded_equiv`` and ``bounded_sat`` decide equivalence/satisfiability over
every model up to a domain size and every valuation of the free variables.
The sweep normally runs on support-tracked truth tables, which cover the
full model space exactly without materializing it; formulas the tabulator
cannot handle (fixpoints, relation quantifiers) fall back to streaming
enumeration under the model-count guard.

Operands may be role formulas, first-order formulas, or lists of stars
(read as their disjunction).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from . import syntax as S
from .normalform import GenStar, star_eval
from .printer import dialect_of
from .semantics import GuardExceeded, Model, Pair, eval_fo, eval_role, eval_sol, guard_bits
from . import tabulate as T

__all__ = [
    "Verdict", "enumerate_models", "bounded_equiv", "bounded_sat",
    "random_formula",
]

ROLE_VARS = ("x", "y")


@dataclass(frozen=True)
class Verdict:
    kind: str  # 'equivalent' | 'counterexample' | 'satisfiable' | 'unsat'
    size: int | None = None
    model: Model | None = None
    valuation: dict[str, str] | None = None

    @property
    def equivalent(self) -> bool:
        return self.kind == "equivalent"

    @property
    def satisfiable(self) -> bool:
        return self.kind == "satisfiable"

    def __str__(self):
        if self.kind == "equivalent":
            return f"EQUIVALENT up to domain size {self.size}"
        if self.kind == "unsat":
            return f"UNSAT up to domain size {self.size}"
        head = "SATISFIABLE" if self.kind == "satisfiable" else "COUNTEREXAMPLE"
        binding = ", ".join(f"{k}={v}" for k, v in sorted((self.valuation or {}).items()))
        return f"{head} at {binding}\n{self.model.to_text()}"


def enumerate_models(sig: S.Signature, size: int):
    """Every model over the canonical domain e1..e_size, in mask order."""

    space = T.ModelSpace(sig, size)
    if space.nbits > guard_bits():
        raise GuardExceeded(
            f"enumerating 2^{space.nbits} models exceeds the 2^{guard_bits()} guard"
        )
    for mask in range(1 << space.nbits):
        yield space.model_from_mask(mask)


# ---------------------------------------------------------------------------
# Operand handling


def _kind_of(op) -> str:
    if isinstance(op, (list, tuple)):
        if all(isinstance(s, GenStar) for s in op):
            return "stars"
        raise S.RoleLogicError("list operands must contain stars")
    if not isinstance(op, S.Formula):
        raise S.RoleLogicError(f"cannot check a {type(op).__name__}")
    if any(isinstance(g, (S.ExistsRel, S.ForallRel)) for g in S.walk(op)):
        return "sol"
    return dialect_of(op)


def _vars_of(op, kind: str) -> frozenset[str]:
    if kind == "stars":
        out: frozenset[str] = frozenset()
        for star in op:
            out |= frozenset(star.all_vars)
        return out
    if kind == "role":
        return frozenset(ROLE_VARS)
    return S.free_vars(op)


def _compile(space: T.ModelSpace, op, kind: str, val: dict[str, str]) -> T.Table:
    if kind == "stars":
        return T.compile_stars(space, list(op), val)
    if kind == "role":
        return T.compile_role(space, op, (val["x"], val["y"]))
    if kind == "sol":
        raise T.TabulationUnsupported("second-order formulas are evaluated directly")
    return T.compile_fo(space, op, val)


def _evaluate(op, kind: str, m: Model, val: dict[str, str], sig: S.Signature) -> bool:
    if kind == "stars":
        return any(star_eval(s, m, val, sig) for s in op)
    if kind == "role":
        return eval_role(op, m, Pair(val["x"], val["y"]), sig)
    if kind == "sol":
        return eval_sol(op, m, val, sig)
    return eval_fo(op, m, val, sig)


def _embed_min(table_support: tuple[int, ...], compact_index: int) -> int:
    mask = 0
    for j, bit in enumerate(table_support):
        if compact_index >> j & 1:
            mask |= 1 << bit
    return mask


def _valuations(space: T.ModelSpace, vars: tuple[str, ...]):
    for idx, assignment in enumerate(itertools.product(space.domain, repeat=len(vars))):
        yield idx, dict(zip(vars, assignment))


# ---------------------------------------------------------------------------
# Bounded checks


def bounded_equiv(f, g, max_size: int, sig: S.Signature,
                  force_naive: bool = False) -> Verdict:
    """First (model, valuation) disagreement over sizes 1..max_size, in
    canonical order, or an equivalence verdict."""

    kf, kg = _kind_of(f), _kind_of(g)
    vars = tuple(sorted(_vars_of(f, kf) | _vars_of(g, kg)))
    for size in range(1, max_size + 1):
        space = T.ModelSpace(sig, size)
        use_naive = force_naive
        if not use_naive:
            try:
                hit = _equiv_tabulated(space, f, kf, g, kg, vars)
            except T.TabulationUnsupported:
                use_naive = True
            else:
                if hit is not None:
                    mask, validx = hit
                    valuation = dict(zip(vars, list(
                        itertools.product(space.domain, repeat=len(vars))
                    )[validx]))
                    return Verdict("counterexample", size,
                                   space.model_from_mask(mask), valuation)
        if use_naive:
            hit2 = _sweep_naive(space, vars, sig,
                                lambda m, val: _evaluate(f, kf, m, val, sig)
                                != _evaluate(g, kg, m, val, sig))
            if hit2 is not None:
                model, valuation = hit2
                return Verdict("counterexample", size, model, valuation)
    return Verdict("equivalent", max_size)


def _equiv_tabulated(space, f, kf, g, kg, vars) -> tuple[int, int] | None:
    import numpy as np

    best: tuple[int, int] | None = None
    for validx, val in _valuations(space, vars):
        tf = _compile(space, f, kf, val)
        tg = _compile(space, g, kg, val)
        sup = tuple(sorted(set(tf.support) | set(tg.support)))
        diff = tf.expand(sup) != tg.expand(sup)
        if diff.any():
            mask = _embed_min(sup, int(np.argmax(diff)))
            cand = (mask, validx)
            if best is None or cand < best:
                best = cand
    return best


def _sweep_naive(space, vars, sig, differs) -> tuple[Model, dict] | None:
    if space.nbits > guard_bits():
        raise GuardExceeded(
            f"sweeping 2^{space.nbits} models exceeds the 2^{guard_bits()} guard"
        )
    for mask in range(1 << space.nbits):
        m = space.model_from_mask(mask)
        for _, val in _valuations(space, vars):
            if differs(m, val):
                return m, val
    return None


def bounded_sat(f, max_size: int, sig: S.Signature,
                force_naive: bool = False) -> Verdict:
    """First satisfying (model, valuation) across sizes 1..max_size."""

    kf = _kind_of(f)
    vars = tuple(sorted(_vars_of(f, kf)))
    for size in range(1, max_size + 1):
        space = T.ModelSpace(sig, size)
        use_naive = force_naive
        if not use_naive:
            try:
                hit = _sat_tabulated(space, f, kf, vars)
            except T.TabulationUnsupported:
                use_naive = True
            else:
                if hit is not None:
                    mask, validx = hit
                    valuation = dict(zip(vars, list(
                        itertools.product(space.domain, repeat=len(vars))
                    )[validx]))
                    return Verdict("satisfiable", size,
                                   space.model_from_mask(mask), valuation)
        if use_naive:
            hit2 = _sweep_naive(space, vars, sig,
                                lambda m, val: _evaluate(f, kf, m, val, sig))
            if hit2 is not None:
                model, valuation = hit2
                return Verdict("satisfiable", size, model, valuation)
    return Verdict("unsat", max_size)


def _sat_tabulated(space, f, kf, vars) -> tuple[int, int] | None:
    import numpy as np

    best: tuple[int, int] | None = None
    for validx, val in _valuations(space, vars):
        t = _compile(space, f, kf, val)
        if t.values.any():
            mask = _embed_min(t.support, int(np.argmax(t.values)))
            cand = (mask, validx)
            if best is None or cand < best:
                best = cand
    return best


# ---------------------------------------------------------------------------
# Seeded random formulas


PROFILES = ("role-core", "fo-depth1", "star-free-eligible", "interesting")


def random_formula(sig: S.Signature, depth: int, seed: int, profile: str) -> S.Formula:
    """Deterministic random formula for the given seed and profile."""

    if profile not in PROFILES:
        raise S.RoleLogicError(f"unknown profile {profile!r}; pick from {PROFILES}")
    rng = random.Random(f"{profile}|{depth}|{seed}")
    if profile == "role-core":
        return _rand_role_core(rng, sig, depth)
    if profile == "fo-depth1":
        return _rand_fo_depth1(rng, sig, depth)
    if profile == "star-free-eligible":
        return _rand_star_free(rng, sig, depth)
    return _rand_interesting(rng, sig, depth)


def _role_leaf(rng: random.Random, sig: S.Signature) -> S.Formula:
    choices: list[S.Formula] = [S.Id(), S.TRUE, S.FALSE]
    choices += [S.UnaryAtom(a) for a in sig.unaries] * 3
    choices += [S.BinaryAtom(f) for f in sig.binaries] * 3
    return rng.choice(choices)


def _rand_role_core(rng: random.Random, sig: S.Signature, depth: int) -> S.Formula:
    if depth <= 0:
        return _role_leaf(rng, sig)
    op = rng.choice(["leaf", "not", "and", "or", "implies", "inv", "sh", "card", "card"])
    if op == "leaf":
        return _role_leaf(rng, sig)
    if op == "not":
        return S.Not(_rand_role_core(rng, sig, depth - 1))
    if op == "inv":
        return S.Inv(_rand_role_core(rng, sig, depth - 1))
    if op == "sh":
        return S.Shift(_rand_role_core(rng, sig, depth - 1))
    if op == "card":
        return S.CardGeq(rng.randint(0, 2), _rand_role_core(rng, sig, depth - 1))
    l = _rand_role_core(rng, sig, depth - 1)
    r = _rand_role_core(rng, sig, depth - 1)
    return {"and": S.And, "or": S.Or, "implies": S.Implies}[op](l, r)


def _fo_atom(rng: random.Random, sig: S.Signature, vars: tuple[str, ...]) -> S.Formula:
    kinds = []
    if sig.unaries:
        kinds += ["u"] * 3
    if sig.binaries:
        kinds += ["b"] * 3
    kinds += ["eq"]
    kind = rng.choice(kinds)
    if kind == "u":
        return S.PredU(rng.choice(sig.unaries), rng.choice(vars))
    if kind == "b":
        return S.PredB(rng.choice(sig.binaries), rng.choice(vars), rng.choice(vars))
    return S.Eq(rng.choice(vars), rng.choice(vars))


def _qfree(rng: random.Random, sig: S.Signature, vars: tuple[str, ...], depth: int) -> S.Formula:
    if depth <= 0 or rng.random() < 0.4:
        return _fo_atom(rng, sig, vars)
    op = rng.choice(["not", "and", "or"])
    if op == "not":
        return S.Not(_qfree(rng, sig, vars, depth - 1))
    l = _qfree(rng, sig, vars, depth - 1)
    r = _qfree(rng, sig, vars, depth - 1)
    return (S.And if op == "and" else S.Or)(l, r)


def _count_unit(rng: random.Random, sig: S.Signature, free: tuple[str, ...]) -> S.Formula:
    body = _qfree(rng, sig, free + ("x",), 2)
    k = rng.randint(0, 2)
    kind = rng.choice(["geq", "geq", "eq", "leq", "forall"])
    if kind == "geq":
        return S.ExistsGeq(max(k, 1), "x", body)
    if kind == "eq":
        return S.ExistsEq(k, "x", body)
    if kind == "leq":
        return S.ExistsLeq(k, "x", body)
    return S.Forall("x", body)


def _rand_fo_depth1(rng: random.Random, sig: S.Signature, depth: int,
                    free: tuple[str, ...] = ("x1",)) -> S.Formula:
    if depth <= 0:
        if rng.random() < 0.5:
            return _count_unit(rng, sig, free)
        return _fo_atom(rng, sig, free)
    op = rng.choice(["unit", "not", "and", "or", "implies"])
    if op == "unit":
        return _count_unit(rng, sig, free)
    if op == "not":
        return S.Not(_rand_fo_depth1(rng, sig, depth - 1, free))
    l = _rand_fo_depth1(rng, sig, depth - 1, free)
    r = _rand_fo_depth1(rng, sig, depth - 1, free)
    return {"and": S.And, "or": S.Or, "implies": S.Implies}[op](l, r)


def _card_free(rng: random.Random, sig: S.Signature, depth: int) -> S.Formula:
    if depth <= 0 or rng.random() < 0.4:
        return _role_leaf(rng, sig)
    op = rng.choice(["not", "and", "or", "inv", "sh"])
    if op == "not":
        return S.Not(_card_free(rng, sig, depth - 1))
    if op == "inv":
        return S.Inv(_card_free(rng, sig, depth - 1))
    if op == "sh":
        return S.Shift(_card_free(rng, sig, depth - 1))
    l = _card_free(rng, sig, depth - 1)
    r = _card_free(rng, sig, depth - 1)
    return (S.And if op == "and" else S.Or)(l, r)


def _card_atom(rng: random.Random, sig: S.Signature) -> S.Formula:
    body = _card_free(rng, sig, 1)
    kind = rng.choice(["geq", "eq", "leq", "box"])
    k = rng.randint(0, 2)
    if kind == "geq":
        return S.CardGeq(k, body)
    if kind == "eq":
        return S.CardEq(k, body)
    if kind == "leq":
        return S.CardLeq(k, body)
    return S.Box(body)


def _rand_star_free(rng: random.Random, sig: S.Signature, depth: int) -> S.Formula:
    if depth <= 0:
        return _card_atom(rng, sig) if rng.random() < 0.7 else _role_leaf(rng, sig)
    op = rng.choice(["card", "not", "and", "or"])
    if op == "card":
        return _card_atom(rng, sig)
    if op == "not":
        return S.Not(_rand_star_free(rng, sig, depth - 1))
    l = _rand_star_free(rng, sig, depth - 1)
    r = _rand_star_free(rng, sig, depth - 1)
    return (S.And if op == "and" else S.Or)(l, r)


def _rand_interesting(rng: random.Random, sig: S.Signature, depth: int) -> S.Formula:
    if depth <= 0:
        return _rand_fo_depth1(rng, sig, 1)
    op = rng.choice(["leaf", "or", "spatial", "spatial"])
    if op == "leaf":
        return _rand_fo_depth1(rng, sig, 1)
    l = _rand_interesting(rng, sig, depth - 1)
    r = _rand_interesting(rng, sig, depth - 1)
    return (S.Or if op == "or" else S.Spatial)(l, r)
