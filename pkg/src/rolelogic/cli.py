"""Command-line front end.

Every subcommand is a thin wrapper over one library call.  Exit codes:
0 for success / true / equivalent / satisfiable, 1 for false /
counterexample / unsat, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import records, spatial, soltrans
from . import syntax as S
from .normalform import depth_one_nf, star_to_fo
from .oracle import bounded_equiv, bounded_sat
from .parser import parse_formula_file, parse_model_file, parse_role_file
from .printer import dialect_of, print_formula
from .semantics import Pair, eval_fo, eval_role

OK, FAIL, ERROR = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="rolelogic",
                                  description="role logic and counting-star toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    def formula_args(p, with_model=False):
        p.add_argument("--formula", required=True, help="formula file")
        p.add_argument("--dialect", choices=["role", "fo"], default="role")
        if with_model:
            p.add_argument("--model", help="model file")

    p = sub.add_parser("parse", help="echo the normalized formula")
    formula_args(p, with_model=True)

    p = sub.add_parser("eval", help="evaluate a formula on a model")
    formula_args(p, with_model=True)
    p.add_argument("--e1", help="first component of the evaluation pair")
    p.add_argument("--e2", help="second component (defaults to --e1)")
    p.add_argument("--bind", help="comma-separated var=element bindings")

    p = sub.add_parser("desugar", help="expand sugar down to the core fragment")
    formula_args(p, with_model=True)

    p = sub.add_parser("normalize", help="depth-one normal form, one star per line")
    formula_args(p, with_model=True)

    p = sub.add_parser("eliminate", help="remove spatial conjunctions")
    formula_args(p, with_model=True)
    p.add_argument("--show-stars", action="store_true",
                   help="also print operand normal forms and combined stars")

    p = sub.add_parser("equiv", help="bounded equivalence of two formulas")
    formula_args(p, with_model=True)
    p.add_argument("--f2", required=True, help="second formula file")
    p.add_argument("--max-domain", type=int, default=3)

    p = sub.add_parser("sat", help="bounded satisfiability")
    formula_args(p, with_model=True)
    p.add_argument("--max-domain", type=int, default=3)

    p = sub.add_parser("roles", help="role constraint translation")
    rsub = p.add_subparsers(dest="roles_command", required=True)
    rp = rsub.add_parser("translate", help="translate role declarations")
    rp.add_argument("file", help="role declaration file")

    p = sub.add_parser("to-sol", help="second-order form (spatial and lfp removed)")
    formula_args(p, with_model=True)
    return top


def _load(args) -> tuple[S.Signature, S.Formula]:
    default_sig = None
    if getattr(args, "model", None):
        _, default_sig = parse_model_file(Path(args.model).read_text())
    ff = parse_formula_file(Path(args.formula).read_text(), default_sig, args.dialect)
    return ff.sig, ff.formula


def _load_model(args, sig: S.Signature):
    model, _ = parse_model_file(Path(args.model).read_text(), sig)
    return model


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except S.RoleLogicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


def _dispatch(args) -> int:
    if args.command == "parse":
        sig, formula = _load(args)
        print(print_formula(formula, args.dialect))
        return OK

    if args.command == "eval":
        sig, formula = _load(args)
        if not args.model:
            print("error: eval needs --model", file=sys.stderr)
            return ERROR
        model = _load_model(args, sig)
        if args.dialect == "role":
            if not args.e1:
                print("error: role evaluation needs --e1", file=sys.stderr)
                return ERROR
            pair = Pair(args.e1, args.e2 or args.e1)
            value = eval_role(records.desugar(formula, sig), model, pair, sig)
        else:
            binding = {}
            if args.bind:
                for item in args.bind.split(","):
                    var, _, el = item.partition("=")
                    binding[var.strip()] = el.strip()
            value = eval_fo(formula, model, binding, sig)
        print("true" if value else "false")
        return OK if value else FAIL

    if args.command == "desugar":
        sig, formula = _load(args)
        print(print_formula(records.desugar(formula, sig), "role"))
        return OK

    if args.command == "normalize":
        sig, formula = _load(args)
        fo = spatial.to_first_order(formula, sig)
        for star in depth_one_nf(fo, sig):
            print(print_formula(star_to_fo(star), "fo"))
        return OK

    if args.command == "eliminate":
        sig, formula = _load(args)
        if args.show_stars:
            fo = spatial.to_first_order(formula, sig)
            if isinstance(fo, S.Spatial):
                vars = tuple(sorted(S.free_vars(fo)))
                for tag, side in (("left", fo.lhs), ("right", fo.rhs)):
                    for star in depth_one_nf(side, sig, vars):
                        print(f"# {tag}: {print_formula(star_to_fo(star), 'fo')}")
            for star in spatial.eliminate_to_stars(formula, sig):
                print(f"# combined: {print_formula(star_to_fo(star), 'fo')}")
        result = spatial.eliminate_spatial(formula, sig)
        print(print_formula(result, "fo"))
        return OK

    if args.command == "equiv":
        sig, formula = _load(args)
        ff2 = parse_formula_file(Path(args.f2).read_text(), sig, args.dialect)
        f1 = records.desugar(formula, sig) if dialect_of(formula) == "role" else formula
        g2 = ff2.formula
        g = records.desugar(g2, sig) if dialect_of(g2) == "role" else g2
        verdict = bounded_equiv(f1, g, args.max_domain, sig)
        print(verdict)
        return OK if verdict.equivalent else FAIL

    if args.command == "sat":
        sig, formula = _load(args)
        f = records.desugar(formula, sig) if dialect_of(formula) == "role" else formula
        verdict = bounded_sat(f, args.max_domain, sig)
        print(verdict)
        return OK if verdict.satisfiable else FAIL

    if args.command == "roles":
        decls, sig = parse_role_file(Path(args.file).read_text())
        for d in decls:
            translated = (records.translate_simultaneous(d, sig) if d.simultaneous
                          else records.translate_role(d, sig))
            print(f"{d.name}: {print_formula(translated, 'role')}")
        return OK

    if args.command == "to-sol":
        sig, formula = _load(args)
        f = formula
        if dialect_of(f) == "role":
            f = S.rl2_to_fo(records.desugar(f, sig), "x", "y", sig)
        print(print_formula(soltrans.to_sol(f, sig), "fo"))
        return OK

    if args.command == "serve":
        print("error: the HTTP service runs via 'uvicorn rolelogic.service:app'",
              file=sys.stderr)
        return ERROR

    raise AssertionError(f"unhandled command {args.command}")


def entrypoint() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
