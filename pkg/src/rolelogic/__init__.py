"""Role logic and first-order logic with counting over finite models,
with counting-star normal forms and spatial-conjunction elimination."""

from .syntax import (
    Signature, Formula, RoleLogicError,
    TRUE, FALSE, TrueFormula, FalseFormula, Not, And, Or, Implies, Spatial,
    Acyclic, UnaryAtom, BinaryAtom, Id, Emp, Inv, Shift,
    CardGeq, CardLeq, CardEq, Box, CardBound,
    FieldComplement, Edges, Field, Multifield, Slot, Multislot,
    PredU, PredB, Eq, ExistsGeq, ExistsEq, ExistsLeq, Forall,
    Lfp, RelApp, ExistsRel, ForallRel,
    free_vars, is_core, is_star_free_eligible, metrics, rl2_to_fo,
)
from .printer import print_formula, dialect_of
from .parser import (
    ParseError, parse_formula, parse_formula_file, parse_model_file,
    parse_role_file, RoleDecl,
)
from .semantics import (
    Model, Pair, GuardExceeded, splits, eval_role, eval_fo, eval_sol,
)
from .records import (
    desugar, expand_sugar, reduce_derived, translate_role, translate_simultaneous,
)
from .normalform import (
    CatCube, Gccat, Extension, CountConstraint, GenStar,
    to_cat, cat_to_eqcat, extensions_of, depth_one_nf, star_eval,
    star_to_fo, make_star,
)
from .spatial import (
    SpatialAtom, SpatialStar, MARK1, MARK2, MARK12,
    star_to_spatial, ispand, kispand, combine_stars,
    eliminate_spatial, eliminate_to_stars,
)
from .soltrans import ExtendedSignature, to_sol, btr_reduce
from .oracle import (
    Verdict, enumerate_models, bounded_equiv, bounded_sat, random_formula,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
