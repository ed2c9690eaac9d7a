"""HTTP front end: one endpoint per toolkit operation.

All state lives in the request; the service is a stateless wrapper over
the library, suitable for multiple clients.  Run it with
``uvicorn rolelogic.service:app``.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import records, soltrans, spatial
from . import syntax as S
from .normalform import depth_one_nf, star_to_fo
from .oracle import Verdict, bounded_equiv, bounded_sat
from .parser import parse_formula_file, parse_model_file, parse_role_file
from .printer import dialect_of, print_formula
from .semantics import Pair, eval_fo, eval_role

app = FastAPI(title="rolelogic", description="role logic and counting-star toolkit")


class SignatureSpec(BaseModel):
    unaries: list[str] = []
    binaries: list[str] = []
    nonsplittable: list[str] = []

    def build(self) -> S.Signature:
        return S.Signature(tuple(self.unaries), tuple(self.binaries),
                           frozenset(self.nonsplittable))


class FormulaRequest(BaseModel):
    formula: str = Field(description="formula file text (sig header optional)")
    dialect: str = "role"
    sig: SignatureSpec | None = None


class FormulaResponse(BaseModel):
    formula: str
    dialect: str


class EvalRequest(FormulaRequest):
    model_text: str = Field(description="model file text")
    e1: str | None = None
    e2: str | None = None
    bindings: dict[str, str] = {}


class EvalResponse(BaseModel):
    value: bool


class StarsResponse(BaseModel):
    stars: list[str]


class EliminateResponse(BaseModel):
    formula: str
    stars: list[str] | None = None


class EquivRequest(FormulaRequest):
    f2: str
    max_domain: int = 3


class VerdictResponse(BaseModel):
    kind: str
    size: int | None = None
    model: str | None = None
    valuation: dict[str, str] | None = None

    @staticmethod
    def of(v: Verdict) -> "VerdictResponse":
        return VerdictResponse(
            kind=v.kind, size=v.size,
            model=v.model.to_text() if v.model is not None else None,
            valuation=v.valuation,
        )


class SatRequest(FormulaRequest):
    max_domain: int = 3


class RolesRequest(BaseModel):
    roles: str = Field(description="role declaration file text")
    sig: SignatureSpec | None = None


class RoleTranslation(BaseModel):
    name: str
    formula: str


class RolesResponse(BaseModel):
    roles: list[RoleTranslation]


def _parse(req: FormulaRequest) -> tuple[S.Signature, S.Formula]:
    default = req.sig.build() if req.sig is not None else None
    ff = parse_formula_file(req.formula, default, req.dialect)
    return ff.sig, ff.formula


def _guard(fn):
    try:
        return fn()
    except S.RoleLogicError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok"}


@app.post("/parse", response_model=FormulaResponse)
def parse(req: FormulaRequest) -> FormulaResponse:
    def run():
        _, formula = _parse(req)
        return FormulaResponse(formula=print_formula(formula, req.dialect),
                               dialect=req.dialect)
    return _guard(run)


@app.post("/desugar", response_model=FormulaResponse)
def desugar(req: FormulaRequest) -> FormulaResponse:
    def run():
        sig, formula = _parse(req)
        return FormulaResponse(formula=print_formula(records.desugar(formula, sig), "role"),
                               dialect="role")
    return _guard(run)


@app.post("/eval", response_model=EvalResponse)
def eval_endpoint(req: EvalRequest) -> EvalResponse:
    def run():
        default = req.sig.build() if req.sig is not None else None
        _, inferred = parse_model_file(req.model_text, default)
        ff = parse_formula_file(req.formula, default or inferred, req.dialect)
        model, _ = parse_model_file(req.model_text, ff.sig)
        if req.dialect == "role":
            if req.e1 is None:
                raise S.RoleLogicError("role evaluation needs e1")
            pair = Pair(req.e1, req.e2 or req.e1)
            value = eval_role(records.desugar(ff.formula, ff.sig), model, pair, ff.sig)
        else:
            value = eval_fo(ff.formula, model, req.bindings, ff.sig)
        return EvalResponse(value=value)
    return _guard(run)


@app.post("/normalize", response_model=StarsResponse)
def normalize(req: FormulaRequest) -> StarsResponse:
    def run():
        sig, formula = _parse(req)
        fo = spatial.to_first_order(formula, sig)
        return StarsResponse(stars=[
            print_formula(star_to_fo(s), "fo") for s in depth_one_nf(fo, sig)
        ])
    return _guard(run)


@app.post("/eliminate", response_model=EliminateResponse)
def eliminate(req: FormulaRequest, show_stars: bool = False) -> EliminateResponse:
    def run():
        sig, formula = _parse(req)
        result = spatial.eliminate_spatial(formula, sig)
        stars = None
        if show_stars:
            stars = [print_formula(star_to_fo(s), "fo")
                     for s in spatial.eliminate_to_stars(formula, sig)]
        return EliminateResponse(formula=print_formula(result, "fo"), stars=stars)
    return _guard(run)


@app.post("/equiv", response_model=VerdictResponse)
def equiv(req: EquivRequest) -> VerdictResponse:
    def run():
        sig, f1 = _parse(req)
        ff2 = parse_formula_file(req.f2, sig, req.dialect)
        a = records.desugar(f1, sig) if dialect_of(f1) == "role" else f1
        b = ff2.formula
        b = records.desugar(b, sig) if dialect_of(b) == "role" else b
        return VerdictResponse.of(bounded_equiv(a, b, req.max_domain, sig))
    return _guard(run)


@app.post("/sat", response_model=VerdictResponse)
def sat(req: SatRequest) -> VerdictResponse:
    def run():
        sig, formula = _parse(req)
        f = records.desugar(formula, sig) if dialect_of(formula) == "role" else formula
        return VerdictResponse.of(bounded_sat(f, req.max_domain, sig))
    return _guard(run)


@app.post("/roles/translate", response_model=RolesResponse)
def roles_translate(req: RolesRequest) -> RolesResponse:
    def run():
        default = req.sig.build() if req.sig is not None else None
        decls, sig = parse_role_file(req.roles, default)
        out = []
        for d in decls:
            translated = (records.translate_simultaneous(d, sig) if d.simultaneous
                          else records.translate_role(d, sig))
            out.append(RoleTranslation(name=d.name,
                                       formula=print_formula(translated, "role")))
        return RolesResponse(roles=out)
    return _guard(run)


@app.post("/to-sol", response_model=FormulaResponse)
def to_sol_endpoint(req: FormulaRequest) -> FormulaResponse:
    def run():
        sig, formula = _parse(req)
        f = formula
        if dialect_of(f) == "role":
            f = S.rl2_to_fo(records.desugar(f, sig), "x", "y", sig)
        return FormulaResponse(formula=print_formula(soltrans.to_sol(f, sig), "fo"),
                               dialect="fo")
    return _guard(run)
