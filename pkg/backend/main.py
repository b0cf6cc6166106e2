from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel
from typing import Optional
import uvicorn

from core.battery import dimension_table, verify_all_async, verify_family
from core.catalog import FamilyId, build, family_basis, list_families
from core.config import get_settings
from core.dsl import parse_presentation
from core.koszul import DEFAULT_DUAL_ORDER
from core.reports import DimensionTable
from core.result_store import ResultStore

app = FastAPI(title="operad-forge", version="1.0.0")

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Initialize components
settings = get_settings()
result_store = ResultStore.from_settings(settings)


class DimsRequest(BaseModel):
    family: Optional[str] = None
    k: Optional[int] = None
    presentation: Optional[str] = None  # presentation file text instead of a family
    max_arity: Optional[int] = None
    max_degree: Optional[int] = None
    order: Optional[str] = None


class GroebnerRequest(BaseModel):
    family: Optional[str] = None
    k: Optional[int] = None
    presentation: Optional[str] = None
    max_arity: Optional[int] = None
    max_degree: Optional[int] = None
    order: Optional[str] = None


class VerifyRequest(BaseModel):
    family: Optional[str] = None  # omitted: the whole battery
    k: Optional[int] = None
    max_arity: Optional[int] = None
    max_degree: Optional[int] = None
    quick: bool = True


def _family(request) -> FamilyId:
    return FamilyId(request.family, request.k, request.max_arity, request.max_degree).validate().resolved(settings)


@app.get("/")
async def root():
    return {"message": "operad-forge API"}


@app.get("/health")
async def health_check():
    return {"status": "healthy"}


@app.get("/families")
async def get_families():
    return {"families": list_families()}


@app.post("/dims")
async def dims(request: DimsRequest):
    try:
        if request.presentation:
            p = parse_presentation(request.presentation)
            max_arity = request.max_arity or settings.max_arity_for(p.kind)
            basis = p.basis(max_arity, order=request.order or p.order or DEFAULT_DUAL_ORDER[p.kind], max_degree=request.max_degree)
            graded = basis.hilbert_table(max_weight=basis.max_weight)
            table = DimensionTable(label=p.name or "presentation", graded={n: dict(c) for n, c in graded.items()})
        else:
            table, _ = dimension_table(_family(request), settings, result_store, request.order)
        return {"table": table.model_dump(), "totals": table.totals()}
    except Exception as e:
        raise HTTPException(status_code=400, detail=str(e))


@app.post("/groebner")
async def groebner(request: GroebnerRequest):
    try:
        if request.presentation:
            p = parse_presentation(request.presentation)
            max_arity = request.max_arity or settings.max_arity_for(p.kind)
            basis = p.basis(max_arity, order=request.order or p.order or DEFAULT_DUAL_ORDER[p.kind], max_degree=request.max_degree)
        else:
            fid = _family(request)
            basis = family_basis(fid, build(fid, settings), request.order, settings)
        return {
            "elements": [basis.free.format_element(e) for e in basis.elements()],
            "leads": [basis.free.code(m) for m in basis.lead_monomials()],
            "new_count": basis.new_count,
            "log": basis.completion_log(),
        }
    except Exception as e:
        raise HTTPException(status_code=400, detail=str(e))


@app.post("/verify")
async def verify(request: VerifyRequest):
    try:
        if request.family:
            report = verify_family(_family(request), settings, result_store)
        else:
            report = await verify_all_async(settings, result_store, quick=request.quick)
        return {"ok": report.ok, "report": report.model_dump(mode="json")}
    except Exception as e:
        raise HTTPException(status_code=400, detail=str(e))


if __name__ == "__main__":
    uvicorn.run(app, host="0.0.0.0", port=8000)
