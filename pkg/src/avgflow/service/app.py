"""FastAPI application wrapping the experiment runner and the battery.

Error mapping: config documents that fail validation are rejected with
422 (body validation) or 400 (semantic checks raising ValueError);
numerical divergence surfaces as 409 with ``{"kind": "divergence"}`` so
clients can distinguish it from bad input.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..dynamics import DivergenceError
from ..experiments import catalog, run_experiment, verify_battery
from .schemas import (
    ArtifactBody,
    CatalogResponse,
    HealthResponse,
    PointSummary,
    RunRequest,
    RunResponse,
    VerifyRequest,
    VerifyResponse,
    VerifyRow,
)


def create_app() -> FastAPI:
    app = FastAPI(title="avgflow", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/catalog", response_model=CatalogResponse)
    def get_catalog() -> CatalogResponse:
        return CatalogResponse(**catalog())

    @app.post("/experiments/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            result = run_experiment(req.config, jobs=req.jobs)
        except DivergenceError as exc:
            raise HTTPException(
                status_code=409,
                detail={"kind": "divergence", "message": str(exc)})
        except ValueError as exc:
            raise HTTPException(
                status_code=400, detail={"kind": "parse", "message": str(exc)})
        return RunResponse(
            points=[PointSummary(label=p.label, alpha=p.alpha, suite=p.suite,
                                 passed=p.passed) for p in result.points],
            artifacts=[ArtifactBody(name=n, text=t)
                       for n, t in result.artifacts],
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        try:
            result = verify_battery(req.suites, jobs=req.jobs)
        except DivergenceError as exc:
            raise HTTPException(
                status_code=409,
                detail={"kind": "divergence", "message": str(exc)})
        except ValueError as exc:
            raise HTTPException(
                status_code=400, detail={"kind": "parse", "message": str(exc)})
        return VerifyResponse(
            rows=[VerifyRow(suite=r.suite, label=r.label, passed=r.passed,
                            failed=r.failed, notes=r.notes)
                  for r in result.rows],
            all_passed=result.all_passed,
            table=result.table(),
        )

    return app
