"""FastAPI application for the /v1/score wire protocol.

Request:  {"pairs": [{"premise": str, "hypothesis": str}, ...],
           "mode": "independent" | "joint"}
Response: {"scores": [{"entail_prob": float}, ...]}, aligned with the
request order. Malformed bodies get 400; 503 is returned until a backend is
loaded. A "joint" request served by a backend without joint support falls
back to independent scoring and says so in the X-Joint-Fallback header.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from typing import Callable, Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backends import Backend


class ScorePair(BaseModel):
    premise: str
    hypothesis: str


class ScoreRequest(BaseModel):
    pairs: list[ScorePair]
    mode: Literal["independent", "joint"] = "independent"


def create_app(backend_factory: Callable[[], Backend] | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if backend_factory is not None:
            app.state.backend = backend_factory()
        yield

    app = FastAPI(title="scorer-service", lifespan=lifespan)
    app.state.backend = None

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request"})

    @app.get("/healthz")
    async def healthz():
        backend = getattr(app.state, "backend", None)
        if backend is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "model": backend.name}

    @app.post("/v1/score")
    async def score(request: ScoreRequest):
        backend = getattr(app.state, "backend", None)
        if backend is None:
            return JSONResponse(status_code=503, content={"error": "model loading"})
        probs = backend.score([(p.premise, p.hypothesis) for p in request.pairs])
        headers = {}
        if request.mode == "joint" and not backend.supports_joint:
            headers["X-Joint-Fallback"] = "independent"
        return JSONResponse(
            content={"scores": [{"entail_prob": prob} for prob in probs]},
            headers=headers,
        )

    return app
