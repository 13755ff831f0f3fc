"""HTTP/JSON protocol layer.

Endpoints: ``POST /paraphrase``, ``POST /score``, ``GET /health``. Schema
violations answer 400 and a missing model answers 503, both with an
``{"error": ...}`` body. Request handling runs in a thread pool bounded by
the configured worker count.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

import anyio.to_thread
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .errors import ModelUnavailable


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class QueryItem(_Strict):
    id: str
    text: str


class ParaphraseRequest(_Strict):
    queries: list[QueryItem]
    num_beams: int = Field(ge=1)


class Beam(_Strict):
    text: str
    log_likelihood: float = Field(le=0)


class ParaphraseResult(_Strict):
    id: str
    beams: list[Beam] | None = None
    error: str | None = None


class ParaphraseResponse(_Strict):
    results: list[ParaphraseResult]


class PairItem(_Strict):
    id: str
    query: str
    passage: str


class ScoreRequest(_Strict):
    pairs: list[PairItem]


class ScoreItem(_Strict):
    id: str
    probability: float = Field(ge=0, le=1)


class ScoreResponse(_Strict):
    scores: list[ScoreItem]


def create_app(backend, workers: int = 8) -> FastAPI:
    @asynccontextmanager
    async def bound_workers(app: FastAPI):
        limiter = anyio.to_thread.current_default_thread_limiter()
        limiter.total_tokens = workers
        yield

    app = FastAPI(lifespan=bound_workers)

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ModelUnavailable)
    async def unavailable(request: Request, exc: ModelUnavailable):
        return JSONResponse(status_code=503, content={"error": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/paraphrase", response_model=ParaphraseResponse,
              response_model_exclude_none=True)
    def paraphrase(request: ParaphraseRequest) -> ParaphraseResponse:
        results = backend.paraphrase(request.queries, request.num_beams)
        return ParaphraseResponse(
            results=[ParaphraseResult(**result) for result in results])

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        probabilities = backend.score(request.pairs)
        return ScoreResponse(scores=[
            ScoreItem(id=pair.id, probability=probability)
            for pair, probability in zip(request.pairs, probabilities)])

    return app
