"""HTTP service: POST /answer (extractive QA) and POST /annotate.

Model selection and port come from environment variables:
RUSS_QA_MODEL (default builtin:overlap-span-scorer) and
RUSS_REFSERVER_PORT (default 8970).
"""

from __future__ import annotations

import os
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

import json

from .annotate import AnnotationRequest, export_annotations
from .qa import BUILTIN_SPEC, QaModel, load_model

DEFAULT_PORT = 8970


class AnswerRequest(BaseModel):
    question: str = Field(min_length=1)
    tokens: list[str]


class AnswerResponse(BaseModel):
    text: str
    start_token: int
    end_token: int
    score: float


class AnnotateItem(BaseModel):
    sentence: str = Field(min_length=1)
    event_type: str = ""
    matched_predicate: str = ""
    gold_answers: dict[str, str] = Field(default_factory=dict)
    id: Optional[str] = None


class AnnotateRequest(BaseModel):
    requests: list[AnnotateItem]


def create_app(model: Optional[QaModel] = None) -> FastAPI:
    qa_model = model if model is not None else load_model()
    app = FastAPI(title="russ reference inference service")

    @app.get("/health")
    def health():
        return {"status": "ok", "model": qa_model.name, "version": qa_model.version}

    @app.post("/answer", response_model=AnswerResponse)
    def answer(request: AnswerRequest):
        if not request.tokens:
            raise HTTPException(status_code=422, detail="tokens must be non-empty")
        for i, token in enumerate(request.tokens):
            if not token or any(ch.isspace() for ch in token):
                raise HTTPException(
                    status_code=422,
                    detail=f"token {i} must be a non-empty whitespace-free string",
                )
        try:
            span = qa_model.best_span(request.question, request.tokens)
        except ValueError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        if not (0 <= span.start <= span.end < len(request.tokens)):
            raise HTTPException(status_code=500, detail="model produced an invalid span")
        return AnswerResponse(
            text=span.text(request.tokens),
            start_token=span.start,
            end_token=span.end,
            score=span.score,
        )

    @app.post("/annotate", response_class=PlainTextResponse)
    def annotate(request: AnnotateRequest):
        records = export_annotations([
            AnnotationRequest(
                sentence=item.sentence,
                event_type=item.event_type,
                matched_predicate=item.matched_predicate,
                gold_answers=item.gold_answers,
                id=item.id,
            )
            for item in request.requests
        ])
        body = "".join(json.dumps(record, ensure_ascii=False) + "\n" for record in records)
        return PlainTextResponse(content=body, media_type="application/x-ndjson")

    return app


app = create_app()


def main() -> None:
    import uvicorn

    port = int(os.environ.get("RUSS_REFSERVER_PORT", DEFAULT_PORT))
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="info")


if __name__ == "__main__":
    main()
