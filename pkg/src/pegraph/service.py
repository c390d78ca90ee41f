"""Read-only HTTP API over one index, plus static explorer assets.

Contract: GET /communities, GET /papers?q=, POST /query, GET /config.
Query responses are the exact bytes of the canonical JSON export, so the
HTTP and CLI paths are byte-identical for the same query.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, model_validator

from .chains import QuerySpec
from .engine import EngineIndex, config_fingerprint
from .errors import PegraphError, QueryError
from .peg import export_graph, run_query


class QueryRequest(BaseModel):
    """Wire form of QuerySpec; exactly the fields of the query kind."""

    kind: str = Field(pattern="^(keyword|single_paper|two_paper)$")
    keyword: str | None = None
    paper_a: str | None = None
    paper_b: str | None = None
    chain_length: int | None = Field(default=None, ge=2)
    r: float | None = Field(default=None, ge=0)
    com_t: float | None = Field(default=None, gt=0, le=1)
    pool_size: int | None = Field(default=None, ge=2)
    keyword_pool_size: int | None = Field(default=None, ge=2)
    beam_width: int | None = Field(default=None, ge=1)
    mode: str = Field(default="beam", pattern="^(beam|exhaustive)$")

    @model_validator(mode="after")
    def _check_kind_fields(self):
        given = {
            "keyword": self.keyword is not None,
            "paper_a": self.paper_a is not None,
            "paper_b": self.paper_b is not None,
        }
        required = {
            "keyword": {"keyword"},
            "single_paper": {"paper_a"},
            "two_paper": {"paper_a", "paper_b"},
        }[self.kind]
        present = {name for name, ok in given.items() if ok}
        if present != required:
            raise ValueError(
                f"query kind {self.kind!r} requires exactly the fields {sorted(required)}"
            )
        return self

    def to_spec(self) -> QuerySpec:
        return QuerySpec(**self.model_dump())


def _paper_payload(index: EngineIndex, i: int, member) -> dict:
    paper = index.corpus.papers[i]
    return {
        "id": paper.id,
        "title": paper.title,
        "year": paper.year,
        "venue": paper.venue,
        "authors": list(paper.authors),
        "abstract": paper.abstract,
        "communities": [int(k) for k in member[i].nonzero()[0]],
    }


def create_app(index: EngineIndex, assets_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="pegraph", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _bad_body(_: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": errors})

    @app.exception_handler(PegraphError)
    async def _query_failed(_: Request, exc: PegraphError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/config")
    def get_config():
        from dataclasses import asdict

        return {
            "fingerprint": config_fingerprint(index.config),
            "config": asdict(index.config),
            "papers": len(index.corpus),
            "terms": len(index.vocabulary),
        }

    @app.get("/communities")
    def get_communities():
        sizes = index.community_sizes()
        return [
            {"id": k, "size": sizes[k], "top_words": index.community_top_words(k)}
            for k in range(index.model.n_communities)
        ]

    @app.get("/papers")
    def search_papers(q: str = "", limit: int = 20):
        from .factorization import membership_matrix

        member = membership_matrix(index.model, index.config.com_t)
        needle = q.strip().lower()
        if not needle:
            return []
        substring_hits = {
            i
            for i, paper in enumerate(index.corpus.papers)
            if needle in paper.title.lower() or needle in paper.id.lower()
        }
        stems = index.vocabulary.stems_of(q)
        scores = {}
        if stems:
            cols = sorted({index.vocabulary.index[s] for s in stems})
            relevance = index.relations.content[:, cols].sum(axis=1)
            for i in relevance.nonzero()[0]:
                scores[int(i)] = float(relevance[int(i)])
        ranked = sorted(
            substring_hits | set(scores),
            key=lambda i: (
                0 if i in substring_hits else 1,
                -scores.get(i, 0.0),
                index.corpus.papers[i].id,
            ),
        )
        return [_paper_payload(index, i, member) for i in ranked[:limit]]

    @app.post("/query")
    def post_query(body: QueryRequest):
        try:
            graph = run_query(body.to_spec(), index)
        except QueryError:
            raise
        except PegraphError as exc:
            raise QueryError(str(exc)) from exc
        return Response(content=export_graph(graph, "json"), media_type="application/json")

    if assets_dir is not None and Path(assets_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(assets_dir), html=True), name="ui")

    return app
