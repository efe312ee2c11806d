"""HTTP service: dataset upload, story generation, editing, rendering, sharing.

State lives on disk under a data directory (one JSON document per dataset,
story and share snapshot); the API itself is stateless per request.  Story
mutations are optimistic: every mutating call carries the revision it saw and
conflicts come back as 409.
"""
from __future__ import annotations

import hashlib
import os
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import compose
from .documents import (
    StoryDocument,
    add_fact,
    build_story_document,
    edit_fact,
    from_story_document_record,
    read_json,
    remove_fact,
    reorder_facts,
    to_story_document_record,
    write_json,
)
from .errors import (
    CsvStructureError,
    EmptyTable,
    FactweaverError,
    GenerationError,
    ParseError,
    SchemaError,
)
from .facts import from_fact_record, validate
from .search import Goal, RewardWeights, SearchConfig, StorySearch
from .table import DataTable, load_csv
from .visualize import ChartType

MAX_UPLOAD_BYTES = 50 * 1024 * 1024
DATA_DIR_ENV = "FACTWEAVER_DATA_DIR"

RENDER_MODES = ("storyline", "swiper", "factsheet")


def _error_body(code: str, message: str, details: Optional[list] = None) -> dict:
    return {"code": code, "message": message, "details": details or []}


class Store:
    """Directory-backed persistence for datasets, stories and share snapshots."""

    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "stories").mkdir(parents=True, exist_ok=True)
        (self.root / "shares").mkdir(parents=True, exist_ok=True)
        self._tables: dict[str, DataTable] = {}

    # datasets

    def dataset_dir(self, dataset_id: str) -> Path:
        return self.root / "datasets" / dataset_id

    def create_dataset(self, data: bytes) -> dict:
        table = load_csv(data)
        dataset_id = uuid.uuid4().hex[:12]
        folder = self.dataset_dir(dataset_id)
        folder.mkdir(parents=True, exist_ok=True)
        (folder / "data.csv").write_bytes(data)
        meta = {
            "id": dataset_id,
            "row_count": table.row_count,
            "schema": [{"name": m.name, "kind": m.kind.value} for m in table.schema],
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        write_json(folder / "meta.json", meta)
        self._tables[dataset_id] = table
        return meta

    def dataset_meta(self, dataset_id: str) -> Optional[dict]:
        path = self.dataset_dir(dataset_id) / "meta.json"
        return read_json(path) if path.exists() else None

    def table(self, dataset_id: str) -> Optional[DataTable]:
        if dataset_id in self._tables:
            return self._tables[dataset_id]
        path = self.dataset_dir(dataset_id) / "data.csv"
        if not path.exists():
            return None
        table = load_csv(path.read_bytes())
        self._tables[dataset_id] = table
        return table

    # stories

    def story_path(self, story_id: str) -> Path:
        return self.root / "stories" / f"{story_id}.json"

    def save_story(self, document: StoryDocument) -> None:
        write_json(self.story_path(document.id), to_story_document_record(document))

    def load_story(self, story_id: str) -> Optional[StoryDocument]:
        path = self.story_path(story_id)
        if not path.exists():
            return None
        return from_story_document_record(read_json(path))

    # shares

    def share_path(self, token: str) -> Path:
        return self.root / "shares" / f"{token}.json"

    def save_share(self, token: str, payload: dict) -> None:
        write_json(self.share_path(token), payload)

    def load_share(self, token: str) -> Optional[dict]:
        path = self.share_path(token)
        return read_json(path) if path.exists() else None


class GenerateRequest(BaseModel):
    goal: dict
    weights: Optional[dict | list] = None
    chart_diversity: float = 0.0
    seed: int = 0


def _parse_weights(raw) -> RewardWeights:
    if raw is None:
        return RewardWeights()
    if isinstance(raw, list):
        if len(raw) != 3:
            raise ValueError("weights must have 3 entries: diversity, logicality, integrity")
        d, l, c = (float(v) for v in raw)
    else:
        d = float(raw.get("diversity", 1 / 3))
        l = float(raw.get("logicality", 1 / 3))
        c = float(raw.get("integrity", 1 / 3))
    total = d + l + c
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"weights sum to {total}, expected 1")
    return RewardWeights.normalized(d, l, c)


def _parse_goal(raw: dict) -> Goal:
    return Goal(
        max_length=int(raw.get("max_length", 6)),
        min_information_bits=(
            float(raw["min_information_bits"])
            if raw.get("min_information_bits") is not None
            else None
        ),
        time_budget=(
            float(raw["time_budget"]) if raw.get("time_budget") is not None else None
        ),
        iteration_budget=(
            int(raw["iteration_budget"])
            if raw.get("iteration_budget") is not None
            else None
        ),
    )


def render_document(document: StoryDocument, table: DataTable, mode: str) -> tuple[str, str]:
    """(body, content type) for one of the three visualization modes."""
    specs = list(document.charts)
    if mode == "storyline":
        return compose.render_storyline(specs), "text/html; charset=utf-8"
    if mode == "swiper":
        return compose.render_swiper(specs), "text/html; charset=utf-8"
    if mode == "factsheet":
        return (
            compose.render_factsheet(document.story, table, specs=specs),
            "image/svg+xml",
        )
    raise ValueError(f"unknown render mode {mode!r}")


def create_app(data_dir: Optional[str] = None) -> FastAPI:
    root = Path(data_dir or os.environ.get(DATA_DIR_ENV, "./factweaver-data"))
    store = Store(root)
    mutation_lock = threading.Lock()
    app = FastAPI(title="factweaver", version="0.1.0")
    app.state.store = store

    @app.exception_handler(FactweaverError)
    async def _domain_error(_request: Request, exc: FactweaverError):
        status = 422
        if isinstance(exc, GenerationError):
            status = 409
        body = _error_body(exc.__class__.__name__, str(exc))
        if isinstance(exc, CsvStructureError) and exc.row_index is not None:
            body["details"] = [{"row": exc.row_index}]
        return JSONResponse(status_code=status, content=body)

    def _not_found(kind: str, key: str) -> JSONResponse:
        return JSONResponse(
            status_code=404, content=_error_body("NotFound", f"{kind} {key!r} not found")
        )

    def _bad_request(message: str, details: Optional[list] = None) -> JSONResponse:
        return JSONResponse(
            status_code=400, content=_error_body("BadRequest", message, details)
        )

    @app.post("/datasets", status_code=201)
    async def create_dataset(request: Request):
        data = await request.body()
        if len(data) > MAX_UPLOAD_BYTES:
            return JSONResponse(
                status_code=413,
                content=_error_body("PayloadTooLarge", "dataset exceeds 50 MB"),
            )
        try:
            return store.create_dataset(data)
        except (CsvStructureError, EmptyTable, SchemaError) as exc:
            body = _error_body(exc.__class__.__name__, str(exc))
            if isinstance(exc, CsvStructureError) and exc.row_index is not None:
                body["details"] = [{"row": exc.row_index}]
            return JSONResponse(status_code=422, content=body)

    @app.get("/datasets/{dataset_id}")
    async def get_dataset(dataset_id: str):
        meta = store.dataset_meta(dataset_id)
        if meta is None:
            return _not_found("dataset", dataset_id)
        return meta

    @app.post("/datasets/{dataset_id}/stories", status_code=201)
    async def generate(dataset_id: str, body: GenerateRequest):
        table = store.table(dataset_id)
        if table is None:
            return _not_found("dataset", dataset_id)
        try:
            goal = _parse_goal(body.goal)
            weights = _parse_weights(body.weights)
        except ValueError as exc:
            return _bad_request(str(exc))
        search = StorySearch(table, goal, weights, SearchConfig(), body.seed)
        story = search.run()
        params = {
            "goal": dict(body.goal),
            "weights": {
                "diversity": weights.diversity,
                "logicality": weights.logicality,
                "integrity": weights.integrity,
            },
            "chart_diversity": body.chart_diversity,
            "seed": body.seed,
        }
        document = build_story_document(
            story,
            table,
            dataset_id,
            params,
            doc_id=uuid.uuid4().hex[:12],
            scorer=search.scorer,
        )
        store.save_story(document)
        return to_story_document_record(document)

    @app.get("/stories/{story_id}")
    async def get_story(story_id: str):
        document = store.load_story(story_id)
        if document is None:
            return _not_found("story", story_id)
        return to_story_document_record(document)

    def _check_revision(document: StoryDocument, revision) -> Optional[JSONResponse]:
        if revision is None:
            return _bad_request("mutations must carry the revision they are based on")
        if int(revision) != document.revision:
            return JSONResponse(
                status_code=409,
                content=_error_body(
                    "Conflict",
                    f"stale revision {revision}, current is {document.revision}",
                ),
            )
        return None

    def _load_story_and_table(story_id: str):
        document = store.load_story(story_id)
        if document is None:
            return None, None
        return document, store.table(document.dataset_id)

    @app.patch("/stories/{story_id}")
    async def patch_story(story_id: str, body: dict):
        document, table = _load_story_and_table(story_id)
        if document is None:
            return _not_found("story", story_id)
        conflict = _check_revision(document, body.get("revision"))
        if conflict is not None:
            return conflict
        index = body.get("fact_index")
        if index is None or not (0 <= int(index) < len(document.story.facts)):
            return _not_found("fact index", str(index))
        try:
            fact = from_fact_record(body.get("fact", {}))
        except ParseError as exc:
            return JSONResponse(
                status_code=422, content=_error_body("ParseError", str(exc))
            )
        problems = validate(fact, table)
        if problems:
            return JSONResponse(
                status_code=422,
                content=_error_body("InvalidFact", "fact violates its type constraints", problems),
            )
        chart = None
        if body.get("chart"):
            try:
                chart = ChartType(body["chart"])
            except ValueError:
                return _bad_request(f"unknown chart {body['chart']!r}")
        with mutation_lock:
            updated = edit_fact(document, table, int(index), fact, chart)
            store.save_story(updated)
        return to_story_document_record(updated)

    @app.post("/stories/{story_id}/facts")
    async def add_story_fact(story_id: str, body: dict):
        document, table = _load_story_and_table(story_id)
        if document is None:
            return _not_found("story", story_id)
        conflict = _check_revision(document, body.get("revision"))
        if conflict is not None:
            return conflict
        try:
            fact = from_fact_record(body.get("fact", {}))
        except ParseError as exc:
            return JSONResponse(
                status_code=422, content=_error_body("ParseError", str(exc))
            )
        problems = validate(fact, table)
        if problems:
            return JSONResponse(
                status_code=422,
                content=_error_body("InvalidFact", "fact violates its type constraints", problems),
            )
        index = body.get("index")
        try:
            with mutation_lock:
                updated = add_fact(
                    document, table, fact, int(index) if index is not None else None
                )
                store.save_story(updated)
        except IndexError as exc:
            return _not_found("fact index", str(exc))
        return to_story_document_record(updated)

    @app.delete("/stories/{story_id}/facts/{index}")
    async def delete_story_fact(story_id: str, index: int, revision: Optional[int] = None):
        document, table = _load_story_and_table(story_id)
        if document is None:
            return _not_found("story", story_id)
        conflict = _check_revision(document, revision)
        if conflict is not None:
            return conflict
        try:
            with mutation_lock:
                updated = remove_fact(document, table, index)
                store.save_story(updated)
        except IndexError:
            return _not_found("fact index", str(index))
        return to_story_document_record(updated)

    @app.post("/stories/{story_id}/order")
    async def reorder_story(story_id: str, body: dict):
        document, table = _load_story_and_table(story_id)
        if document is None:
            return _not_found("story", story_id)
        conflict = _check_revision(document, body.get("revision"))
        if conflict is not None:
            return conflict
        order = body.get("order")
        if not isinstance(order, list):
            return _bad_request("body must carry 'order': a permutation of fact indices")
        try:
            with mutation_lock:
                updated = reorder_facts(document, table, [int(i) for i in order])
                store.save_story(updated)
        except IndexError as exc:
            return _not_found("order", str(exc))
        return to_story_document_record(updated)

    @app.get("/stories/{story_id}/render")
    async def render_story(story_id: str, mode: str = "storyline"):
        document, table = _load_story_and_table(story_id)
        if document is None:
            return _not_found("story", story_id)
        if mode not in RENDER_MODES:
            return _bad_request(f"unknown mode {mode!r}; expected one of {RENDER_MODES}")
        body, content_type = render_document(document, table, mode)
        return Response(content=body, media_type=content_type)

    @app.post("/stories/{story_id}/share")
    async def share_story(story_id: str, body: Optional[dict] = None):
        document, table = _load_story_and_table(story_id)
        if document is None:
            return _not_found("story", story_id)
        mode = (body or {}).get("mode", "storyline")
        if mode not in RENDER_MODES:
            return _bad_request(f"unknown mode {mode!r}; expected one of {RENDER_MODES}")
        token = hashlib.sha1(
            f"{document.id}:{document.revision}:{mode}".encode()
        ).hexdigest()[:16]
        if store.load_share(token) is None:
            rendered, content_type = render_document(document, table, mode)
            store.save_share(
                token,
                {
                    "token": token,
                    "story_id": document.id,
                    "revision": document.revision,
                    "mode": mode,
                    "content_type": content_type,
                    "body": rendered,
                },
            )
        url = f"/shared/{token}"
        embed = (
            f'<iframe src="{url}" width="840" height="640" '
            f'frameborder="0" title="data story"></iframe>'
        )
        return {"url": url, "embed": embed, "token": token}

    @app.get("/shared/{token}")
    async def shared(token: str):
        snapshot = store.load_share(token)
        if snapshot is None:
            return _not_found("share", token)
        return Response(
            content=snapshot["body"], media_type=snapshot["content_type"]
        )

    return app
