"""HTTP API over a loaded trace library.

Endpoints (all JSON):
  GET  /api/predicates   vocabulary grouped lane / relation / action
  POST /api/query        run a query, return up to max_results clips
  GET  /api/clips/{id}   full frame sequence of one clip
  GET  /api/stats        cumulative counters and timing breakdown
  GET  /api/library      episode summaries

Failures carry a machine-readable body {"code", "message", "field"?}:
400 for validation problems, 404 for unknown clips, 422 when a formula
exceeds the automaton state budget.  The library is immutable, so
requests are served concurrently without locking (the automaton cache
has its own).
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .automata import DEFAULT_STATE_BUDGET, StateBudgetExceeded
from .engine import Clip, SearchConfig, run_query
from .ltlf import FormulaSyntaxError, UnknownPredicateError
from .querylang import SchemaError, validate
from .store import TraceLibrary
from .wire import (
    clip_payload,
    library_summary,
    predicate_groups,
    query_result_payload,
)


def _error(status: int, code: str, message: str, field: str | None = None):
    body = {"code": code, "message": message}
    if field is not None:
        body["field"] = field
    return JSONResponse(status_code=status, content=body)


def _search_config(payload: dict, defaults: SearchConfig) -> SearchConfig:
    def int_field(name: str, default: int, minimum: int) -> int:
        value = payload.get(name, default)
        if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
            raise SchemaError(f"must be an integer >= {minimum}", name)
        return value

    seed = payload.get("seed", defaults.sample_seed)
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SchemaError("must be an integer", "seed")
    cfg = dict(
        min_len=int_field("min_len", defaults.min_len, 1),
        max_len=int_field("max_len", defaults.max_len, 1),
        max_results=int_field("max_results", defaults.max_results, 1),
        sample_seed=seed,
    )
    try:
        return SearchConfig(**cfg)
    except ValueError as exc:
        raise SchemaError(str(exc), "min_len") from exc


def create_app(
    library: TraceLibrary,
    defaults: SearchConfig = SearchConfig(),
    max_states: int = DEFAULT_STATE_BUDGET,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="tracequery", version="0.1.0")
    stats_lock = threading.Lock()
    stats = {
        "queries": 0,
        "matches_found": 0,
        "letters_fed": 0,
        "clips_served": 0,
        "timing": {"compile_s": 0.0, "search_s": 0.0, "render_s": 0.0},
    }

    @app.exception_handler(SchemaError)
    async def schema_error(request, exc: SchemaError):
        return _error(400, "validation_error", exc.detail, exc.field)

    @app.exception_handler(UnknownPredicateError)
    async def unknown_predicate(request, exc: UnknownPredicateError):
        return _error(400, "unknown_predicate", str(exc))

    @app.exception_handler(FormulaSyntaxError)
    async def bad_formula(request, exc: FormulaSyntaxError):
        return _error(400, "formula_syntax_error", str(exc), "raw_ltlf")

    @app.exception_handler(StateBudgetExceeded)
    async def budget_exceeded(request, exc: StateBudgetExceeded):
        return _error(422, "state_budget_exceeded", str(exc))

    @app.get("/api/predicates")
    def predicates_endpoint() -> dict:
        return predicate_groups(library.vocab)

    @app.get("/api/library")
    def library_endpoint() -> dict:
        return library_summary(library)

    @app.post("/api/query")
    def query_endpoint(payload: dict = Body(...)) -> dict:
        raw_ltlf = payload.get("raw_ltlf")
        structured_fields = any(
            payload.get(k) for k in ("start", "end", "constraint")
        )
        if raw_ltlf is not None:
            if not isinstance(raw_ltlf, str):
                raise SchemaError("must be a formula string", "raw_ltlf")
            if structured_fields:
                raise SchemaError(
                    "give either raw_ltlf or start/end/constraint, not both",
                    "raw_ltlf",
                )
            query = raw_ltlf
        else:
            query = validate(payload, library.vocab)

        cfg = _search_config(payload, defaults)
        continuation = payload.get("continuation")
        if continuation is not None and not isinstance(continuation, str):
            raise SchemaError("must be a string", "continuation")

        result = run_query(
            library, query, cfg, continuation=continuation, max_states=max_states
        )
        with stats_lock:
            stats["queries"] += 1
            stats["matches_found"] += result.total_matches
            stats["letters_fed"] += result.counters.letters_fed
            stats["clips_served"] += len(result.clips)
            for phase, seconds in result.timing.items():
                stats["timing"][phase] += seconds
        return query_result_payload(result)

    @app.get("/api/clips/{clip_ref}")
    def clip_endpoint(clip_ref: str):
        try:
            trace_id, span = clip_ref.rsplit(":", 1)
            k_text, ell_text = span.split("-", 1)
            k, ell = int(k_text), int(ell_text)
        except ValueError:
            return _error(404, "not_found", f"malformed clip id {clip_ref!r}")
        episode = library.episodes.get(trace_id)
        if episode is None or not 1 <= k <= ell <= len(episode.steps):
            return _error(404, "not_found", f"no such clip {clip_ref!r}")
        clip = Clip(
            clip_id=clip_ref,
            trace_id=trace_id,
            k=k,
            ell=ell,
            frames=episode.steps[k - 1 : ell],
        )
        return clip_payload(clip)

    @app.get("/api/stats")
    def stats_endpoint() -> dict:
        with stats_lock:
            snapshot = {
                **{k: v for k, v in stats.items() if k != "timing"},
                "timing": dict(stats["timing"]),
            }
        snapshot["episodes"] = len(library.episodes)
        return snapshot

    if ui_dir is not None:
        root = Path(ui_dir)
        if not root.is_dir():
            raise ValueError(f"UI directory {ui_dir!r} does not exist")
        app.mount("/", StaticFiles(directory=root, html=True), name="ui")

    return app
