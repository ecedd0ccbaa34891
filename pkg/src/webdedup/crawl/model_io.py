"""JSON serialization of crawl models."""

from __future__ import annotations

import json
from pathlib import Path

from .._fileio import atomic_write_text
from ..errors import SchemaError
from .engine import CrawlModel, Edge, LogEntry, StateRecord
from .events import Event

CRAWL_FORMAT = "webdedup-crawl/1"


def crawl_model_to_dict(model: CrawlModel, logical_of=None) -> dict:
    states = []
    for s in model.states:
        entry = {"id": s.id, "discovery_index": s.discovery_index, "visited": s.visited, "html": s.html}
        if logical_of is not None:
            entry["logical_page"] = logical_of(s.html)
        states.append(entry)
    return {
        "format": CRAWL_FORMAT,
        "index_id": model.index_id,
        "error": model.error,
        "states": states,
        "edges": [{"from": e.source, "event": e.event.to_dict(), "to": e.target} for e in model.edges],
        "event_log": [
            {
                "from": e.source,
                "event": e.event.to_dict(),
                "to": e.target,
                "was_new_state": e.was_new_state,
                "reset_before": e.reset_before,
                "replay": e.replay,
            }
            for e in model.event_log
        ],
    }


def crawl_model_from_dict(doc: dict) -> CrawlModel:
    if doc.get("format") != CRAWL_FORMAT:
        raise SchemaError(f"not a crawl model document (format {doc.get('format')!r})")
    try:
        model = CrawlModel(index_id=doc["index_id"], error=doc.get("error"))
        for s in doc["states"]:
            model.states.append(StateRecord(s["id"], s["html"], s["discovery_index"], visited=s["visited"]))
        for e in doc["edges"]:
            model.edges.append(Edge(e["from"], Event.from_dict(e["event"]), e["to"]))
        for e in doc["event_log"]:
            model.event_log.append(
                LogEntry(e["from"], Event.from_dict(e["event"]), e["to"], e["was_new_state"], e["reset_before"], e.get("replay", False))
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed crawl model: {exc}") from None
    ids = {s.id for s in model.states}
    for e in model.edges:
        if e.source not in ids or e.target not in ids:
            raise SchemaError(f"edge {e.source}->{e.target} references an unknown state")
    return model


def dumps_crawl_model(model: CrawlModel, logical_of=None) -> str:
    return json.dumps(crawl_model_to_dict(model, logical_of), indent=1, sort_keys=True) + "\n"


def save_crawl_model(model: CrawlModel, path, logical_of=None):
    atomic_write_text(path, dumps_crawl_model(model, logical_of))


def load_crawl_model(path) -> CrawlModel:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"crawl model is not valid JSON: {exc}") from None
    return crawl_model_from_dict(doc)
