"""Test-path synthesis from a crawl event log.

The log is cut at every reset marker: each reset-delimited stretch starts at
the index page and becomes one test path. Paths whose event sequence repeats
an earlier path are dropped.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ._fileio import atomic_write_text
from .crawl.engine import CrawlModel
from .crawl.events import FILL, Event
from .crawl.model_io import dumps_crawl_model
from .errors import EmptyLog, SchemaError

SUITE_FORMAT = "webdedup-suite/1"


class SegmentReason(enum.Enum):
    NO_MORE_CLICKABLES = "NoMoreClickables"
    NO_NEW_STATES = "NoNewStates"


@dataclass(frozen=True)
class TestStep:
    __test__ = False

    event: Event
    expected_state: int


@dataclass(frozen=True)
class TestPath:
    __test__ = False

    steps: tuple
    origin: SegmentReason

    @property
    def events(self) -> tuple:
        return tuple(s.event for s in self.steps)

    @property
    def expected_states(self) -> tuple:
        return tuple(s.expected_state for s in self.steps)

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class TestSuite:
    __test__ = False

    paths: tuple
    model_ref: str

    def __len__(self):
        return len(self.paths)


def model_reference(model: CrawlModel) -> str:
    """Short content hash identifying the crawl model a suite was built from."""
    return hashlib.sha256(dumps_crawl_model(model).encode("utf-8")).hexdigest()[:16]


def _stretches(model: CrawlModel):
    current: list = []
    for entry in model.event_log:
        if entry.reset_before and current:
            yield current
            current = []
        current.append(entry)
    if current:
        yield current


def segment(model: CrawlModel) -> TestSuite:
    """Split the crawl log into test paths, one per reset-delimited stretch."""
    if not model.event_log:
        raise EmptyLog("crawl model has an empty event log; nothing to segment")
    known = {s.id for s in model.states}
    paths, seen = [], set()
    for stretch in _stretches(model):
        if stretch[0].source != model.index_id:
            raise SchemaError(f"event stretch starts at state {stretch[0].source}, not the index state")
        steps = []
        for entry in stretch:
            if entry.target not in known:
                raise SchemaError(f"event log references unknown state {entry.target}")
            steps.append(TestStep(entry.event, entry.target))
        key = tuple(s.event for s in steps)
        if key in seen:
            continue
        seen.add(key)
        found_new = any(e.was_new_state for e in stretch)
        origin = SegmentReason.NO_MORE_CLICKABLES if found_new else SegmentReason.NO_NEW_STATES
        paths.append(TestPath(tuple(steps), origin))
    return TestSuite(tuple(paths), model_reference(model))


def paths_discovering(suite: TestSuite, model: CrawlModel, states) -> list:
    """Indices of suite paths whose stretch admitted one of ``states``.

    A path covers a state when the state was first discovered while that
    path's events were being fired.
    """
    wanted = set(states)
    discovered_by: dict = {}
    stretches = list(_stretches(model))
    for stretch in stretches:
        key = tuple(e.event for e in stretch)
        for e in stretch:
            if e.was_new_state:
                discovered_by.setdefault(key, set()).add(e.target)
    return [i for i, p in enumerate(suite.paths) if discovered_by.get(p.events, set()) & wanted]


# ---------------------------------------------------------------------------
# export


def suite_to_dict(suite: TestSuite) -> dict:
    return {
        "format": SUITE_FORMAT,
        "model_ref": suite.model_ref,
        "paths": [
            {
                "origin": p.origin.value,
                "steps": [{"event": s.event.to_dict(), "expected_state": s.expected_state} for s in p.steps],
            }
            for p in suite.paths
        ],
    }


def suite_from_dict(doc: dict) -> TestSuite:
    if not isinstance(doc, dict) or doc.get("format") != SUITE_FORMAT:
        raise SchemaError("not a test suite document")
    try:
        paths = tuple(
            TestPath(
                tuple(TestStep(Event.from_dict(s["event"]), int(s["expected_state"])) for s in p["steps"]),
                SegmentReason(p["origin"]),
            )
            for p in doc["paths"]
        )
        return TestSuite(paths, str(doc["model_ref"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed test suite: {exc}") from None


def render_script(path: TestPath, number: int, total: int, model_ref: str) -> str:
    """Plain-text script for one path: a navigate step, then one line per event."""
    lines = [
        f"# test path {number} of {total} ({path.origin.value})",
        f"# crawl model {model_ref}",
        "navigate index",
        "# expect state 0",
    ]
    for step in path.steps:
        ev = step.event
        where = "/" + "/".join(map(str, ev.locator))
        if ev.action == FILL:
            lines.append(f"fill {where} {json.dumps(ev.label)} {json.dumps(ev.value)}")
        else:
            lines.append(f"click {where} {json.dumps(ev.label)}")
        lines.append(f"# expect state {step.expected_state}")
    return "\n".join(lines) + "\n"


def export_suite(suite: TestSuite, out, fmt: str = "json") -> list:
    """Write ``suite`` and return the list of files written.

    ``json`` writes one file at ``out``; ``script`` writes one text file per
    path into the directory ``out``.
    """
    if not suite.paths:
        raise ValueError("cannot export an empty test suite")
    out = Path(out)
    if fmt == "json":
        atomic_write_text(out, json.dumps(suite_to_dict(suite), indent=1, sort_keys=True) + "\n")
        return [out]
    if fmt == "script":
        out.mkdir(parents=True, exist_ok=True)
        written = []
        total = len(suite.paths)
        for i, p in enumerate(suite.paths, start=1):
            target = out / f"test_path_{i:03d}.txt"
            atomic_write_text(target, render_script(p, i, total, suite.model_ref))
            written.append(target)
        return written
    raise ValueError(f"unknown export format {fmt!r} (expected json or script)")


def load_suite(path) -> TestSuite:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"test suite is not valid JSON: {exc}") from None
    return suite_from_dict(doc)
