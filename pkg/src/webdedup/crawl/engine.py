"""Depth-first model-inference crawler with a pluggable state abstraction.

Every freshly captured page is compared against the states already in the
model (oldest first); it becomes a new state only if the SAF finds no clone.
Navigation to a state always resets to the index page and replays the
shortest known event path, so each reset starts an independent event stretch.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..dom import EmbeddingKind, TokenSequence, extract_tokens, parse_html
from ..errors import DriverFailure, Unreachable
from ..saf.classifiers import PairLabel
from .events import Event

logger = logging.getLogger(__name__)

DEPTH_FIRST = "depth-first"


@dataclass
class StateRecord:
    id: int
    html: str
    discovery_index: int
    visited: bool = False
    representation: object = field(default=None, repr=False)
    events: list | None = field(default=None, repr=False)
    next_event: int = 0
    _tokens: dict = field(default_factory=dict, repr=False)

    def tokens(self, kind: EmbeddingKind) -> TokenSequence:
        seq = self._tokens.get(kind)
        if seq is None:
            seq = self._tokens[kind] = extract_tokens(parse_html(self.html), kind)
        return seq

    @property
    def pending(self) -> bool:
        return self.events is None or self.next_event < len(self.events)


@dataclass(frozen=True)
class Edge:
    source: int
    event: Event
    target: int


@dataclass(frozen=True)
class LogEntry:
    source: int
    event: Event
    target: int
    was_new_state: bool
    reset_before: bool
    # navigation replays are logged too, so every stretch starts at the index
    replay: bool = False


@dataclass
class CrawlModel:
    states: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    event_log: list = field(default_factory=list)
    index_id: int = 0
    error: str | None = None

    def state(self, sid: int) -> StateRecord:
        return self.states[sid]

    def add_state(self, html: str, representation=None) -> StateRecord:
        rec = StateRecord(len(self.states), html, len(self.states), representation=representation)
        self.states.append(rec)
        return rec

    def add_edge(self, source: int, event: Event, target: int):
        edge = Edge(source, event, target)
        if edge not in self.edges:
            self.edges.append(edge)


@dataclass(frozen=True)
class CrawlBudget:
    max_events: int | None = None
    max_seconds: float | None = None

    def __post_init__(self):
        if self.max_events is None and self.max_seconds is None:
            raise ValueError("a crawl budget needs max_events and/or max_seconds")
        if self.max_events is not None and self.max_events < 0:
            raise ValueError("max_events must be >= 0")


def path_to(model: CrawlModel, target: int) -> list:
    """Shortest event path from the index state; ties go to earlier-inserted edges."""
    if target == model.index_id:
        return []
    out_edges: dict = {}
    for edge in model.edges:
        out_edges.setdefault(edge.source, []).append(edge)
    parent = {model.index_id: None}
    queue = deque([model.index_id])
    while queue:
        sid = queue.popleft()
        for edge in out_edges.get(sid, ()):
            if edge.target in parent:
                continue
            parent[edge.target] = edge
            if edge.target == target:
                path = []
                node = target
                while parent[node] is not None:
                    path.append(parent[node])
                    node = parent[node].source
                return [e.event for e in reversed(path)]
            queue.append(edge.target)
    raise Unreachable(f"state {target} is not reachable from the index state")


def path_edges(model: CrawlModel, target: int) -> list:
    """Like :func:`path_to` but returns the (source, event, target) edges."""
    events = path_to(model, target)
    edges, here = [], model.index_id
    for ev in events:
        edge = next(e for e in model.edges if e.source == here and e.event == ev)
        edges.append(edge)
        here = edge.target
    return edges


def is_duplicate(representation, model: CrawlModel, saf, workers: int = 1) -> int | None:
    """Id of the first existing state (by discovery order) that the SAF calls a clone."""
    states = sorted(model.states, key=lambda s: s.discovery_index)
    if workers > 1 and len(states) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            labels = list(pool.map(lambda s: saf.compare(representation, s.representation), states))
        for state, label in zip(states, labels):
            if label == PairLabel.CLONE:
                return state.id
        return None
    for state in states:
        if saf.compare(representation, state.representation) == PairLabel.CLONE:
            return state.id
    return None


def _next_state(model: CrawlModel) -> StateRecord | None:
    pending = [s for s in model.states if s.pending]
    return max(pending, key=lambda s: s.discovery_index) if pending else None


class _Crawler:
    def __init__(self, driver, saf, budget: CrawlBudget, workers: int):
        self.driver = driver
        self.saf = saf
        self.budget = budget
        self.workers = workers
        self.model = CrawlModel()
        self.fired = 0
        self.deadline = None if budget.max_seconds is None else time.monotonic() + budget.max_seconds
        self.reset_pending = False

    def exhausted(self) -> bool:
        if self.budget.max_events is not None and self.fired >= self.budget.max_events:
            return True
        return self.deadline is not None and time.monotonic() >= self.deadline

    def log(self, source, event, target, new, replay=False):
        self.model.event_log.append(LogEntry(source, event, target, new, self.reset_pending, replay))
        self.reset_pending = False

    def reset(self):
        self.driver.reset()
        self.reset_pending = True

    def goto(self, state: StateRecord):
        self.reset()
        for edge in path_edges(self.model, state.id):
            self.driver.fire(edge.event)
            self.log(edge.source, edge.event, edge.target, False, replay=True)

    def _fire_from(self, state, event):
        try:
            return self.driver.fire(event)
        except DriverFailure:
            # locator may be stale on a near-duplicate page: go back and retry once
            if self.driver.current() == state.html:
                raise
            self.goto(state)
            return self.driver.fire(event)

    def run(self) -> CrawlModel:
        model = self.model
        html = self.driver.reset()
        self.reset_pending = True
        model.add_state(html, self.saf.represent(html))
        fresh = True
        while not self.exhausted():
            state = _next_state(model)
            if state is None:
                break
            if not fresh:
                self.goto(state)
            fresh = False
            if state.events is None:
                state.events = list(self.driver.candidate_events())
            here = True
            while state.next_event < len(state.events) and not self.exhausted():
                if not here:
                    self.goto(state)
                event = state.events[state.next_event]
                state.next_event += 1
                html = self._fire_from(state, event)
                self.fired += 1
                rep = self.saf.represent(html)
                match = is_duplicate(rep, model, self.saf, self.workers)
                if match is None:
                    new = model.add_state(html, rep)
                    model.add_edge(state.id, event, new.id)
                    self.log(state.id, event, new.id, True)
                    logger.debug("state %d admitted via %s", new.id, event.describe())
                    break
                model.add_edge(state.id, event, match)
                self.log(state.id, event, match, False)
                here = match == state.id
            state.visited = not state.pending
        return model


def crawl(driver, saf, budget: CrawlBudget, strategy: str = DEPTH_FIRST, workers: int = 1) -> CrawlModel:
    """Explore the app behind ``driver`` and return the inferred model.

    Driver failures stop the crawl; the partial model is returned with its
    ``error`` field set.
    """
    if strategy != DEPTH_FIRST:
        raise ValueError(f"unsupported exploration strategy {strategy!r}")
    crawler = _Crawler(driver, saf, budget, workers)
    try:
        return crawler.run()
    except DriverFailure as exc:
        logger.warning("crawl aborted: %s", exc)
        crawler.model.error = str(exc)
        return crawler.model
