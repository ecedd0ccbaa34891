"""App drivers: the crawler's only view of the application under test.

Two in-process drivers are provided. ``FixtureDriver`` simulates an app
described by a scenario file (pages are Jinja templates over a small dict of
app variables, events are transition rules). ``StaticSiteDriver`` serves a
directory of HTML files and follows relative anchor links.
"""

from __future__ import annotations

import json
import posixpath
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol
from urllib.parse import urlsplit

import jinja2

from ..dom import parse_html
from ..errors import DriverFailure, SchemaError
from .events import CLICK, FILL, Event, clickable_elements, element_label, is_clickable, is_fillable


class AppDriver(Protocol):
    def reset(self) -> str: ...

    def current(self) -> str: ...

    def candidate_events(self) -> list: ...

    def fire(self, event: Event) -> str: ...


# ---------------------------------------------------------------------------
# scenario fixtures

SCENARIO_FORMAT = "webdedup-scenario/1"


@dataclass(frozen=True)
class Transition:
    page: str
    label: str
    target: str
    action: str = CLICK
    value: str | None = None
    increment: dict = field(default_factory=dict)
    assign: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    index: str
    pages: dict
    transitions: list
    variables: dict = field(default_factory=dict)

    def rule(self, page: str, label: str, action: str) -> Transition | None:
        for t in self.transitions:
            if t.page == page and t.label == label and t.action == action:
                return t
        return None

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        if not isinstance(doc, dict):
            raise SchemaError("scenario must be a JSON object")
        fmt = doc.get("format", SCENARIO_FORMAT)
        if fmt != SCENARIO_FORMAT:
            raise SchemaError(f"unsupported scenario format {fmt!r}")
        unknown = set(doc) - {"format", "name", "index", "variables", "pages", "transitions"}
        if unknown:
            raise SchemaError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        pages = doc.get("pages")
        if not isinstance(pages, dict) or not pages:
            raise SchemaError("scenario needs a non-empty 'pages' object")
        templates = {}
        for name, page in pages.items():
            tmpl = page.get("template") if isinstance(page, dict) else page
            if not isinstance(tmpl, str):
                raise SchemaError(f"page {name!r} has no template string")
            templates[name] = tmpl
        index = doc.get("index")
        if index not in templates:
            raise SchemaError(f"index page {index!r} is not a declared page")
        transitions = []
        for i, t in enumerate(doc.get("transitions", [])):
            try:
                tr = Transition(
                    page=t["page"],
                    label=t["label"],
                    target=t["target"],
                    action=t.get("action", CLICK),
                    value=t.get("value"),
                    increment=dict(t.get("increment", {})),
                    assign=dict(t.get("set", {})),
                )
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"transition {i}: missing field {exc}") from None
            for ref in (tr.page, tr.target):
                if ref not in templates:
                    raise SchemaError(f"transition {i}: unknown page {ref!r}")
            if tr.action not in (CLICK, FILL):
                raise SchemaError(f"transition {i}: unknown action {tr.action!r}")
            transitions.append(tr)
        return cls(doc.get("name", "scenario"), index, templates, transitions, dict(doc.get("variables", {})))


BUILTIN_SCENARIOS = {"running-example": "running_example.json"}


def load_scenario(path_or_name) -> Scenario:
    """Load a scenario file, or a bundled one by name (e.g. ``running-example``)."""
    name = str(path_or_name)
    if name.startswith("builtin:"):
        name = name[len("builtin:") :]
    if name in BUILTIN_SCENARIOS and not Path(name).exists():
        text = resources.files("webdedup.data").joinpath(BUILTIN_SCENARIOS[name]).read_text("utf-8")
    else:
        text = Path(path_or_name).read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario is not valid JSON: {exc}") from None
    return Scenario.from_dict(doc)


class FixtureDriver:
    """Deterministic simulated app; ``reset`` restores the initial variables."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        env = jinja2.Environment(undefined=jinja2.StrictUndefined, autoescape=False, keep_trailing_newline=True)
        self._templates = {name: env.from_string(src) for name, src in scenario.pages.items()}
        self._logical: dict = {}
        self.page = scenario.index
        self.vars = dict(scenario.variables)
        self._html = None

    def _render(self) -> str:
        try:
            html = self._templates[self.page].render(**self.vars)
        except jinja2.TemplateError as exc:
            raise DriverFailure(f"rendering page {self.page!r} failed: {exc}") from exc
        self._logical.setdefault(html, self.page)
        self._html = html
        return html

    def logical_page_of(self, html: str) -> str:
        """Name of the scenario page that rendered ``html`` (ground truth)."""
        try:
            return self._logical[html]
        except KeyError:
            raise KeyError("html was not produced by this driver") from None

    def reset(self) -> str:
        self.page = self.scenario.index
        self.vars = dict(self.scenario.variables)
        return self._render()

    def current(self) -> str:
        return self._html if self._html is not None else self.reset()

    def candidate_events(self) -> list:
        tree = parse_html(self.current())
        events = []
        for path, node in tree.iter_with_paths():
            if is_clickable(node):
                label = element_label(node)
                if label:
                    events.append(Event(path, label, CLICK))
            elif is_fillable(node):
                rule = self.scenario.rule(self.page, element_label(node), FILL)
                if rule is not None:
                    events.append(Event(path, rule.label, FILL, rule.value or ""))
        return events

    def fire(self, event: Event) -> str:
        tree = parse_html(self.current())
        node = tree.node_at(event.locator)
        if node is None or element_label(node) != event.label:
            raise DriverFailure(f"cannot locate element for {event.describe()} on page {self.page!r}")
        rule = self.scenario.rule(self.page, event.label, event.action)
        if rule is None:
            return self._html
        for var, step in rule.increment.items():
            self.vars[var] = self.vars.get(var, 0) + step
        self.vars.update(rule.assign)
        self.page = rule.target
        return self._render()


# ---------------------------------------------------------------------------
# static sites


class StaticSiteDriver:
    """Pages from a directory; events are clicks on links to local files."""

    def __init__(self, root, index="index.html"):
        self.root = Path(root).resolve()
        self.index = index
        if not (self.root / index).is_file():
            raise DriverFailure(f"index page {index!r} not found under {self.root}")
        self.path = index
        self._html = None
        self._logical: dict = {}

    def _load(self, rel: str) -> str:
        try:
            data = (self.root / rel).read_bytes()
        except OSError as exc:
            raise DriverFailure(f"cannot read {rel}: {exc}") from exc
        self.path = rel
        self._html = data.decode("utf-8", errors="replace")
        self._logical.setdefault(self._html, rel)
        return self._html

    def logical_page_of(self, html: str) -> str:
        """Relative path of the file that produced ``html``."""
        return self._logical[html]

    def _resolve(self, href: str) -> str | None:
        parts = urlsplit(href)
        if parts.scheme or parts.netloc or not parts.path:
            return None
        if parts.path.startswith("/"):
            rel = posixpath.normpath(parts.path.lstrip("/"))
        else:
            rel = posixpath.normpath(posixpath.join(posixpath.dirname(self.path), parts.path))
        if rel.startswith(".."):
            return None
        if rel.endswith("/") or (self.root / rel).is_dir():
            rel = posixpath.join(rel, "index.html")
        return rel if (self.root / rel).is_file() else None

    def reset(self) -> str:
        return self._load(self.index)

    def current(self) -> str:
        return self._html if self._html is not None else self.reset()

    def candidate_events(self) -> list:
        tree = parse_html(self.current())
        events = []
        for path, node in clickable_elements(tree):
            if node.tag == "a" and self._resolve(node.attrs.get("href", "")) is not None:
                events.append(Event(path, element_label(node) or node.attrs["href"], CLICK))
        return events

    def fire(self, event: Event) -> str:
        tree = parse_html(self.current())
        node = tree.node_at(event.locator)
        if node is None or node.tag != "a":
            raise DriverFailure(f"cannot locate link for {event.describe()} on {self.path}")
        target = self._resolve(node.attrs.get("href", ""))
        if target is None:
            return self._html
        return self._load(target)
