from __future__ import annotations

from dataclasses import dataclass

from ..dom import DomNode, DomTree, NodeKind

CLICK = "click"
FILL = "fill"

_CLICKABLE_INPUTS = {"submit", "button", "image", "reset"}
_FILLABLE_INPUTS = {"", "text", "search", "email", "password", "number", "tel", "url"}


@dataclass(frozen=True)
class Event:
    """A GUI event: an element locator (child-index path) plus an action."""

    locator: tuple
    label: str
    action: str = CLICK
    value: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "locator", tuple(int(i) for i in self.locator))
        if self.action not in (CLICK, FILL):
            raise ValueError(f"unknown event action {self.action!r}")
        if self.action == FILL and self.value is None:
            raise ValueError("fill events need a value")

    def to_dict(self) -> dict:
        out = {"locator": list(self.locator), "label": self.label, "action": self.action}
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Event":
        return cls(tuple(d["locator"]), d["label"], d.get("action", CLICK), d.get("value"))

    def describe(self) -> str:
        where = "/" + "/".join(map(str, self.locator))
        if self.action == FILL:
            return f'fill "{self.label}" with "{self.value}" at {where}'
        return f'click "{self.label}" at {where}'


def element_label(node: DomNode) -> str:
    if node.tag == "input":
        return node.attrs.get("value") or node.attrs.get("name") or node.attrs.get("aria-label", "")
    text = node.text_content()
    return text or node.attrs.get("aria-label", "") or node.attrs.get("title", "")


def is_clickable(node: DomNode) -> bool:
    if node.kind is not NodeKind.ELEMENT:
        return False
    if node.tag in ("a", "button"):
        return True
    return node.tag == "input" and node.attrs.get("type", "").lower() in _CLICKABLE_INPUTS


def is_fillable(node: DomNode) -> bool:
    if node.kind is not NodeKind.ELEMENT:
        return False
    if node.tag == "textarea":
        return True
    return node.tag == "input" and node.attrs.get("type", "").lower() in _FILLABLE_INPUTS


def clickable_elements(tree: DomTree):
    """Clickable elements in document order (top to bottom, left to right)."""
    return [(path, node) for path, node in tree.iter_with_paths() if is_clickable(node)]
