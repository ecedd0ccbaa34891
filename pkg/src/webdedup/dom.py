"""Lenient HTML parsing and token-sequence extraction.

Pages are parsed into a small DOM (elements, text, comments, script/style
leaves) and flattened depth-first into one of three token sequences:
text content only, tag names only, or both interleaved in document order.
"""

from __future__ import annotations

import enum
import html as _html
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator, Sequence

__all__ = [
    "EmbeddingKind",
    "NodeKind",
    "DomNode",
    "DomTree",
    "TokenSequence",
    "parse_html",
    "tokenize_text",
    "extract_tokens",
    "to_html",
    "ALL_KINDS",
]


class EmbeddingKind(enum.IntEnum):
    """Token-sequence representation; the integer value fixes feature order."""

    CONTENT = 0
    TAGS = 1
    CONTENT_TAGS = 2

    @property
    def slug(self) -> str:
        return _KIND_SLUGS[self]

    @classmethod
    def parse(cls, value: "str | EmbeddingKind") -> "EmbeddingKind":
        if isinstance(value, EmbeddingKind):
            return value
        key = str(value).strip().lower().replace("_", "-").replace("+", "-")
        for kind, slug in _KIND_SLUGS.items():
            if key == slug or key == kind.name.lower().replace("_", "-"):
                return kind
        raise ValueError(f"unknown embedding kind {value!r}; expected one of {sorted(_KIND_SLUGS.values())}")


_KIND_SLUGS = {
    EmbeddingKind.CONTENT: "content",
    EmbeddingKind.TAGS: "tags",
    EmbeddingKind.CONTENT_TAGS: "content-tags",
}

ALL_KINDS = (EmbeddingKind.CONTENT, EmbeddingKind.TAGS, EmbeddingKind.CONTENT_TAGS)


class NodeKind(enum.Enum):
    ELEMENT = "element"
    TEXT = "text"
    COMMENT = "comment"
    SCRIPT_OR_STYLE = "script-or-style"


@dataclass(eq=False)
class DomNode:
    kind: NodeKind
    tag: str = ""
    text: str = ""
    attrs: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    def iter(self) -> Iterator["DomNode"]:
        """Pre-order traversal of this subtree."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def text_content(self) -> str:
        parts = [n.text for n in self.iter() if n.kind is NodeKind.TEXT]
        return " ".join(" ".join(parts).split())

    def __repr__(self):
        if self.kind is NodeKind.ELEMENT:
            return f"<{self.tag} ({len(self.children)} children)>"
        return f"{self.kind.value}({self.text[:20]!r})"


@dataclass(eq=False)
class DomTree:
    root: DomNode

    def node_at(self, path: Sequence[int]) -> DomNode | None:
        """Resolve a child-index path from the root, or None."""
        node = self.root
        for i in path:
            if not 0 <= i < len(node.children):
                return None
            node = node.children[i]
        return node

    def iter_with_paths(self) -> Iterator[tuple[tuple[int, ...], DomNode]]:
        stack = [((), self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))


@dataclass(frozen=True)
class TokenSequence:
    kind: EmbeddingKind
    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


# ---------------------------------------------------------------------------
# parsing

VOID_TAGS = frozenset(
    "area base br col embed hr img input keygen link meta param source track wbr".split()
)
RAW_TEXT_TAGS = frozenset(("script", "style"))
HEAD_TAGS = frozenset(("title", "meta", "link", "base", "style", "script", "noscript"))

# Opening any of these implicitly closes an open <p>.
_CLOSES_P = frozenset(
    """address article aside blockquote details dialog div dl fieldset figcaption figure
    footer form h1 h2 h3 h4 h5 h6 header hgroup hr main menu nav ol p pre section table ul""".split()
)

# tag -> (tags it implicitly closes, tags that bound the search)
_IMPLIED_END = {
    "li": ({"li"}, {"ul", "ol", "menu"}),
    "dt": ({"dt", "dd"}, {"dl"}),
    "dd": ({"dt", "dd"}, {"dl"}),
    "tr": ({"tr", "td", "th"}, {"table", "thead", "tbody", "tfoot"}),
    "td": ({"td", "th"}, {"tr", "table"}),
    "th": ({"td", "th"}, {"tr", "table"}),
    "thead": ({"thead", "tbody", "tfoot", "tr", "td", "th"}, {"table"}),
    "tbody": ({"thead", "tbody", "tfoot", "tr", "td", "th"}, {"table"}),
    "tfoot": ({"thead", "tbody", "tfoot", "tr", "td", "th"}, {"table"}),
    "option": ({"option"}, {"select", "datalist"}),
}


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = DomNode(NodeKind.ELEMENT, tag="html")
        self.head: DomNode | None = None
        self.body: DomNode | None = None
        self.stack: list[DomNode] = [self.root]

    # -- helpers
    @property
    def top(self) -> DomNode:
        return self.stack[-1]

    def _pop_to_root(self):
        del self.stack[1:]

    def _ensure_body(self):
        if self.top is not self.root:
            return
        if self.body is None:
            self.body = DomNode(NodeKind.ELEMENT, tag="body")
            self.root.children.append(self.body)
        self.stack.append(self.body)

    def _close_implied(self, tag: str):
        if tag in _CLOSES_P:
            self._close_nearest({"p"}, {"button", "table", "td", "th", "li"})
        rule = _IMPLIED_END.get(tag)
        if rule is not None:
            closes, bounds = rule
            self._close_nearest(closes, bounds)

    def _close_nearest(self, closes, bounds):
        for i in range(len(self.stack) - 1, 0, -1):
            t = self.stack[i].tag
            if t in closes:
                del self.stack[i:]
                return
            if t in bounds:
                return

    # -- HTMLParser callbacks
    def handle_starttag(self, tag, attrs):
        self._start(tag, attrs, self_closing=False)

    def handle_startendtag(self, tag, attrs):
        self._start(tag, attrs, self_closing=True)

    def _start(self, tag, attrs, self_closing):
        attrs = {k: (v if v is not None else "") for k, v in attrs}
        if tag == "html":
            return
        if tag == "head":
            if self.head is None and self.body is None:
                self._pop_to_root()
                self.head = DomNode(NodeKind.ELEMENT, tag="head", attrs=attrs)
                self.root.children.append(self.head)
                if not self_closing:
                    self.stack.append(self.head)
            return
        if tag == "body":
            self._pop_to_root()
            if self.body is None:
                self.body = DomNode(NodeKind.ELEMENT, tag="body", attrs=attrs)
                self.root.children.append(self.body)
            if not self_closing:
                self.stack.append(self.body)
            return
        if self.top is self.root and not (tag in HEAD_TAGS and self.body is None):
            self._ensure_body()
        self._close_implied(tag)
        if tag in RAW_TEXT_TAGS:
            node = DomNode(NodeKind.SCRIPT_OR_STYLE, tag=tag, attrs=attrs)
        else:
            node = DomNode(NodeKind.ELEMENT, tag=tag, attrs=attrs)
        self.top.children.append(node)
        if tag not in VOID_TAGS and not self_closing:
            self.stack.append(node)

    def handle_endtag(self, tag):
        if tag in ("html", "body"):
            self._pop_to_root()
            return
        if tag == "head":
            if self.head is not None and self.head in self.stack:
                self._pop_to_root()
            return
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignored

    def handle_data(self, data):
        top = self.top
        if top.kind is NodeKind.SCRIPT_OR_STYLE:
            top.text += data
            return
        if not data.strip():
            return
        if top is self.root:
            self._ensure_body()
            top = self.top
        if top.children and top.children[-1].kind is NodeKind.TEXT:
            top.children[-1].text += data
        else:
            top.children.append(DomNode(NodeKind.TEXT, text=data))

    def handle_comment(self, data):
        self.top.children.append(DomNode(NodeKind.COMMENT, text=data))

    # doctype, processing instructions and unknown declarations are dropped
    def handle_decl(self, decl):
        pass

    def handle_pi(self, data):
        pass

    def unknown_decl(self, data):
        pass


def parse_html(source: "str | bytes") -> DomTree:
    """Parse arbitrary (possibly malformed) HTML; never raises."""
    if isinstance(source, (bytes, bytearray)):
        source = bytes(source).decode("utf-8", errors="replace")
    builder = _TreeBuilder()
    builder.feed(source)
    builder.close()
    return DomTree(builder.root)


def to_html(tree: "DomTree | DomNode") -> str:
    """Serialize a tree back to HTML (debug form, attributes included)."""
    node = tree.root if isinstance(tree, DomTree) else tree
    out: list[str] = []
    _serialize(node, out)
    return "".join(out)


def _serialize(node: DomNode, out: list):
    if node.kind is NodeKind.TEXT:
        out.append(_html.escape(node.text, quote=False))
    elif node.kind is NodeKind.COMMENT:
        out.append(f"<!--{node.text.replace('--', '- -')}-->")
    else:
        attrs = "".join(f' {k}="{_html.escape(v)}"' for k, v in node.attrs.items())
        out.append(f"<{node.tag}{attrs}>")
        if node.kind is NodeKind.SCRIPT_OR_STYLE:
            out.append(node.text.replace("</", "<\\/"))
        else:
            for child in node.children:
                _serialize(child, out)
        if node.tag not in VOID_TAGS:
            out.append(f"</{node.tag}>")


# ---------------------------------------------------------------------------
# tokens

_EDGE_PUNCT = ".,;:!?\"'()[]{}"


def tokenize_text(raw: str) -> list[str]:
    """Lowercase, split on whitespace, trim sentence punctuation at token edges.

    Tokens made only of punctuation ("$", "+") are kept whole, and inner
    punctuation ("9.99") is untouched.
    """
    tokens = []
    for fragment in raw.lower().split():
        trimmed = fragment.strip(_EDGE_PUNCT)
        tokens.append(trimmed or fragment)
    return tokens


def _walk_tokens(node: DomNode, emit_tags: bool, emit_text: bool, out: list):
    stack = [node]
    while stack:
        n = stack.pop()
        if n.kind is NodeKind.ELEMENT:
            if emit_tags:
                out.append(n.tag)
            stack.extend(reversed(n.children))
        elif n.kind is NodeKind.TEXT:
            if emit_text:
                out.extend(tokenize_text(n.text))


def extract_tokens(node: "DomNode | DomTree", kind: "EmbeddingKind | str") -> TokenSequence:
    """Depth-first, left-to-right token extraction skipping script/style/comments."""
    kind = EmbeddingKind.parse(kind)
    if isinstance(node, DomTree):
        node = node.root
    out: list[str] = []
    _walk_tokens(
        node,
        emit_tags=kind in (EmbeddingKind.TAGS, EmbeddingKind.CONTENT_TAGS),
        emit_text=kind in (EmbeddingKind.CONTENT, EmbeddingKind.CONTENT_TAGS),
        out=out,
    )
    return TokenSequence(kind, out)
