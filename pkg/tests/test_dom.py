import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webdedup.dom import (
    ALL_KINDS,
    EmbeddingKind,
    NodeKind,
    extract_tokens,
    parse_html,
    to_html,
    tokenize_text,
)

LISTING1_CONTENT = (
    "item a detail page item a 9.99 $ buy detailed description for item a reviews "
    "+ add review quite good by alice does its job by bob"
).split()
LISTING1_CONTENT_TAGS = (
    "html head title item a detail page link body img h1 item a img p 9.99 $ a buy p detailed "
    "description for item a h2 reviews a + add review table tr td quite good by a alice td img "
    "tr td does its job by a bob td img"
).split()
# hand application of the traversal: script/comment skipped, link kept
LISTING1_TAGS = "html head title link body img h1 img p a p h2 a table tr td a td img tr td a td img".split()


def test_listing1_content(listing1_html):
    assert list(extract_tokens(parse_html(listing1_html), "content").tokens) == LISTING1_CONTENT
    assert len(LISTING1_CONTENT) == 27


def test_listing1_content_tags(listing1_html):
    assert list(extract_tokens(parse_html(listing1_html), EmbeddingKind.CONTENT_TAGS).tokens) == LISTING1_CONTENT_TAGS


def test_listing1_tags(listing1_html):
    assert list(extract_tokens(parse_html(listing1_html), EmbeddingKind.TAGS).tokens) == LISTING1_TAGS


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("9.99 $", ["9.99", "$"]),
        ("+ ADD REVIEW", ["+", "add", "review"]),
        ("", []),
        ("  Item   A.  ", ["item", "a"]),
        ("(hello), world!", ["hello", "world"]),
        ("...", ["..."]),
    ],
)
def test_tokenize_text(raw, expected):
    assert tokenize_text(raw) == expected


def test_empty_document_has_synthesized_root():
    tree = parse_html("")
    assert tree.root.tag == "html"
    assert list(extract_tokens(tree, "tags").tokens) == ["html"]
    assert extract_tokens(tree, "content").tokens == ()


def test_implied_end_tags():
    assert to_html(parse_html("<p>a<p>b")) == "<html><body><p>a</p><p>b</p></body></html>"


def test_unclosed_and_stray_tags_are_tolerated():
    tree = parse_html("<div><span>x</div></em><ul><li>1<li>2</ul>")
    assert list(extract_tokens(tree, "tags").tokens) == ["html", "body", "div", "span", "ul", "li", "li"]


def test_script_style_comment_contribute_nothing():
    html = "<body><script>var secret = 1;</script><style>.x{}</style><!-- hidden --><p>shown</p></body>"
    toks = extract_tokens(parse_html(html), "content-tags").tokens
    assert toks == ("html", "body", "p", "shown")
    kinds = {n.kind for n in parse_html(html).root.iter()}
    assert NodeKind.SCRIPT_OR_STYLE in kinds and NodeKind.COMMENT in kinds


def test_bytes_input_decodes_leniently():
    tree = parse_html(b"<p>caf\xc3\xa9 \xff</p>")
    assert extract_tokens(tree, "content").tokens[0] == "café"


def test_node_paths_resolve():
    tree = parse_html("<body><div><a>x</a><a>y</a></div></body>")
    for path, node in tree.iter_with_paths():
        assert tree.node_at(path) is node
    assert tree.node_at((99,)) is None


# ---------------------------------------------------------------------------
# properties over generated documents

_TAGS = ["div", "p", "span", "a", "ul", "li", "table", "tr", "td", "h1", "b", "section"]
_words = st.text(alphabet=string.ascii_letters + string.digits + " .,$+!", min_size=0, max_size=12)


@st.composite
def fragments(draw, depth=0):
    parts = []
    for _ in range(draw(st.integers(0, 3))):
        choice = draw(st.integers(0, 5 if depth < 3 else 1))
        if choice <= 1:
            parts.append(draw(_words).replace("<", ""))
        elif choice == 2:
            parts.append(f"<script>{draw(_words)}</script>")
        elif choice == 3:
            parts.append(f"<!--{draw(_words)}-->")
        else:
            tag = draw(st.sampled_from(_TAGS))
            inner = draw(fragments(depth + 1))
            close = draw(st.booleans())
            parts.append(f"<{tag}>{inner}" + (f"</{tag}>" if close else ""))
    return "".join(parts)


@settings(max_examples=150, deadline=None)
@given(fragments())
def test_interleaving_consistency(doc):
    tree = parse_html(doc)
    both = extract_tokens(tree, EmbeddingKind.CONTENT_TAGS).tokens
    tags = extract_tokens(tree, EmbeddingKind.TAGS).tokens
    content = extract_tokens(tree, EmbeddingKind.CONTENT).tokens
    # rebuild the mixed stream by walking the tree and tagging each token
    mixed = []

    def walk(node):
        if node.kind is NodeKind.ELEMENT:
            mixed.append(("tag", node.tag))
            for c in node.children:
                walk(c)
        elif node.kind is NodeKind.TEXT:
            mixed.extend(("text", t) for t in tokenize_text(node.text))

    walk(tree.root)
    assert tuple(t for _, t in mixed) == both
    assert tuple(t for k, t in mixed if k == "tag") == tags
    assert tuple(t for k, t in mixed if k == "text") == content


@settings(max_examples=150, deadline=None)
@given(fragments())
def test_reserialize_idempotence(doc):
    tree = parse_html(doc)
    again = parse_html(to_html(tree))
    for kind in ALL_KINDS:
        assert extract_tokens(again, kind) == extract_tokens(tree, kind)


@settings(max_examples=150, deadline=None)
@given(fragments())
def test_no_token_from_hidden_subtrees(doc):
    marker = "zzqhidden"
    html = f"<script>{marker}</script>{doc}<!--{marker}--><style>{marker}</style>"
    for kind in ALL_KINDS:
        toks = extract_tokens(parse_html(html), kind).tokens
        assert marker not in toks
        assert all(t == t.lower() and t and not any(c.isspace() for c in t) for t in toks)
