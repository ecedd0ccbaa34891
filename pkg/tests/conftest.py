from importlib import resources

import jinja2
import pytest

from webdedup.crawl import load_scenario
from webdedup.dom import EmbeddingKind, extract_tokens, parse_html
from webdedup.embedding import Hyperparams, train_dbow


@pytest.fixture(scope="session")
def listing1_html():
    return resources.files("webdedup.data").joinpath("listing1.html").read_text("utf-8")


@pytest.fixture(scope="session")
def scenario():
    return load_scenario("running-example")


def render_page(scenario, name, reviews=0):
    return jinja2.Environment().from_string(scenario.pages[name]).render(reviews=reviews)


@pytest.fixture(scope="session")
def fixture_pages(scenario):
    """Rendered running-example pages: catalog, buy and detail with 0..2 extra reviews."""
    pages = {"catalog": render_page(scenario, "catalog"), "buy": render_page(scenario, "buy")}
    for r in range(3):
        pages[f"detail{r}"] = render_page(scenario, "detail", r)
    return pages


@pytest.fixture(scope="session")
def fixture_model(fixture_pages):
    kind = EmbeddingKind.CONTENT_TAGS
    corpus = [extract_tokens(parse_html(h), kind) for h in fixture_pages.values()]
    return train_dbow(corpus, Hyperparams(seed=0))


def synthetic_corpus(kind=EmbeddingKind.CONTENT):
    from webdedup.dom import TokenSequence

    a = ["buy", "item", "now"] * 10
    b = ["login", "user", "password"] * 10
    return [TokenSequence(kind, tuple(a)), TokenSequence(kind, tuple(a)), TokenSequence(kind, tuple(b))]


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion, PASS only if all of its checks pass

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "passed": []})
    (entry["passed"] if rep.passed else entry["failed"]).append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
