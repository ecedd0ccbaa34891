"""Command-line entry point.

Exit codes: 0 on success, 1 on a runtime failure (e.g. the app driver
breaks mid-crawl), 2 on invalid input, configuration or usage.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULTS, load_config, resolve
from .crawl import CrawlBudget, FixtureDriver, StaticSiteDriver, crawl, load_crawl_model, load_scenario, save_crawl_model
from .dom import ALL_KINDS, EmbeddingKind, extract_tokens, parse_html
from .embedding import Hyperparams, load_model, save_model, train_dbow
from .errors import DriverFailure, WebDedupError
from .metrics import (
    eval_detection,
    format_table,
    load_clustering,
    load_labeled_pairs,
    macro_average,
    model_quality,
    pooled,
    report_json,
)
from .saf import (
    AlwaysDistinctSAF,
    EmbeddingSAF,
    OracleSAF,
    embed_page,
    feature_set,
    fixed_threshold,
    format_feature_set,
    load_classifier,
    save_classifier,
    train_classifier,
)
from .saf.classifiers import canonical_kind
from .saf.features import similarity_from_embeddings
from .testgen import export_suite, segment

logger = logging.getLogger("webdedup")

BUILTIN_DATA = {
    "listing1": "listing1.html",
    "worked-example-gt": "worked_example_gt.csv",
    "worked-example-tool": "worked_example_tool.csv",
}


class UsageError(Exception):
    """Bad input detected by the CLI itself; maps to exit code 2."""


# ---------------------------------------------------------------------------
# helpers


def _data_path(arg: str, stack: contextlib.ExitStack) -> Path:
    """Resolve ``builtin:NAME`` to a bundled data file, anything else to a path."""
    if arg.startswith("builtin:"):
        name = arg[len("builtin:") :]
        if name not in BUILTIN_DATA:
            raise UsageError(f"unknown bundled file {name!r}; choose from {', '.join(BUILTIN_DATA)}")
        ref = resources.files("webdedup.data").joinpath(BUILTIN_DATA[name])
        return stack.enter_context(resources.as_file(ref))
    return Path(arg)


def _read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _parse_kind(s: str) -> EmbeddingKind:
    try:
        return EmbeddingKind.parse(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_models(specs) -> dict:
    """``kind=path`` flags to a kind → model mapping."""
    models = {}
    for spec in specs or ():
        kind_s, sep, path = spec.partition("=")
        if not sep:
            raise UsageError(f"--model expects kind=path, got {spec!r}")
        kind = EmbeddingKind.parse(kind_s)
        if not Path(path).is_file():
            raise UsageError(f"model file not found: {path}")
        model = load_model(path)
        if model.kind != kind:
            raise UsageError(f"{path} holds a {model.kind.slug} model, not {kind.slug}")
        models[kind] = model
    return models


def _require_models(models, kinds):
    missing = [k.slug for k in kinds if k not in models]
    if missing:
        raise UsageError(f"missing --model for: {', '.join(missing)}")


def _settings(args) -> dict:
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {k: getattr(args, k, None) for k in DEFAULTS}
    return resolve(file_values, overrides)


def _emit(args, doc: dict, text: str):
    print(report_json(doc) if args.json else text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_tokenize(args) -> int:
    with contextlib.ExitStack() as stack:
        data = _read_bytes(_data_path(args.html, stack))
    for token in extract_tokens(parse_html(data), args.kind).tokens:
        print(token)
    return 0


def cmd_train_embeddings(args) -> int:
    cfg = _settings(args)
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise UsageError(f"corpus directory not found: {corpus_dir}")
    files = sorted(p for p in corpus_dir.glob("*.html") if p.is_file())
    if not files:
        raise UsageError(f"no *.html files in {corpus_dir}")
    corpus = [extract_tokens(parse_html(_read_bytes(p)), args.kind) for p in files]
    hyper = Hyperparams(
        dim=cfg["vector_size"],
        epochs=cfg["epochs"],
        negative_samples=cfg["negative"],
        initial_lr=cfg["alpha"],
        final_lr=cfg["min_alpha"],
        min_count=cfg["min_count"],
        seed=cfg["seed"],
    )
    model = train_dbow(corpus, hyper, workers=cfg["workers"])
    save_model(model, args.out)
    final = float(model.loss_history[-1])
    doc = {
        "kind": model.kind.slug,
        "documents": len(files),
        "vocabulary": len(model.vocab),
        "dim": model.dim,
        "epochs": hyper.epochs,
        "final_loss": final,
        "output": str(args.out),
    }
    text = f"trained {model.kind.slug} model on {len(files)} documents ({len(model.vocab)} tokens)\nfinal epoch loss: {final:.6f}"
    _emit(args, doc, text)
    return 0


def _pair_features(pairs, models, kinds, cfg):
    pages = sorted({p for pair in pairs for p in (pair.page_a, pair.page_b)})
    emb = {p: embed_page(parse_html(_read_bytes(p)), kinds, models, cfg["infer_epochs"], cfg["seed"]) for p in pages}
    X = np.array([similarity_from_embeddings(emb[p.page_a], emb[p.page_b], kinds).scores for p in pairs])
    y = np.array([int(p.label) for p in pairs])
    return X, y


def cmd_train_saf(args) -> int:
    cfg = _settings(args)
    kind = canonical_kind(cfg["classifier"])
    kinds = feature_set(cfg["kinds"])
    models = _load_models(args.model)
    _require_models(models, kinds)
    pairs = load_labeled_pairs(args.pairs)
    X, y = _pair_features(pairs, models, kinds, cfg)
    params = {"k": cfg["k"], "n_trees": cfg["n_trees"], "seed": cfg["seed"]}
    clf = train_classifier(kind, X, y, kinds, **params)
    save_classifier(clf, args.out)
    acc = float(np.mean(clf.predict(X) == y))
    doc = {"classifier": clf.kind, "kinds": format_feature_set(kinds), "pairs": len(pairs), "training_accuracy": acc, "degenerate": clf.degenerate}
    _emit(args, doc, f"trained {clf.describe()} on {len(pairs)} pairs\ntraining accuracy: {acc:.3f}")
    return 0


def _make_driver(args):
    if (args.scenario is None) == (args.site is None):
        raise UsageError("give exactly one of --scenario or --site")
    if args.scenario is not None:
        return FixtureDriver(load_scenario(args.scenario))
    if not Path(args.site).is_dir():
        raise UsageError(f"site directory not found: {args.site}")
    return StaticSiteDriver(args.site, index=args.index)


def _make_saf(args, cfg, driver):
    if args.saf == "oracle":
        return OracleSAF(driver.logical_page_of)
    if args.saf == "distinct":
        return AlwaysDistinctSAF()
    if (args.bundle is None) == (args.threshold is None):
        raise UsageError("--saf embedding needs exactly one of --bundle or --threshold")
    if args.bundle is not None:
        clf = load_classifier(args.bundle)
    else:
        clf = fixed_threshold(args.threshold, cfg["kinds"])
    models = _load_models(args.model)
    _require_models(models, clf.feature_set)
    return EmbeddingSAF(models, clf, infer_epochs=cfg["infer_epochs"], seed=cfg["seed"])


def cmd_crawl(args) -> int:
    cfg = _settings(args)
    if cfg["max_events"] is None and cfg["max_seconds"] is None:
        raise UsageError("set a crawl budget with --max-events and/or --max-seconds")
    driver = _make_driver(args)
    saf = _make_saf(args, cfg, driver)
    budget = CrawlBudget(cfg["max_events"], cfg["max_seconds"])
    model = crawl(driver, saf, budget, workers=cfg["workers"])
    save_crawl_model(model, args.out, logical_of=driver.logical_page_of)
    pages = [driver.logical_page_of(s.html) for s in model.states]
    explored = sum(1 for e in model.event_log if not e.replay)
    doc = {
        "states": len(model.states),
        "edges": len(model.edges),
        "events_fired": explored,
        "logical_pages": pages,
        "error": model.error,
        "output": str(args.out),
    }
    text = f"{len(model.states)} states, {len(model.edges)} edges, {explored} events fired\nstates: {', '.join(pages)}"
    if model.error:
        text += f"\ncrawl stopped early: {model.error}"
    _emit(args, doc, text)
    return 1 if model.error else 0


def cmd_gen_tests(args) -> int:
    model = load_crawl_model(args.crawl_model)
    suite = segment(model)
    written = export_suite(suite, args.out, args.format)
    doc = {
        "paths": len(suite.paths),
        "origins": [p.origin.value for p in suite.paths],
        "files": [str(p) for p in written],
        "model_ref": suite.model_ref,
    }
    _emit(args, doc, f"{len(suite.paths)} test paths written to {args.out}")
    return 0


def cmd_eval_pairs(args) -> int:
    cfg = _settings(args)
    clf = load_classifier(args.bundle)
    models = _load_models(args.model)
    _require_models(models, clf.feature_set)
    reports = []
    for path in args.pairs:
        pairs = load_labeled_pairs(path)
        rep = eval_detection(clf, pairs, models, infer_epochs=cfg["infer_epochs"], seed=cfg["seed"], workers=cfg["workers"])
        reports.append((path, rep))
    doc = {"classifier": clf.describe(), "datasets": [{"pairs": p, **r.to_dict()} for p, r in reports]}
    blocks = [f"[{path}]\n" + format_table(list(r.to_dict().items()), args.decimals) for path, r in reports]
    if len(reports) > 1:
        total = pooled(r for _, r in reports)
        macro = macro_average(r for _, r in reports)
        doc["pooled"] = total.to_dict()
        doc["macro"] = macro
        blocks.append("[pooled]\n" + format_table(list(total.to_dict().items()), args.decimals))
        blocks.append("[macro]\n" + format_table(list(macro.items()), args.decimals))
    _emit(args, doc, "\n\n".join(blocks))
    return 0


def cmd_eval_model(args) -> int:
    with contextlib.ExitStack() as stack:
        tool = load_clustering(_data_path(args.tool, stack))
        gt = load_clustering(_data_path(args.gt, stack))
    rep = model_quality(tool, gt)
    rows = [
        ("precision", rep.intra_precision),
        ("recall", rep.intra_recall),
        ("F1", rep.intra_f1),
        ("IP_GT", rep.ip_gt),
        ("IP_tool", rep.ip_tool),
        ("overlap", rep.overlap),
    ]
    _emit(args, rep.to_dict(), format_table(rows, args.decimals))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_session(p, workers=True):
    p.add_argument("--config", help="flat key = value settings file (flags override it)")
    p.add_argument("--seed", type=int, help=f"random seed (default {DEFAULTS['seed']})")
    if workers:
        p.add_argument("--workers", type=int, help="worker threads (default 1; 1 is bit-reproducible)")
    p.add_argument("--json", action="store_true", help="print a machine-readable JSON report")


def _add_models(p):
    p.add_argument("--model", action="append", metavar="KIND=PATH", help="embedding model per kind (repeatable)")
    p.add_argument("--infer-epochs", dest="infer_epochs", type=int, help="inference passes per page (default 50)")


def build_parser() -> argparse.ArgumentParser:
    kinds_help = ", ".join(k.slug for k in ALL_KINDS)
    parser = argparse.ArgumentParser(prog="webdedup", description="Near-duplicate aware crawling and test generation for web apps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("tokenize", help="print a page's token sequence, one token per line")
    p.add_argument("html", help="HTML file, or builtin:listing1")
    p.add_argument("--kind", type=_parse_kind, default=EmbeddingKind.CONTENT_TAGS, help=f"token sequence kind ({kinds_help})")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("train-embeddings", help="train a PV-DBOW model on a directory of HTML pages")
    p.add_argument("corpus", help="directory of *.html files (sorted by name)")
    p.add_argument("--kind", type=_parse_kind, required=True, help=f"token sequence kind ({kinds_help})")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--vector-size", dest="vector_size", type=int, help="embedding dimension (default 100)")
    p.add_argument("--epochs", type=int, help="training epochs (default 100)")
    p.add_argument("--negative", type=int, help="negative samples per token (default 5)")
    p.add_argument("--alpha", type=float, help="initial learning rate (default 0.025)")
    p.add_argument("--min-alpha", dest="min_alpha", type=float, help="final learning rate (default 1e-4)")
    p.add_argument("--min-count", dest="min_count", type=int, help="drop rarer tokens (default 2)")
    _add_session(p)
    p.set_defaults(func=cmd_train_embeddings)

    p = sub.add_parser("train-saf", help="train a pair classifier on labeled page pairs")
    p.add_argument("pairs", help="CSV with header page_a,page_b,label")
    p.add_argument("--out", required=True, help="classifier bundle to write")
    p.add_argument("--classifier", help="threshold, knn, decision-tree, naive-bayes, svm, random-forest or ensemble (default svm)")
    p.add_argument("--kinds", help=f"comma-separated embedding kinds used as features (default {DEFAULTS['kinds']})")
    p.add_argument("--k", type=int, help="neighbours for knn (default 5)")
    p.add_argument("--n-trees", dest="n_trees", type=int, help="trees for random-forest (default 50)")
    _add_models(p)
    _add_session(p, workers=False)
    p.set_defaults(func=cmd_train_saf)

    p = sub.add_parser("crawl", help="explore an app and write the inferred crawl model")
    src = p.add_argument_group("application")
    src.add_argument("--scenario", help="scenario JSON file, or running-example")
    src.add_argument("--site", help="directory of static HTML pages")
    src.add_argument("--index", default="index.html", help="index page of --site (default index.html)")
    p.add_argument("--saf", choices=("oracle", "distinct", "embedding"), default="embedding", help="state abstraction (default embedding)")
    p.add_argument("--bundle", help="trained classifier bundle for --saf embedding")
    p.add_argument("--threshold", type=float, help="fixed similarity threshold instead of a bundle")
    p.add_argument("--kinds", help="embedding kinds for --threshold (default content-tags)")
    p.add_argument("--max-events", dest="max_events", type=int, help="budget: exploratory events")
    p.add_argument("--max-seconds", dest="max_seconds", type=float, help="budget: wall-clock seconds")
    p.add_argument("--out", required=True, help="crawl model JSON to write")
    _add_models(p)
    _add_session(p)
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("gen-tests", help="segment a crawl model into test paths")
    p.add_argument("crawl_model", help="crawl model JSON written by crawl")
    p.add_argument("--out", required=True, help="suite JSON file, or a directory for --format script")
    p.add_argument("--format", choices=("json", "script"), default="json", help="output format (default json)")
    p.add_argument("--json", action="store_true", help="print a machine-readable JSON report")
    p.set_defaults(func=cmd_gen_tests)

    p = sub.add_parser("eval-pairs", help="detection metrics of a classifier bundle on labeled pairs")
    p.add_argument("pairs", nargs="+", help="one or more labeled-pairs CSVs (several are also pooled and macro-averaged)")
    p.add_argument("--bundle", required=True, help="classifier bundle")
    p.add_argument("--decimals", type=int, default=2, help="decimals in the text table (default 2)")
    _add_models(p)
    _add_session(p)
    p.set_defaults(func=cmd_eval_pairs)

    p = sub.add_parser("eval-model", help="intra-pair precision/recall of a clustering against ground truth")
    p.add_argument("--tool", required=True, help="page_id,cluster_id CSV induced by the crawl model (or builtin:worked-example-tool)")
    p.add_argument("--gt", required=True, help="ground-truth page_id,cluster_id CSV (or builtin:worked-example-gt)")
    p.add_argument("--decimals", type=int, default=2, help="decimals in the text table (default 2)")
    p.add_argument("--json", action="store_true", help="print a machine-readable JSON report")
    p.set_defaults(func=cmd_eval_model)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, FileNotFoundError, IsADirectoryError) as exc:
        # WebDedupError validation subclasses are ValueErrors
        print(f"webdedup {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DriverFailure, WebDedupError, OSError) as exc:
        print(f"webdedup {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
