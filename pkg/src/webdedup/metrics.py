"""Detection metrics for pair classifiers and intra-pair metrics for crawl models."""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dom import parse_html
from .errors import DuplicateRow, EmptyDataset, SchemaError, UniverseMismatch
from .saf.classifiers import PairLabel, TrainedClassifier
from .saf.features import DEFAULT_INFER_EPOCHS, embed_page, similarity_from_embeddings


def _ratio(num, den, empty=0.0):
    return num / den if den else empty


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class DetectionReport:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        return _f1(self.precision, self.recall)

    def metrics(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall, "f1": self.f1}

    def to_dict(self) -> dict:
        return {**self.metrics(), **asdict(self)}

    def __add__(self, other: "DetectionReport") -> "DetectionReport":
        return DetectionReport(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def detection_report(y_true, y_pred) -> DetectionReport:
    """Confusion counts with Clone (1) as the positive class."""
    t = np.asarray(y_true, dtype=int).ravel()
    p = np.asarray(y_pred, dtype=int).ravel()
    if t.shape != p.shape:
        raise ValueError(f"{t.size} labels but {p.size} predictions")
    return DetectionReport(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == 0) & (p == 1))),
        tn=int(np.sum((t == 0) & (p == 0))),
        fn=int(np.sum((t == 1) & (p == 0))),
    )


def macro_average(reports) -> dict:
    """Unweighted mean of per-report metrics (each dataset counts once)."""
    reports = list(reports)
    if not reports:
        raise EmptyDataset("no reports to average")
    keys = ("accuracy", "precision", "recall", "f1")
    return {k: float(np.mean([r.metrics()[k] for r in reports])) for k in keys}


def pooled(reports) -> DetectionReport:
    """Pair-weighted aggregate: confusion counts summed over all datasets."""
    out = DetectionReport(0, 0, 0, 0)
    for r in reports:
        out = out + r
    return out


# ---------------------------------------------------------------------------
# labeled pairs


@dataclass(frozen=True)
class LabeledPair:
    page_a: Path
    page_b: Path
    label: PairLabel


def _read_csv(path, header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != list(header):
            raise SchemaError(f"{path}: expected header {','.join(header)}", row=1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(f"expected {len(header)} fields, got {len(row)}", row=reader.line_num)
            yield reader.line_num, [c.strip() for c in row]


def load_labeled_pairs(path) -> list:
    """Pairs from a ``page_a,page_b,label`` CSV; page paths are relative to the CSV.

    Row numbers in errors are file line numbers (the header is line 1).
    """
    base = Path(path).parent
    pairs, seen = [], {}
    for line, (a, b, label) in _read_csv(path, ("page_a", "page_b", "label")):
        if label not in ("0", "1"):
            raise SchemaError(f"label must be 0 or 1, got {label!r}", row=line)
        if not a or not b:
            raise SchemaError("empty page path", row=line)
        pa, pb = base / a, base / b
        for p in (pa, pb):
            if not p.is_file():
                raise SchemaError(f"page file not found: {p}", row=line)
        key = frozenset((pa.resolve(), pb.resolve()))
        if key in seen:
            raise DuplicateRow(f"pair ({a}, {b}) already given on line {seen[key]}", row=line)
        seen[key] = line
        pairs.append(LabeledPair(pa, pb, PairLabel(int(label))))
    if not pairs:
        raise EmptyDataset(f"{path}: no labeled pairs")
    return pairs


def eval_detection(
    classifier: TrainedClassifier,
    pairs,
    models,
    kinds=None,
    infer_epochs=DEFAULT_INFER_EPOCHS,
    seed=0,
    workers=1,
) -> DetectionReport:
    """Classify every labeled pair and tally the confusion matrix.

    Each distinct page is embedded once; with ``workers > 1`` the embeddings
    are computed in a thread pool (the tally does not depend on order).
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyDataset("no labeled pairs to evaluate")
    kinds = classifier.feature_set if kinds is None else tuple(kinds)
    pages = sorted({p for pair in pairs for p in (pair.page_a, pair.page_b)})

    def embed(p):
        return embed_page(parse_html(Path(p).read_bytes()), kinds, models, infer_epochs, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            embedded = dict(zip(pages, pool.map(embed, pages)))
    else:
        embedded = {p: embed(p) for p in pages}
    X = np.array([similarity_from_embeddings(embedded[p.page_a], embedded[p.page_b], kinds).scores for p in pairs])
    y_pred = classifier.predict(X)
    return detection_report([int(p.label) for p in pairs], y_pred)


# ---------------------------------------------------------------------------
# clusterings and model quality


def load_clustering(path) -> dict:
    """``page_id,cluster_id`` CSV to a page → cluster mapping."""
    out, seen = {}, {}
    for line, (page, cluster) in _read_csv(path, ("page_id", "cluster_id")):
        if not page or not cluster:
            raise SchemaError("empty page_id or cluster_id", row=line)
        if page in seen:
            raise DuplicateRow(f"page {page!r} already assigned on line {seen[page]}", row=line)
        seen[page] = line
        out[page] = cluster
    return out


def intra_pairs(clustering) -> set:
    """All unordered pairs of pages sharing a cluster, as sorted 2-tuples."""
    groups: dict = {}
    for page, cluster in clustering.items():
        groups.setdefault(cluster, []).append(page)
    pairs = set()
    for members in groups.values():
        for a, b in itertools.combinations(sorted(members), 2):
            pairs.add((a, b))
    return pairs


@dataclass(frozen=True)
class ModelQualityReport:
    intra_precision: float
    intra_recall: float
    intra_f1: float
    ip_gt: int
    ip_tool: int
    overlap: int

    def to_dict(self) -> dict:
        return asdict(self)


def model_quality(tool, gt) -> ModelQualityReport:
    """Intra-pair precision/recall of a tool clustering against ground truth.

    Empty-set conventions: with no tool intra-pairs precision is 1 if the
    ground truth has none either and 0 otherwise; with no ground-truth
    intra-pairs recall is 1.
    """
    if set(tool) != set(gt):
        only_tool = sorted(set(tool) - set(gt))
        only_gt = sorted(set(gt) - set(tool))
        raise UniverseMismatch(f"page universes differ (tool only: {only_tool[:5]}, gt only: {only_gt[:5]})")
    ip_tool, ip_gt = intra_pairs(tool), intra_pairs(gt)
    common = len(ip_tool & ip_gt)
    p = _ratio(common, len(ip_tool), empty=1.0 if not ip_gt else 0.0)
    r = _ratio(common, len(ip_gt), empty=1.0)
    return ModelQualityReport(p, r, _f1(p, r), len(ip_gt), len(ip_tool), common)


# ---------------------------------------------------------------------------
# output


def format_table(rows, decimals=2) -> str:
    """Aligned two-column ``name value`` table; floats are rounded to ``decimals``."""
    cells = [(str(k), f"{v:.{decimals}f}" if isinstance(v, float) else str(v)) for k, v in rows]
    width = max(len(k) for k, _ in cells)
    vwidth = max(len(v) for _, v in cells)
    return "\n".join(f"{k:<{width}}  {v:>{vwidth}}" for k, v in cells)


def report_json(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True)
