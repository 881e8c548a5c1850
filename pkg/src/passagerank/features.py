"""Fusion features: document homogeneity, query statistics, list feature.

Three groups feed the fusion layer:

* four document-homogeneity scores in [0,1]: a length score normalized
  by the corpus log-length extrema, a term-entropy score, and two
  tf-idf cosine scores (mean pairwise passage similarity, mean
  document-passage similarity);
* eight summary statistics (sum, population std, max/min ratio, max,
  arithmetic/geometric/harmonic means, coefficient of variation) over
  each of three per-term bases: IDF, the negated ICF magnitude, and
  SCQ - 24 values;
* the list feature: mean whole-document query likelihood of the top
  retrieved documents.

Column order is fixed and documented by ``feature_names``; exports and
model files carry the names so a vector is never interpreted against
the wrong layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import CorpusIndex, Document, Query
from .passages import FilterSpec, SmoothingConfig, extract_passages

HOMOGENEITY_NAMES = ("h_length", "h_ent", "h_intpsg", "h_docpsg")
QUERY_STAT_NAMES = ("sum", "std", "max_min_ratio", "max", "amean", "gmean", "hmean", "cv")
QUERY_BASE_NAMES = ("idf", "nicf", "scq")
LIST_FEATURE_NAME = "list_mean"
FEATURE_SETS = ("doc", "query", "doc+query")

_POSITIVE_FLOOR = 1e-12


@dataclass(frozen=True)
class HomogeneityScores:
    length: float
    ent: float
    intpsg: float
    docpsg: float

    def by_kind(self, kind: str) -> float:
        try:
            return {
                "length": self.length,
                "ent": self.ent,
                "intpsg": self.intpsg,
                "docpsg": self.docpsg,
            }[kind]
        except KeyError:
            raise ValueError(f"unknown homogeneity kind {kind!r}") from None

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.length, self.ent, self.intpsg, self.docpsg], dtype=np.float64
        )


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine with the zero-vector conventions: cos(0,0)=1, cos(0,x)=0."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return _clamp01(float(np.dot(a, b)) / (na * nb))


def homogeneity(
    doc: Document | str, index: CorpusIndex, f: FilterSpec
) -> HomogeneityScores:
    """The four homogeneity scores of one indexed document.

    The passage-based scores (intpsg, docpsg) use filter ``f``'s spans;
    tf-idf weights are tf * ln(|D| / D_t). Degenerate cases: a corpus
    where every document has the same length gives h_length = 1; a
    single-token document gives h_ent = 1; fewer than two passages give
    h_intpsg = 1.
    """
    if f.is_infinite:
        raise ValueError("homogeneity needs a finite passage filter")
    doc_id = doc if isinstance(doc, str) else doc.doc_id
    idx = index.doc_index(doc_id)
    tokens = index.doc_tokens(idx)
    n_d = int(tokens.shape[0])

    if index.max_log_len == index.min_log_len:
        h_length = 1.0
    else:
        h_length = 1.0 - (math.log(n_d) - index.min_log_len) / (
            index.max_log_len - index.min_log_len
        )
    h_length = _clamp01(h_length)

    uniq, inv, counts = np.unique(tokens, return_inverse=True, return_counts=True)
    if n_d == 1:
        h_ent = 1.0
    else:
        p = counts / n_d
        entropy = float(-(p * np.log(p)).sum())
        h_ent = _clamp01(1.0 - entropy / math.log(n_d))

    idf = np.log(index.num_docs / index.df[uniq])
    doc_vec = counts * idf
    spans = extract_passages(n_d, f)
    span_vecs = np.empty((len(spans), uniq.shape[0]), dtype=np.float64)
    for k, sp in enumerate(spans):
        tf = np.bincount(
            inv[sp.start : sp.start + sp.length], minlength=uniq.shape[0]
        )
        span_vecs[k] = tf * idf

    if len(spans) < 2:
        h_intpsg = 1.0
    else:
        total = 0.0
        pairs = 0
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                total += _cosine(span_vecs[i], span_vecs[j])
                pairs += 1
        h_intpsg = _clamp01(total / pairs)

    h_docpsg = _clamp01(
        sum(_cosine(doc_vec, span_vecs[k]) for k in range(len(spans))) / len(spans)
    )
    return HomogeneityScores(h_length, h_ent, h_intpsg, h_docpsg)


# ---------------------------------------------------------------------------
# query-side features
# ---------------------------------------------------------------------------


def summary_stats(values: Sequence[float]) -> np.ndarray:
    """The eight summary statistics over a non-empty value list.

    Values are expected non-negative; the ratio, geometric, and harmonic
    statistics are computed on values floored at 1e-12 so an all-zero
    base (possible only in a degenerate single-term corpus) stays
    finite.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot summarize an empty value list")
    amean = float(v.mean())
    std = float(v.std())
    pos = np.maximum(v, _POSITIVE_FLOOR)
    return np.array(
        [
            float(v.sum()),
            std,
            float(pos.max() / pos.min()),
            float(v.max()),
            amean,
            float(np.exp(np.log(pos).mean())),
            float(pos.size / (1.0 / pos).sum()),
            std / amean if amean != 0.0 else 0.0,
        ],
        dtype=np.float64,
    )


def query_features(query: Query, index: CorpusIndex, floor: int = 1) -> np.ndarray:
    """24-value block: summary stats of IDF, -ICF, and SCQ per query term.

    Statistics run over the query's token sequence (duplicates counted).
    cf and D_t are floored at max(floor, 1): these formulas need strictly
    positive counts regardless of the scoring-time OOV policy.
    """
    eff_floor = max(int(floor), 1)
    n_docs = index.num_docs
    idf = np.empty(query.n_q, dtype=np.float64)
    nicf = np.empty(query.n_q, dtype=np.float64)
    scq = np.empty(query.n_q, dtype=np.float64)
    for i, t in enumerate(query.terms):
        cf_t = index.corpus_freq(t, eff_floor)
        df_t = index.doc_freq(t, eff_floor)
        idf[i] = math.log((n_docs + 0.5) / df_t) / (n_docs + 1)
        nicf[i] = -math.log(cf_t / index.total_len)
        scq[i] = (1.0 + math.log(cf_t)) * math.log(1.0 + n_docs / df_t)
    return np.concatenate([summary_stats(idf), summary_stats(nicf), summary_stats(scq)])


def mean_top_scores(scores: Sequence[float], k: int = 2000) -> float:
    """Mean of the top-min(k, len) values; the list feature over a run."""
    if len(scores) == 0:
        raise ValueError("list feature needs at least one retrieved document")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    arr = np.sort(np.asarray(scores, dtype=np.float64))[::-1][: min(k, len(scores))]
    return float(arr.mean())


def list_feature(
    query: Query,
    index: CorpusIndex,
    k: int = 2000,
    s: SmoothingConfig | None = None,
    floor: int = 1,
) -> float:
    """Mean whole-document QL log score of the top-min(k, |D|) documents."""
    from .retrieval import rank_documents  # deferred: retrieval imports passages

    ranked = rank_documents(query, index, s, top_k=k, floor=floor)
    return mean_top_scores([score for _, score in ranked], k)


# ---------------------------------------------------------------------------
# fusion feature vectors
# ---------------------------------------------------------------------------


def feature_names(feature_set: str) -> tuple[str, ...]:
    """The documented column order for a feature-set toggle."""
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    names: list[str] = []
    if feature_set in ("doc", "doc+query"):
        names.extend(HOMOGENEITY_NAMES)
    if feature_set in ("query", "doc+query"):
        names.extend(
            f"{base}_{stat}" for base in QUERY_BASE_NAMES for stat in QUERY_STAT_NAMES
        )
        names.append(LIST_FEATURE_NAME)
    return tuple(names)


class FeatureExtractor:
    """Assembles fusion feature vectors with per-document caching.

    Homogeneity scores depend only on the document, so they are cached
    across queries; the query block and list feature are computed once
    per query by the caller and broadcast over its candidates.
    """

    def __init__(
        self,
        index: CorpusIndex,
        feature_set: str = "doc+query",
        hom_filter: FilterSpec | None = None,
        floor: int = 1,
    ):
        if feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {feature_set!r}")
        self.index = index
        self.feature_set = feature_set
        self.with_doc = feature_set in ("doc", "doc+query")
        self.with_query = feature_set in ("query", "doc+query")
        if self.with_doc:
            if hom_filter is None or hom_filter.is_infinite:
                raise ValueError(
                    "document homogeneity features need a finite passage filter"
                )
        self.hom_filter = hom_filter
        self.floor = floor
        self.names = feature_names(feature_set)
        self._hom_cache: dict[int, np.ndarray] = {}

    def doc_block(self, doc_id: str) -> np.ndarray:
        idx = self.index.doc_index(doc_id)
        cached = self._hom_cache.get(idx)
        if cached is None:
            cached = homogeneity(doc_id, self.index, self.hom_filter).as_array()
            self._hom_cache[idx] = cached
        return cached

    def query_block(self, query: Query, list_score: float) -> np.ndarray:
        block = query_features(query, self.index, self.floor)
        return np.concatenate([block, [float(list_score)]])

    def matrix(
        self, query: Query, doc_ids: Sequence[str], list_score: float
    ) -> np.ndarray:
        """Feature matrix for one query's candidate list, rows per doc."""
        n = len(doc_ids)
        cols: list[np.ndarray] = []
        if self.with_doc:
            doc_part = np.empty((n, len(HOMOGENEITY_NAMES)), dtype=np.float64)
            for r, doc_id in enumerate(doc_ids):
                doc_part[r] = self.doc_block(doc_id)
            cols.append(doc_part)
        if self.with_query:
            qb = self.query_block(query, list_score)
            cols.append(np.broadcast_to(qb, (n, qb.shape[0])))
        return np.hstack(cols) if len(cols) > 1 else np.array(cols[0], dtype=np.float64)


def fuse_features(
    query: Query,
    doc: Document | str,
    index: CorpusIndex,
    hom_filter: FilterSpec | None = None,
    feature_set: str = "doc+query",
    list_score: float | None = None,
    floor: int = 1,
) -> np.ndarray:
    """One (query, document) fusion feature vector in documented order.

    ``list_score`` must be supplied when query features are enabled (it
    summarizes the query's initial retrieval, not this document).
    """
    extractor = FeatureExtractor(index, feature_set, hom_filter, floor)
    if extractor.with_query:
        if list_score is None:
            raise ValueError("query features need the query's list score")
    else:
        list_score = 0.0
    doc_id = doc if isinstance(doc, str) else doc.doc_id
    return extractor.matrix(query, [doc_id], list_score)[0]


def write_feature_matrix(
    path,
    names: Sequence[str],
    rows: Sequence[tuple[str, str, np.ndarray]],
) -> None:
    """Export feature vectors as a TSV matrix (documented column order)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("query_id\tdoc_id\t" + "\t".join(names) + "\n")
        for qid, doc_id, vec in rows:
            if len(vec) != len(names):
                raise ValueError(
                    f"feature vector for ({qid}, {doc_id}) has {len(vec)} "
                    f"dimensions, expected {len(names)}"
                )
            vals = "\t".join(format(float(x), ".12g") for x in vec)
            fh.write(f"{qid}\t{doc_id}\t{vals}\n")
