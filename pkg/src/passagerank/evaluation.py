"""Rank metrics, TREC run/qrels IO, and the Fisher randomization test.

Metrics follow the standard conventions: AP divides by the total number
of judged relevant documents (retrieved or not); NDCG@k uses
exponential gains (2^rel - 1) / log2(rank + 1) against the ideal
ordering of the judged grades; P@k keeps k in the denominator even when
fewer documents were retrieved. Queries with no relevant documents are
excluded from means with a warning.

The metric arithmetic is deliberately plain Python accumulating in rank
order, so results are reproducible to the bit and directly comparable
against a from-the-definitions reference implementation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

METRIC_NAMES = ("map", "ndcg@20", "p@20")
_EXHAUSTIVE_LIMIT = 20


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def average_precision(
    ranking: Sequence[str], grades: Mapping[str, int]
) -> float | None:
    """AP of one ranking; None when the query has no relevant documents.

    Unretrieved relevant documents count in the denominator.
    """
    relevant = {d for d, g in grades.items() if g > 0}
    if not relevant:
        return None
    hits = 0
    total = 0.0
    for rank, doc in enumerate(ranking, start=1):
        if doc in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def ndcg_at_k(
    ranking: Sequence[str], grades: Mapping[str, int], k: int = 20
) -> float | None:
    """NDCG@k with exponential gains; None when nothing is relevant."""
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)
    if not ideal:
        return None
    dcg = 0.0
    for rank, doc in enumerate(ranking[:k], start=1):
        g = grades.get(doc, 0)
        if g > 0:
            dcg += (2**g - 1) / math.log2(rank + 1)
    idcg = 0.0
    for rank, g in enumerate(ideal[:k], start=1):
        idcg += (2**g - 1) / math.log2(rank + 1)
    return dcg / idcg


def precision_at_k(
    ranking: Sequence[str], grades: Mapping[str, int], k: int = 20
) -> float:
    """Fraction of the top k that is relevant; k stays in the denominator."""
    hits = sum(1 for doc in ranking[:k] if grades.get(doc, 0) > 0)
    return hits / k


def metric_by_name(name: str):
    if name == "map":
        return average_precision
    if name == "ndcg@20":
        return ndcg_at_k
    if name == "p@20":
        return precision_at_k
    raise ValueError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")


# ---------------------------------------------------------------------------
# evaluation over runs
# ---------------------------------------------------------------------------


def qid_sort_key(qid: str):
    return (0, int(qid), "") if qid.isdigit() else (1, 0, qid)


@dataclass
class EvalReport:
    per_query: dict[str, dict[str, float]]  # qid -> metric -> value
    means: dict[str, float]

    def query_ids(self) -> list[str]:
        return sorted(self.per_query, key=qid_sort_key)


def evaluate_run(
    run: Mapping[str, Sequence[tuple[str, float]]],
    qrels: Mapping[str, Mapping[str, int]],
    k: int = 20,
) -> EvalReport:
    """Per-query and mean metrics for one run against the judgments."""
    per_query: dict[str, dict[str, float]] = {}
    for qid in sorted(run, key=qid_sort_key):
        grades = qrels.get(qid, {})
        ranking = [doc for doc, _ in run[qid]]
        ap = average_precision(ranking, grades)
        if ap is None:
            log.warning("query %s has no relevant documents, excluded", qid)
            continue
        per_query[qid] = {
            "map": ap,
            "ndcg@20": ndcg_at_k(ranking, grades, k),
            "p@20": precision_at_k(ranking, grades, k),
        }
    if not per_query:
        raise ValueError("no query in the run has relevant documents")
    means = {
        m: sum(row[m] for row in per_query.values()) / len(per_query)
        for m in METRIC_NAMES
    }
    return EvalReport(per_query, means)


# ---------------------------------------------------------------------------
# Fisher randomization test
# ---------------------------------------------------------------------------


def _per_query_metric(run, qrels, metric: str, k: int) -> dict[str, float]:
    fn = metric_by_name(metric)
    out: dict[str, float] = {}
    for qid, ranked in run.items():
        grades = qrels.get(qid, {})
        if not any(g > 0 for g in grades.values()):
            continue
        ranking = [doc for doc, _ in ranked]
        value = fn(ranking, grades, k) if fn is not average_precision else fn(
            ranking, grades
        )
        out[qid] = float(value)
    return out


def _abs_mean(rows: np.ndarray) -> np.ndarray:
    return np.abs(rows.mean(axis=-1))


def fisher_randomization(
    run_a: Mapping[str, Sequence[tuple[str, float]]],
    run_b: Mapping[str, Sequence[tuple[str, float]]],
    qrels: Mapping[str, Mapping[str, int]],
    metric: str = "map",
    permutations: int = 100_000,
    seed: int = 0,
    exhaustive: bool = False,
    k: int = 20,
) -> float:
    """Two-sided paired randomization p-value between two runs.

    The statistic is the absolute mean per-query metric difference;
    each permutation flips each query's difference sign independently
    with probability 1/2. ``exhaustive`` enumerates all 2^n sign
    patterns instead of sampling (refused above n=20 queries). Both
    modes apply the add-one correction p = (1 + hits) / (1 + trials),
    so identical runs give exactly 1.0 and p is never 0.
    """
    if set(run_a) != set(run_b):
        only_a = sorted(set(run_a) - set(run_b))[:3]
        only_b = sorted(set(run_b) - set(run_a))[:3]
        raise ValueError(
            f"runs cover different query sets (e.g. only in a: {only_a}, "
            f"only in b: {only_b})"
        )
    ma = _per_query_metric(run_a, qrels, metric, k)
    mb = _per_query_metric(run_b, qrels, metric, k)
    qids = sorted(set(ma) & set(mb))
    if not qids:
        raise ValueError("no evaluated query has relevant documents")
    diffs = np.array([ma[q] - mb[q] for q in qids], dtype=np.float64)
    observed = float(_abs_mean(diffs))
    n = diffs.shape[0]

    if exhaustive:
        if n > _EXHAUSTIVE_LIMIT:
            raise ValueError(
                f"exhaustive enumeration limited to {_EXHAUSTIVE_LIMIT} "
                f"queries, got {n}"
            )
        patterns = np.arange(2**n, dtype=np.int64)
        signs = ((patterns[:, np.newaxis] >> np.arange(n)) & 1) * 2 - 1
        stats = _abs_mean(signs * diffs)
        hits = int((stats >= observed).sum())
        return (1 + hits) / (1 + 2**n)

    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = permutations
    while remaining > 0:
        chunk = min(remaining, 65536)
        signs = rng.integers(0, 2, size=(chunk, n)) * 2 - 1
        stats = _abs_mean(signs * diffs)
        hits += int((stats >= observed).sum())
        remaining -= chunk
    return (1 + hits) / (1 + permutations)


# ---------------------------------------------------------------------------
# TREC formats
# ---------------------------------------------------------------------------


def read_qrels(path: str | Path) -> dict[str, dict[str, int]]:
    """Parse `qid 0 docno rel` lines; duplicate (qid, docno) is an error."""
    qrels: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ValueError(
                    f"{path}:{lineno}: expected 'qid 0 docno rel', got {line!r}"
                )
            qid, _, doc, rel = parts
            by_doc = qrels.setdefault(qid, {})
            if doc in by_doc:
                raise ValueError(
                    f"{path}:{lineno}: duplicate judgment for ({qid}, {doc})"
                )
            by_doc[doc] = int(rel)
    if not qrels:
        raise ValueError(f"{path}: no judgments found")
    return qrels


def read_run(path: str | Path) -> dict[str, list[tuple[str, float]]]:
    """Parse a TREC run file, preserving file order within each query."""
    run: dict[str, list[tuple[str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ValueError(
                    f"{path}:{lineno}: expected 'qid Q0 docno rank score tag', "
                    f"got {line!r}"
                )
            qid, _, doc, _, score, _ = parts
            if (qid, doc) in seen:
                raise ValueError(
                    f"{path}:{lineno}: duplicate document {doc} for query {qid}"
                )
            seen.add((qid, doc))
            run.setdefault(qid, []).append((doc, float(score)))
    if not run:
        raise ValueError(f"{path}: empty run file")
    return run


def write_run(
    path: str | Path,
    run: Mapping[str, Sequence[tuple[str, float]]],
    tag: str,
) -> None:
    """Write a run in TREC format, scores at 6 decimals, queries sorted.

    Scores are formatted (not re-sorted), so the written order is the
    ranking even where 6-decimal rounding introduces ties.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(run, key=qid_sort_key):
            for rank, (doc, score) in enumerate(run[qid], start=1):
                fh.write(f"{qid} Q0 {doc} {rank} {score:.6f} {tag}\n")


def write_eval_csv(path: str | Path, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("query," + ",".join(METRIC_NAMES) + "\n")
        for qid in report.query_ids():
            row = report.per_query[qid]
            fh.write(
                qid + "," + ",".join(f"{row[m]:.6f}" for m in METRIC_NAMES) + "\n"
            )
        fh.write("all," + ",".join(f"{report.means[m]:.6f}" for m in METRIC_NAMES) + "\n")


def format_eval_table(report: EvalReport) -> str:
    """Aligned text table: one row per query plus the mean row."""
    header = f"{'query':>10}  " + "  ".join(f"{m:>8}" for m in METRIC_NAMES)
    lines = [header]
    for qid in report.query_ids():
        row = report.per_query[qid]
        lines.append(
            f"{qid:>10}  " + "  ".join(f"{row[m]:8.4f}" for m in METRIC_NAMES)
        )
    lines.append(
        f"{'all':>10}  " + "  ".join(f"{report.means[m]:8.4f}" for m in METRIC_NAMES)
    )
    return "\n".join(lines)
