"""Command-line interface tying the modules into an experiment workflow.

Commands: ``index`` (build the corpus index), ``retrieve`` (initial
whole-document QL run), ``rerank`` (max-scoring-passage baselines or the
trained neural model), ``train`` (cross-validated fusion training),
``eval`` (metrics and paired significance), ``weights`` (fusion gate
report). Tables go to stdout, diagnostics to stderr, artifacts to
files. All stochastic behavior hangs off --seed; --threads bounds
internal parallelism and never changes results.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import (
    ExperimentConfig,
    build_config,
    parse_filters,
    require,
    require_set,
)
from .corpus import (
    CorpusIndex,
    Query,
    TokenizeConfig,
    build_index,
    iter_trectext,
    load_index,
    read_stoplist,
    read_topics,
    save_index,
)
from .evaluation import (
    METRIC_NAMES,
    evaluate_run,
    fisher_randomization,
    format_eval_table,
    qid_sort_key,
    read_qrels,
    read_run,
    write_eval_csv,
    write_run,
)
from .features import FeatureExtractor, feature_names, mean_top_scores, write_feature_matrix
from .fusion import FusionModel, report_weights, serialize_filters
from .passages import FilterSpec, QueryContext, SmoothingConfig, msp_rank, score_tokens
from .retrieval import rank_documents
from .training import CandidateSet, TrainConfig, make_folds, train

log = logging.getLogger(__name__)

RERANK_MODES = ("msp", "msp-length", "msp-ent", "msp-intpsg", "msp-docpsg", "npm")


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

_FLAG_DEFS: dict[str, dict] = {
    "corpus": dict(metavar="PATH", help="trectext file or directory"),
    "index": dict(metavar="DIR", help="index directory"),
    "topics": dict(metavar="FILE", help="TREC topics file"),
    "qrels": dict(metavar="FILE", help="TREC qrels file"),
    "stoplist": dict(metavar="FILE", help="stopword list, one term per line"),
    "text_tags": dict(metavar="TAGS", help="comma-separated text-bearing tags (default TEXT)"),
    "filters": dict(metavar="LIST", help="window filters, e.g. 50,150,inf or 50:25,inf"),
    "lambda_c": dict(type=float, metavar="F", help="smoothing weight in (0,1), default 0.5"),
    "oov_floor": dict(type=int, metavar="N", help="corpus-frequency floor for unseen terms, default 1"),
    "top_k": dict(type=int, metavar="N", help="initial retrieval depth, default 2000"),
    "pooling": dict(choices=["max", "mean"], help="passage pooling, default max"),
    "feature_set": dict(choices=["doc", "query", "doc+query"], help="fusion feature toggles"),
    "homogeneity_m": dict(type=int, metavar="M", help="passage size for homogeneity features (default: smallest finite filter)"),
    "passage_size": dict(type=int, metavar="M", help="window size for msp modes, default 50"),
    "learning_rate": dict(type=float, metavar="F"),
    "batch_size": dict(type=int, metavar="N"),
    "max_epochs": dict(type=int, metavar="N"),
    "patience": dict(type=int, metavar="N"),
    "negatives_per_positive": dict(type=int, metavar="N"),
    "folds": dict(type=int, metavar="K"),
    "permutations": dict(type=int, metavar="N", help="randomization test samples, default 100000"),
}

_CONFIG_KEYS = tuple(_FLAG_DEFS) + ("seed", "threads")


def _add_flags(parser: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        parser.add_argument(f"--{name.replace('_', '-')}", **_FLAG_DEFS[name])


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: dict = {}
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key == "filters":
            value = parse_filters(value)
        elif key == "text_tags":
            value = tuple(t.strip() for t in value.split(",") if t.strip())
        overrides[key] = value
    return build_config(args.config, overrides)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passagerank",
        description="Passage-based document retrieval and reranking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="FILE", help="key=value config file")
        p.add_argument("--seed", type=int, metavar="N")
        p.add_argument("--threads", type=int, metavar="N")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = command("index", "build and persist the corpus index")
    _add_flags(p, "corpus", "index", "stoplist", "text_tags")
    p.set_defaults(handler=cmd_index)

    p = command("retrieve", "initial whole-document query-likelihood run")
    _add_flags(p, "index", "topics", "stoplist", "top_k", "lambda_c", "oov_floor")
    p.add_argument("--output", required=True, metavar="RUN")
    p.set_defaults(handler=cmd_retrieve)

    p = command("rerank", "re-score an initial run's candidates")
    _add_flags(p, "index", "topics", "stoplist", "passage_size", "filters",
               "lambda_c", "oov_floor", "pooling", "feature_set",
               "homogeneity_m", "top_k")
    p.add_argument("--run", required=True, metavar="RUN", help="input run file")
    p.add_argument("--output", required=True, metavar="RUN")
    p.add_argument("--mode", required=True, choices=RERANK_MODES)
    p.add_argument("--model", metavar="PATH",
                   help="fusion model file, or a train output directory for "
                        "per-fold held-out reranking (npm mode)")
    p.add_argument("--dump-features", metavar="FILE",
                   help="also export the npm feature matrix as TSV")
    p.set_defaults(handler=cmd_rerank)

    p = command("train", "cross-validated training of the fusion model")
    _add_flags(p, "index", "topics", "qrels", "stoplist", "filters",
               "lambda_c", "oov_floor", "pooling", "feature_set",
               "homogeneity_m", "top_k", "learning_rate", "batch_size",
               "max_epochs", "patience", "negatives_per_positive", "folds")
    p.add_argument("--run", required=True, metavar="RUN",
                   help="initial run supplying candidates and the list feature")
    p.add_argument("--output-dir", required=True, metavar="DIR")
    p.set_defaults(handler=cmd_train)

    p = command("eval", "metrics for a run, optionally paired against a baseline")
    _add_flags(p, "qrels", "permutations")
    p.add_argument("--run", required=True, metavar="RUN")
    p.add_argument("--baseline", metavar="RUN",
                   help="second run for paired significance testing")
    p.add_argument("--exhaustive", action="store_true",
                   help="enumerate all sign patterns instead of sampling")
    p.add_argument("--csv", metavar="FILE", help="also write per-query CSV")
    p.set_defaults(handler=cmd_eval)

    p = command("weights", "per-filter fusion weight report for a model")
    _add_flags(p, "index", "topics", "stoplist")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--run", required=True, metavar="RUN",
                   help="run file defining the (query, doc) pairs")
    p.add_argument("--csv", metavar="FILE")
    p.set_defaults(handler=cmd_weights)

    return parser


# ---------------------------------------------------------------------------
# shared pipeline helpers
# ---------------------------------------------------------------------------


def _tokenize_config(cfg: ExperimentConfig) -> TokenizeConfig | None:
    if cfg.stoplist is None:
        return None
    return TokenizeConfig(stopwords=read_stoplist(cfg.stoplist))


def _pmap(fn, items: Sequence, threads: int) -> list:
    """Order-preserving map, optionally threaded; results are positional."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _queries_in_run(queries: list[Query], run: dict) -> list[Query]:
    kept = []
    for q in queries:
        if q.query_id in run:
            kept.append(q)
        else:
            log.warning("query %s has no candidates in the run, skipped",
                        q.query_id)
    extra = set(run) - {q.query_id for q in queries}
    for qid in sorted(extra):
        log.warning("run query %s is not in the topics file, skipped", qid)
    if not kept:
        raise ValueError("no topic query has candidates in the run file")
    return kept


@dataclass(frozen=True)
class ScoreSettings:
    """Everything needed to rebuild r and h for candidate documents."""

    filters: tuple[FilterSpec, ...]
    smoothing: SmoothingConfig
    floor: int
    pooling: str
    feature_set: str
    hom_filter: FilterSpec | None
    list_k: int

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "ScoreSettings":
        hom = cfg.smallest_finite_filter() if cfg.feature_set != "query" else None
        return cls(cfg.filters, SmoothingConfig(cfg.lambda_c), cfg.oov_floor,
                   cfg.pooling, cfg.feature_set, hom, cfg.top_k)

    @classmethod
    def from_model(cls, model: FusionModel, cfg: ExperimentConfig) -> "ScoreSettings":
        """Model metadata wins over config so reranking matches training."""
        meta = model.meta
        feature_set = meta.get("feature_set", cfg.feature_set)
        expected = feature_names(feature_set)
        if tuple(model.feature_names) != expected:
            raise ValueError(
                f"model feature names do not match feature set "
                f"{feature_set!r}: {list(model.feature_names)}"
            )
        if feature_set == "query":
            hom = None
        elif meta.get("homogeneity_m"):
            hom = FilterSpec.window(int(meta["homogeneity_m"]))
        else:
            finite = [f for f in model.filters if not f.is_infinite]
            hom = min(finite, key=lambda f: f.m) if finite else cfg.smallest_finite_filter()
        return cls(
            filters=model.filters,
            smoothing=SmoothingConfig(float(meta.get("lambda_c", cfg.lambda_c))),
            floor=int(meta.get("oov_floor", cfg.oov_floor)),
            pooling=str(meta.get("pooling", cfg.pooling)),
            feature_set=feature_set,
            hom_filter=hom,
            list_k=int(meta.get("list_k", cfg.top_k)),
        )

    def extractor(self, index: CorpusIndex) -> FeatureExtractor:
        return FeatureExtractor(index, self.feature_set, self.hom_filter,
                                self.floor)


def _candidate_matrices(
    index: CorpusIndex,
    query: Query,
    doc_ids: list[str],
    run_scores: list[float],
    st: ScoreSettings,
    extractor: FeatureExtractor,
) -> tuple[np.ndarray, np.ndarray]:
    """(R, H) matrices for one query's candidates; rows follow doc_ids."""
    ctx = QueryContext(query, index, st.smoothing, st.floor)
    R = np.empty((len(doc_ids), len(st.filters)), dtype=np.float64)
    for i, doc_id in enumerate(doc_ids):
        tokens = index.doc_tokens(index.doc_index(doc_id))
        R[i] = score_tokens(ctx, tokens, st.filters, st.pooling, "lm")
    list_score = (
        mean_top_scores(run_scores, st.list_k) if extractor.with_query else 0.0
    )
    H = extractor.matrix(query, doc_ids, list_score)
    return R, H


def _rank_rows(doc_ids: list[str], scores: np.ndarray) -> list[tuple[str, float]]:
    order = sorted(range(len(doc_ids)), key=lambda i: (-scores[i], doc_ids[i]))
    return [(doc_ids[i], float(scores[i])) for i in order]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_index(args) -> int:
    cfg = _config_from_args(args)
    require(cfg, "corpus")
    require_set(cfg, "index")
    tok = _tokenize_config(cfg)
    docs = iter_trectext(cfg.corpus, tok, cfg.text_tags)
    index = build_index(docs)
    save_index(index, cfg.index)
    print(f"documents  : {index.num_docs}")
    print(f"vocabulary : {len(index.vocab)}")
    print(f"tokens     : {index.total_len}")
    print(f"index      : {cfg.index}")
    return 0


def cmd_retrieve(args) -> int:
    cfg = _config_from_args(args)
    require(cfg, "index", "topics")
    index = load_index(cfg.index)
    queries = read_topics(cfg.topics, _tokenize_config(cfg))
    smoothing = SmoothingConfig(cfg.lambda_c)
    index.postings()  # build once before any threading
    index.doc_sort_rank()

    def one(q: Query):
        return q.query_id, rank_documents(q, index, smoothing, cfg.top_k,
                                          cfg.oov_floor)

    results = _pmap(one, queries, cfg.threads)
    run = {qid: ranked for qid, ranked in results}
    write_run(args.output, run, cfg.run_tag("ql"))
    log.info("wrote %d queries to %s", len(run), args.output)
    return 0


def cmd_rerank(args) -> int:
    cfg = _config_from_args(args)
    require(cfg, "index", "topics")
    if args.dump_features and args.mode != "npm":
        raise ValueError("--dump-features requires --mode npm")
    index = load_index(cfg.index)
    run_in = read_run(args.run)
    queries = _queries_in_run(read_topics(cfg.topics, _tokenize_config(cfg)),
                              run_in)

    if args.mode == "npm":
        out, names, feat_rows = _rerank_npm(args, cfg, index, queries, run_in)
        if args.dump_features:
            write_feature_matrix(args.dump_features, names, feat_rows)
    else:
        kind = "none" if args.mode == "msp" else args.mode.split("-", 1)[1]
        smoothing = SmoothingConfig(cfg.lambda_c)
        hom_cache: dict = {}

        def one(q: Query):
            cands = [d for d, _ in run_in[q.query_id]]
            return q.query_id, msp_rank(
                q, cands, index, cfg.passage_size, kind, s=smoothing,
                floor=cfg.oov_floor, hom_cache=hom_cache,
            )

        results = _pmap(one, queries, cfg.threads)
        out = {qid: ranked for qid, ranked in results}

    write_run(args.output, out, cfg.run_tag(args.mode))
    log.info("wrote %d queries to %s", len(out), args.output)
    return 0


def _load_fold_models(dir_path: Path) -> tuple[dict[int, FusionModel], dict[str, int]]:
    folds_file = dir_path / "folds.csv"
    if not folds_file.exists():
        raise ValueError(f"{dir_path} has no folds.csv; pass a model file or "
                         f"a train output directory")
    fold_of: dict[str, int] = {}
    with open(folds_file, encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != "query_id,fold":
            raise ValueError(f"{folds_file}: unexpected header {header!r}")
        for line in fh:
            qid, fold = line.strip().split(",")
            fold_of[qid] = int(fold)
    models = {}
    for fold in sorted(set(fold_of.values())):
        models[fold] = FusionModel.load(dir_path / f"fold_{fold}.json")
    first = models[min(models)]
    for m in models.values():
        if (m.feature_names != first.feature_names
                or serialize_filters(m.filters) != serialize_filters(first.filters)):
            raise ValueError(f"{dir_path}: fold models disagree on configuration")
    return models, fold_of


def _rerank_npm(args, cfg, index, queries, run_in):
    if not args.model:
        raise ValueError("npm mode requires --model")
    model_path = Path(args.model)
    if model_path.is_dir():
        models, fold_of = _load_fold_models(model_path)
        missing = [q.query_id for q in queries if q.query_id not in fold_of]
        if missing:
            raise ValueError(
                f"queries not in the fold manifest: {missing[:5]} "
                f"(model directory was trained on different topics)"
            )
        model_for = {q.query_id: models[fold_of[q.query_id]] for q in queries}
        ref_model = models[min(models)]
    else:
        ref_model = FusionModel.load(model_path)
        model_for = {q.query_id: ref_model for q in queries}
    st = ScoreSettings.from_model(ref_model, cfg)
    extractor = st.extractor(index)
    log.info("npm rerank with model fingerprint %s", ref_model.fingerprint())

    def one(q: Query):
        qid = q.query_id
        doc_ids = [d for d, _ in run_in[qid]]
        run_scores = [s for _, s in run_in[qid]]
        R, H = _candidate_matrices(index, q, doc_ids, run_scores, st, extractor)
        lin = model_for[qid].linear_many(R, H)
        return qid, _rank_rows(doc_ids, lin), doc_ids, H

    results = _pmap(one, queries, cfg.threads)
    out = {qid: ranked for qid, ranked, _, _ in results}
    feat_rows = []
    for qid, _, doc_ids, H in sorted(results, key=lambda r: qid_sort_key(r[0])):
        for doc_id, vec in zip(doc_ids, H):
            feat_rows.append((qid, doc_id, vec))
    return out, extractor.names, feat_rows


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    require(cfg, "index", "topics", "qrels")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = load_index(cfg.index)
    qrels = read_qrels(cfg.qrels)
    run_in = read_run(args.run)
    queries = _queries_in_run(read_topics(cfg.topics, _tokenize_config(cfg)),
                              run_in)
    st = ScoreSettings.from_config(cfg)
    extractor = st.extractor(index)
    names = feature_names(cfg.feature_set)

    def one(q: Query) -> CandidateSet:
        qid = q.query_id
        doc_ids = [d for d, _ in run_in[qid]]
        run_scores = [s for _, s in run_in[qid]]
        R, H = _candidate_matrices(index, q, doc_ids, run_scores, st, extractor)
        rel = np.array(
            [qrels.get(qid, {}).get(d, 0) > 0 for d in doc_ids], dtype=bool
        )
        return CandidateSet(q, doc_ids, R, H, rel)

    all_sets = _pmap(one, queries, cfg.threads)
    candidates = {}
    for cs in all_sets:
        qid = cs.query.query_id
        if not cs.rel.any():
            log.warning("query %s has no relevant candidates, dropped", qid)
        elif cs.rel.all():
            log.warning("query %s has no non-relevant candidates, dropped", qid)
        else:
            candidates[qid] = cs
    if len(candidates) < cfg.folds:
        raise ValueError(
            f"only {len(candidates)} trainable queries; need at least "
            f"{cfg.folds} for {cfg.folds}-fold cross-validation"
        )

    tc = TrainConfig(
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        max_epochs=cfg.max_epochs,
        patience=cfg.patience,
        seed=cfg.seed,
        negatives_per_positive=cfg.negatives_per_positive,
        folds=cfg.folds,
    )
    meta = {
        "feature_set": cfg.feature_set,
        "homogeneity_m": st.hom_filter.m if st.hom_filter else None,
        "list_k": st.list_k,
        "lambda_c": cfg.lambda_c,
        "oov_floor": cfg.oov_floor,
        "pooling": cfg.pooling,
        "config_fingerprint": cfg.fingerprint(),
    }
    fold_of = make_folds(sorted(candidates), cfg.folds, cfg.seed)
    results = train(candidates, tc, meta, cfg.filters, names, fold_of)

    with open(out_dir / "folds.csv", "w", encoding="utf-8") as fh:
        fh.write("query_id,fold\n")
        for qid in sorted(fold_of, key=qid_sort_key):
            fh.write(f"{qid},{fold_of[qid]}\n")
    print(f"{'fold':>4}  {'train':>5}  {'val':>4}  {'test':>4}  "
          f"{'best_epoch':>10}  {'val_map':>8}")
    for res in results:
        res.model.save(out_dir / f"fold_{res.fold}.json")
        with open(out_dir / f"train_log_fold_{res.fold}.csv", "w",
                  encoding="utf-8") as fh:
            fh.write("epoch,mean_loss,val_map\n")
            for epoch, loss, vm in res.log_rows:
                fh.write(f"{epoch},{loss:.10g},{vm:.10g}\n")
        print(f"{res.fold:>4}  {len(res.train_qids):>5}  {len(res.val_qids):>4}  "
              f"{len(res.test_qids):>4}  {res.model.meta['best_epoch']:>10}  "
              f"{res.best_val_map:>8.4f}")
    log.info("wrote %d fold models to %s", len(results), out_dir)
    return 0


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    require(cfg, "qrels")
    qrels = read_qrels(cfg.qrels)
    run_a = read_run(args.run)
    report_a = evaluate_run(run_a, qrels)
    if not args.baseline:
        print(format_eval_table(report_a))
        if args.csv:
            write_eval_csv(args.csv, report_a)
        return 0

    run_b = read_run(args.baseline)
    report_b = evaluate_run(run_b, qrels)
    p_values = {
        m: fisher_randomization(
            run_a, run_b, qrels, metric=m, permutations=cfg.permutations,
            seed=cfg.seed, exhaustive=args.exhaustive,
        )
        for m in METRIC_NAMES
    }
    name_a = Path(args.run).stem[:14]
    name_b = Path(args.baseline).stem[:14]
    print(f"{'metric':>8}  {name_a:>14}  {name_b:>14}  {'diff':>8}  {'p-value':>8}")
    for m in METRIC_NAMES:
        diff = report_a.means[m] - report_b.means[m]
        mark = " *" if p_values[m] < 0.05 else ""
        print(f"{m:>8}  {report_a.means[m]:>14.4f}  {report_b.means[m]:>14.4f}  "
              f"{diff:>+8.4f}  {p_values[m]:>8.4f}{mark}")
    if args.csv:
        _write_paired_csv(args.csv, report_a, report_b, p_values, name_a, name_b)
    return 0


def _write_paired_csv(path, report_a, report_b, p_values, name_a, name_b):
    qids = sorted(set(report_a.per_query) & set(report_b.per_query),
                  key=qid_sort_key)
    with open(path, "w", encoding="utf-8") as fh:
        cols = [f"{m}_{s}" for m in METRIC_NAMES for s in (name_a, name_b)]
        fh.write("query," + ",".join(cols) + "\n")
        for qid in qids:
            vals = []
            for m in METRIC_NAMES:
                vals.append(f"{report_a.per_query[qid][m]:.6f}")
                vals.append(f"{report_b.per_query[qid][m]:.6f}")
            fh.write(qid + "," + ",".join(vals) + "\n")
        means = []
        for m in METRIC_NAMES:
            means.append(f"{report_a.means[m]:.6f}")
            means.append(f"{report_b.means[m]:.6f}")
        fh.write("all," + ",".join(means) + "\n")
        fh.write("p_value," + ",".join(f"{p_values[m]:.6f},"
                                       for m in METRIC_NAMES).rstrip(",") + "\n")


def cmd_weights(args) -> int:
    cfg = _config_from_args(args)
    require(cfg, "index", "topics")
    model_path = Path(args.model)
    if model_path.is_dir():
        raise ValueError("weights needs a single model file; pick one fold_*.json")
    model = FusionModel.load(model_path)
    index = load_index(cfg.index)
    run_in = read_run(args.run)
    queries = _queries_in_run(read_topics(cfg.topics, _tokenize_config(cfg)),
                              run_in)
    st = ScoreSettings.from_model(model, cfg)
    extractor = st.extractor(index)

    def one(q: Query) -> np.ndarray:
        qid = q.query_id
        doc_ids = [d for d, _ in run_in[qid]]
        run_scores = [s for _, s in run_in[qid]]
        list_score = (mean_top_scores(run_scores, st.list_k)
                      if extractor.with_query else 0.0)
        return extractor.matrix(q, doc_ids, list_score)

    H_all = np.vstack(_pmap(one, queries, cfg.threads))
    means, stds = report_weights(model, H_all)
    log.info("weight report over %d pairs, model fingerprint %s",
             H_all.shape[0], model.fingerprint())
    print(f"{'filter':>8}  {'mean_phi':>9}  {'std_phi':>9}")
    for f, mean, std in zip(model.filters, means, stds):
        print(f"{f.label:>8}  {mean:>9.4f}  {std:>9.4f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("filter,mean_phi,std_phi\n")
            for f, mean, std in zip(model.filters, means, stds):
                fh.write(f"{f.label},{mean:.6f},{std:.6f}\n")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        level=logging.INFO if args.verbose else logging.WARNING,
    )
    try:
        return args.handler(args)
    except (ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
