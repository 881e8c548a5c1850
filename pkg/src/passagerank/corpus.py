"""Corpus ingestion, tokenization, and the persisted statistics index.

Everything downstream (scoring, features, training) consumes the
:class:`CorpusIndex` built here: term frequencies, document frequencies,
per-document token id sequences, and the corpus-level length extrema.

Ingestion is streaming: documents are consumed one at a time, so the raw
text of the corpus never has to fit in memory. The token-id index itself
(4 bytes per token) and all statistics do stay in memory; that is the
same footprint the scorer needs at query time anyway.

On-disk format (version 1), one directory per index:

* ``manifest.json`` - format name, version, counts (sorted keys, no
  timestamps, so rebuilds are byte-identical);
* ``vocab.tsv`` - one term per line: ``term<TAB>cf<TAB>df``; the line
  number is the term id;
* ``docs.tsv`` - one document per line: ``doc_id<TAB>n_d``;
* ``tokens.bin`` - little-endian int32 token ids, documents concatenated
  in ``docs.tsv`` order.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

INDEX_FORMAT = "passagerank-index"
INDEX_VERSION = 1

OOV_ID = -1


class CorpusError(ValueError):
    """Raised on malformed corpus input or a broken index."""


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class TokenizeConfig:
    """Lowercase + alphanumeric-run extraction, optional stopword removal."""

    stopwords: frozenset[str] = frozenset()


def tokenize(raw_text: str, config: TokenizeConfig | None = None) -> list[str]:
    """Split raw text into normalized tokens, document order preserved."""
    tokens = _TOKEN_RE.findall(raw_text.lower())
    if config is not None and config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    return tokens


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Document:
    doc_id: str
    terms: tuple[str, ...]

    @property
    def n_d(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class Query:
    query_id: str
    terms: tuple[str, ...]

    @property
    def n_q(self) -> int:
        return len(self.terms)


class CorpusIndex:
    """Immutable corpus statistics plus the positional token store.

    Attributes mirror the statistics the scoring formulas need: ``cf`` and
    ``df`` arrays indexed by term id, ``total_len`` (sum of document
    lengths), ``num_docs``, per-document lengths, and the UNSMOOTHED log
    length extrema over the corpus.
    """

    def __init__(
        self,
        vocab: list[str],
        cf: np.ndarray,
        df: np.ndarray,
        doc_ids: list[str],
        doc_len: np.ndarray,
        tokens: np.ndarray,
    ):
        self.vocab = vocab
        self.term_to_id = {t: i for i, t in enumerate(vocab)}
        if len(self.term_to_id) != len(vocab):
            raise CorpusError("vocabulary contains duplicate terms")
        self.cf = np.ascontiguousarray(cf, dtype=np.int64)
        self.df = np.ascontiguousarray(df, dtype=np.int64)
        self.doc_ids = doc_ids
        self.doc_to_idx = {d: i for i, d in enumerate(doc_ids)}
        if len(self.doc_to_idx) != len(doc_ids):
            raise CorpusError("duplicate doc_id in index")
        self.doc_len = np.ascontiguousarray(doc_len, dtype=np.int64)
        self.tokens = np.ascontiguousarray(tokens, dtype=np.int32)
        self.doc_offset = np.zeros(len(doc_ids) + 1, dtype=np.int64)
        np.cumsum(self.doc_len, out=self.doc_offset[1:])
        self.num_docs = len(doc_ids)
        self.total_len = int(self.doc_len.sum())
        if self.total_len != self.tokens.shape[0]:
            raise CorpusError("token store inconsistent with document lengths")
        if self.num_docs < 1:
            raise CorpusError("index requires at least one non-empty document")
        self.min_log_len = float(np.log(self.doc_len.min()))
        self.max_log_len = float(np.log(self.doc_len.max()))
        self._postings: list[tuple[np.ndarray, np.ndarray]] | None = None
        self._doc_sort_rank: np.ndarray | None = None

    # -- statistics ---------------------------------------------------------

    def corpus_freq(self, term: str, floor: int = 1) -> int:
        """cf_t with the OOV floor applied for unseen terms."""
        tid = self.term_to_id.get(term)
        return int(self.cf[tid]) if tid is not None else floor

    def doc_freq(self, term: str, floor: int = 1) -> int:
        """D_t with the OOV floor applied for unseen terms."""
        tid = self.term_to_id.get(term)
        return int(self.df[tid]) if tid is not None else floor

    # -- documents ----------------------------------------------------------

    def doc_index(self, doc_id: str) -> int:
        try:
            return self.doc_to_idx[doc_id]
        except KeyError:
            raise CorpusError(f"unknown doc_id: {doc_id!r}") from None

    def doc_tokens(self, idx: int) -> np.ndarray:
        """Token ids of document ``idx`` (a view, do not mutate)."""
        return self.tokens[self.doc_offset[idx] : self.doc_offset[idx + 1]]

    def document(self, doc_id: str) -> Document:
        idx = self.doc_index(doc_id)
        terms = tuple(self.vocab[t] for t in self.doc_tokens(idx))
        return Document(doc_id, terms)

    def term_ids(self, terms: Sequence[str]) -> np.ndarray:
        """Map terms to int32 ids; unseen terms map to OOV_ID (-1)."""
        return np.array(
            [self.term_to_id.get(t, OOV_ID) for t in terms], dtype=np.int32
        )

    # -- derived caches -----------------------------------------------------

    def postings(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per term id: (document indices, within-document tf), built lazily."""
        if self._postings is None:
            entries: list[tuple[list[int], list[int]]] = [
                ([], []) for _ in self.vocab
            ]
            for i in range(self.num_docs):
                ids, counts = np.unique(self.doc_tokens(i), return_counts=True)
                for tid, c in zip(ids.tolist(), counts.tolist()):
                    entries[tid][0].append(i)
                    entries[tid][1].append(c)
            self._postings = [
                (np.array(d, dtype=np.int64), np.array(c, dtype=np.int64))
                for d, c in entries
            ]
        return self._postings

    def doc_sort_rank(self) -> np.ndarray:
        """Rank of each document index under ascending doc_id order.

        Used as the deterministic tie-break key everywhere rankings are
        produced.
        """
        if self._doc_sort_rank is None:
            order = sorted(range(self.num_docs), key=lambda i: self.doc_ids[i])
            rank = np.empty(self.num_docs, dtype=np.int64)
            for r, i in enumerate(order):
                rank[i] = r
            self._doc_sort_rank = rank
        return self._doc_sort_rank

    # -- equality (round-trip tests) ----------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CorpusIndex):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.doc_ids == other.doc_ids
            and np.array_equal(self.cf, other.cf)
            and np.array_equal(self.df, other.df)
            and np.array_equal(self.doc_len, other.doc_len)
            and np.array_equal(self.tokens, other.tokens)
        )

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# index construction
# ---------------------------------------------------------------------------


def build_index(documents: Iterable[Document]) -> CorpusIndex:
    """Build the index from a document stream.

    Duplicate doc_ids raise; zero-length documents are skipped with a
    warning; at least one non-empty document is required.
    """
    vocab: list[str] = []
    term_to_id: dict[str, int] = {}
    cf: list[int] = []
    df: list[int] = []
    doc_ids: list[str] = []
    seen: set[str] = set()
    doc_len: list[int] = []
    chunks: list[np.ndarray] = []

    for doc in documents:
        if doc.doc_id in seen:
            raise CorpusError(f"duplicate doc_id: {doc.doc_id!r}")
        seen.add(doc.doc_id)
        if doc.n_d == 0:
            log.warning("skipping empty document %s", doc.doc_id)
            continue
        ids = np.empty(doc.n_d, dtype=np.int32)
        distinct: set[int] = set()
        for j, term in enumerate(doc.terms):
            tid = term_to_id.get(term)
            if tid is None:
                tid = len(vocab)
                term_to_id[term] = tid
                vocab.append(term)
                cf.append(0)
                df.append(0)
            cf[tid] += 1
            ids[j] = tid
            distinct.add(tid)
        for tid in distinct:
            df[tid] += 1
        doc_ids.append(doc.doc_id)
        doc_len.append(doc.n_d)
        chunks.append(ids)

    if not doc_ids:
        raise CorpusError("no non-empty documents to index")

    tokens = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int32)
    return CorpusIndex(
        vocab=vocab,
        cf=np.array(cf, dtype=np.int64),
        df=np.array(df, dtype=np.int64),
        doc_ids=doc_ids,
        doc_len=np.array(doc_len, dtype=np.int64),
        tokens=tokens,
    )


def save_index(index: CorpusIndex, path: str | Path) -> None:
    """Persist the index to a directory (format documented in the module)."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "num_docs": index.num_docs,
        "total_len": index.total_len,
        "vocab_size": len(index.vocab),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with open(out / "vocab.tsv", "w", encoding="utf-8") as fh:
        for i, term in enumerate(index.vocab):
            fh.write(f"{term}\t{index.cf[i]}\t{index.df[i]}\n")
    with open(out / "docs.tsv", "w", encoding="utf-8") as fh:
        for i, doc_id in enumerate(index.doc_ids):
            fh.write(f"{doc_id}\t{index.doc_len[i]}\n")
    index.tokens.astype("<i4").tofile(out / "tokens.bin")


def load_index(path: str | Path) -> CorpusIndex:
    """Load a persisted index; validates format, version, and counts."""
    src = Path(path)
    try:
        manifest = json.loads((src / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusError(f"not an index directory: {src}") from None
    if manifest.get("format") != INDEX_FORMAT:
        raise CorpusError(f"unrecognized index format in {src}")
    if manifest.get("version") != INDEX_VERSION:
        raise CorpusError(
            f"unsupported index version {manifest.get('version')!r} in {src}"
        )
    vocab: list[str] = []
    cf: list[int] = []
    df: list[int] = []
    with open(src / "vocab.tsv", encoding="utf-8") as fh:
        for line in fh:
            term, c, d = line.rstrip("\n").split("\t")
            vocab.append(term)
            cf.append(int(c))
            df.append(int(d))
    doc_ids: list[str] = []
    doc_len: list[int] = []
    with open(src / "docs.tsv", encoding="utf-8") as fh:
        for line in fh:
            doc_id, n = line.rstrip("\n").split("\t")
            doc_ids.append(doc_id)
            doc_len.append(int(n))
    tokens = np.fromfile(src / "tokens.bin", dtype="<i4").astype(np.int32)
    index = CorpusIndex(
        vocab=vocab,
        cf=np.array(cf, dtype=np.int64),
        df=np.array(df, dtype=np.int64),
        doc_ids=doc_ids,
        doc_len=np.array(doc_len, dtype=np.int64),
        tokens=tokens,
    )
    if index.num_docs != manifest["num_docs"] or index.total_len != manifest["total_len"]:
        raise CorpusError(f"index in {src} fails manifest consistency check")
    return index


# ---------------------------------------------------------------------------
# TREC-format readers
# ---------------------------------------------------------------------------

_DOC_RE = re.compile(rb"<DOC>(.*?)</DOC>", re.S)
_DOCNO_RE = re.compile(r"<DOCNO>(.*?)</DOCNO>", re.S)
_TAG_RE = re.compile(r"<[^>]+>")
_TOPIC_RE = re.compile(rb"<top>(.*?)</top>", re.S)
_NUM_RE = re.compile(r"<num>\s*(?:Number:)?\s*([^<\s]+)", re.I)
_TITLE_RE = re.compile(r"<title>\s*(?:Topic:)?\s*(.*?)\s*(?=<|\Z)", re.S | re.I)


def _corpus_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(p for p in path.rglob("*") if p.is_file())
        if not files:
            raise CorpusError(f"empty corpus directory: {path}")
        return files
    if path.is_file():
        return [path]
    raise CorpusError(f"corpus path does not exist: {path}")


def iter_trectext(
    path: str | Path,
    config: TokenizeConfig | None = None,
    text_tags: Sequence[str] = ("TEXT",),
) -> Iterator[Document]:
    """Stream Documents out of trectext files (a file or a directory).

    Records are ``<DOC><DOCNO>id</DOCNO>...<TEXT>...</TEXT></DOC>``; all
    configured text-bearing tags are concatenated in record order and any
    interleaved markup inside them is stripped. Other tags are ignored.
    """
    tag_res = [
        re.compile(rf"<{re.escape(t)}>(.*?)</{re.escape(t)}>", re.S | re.I)
        for t in text_tags
    ]
    for fp in _corpus_files(Path(path)):
        blob = fp.read_bytes()
        for ordinal, m in enumerate(_DOC_RE.finditer(blob), start=1):
            try:
                record = m.group(1).decode("utf-8")
            except UnicodeDecodeError:
                docno_m = _DOCNO_RE.search(
                    m.group(1).decode("utf-8", errors="replace")
                )
                name = docno_m.group(1).strip() if docno_m else f"record #{ordinal}"
                raise CorpusError(
                    f"{fp}: undecodable text in document {name}"
                ) from None
            docno_m = _DOCNO_RE.search(record)
            if docno_m is None:
                raise CorpusError(f"{fp}: record #{ordinal} has no DOCNO")
            doc_id = docno_m.group(1).strip()
            if not doc_id:
                raise CorpusError(f"{fp}: record #{ordinal} has an empty DOCNO")
            parts = []
            for tag_re in tag_res:
                parts.extend(tag_re.findall(record))
            raw = _TAG_RE.sub(" ", " ".join(parts))
            yield Document(doc_id, tuple(tokenize(raw, config)))


def read_topics(
    path: str | Path, config: TokenizeConfig | None = None
) -> list[Query]:
    """Parse TREC topics; the title field is the query, num the query_id.

    Topics whose title tokenizes to nothing are skipped with a warning
    (queries must have at least one term).
    """
    blob = Path(path).read_bytes()
    queries: list[Query] = []
    seen: set[str] = set()
    for ordinal, m in enumerate(_TOPIC_RE.finditer(blob), start=1):
        try:
            record = m.group(1).decode("utf-8")
        except UnicodeDecodeError:
            raise CorpusError(
                f"{path}: undecodable text in topic record #{ordinal}"
            ) from None
        num_m = _NUM_RE.search(record)
        if num_m is None:
            raise CorpusError(f"{path}: topic record #{ordinal} has no num field")
        qid = num_m.group(1).strip()
        title_m = _TITLE_RE.search(record)
        title = title_m.group(1) if title_m else ""
        terms = tuple(tokenize(title, config))
        if not terms:
            log.warning("skipping topic %s: empty title after tokenization", qid)
            continue
        if qid in seen:
            raise CorpusError(f"{path}: duplicate topic number {qid}")
        seen.add(qid)
        queries.append(Query(qid, terms))
    if not queries:
        raise CorpusError(f"{path}: no usable topics found")
    return queries


def read_stoplist(path: str | Path) -> frozenset[str]:
    """One term per line; blank lines and '#' comments ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            w = line.strip().lower()
            if w and not w.startswith("#"):
                words.add(w)
    return frozenset(words)
