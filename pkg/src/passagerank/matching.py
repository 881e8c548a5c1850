"""Binary query-term / document-position matching structure.

Conceptually an (n_q, n_d) 0/1 matrix whose entry (i, j) is 1 iff query
term i equals document term j. Stored as per-row sorted position lists
so windowed counts over column ranges cost a binary search; the dense
matrix is materialized only for tests and debugging.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def _terms_of(obj) -> Sequence[str]:
    return getattr(obj, "terms", obj)


class MatchingMatrix:
    """Sparse binary match matrix with cheap windowed row sums."""

    def __init__(self, n_q: int, n_d: int, positions: list[np.ndarray]):
        self.n_q = n_q
        self.n_d = n_d
        self.positions = positions

    def row_tf(self, row: int) -> int:
        """Full-row sum: tf of query term ``row`` in the document."""
        return int(self.positions[self._check_row(row)].shape[0])

    def window_tf(self, row: int, start: int, length: int) -> int:
        """Number of matches in columns [start, min(start+length, n_d))."""
        pos = self.positions[self._check_row(row)]
        if not 0 <= start < self.n_d:
            raise ValueError(f"window start {start} outside document [0, {self.n_d})")
        if length < 1:
            raise ValueError(f"window length must be >= 1, got {length}")
        end = min(start + length, self.n_d)
        lo = np.searchsorted(pos, start, side="left")
        hi = np.searchsorted(pos, end, side="left")
        return int(hi - lo)

    def dense(self) -> np.ndarray:
        """Materialized (n_q, n_d) uint8 matrix, for tests."""
        out = np.zeros((self.n_q, self.n_d), dtype=np.uint8)
        for i, pos in enumerate(self.positions):
            out[i, pos] = 1
        return out

    def dump(self) -> str:
        """Debug view: one line of 0/1 characters per query term."""
        dense = self.dense()
        return "\n".join("".join(str(v) for v in row) for row in dense)

    def _check_row(self, row: int) -> int:
        if not 0 <= row < self.n_q:
            raise IndexError(f"row {row} outside [0, {self.n_q})")
        return row


def build_matrix(q, d) -> MatchingMatrix:
    """Build the matching matrix for a (query, document) pair.

    Accepts the Query/Document dataclasses or plain term sequences; both
    sides must come out of the same tokenization pipeline.
    """
    q_terms = _terms_of(q)
    d_terms = _terms_of(d)
    if len(q_terms) == 0:
        raise ValueError("query has no terms")
    if len(d_terms) == 0:
        raise ValueError("document has no terms")
    by_term: dict[str, list[int]] = {}
    for j, t in enumerate(d_terms):
        by_term.setdefault(t, []).append(j)
    positions = [
        np.array(by_term.get(t, ()), dtype=np.int64) for t in q_terms
    ]
    return MatchingMatrix(len(q_terms), len(d_terms), positions)
