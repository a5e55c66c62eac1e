"""Weighted 0/1/? character matrices.

Rows are taxa, columns are characters (one per inner node of an input tree).
Entries are stored as small integers in a numpy array: ``ZERO``, ``ONE`` and
``UNKNOWN``.  A parallel boolean array marks entries that have been fixed by
data reduction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ZERO = 0
ONE = 1
UNKNOWN = 2

_CHAR_TO_STATE = {"0": ZERO, "1": ONE, "?": UNKNOWN}
_STATE_TO_CHAR = {ZERO: "0", ONE: "1", UNKNOWN: "?"}


class MatrixError(ValueError):
    """Raised for malformed matrices or matrix files."""


@dataclass(frozen=True)
class Column:
    id: str
    weight: int = 1
    provenance: tuple = ()

    def __post_init__(self):
        if self.weight < 1:
            raise MatrixError(f"column {self.id}: weight must be >= 1")


@dataclass(frozen=True)
class FlipRecord:
    taxon: int
    column: str
    old: int
    new: int
    weight: int

    def __post_init__(self):
        if self.old == self.new:
            raise ValueError("a flip must change the entry")


class FlipMatrix:
    """An n x m matrix over {0, 1, ?} with column weights and permanence flags.

    Instances are treated as immutable; transforms return new matrices.
    """

    def __init__(
        self,
        taxa: Sequence[str],
        columns: Sequence[Column],
        entries,
        permanent=None,
    ):
        entries = np.asarray(entries, dtype=np.int8)
        n = len(taxa)
        if n < 1:
            raise MatrixError("a matrix needs at least one taxon")
        if entries.size == 0:
            entries = entries.reshape(n, len(columns))
        if entries.shape != (n, len(columns)):
            raise MatrixError(
                f"entries have shape {entries.shape}, expected {(n, len(columns))}"
            )
        if entries.size and (entries.min() < 0 or entries.max() > UNKNOWN):
            raise MatrixError("entries must be ZERO, ONE or UNKNOWN")
        ids = [c.id for c in columns]
        if len(set(ids)) != len(ids):
            raise MatrixError("column ids must be unique")
        if permanent is None:
            permanent = np.zeros(entries.shape, dtype=bool)
        permanent = np.asarray(permanent, dtype=bool)
        if permanent.shape != entries.shape:
            raise MatrixError("permanence flags do not match the entry shape")
        if np.any(permanent & (entries == UNKNOWN)):
            raise MatrixError("a permanent entry cannot be '?'")
        empty = ~np.any(entries == ONE, axis=0)
        if np.any(empty):
            bad = ids[int(np.argmax(empty))]
            raise MatrixError(f"all-zero column {bad}")

        self.taxa = list(taxa)
        self.columns = list(columns)
        self.entries = entries
        self.permanent = permanent
        self.entries.flags.writeable = False
        self.permanent.flags.writeable = False
        self._index = {c.id: j for j, c in enumerate(self.columns)}

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.taxa)

    @property
    def m(self) -> int:
        return len(self.columns)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.columns], dtype=np.int64)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.columns]

    def col(self, v) -> int:
        """Column index for an id or an index."""
        if isinstance(v, (int, np.integer)):
            if not 0 <= v < self.m:
                raise KeyError(f"no column with index {v}")
            return int(v)
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"unknown column id {v!r}") from None

    def is_binary(self) -> bool:
        return not np.any(self.entries == UNKNOWN)

    def ones(self) -> np.ndarray:
        return self.entries == ONE

    def zeros(self) -> np.ndarray:
        return self.entries == ZERO

    def with_entries(self, entries, permanent=None) -> "FlipMatrix":
        return FlipMatrix(self.taxa, self.columns, entries, permanent)

    def subset_columns(self, keep: Iterable[int]) -> "FlipMatrix":
        keep = list(keep)
        return FlipMatrix(
            self.taxa,
            [self.columns[j] for j in keep],
            self.entries[:, keep],
            self.permanent[:, keep],
        )

    def __eq__(self, other):
        if not isinstance(other, FlipMatrix):
            return NotImplemented
        return (
            self.taxa == other.taxa
            and self.columns == other.columns
            and np.array_equal(self.entries, other.entries)
            and np.array_equal(self.permanent, other.permanent)
        )

    def __repr__(self):
        return f"FlipMatrix(n={self.n}, m={self.m})"

    def row_string(self, t: int) -> str:
        return "".join(_STATE_TO_CHAR[int(x)] for x in self.entries[t])

    def column_string(self, v) -> str:
        j = self.col(v)
        return "".join(_STATE_TO_CHAR[int(x)] for x in self.entries[:, j])


def from_columns(
    cols: Sequence[str],
    taxa: Sequence[str] | None = None,
    weights: Sequence[int] | None = None,
) -> FlipMatrix:
    """Build a matrix from column strings such as ``["110", "011"]``."""
    if not cols:
        raise MatrixError("need at least one column; use FlipMatrix directly for m=0")
    n = len(cols[0])
    if taxa is None:
        taxa = [f"t{i + 1}" for i in range(n)]
    if weights is None:
        weights = [1] * len(cols)
    entries = np.empty((n, len(cols)), dtype=np.int8)
    for j, s in enumerate(cols):
        if len(s) != n:
            raise MatrixError("columns differ in length")
        for i, ch in enumerate(s):
            if ch not in _CHAR_TO_STATE:
                raise MatrixError(f"illegal character {ch!r}")
            entries[i, j] = _CHAR_TO_STATE[ch]
    columns = [Column(f"c{j + 1}", int(w)) for j, w in enumerate(weights)]
    return FlipMatrix(taxa, columns, entries)


def from_sets(sets: Sequence[Iterable[int]], n: int) -> FlipMatrix:
    """Binary matrix from 1-based taxon index sets, one set per column."""
    cols = []
    for s in sets:
        s = set(s)
        cols.append("".join("1" if i + 1 in s else "0" for i in range(n)))
    return from_columns(cols)


# -- file format -----------------------------------------------------------


def parse_matrix(text) -> FlipMatrix:
    """Parse the text matrix format.

    ``text`` may be a string or a file object.  Errors name the offending
    line number.
    """
    if not isinstance(text, str):
        text = text.read()
    lines = [
        (no, line.strip())
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise MatrixError("line 1: missing header")
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise MatrixError(f"line {no}: malformed header {header!r}, expected 'n m'")
    n, m = int(parts[0]), int(parts[1])
    body = lines[1:]
    if len(body) < n:
        raise MatrixError(f"line {no}: expected {n} rows, found {len(body)}")
    taxa = []
    entries = np.empty((n, m), dtype=np.int8)
    for i, (no, line) in enumerate(body[:n]):
        parts = line.split()
        if m == 0 and len(parts) == 1:
            parts.append("")
        if len(parts) != 2:
            raise MatrixError(f"line {no}: expected 'taxon row'")
        name, row = parts
        if len(row) != m:
            raise MatrixError(f"line {no}: row has length {len(row)}, expected {m}")
        for j, ch in enumerate(row):
            state = _CHAR_TO_STATE.get(ch)
            if state is None:
                raise MatrixError(f"line {no}: illegal character {ch!r}")
            entries[i, j] = state
        taxa.append(name)
    if len(set(taxa)) != len(taxa):
        raise MatrixError("duplicate taxon names")
    weights = [1] * m
    rest = body[n:]
    if rest:
        no, line = rest[0]
        parts = line.split()
        if parts[0] != "weights" or len(parts) != m + 1:
            raise MatrixError(f"line {no}: expected 'weights' followed by {m} integers")
        try:
            weights = [int(w) for w in parts[1:]]
        except ValueError:
            raise MatrixError(f"line {no}: weights must be integers") from None
        if any(w < 1 for w in weights):
            raise MatrixError(f"line {no}: weights must be positive")
        if len(rest) > 1:
            raise MatrixError(f"line {rest[1][0]}: unexpected trailing content")
    empty = ~np.any(entries == ONE, axis=0) if m else np.zeros(0, dtype=bool)
    if np.any(empty):
        j = int(np.argmax(empty))
        raise MatrixError(f"line {body[0][0]}: all-zero column {j + 1}")
    columns = [Column(f"c{j + 1}", w) for j, w in enumerate(weights)]
    return FlipMatrix(taxa, columns, entries)


def write_matrix(M: FlipMatrix) -> str:
    """Canonical text form.  The weights line is written only when needed."""
    out = io.StringIO()
    out.write(f"{M.n} {M.m}\n")
    for t, name in enumerate(M.taxa):
        out.write(f"{name} {M.row_string(t)}".rstrip() + "\n")
    w = M.weights
    if np.any(w != 1):
        out.write("weights " + " ".join(str(int(x)) for x in w) + "\n")
    return out.getvalue()


# -- set views ---------------------------------------------------------------


def index_sets(M: FlipMatrix, v) -> tuple[frozenset, frozenset]:
    """Return (I_M(v), I*_M(v)): taxa with a 1, and taxa with a 1 or '?'."""
    col = M.entries[:, M.col(v)]
    ones = frozenset(np.flatnonzero(col == ONE).tolist())
    loose = frozenset(np.flatnonzero(col != ZERO).tolist())
    return ones, loose


def neighbor_sets(M: FlipMatrix, u, v) -> tuple[frozenset, frozenset]:
    """Return (N(u-v), N(u+v)).

    N(u-v) holds taxa with a 1 in u and a 0 in v; N(u+v) taxa with a 1 in
    both.  The first set is asymmetric in (u, v).
    """
    a, b = M.col(u), M.col(v)
    if a == b:
        raise ValueError("neighbor sets need two different columns")
    cu, cv = M.entries[:, a], M.entries[:, b]
    minus = frozenset(np.flatnonzero((cu == ONE) & (cv == ZERO)).tolist())
    plus = frozenset(np.flatnonzero((cu == ONE) & (cv == ONE)).tolist())
    return minus, plus


# -- transforms --------------------------------------------------------------


def merge_identical_columns(M: FlipMatrix) -> tuple[FlipMatrix, list[tuple[str, list[str]]]]:
    """Merge entrywise identical columns (including '?' positions).

    The first column of each group survives and carries the summed weight.
    Returns the new matrix and a list of (survivor id, absorbed ids).
    """
    groups: dict[bytes, list[int]] = {}
    for j in range(M.m):
        key = M.entries[:, j].tobytes() + M.permanent[:, j].tobytes()
        groups.setdefault(key, []).append(j)
    if len(groups) == M.m:
        return M, []
    keep, columns, merges = [], [], []
    for j in range(M.m):
        key = M.entries[:, j].tobytes() + M.permanent[:, j].tobytes()
        members = groups[key]
        if members[0] != j:
            continue
        base = M.columns[j]
        if len(members) > 1:
            weight = sum(M.columns[i].weight for i in members)
            prov = tuple(p for i in members for p in M.columns[i].provenance)
            base = Column(base.id, weight, prov)
            merges.append((base.id, [M.columns[i].id for i in members[1:]]))
        keep.append(j)
        columns.append(base)
    merged = FlipMatrix(M.taxa, columns, M.entries[:, keep], M.permanent[:, keep])
    return merged, merges


def strip_trivial_columns(M: FlipMatrix) -> tuple[FlipMatrix, list[str]]:
    """Remove every column with at most one 1 entry ('?' does not count)."""
    counts = np.sum(M.entries == ONE, axis=0)
    keep = np.flatnonzero(counts >= 2).tolist()
    if len(keep) == M.m:
        return M, []
    removed = [M.columns[j].id for j in range(M.m) if counts[j] < 2]
    return M.subset_columns(keep), removed


def flip_distance(M: FlipMatrix, target) -> int:
    """Weighted number of 0/1 disagreements between M and a binary matrix.

    '?' entries of M never count.
    """
    target = np.asarray(target.entries if isinstance(target, FlipMatrix) else target)
    if target.shape != M.entries.shape:
        raise MatrixError(f"shape mismatch: {target.shape} vs {M.entries.shape}")
    if np.any(target == UNKNOWN):
        raise MatrixError("target matrix must be binary")
    diff = (M.entries != UNKNOWN) & (M.entries != target)
    return int(np.sum(diff.sum(axis=0) * M.weights))


def flips_between(M: FlipMatrix, target) -> list[FlipRecord]:
    """List the cells where ``target`` differs from M, with their cost."""
    target = np.asarray(target.entries if isinstance(target, FlipMatrix) else target)
    records = []
    for t, j in zip(*np.nonzero(M.entries != target)):
        old, new = int(M.entries[t, j]), int(target[t, j])
        w = 0 if old == UNKNOWN else M.columns[j].weight
        records.append(FlipRecord(int(t), M.columns[j].id, old, new, w))
    return records
