"""Pairwise compatibility, local conflicts and perfect-phylogeny tests."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .matrix import ONE, UNKNOWN, ZERO, FlipMatrix, MatrixError


class PairRelation(enum.Enum):
    CONFLICT = "conflict"
    DISJOINT = "disjoint"
    U_SUB_V = "u_sub_v"
    V_SUB_U = "v_sub_u"
    EQUAL = "equal"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True, order=True)
class LocalConflict:
    """Columns u < v and taxa t1, t2, t3 with

    M[t1,u] = M[t2,u] = M[t2,v] = M[t3,v] = 1 and M[t3,u] = M[t1,v] = 0.
    """

    u: int
    v: int
    t1: int
    t2: int
    t3: int

    def cells(self) -> tuple[tuple[int, int], ...]:
        """The six (taxon, column) cells the conflict occupies."""
        return tuple((t, c) for c in (self.u, self.v) for t in (self.t1, self.t2, self.t3))

    def is_valid(self, entries: np.ndarray) -> bool:
        e = entries
        u, v = self.u, self.v
        return bool(
            e[self.t1, u] == ONE and e[self.t2, u] == ONE and e[self.t2, v] == ONE
            and e[self.t3, v] == ONE and e[self.t3, u] == ZERO and e[self.t1, v] == ZERO
        )


def _cols(M: FlipMatrix, u, v):
    a, b = M.col(u), M.col(v)
    if a == b:
        raise ValueError("need two different columns")
    return a, b, M.entries[:, a], M.entries[:, b]


def pair_relation(M: FlipMatrix, u, v) -> PairRelation:
    """Relation of two columns as witnessed by the current entries."""
    _, _, cu, cv = _cols(M, u, v)
    u_in_v = not np.any((cu == ONE) & (cv == ZERO))
    v_in_u = not np.any((cv == ONE) & (cu == ZERO))
    disjoint = not np.any((cu == ONE) & (cv == ONE))
    if not (u_in_v or v_in_u or disjoint):
        return PairRelation.CONFLICT
    if u_in_v and v_in_u:
        return PairRelation.UNDETERMINED if disjoint else PairRelation.EQUAL
    if u_in_v:
        return PairRelation.U_SUB_V
    if v_in_u:
        return PairRelation.V_SUB_U
    return PairRelation.DISJOINT


def enumerate_local_conflicts(
    M: FlipMatrix, limit: int | None = None, seed: int | None = None
) -> list[LocalConflict]:
    """One local conflict per conflicting column pair.

    Witness taxa are the smallest valid indices unless ``seed`` is given, in
    which case they are drawn uniformly.
    """
    rng = np.random.default_rng(seed) if seed is not None else None
    ones, zeros = M.entries == ONE, M.entries == ZERO
    out = []
    for a, b in combinations(range(M.m), 2):
        if limit is not None and len(out) >= limit:
            break
        n1 = np.flatnonzero(ones[:, a] & zeros[:, b])
        n2 = np.flatnonzero(ones[:, a] & ones[:, b])
        n3 = np.flatnonzero(ones[:, b] & zeros[:, a])
        if len(n1) and len(n2) and len(n3):
            if rng is None:
                out.append(LocalConflict(a, b, int(n1[0]), int(n2[0]), int(n3[0])))
            else:
                out.append(LocalConflict(a, b, int(rng.choice(n1)), int(rng.choice(n2)), int(rng.choice(n3))))
    return out


def all_local_conflicts(M: FlipMatrix) -> list[LocalConflict]:
    """Every (u, v, t1, t2, t3) local conflict, by exhaustive scan."""
    e = M.entries
    n = M.n
    out = []
    for u, v in combinations(range(M.m), 2):
        for t1 in range(n):
            for t2 in range(n):
                for t3 in range(n):
                    c = LocalConflict(u, v, t1, t2, t3)
                    if c.is_valid(e):
                        out.append(c)
    return out


def is_perfect_phylogeny(M) -> bool:
    """Pairwise compatibility test for a binary matrix."""
    entries = M.entries if isinstance(M, FlipMatrix) else np.asarray(M)
    if np.any(entries == UNKNOWN):
        raise MatrixError("perfect phylogeny test needs a binary matrix")
    sets = [frozenset(np.flatnonzero(entries[:, j] == ONE).tolist()) for j in range(entries.shape[1])]
    for a, b in combinations(sets, 2):
        if a & b and not (a <= b or b <= a):
            return False
    return True
