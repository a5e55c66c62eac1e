"""Exact optimum by exhaustive search over rooted binary trees.

For a fixed tree, characters are independent: each column picks the
cheapest 1-set among the tree's clades, the singletons, the full taxon set
and the empty set.  Every perfect phylogeny's 1-sets form a laminar family,
which some rooted binary tree refines, so minimising over all binary trees
gives the true optimum.  Only usable at desk scale: there are (2n-3)!! trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .matrix import ONE, ZERO, FlipMatrix
from .trees import PhyloTree

MAX_TAXA = 9
MAX_ENUM_TAXA, MAX_ENUM_COLUMNS, MAX_ENUM_COST = 5, 6, 3
_BIG = 1 << 40


@dataclass
class ExactResult:
    optimum: int
    witness_matrix: np.ndarray
    witness_tree: PhyloTree
    assignment: list[int]  # chosen 1-set per column, as taxon bitmasks


def _insertions(n: int) -> Iterator[tuple[int, ...]]:
    """Rooted binary trees on leaves 0..n-1 as sorted tuples of clade masks."""
    if n == 1:
        yield (1,)
        return
    start = (1, 2, 3)
    if n == 2:
        yield start
        return

    def grow(clades: tuple[int, ...], leaf: int):
        bit = 1 << leaf
        for c in clades:
            new = [a | bit if (a & c) == c and a != c else a for a in clades]
            new.append(c | bit)
            new.append(bit)
            nxt = tuple(sorted(new))
            if leaf == n - 1:
                yield nxt
            else:
                yield from grow(nxt, leaf + 1)

    yield from grow(start, 2)


@lru_cache(maxsize=8)
def _tree_table(n: int) -> np.ndarray:
    """Candidate 1-sets per tree: all clades plus the empty set."""
    rows = [t + (0,) for t in _insertions(n)]
    return np.array(rows, dtype=np.int64)


def tree_from_clades(masks, names) -> PhyloTree:
    """Build a PhyloTree from a laminar family of taxon bitmasks."""
    n = len(names)
    full = (1 << n) - 1
    sets = sorted({m for m in masks if m and m != full and m & (m - 1)}, key=lambda m: -bin(m).count("1"))
    if n == 1:
        return PhyloTree([[]], [names[0]], 0)
    nodes = [full] + sets
    kids: list[list] = [[] for _ in nodes]
    for i, s in enumerate(nodes[1:], start=1):
        parent = 0
        for j in range(i - 1, 0, -1):
            if nodes[j] & s == s:
                parent = j
                break
        kids[parent].append(i)
    leaf_parent = {}
    for t in range(n):
        bit = 1 << t
        best = 0
        for j in range(len(nodes) - 1, 0, -1):
            if nodes[j] & bit:
                best = j
                break
        leaf_parent.setdefault(best, []).append(t)

    def nested(i):
        parts = [nested(j) for j in kids[i]] + [names[t] for t in leaf_parent.get(i, [])]
        return parts[0] if len(parts) == 1 else tuple(parts)

    return PhyloTree.from_nested(nested(0))


def enumerate_rooted_trees(n: int, names=None) -> Iterator[PhyloTree]:
    """Every rooted binary tree on n labelled leaves, each exactly once."""
    if not 2 <= n <= MAX_TAXA:
        raise ValueError(f"tree enumeration supports 2 <= n <= {MAX_TAXA}")
    names = [str(i) for i in range(n)] if names is None else list(names)
    for clades in _insertions(n):
        yield tree_from_clades(clades, names)


def subset_costs(M: FlipMatrix) -> np.ndarray:
    """cost[S, u] for every taxon subset S (as bitmask) and column u.

    Violating a permanent entry costs a prohibitive amount.
    """
    n = M.n
    members = ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
    ones = (M.entries == ONE).astype(np.int64)
    zeros = (M.entries == ZERO).astype(np.int64)
    w = M.weights
    cost = (ones.sum(axis=0)[None, :] - members @ ones + members @ zeros) * w[None, :]
    if M.permanent.any():
        p1 = (M.permanent & (M.entries == ONE)).astype(np.int64)
        p0 = (M.permanent & (M.entries == ZERO)).astype(np.int64)
        bad = (members @ p1 < p1.sum(axis=0)[None, :]) | (members @ p0 > 0)
        cost = np.where(bad, _BIG, cost)
    return cost


def _masks_to_matrix(assign, n: int) -> np.ndarray:
    out = np.zeros((n, len(assign)), dtype=np.int8)
    for j, s in enumerate(assign):
        for t in range(n):
            if s >> t & 1:
                out[t, j] = ONE
    return out


def solve_exact(M: FlipMatrix, budget: int | None = None) -> ExactResult | None:
    """Minimum weighted flip cost over all perfect phylogenies.

    Permanent entries of M are respected.  Returns None if no completion
    respects them, or if ``budget`` is given and the optimum exceeds it.
    """
    n, m = M.n, M.m
    if n > MAX_TAXA:
        raise ValueError(f"exact solver is capped at {MAX_TAXA} taxa, got {n}")
    if m == 0:
        tree = tree_from_clades([], M.taxa) if n > 1 else PhyloTree([[]], [M.taxa[0]])
        return ExactResult(0, np.zeros((n, 0), dtype=np.int8), tree, [])
    cost = subset_costs(M)
    if n == 1:
        table = np.array([[1, 0]], dtype=np.int64)
    else:
        table = _tree_table(n) if n <= 7 else None
    best_val, best_tree, best_assign = None, None, None
    chunks = [table] if table is not None else _chunks(n)
    for chunk in chunks:
        c = cost[chunk]  # trees x candidates x columns
        idx = c.argmin(axis=1)
        per_tree = np.take_along_axis(c, idx[:, None, :], axis=1)[:, 0, :].sum(axis=1)
        i = int(per_tree.argmin())
        if best_val is None or per_tree[i] < best_val:
            best_val = int(per_tree[i])
            best_tree = chunk[i]
            best_assign = [int(chunk[i][j]) for j in idx[i]]
    if best_val >= _BIG or (budget is not None and best_val > budget):
        return None
    witness = _masks_to_matrix(best_assign, n)
    tree = tree_from_clades(best_tree.tolist(), M.taxa)
    return ExactResult(best_val, witness, tree, best_assign)


def _chunks(n: int, size: int = 20000):
    buf = []
    for t in _insertions(n):
        buf.append(t + (0,))
        if len(buf) == size:
            yield np.array(buf, dtype=np.int64)
            buf = []
    if buf:
        yield np.array(buf, dtype=np.int64)


def _compatible(a: int, b: int) -> bool:
    c = a & b
    return c == 0 or c == a or c == b


def enumerate_solutions_within(M: FlipMatrix, k: int) -> Iterator[np.ndarray]:
    """Every binary perfect-phylogeny matrix within weighted distance k of M.

    Depth-first over per-column 1-sets with pairwise compatibility pruning;
    each matrix is produced exactly once.
    """
    n, m = M.n, M.m
    if n > MAX_ENUM_TAXA or m > MAX_ENUM_COLUMNS or k > MAX_ENUM_COST:
        raise ValueError(
            f"solution enumeration is capped at n<={MAX_ENUM_TAXA}, "
            f"m<={MAX_ENUM_COLUMNS}, k<={MAX_ENUM_COST}"
        )
    yield from _solutions(M, k)


def _solutions(M: FlipMatrix, k: int) -> Iterator[np.ndarray]:
    cost = subset_costs(M)
    n, m = M.n, M.m
    options = [[(int(cost[s, j]), s) for s in range(1 << n) if cost[s, j] <= k] for j in range(m)]
    chosen: list[int] = []

    def dfs(j: int, spent: int):
        if j == m:
            yield _masks_to_matrix(chosen, n)
            return
        for c, s in options[j]:
            if spent + c > k:
                continue
            if all(_compatible(s, x) for x in chosen):
                chosen.append(s)
                yield from dfs(j + 1, spent + c)
                chosen.pop()

    yield from dfs(0, 0)
