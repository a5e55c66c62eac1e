"""Lower bounds from cell-disjoint local conflicts and a heuristic upper bound."""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .matrix import ONE, UNKNOWN, ZERO, FlipMatrix
from .phylo import LocalConflict
from .trees import PhyloTree, nni_neighbors

_BIG = 1 << 40


class Strategy(enum.Enum):
    GREEDY = "greedy"
    INVERSE_WEIGHT = "inverse"
    RANDOM = "random"


DEFAULT_RESTARTS = 100


@dataclass
class BoundCertificate:
    conflicts: list[LocalConflict] = field(default_factory=list)
    value: int = 0

    def is_disjoint(self) -> bool:
        seen = set()
        for c in self.conflicts:
            cells = set(c.cells())
            if cells & seen:
                return False
            seen |= cells
        return True


@dataclass(frozen=True)
class ExcludeRow:
    t: int


@dataclass(frozen=True)
class ExcludeColumns:
    u: int
    v: int


@dataclass
class UpperBoundResult:
    value: int
    witness_tree: PhyloTree
    witness_matrix: np.ndarray


# -- conflict packing ---------------------------------------------------------


class _Packer:
    """Incremental N-set cardinalities over the cells still usable."""

    def __init__(self, entries: np.ndarray, usable: np.ndarray | None = None):
        self.A1 = (entries == ONE).astype(np.int64)
        self.A0 = (entries == ZERO).astype(np.int64)
        if usable is not None:
            self.A1 &= usable
            self.A0 &= usable
        self.qm = self.A1.T @ self.A0  # qm[u, v] = |N(u-v)|
        self.qp = self.A1.T @ self.A1  # qp[u, v] = |N(u+v)|

    def in_conflict(self, u: int, v: int) -> bool:
        return self.qm[u, v] > 0 and self.qm[v, u] > 0 and self.qp[u, v] > 0

    def conflicting_pairs(self) -> list[tuple[int, int]]:
        c = (self.qm > 0) & (self.qm.T > 0) & (self.qp > 0)
        u, v = np.nonzero(np.triu(c, 1))
        return list(zip(u.tolist(), v.tolist()))

    def witnesses(self, u: int, v: int):
        A1, A0 = self.A1, self.A0
        return (
            np.flatnonzero(A1[:, u] & A0[:, v]),
            np.flatnonzero(A1[:, u] & A1[:, v]),
            np.flatnonzero(A1[:, v] & A0[:, u]),
        )

    def mask(self, c: LocalConflict) -> None:
        for t, col in c.cells():
            if self.A1[t, col]:
                self.A1[t, col] = 0
                row1 = self.A1[t]
                self.qm[col, :] -= self.A0[t]
                self.qp[col, :] -= row1
                self.qp[:, col] -= row1
            elif self.A0[t, col]:
                self.A0[t, col] = 0
                self.qm[:, col] -= self.A1[t]


def _usable_mask(shape, exclusion) -> np.ndarray | None:
    if exclusion is None:
        return None
    usable = np.ones(shape, dtype=np.int64)
    if isinstance(exclusion, ExcludeRow):
        usable[exclusion.t, :] = 0
    elif isinstance(exclusion, ExcludeColumns):
        usable[:, [exclusion.u, exclusion.v]] = 0
    else:
        raise TypeError(f"unknown exclusion {exclusion!r}")
    return usable


def _pack(entries, weights, strategy: Strategy, rng, exclusion=None) -> BoundCertificate:
    pk = _Packer(entries, _usable_mask(entries.shape, exclusion))
    pairs = pk.conflicting_pairs()
    chosen: list[LocalConflict] = []
    value = 0

    def take(u, v, t1, t2, t3):
        nonlocal value
        c = LocalConflict(u, v, int(t1), int(t2), int(t3))
        chosen.append(c)
        value += int(min(weights[u], weights[v]))
        pk.mask(c)

    if strategy is Strategy.RANDOM:
        pool = list(pairs)
        while pool:
            i = int(rng.integers(len(pool)))
            u, v = pool[i]
            if not pk.in_conflict(u, v):
                pool[i] = pool[-1]
                pool.pop()
                continue
            n1, n2, n3 = pk.witnesses(u, v)
            take(u, v, rng.choice(n1), rng.choice(n2), rng.choice(n3))
    elif strategy is Strategy.GREEDY:
        pairs.sort(key=lambda p: (-min(weights[p[0]], weights[p[1]]), p))
        for u, v in pairs:
            while pk.in_conflict(u, v):
                n1, n2, n3 = pk.witnesses(u, v)
                take(u, v, n1[0], n2[0], n3[0])
    elif strategy is Strategy.INVERSE_WEIGHT:
        d1, d0 = _cell_degrees(pk)
        scored = []
        for u, v in pairs:
            n1, n2, n3 = pk.witnesses(u, v)
            overlap = (
                (d1[n1, u] + d0[n1, v]).min() + (d1[n2, u] + d1[n2, v]).min()
                + (d0[n3, u] + d1[n3, v]).min() - 6
            )
            scored.append((-min(weights[u], weights[v]) / (1 + overlap), u, v))
        scored.sort()
        for _, u, v in scored:
            while pk.in_conflict(u, v):
                n1, n2, n3 = pk.witnesses(u, v)
                take(
                    u, v,
                    n1[np.argmin(d1[n1, u] + d0[n1, v])],
                    n2[np.argmin(d1[n2, u] + d1[n2, v])],
                    n3[np.argmin(d0[n3, u] + d1[n3, v])],
                )
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return BoundCertificate(chosen, value)


def _cell_degrees(pk: _Packer):
    """Number of local conflicts through each 1-cell and each 0-cell."""
    qm, qp = pk.qm, pk.qp
    k1 = qp * qm.T  # pairs (c, x): taxon with c=1, x=0
    k2 = qm * qm.T  # taxon with c=1, x=1
    k0 = qp * qm  # taxon with c=0, x=1
    d1 = ((pk.A0 @ k1.T) + (pk.A1 @ k2.T)) * pk.A1
    d0 = (pk.A1 @ k0.T) * pk.A0
    return d1, d0


def _restart_rngs(seed, restarts):
    return [np.random.default_rng([0 if seed is None else seed, r]) for r in range(restarts)]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FLIPREDUCE_THREADS", "1")))
    except ValueError:
        return 1


def certificates(
    entries: np.ndarray,
    weights,
    strategy: Strategy = Strategy.RANDOM,
    restarts: int = DEFAULT_RESTARTS,
    seed: int | None = 0,
    exclusion=None,
) -> list[BoundCertificate]:
    """One certificate per restart (a single one for deterministic strategies)."""
    weights = np.asarray(weights)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if strategy is not Strategy.RANDOM:
        return [_pack(entries, weights, strategy, None, exclusion)]
    rngs = _restart_rngs(seed, restarts)
    run = lambda rng: _pack(entries, weights, strategy, rng, exclusion)  # noqa: E731
    workers = _workers()
    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(run, rngs))
    return [run(rng) for rng in rngs]


def _best(certs: list[BoundCertificate]) -> BoundCertificate:
    best = certs[0]
    for c in certs[1:]:
        if c.value > best.value:
            best = c
    return best


def lower_bound(
    M: FlipMatrix,
    strategy: Strategy = Strategy.RANDOM,
    restarts: int = DEFAULT_RESTARTS,
    seed: int | None = 0,
) -> BoundCertificate:
    """Best set of cell-disjoint local conflicts found by the strategy."""
    return _best(certificates(M.entries, M.weights, strategy, restarts, seed))


def lower_bound_excluding(
    M: FlipMatrix,
    exclusion,
    strategy: Strategy = Strategy.RANDOM,
    restarts: int = DEFAULT_RESTARTS,
    seed: int | None = 0,
) -> int:
    """Lower bound on flips outside an excluded row or column pair.

    Conflicts touching the exclusion are never selected.
    """
    if isinstance(exclusion, ExcludeRow) and not 0 <= exclusion.t < M.n:
        raise IndexError(f"no taxon {exclusion.t}")
    if isinstance(exclusion, ExcludeColumns):
        M.col(exclusion.u), M.col(exclusion.v)
    return _best(certificates(M.entries, M.weights, strategy, restarts, seed, exclusion)).value


def restrict_certificate(cert: BoundCertificate, weights, exclusion) -> int:
    """Value of the certificate after dropping conflicts that touch the exclusion."""
    total = 0
    for c in cert.conflicts:
        if isinstance(exclusion, ExcludeRow) and exclusion.t in (c.t1, c.t2, c.t3):
            continue
        if isinstance(exclusion, ExcludeColumns) and {c.u, c.v} & {exclusion.u, exclusion.v}:
            continue
        total += int(min(weights[c.u], weights[c.v]))
    return total


# -- upper bound ------------------------------------------------------------------


def _candidate_sets(M: FlipMatrix, T: PhyloTree) -> list[frozenset]:
    taxa = set(M.taxa)
    if set(T.leaves()) != taxa:
        raise ValueError("tree leaves do not match the matrix taxa")
    sets = {frozenset(), frozenset(taxa)}
    sets |= T.clades()
    sets |= {frozenset([x]) for x in taxa}
    return sorted(sets, key=lambda s: (len(s), sorted(s)))


def _column_costs(M: FlipMatrix, membership: np.ndarray) -> np.ndarray:
    """cost[s, u] of giving column u the 1-set in row s of ``membership``."""
    ones = (M.entries == ONE).astype(np.int64)
    zeros = (M.entries == ZERO).astype(np.int64)
    cost = (ones.sum(axis=0)[None, :] - membership @ ones + membership @ zeros) * M.weights[None, :]
    if M.permanent.any():
        p1 = (M.permanent & (M.entries == ONE)).astype(np.int64)
        p0 = (M.permanent & (M.entries == ZERO)).astype(np.int64)
        bad = (membership @ p1 < p1.sum(axis=0)[None, :]) | (membership @ p0 > 0)
        cost = np.where(bad, _BIG, cost)
    return cost


def fixed_tree_cost(M: FlipMatrix, T: PhyloTree) -> tuple[int, list[frozenset]]:
    """Optimal flip cost when the solution must be displayed by T.

    Each column independently takes the cheapest 1-set among T's clades,
    singletons, the full set and the empty set.  Returns the total and the
    chosen set per column (as taxon-name sets).
    """
    sets = _candidate_sets(M, T)
    row = {x: i for i, x in enumerate(M.taxa)}
    membership = np.zeros((len(sets), M.n), dtype=np.int64)
    for i, s in enumerate(sets):
        membership[i, [row[x] for x in s]] = 1
    if M.m == 0:
        return 0, []
    cost = _column_costs(M, membership)
    pick = cost.argmin(axis=0)
    value = int(cost[pick, np.arange(M.m)].sum())
    return value, [sets[i] for i in pick]


def _profile_tree(M: FlipMatrix) -> PhyloTree:
    """Average-linkage tree over taxon profiles; '?' entries are neutral."""
    n = M.n
    if n == 1:
        return PhyloTree([[]], [M.taxa[0]], 0)
    if n == 2:
        return PhyloTree.from_nested((M.taxa[0], M.taxa[1]))
    defined = (M.entries != UNKNOWN).astype(float) * M.weights[None, :]
    ones = (M.entries == ONE).astype(float)
    zeros = (M.entries == ZERO).astype(float)
    agree = (ones * M.weights) @ ones.T + (zeros * M.weights) @ zeros.T
    total = defined @ (M.entries != UNKNOWN).astype(float).T
    with np.errstate(invalid="ignore", divide="ignore"):
        dist = np.where(total > 0, 1.0 - agree / np.where(total > 0, total, 1), 0.5)
    np.fill_diagonal(dist, 0.0)
    Z = linkage(squareform(dist, checks=False), method="average")
    nodes: list = list(M.taxa)
    for a, b, _, _ in Z:
        nodes.append((nodes[int(a)], nodes[int(b)]))
    return PhyloTree.from_nested(nodes[-1])


def _build_tree(M: FlipMatrix) -> PhyloTree:
    """Top-down tree in the spirit of BUILD.

    Taxa sharing a 1 in a column that also has a 0 among the current taxa
    must stay together.  When that leaves a single component, the weakest
    links are cut until it falls apart.
    """
    E, w = M.entries, M.weights.astype(np.int64)

    def split(rows: list[int]):
        if len(rows) == 1:
            return M.taxa[rows[0]]
        if len(rows) == 2:
            return (M.taxa[rows[0]], M.taxa[rows[1]])
        sub = E[rows]
        ones = sub == ONE
        informative = (ones.sum(axis=0) >= 2) & (sub == ZERO).any(axis=0)
        O = ones[:, informative].astype(np.int64)
        W = (O * w[informative]) @ O.T
        np.fill_diagonal(W, 0)
        count, labels = connected_components(csr_matrix(W > 0), directed=False)
        for thr in np.unique(W[W > 0]):
            if count > 1:
                break
            count, labels = connected_components(csr_matrix(W > thr), directed=False)
        parts = [split([rows[i] for i in np.flatnonzero(labels == c)]) for c in range(count)]
        node = parts[0]
        for p in parts[1:]:
            node = (node, p)
        return node

    if M.n == 1:
        return PhyloTree([[]], [M.taxa[0]], 0)
    return PhyloTree.from_nested(split(list(range(M.n))))


def upper_bound(M: FlipMatrix, seed: int | None = 0, nni_rounds: int = 10) -> UpperBoundResult:
    """Cost of a concrete perfect phylogeny.

    Starts from the better of an average-linkage tree and a BUILD-style tree,
    improves it by first-improvement NNI hill climbing and scores each
    column exactly.  The result does not depend on ``seed``.
    """
    tree, value = None, None
    for cand in (_profile_tree(M), _build_tree(M)):
        v, _ = fixed_tree_cost(M, cand)
        if value is None or v < value:
            tree, value = cand, v
    for _ in range(nni_rounds):
        if value == 0:
            break
        improved = False
        for cand in nni_neighbors(tree):
            v, _ = fixed_tree_cost(M, cand)
            if v < value:
                value, tree, improved = v, cand, True
                break
        if not improved:
            break
    value, sets = fixed_tree_cost(M, tree)
    row = {x: i for i, x in enumerate(M.taxa)}
    witness = np.zeros((M.n, M.m), dtype=np.int8)
    for j, s in enumerate(sets):
        witness[[row[x] for x in s], j] = ONE
    return UpperBoundResult(value, tree, witness)
