"""Rooted leaf-labelled trees, Newick I/O and matrix encoding."""

from __future__ import annotations

import re
from typing import Iterable, Sequence

import numpy as np

from .matrix import ONE, UNKNOWN, ZERO, Column, FlipMatrix, MatrixError


class NewickError(ValueError):
    pass


class PhyloTree:
    """A rooted tree stored as a node arena.

    Leaves carry taxon names; internal nodes have at least two children.
    """

    def __init__(self, children: list[list[int]], names: list[str | None], root: int = 0):
        self.children = children
        self.names = names
        self.root = root
        self.parent = [-1] * len(children)
        for p, cs in enumerate(children):
            for c in cs:
                self.parent[c] = p
        self._clades: dict[int, frozenset] | None = None
        leaf_names = [names[i] for i in range(len(children)) if not children[i]]
        if len(set(leaf_names)) != len(leaf_names):
            raise NewickError("duplicate leaf name")
        for i, cs in enumerate(children):
            if len(cs) == 1:
                raise NewickError("internal node with a single child")

    @classmethod
    def from_nested(cls, obj) -> "PhyloTree":
        """Build from nested tuples/lists of leaf names, e.g. ``(("A", "B"), "C")``."""
        children: list[list[int]] = []
        names: list[str | None] = []

        def add(x):
            i = len(children)
            children.append([])
            names.append(None)
            if isinstance(x, (tuple, list)):
                for y in x:
                    children[i].append(add(y))
            else:
                names[i] = str(x)
            return i

        add(obj)
        return cls(children, names, 0)

    def is_leaf(self, i: int) -> bool:
        return not self.children[i]

    def postorder(self) -> list[int]:
        order, stack = [], [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(self.children[node]):
                stack.append((c, False))
        return order

    def clade_map(self) -> dict[int, frozenset]:
        if self._clades is None:
            clades: dict[int, frozenset] = {}
            for v in self.postorder():
                if self.is_leaf(v):
                    clades[v] = frozenset([self.names[v]])
                else:
                    clades[v] = frozenset().union(*(clades[c] for c in self.children[v]))
            self._clades = clades
        return self._clades

    def clade(self, node: int) -> frozenset:
        return self.clade_map()[node]

    def leaves(self) -> list[str]:
        return [self.names[v] for v in self.postorder() if self.is_leaf(v)]

    def internal_nodes(self) -> list[int]:
        return [v for v in self.postorder() if not self.is_leaf(v)]

    def clades(self, include_root: bool = True) -> set[frozenset]:
        """Clades of the internal nodes."""
        cm = self.clade_map()
        return {
            cm[v] for v in self.internal_nodes() if include_root or v != self.root
        }

    def restrict(self, keep: Iterable[str]) -> "PhyloTree":
        """Induced subtree on a set of leaf names, with unary nodes suppressed."""
        keep = set(keep)

        def build(v):
            if self.is_leaf(v):
                return self.names[v] if self.names[v] in keep else None
            parts = [b for b in (build(c) for c in self.children[v]) if b is not None]
            if not parts:
                return None
            if len(parts) == 1:
                return parts[0]
            return tuple(parts)

        nested = build(self.root)
        if nested is None:
            raise ValueError("restriction to an empty leaf set")
        return PhyloTree.from_nested(nested)

    def to_nested(self):
        def build(v):
            if self.is_leaf(v):
                return self.names[v]
            return tuple(build(c) for c in self.children[v])

        return build(self.root)

    def __repr__(self):
        return f"PhyloTree({write_newick(self)!r})"


# -- Newick -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|(,)|(;)|(:)|'([^']*)'|([^\s(),:;']+))")


def _tokenize(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                return
            raise NewickError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        if m.group(1):
            yield "(", None
        elif m.group(2):
            yield ")", None
        elif m.group(3):
            yield ",", None
        elif m.group(4):
            yield ";", None
        elif m.group(5):
            yield ":", None
        elif m.group(6) is not None:
            yield "name", m.group(6)
        elif m.group(7) is not None:
            yield "name", m.group(7)


def parse_newick(text: str) -> PhyloTree:
    """Parse one rooted Newick tree terminated by ';'.

    Branch lengths and internal labels are accepted and dropped.  Unary
    internal nodes are suppressed.
    """
    tokens = list(_tokenize(text))
    if not tokens or tokens[-1][0] != ";":
        raise NewickError("missing ';'")
    if sum(1 for t, _ in tokens if t == ";") != 1:
        raise NewickError("expected exactly one tree")
    pos = 0

    def peek():
        return tokens[pos][0]

    def skip_length():
        nonlocal pos
        if peek() == ":":
            pos += 1
            if peek() != "name":
                raise NewickError("missing branch length after ':'")
            pos += 1

    def subtree():
        nonlocal pos
        if peek() == "(":
            pos += 1
            kids = [subtree()]
            while peek() == ",":
                pos += 1
                kids.append(subtree())
            if peek() != ")":
                raise NewickError("unbalanced parentheses")
            pos += 1
            if peek() == "name":
                pos += 1
            skip_length()
            return kids[0] if len(kids) == 1 else tuple(kids)
        if peek() == "name":
            name = tokens[pos][1]
            pos += 1
            skip_length()
            return name
        raise NewickError("empty subtree")

    try:
        nested = subtree()
    except IndexError:
        raise NewickError("unbalanced parentheses") from None
    if peek() != ";":
        raise NewickError("unbalanced parentheses" if peek() == ")" else "trailing tokens")
    return PhyloTree.from_nested(nested)


def parse_newick_file(text: str) -> list[PhyloTree]:
    """All trees in a file: ';'-separated, '#' comment lines skipped."""
    body = "\n".join(l for l in text.splitlines() if not l.lstrip().startswith("#"))
    trees = []
    for chunk in body.split(";"):
        if chunk.strip():
            trees.append(parse_newick(chunk + ";"))
    return trees


def write_newick(T: PhyloTree) -> str:
    """Canonical Newick: children ordered by their smallest leaf name."""

    def fmt(v):
        if T.is_leaf(v):
            name = T.names[v]
            return name, (f"'{name}'" if re.search(r"[\s(),:;']", name) else name)
        parts = sorted(fmt(c) for c in T.children[v])
        return parts[0][0], "(" + ",".join(p[1] for p in parts) + ")"

    return fmt(T.root)[1] + ";"


# -- encoding ------------------------------------------------------------------


def encode_matrix(trees: Sequence[PhyloTree], taxa_universe: Iterable[str] | None = None) -> FlipMatrix:
    """Matrix representation of rooted trees.

    One column per non-root internal node: 1 inside the clade, 0 for taxa of
    that tree outside it, '?' for taxa missing from the tree.
    """
    if not trees:
        raise ValueError("need at least one tree")
    present = set().union(*(set(T.leaves()) for T in trees))
    if taxa_universe is None:
        taxa = sorted(present)
    else:
        taxa = sorted(set(taxa_universe))
        missing = present - set(taxa)
        if missing:
            raise ValueError(f"taxa not in universe: {sorted(missing)}")
    row = {name: i for i, name in enumerate(taxa)}
    cols, columns = [], []
    for ti, T in enumerate(trees):
        in_tree = np.zeros(len(taxa), dtype=bool)
        in_tree[[row[x] for x in T.leaves()]] = True
        cm = T.clade_map()
        for v in T.internal_nodes():
            if v == T.root:
                continue
            col = np.where(in_tree, ZERO, UNKNOWN).astype(np.int8)
            col[[row[x] for x in cm[v]]] = ONE
            cols.append(col)
            columns.append(Column(f"c{len(columns) + 1}", 1, ((ti, v),)))
    entries = np.stack(cols, axis=1) if cols else np.zeros((len(taxa), 0), dtype=np.int8)
    return FlipMatrix(taxa, columns, entries)


def build_tree_from_pp(M) -> PhyloTree:
    """Tree whose clades contain every column's 1-set.

    Follows Gusfield's construction: columns sorted by decreasing size, each
    taxon's characters form a chain, and each column's parent is its
    predecessor in those chains.  Raises MatrixError if M has '?' entries or
    is not a perfect phylogeny.
    """
    if isinstance(M, FlipMatrix):
        taxa, entries = M.taxa, M.entries
    else:
        entries = np.asarray(M)
        taxa = [str(i + 1) for i in range(entries.shape[0])]
    if np.any(entries == UNKNOWN):
        raise MatrixError("matrix is not binary")
    n, m = entries.shape
    ones = entries == ONE
    sizes = ones.sum(axis=0)
    # distinct non-trivial clades only: singletons are leaves, the full set is the root
    seen: dict[bytes, int] = {}
    order = []
    for j in sorted(range(m), key=lambda j: (-sizes[j], j)):
        if sizes[j] <= 1 or sizes[j] == n:
            continue
        key = ones[:, j].tobytes()
        if key not in seen:
            seen[key] = j
            order.append(j)
    parent = {}
    last = [-1] * n  # last character seen on each taxon's chain
    for j in order:
        members = np.flatnonzero(ones[:, j])
        preds = {last[t] for t in members}
        if len(preds) != 1:
            raise MatrixError("not a perfect phylogeny")
        p = preds.pop()
        if p != -1 and sizes[p] == sizes[j]:
            raise MatrixError("not a perfect phylogeny")
        parent[j] = p
        for t in members:
            last[t] = j
    # verify chain consistency: each column's members are exactly the taxa below it
    children: list[list[int]] = [[]]
    names: list[str | None] = [None]
    node_of = {-1: 0}
    for j in order:
        node_of[j] = len(children)
        children.append([])
        names.append(None)
        children[node_of[parent[j]]].append(node_of[j])
    for t in range(n):
        leaf = len(children)
        children.append([])
        names.append(taxa[t])
        children[node_of[last[t]]].append(leaf)
    if n == 1:
        T = PhyloTree([[]], [taxa[0]], 0)
    else:
        T = PhyloTree.from_nested(_nested(children, names, 0))
    got = T.clades() | {frozenset([x]) for x in taxa}
    for j in range(m):
        s = frozenset(taxa[t] for t in np.flatnonzero(ones[:, j]))
        if s and s not in got:
            raise MatrixError("not a perfect phylogeny")
    return T


def _nested(children, names, v):
    # suppress unary chains left by columns whose members all sit deeper
    while len(children[v]) == 1:
        v = children[v][0]
    if not children[v]:
        return names[v]
    return tuple(_nested(children, names, c) for c in children[v])


# -- rearrangements --------------------------------------------------------------


def _nni_nested(nested) -> list:
    if not isinstance(nested, tuple):
        return []
    out = []
    kids = list(nested)
    for i, c in enumerate(kids):
        if not isinstance(c, tuple):
            continue
        others = kids[:i] + kids[i + 1:]
        for j, g in enumerate(c):
            for k, s in enumerate(others):
                inner = list(c)
                inner[j] = s
                rest = others[:k] + [g] + others[k + 1:]
                out.append(tuple([tuple(inner)] + rest))
    for i, c in enumerate(kids):
        for variant in _nni_nested(c):
            out.append(tuple(kids[:i] + [variant] + kids[i + 1:]))
    return out


def nni_neighbors(T: PhyloTree) -> list[PhyloTree]:
    """All trees one nearest-neighbour interchange away from T.

    An interchange swaps a child of an internal non-root node with that
    node's sibling.
    """
    return [PhyloTree.from_nested(x) for x in _nni_nested(T.to_nested())]


def random_nni(T: PhyloTree, rng) -> PhyloTree:
    """One uniformly chosen interchange; T itself if none exists."""
    options = _nni_nested(T.to_nested())
    if not options:
        return T
    return PhyloTree.from_nested(options[rng.randrange(len(options))])


def random_tree(names: Sequence[str], rng) -> PhyloTree:
    """Uniform rooted binary topology by random leaf insertion.

    Leaf i is attached to one of the 2i-1 edges of the current tree
    (including the one above the root), chosen uniformly.
    """
    names = list(names)
    if len(names) == 1:
        return PhyloTree([[]], [names[0]], 0)
    children: list[list[int]] = [[1, 2], [], []]
    parent = [-1, 0, 0]
    labels: list[str | None] = [None, names[0], names[1]]
    root = 0
    for name in names[2:]:
        target = rng.randrange(len(children))
        leaf, mid = len(children), len(children) + 1
        children.append([])
        labels.append(name)
        parent.append(mid)
        children.append([target, leaf])
        labels.append(None)
        p = parent[target]
        parent.append(p)
        if p == -1:
            root = mid
        else:
            children[p][children[p].index(target)] = mid
        parent[target] = mid

    def nested(v):
        if not children[v]:
            return labels[v]
        return tuple(nested(c) for c in children[v])

    return PhyloTree.from_nested(nested(root))
