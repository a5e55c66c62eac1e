"""Synthetic supertree instances.

A uniform random model tree is restricted to random taxon subsets, each
restriction is perturbed by a few NNI moves, and the resulting source trees
are encoded as a 0/1/? matrix.  With no NNI moves the sources are compatible
and the optimum is 0; every move adds some conflict.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass

from .matrix import FlipMatrix
from .trees import PhyloTree, encode_matrix, random_nni, random_tree


@dataclass(frozen=True)
class GenConfig:
    n: int
    s: int = 4
    keep: float = 0.75
    nni_moves: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need at least 3 taxa")
        if self.s < 1:
            raise ValueError("need at least one source tree")
        if not 0 < self.keep <= 1:
            raise ValueError("keep must lie in (0, 1]")
        if self.nni_moves < 0:
            raise ValueError("nni_moves must be non-negative")
        if self.kept < 3:
            raise ValueError(f"keep*n rounds to {self.kept}; source trees need at least 3 taxa")

    @property
    def kept(self) -> int:
        return int(math.floor(self.keep * self.n + 0.5))

    def to_dict(self) -> dict:
        return asdict(self)


def taxon_names(n: int) -> list[str]:
    width = len(str(n))
    return [f"t{i:0{width}d}" for i in range(1, n + 1)]


def gen_instance(cfg: GenConfig) -> tuple[FlipMatrix, PhyloTree, list[PhyloTree]]:
    """Matrix, model tree and source trees for ``cfg``; deterministic per seed."""
    rng = random.Random(cfg.seed)
    names = taxon_names(cfg.n)
    model = random_tree(names, rng)
    sources = []
    for _ in range(cfg.s):
        subset = sorted(rng.sample(names, cfg.kept))
        T = model.restrict(subset)
        for _ in range(cfg.nni_moves):
            T = random_nni(T, rng)
        sources.append(T)
    return encode_matrix(sources, names), model, sources
