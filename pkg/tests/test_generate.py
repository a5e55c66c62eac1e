import numpy as np
import pytest

from flipreduce.exact import solve_exact
from flipreduce.generate import GenConfig, gen_instance
from flipreduce.matrix import UNKNOWN


def test_column_count_matches_shape():
    M, model, sources = gen_instance(GenConfig(n=48, s=4, keep=0.75, seed=1))
    assert len(sources) == 4 and len(model.leaves()) == 48
    assert abs(M.m - 136) <= 4


def test_consensus_instance_has_no_unknowns_and_zero_optimum():
    M, _, _ = gen_instance(GenConfig(n=6, s=2, keep=1.0, seed=3))
    assert not (M.entries == UNKNOWN).any()
    assert solve_exact(M).optimum == 0


def test_same_seed_same_matrix():
    cfg = GenConfig(n=20, s=3, keep=0.8, nni_moves=2, seed=9)
    assert gen_instance(cfg)[0] == gen_instance(cfg)[0]
    assert gen_instance(cfg)[0] != gen_instance(GenConfig(n=20, s=3, keep=0.8, nni_moves=2, seed=10))[0]


def test_no_nni_means_optimum_zero():
    for seed in range(30):
        cfg = GenConfig(n=int(4 + seed % 4), s=1 + seed % 3, keep=0.8, seed=seed)
        M, _, _ = gen_instance(cfg)
        if M.m:
            assert solve_exact(M).optimum == 0


def test_unknown_ratio_tracks_keep():
    ratios = []
    for seed in range(100):
        M, _, _ = gen_instance(GenConfig(n=24, s=4, keep=0.75, seed=seed))
        ratios.append((M.entries == UNKNOWN).mean())
    assert abs(np.mean(ratios) - 0.25) <= 0.05


def test_column_count_window():
    for seed in range(20):
        cfg = GenConfig(n=32, s=4, keep=0.75, nni_moves=seed % 3, seed=seed)
        M, _, _ = gen_instance(cfg)
        centre = (cfg.keep * cfg.n - 2) * cfg.s
        assert centre - cfg.s <= M.m <= centre + cfg.s


@pytest.mark.parametrize("kwargs", [dict(n=2), dict(n=10, s=0), dict(n=10, keep=0), dict(n=10, keep=1.5),
                                    dict(n=4, keep=0.5), dict(n=10, nni_moves=-1)])
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        GenConfig(**kwargs)
