import itertools
import random

import numpy as np
from hypothesis import given, settings, strategies as st

from flipreduce.graph import DIS, FORBIDDEN, INC, PERMANENT, InclusionGraph, observed_edges
from flipreduce.matrix import from_sets


def test_observed_edges():
    o = observed_edges(from_sets([{1, 2}, {1, 2, 3}], 3), 0, 1)
    assert (o.u_in_v, o.v_in_u, o.disjoint) == (True, False, False)
    o = observed_edges(from_sets([{1}, {2}], 3), 0, 1)
    assert o.disjoint and not o.u_in_v
    o = observed_edges(from_sets([{1, 2}, {2, 3}], 3), 0, 1)
    assert not (o.u_in_v or o.v_in_u or o.disjoint)


def test_two_forbidden_make_third_permanent():
    g = InclusionGraph(2)
    g.set_edge(INC, 0, 1, FORBIDDEN)
    events = g.set_edge(INC, 1, 0, FORBIDDEN)
    assert g.is_permanent(DIS, 0, 1)
    assert events[-1].rule == "closure"


def test_transitivity():
    g = InclusionGraph(3)
    g.set_edge(INC, 0, 1, PERMANENT)
    g.set_edge(INC, 1, 2, PERMANENT)
    assert g.is_permanent(INC, 0, 2)


def test_inclusion_into_disjoint():
    g = InclusionGraph(3)
    g.set_edge(INC, 0, 1, PERMANENT)
    g.set_edge(DIS, 1, 2, PERMANENT)
    assert g.is_permanent(DIS, 0, 2)


def test_contradictions():
    g = InclusionGraph(2)
    g.set_edge(INC, 0, 1, PERMANENT)
    g.set_edge(INC, 0, 1, FORBIDDEN)
    assert g.infeasible
    g = InclusionGraph(2)
    for e in ((INC, 0, 1), (INC, 1, 0), (DIS, 0, 1)):
        g.set_edge(*e, FORBIDDEN)
    assert g.infeasible


def test_closure_check():
    g = InclusionGraph(4)
    assert g.closure_check()
    g.set_edge(INC, 0, 1, PERMANENT)
    g.set_edge(INC, 1, 2, PERMANENT)
    g.set_edge(DIS, 2, 3, PERMANENT)
    assert g.closure_check()
    g.inc[0, 2] = 0  # bypass set_edge
    assert not g.closure_check()


def _random_labels(rng, m, count):
    out = []
    for _ in range(count):
        u, v = rng.sample(range(m), 2)
        out.append((rng.choice((INC, DIS)), u, v, rng.choice((PERMANENT, FORBIDDEN))))
    return out


def _apply(m, labels):
    g = InclusionGraph(m)
    for e in labels:
        g.set_edge(*e)
    return g


def test_closure_confluence():
    rng = random.Random(1)
    for _ in range(100):
        m = rng.randint(3, 7)
        labels = _random_labels(rng, m, rng.randint(1, 10))
        ref = _apply(m, labels)
        assert ref.closure_check()
        for _ in range(10):
            perm = labels[:]
            rng.shuffle(perm)
            g = _apply(m, perm)
            assert np.array_equal(g.inc, ref.inc) and np.array_equal(g.dis, ref.dis)
            assert g.infeasible == ref.infeasible


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_closure_holds_after_any_sequence(seed):
    rng = random.Random(seed)
    g = _apply(6, _random_labels(rng, 6, 12))
    assert g.closure_check()


def test_removed_columns_are_ignored():
    g = InclusionGraph(3)
    g.remove_column(2)
    g.set_edge(INC, 0, 1, PERMANENT)
    assert list(g.labels()) == [(INC, 0, 1, PERMANENT)]


def test_closure_is_sound_for_laminar_families():
    # labels read off a real laminar family never contradict each other
    rng = random.Random(3)
    for _ in range(50):
        sets = [frozenset(rng.sample(range(6), rng.randint(1, 3))) for _ in range(4)]
        if any(a & b and not (a <= b or b <= a) for a, b in itertools.combinations(sets, 2)):
            continue
        g = InclusionGraph(4)
        for u, v in itertools.permutations(range(4), 2):
            g.set_edge(INC, u, v, PERMANENT if sets[u] <= sets[v] else FORBIDDEN)
            if u < v:
                g.set_edge(DIS, u, v, FORBIDDEN if sets[u] & sets[v] else PERMANENT)
        assert not g.infeasible or any(
            sets[u] == sets[v] or not (sets[u] and sets[v]) for u, v in itertools.combinations(range(4), 2)
        )
