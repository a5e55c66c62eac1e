"""Acceptance suite.

Each test prints one PASS/FAIL line (visible even under captured output)
and then asserts.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import random
import time

import numpy as np
import pytest

from flipreduce.bounds import Strategy, lower_bound, upper_bound
from flipreduce.exact import enumerate_solutions_within, solve_exact
from flipreduce.generate import GenConfig, gen_instance
from flipreduce.graph import DIS, FORBIDDEN, INC, PERMANENT, InclusionGraph
from flipreduce.matrix import ONE, UNKNOWN, from_sets
from flipreduce.phylo import enumerate_local_conflicts, is_perfect_phylogeny
from flipreduce.reduction import (
    EDGE_FORBIDDEN,
    EDGE_PERMANENT,
    FIX,
    FLIP,
    RESOLVE,
    ReductionOptions,
    ReductionState,
    Status,
    global_scan,
    reduce,
)
from flipreduce.report import ROWS, format_table, report_metrics
from flipreduce.trees import build_tree_from_pp, parse_newick, random_tree, write_newick

from conftest import random_matrix


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}  {detail}")
        assert ok, detail
    return emit


def _small_corpus(count):
    """Generated instances with n <= 6, m <= 8 and at most 30% '?'."""
    out = []
    seed = 0
    while len(out) < count:
        rng = random.Random(seed)
        n, keep = rng.randint(3, 6), rng.choice((0.7, 0.8, 0.9, 1.0))
        seed += 1
        if int(keep * n + 0.5) < 3:
            continue
        cfg = GenConfig(n=n, s=rng.randint(1, 4), keep=keep, nni_moves=seed % 3, seed=seed)
        M, _, _ = gen_instance(cfg)
        if 0 < M.m <= 8 and (M.entries == UNKNOWN).mean() <= 0.3:
            out.append(M)
    return out


@pytest.fixture(scope="module")
def corpus():
    return [(M, solve_exact(M).optimum) for M in _small_corpus(600)]


def _residual_optimum(S):
    res = solve_exact(S.residual())
    return None if res is None else res.optimum


def test_reduction_soundness(corpus, verdict):
    start = time.perf_counter()
    bad = []
    for i, (M, opt) in enumerate(corpus):
        S = reduce(M, opt, ReductionOptions(use_bounds=bool(i % 2), lb_restarts=5, seed=i))
        if S.status is Status.INFEASIBLE or S.flips_charged() + _residual_optimum(S) != opt:
            bad.append(i)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed <= 600
    verdict(1, "reduction soundness", ok,
            f"{len(corpus)} instances, {len(bad)} violations, {elapsed:.1f}s")


def test_infeasibility_detection(corpus, verdict):
    tested, bad = 0, []
    for i, (M, opt) in enumerate(corpus):
        if opt == 0:
            continue
        tested += 1
        S = reduce(M, opt - 1, ReductionOptions(use_bounds=bool(i % 2), lb_restarts=5, seed=i))
        if S.status is Status.INFEASIBLE:
            continue
        r = _residual_optimum(S)
        if r is not None and r <= S.k_remaining:
            bad.append(i)
    verdict(2, "infeasibility detection", not bad and tested > 0,
            f"{tested} instances with positive optimum, {len(bad)} violations")


def _holds(d, sol, oc):
    if d.kind in (FIX, FLIP, RESOLVE):
        return sol[d.taxon, oc[d.column]] == d.new
    a = sol[:, oc[d.column]] == ONE
    b = sol[:, oc[d.other]] == ONE
    rel = bool((a <= b).all()) if d.edge == INC else not (a & b).any()
    return rel == (d.kind == EDGE_PERMANENT)


def test_decision_universality(verdict):
    instances = checks = merged = 0
    bad = []
    i = 0
    while instances < 250:
        rng = np.random.default_rng(1000 + i)
        M = random_matrix(rng, int(rng.integers(3, 6)), int(rng.integers(2, 7)), p_unknown=0.15)
        opt = solve_exact(M).optimum
        k = min(3, opt + int(rng.integers(0, 2)))
        i += 1
        if k < opt:
            continue
        S = reduce(M, k, ReductionOptions(use_bounds=bool(i % 2), lb_restarts=3, seed=i))
        instances += 1
        sols = list(enumerate_solutions_within(M, k))
        if S.merges:
            # merged copies share one decision, so compare against solutions where they agree
            merged += 1
            groups = [[M.col(s), *(M.col(a) for a in absorbed)] for s, absorbed in S.merges]
            sols = [X for X in sols if all((X[:, g] == X[:, [g[0]]]).all() for g in groups)]
        oc = [M.col(c.id) for c in S.columns]
        for d in S.trace:
            if d.kind not in (FIX, FLIP, RESOLVE, EDGE_PERMANENT, EDGE_FORBIDDEN):
                continue
            for X in sols:
                checks += 1
                if not _holds(d, X, oc):
                    bad.append((i, d))
                    break
    verdict(3, "decision universality", not bad,
            f"{instances} instances ({merged} with merges), {checks} checks, {len(bad)} violations")


def test_bound_sandwich(corpus, verdict):
    bad = []
    for i, (M, opt) in enumerate(corpus[:500]):
        cert = lower_bound(M, list(Strategy)[i % 3], restarts=10, seed=i)
        ub = upper_bound(M)
        valid = cert.is_disjoint() and all(c.is_valid(M.entries) for c in cert.conflicts)
        witness_ok = is_perfect_phylogeny(M.with_entries(ub.witness_matrix))
        if not (valid and witness_ok and cert.value <= opt <= ub.value):
            bad.append(i)
    verdict(4, "bound sandwich", not bad, f"500 instances, {len(bad)} violations")


def test_characterization_equivalence(verdict):
    rng = np.random.default_rng(5)
    bad = pp_count = 0
    for _ in range(1000):
        M = random_matrix(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)), p_unknown=0.0)
        a = is_perfect_phylogeny(M)
        b = not enumerate_local_conflicts(M)
        c = solve_exact(M).optimum == 0
        pp_count += a
        bad += not (a == b == c)
    verdict(5, "characterization equivalence", bad == 0,
            f"1000 matrices ({pp_count} perfect phylogenies), {bad} disagreements")


def test_counter_coherence_and_fixpoint(verdict):
    incoherent = not_fixpoint = events = 0
    for i in range(500):
        rng = np.random.default_rng(i)
        M = random_matrix(rng, int(rng.integers(3, 9)), int(rng.integers(2, 11)))
        S = ReductionState(M, int(rng.integers(0, 30)))
        for _ in range(int(rng.integers(1, 40))):
            live = np.flatnonzero(S.alive)
            if S.status is not Status.RUNNING or len(live) < 2:
                break
            if rng.random() < 0.5:
                S.set_entry_permanent(int(rng.integers(S.n)), int(rng.choice(live)), int(rng.integers(2)), "fuzz")
            else:
                u, v = rng.choice(live, 2, replace=False)
                S.set_edge((INC, DIS)[int(rng.integers(2))], int(u), int(v),
                           (PERMANENT, FORBIDDEN)[int(rng.integers(2))], "fuzz")
            if S.status is Status.INFEASIBLE:
                break
            events += 1
            inc, ref = S.counters(), S.recompute_counters()
            pair = np.outer(S.alive, S.alive)
            for key, x in inc.items():
                y = ref[key] * (S.alive if key.startswith("ic") else pair)
                if not np.array_equal(x, y):
                    incoherent += 1
                    break
        R = reduce(M, int(rng.integers(0, 6)), ReductionOptions(use_bounds=bool(i % 2), lb_restarts=3, seed=i))
        not_fixpoint += bool(global_scan(R))
    verdict(6, "counter coherence and fixpoint", incoherent == 0 and not_fixpoint == 0,
            f"{events} fuzzed events, {incoherent} incoherent, {not_fixpoint} non-fixpoints")


def test_closure_confluence(verdict):
    rng = random.Random(7)
    bad = 0
    for _ in range(100):
        m = rng.randint(3, 8)
        labels = []
        for _ in range(rng.randint(1, 12)):
            u, v = rng.sample(range(m), 2)
            labels.append((rng.choice((INC, DIS)), u, v, rng.choice((PERMANENT, FORBIDDEN))))
        states = set()
        for _ in range(10):
            rng.shuffle(labels)
            g = InclusionGraph(m)
            for e in labels:
                g.set_edge(*e)
            states.add((g.inc.tobytes(), g.dis.tobytes(), g.infeasible))
        bad += len(states) != 1
    verdict(7, "closure confluence", bad == 0, f"100 sequences x 10 orders, {bad} divergent")


def test_report_format(verdict):
    M, _, _ = gen_instance(GenConfig(n=48, s=4, keep=0.75, nni_moves=2, seed=1))
    ub = upper_bound(M)
    start = time.perf_counter()
    S = reduce(M, ub.value, ReductionOptions(use_bounds=True, seed=1))
    report = report_metrics(S, ub.value, time.perf_counter() - start)
    text = format_table(report, {"n": 48, "s": 4})
    with_values = [line.rsplit(None, 1) for line in text.splitlines()]
    labels = [label.strip() for label, _ in with_values]
    expected = ["Taxa n", "Input trees s", *(label for _, label in ROWS), "Running time (h:min)"]
    two_dec = all(len(v.split(".")[1]) == 2 for _, v in with_values[2:-1] if v != "n/a")
    ok = labels == expected and two_dec and ":" in with_values[-1][1]
    if ok:
        print(text)
    verdict(8, "report format", ok, f"m={M.m}, k={ub.value}")


def test_performance(verdict):
    sizes, times = [], []
    for n in (24, 48, 72, 96):
        M, _, _ = gen_instance(GenConfig(n=n, s=4, keep=0.75, nni_moves=2, seed=1))
        start = time.perf_counter()
        k = upper_bound(M).value
        S = reduce(M, k, ReductionOptions(use_bounds=True, seed=1))
        times.append(time.perf_counter() - start)
        sizes.append(M.m)
        assert S.status is Status.REDUCED
    slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
    ok = times[-1] <= 600 and slope <= 3.5
    detail = ", ".join(f"m={m}: {t:.1f}s" for m, t in zip(sizes, times)) + f"; slope {slope:.2f}"
    verdict(9, "performance", ok, detail)


def test_tree_round_trips(verdict):
    rng = random.Random(11)
    bad = 0
    for _ in range(50):
        names = [f"x{j}" for j in range(rng.randint(1, 30))]
        T = random_tree(names, rng)
        U = parse_newick(write_newick(T))
        bad += U.clades() != T.clades()
    for _ in range(100):
        n = rng.randint(2, 15)
        names = [f"t{i + 1}" for i in range(n)]
        clades = list(random_tree(names, rng).clades(include_root=False))
        clades = rng.sample(clades, rng.randint(0, len(clades))) + [frozenset([rng.choice(names)])]
        M = from_sets([{int(x[1:]) for x in c} for c in clades], n)
        have = build_tree_from_pp(M).clades() | {frozenset([x]) for x in names}
        bad += any(frozenset(M.taxa[t] for t in np.flatnonzero(M.entries[:, j] == ONE)) not in have
                   for j in range(M.m))
    verdict(10, "tree round trips", bad == 0, f"50 Newick trees, 100 PP matrices, {bad} failures")
