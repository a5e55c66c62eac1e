"""Parameterized data reduction for minimum-flip supertree instances.

Given a matrix and a flip budget k, the engine fixes, flips and resolves
entries and labels inclusion-graph edges so that every solution of cost at
most k agrees with each decision.  Rules are applied to a fixpoint:

* pending updates (entry fixed, edge labelled, column removed) are processed
  from a stack, each inspecting O(m) partner columns or O(n) taxa;
* threshold rules on |N(u-v)|, |N(u+v)| and the induced costs are found by
  draining the overflow buckets of a ``BucketIndex``;
* optionally, lower bounds on the rest of the matrix sharpen the threshold
  rules.

Rule numbers in the trace:

  1, 2    |N(u-v)| > k forbids u->v; |N(u+v)| > k forbids u~v
  3-5     permanent entries propagate along permanent edges
  6, 7    induced cost one/zero above k fixes an entry to 0/1
  8, 9    two permanent entries in a row forbid an edge
  10-15   tree-ish closure of the inclusion graph ("closure": two of
          three edges forbidden makes the third permanent)
  16      columns with at most one 1 are removed
  17-20   rules 1, 2, 6, 7 with a lower bound on the untouched part added
  lb      the lower bound alone exceeds k
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import bounds as _bounds
from .buckets import INF, BucketIndex
from .graph import DIS, FORBIDDEN, INC, PERMANENT, InclusionGraph
from .matrix import ONE, UNKNOWN, ZERO, FlipMatrix, merge_identical_columns, strip_trivial_columns

_STATE = {ZERO: "0", ONE: "1", UNKNOWN: "?"}


class Status(enum.Enum):
    RUNNING = "running"
    REDUCED = "reduced"
    INFEASIBLE = "infeasible"


FIX, FLIP, RESOLVE = "FixEntry", "FlipEntry", "ResolveEntry"
EDGE_PERMANENT, EDGE_FORBIDDEN = "EdgePermanent", "EdgeForbidden"
REMOVED, MERGED = "ColumnRemoved", "ColumnsMerged"


@dataclass
class DecisionRecord:
    kind: str
    rule: str
    cost: int = 0
    taxon: int | None = None
    column: int | None = None
    other: int | None = None  # second column of an edge
    old: int | None = None
    new: int | None = None
    edge: str | None = None  # INC or DIS
    merged: tuple = ()


@dataclass
class ReductionOptions:
    use_bounds: bool = False
    lb_strategy: _bounds.Strategy = _bounds.Strategy.RANDOM
    lb_restarts: int = _bounds.DEFAULT_RESTARTS
    seed: int = 0


class Infeasible(Exception):
    pass


class ReductionState:
    """Matrix, inclusion graph, budget and incremental counters.

    Column indices refer to the working columns left after merging
    identical columns and dropping trivial ones at construction.
    """

    def __init__(self, M: FlipMatrix, k: int, options: ReductionOptions | None = None):
        if k < 0:
            raise ValueError("k must be non-negative")
        self.options = options or ReductionOptions()
        self.input = M
        self.trace: list[DecisionRecord] = []
        self.k_initial = k
        self.k_remaining = k
        self.status = Status.RUNNING
        self.reason: DecisionRecord | str | None = None

        merged, merges = merge_identical_columns(M)
        for survivor, absorbed in merges:
            self.trace.append(DecisionRecord(MERGED, "merge", merged=(survivor, *absorbed)))
        work, removed = strip_trivial_columns(merged)
        self.removed_at_init = removed
        for cid in removed:
            self.trace.append(DecisionRecord(REMOVED, "16", merged=(cid,)))
        self.merges = merges
        self.taxa = work.taxa
        self.columns = work.columns
        self.weights = work.weights
        n, m = work.n, work.m
        self.n, self.m = n, m
        self.val = work.entries.copy()
        self.perm = np.zeros((n, m), dtype=bool)
        self.alive = np.ones(m, dtype=bool)
        self.ones_count = np.sum(self.val == ONE, axis=0)
        self.graph = InclusionGraph(m)
        self.pending: list[tuple] = []

        c = self.recompute_counters()
        self.qm, self.qp = c["q_minus"], c["q_plus"]
        self.qm_inf, self.qp_inf = c["q_minus_inf"], c["q_plus_inf"]
        self.icf, self.icz = c["icf"], c["icz"]

        self.b_minus = BucketIndex(k)
        self.b_plus = BucketIndex(k)
        self.b_icf = BucketIndex(k)
        self.b_icz = BucketIndex(k)
        for u in range(m):
            for v in range(m):
                if u != v:
                    self.b_minus.set((u, v), int(self.qm[u, v]))
                    if u < v:
                        self.b_plus.set((u, v), int(self.qp[u, v]))
        icf_star, icz_star = self._starred()
        for t in range(n):
            for u in range(m):
                self.b_icf.set((t, u), int(icf_star[t, u]))
                self.b_icz.set((t, u), int(icz_star[t, u]))

        self._bounds_k: int | None = None
        self._bounds_dirty = True
        self.lb_global = 0
        self._pair_lb = np.zeros((m, m), dtype=np.int64)
        self._row_lb = np.zeros(n, dtype=np.int64)
        self.certificate: _bounds.BoundCertificate | None = None

        for t, j in zip(*np.nonzero(work.permanent)):
            self.pending.append(("entry", int(t), int(j), int(work.entries[t, j]), "input"))

    # -- counters ---------------------------------------------------------

    def recompute_counters(self) -> dict[str, np.ndarray]:
        """All counters from scratch (dead columns zeroed)."""
        live = self.alive
        A1 = ((self.val == ONE) & live).astype(np.int64)
        A0 = ((self.val == ZERO) & live).astype(np.int64)
        P1 = (A1 * self.perm).astype(np.int64)
        P0 = (A0 * self.perm).astype(np.int64)
        pair_live = np.outer(live, live)
        Pi = (((self.graph.inc & PERMANENT) > 0) & pair_live).astype(np.int64)
        Pd = (((self.graph.dis & PERMANENT) > 0) & pair_live).astype(np.int64)
        out = {
            "q_minus": A1.T @ A0,
            "q_plus": A1.T @ A1,
            "q_minus_inf": (P1.T @ P0) > 0,
            "q_plus_inf": (P1.T @ P1) > 0,
            "icf": A0 @ Pi.T + A1 @ Pd.T,
            "icz": A1 @ Pi,
        }
        np.fill_diagonal(out["q_plus"], 0)
        np.fill_diagonal(out["q_plus_inf"], False)
        return out

    def counters(self) -> dict[str, np.ndarray]:
        """Current incremental counters, masked to live columns for comparison."""
        live = self.alive
        pair_live = np.outer(live, live)
        qp = self.qp * pair_live
        np.fill_diagonal(qp, 0)
        qpi = self.qp_inf & pair_live
        np.fill_diagonal(qpi, False)
        return {
            "q_minus": self.qm * pair_live,
            "q_plus": qp,
            "q_minus_inf": self.qm_inf & pair_live,
            "q_plus_inf": qpi,
            "icf": self.icf * live,
            "icz": self.icz * live,
        }

    def _starred(self):
        return self.icf + (self.val == ZERO), self.icz + (self.val == ONE)

    def _q(self, u: int, v: int):
        return INF if self.qm_inf[u, v] else int(self.qm[u, v])

    def _qp(self, u: int, v: int):
        return INF if self.qp_inf[u, v] else int(self.qp[u, v])

    def _refresh_pair(self, u: int, v: int) -> None:
        if (u, v) in self.b_minus:
            self.b_minus.set((u, v), self._q(u, v))
        if (v, u) in self.b_minus:
            self.b_minus.set((v, u), self._q(v, u))
        key = (u, v) if u < v else (v, u)
        if key in self.b_plus:
            self.b_plus.set(key, self._qp(*key))

    def _refresh_cell(self, t: int, u: int) -> None:
        if (t, u) in self.b_icf:
            self.b_icf.set((t, u), int(self.icf[t, u] + (self.val[t, u] == ZERO)))
        if (t, u) in self.b_icz:
            self.b_icz.set((t, u), int(self.icz[t, u] + (self.val[t, u] == ONE)))

    def _live_partners(self, mask: np.ndarray, exclude: int | None = None) -> list[int]:
        mask = mask & self.alive
        if exclude is not None:
            mask = mask.copy()
            mask[exclude] = False
        return np.flatnonzero(mask).tolist()

    # -- decisions ----------------------------------------------------------

    def _fail(self, reason) -> None:
        if self.status is not Status.INFEASIBLE:
            self.status = Status.INFEASIBLE
            self.reason = reason

    def set_entry_permanent(self, t: int, u: int, value: int, rule: str = "input") -> list[DecisionRecord]:
        """Queue an entry decision and process updates until the stack is empty."""
        start = len(self.trace)
        self.pending.append(("entry", t, u, value, rule))
        self._drain()
        return self.trace[start:]

    def set_edge(self, kind: str, u: int, v: int, state: int, rule: str = "input") -> list[DecisionRecord]:
        start = len(self.trace)
        self.pending.append(("edge", kind, u, v, state, rule))
        self._drain()
        return self.trace[start:]

    def _drain(self) -> None:
        while self.pending and self.status is Status.RUNNING:
            ev = self.pending.pop()
            if ev[0] == "entry":
                self._apply_entry(*ev[1:])
            elif ev[0] == "edge":
                self._apply_edge(*ev[1:])
            else:
                self._apply_remove(*ev[1:])

    def _apply_entry(self, t: int, u: int, value: int, rule: str) -> None:
        if not self.alive[u]:
            return
        old = int(self.val[t, u])
        if self.perm[t, u]:
            if old != value:
                rec = DecisionRecord(FIX, rule, taxon=t, column=u, old=old, new=value)
                self._fail(rec)
            return
        if old == UNKNOWN:
            kind, cost = RESOLVE, 0
        elif old == value:
            kind, cost = FIX, 0
        else:
            kind, cost = FLIP, int(self.weights[u])
        rec = DecisionRecord(kind, rule, cost, taxon=t, column=u, old=old, new=value)
        self.trace.append(rec)
        self.perm[t, u] = True
        if old != value:
            self._change_value(t, u, old, value)
        if cost:
            self.k_remaining -= cost
            self._bounds_dirty = True
            if self.k_remaining < 0:
                self._fail(rec)
                return
            for b in (self.b_minus, self.b_plus, self.b_icf, self.b_icz):
                b.lower_threshold(self.k_remaining)

        row_val, row_perm = self.val[t], self.perm[t]
        p1 = self._live_partners(row_perm & (row_val == ONE), exclude=u)
        p0 = self._live_partners(row_perm & (row_val == ZERO), exclude=u)
        push = self.pending.append
        if value == ONE:
            self.b_icz.discard((t, u))
            self.qm_inf[u, p0] = True
            self.qp_inf[u, p1] = True
            self.qp_inf[p1, u] = True
            for x in p0:
                self._refresh_pair(u, x)
                push(("edge", INC, u, x, FORBIDDEN, "8"))
            for x in p1:
                self._refresh_pair(u, x)
                push(("edge", DIS, u, x, FORBIDDEN, "9"))
            for x in self._live_partners((self.graph.inc[u] & PERMANENT) > 0):
                push(("entry", t, x, ONE, "3"))
            for x in self._live_partners((self.graph.dis[u] & PERMANENT) > 0):
                push(("entry", t, x, ZERO, "5"))
        else:
            self.b_icf.discard((t, u))
            self.qm_inf[p1, u] = True
            for x in p1:
                self._refresh_pair(u, x)
                push(("edge", INC, x, u, FORBIDDEN, "8"))
            for x in self._live_partners((self.graph.inc[:, u] & PERMANENT) > 0):
                push(("entry", t, x, ZERO, "4"))
        if self.ones_count[u] <= 1:
            push(("remove", u, "16"))

    def _change_value(self, t: int, u: int, old: int, new: int) -> None:
        row = self.val[t]
        r1 = ((row == ONE) & self.alive).astype(np.int64)
        r0 = ((row == ZERO) & self.alive).astype(np.int64)
        r1[u] = r0[u] = 0
        if old == ONE:
            self.qm[u, :] -= r0
            self.qp[u, :] -= r1
            self.qp[:, u] -= r1
            self.ones_count[u] -= 1
        elif old == ZERO:
            self.qm[:, u] -= r1
        if new == ONE:
            self.qm[u, :] += r0
            self.qp[u, :] += r1
            self.qp[:, u] += r1
            self.ones_count[u] += 1
        elif new == ZERO:
            self.qm[:, u] += r1
        self.val[t, u] = new
        for x in np.flatnonzero(r0 | r1).tolist():
            self._refresh_pair(u, x)

        d0 = int(new == ZERO) - int(old == ZERO)
        d1 = int(new == ONE) - int(old == ONE)
        inc, dis = self.graph.inc, self.graph.dis
        if d0:
            for x in self._live_partners((inc[:, u] & PERMANENT) > 0):
                self.icf[t, x] += d0
                self._refresh_cell(t, x)
        if d1:
            for x in self._live_partners((dis[u] & PERMANENT) > 0):
                self.icf[t, x] += d1
                self._refresh_cell(t, x)
            for x in self._live_partners((inc[u] & PERMANENT) > 0):
                self.icz[t, x] += d1
                self._refresh_cell(t, x)
        self._refresh_cell(t, u)

    def _apply_edge(self, kind: str, u: int, v: int, state: int, rule: str) -> None:
        if not (self.alive[u] and self.alive[v]):
            return
        labels = self.graph.inc if kind == INC else self.graph.dis
        if labels[u, v] & state:
            return
        events = self.graph.set_edge(kind, u, v, state, rule)
        push = self.pending.append
        col_v, perm = self.val, self.perm
        for ev in events:
            a, b = ev.u, ev.v
            rec = DecisionRecord(
                EDGE_PERMANENT if ev.state == PERMANENT else EDGE_FORBIDDEN,
                ev.rule, column=a, other=b, edge=ev.kind,
            )
            self.trace.append(rec)
            if ev.kind == INC and ev.state == FORBIDDEN:
                self.b_minus.discard((a, b))
            elif ev.kind == DIS and ev.state == FORBIDDEN:
                self.b_plus.discard((a, b))
            elif ev.kind == INC:
                self._add_icf(a, col_v[:, b] == ZERO)
                self._add_icz(b, col_v[:, a] == ONE)
                for t in np.flatnonzero(perm[:, a] & (col_v[:, a] == ONE)).tolist():
                    push(("entry", t, b, ONE, "3"))
                for t in np.flatnonzero(perm[:, b] & (col_v[:, b] == ZERO)).tolist():
                    push(("entry", t, a, ZERO, "4"))
            else:
                self._add_icf(a, col_v[:, b] == ONE)
                self._add_icf(b, col_v[:, a] == ONE)
                for x, y in ((a, b), (b, a)):
                    for t in np.flatnonzero(perm[:, x] & (col_v[:, x] == ONE)).tolist():
                        push(("entry", t, y, ZERO, "5"))
        if self.graph.infeasible:
            self._fail(self.graph.reason)

    def _add_icf(self, u: int, mask: np.ndarray, sign: int = 1) -> None:
        rows = np.flatnonzero(mask)
        self.icf[rows, u] += sign
        for t in rows.tolist():
            self._refresh_cell(t, u)

    def _add_icz(self, v: int, mask: np.ndarray, sign: int = 1) -> None:
        rows = np.flatnonzero(mask)
        self.icz[rows, v] += sign
        for t in rows.tolist():
            self._refresh_cell(t, v)

    def _apply_remove(self, u: int, rule: str) -> None:
        if not self.alive[u] or self.ones_count[u] > 1:
            return
        inc, dis = self.graph.inc, self.graph.dis
        for x in self._live_partners((inc[:, u] & PERMANENT) > 0, exclude=u):
            self._add_icf(x, self.val[:, u] == ZERO, -1)
        for x in self._live_partners((dis[u] & PERMANENT) > 0, exclude=u):
            self._add_icf(x, self.val[:, u] == ONE, -1)
        for x in self._live_partners((inc[u] & PERMANENT) > 0, exclude=u):
            self._add_icz(x, self.val[:, u] == ONE, -1)
        self.alive[u] = False
        self.graph.remove_column(u)
        self._bounds_dirty = True
        for x in range(self.m):
            self.b_minus.discard((u, x))
            self.b_minus.discard((x, u))
            self.b_plus.discard((min(u, x), max(u, x)))
        for t in range(self.n):
            self.b_icf.discard((t, u))
            self.b_icz.discard((t, u))
        self.trace.append(DecisionRecord(REMOVED, rule, column=u))

    # -- rule scans ---------------------------------------------------------------

    def scan_threshold_rules(self) -> int:
        """Queue Rules 1, 2, 6, 7 for every counter above the budget.

        Returns the number of queued decisions.  Each item leaves its bucket
        index once its rule has fired.
        """
        push = self.pending.append
        fired = 0
        for u, v in self.b_minus.above():
            self.b_minus.remove((u, v))
            push(("edge", INC, u, v, FORBIDDEN, "1"))
            fired += 1
        for u, v in self.b_plus.above():
            self.b_plus.remove((u, v))
            push(("edge", DIS, u, v, FORBIDDEN, "2"))
            fired += 1
        for t, u in self.b_icf.above():
            self.b_icf.remove((t, u))
            push(("entry", t, u, ZERO, "6"))
            fired += 1
        for t, u in self.b_icz.above():
            self.b_icz.remove((t, u))
            push(("entry", t, u, ONE, "7"))
            fired += 1
        return fired

    def refresh_bounds(self) -> None:
        """Recompute lower-bound certificates on the current live matrix."""
        live = np.flatnonzero(self.alive)
        entries = self.val[:, live]
        weights = self.weights[live]
        o = self.options
        certs = _bounds.certificates(entries, weights, o.lb_strategy, o.lb_restarts, o.seed)
        m, n = self.m, self.n
        pair_lb = np.zeros((m, m), dtype=np.int64)
        row_lb = np.zeros(n, dtype=np.int64)
        best = None
        for cert in certs:
            col_touch = np.zeros(m, dtype=np.int64)
            row_touch = np.zeros(n, dtype=np.int64)
            both = np.zeros((m, m), dtype=np.int64)
            for c in cert.conflicts:
                a, b = int(live[c.u]), int(live[c.v])
                w = int(min(self.weights[a], self.weights[b]))
                col_touch[a] += w
                col_touch[b] += w
                both[a, b] += w
                both[b, a] += w
                for t in {c.t1, c.t2, c.t3}:
                    row_touch[t] += w
            restricted = cert.value - col_touch[:, None] - col_touch[None, :] + both
            np.maximum(pair_lb, restricted, out=pair_lb)
            np.maximum(row_lb, cert.value - row_touch, out=row_lb)
            if best is None or cert.value > best.value:
                best = cert
        self.lb_global = best.value if best else 0
        self.certificate = _bounds.BoundCertificate(
            [type(c)(int(live[c.u]), int(live[c.v]), c.t1, c.t2, c.t3) for c in best.conflicts],
            best.value,
        ) if best else _bounds.BoundCertificate()
        self._pair_lb = pair_lb
        self._row_lb = row_lb
        self._bounds_k = self.k_remaining
        self._bounds_dirty = False

    def pair_lb(self, u: int, v: int) -> int:
        """Lower bound on flips outside columns u and v."""
        return int(self._pair_lb[u, v])

    def row_lb(self, t: int) -> int:
        """Lower bound on flips outside row t."""
        return int(self._row_lb[t])

    def lifted_candidates(self):
        """Boolean masks of every decision Rules 17-20 currently justify."""
        k = self.k_remaining
        live = self.alive
        pair_live = np.outer(live, live) & ~np.eye(self.m, dtype=bool)
        inc_f = (self.graph.inc & FORBIDDEN) > 0
        dis_f = (self.graph.dis & FORBIDDEN) > 0
        # candidates pre-filtered by the global bound
        qm_cand = (self.qm + self.lb_global > k) | self.qm_inf
        qp_cand = (self.qp + self.lb_global > k) | self.qp_inf
        r17 = pair_live & ~inc_f & qm_cand & ((self.qm + self._pair_lb > k) | self.qm_inf)
        r18 = np.triu(pair_live & ~dis_f & qp_cand & ((self.qp + self._pair_lb > k) | self.qp_inf), 1)
        icf_star, icz_star = self._starred()
        lb_row = self._row_lb[:, None]
        not_p0 = ~(self.perm & (self.val == ZERO))
        not_p1 = ~(self.perm & (self.val == ONE))
        r19 = live & not_p0 & (icf_star + self.lb_global > k) & (icf_star + lb_row > k)
        r20 = live & not_p1 & (icz_star + self.lb_global > k) & (icz_star + lb_row > k)
        return r17, r18, r19, r20

    def scan_lifted_rules(self) -> int:
        """Queue Rules 17-20 using the cached lower bounds."""
        if self._bounds_dirty or self._bounds_k != self.k_remaining:
            self.refresh_bounds()
        if self.lb_global > self.k_remaining:
            self._fail(f"lower bound {self.lb_global} exceeds remaining budget {self.k_remaining}")
            return 0
        r17, r18, r19, r20 = self.lifted_candidates()
        push = self.pending.append
        fired = 0
        for u, v in zip(*np.nonzero(r17)):
            push(("edge", INC, int(u), int(v), FORBIDDEN, "17"))
            fired += 1
        for u, v in zip(*np.nonzero(r18)):
            push(("edge", DIS, int(u), int(v), FORBIDDEN, "18"))
            fired += 1
        for t, u in zip(*np.nonzero(r19)):
            push(("entry", int(t), int(u), ZERO, "19"))
            fired += 1
        for t, u in zip(*np.nonzero(r20)):
            push(("entry", int(t), int(u), ONE, "20"))
            fired += 1
        return fired

    def run(self) -> "ReductionState":
        """Apply all rules until none applies or the budget is exhausted."""
        while self.status is Status.RUNNING:
            self._drain()
            if self.status is not Status.RUNNING:
                break
            if self.scan_threshold_rules():
                continue
            if self.options.use_bounds:
                if self.scan_lifted_rules():
                    continue
                if self.status is not Status.RUNNING:
                    break
            self.status = Status.REDUCED
        return self

    # -- results -----------------------------------------------------------------

    def residual(self) -> FlipMatrix:
        """The reduced instance: live columns with their permanent entries."""
        keep = np.flatnonzero(self.alive).tolist()
        return FlipMatrix(
            self.taxa,
            [self.columns[j] for j in keep],
            self.val[:, keep],
            self.perm[:, keep],
        )

    def flips_charged(self) -> int:
        return self.k_initial - self.k_remaining

    def column_id(self, j: int) -> str:
        return self.columns[j].id


def init(M: FlipMatrix, k: int, options: ReductionOptions | None = None) -> ReductionState:
    return ReductionState(M, k, options)


def reduce(M: FlipMatrix, k: int, options: ReductionOptions | None = None) -> ReductionState:
    """Reduce M under flip budget k.

    The result is INFEASIBLE only if no solution of cost at most k exists.
    Otherwise every decision in the trace holds in every solution of cost at
    most k, and the charged flips plus the optimum of the residual instance
    equal the original optimum whenever that optimum is at most k.
    """
    return ReductionState(M, k, options).run()


def global_scan(S: ReductionState) -> list[tuple[str, tuple]]:
    """Every rule application still possible, found without the counters.

    A slow from-scratch check used to confirm that ``reduce`` stopped at a
    fixpoint.  Lifted rules are checked against the state's cached bounds
    when bounds are enabled.
    """
    out: list[tuple[str, tuple]] = []
    if S.status is Status.INFEASIBLE:
        return out
    k = S.k_remaining
    c = S.recompute_counters()
    live = S.alive
    m = S.m
    pair = np.outer(live, live) & ~np.eye(m, dtype=bool)
    g = S.graph
    Pi = ((g.inc & PERMANENT) > 0) & pair
    Fi = ((g.inc & FORBIDDEN) > 0) & pair
    Pd = ((g.dis & PERMANENT) > 0) & pair
    Fd = ((g.dis & FORBIDDEN) > 0) & pair
    P1 = S.perm & (S.val == ONE) & live
    P0 = S.perm & (S.val == ZERO) & live
    qm_over = c["q_minus_inf"] | (c["q_minus"] > k)
    qp_over = c["q_plus_inf"] | (c["q_plus"] > k)

    def add(rule, mask):
        out.extend((rule, tuple(int(x) for x in idx)) for idx in zip(*np.nonzero(mask)))

    add("1", pair & qm_over & ~Fi)
    add("2", np.triu(pair & qp_over & ~Fd, 1))
    I = lambda a, b: (a.astype(np.int64) @ b.astype(np.int64)) > 0  # noqa: E731
    add("3", I(P1, Pi) & ~P1)
    add("4", I(P0, Pi.T) & ~P0)
    add("5", I(P1, Pd) & ~P0)
    icf_star = c["icf"] + (S.val == ZERO)
    icz_star = c["icz"] + (S.val == ONE)
    add("6", live & (icf_star > k) & ~P0)
    add("7", live & (icz_star > k) & ~P1)
    add("8", I(P1.T, P0) & pair & ~Fi)
    add("9", np.triu(I(P1.T, P1) & pair & ~Fd, 1))
    if not g.closure_check():
        out.append(("closure", ()))
    ones = np.sum((S.val == ONE), axis=0)
    add("16", live & (ones <= 1))
    if S.options.use_bounds and not S._bounds_dirty:
        if S.lb_global > k:
            out.append(("lb", ()))
        pl, rl = S._pair_lb, S._row_lb[:, None]
        add("17", pair & ~Fi & ((c["q_minus"] + pl > k) | c["q_minus_inf"]))
        add("18", np.triu(pair & ~Fd & ((c["q_plus"] + pl > k) | c["q_plus_inf"]), 1))
        add("19", live & ~P0 & (icf_star + rl > k))
        add("20", live & ~P1 & (icz_star + rl > k))
    return out
