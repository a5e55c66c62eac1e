"""Inclusion graph with permanent/forbidden edge labels.

Every unordered column pair {u, v} has three possible solution relations:
u ⊆ v (edge ``u->v``), v ⊆ u, and u ∩ v = ∅ (disjoint edge ``u~v``).  Each
is labelled with two independent bits, permanent and forbidden.  Holding
both bits on one edge, or forbidding all three edges of a pair, means no
solution within budget exists.

Labels describe the sought solution matrix, not the current input.  The
observed graph of a matrix is available separately via ``observed_edges``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import ONE, ZERO, FlipMatrix

PERMANENT = 1
FORBIDDEN = 2

INC = "inclusion"
DIS = "disjoint"


@dataclass(frozen=True)
class EdgeEvent:
    """A label newly attached to an edge.

    For ``kind == INC`` the edge is u -> v (u ⊆ v); disjoint edges are
    reported with u < v.
    """

    kind: str
    u: int
    v: int
    state: int
    rule: str


@dataclass(frozen=True)
class Observation:
    u_in_v: bool
    v_in_u: bool
    disjoint: bool


def observed_edges(M: FlipMatrix, u, v) -> Observation:
    """Edges present in the inclusion graph of the current matrix."""
    a, b = M.col(u), M.col(v)
    if a == b:
        raise ValueError("need two different columns")
    cu, cv = M.entries[:, a], M.entries[:, b]
    return Observation(
        u_in_v=not np.any((cu == ONE) & (cv == ZERO)),
        v_in_u=not np.any((cv == ONE) & (cu == ZERO)),
        disjoint=not np.any((cu == ONE) & (cv == ONE)),
    )


class InclusionGraph:
    def __init__(self, m: int):
        self.m = m
        self.inc = np.zeros((m, m), dtype=np.uint8)
        self.dis = np.zeros((m, m), dtype=np.uint8)
        self.alive = np.ones(m, dtype=bool)
        self.infeasible = False
        self.reason: EdgeEvent | None = None

    # -- queries ----------------------------------------------------------

    def state(self, kind: str, u: int, v: int) -> int:
        return int(self.inc[u, v] if kind == INC else self.dis[u, v])

    def is_permanent(self, kind: str, u: int, v: int) -> bool:
        return bool(self.state(kind, u, v) & PERMANENT)

    def is_forbidden(self, kind: str, u: int, v: int) -> bool:
        return bool(self.state(kind, u, v) & FORBIDDEN)

    def labels(self):
        """Yield (kind, u, v, state) for every labelled edge of live columns."""
        live = self.alive
        for u, v in zip(*np.nonzero(self.inc)):
            if live[u] and live[v]:
                yield INC, int(u), int(v), int(self.inc[u, v])
        for u, v in zip(*np.nonzero(np.triu(self.dis))):
            if live[u] and live[v]:
                yield DIS, int(u), int(v), int(self.dis[u, v])

    def copy(self) -> "InclusionGraph":
        g = InclusionGraph(self.m)
        g.inc, g.dis, g.alive = self.inc.copy(), self.dis.copy(), self.alive.copy()
        g.infeasible, g.reason = self.infeasible, self.reason
        return g

    def remove_column(self, u: int) -> None:
        self.alive[u] = False

    # -- updates -----------------------------------------------------------

    def set_edge(self, kind: str, u: int, v: int, state: int, rule: str = "input") -> list[EdgeEvent]:
        """Label an edge and close the graph under the deduction rules.

        Returns one event per newly set label, in the order they were set.
        The deduction runs to completion even when a contradiction appears,
        so the final state does not depend on the order of calls.
        """
        if u == v:
            raise ValueError("edges need two different columns")
        if not (self.alive[u] and self.alive[v]):
            raise KeyError(f"edge ({u}, {v}) touches a removed column")
        events: list[EdgeEvent] = []
        stack = [(kind, u, v, state, rule)]
        while stack:
            k, a, b, s, r = stack.pop()
            if a == b or not (self.alive[a] and self.alive[b]):
                continue
            if k == DIS and a > b:
                a, b = b, a
            cur = self.state(k, a, b)
            if cur & s:
                continue
            if k == INC:
                self.inc[a, b] |= s
            else:
                self.dis[a, b] |= s
                self.dis[b, a] |= s
            ev = EdgeEvent(k, a, b, s, r)
            events.append(ev)
            if cur | s == PERMANENT | FORBIDDEN:
                self._fail(ev)
            self._derive(ev, stack)
        return events

    def _fail(self, ev: EdgeEvent) -> None:
        if not self.infeasible:
            self.infeasible = True
            self.reason = ev

    def _derive(self, ev: EdgeEvent, stack: list) -> None:
        live = self.alive
        P, F = PERMANENT, FORBIDDEN

        def each(mask):
            return np.flatnonzero(mask & live).tolist()

        u, v = ev.u, ev.v
        # two-of-three completion for the pair
        a, b = min(u, v), max(u, v)
        triple = ((INC, a, b), (INC, b, a), (DIS, a, b))
        forb = [bool(self.state(*e) & F) for e in triple]
        if all(forb):
            self._fail(ev)
        if ev.state == F:
            # every edge whose two partners are forbidden becomes permanent,
            # even if it is forbidden itself, so the closure is order-free
            for i, (k, x, y) in enumerate(triple):
                if all(forb[j] for j in range(3) if j != i):
                    stack.append((k, x, y, P, "closure"))

        if ev.kind == INC and ev.state == P:
            for w in each((self.inc[v] & P) > 0):
                stack.append((INC, u, w, P, "10"))
            for w in each((self.inc[:, u] & P) > 0):
                stack.append((INC, w, v, P, "10"))
            for w in each((self.inc[u] & F) > 0):
                stack.append((INC, v, w, F, "11"))
            for w in each((self.inc[:, v] & F) > 0):
                stack.append((INC, w, u, F, "12"))
            for w in each((self.dis[v] & P) > 0):
                stack.append((DIS, u, w, P, "13"))
            for w in each((self.dis[u] & F) > 0):
                stack.append((DIS, v, w, F, "14"))
        elif ev.kind == INC and ev.state == F:
            for y in each((self.inc[u] & P) > 0):
                stack.append((INC, y, v, F, "11"))
            for y in each((self.inc[:, v] & P) > 0):
                stack.append((INC, u, y, F, "12"))
        elif ev.kind == DIS and ev.state == P:
            for x, y in ((u, v), (v, u)):
                for w in each((self.inc[:, x] & P) > 0):
                    stack.append((DIS, w, y, P, "13"))
                for w in each((self.dis[:, y] & F) > 0):
                    stack.append((INC, w, x, F, "15"))
        elif ev.kind == DIS and ev.state == F:
            for x, y in ((u, v), (v, u)):
                for w in each((self.inc[x] & P) > 0):
                    stack.append((DIS, w, y, F, "14"))
                for w in each((self.dis[:, y] & P) > 0):
                    stack.append((INC, x, w, F, "15"))

    # -- verification ----------------------------------------------------------

    def closure_check(self) -> bool:
        """True iff no deduction rule has an unsatisfied conclusion."""
        live = np.outer(self.alive, self.alive)
        off = live & ~np.eye(self.m, dtype=bool)
        Pi = ((self.inc & PERMANENT) > 0) & live
        Fi = ((self.inc & FORBIDDEN) > 0) & live
        Pd = ((self.dis & PERMANENT) > 0) & live
        Fd = ((self.dis & FORBIDDEN) > 0) & live
        I = lambda a, b: (a.astype(np.int64) @ b.astype(np.int64)) > 0  # noqa: E731
        needs = [
            (I(Pi, Pi), Pi),  # 10
            (I(Pi.T, Fi), Fi),  # 11
            (I(Fi, Pi.T), Fi),  # 12
            (I(Pi, Pd), Pd),  # 13
            (I(Pi.T, Fd), Fd),  # 14
            (I(Fd, Pd.T), Fi),  # 15
        ]
        for premise, conclusion in needs:
            if np.any(premise & off & ~conclusion):
                return False
        nf = Fi.astype(int) + Fi.T.astype(int) + Fd.astype(int)
        two = (nf == 2) & off
        if np.any(two & Fi & Fi.T & ~Pd):
            return False
        if np.any(two & Fi & Fd & ~Pi.T):
            return False
        if np.any((nf == 3) & off) and not self.infeasible:
            return False
        if np.any(((self.inc == 3) | (self.dis == 3)) & off) and not self.infeasible:
            return False
        return True
