"""Mutable weighted graph with contraction, plus the subproblem containers.

The solver spends most of its time contracting edges, so the adjacency is a
per-vertex dict mapping neighbor id to weight: a contraction merges two such
dicts in O(deg) and coalesces parallel edges on the fly. Original vertex ids
are mapped to their surviving representative through a union-find, which is
what lets a solution found on a heavily contracted graph be projected back
to the input graph.
"""

from __future__ import annotations

import math
import threading
from typing import Iterable, Iterator, Sequence


class GraphError(Exception):
    pass


class InvalidContraction(GraphError):
    """Raised when a contraction would merge two distinct terminals."""


class EdgeNotFound(GraphError):
    pass


class InfeasibleAssignment(GraphError):
    """Raised when an assignment mislabels a terminal or misses a vertex."""


class IncompleteSolution(GraphError):
    """Raised when a live vertex has no label during projection."""


class ContractableGraph:
    """Undirected graph with positive integer edge weights.

    Vertices are dense integer ids ``0..n_original-1``. Contracting merges
    one endpoint into the other; the dead vertex keeps its slot (tombstone)
    so ids stay stable, and ``find`` maps any original id to its live
    representative. Parallel edges are merged by weight summation and
    self-loops are discarded, so the graph stays simple at all times.
    """

    __slots__ = ("n_original", "num_vertices", "num_edges", "_adj", "_wdeg", "_parent")

    def __init__(self, n: int):
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        self.n_original = n
        self.num_vertices = n
        self.num_edges = 0
        self._adj: list[dict[int, int] | None] = [dict() for _ in range(n)]
        self._wdeg = [0] * n
        self._parent = list(range(n))

    @classmethod
    def from_edge_list(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "ContractableGraph":
        """Build a graph from ``(u, v, w)`` triples, merging duplicates.

        Rejects self-loops and non-positive weights.
        """
        g = cls(n)
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if w < 1:
                raise GraphError(f"edge ({u},{v}) has non-positive weight {w}")
            g._add_weight(u, v, w)
        return g

    def _add_weight(self, u: int, v: int, w: int) -> None:
        au = self._adj[u]
        av = self._adj[v]
        if v in au:
            au[v] += w
            av[u] += w
        else:
            au[v] = w
            av[u] = w
            self.num_edges += 1
        self._wdeg[u] += w
        self._wdeg[v] += w

    def copy(self) -> "ContractableGraph":
        g = ContractableGraph.__new__(ContractableGraph)
        g.n_original = self.n_original
        g.num_vertices = self.num_vertices
        g.num_edges = self.num_edges
        g._adj = [None if a is None else dict(a) for a in self._adj]
        g._wdeg = list(self._wdeg)
        g._parent = list(self._parent)
        return g

    # -- queries ---------------------------------------------------------

    def find(self, v: int) -> int:
        """Live representative of an original (or live) vertex id."""
        parent = self._parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def is_live(self, v: int) -> bool:
        return self._adj[v] is not None

    def live_vertices(self) -> Iterator[int]:
        for v, a in enumerate(self._adj):
            if a is not None:
                yield v

    def neighbors(self, v: int) -> dict[int, int]:
        a = self._adj[v]
        if a is None:
            raise GraphError(f"vertex {v} is not live")
        return a

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def weighted_degree(self, v: int) -> int:
        if self._adj[v] is None:
            raise GraphError(f"vertex {v} is not live")
        return self._wdeg[v]

    def has_edge(self, u: int, v: int) -> bool:
        a = self._adj[u]
        return a is not None and v in a

    def edge_weight(self, u: int, v: int) -> int:
        a = self._adj[u]
        if a is None or v not in a:
            raise EdgeNotFound(f"no edge ({u},{v})")
        return a[v]

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """All live edges as (u, v, w) with u < v, ascending."""
        for u, a in enumerate(self._adj):
            if a is None:
                continue
            for v in sorted(a):
                if u < v:
                    yield u, v, a[v]

    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges())

    def cut_value(self, labels: Sequence[int] | dict) -> int:
        """Weight of live edges whose endpoints carry different labels."""
        total = 0
        for u, v, w in self.edges():
            if labels[u] != labels[v]:
                total += w
        return total

    # -- mutation --------------------------------------------------------

    def delete_edge(self, u: int, v: int) -> int:
        """Remove edge (u, v); returns its weight."""
        a = self._adj[u]
        if a is None or v not in a:
            raise EdgeNotFound(f"no edge ({u},{v})")
        w = a.pop(v)
        self._adj[v].pop(u)
        self._wdeg[u] -= w
        self._wdeg[v] -= w
        self.num_edges -= 1
        return w

    def contract_edge(self, u: int, v: int) -> None:
        """Merge v into u along the edge (u, v).

        Parallel edges produced by the merge are coalesced, the self-loop
        (u, u) is discarded, and v is tombstoned with parent u.
        """
        au = self._adj[u]
        av = self._adj[v]
        if au is None or av is None or v not in au:
            raise EdgeNotFound(f"no live edge ({u},{v})")
        w_uv = au.pop(v)
        av.pop(u)
        self._wdeg[u] -= w_uv
        self.num_edges -= 1
        for x, w in av.items():
            ax = self._adj[x]
            del ax[v]
            if x in au:
                au[x] += w
                ax[u] += w
                self.num_edges -= 1
            else:
                au[x] = w
                ax[u] = w
            self._wdeg[u] += w
        self._adj[v] = None
        self._wdeg[v] = 0
        self._parent[v] = u
        self.num_vertices -= 1

    def contract_vertices(self, vertices: Iterable[int], into: int) -> int:
        """Merge every vertex of the set into ``into``; returns merge count.

        The set does not need to be connected: members with no edge to
        ``into`` are merged by relabeling, which the reduction rules rely on
        when they contract scattered vertex sets.
        """
        target = self.find(into)
        members = sorted({self.find(x) for x in vertices} - {target})
        for v in members:
            au = self._adj[target]
            if v in au:
                self.contract_edge(target, v)
                continue
            av = self._adj[v]
            for x, w in list(av.items()):
                ax = self._adj[x]
                del ax[v]
                if x in au:
                    au[x] += w
                    ax[target] += w
                    self.num_edges -= 1
                else:
                    au[x] = w
                    ax[target] = w
                self._wdeg[target] += w
            self._adj[v] = None
            self._wdeg[v] = 0
            self._parent[v] = target
            self.num_vertices -= 1
        return len(members)

    # -- validation helpers (used by the test suite) ----------------------

    def check_consistency(self) -> None:
        n_live = 0
        m = 0
        for v, a in enumerate(self._adj):
            if a is None:
                continue
            n_live += 1
            wsum = 0
            for x, w in a.items():
                if x == v:
                    raise GraphError(f"self-loop at {v}")
                ax = self._adj[x]
                if ax is None or ax.get(v) != w:
                    raise GraphError(f"asymmetric edge ({v},{x})")
                if w < 1:
                    raise GraphError(f"non-positive weight on ({v},{x})")
                wsum += w
                m += 1
            if wsum != self._wdeg[v]:
                raise GraphError(f"stale weighted degree at {v}")
        if n_live != self.num_vertices or m != 2 * self.num_edges:
            raise GraphError("stale vertex/edge counters")
        for v in range(self.n_original):
            if self._adj[self.find(v)] is None:
                raise GraphError(f"vertex {v} maps to a dead representative")


def cut_value(graph: ContractableGraph, terminal_vertices: Sequence[int], labels: Sequence[int]) -> int:
    """Cut weight of a feasible assignment on an (uncontracted) graph.

    Every terminal must carry its own block label and every label must be a
    valid block index; violations raise :class:`InfeasibleAssignment`.
    """
    k = len(terminal_vertices)
    if len(labels) != graph.n_original:
        raise InfeasibleAssignment("assignment does not cover every vertex")
    for i, t in enumerate(terminal_vertices):
        if labels[t] != i:
            raise InfeasibleAssignment(f"terminal {t} labeled {labels[t]}, expected {i}")
    for v, b in enumerate(labels):
        if not (0 <= b < k):
            raise InfeasibleAssignment(f"vertex {v} has label {b} outside [0,{k})")
    return graph.cut_value(labels)


class Problem:
    """One subproblem of the branch tree.

    Owns a working graph plus the bookkeeping that relates it back to the
    root instance: the fixed terminal vertices (original ids, list position
    is the block index), which of them are still active, and the weight of
    edges already committed to the cut. Any feasible cut of the subproblem
    plus ``deleted_weight`` is a feasible cut value of the original.
    """

    __slots__ = ("graph", "terminal_vertices", "active", "deleted_weight",
                 "lower_bound", "original")

    def __init__(self, graph, terminal_vertices, active, deleted_weight, lower_bound, original):
        self.graph: ContractableGraph = graph
        self.terminal_vertices: tuple[int, ...] = terminal_vertices
        self.active: list[bool] = active
        self.deleted_weight: int = deleted_weight
        self.lower_bound: int = lower_bound
        self.original: ContractableGraph = original

    @classmethod
    def from_instance(cls, graph: ContractableGraph, terminals: Sequence[int]) -> "Problem":
        terms = tuple(terminals)
        if len(terms) < 2:
            raise GraphError("need at least two terminals")
        if len(set(terms)) != len(terms):
            raise GraphError("terminals must be distinct")
        for t in terms:
            if not (0 <= t < graph.n_original) or not graph.is_live(t):
                raise GraphError(f"terminal {t} is not a live vertex")
        return cls(graph.copy(), terms, [True] * len(terms), 0, 0, graph)

    @property
    def k(self) -> int:
        return len(self.terminal_vertices)

    def copy(self) -> "Problem":
        return Problem(self.graph.copy(), self.terminal_vertices, list(self.active),
                       self.deleted_weight, self.lower_bound, self.original)

    def live_terminal(self, i: int) -> int:
        return self.graph.find(self.terminal_vertices[i])

    def terminal_roots(self) -> dict[int, int]:
        """Map live representative -> block index, for every terminal."""
        return {self.graph.find(t): i for i, t in enumerate(self.terminal_vertices)}

    def active_terminals(self) -> list[tuple[int, int]]:
        """(live vertex, block index) for each active terminal, by index."""
        return [(self.graph.find(t), i)
                for i, t in enumerate(self.terminal_vertices) if self.active[i]]

    def active_count(self) -> int:
        return sum(self.active)

    def refresh_active(self) -> int:
        """Deactivate terminals that have become isolated; returns count."""
        dropped = 0
        for i, t in enumerate(self.terminal_vertices):
            if self.active[i] and self.graph.degree(self.graph.find(t)) == 0:
                self.active[i] = False
                dropped += 1
        return dropped

    def is_solved(self) -> bool:
        return self.active_count() <= 1

    # -- guarded mutation --------------------------------------------------

    def contract_edge(self, u: int, v: int, into: int | None = None) -> None:
        """Contract edge (u, v), keeping a terminal endpoint alive.

        Contracting an edge between two distinct terminals is invalid: it
        would merge two blocks.
        """
        roots = self.terminal_roots()
        bu, bv = roots.get(u), roots.get(v)
        if bu is not None and bv is not None and bu != bv:
            raise InvalidContraction(f"edge ({u},{v}) joins terminals {bu} and {bv}")
        if into is None:
            into = v if bv is not None else u
        elif into not in (u, v):
            raise GraphError("into must be an endpoint")
        if into == u and bv is not None and bu is None:
            raise InvalidContraction("cannot absorb a terminal into a non-terminal")
        if into == v and bu is not None and bv is None:
            raise InvalidContraction("cannot absorb a terminal into a non-terminal")
        other = v if into == u else u
        self.graph.contract_edge(into, other)

    def delete_edge(self, u: int, v: int) -> int:
        w = self.graph.delete_edge(u, v)
        self.deleted_weight += w
        return w

    def contract_set(self, vertices: Iterable[int], into: int) -> int:
        """Contract a vertex set containing at most one terminal."""
        g = self.graph
        target = g.find(into)
        roots = self.terminal_roots()
        live = {g.find(x) for x in vertices} | {target}
        term_roots = {r for r in live if r in roots}
        if term_roots - {target}:
            raise InvalidContraction("set contains a terminal other than the target")
        return g.contract_vertices(live, target)

    # -- solution plumbing --------------------------------------------------

    def project(self, kernel_labels) -> list[int]:
        """Lift a per-live-vertex labeling to all original vertices."""
        g = self.graph
        out = []
        for v in range(g.n_original):
            r = g.find(v)
            try:
                b = kernel_labels[r]
            except (KeyError, IndexError):
                b = None
            if b is None:
                raise IncompleteSolution(f"live vertex {r} has no label")
            out.append(b)
        return out

    def solved_kernel_labels(self) -> dict[int, int]:
        """Labels for a subproblem with at most one active terminal left.

        Every terminal representative keeps its own block; everything else
        joins the last active terminal (or block 0 when none remains),
        which cannot introduce cut edges because inactive terminals are
        isolated.
        """
        roots = self.terminal_roots()
        actives = [i for i, a in enumerate(self.active) if a]
        fallback = actives[0] if actives else 0
        labels = {}
        for v in self.graph.live_vertices():
            labels[v] = roots.get(v, fallback)
        return labels

    def solution_value(self, labels: Sequence[int]) -> int:
        """Cut value of a full assignment, checked feasible, on the root graph."""
        return cut_value(self.original, self.terminal_vertices, labels)

    def kernel_cut_value(self, kernel_labels) -> int:
        return self.graph.cut_value(kernel_labels)

    def anchor_sets(self) -> list[list[int]]:
        """Original vertices merged into each terminal, including itself."""
        g = self.graph
        roots = {g.find(t): i for i, t in enumerate(self.terminal_vertices)}
        out: list[list[int]] = [[] for _ in self.terminal_vertices]
        for v in range(g.n_original):
            i = roots.get(g.find(v))
            if i is not None:
                out[i].append(v)
        return out

    def trivial_labels(self) -> list[int]:
        """Feasible baseline: everything not tied to a terminal joins block 0."""
        roots = {self.original.find(t): i
                 for i, t in enumerate(self.terminal_vertices)}
        return [roots.get(self.original.find(v), 0)
                for v in range(self.original.n_original)]


class BoundState:
    """Shared best-known solution; updates are atomic compare-and-improve.

    ``best_value`` only ever decreases and always equals the cut value of
    ``best_labels``. Every improvement is timestamped for progress plots.
    """

    def __init__(self):
        self.best_value: float = math.inf
        self.best_labels: list[int] | None = None
        self.events: list[tuple[float, int]] = []
        self._lock = threading.Lock()
        self._t0: float | None = None

    def start_clock(self, t0: float) -> None:
        self._t0 = t0

    def improve(self, value: int, labels: Sequence[int], now: float | None = None) -> bool:
        with self._lock:
            if value >= self.best_value:
                return False
            self.best_value = value
            self.best_labels = list(labels)
            stamp = 0.0
            if now is not None and self._t0 is not None:
                stamp = max(0.0, now - self._t0)
            self.events.append((stamp, value))
            return True

    def snapshot(self) -> tuple[float, list[int] | None]:
        with self._lock:
            labels = None if self.best_labels is None else list(self.best_labels)
            return self.best_value, labels
