"""Branch-and-reduce driver: problem queue, branching, bounds, ILP dispatch.

Subproblems live in a best-first priority queue keyed by lower bound; a
popped problem is reduced to a fixpoint, closed if solved or dominated,
handed to the external MILP solver when small enough, and branched
otherwise. Whenever the incumbent improves, the projected solution is
polished by local search before publication. Workers share only the queue
and the incumbent; each problem is mutated by one worker at a time.
"""

from __future__ import annotations

import heapq
import math
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Sequence

from . import ilp
from .flow import max_flow_st
from .graph import BoundState, ContractableGraph, GraphError, Problem, cut_value
from .localsearch import refine
from .reductions import run_reduction_loop


class ReductionIncomplete(GraphError):
    """Internal error: branching was asked for a fully reduced problem."""


@dataclass
class SolverConfig:
    """All tunables of the solver.

    The defaults mirror the method's standard operating point: shrink
    factor 0.1 and branching cap 5 for the inexact mode, neighborhood
    limit 5 for the twin reduction, and the 50000-edge / 60-second
    dispatch rule for the external ILP solver.
    """

    mode: str = "exact"
    time_limit: float | None = None
    thread_count: int = 1
    ilp_edge_limit: int = 50000
    ilp_timeout_seconds: float = 60.0
    delta: float = 0.1
    beta: int = 5
    seed: int = 0
    branch_rule: str = "vertex"
    neighborhood_limit: int = 5
    flow_candidates: int = 5
    local_search: bool = True
    ilp_command: str | None = None
    reduction_order: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "inexact"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.branch_rule not in ("vertex", "edge"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        if self.beta < 1:
            raise ValueError("beta must be at least 1")
        if self.thread_count < 1:
            raise ValueError("thread_count must be at least 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.ilp_edge_limit < 0 or self.ilp_timeout_seconds < 0:
            raise ValueError("ILP limits must be non-negative")


@dataclass
class SolveResult:
    labels: list[int]
    value: int
    optimal: bool
    events: list[tuple[float, int]]
    root_kernel_vertices: int
    root_kernel_edges: int
    nodes: int
    wall_time: float


def save_events(path: str, events: Sequence[tuple[float, int]]) -> None:
    """Write the (time, best value) progress log as CSV."""
    with open(path, "w") as fh:
        fh.write("time_seconds,best_value\n")
        for t, v in events:
            fh.write(f"{t:.6f},{v}\n")


# ---------------------------------------------------------------------------
# branching


def select_branch_vertex(p: Problem) -> int:
    """Highest weighted-degree non-terminal adjacent to an active terminal."""
    g = p.graph
    troots = set(p.terminal_roots())
    best = None
    for r, _ in p.active_terminals():
        for x in g.neighbors(r):
            if x in troots:
                continue
            key = (-g.weighted_degree(x), x)
            if best is None or key < best:
                best = key
    if best is None:
        raise ReductionIncomplete("no branch vertex: reductions should have solved this")
    return best[1]


def branch_vertex(p: Problem, x: int, best_value: float,
                  beta: int | None = None) -> list[Problem]:
    """Split on the block of x, one child per viable adjacent terminal.

    A terminal whose edge to x plus all of x's non-terminal weight cannot
    beat x's heaviest terminal edge is pruned: assigning x there is never
    strictly better than the heaviest block. An extra child assigns x to
    no adjacent terminal when its non-terminal weight alone dominates.
    With ``beta`` set, only the beta heaviest surviving children are kept.
    """
    g = p.graph
    adj = g.neighbors(x)
    adj_terms = [(r, idx) for r, idx in p.active_terminals() if r in adj]
    if not adj_terms:
        raise ReductionIncomplete(f"vertex {x} is not terminal-adjacent")
    w_max = max(adj[r] for r, _ in adj_terms)
    w_nonterm = g.weighted_degree(x) - sum(adj[r] for r, _ in adj_terms)

    surviving = [(r, idx) for r, idx in adj_terms if adj[r] + w_nonterm > w_max]
    if beta is not None and len(surviving) > beta:
        surviving = sorted(surviving, key=lambda ri: (-adj[ri[0]], ri[1]))[:beta]
        surviving.sort(key=lambda ri: ri[1])

    def contraction_child(r: int, idx: int) -> Problem:
        c = p.copy()
        for r2, idx2 in adj_terms:
            if idx2 != idx:
                c.delete_edge(x, r2)
        c.contract_edge(r, x, into=r)
        c.lower_bound = max(p.lower_bound, c.deleted_weight)
        return c

    children = []
    emitted = 0
    for r, idx in surviving:
        c = contraction_child(r, idx)
        emitted += 1
        if c.lower_bound < best_value:
            children.append(c)
    if w_nonterm > w_max and len(adj_terms) < p.active_count():
        c = p.copy()
        for r2, _ in adj_terms:
            c.delete_edge(x, r2)
        c.lower_bound = max(p.lower_bound, c.deleted_weight)
        emitted += 1
        if c.lower_bound < best_value:
            children.append(c)
    if emitted == 0:
        # every candidate block was pruned; the heaviest-edge block is never
        # worse than any of them, so keep exactly that one
        r, idx = max(adj_terms, key=lambda ri: (adj[ri[0]], -ri[1]))
        c = contraction_child(r, idx)
        if c.lower_bound < best_value:
            children.append(c)
    return children


def branch_edge(p: Problem, x: int, best_value: float) -> list[Problem]:
    """Two-way split on the heaviest edge from x to a terminal."""
    g = p.graph
    adj = g.neighbors(x)
    adj_terms = [(r, idx) for r, idx in p.active_terminals() if r in adj]
    if not adj_terms:
        raise ReductionIncomplete(f"vertex {x} is not terminal-adjacent")
    r, _ = max(adj_terms, key=lambda ri: (adj[ri[0]], -ri[1]))
    children = []
    keep = p.copy()
    keep.contract_edge(r, x, into=r)
    keep.lower_bound = max(p.lower_bound, keep.deleted_weight)
    if keep.lower_bound < best_value:
        children.append(keep)
    cut = p.copy()
    cut.delete_edge(x, r)
    cut.lower_bound = max(p.lower_bound, cut.deleted_weight)
    if cut.lower_bound < best_value:
        children.append(cut)
    return children


def shrink_terminals(p: Problem, delta: float) -> int:
    """Heuristic shrinking applied before each branch in inexact mode.

    Deletes all edges around the ceil(delta * |active|) lowest
    weighted-degree terminals (committing their weight to the cut) and
    absorbs into the heaviest terminal every vertex adjacent to it and to
    no other terminal. Returns the number of changes.
    """
    g = p.graph
    actives = p.active_terminals()
    count = math.ceil(delta * len(actives))
    if count == 0 or len(actives) < 2:
        return 0
    changed = 0
    victims = sorted(actives, key=lambda ri: (g.weighted_degree(ri[0]), ri[1]))[:count]
    for r, _ in victims:
        for x in sorted(g.neighbors(r)):
            p.delete_edge(r, x)
            changed += 1
    p.refresh_active()
    remaining = p.active_terminals()
    if len(remaining) < 2:
        return changed
    h_root, _ = max(remaining, key=lambda ri: (g.weighted_degree(ri[0]), -ri[1]))
    other_roots = {r for r, _ in remaining if r != h_root}
    troots = set(p.terminal_roots())
    grab = [v for v in sorted(g.neighbors(h_root))
            if v not in troots and not other_roots & set(g.neighbors(v))]
    if grab:
        changed += p.contract_set(grab + [h_root], h_root)
    return changed


# ---------------------------------------------------------------------------
# the search loop


class _Search:
    def __init__(self, root: Problem, config: SolverConfig, bound: BoundState,
                 deadline: float | None):
        self.config = config
        self.bound = bound
        self.deadline = deadline
        self.heap: list[tuple[int, int, Problem]] = []
        self.seq = 0
        self.inflight = 0
        self.stopped = False
        self.error: BaseException | None = None
        self.nodes = 0
        self.refines = 0
        self.root_kernel: tuple[int, int] | None = None
        self.lock = threading.Lock()
        self.ready = threading.Condition(self.lock)
        command = config.ilp_command or os.environ.get(ilp.ENV_COMMAND)
        self.ilp_command = command
        self.ilp_enabled = bool(command)
        self._push(root)

    def _push(self, p: Problem) -> None:
        heapq.heappush(self.heap, (p.lower_bound, self.seq, p))
        self.seq += 1

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() >= self.deadline

    def publish(self, p: Problem, labels: list[int], value: int) -> None:
        improved = self.bound.improve(value, labels, now=time.monotonic())
        if not improved or not self.config.local_search:
            return
        with self.lock:
            seed = self.config.seed * 1000003 + self.refines
            self.refines += 1
        anchors = p.anchor_sets()
        better, better_value = refine(p.original, p.terminal_vertices, labels,
                                      anchors, seed=seed, deadline=self.deadline)
        if better_value < value:
            self.bound.improve(better_value, better, now=time.monotonic())

    def process(self, p: Problem, is_root: bool) -> list[Problem]:
        cfg = self.config
        report = run_reduction_loop(p, self.bound, cfg, self.deadline)
        if is_root:
            self.root_kernel = (report.vertices_after, report.edges_after)
        if report.solved:
            labels = p.project(p.solved_kernel_labels())
            self.publish(p, labels, p.deleted_weight)
            return []
        if p.lower_bound >= self.bound.best_value:
            return []
        if self.expired():
            self.stopped = True
            return [p]

        if (self.ilp_enabled and p.active_count() >= 2
                and 1 <= p.graph.num_edges < cfg.ilp_edge_limit):
            budget = cfg.ilp_timeout_seconds
            if self.deadline is not None:
                budget = min(budget, self.deadline - time.monotonic())
            out = ilp.solve_problem(p, self.ilp_command, budget)
            if out.status == ilp.SOLVED:
                self.publish(p, out.labels, out.value)
                return []
            if out.status == ilp.UNAVAILABLE:
                self.ilp_enabled = False

        if cfg.mode == "inexact":
            shrink_terminals(p, cfg.delta)
            p.refresh_active()
            if p.is_solved():
                labels = p.project(p.solved_kernel_labels())
                self.publish(p, labels, p.deleted_weight)
                return []

        best = self.bound.best_value
        try:
            x = select_branch_vertex(p)
        except ReductionIncomplete:
            # shrinking or deletions can expose new trivial reductions
            report = run_reduction_loop(p, self.bound, cfg, self.deadline)
            if report.solved:
                labels = p.project(p.solved_kernel_labels())
                self.publish(p, labels, p.deleted_weight)
                return []
            x = select_branch_vertex(p)
        if cfg.branch_rule == "edge":
            return branch_edge(p, x, best)
        beta = cfg.beta if cfg.mode == "inexact" else None
        return branch_vertex(p, x, best, beta)

    def worker(self) -> None:
        while True:
            with self.ready:
                while not self.heap and self.inflight > 0 and not self.stopped:
                    self.ready.wait(0.02)
                if self.stopped or self.error is not None or not self.heap:
                    return
                lb, seq, p = heapq.heappop(self.heap)
                if lb >= self.bound.best_value:
                    self.ready.notify_all()
                    continue
                self.inflight += 1
            children: list[Problem] = []
            try:
                if self.expired():
                    self.stopped = True
                    children = [p]
                else:
                    self.nodes += 1
                    children = self.process(p, is_root=seq == 0)
            except BaseException as exc:  # noqa: BLE001 - reported to caller
                with self.ready:
                    self.error = exc
                    self.inflight -= 1
                    self.ready.notify_all()
                raise
            with self.ready:
                self.inflight -= 1
                for c in children:
                    self._push(c)
                self.ready.notify_all()


def solve(graph: ContractableGraph, terminals: Sequence[int],
          config: SolverConfig | None = None) -> SolveResult:
    """Minimum multiterminal cut of ``graph`` for the given terminals.

    Returns the best assignment found, its value, and whether the search
    tree was exhausted in exact mode (which certifies optimality). Soft
    limits are honored between operations: on timeout the best incumbent
    is returned with the optimality flag cleared.
    """
    return solve_prepared(Problem.from_instance(graph, terminals), config)


def solve_prepared(root: Problem, config: SolverConfig | None = None) -> SolveResult:
    """Run the search on an existing root problem (which it consumes).

    Used for instances whose terminals already absorbed a grown block of
    vertices; values and assignments still refer to the problem's original
    graph.
    """
    if config is None:
        config = SolverConfig()
    bound = BoundState()
    t0 = time.monotonic()
    bound.start_clock(t0)
    trivial = root.trivial_labels()
    bound.improve(root.solution_value(trivial), trivial, now=t0)
    deadline = None if config.time_limit is None else t0 + config.time_limit
    search = _Search(root, config, bound, deadline)

    try:
        if config.thread_count == 1:
            search.worker()
        else:
            threads = [threading.Thread(target=search.worker, daemon=True)
                       for _ in range(config.thread_count)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
    except BaseException:
        if search.error is None:
            raise
    if search.error is not None:
        raise search.error

    value, labels = bound.snapshot()
    kernel_v, kernel_e = search.root_kernel or (root.graph.num_vertices,
                                                root.graph.num_edges)
    return SolveResult(
        labels=labels,
        value=int(value),
        optimal=not search.stopped and config.mode == "exact",
        events=list(bound.events),
        root_kernel_vertices=kernel_v,
        root_kernel_edges=kernel_e,
        nodes=search.nodes,
        wall_time=time.monotonic() - t0,
    )
