"""Safety-preserving contraction and deletion rules, applied to fixpoint.

Every rule shrinks a :class:`~mtcut.graph.Problem` without changing the
optimal cut value of the original instance once the accumulated deleted
weight is added back. The rules range from purely local tests (vertex
degree, heavy edges, triangles) to global ones backed by maximum flows,
articulation points and the CAPFOREST connectivity certificate.
"""

from __future__ import annotations

import heapq
import math
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .flow import FlowResult, isolating_bounds, max_flow_st
from .graph import BoundState, ContractableGraph, Problem


@dataclass
class ReductionReport:
    """Per-rule contraction/deletion counters for one reduction run."""

    contracted: Counter = field(default_factory=Counter)
    deleted: Counter = field(default_factory=Counter)
    passes: int = 0
    solved: bool = False
    fixpoint: bool = False
    vertices_before: int = 0
    vertices_after: int = 0
    edges_before: int = 0
    edges_after: int = 0

    def total_contracted(self) -> int:
        return sum(self.contracted.values())

    def total_deleted(self) -> int:
        return sum(self.deleted.values())

    def to_dict(self) -> dict:
        return {
            "contracted": dict(self.contracted),
            "deleted": dict(self.deleted),
            "passes": self.passes,
            "solved": self.solved,
            "fixpoint": self.fixpoint,
            "vertices_before": self.vertices_before,
            "vertices_after": self.vertices_after,
            "edges_before": self.edges_before,
            "edges_after": self.edges_after,
        }


def _expired(deadline: float | None) -> bool:
    return deadline is not None and time.monotonic() >= deadline


# ---------------------------------------------------------------------------
# edge deletions


def delete_inter_terminal_edges(p: Problem) -> tuple[int, int]:
    """Delete every edge joining two terminals; it must be in any cut."""
    roots = set(p.terminal_roots())
    deleted = 0
    for r in sorted(roots):
        if not p.graph.is_live(r):
            continue
        for x in sorted(p.graph.neighbors(r)):
            if x in roots and r < x:
                p.delete_edge(r, x)
                deleted += 1
    return 0, deleted


# ---------------------------------------------------------------------------
# isolating cuts


def contract_isolating_cuts(p: Problem, bound_state: BoundState | None = None,
                            deadline: float | None = None) -> tuple[int, int]:
    """Contract each terminal's largest minimum isolating cut source side.

    Also derives the isolating-cut bounds: the lower bound tightens the
    problem's own bound, and the upper bound (sum minus the heaviest cut,
    realized by sending every leftover vertex to the terminal with the
    heaviest cut) is offered to the shared incumbent.
    """
    g = p.graph
    actives = p.active_terminals()
    if len(actives) < 2:
        return 0, 0
    active_roots = [r for r, _ in actives]
    flows: list[tuple[int, int, FlowResult]] = []
    for r, idx in actives:
        if _expired(deadline):
            break
        others = [x for x in active_roots if x != r]
        flows.append((r, idx, max_flow_st(g, r, others)))

    troots = p.terminal_roots()
    contracted = 0
    for r, idx, res in flows:
        side = {g.find(x) for x in res.source_side}
        side = {x for x in side if troots.get(x, idx) == idx}
        if len(side) > 1:
            contracted += g.contract_vertices(side, g.find(r))

    if len(flows) == len(actives):
        lower, upper = isolating_bounds([res for _, _, res in flows])
        p.lower_bound = max(p.lower_bound, p.deleted_weight + lower)
        if bound_state is not None and p.deleted_weight + upper < bound_state.best_value:
            values = [res.value for _, _, res in flows]
            heaviest = flows[max(range(len(values)), key=lambda i: (values[i], -flows[i][1]))][1]
            roots_now = p.terminal_roots()
            kernel = {v: roots_now.get(v, heaviest) for v in g.live_vertices()}
            labels = p.project(kernel)
            bound_state.improve(p.solution_value(labels), labels, now=time.monotonic())
    return contracted, 0


# ---------------------------------------------------------------------------
# local rules


def reduce_low_degree(p: Problem) -> tuple[int, int]:
    """Absorb non-terminal vertices of degree one and two.

    A degree-1 vertex joins its only neighbor. For a degree-2 vertex the
    heavier incident edge is contracted (ties to the lower neighbor id):
    siding with the stronger neighbor is never worse than any other
    placement of the vertex.
    """
    g = p.graph
    troots = set(p.terminal_roots())
    queue = deque(v for v in g.live_vertices()
                  if v not in troots and 1 <= g.degree(v) <= 2)
    contracted = 0
    while queue:
        v = queue.popleft()
        if not g.is_live(v) or v in troots:
            continue
        nbrs = g.neighbors(v)
        if not 1 <= len(nbrs) <= 2:
            continue
        u = min(nbrs, key=lambda x: (-nbrs[x], x))
        affected = [x for x in nbrs if x != u] + [u]
        g.contract_edge(u, v)
        contracted += 1
        for x in affected:
            if g.is_live(x) and x not in troots and 1 <= g.degree(x) <= 2:
                queue.append(x)
    return contracted, 0


def reduce_heavy_edge(p: Problem) -> tuple[int, int]:
    """Contract edges carrying at least half of an endpoint's weight.

    The qualifying endpoint must be a non-terminal: the justification is
    that this endpoint can always side with its dominant neighbor, and
    terminals cannot move.
    """
    g = p.graph
    troots = set(p.terminal_roots())
    contracted = 0
    for u, v, _ in list(g.edges()):
        a, b = g.find(u), g.find(v)
        if a == b or a in troots and b in troots:
            continue
        w = g.neighbors(a).get(b)
        if w is None:
            continue
        if (a not in troots and 2 * w >= g.weighted_degree(a)) or \
           (b not in troots and 2 * w >= g.weighted_degree(b)):
            if b in troots:
                a, b = b, a
            elif a not in troots and b < a:
                a, b = b, a
            g.contract_edge(a, b)
            contracted += 1
    return contracted, 0


def reduce_heavy_triangle(p: Problem) -> tuple[int, int]:
    """Contract triangle edges whose endpoints are dominated by the triangle.

    An edge (a, b) in a triangle (a, b, x) is contracted when
    ``w(a,b) + 2*w(a,x) >= wdeg(a)`` and ``w(a,b) + 2*w(b,x) >= wdeg(b)``.
    Both edge endpoints must be non-terminals (the exchange argument moves
    either of them depending on where x sits); the apex x is unrestricted.
    """
    g = p.graph
    troots = set(p.terminal_roots())
    contracted = 0
    for u, v, _ in list(g.edges()):
        a, b = g.find(u), g.find(v)
        if a == b or a in troots or b in troots:
            continue
        na, nb = g.neighbors(a), g.neighbors(b)
        w = na.get(b)
        if w is None:
            continue
        small, other = (na, nb) if len(na) <= len(nb) else (nb, na)
        hit = False
        for x in small:
            wx_other = other.get(x)
            if wx_other is None or x == a or x == b:
                continue
            wa = na[x]
            wb = nb[x]
            if w + 2 * wa >= g.weighted_degree(a) and w + 2 * wb >= g.weighted_degree(b):
                hit = True
                break
        if hit:
            if b < a:
                a, b = b, a
            g.contract_edge(a, b)
            contracted += 1
    return contracted, 0


# ---------------------------------------------------------------------------
# connectivity certificate


def capforest_bounds(g: ContractableGraph) -> dict[tuple[int, int], int]:
    """Per-edge lower bounds on pairwise connectivity (forest scan).

    Scans vertices in order of decreasing attachment to the already
    scanned set; the attachment value of the far endpoint at scan time is
    a lower bound on the connectivity of the edge's endpoints.
    """
    r = {v: 0 for v in g.live_vertices()}
    q: dict[tuple[int, int], int] = {}
    scanned: set[int] = set()
    heap = [(0, v) for v in sorted(r)]
    heapq.heapify(heap)
    while heap:
        negr, x = heapq.heappop(heap)
        if x in scanned or -negr != r[x]:
            continue
        scanned.add(x)
        for y, w in g.neighbors(x).items():
            if y in scanned:
                continue
            r[y] += w
            q[(x, y) if x < y else (y, x)] = r[y]
            heapq.heappush(heap, (-r[y], y))
    return q


def reduce_connectivity(p: Problem, best_value: float) -> tuple[int, int]:
    """Contract edges whose endpoints cannot be separated by a better cut.

    An edge with connectivity certificate strictly above
    ``best_value - deleted_weight`` cannot be cut by any solution improving
    on the incumbent, so merging its endpoints loses nothing.
    """
    if not math.isfinite(best_value):
        return 0, 0
    g = p.graph
    threshold = best_value - p.deleted_weight
    q = capforest_bounds(g)
    troots = set(p.terminal_roots())
    contracted = 0
    for (u, v), qe in sorted(q.items()):
        if qe <= threshold:
            continue
        a, b = g.find(u), g.find(v)
        if a == b or a in troots and b in troots:
            continue
        if b in troots:
            a, b = b, a
        elif a not in troots and b < a:
            a, b = b, a
        g.contract_edge(a, b)
        contracted += 1
    return contracted, 0


# ---------------------------------------------------------------------------
# articulation points


def _dfs_tree(g: ContractableGraph):
    """Iterative DFS over all live vertices.

    Returns (order, tin, tout, low, parent) where order is entry order and
    a vertex's subtree is the slice order[tin[v]:tout[v]].
    """
    tin: dict[int, int] = {}
    tout: dict[int, int] = {}
    low: dict[int, int] = {}
    parent: dict[int, int | None] = {}
    order: list[int] = []
    for root in g.live_vertices():
        if root in tin:
            continue
        parent[root] = None
        tin[root] = low[root] = len(order)
        order.append(root)
        stack: list[tuple[int, list[int], int]] = [(root, sorted(g.neighbors(root)), 0)]
        while stack:
            v, nbrs, i = stack[-1]
            advanced = False
            while i < len(nbrs):
                x = nbrs[i]
                i += 1
                if x not in tin:
                    parent[x] = v
                    tin[x] = low[x] = len(order)
                    order.append(x)
                    stack[-1] = (v, nbrs, i)
                    stack.append((x, sorted(g.neighbors(x)), 0))
                    advanced = True
                    break
                elif x != parent[v]:
                    if tin[x] < low[v]:
                        low[v] = tin[x]
            if advanced:
                continue
            stack.pop()
            tout[v] = len(order)
            if stack:
                pv = stack[-1][0]
                if low[v] < low[pv]:
                    low[pv] = low[v]
    return order, tin, tout, low, parent


def articulation_points(g: ContractableGraph) -> set[int]:
    """Vertices whose removal disconnects their component."""
    order, tin, tout, low, parent = _dfs_tree(g)
    aps: set[int] = set()
    children = Counter()
    for v in order:
        pv = parent[v]
        if pv is None:
            continue
        children[pv] += 1
        if parent[pv] is None:
            continue
        if low[v] >= tin[pv]:
            aps.add(pv)
    for v in order:
        if parent[v] is None and children[v] >= 2:
            aps.add(v)
    return aps


def reduce_articulation_points(p: Problem) -> tuple[int, int]:
    """Collapse terminal-free components hanging off articulation points.

    For a DFS tree edge (parent, v) with ``low(v) >= tin(parent)`` the
    subtree of v is one component of the graph minus the parent; when it
    holds no terminal, all of it can share the parent's block.
    """
    g = p.graph
    order, tin, tout, low, parent = _dfs_tree(g)
    troots = set(p.terminal_roots())
    is_term = [1 if v in troots else 0 for v in order]
    prefix = [0]
    for t in is_term:
        prefix.append(prefix[-1] + t)
    contracted = 0
    for v in order:
        pv = parent[v]
        if pv is None or low[v] < tin[pv]:
            continue
        if prefix[tout[v]] - prefix[tin[v]] > 0:
            continue
        members = set(order[tin[v]:tout[v]])
        members.add(pv)
        contracted += g.contract_vertices(members, g.find(pv))
    return contracted, 0


# ---------------------------------------------------------------------------
# equal neighborhoods


def _twin_key(g: ContractableGraph, v: int) -> tuple:
    return tuple(sorted(g.neighbors(v).items()))


def _adjacent_twins(g: ContractableGraph, u: int, v: int) -> bool:
    nu, nv = g.neighbors(u), g.neighbors(v)
    if len(nu) != len(nv):
        return False
    for x, w in nu.items():
        if x == v:
            continue
        if nv.get(x) != w:
            return False
    return True


def equal_neighborhood_pairs(g: ContractableGraph, excluded: set[int],
                             limit: int = 5) -> set[frozenset]:
    """Detect contractible equal-neighborhood pairs without mutating.

    Adjacent pairs are found by comparing sorted neighborhoods with the
    respective partner removed; non-adjacent pairs by grouping vertices on
    their full sorted neighborhood (dict lookup verifies equality exactly,
    so hash collisions can not produce false pairs).
    """
    pairs: set[frozenset] = set()
    for u, v, _ in g.edges():
        if u in excluded or v in excluded:
            continue
        if g.degree(u) > limit or g.degree(v) > limit:
            continue
        if _adjacent_twins(g, u, v):
            pairs.add(frozenset((u, v)))
    groups: dict[tuple, list[int]] = {}
    for v in g.live_vertices():
        if v in excluded or g.degree(v) > limit:
            continue
        groups.setdefault(_twin_key(g, v), []).append(v)
    for members in groups.values():
        if len(members) < 2:
            continue
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                pairs.add(frozenset((a, b)))
    return pairs


def reduce_equal_neighborhoods(p: Problem, limit: int = 5) -> tuple[int, int]:
    """Merge non-terminal vertices with identical weighted neighborhoods."""
    g = p.graph
    troots = set(p.terminal_roots())
    contracted = 0
    # adjacent twins, re-verified right before each contraction
    for u, v, _ in list(g.edges()):
        if u in troots or v in troots:
            continue
        if not (g.is_live(u) and g.is_live(v)) or not g.has_edge(u, v):
            continue
        if g.degree(u) > limit or g.degree(v) > limit:
            continue
        if _adjacent_twins(g, u, v):
            g.contract_edge(min(u, v), max(u, v))
            contracted += 1
    # non-adjacent twins, grouped on the (post-adjacent-scan) neighborhoods
    groups: dict[tuple, list[int]] = {}
    for v in g.live_vertices():
        if v in troots or g.degree(v) > limit:
            continue
        groups.setdefault(_twin_key(g, v), []).append(v)
    for key in sorted(groups):
        members = groups[key]
        if len(members) < 2:
            continue
        # earlier merges may have touched a shared neighbor; regroup freshly
        fresh: dict[tuple, list[int]] = {}
        for v in members:
            if g.is_live(v):
                fresh.setdefault(_twin_key(g, v), []).append(v)
        for sub in fresh.values():
            if len(sub) >= 2:
                contracted += g.contract_vertices(sub, sub[0])
    return contracted, 0


# ---------------------------------------------------------------------------
# flows from non-terminal vertices


def _hop_distances(g: ContractableGraph, sources: Sequence[int]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(sorted(sources))
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        for x in g.neighbors(v):
            if x not in dist:
                dist[x] = d
                queue.append(x)
    return dist


def reduce_non_terminal_flows(p: Problem, per_kind: int = 5) -> tuple[int, int]:
    """Contract isolating-cut source sides of promising non-terminals.

    Runs one flow per candidate: the highest weighted-degree non-terminal
    vertices plus the ones farthest (hop distance) from every terminal.
    The flow problems are independent; their source sides are applied in
    sequence, skipping vertices a previous application already merged.
    """
    g = p.graph
    troots = p.terminal_roots()
    actives = [r for r, _ in p.active_terminals()]
    if not actives:
        return 0, 0
    nonterms = [v for v in g.live_vertices() if v not in troots]
    if not nonterms:
        return 0, 0
    by_degree = sorted(nonterms, key=lambda v: (-g.weighted_degree(v), v))[:per_kind]
    dist = _hop_distances(g, actives)
    unreachable = g.n_original + 1
    by_distance = sorted(nonterms, key=lambda v: (-dist.get(v, unreachable), v))[:per_kind]
    candidates = sorted(set(by_degree) | set(by_distance))
    flows = [(v, max_flow_st(g, v, actives)) for v in candidates]
    contracted = 0
    for v, res in flows:
        vr = g.find(v)
        if vr in troots:
            continue
        side = {g.find(x) for x in res.source_side}
        side -= set(troots)
        if len(side) > 1:
            contracted += g.contract_vertices(side, vr)
    return contracted, 0


# ---------------------------------------------------------------------------
# the driver


DEFAULT_ORDER: tuple[str, ...] = (
    "inter_terminal",
    "isolating_cuts",
    "low_degree",
    "heavy_edge",
    "heavy_triangle",
    "connectivity",
    "articulation",
    "equal_neighborhoods",
    "non_terminal_flows",
)


def _cleanup(p: Problem, report: ReductionReport) -> None:
    """Deactivate isolated terminals and absorb isolated non-terminals."""
    p.refresh_active()
    actives = p.active_terminals()
    if not actives:
        return
    g = p.graph
    troots = set(p.terminal_roots())
    isolated = [v for v in g.live_vertices() if v not in troots and g.degree(v) == 0]
    if isolated:
        target = actives[0][0]
        n = g.contract_vertices(set(isolated) | {target}, target)
        report.contracted["isolated"] += n


def run_reduction_loop(p: Problem, bound_state: BoundState | None = None,
                       config=None, deadline: float | None = None) -> ReductionReport:
    """Apply all reduction rules repeatedly until none of them fires.

    Terminals isolated along the way are deactivated; once at most one
    active terminal remains the subproblem is solved and its value is the
    accumulated deleted weight.
    """
    report = ReductionReport()
    report.vertices_before = p.graph.num_vertices
    report.edges_before = p.graph.num_edges

    order = DEFAULT_ORDER
    nbhd_limit = 5
    flow_candidates = 5
    if config is not None:
        if getattr(config, "reduction_order", None):
            order = tuple(config.reduction_order)
        nbhd_limit = getattr(config, "neighborhood_limit", 5)
        flow_candidates = getattr(config, "flow_candidates", 5)

    best = bound_state.best_value if bound_state is not None else math.inf

    rules: dict[str, Callable[[], tuple[int, int]]] = {
        "inter_terminal": lambda: delete_inter_terminal_edges(p),
        "isolating_cuts": lambda: contract_isolating_cuts(p, bound_state, deadline),
        "low_degree": lambda: reduce_low_degree(p),
        "heavy_edge": lambda: reduce_heavy_edge(p),
        "heavy_triangle": lambda: reduce_heavy_triangle(p),
        "connectivity": lambda: reduce_connectivity(
            p, bound_state.best_value if bound_state is not None else math.inf),
        "articulation": lambda: reduce_articulation_points(p),
        "equal_neighborhoods": lambda: reduce_equal_neighborhoods(p, nbhd_limit),
        "non_terminal_flows": lambda: reduce_non_terminal_flows(p, flow_candidates),
    }
    unknown = set(order) - set(rules)
    if unknown:
        raise ValueError(f"unknown reduction rules: {sorted(unknown)}")

    _cleanup(p, report)
    while not p.is_solved():
        if _expired(deadline):
            break
        changed = 0
        for name in order:
            if _expired(deadline):
                break
            nc, nd = rules[name]()
            report.contracted[name] += nc
            report.deleted[name] += nd
            changed += nc + nd
            _cleanup(p, report)
            if p.is_solved():
                break
        report.passes += 1
        if p.is_solved() or changed == 0:
            report.fixpoint = changed == 0
            break

    report.solved = p.is_solved()
    p.lower_bound = max(p.lower_bound, p.deleted_weight)
    report.vertices_after = p.graph.num_vertices
    report.edges_after = p.graph.num_edges
    return report
