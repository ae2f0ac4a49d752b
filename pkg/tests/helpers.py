"""Independent oracles and instance generators shared by the test suite.

Everything here is deliberately brute force: enumeration over assignments,
cut enumeration over subsets, remove-and-check articulation points. These
stay independent of the solver's own code paths.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from mtcut import ContractableGraph, Problem


# F1 path, F2 unit triangle, F3 star, F4 path plus pendant cycle, F5 twin
# square. Tuples: (n, edges, terminals, optimum).
FIXTURES = {
    "F1": (3, [(0, 1, 2), (1, 2, 1)], (0, 2), 1),
    "F2": (3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)], (0, 1, 2), 3),
    "F3": (4, [(0, 1, 3), (0, 2, 1), (0, 3, 1)], (1, 2, 3), 2),
    "F4": (5, [(0, 1, 1), (1, 2, 1), (1, 3, 1), (3, 4, 1), (4, 1, 1)], (0, 2), 1),
    "F5": (4, [(0, 2, 1), (0, 3, 1), (1, 2, 1), (1, 3, 1)], (0, 1), 2),
}


def fixture_graph(name: str) -> ContractableGraph:
    n, edges, _, _ = FIXTURES[name]
    return ContractableGraph.from_edge_list(n, edges)


def fixture_problem(name: str) -> Problem:
    n, edges, terminals, _ = FIXTURES[name]
    return Problem.from_instance(ContractableGraph.from_edge_list(n, edges), terminals)


def brute_force_opt(n, edges, terminals):
    """Minimum multiterminal cut by enumeration of all assignments."""
    k = len(terminals)
    free = [v for v in range(n) if v not in set(terminals)]
    base = np.zeros(n, dtype=np.int64)
    for i, t in enumerate(terminals):
        base[t] = i
    if not free:
        value = sum(w for u, v, w in edges if base[u] != base[v])
        return int(value), base.tolist()
    count = k ** len(free)
    labs = np.tile(base, (count, 1))
    idx = np.arange(count)
    for j, v in enumerate(free):
        labs[:, v] = (idx // (k ** j)) % k
    totals = np.zeros(count, dtype=np.int64)
    for u, v, w in edges:
        totals += w * (labs[:, u] != labs[:, v])
    best = int(totals.argmin())
    return int(totals[best]), labs[best].tolist()


def brute_force_block_opt(edges, vertices, fixed_blocks):
    """Minimum cut over assignments of ``vertices`` to the fixed block ids.

    ``fixed_blocks`` maps some vertices to their immovable block; every
    other vertex ranges over the same block ids. Used to score reduced
    kernels, whose vertex ids and block ids are arbitrary.
    """
    blocks = sorted(set(fixed_blocks.values()))
    if len(blocks) <= 1:
        return 0
    free = [v for v in vertices if v not in fixed_blocks]
    count = len(blocks) ** len(free)
    pos = {v: i for i, v in enumerate(vertices)}
    base = np.zeros(len(vertices), dtype=np.int64)
    for v, b in fixed_blocks.items():
        base[pos[v]] = b
    labs = np.tile(base, (count, 1))
    idx = np.arange(count)
    for j, v in enumerate(free):
        labs[:, pos[v]] = np.asarray(blocks)[(idx // (len(blocks) ** j)) % len(blocks)]
    totals = np.zeros(count, dtype=np.int64)
    for u, v, w in edges:
        totals += w * (labs[:, pos[u]] != labs[:, pos[v]])
    return int(totals.min())


def kernel_opt(p: Problem) -> int:
    """Brute-force optimum of a problem's kernel (active terminals only)."""
    g = p.graph
    live = sorted(g.live_vertices())
    edges = list(g.edges())
    fixed = {r: idx for r, idx in p.active_terminals()}
    return brute_force_block_opt(edges, live, fixed)


def brute_force_min_st_cut(n, edges, s, sinks):
    """Minimum s-T cut value by enumeration of source sides."""
    sinks = set(sinks)
    rest = [v for v in range(n) if v != s and v not in sinks]
    best = None
    for mask in range(1 << len(rest)):
        side = {s} | {rest[i] for i in range(len(rest)) if mask >> i & 1}
        w = sum(w for u, v, w in edges if (u in side) != (v in side))
        if best is None or w < best:
            best = w
    return best


def naive_articulation_points(n, edges):
    """Remove-and-check articulation points on the live vertex set."""
    adj = {v: set() for v in range(n)}
    for u, v, _ in edges:
        adj[u].add(v)
        adj[v].add(u)

    def components(skip):
        seen = set()
        comps = 0
        for v in range(n):
            if v == skip or v in seen:
                continue
            comps += 1
            stack = [v]
            seen.add(v)
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y != skip and y not in seen:
                        seen.add(y)
                        stack.append(y)
        return comps

    base = components(None)
    return {v for v in range(n) if components(v) > base - (0 if adj[v] else 1)}


def naive_twin_pairs(g: ContractableGraph, excluded, limit):
    """All-pairs equal-neighborhood scan restricted to small neighborhoods."""
    live = [v for v in g.live_vertices() if v not in excluded and g.degree(v) <= limit]
    pairs = set()
    for a, b in itertools.combinations(live, 2):
        na = {x: w for x, w in g.neighbors(a).items() if x != b}
        nb = {x: w for x, w in g.neighbors(b).items() if x != a}
        if na == nb:
            pairs.add(frozenset((a, b)))
    return pairs


def random_connected_graph(rng: random.Random, n_min=5, n_max=12, m_max=30, w_max=10):
    n = rng.randint(n_min, n_max)
    edges = {}
    for v in range(1, n):
        u = rng.randrange(v)
        edges[(u, v)] = rng.randint(1, w_max)
    budget = min(m_max, n * (n - 1) // 2) - (n - 1)
    extra = rng.randint(0, max(0, budget))
    while extra > 0:
        u, v = sorted(rng.sample(range(n), 2))
        if (u, v) not in edges:
            edges[(u, v)] = rng.randint(1, w_max)
            extra -= 1
    return n, [(u, v, w) for (u, v), w in sorted(edges.items())]


def random_instance(rng: random.Random, n_min=5, n_max=12, m_max=30, w_max=10,
                    ks=(3, 4)):
    n, edges = random_connected_graph(rng, n_min, n_max, m_max, w_max)
    k = rng.choice([k for k in ks if k <= n])
    terminals = sorted(rng.sample(range(n), k))
    return n, edges, terminals


def torus_graph(width, height):
    """Unit-weight torus grid with width*height vertices."""
    def vid(x, y):
        return (y % height) * width + (x % width)

    edges = []
    for y in range(height):
        for x in range(width):
            edges.append((vid(x, y), vid(x + 1, y), 1))
            edges.append((vid(x, y), vid(x, y + 1), 1))
    dedup = {}
    for u, v, w in edges:
        key = (min(u, v), max(u, v))
        dedup[key] = w
    return ContractableGraph.from_edge_list(
        width * height, [(u, v, w) for (u, v), w in dedup.items()])
