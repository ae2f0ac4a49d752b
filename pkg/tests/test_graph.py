import random

import pytest

from helpers import FIXTURES, brute_force_opt, fixture_graph, fixture_problem, random_instance
from mtcut import (
    ContractableGraph,
    EdgeNotFound,
    GraphError,
    InfeasibleAssignment,
    IncompleteSolution,
    InvalidContraction,
    Problem,
    cut_value,
)


def test_fixture_optima_confirmed_by_oracle():
    for name, (n, edges, terminals, opt) in FIXTURES.items():
        assert brute_force_opt(n, edges, terminals)[0] == opt, name


class TestConstruction:
    def test_f1_degrees(self):
        g = fixture_graph("F1")
        assert g.weighted_degree(1) == 3
        assert (g.num_vertices, g.num_edges) == (3, 2)

    def test_duplicate_edges_merge(self):
        g = ContractableGraph.from_edge_list(2, [(0, 1, 1), (0, 1, 2)])
        assert g.num_edges == 1
        assert g.edge_weight(0, 1) == 3

    def test_f2_unit_triangle(self):
        g = fixture_graph("F2")
        assert all(g.weighted_degree(v) == 2 for v in range(3))

    def test_rejects_self_loop(self):
        with pytest.raises(GraphError):
            ContractableGraph.from_edge_list(2, [(1, 1, 1)])

    def test_rejects_bad_weights(self):
        with pytest.raises(GraphError):
            ContractableGraph.from_edge_list(2, [(0, 1, 0)])
        with pytest.raises(GraphError):
            ContractableGraph.from_edge_list(2, [(0, 1, -3)])

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError):
            ContractableGraph.from_edge_list(2, [(0, 2, 1)])


class TestContraction:
    def test_f1_contract(self):
        g = fixture_graph("F1")
        g.contract_edge(0, 1)
        assert g.num_vertices == 2
        assert g.edge_weight(0, 2) == 1

    def test_f2_contract_merges_parallel(self):
        g = fixture_graph("F2")
        g.contract_edge(0, 1)
        assert g.num_vertices == 2
        assert g.edge_weight(0, 2) == 2

    def test_f5_contract_twins(self):
        g = fixture_graph("F5")
        g.contract_edge(2, 3) if g.has_edge(2, 3) else g.contract_vertices([2, 3], 2)
        assert g.num_vertices == 3
        assert g.edge_weight(0, 2) == 2
        assert g.edge_weight(1, 2) == 2

    def test_contract_missing_edge(self):
        g = fixture_graph("F1")
        with pytest.raises(EdgeNotFound):
            g.contract_edge(0, 2)

    def test_inter_terminal_contraction_rejected(self):
        p = fixture_problem("F1")
        p.graph.contract_edge(0, 1)  # raw graph op: merge a into t1
        with pytest.raises(InvalidContraction):
            p.contract_edge(0, 2)

    def test_terminal_survives_by_default(self):
        p = fixture_problem("F1")
        p.contract_edge(0, 1)
        assert p.graph.is_live(0)
        assert p.graph.find(1) == 0


class TestDeletion:
    def test_f1_delete_disconnects(self):
        p = fixture_problem("F1")
        p.delete_edge(1, 2)
        assert p.deleted_weight == 1
        assert p.graph.num_edges == 1
        assert p.graph.degree(2) == 0

    def test_f2_delete_leaves_path(self):
        g = fixture_graph("F2")
        g.delete_edge(0, 1)
        assert g.num_edges == 2
        assert g.degree(0) == 1 and g.degree(1) == 1

    def test_terminal_k2(self):
        g = ContractableGraph.from_edge_list(2, [(0, 1, 7)])
        p = Problem.from_instance(g, (0, 1))
        p.delete_edge(0, 1)
        assert p.deleted_weight == 7
        assert p.graph.num_edges == 0

    def test_delete_missing(self):
        g = fixture_graph("F1")
        with pytest.raises(EdgeNotFound):
            g.delete_edge(0, 2)


class TestContractSet:
    def test_f1_pair(self):
        g = fixture_graph("F1")
        g.contract_vertices([0, 1], 0)
        assert g.num_vertices == 2 and g.edge_weight(0, 2) == 1

    def test_f4_pendant_cycle(self):
        g = fixture_graph("F4")
        g.contract_vertices([1, 3, 4], 1)
        assert g.num_vertices == 3
        assert g.edge_weight(0, 1) == 1 and g.edge_weight(1, 2) == 1
        assert not g.has_edge(0, 2)

    def test_singleton_identity(self):
        g = fixture_graph("F1")
        g.contract_vertices([1], 1)
        assert g.num_vertices == 3

    def test_two_terminals_rejected(self):
        p = fixture_problem("F2")
        with pytest.raises(InvalidContraction):
            p.contract_set([0, 1], 0)

    def test_disconnected_set_merges_by_label(self):
        g = ContractableGraph.from_edge_list(4, [(0, 1, 1), (2, 3, 1)])
        g.contract_vertices([0, 2], 0)
        assert g.num_vertices == 3
        assert g.edge_weight(0, 1) == 1 and g.edge_weight(0, 3) == 1


class TestCutValue:
    def test_f1(self):
        g = fixture_graph("F1")
        assert cut_value(g, (0, 2), [0, 0, 1]) == 1

    def test_f2_forced(self):
        g = fixture_graph("F2")
        assert cut_value(g, (0, 1, 2), [0, 1, 2]) == 3

    def test_f3_center_with_t1(self):
        g = fixture_graph("F3")
        assert cut_value(g, (1, 2, 3), [0, 0, 1, 2]) == 2

    def test_mislabeled_terminal(self):
        g = fixture_graph("F1")
        with pytest.raises(InfeasibleAssignment):
            cut_value(g, (0, 2), [1, 0, 1])

    def test_label_out_of_range(self):
        g = fixture_graph("F1")
        with pytest.raises(InfeasibleAssignment):
            cut_value(g, (0, 2), [0, 5, 1])


class TestProjection:
    def test_after_contraction(self):
        p = fixture_problem("F1")
        p.contract_edge(0, 1)
        labels = p.project({0: 0, 2: 1})
        assert labels == [0, 0, 1]

    def test_identity(self):
        p = fixture_problem("F1")
        assert p.project({0: 0, 1: 0, 2: 1}) == [0, 0, 1]

    def test_f4_articulation_trace(self):
        p = fixture_problem("F4")
        p.contract_set([1, 3, 4], 1)
        labels = p.project({0: 0, 1: 1, 2: 1})
        assert labels == [0, 1, 1, 1, 1]

    def test_missing_label_raises(self):
        p = fixture_problem("F1")
        with pytest.raises(IncompleteSolution):
            p.project({0: 0})


class TestProperties:
    """Randomized invariants over contraction/deletion sequences."""

    def test_contraction_soundness(self):
        # merging two non-terminal-separating endpoints preserves the cut
        # value of any assignment that keeps them together
        rng = random.Random(1)
        for _ in range(100):
            n, edges, terminals = random_instance(rng, n_min=4, n_max=8)
            opt, labels = brute_force_opt(n, edges, terminals)
            p = Problem.from_instance(
                ContractableGraph.from_edge_list(n, edges), terminals)
            same = [(u, v) for u, v, _ in p.graph.edges()
                    if labels[u] == labels[v]]
            if not same:
                continue
            u, v = same[rng.randrange(len(same))]
            p.contract_edge(u, v)
            kernel = {x: labels[x] for x in p.graph.live_vertices()}
            projected = p.project(kernel)
            assert cut_value(p.original, terminals, projected) == \
                cut_value(p.original, terminals, labels)

    def test_deletion_accounting(self):
        rng = random.Random(2)
        for _ in range(100):
            n, edges, terminals = random_instance(rng, n_min=4, n_max=8)
            g = ContractableGraph.from_edge_list(n, edges)
            opt, labels = brute_force_opt(n, edges, terminals)
            cut_edges = [(u, v, w) for u, v, w in edges if labels[u] != labels[v]]
            if not cut_edges:
                continue
            u, v, w = cut_edges[rng.randrange(len(cut_edges))]
            before = cut_value(g, terminals, labels)
            g.delete_edge(u, v)
            assert g.cut_value(labels) + w == before

    def test_weighted_degree_consistency(self):
        rng = random.Random(3)
        for _ in range(60):
            n, edges, _ = random_instance(rng, n_min=5, n_max=10)
            g = ContractableGraph.from_edge_list(n, edges)
            for _ in range(rng.randrange(1, n)):
                ops = list(g.edges())
                if not ops:
                    break
                u, v, _ = ops[rng.randrange(len(ops))]
                if rng.random() < 0.5:
                    g.contract_edge(u, v)
                else:
                    g.delete_edge(u, v)
                g.check_consistency()

    def test_projection_feasible_after_contractions(self):
        rng = random.Random(4)
        for _ in range(60):
            n, edges, terminals = random_instance(rng, n_min=5, n_max=10)
            p = Problem.from_instance(
                ContractableGraph.from_edge_list(n, edges), terminals)
            troots = set(p.terminal_roots())
            for _ in range(rng.randrange(1, n)):
                candidates = [(u, v) for u, v, _ in p.graph.edges()
                              if not (u in troots and v in troots)]
                if not candidates:
                    break
                u, v = candidates[rng.randrange(len(candidates))]
                p.contract_edge(u, v)
                troots = set(p.terminal_roots())
            roots = p.terminal_roots()
            kernel = {v: roots.get(v, 0) for v in p.graph.live_vertices()}
            labels = p.project(kernel)
            cut_value(p.original, terminals, labels)  # raises if infeasible
