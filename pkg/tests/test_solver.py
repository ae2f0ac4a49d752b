import random

import pytest

from helpers import FIXTURES, brute_force_opt, fixture_problem, random_instance
from mtcut import BoundState, ContractableGraph, Problem, cut_value, max_flow_st
from mtcut.reductions import run_reduction_loop
from mtcut.solver import (
    ReductionIncomplete,
    SolverConfig,
    branch_edge,
    branch_vertex,
    select_branch_vertex,
    shrink_terminals,
    solve,
)


def make_problem(n, edges, terminals):
    return Problem.from_instance(ContractableGraph.from_edge_list(n, edges), terminals)


class TestConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert cfg.delta == 0.1
        assert cfg.beta == 5
        assert cfg.neighborhood_limit == 5
        assert cfg.ilp_edge_limit == 50000
        assert cfg.ilp_timeout_seconds == 60.0

    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(mode="magic")
        with pytest.raises(ValueError):
            SolverConfig(delta=1.0)
        with pytest.raises(ValueError):
            SolverConfig(beta=0)
        with pytest.raises(ValueError):
            SolverConfig(thread_count=0)
        with pytest.raises(ValueError):
            SolverConfig(time_limit=0)


class TestSelectBranchVertex:
    def test_f3_center(self):
        assert select_branch_vertex(fixture_problem("F3")) == 0

    def test_f5_tie_to_lower_id(self):
        assert select_branch_vertex(fixture_problem("F5")) == 2

    def test_f4_kernel_path(self):
        p = make_problem(3, [(0, 1, 1), (1, 2, 1)], (0, 2))
        assert select_branch_vertex(p) == 1

    def test_no_candidate_raises(self):
        p = fixture_problem("F2")
        with pytest.raises(ReductionIncomplete):
            select_branch_vertex(p)


class TestBranchVertex:
    def test_f3_all_pruned_keeps_heaviest(self):
        p = fixture_problem("F3")
        children = branch_vertex(p, 0, best_value=float("inf"))
        assert len(children) == 1
        c = children[0]
        assert c.graph.find(0) == 1  # center joined t1
        assert c.deleted_weight == 2  # the two unit edges are committed

    def test_both_heavy_terminals_prune_to_one_child(self):
        # x adjacent to two weight-5 terminals and nothing else
        p = make_problem(3, [(0, 1, 5), (2, 1, 5)], (0, 2))
        children = branch_vertex(p, 1, best_value=float("inf"))
        assert len(children) == 1
        assert children[0].graph.find(1) == 0

    def test_light_terminal_with_heavy_nonterminals(self):
        # x: one terminal edge of weight 1, non-terminal weight 4, k=2
        p = make_problem(4, [(0, 1, 1), (1, 2, 2), (1, 3, 2), (2, 3, 1), (3, 0, 1)],
                         (0, 2))
        # force branching on vertex 1: terminal t1 adjacent with w=1, w_nt=4
        children = branch_vertex(p, 1, best_value=float("inf"))
        assert len(children) == 2  # contract into t1, plus the no-terminal child

    def test_children_above_bound_dropped(self):
        p = fixture_problem("F3")
        children = branch_vertex(p, 0, best_value=1)
        assert children == []

    def test_beta_caps_children(self):
        # x adjacent to three of the four terminals, all viable thanks to
        # its non-terminal weight; the fourth block comes as the escape child
        edges = [(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 4), (4, 5, 1)]
        p = make_problem(6, edges, (1, 2, 3, 5))
        all_children = branch_vertex(p, 0, best_value=float("inf"))
        capped = branch_vertex(p, 0, best_value=float("inf"), beta=1)
        assert len(all_children) == 4  # three contracts plus the escape child
        assert len(capped) == 2

    def test_exact_equals_oracle_under_branching(self, corpus):
        for case in corpus[:80]:
            g = ContractableGraph.from_edge_list(case.n, case.edges)
            r = solve(g, case.terminals)
            assert r.value == case.opt


class TestBranchEdge:
    def test_f3_two_children(self):
        p = fixture_problem("F3")
        children = branch_edge(p, 0, best_value=float("inf"))
        assert len(children) == 2
        merged, cut = children
        assert merged.graph.find(0) == 1
        assert cut.deleted_weight == 3

    def test_f5_branches_on_terminal_edge(self):
        p = fixture_problem("F5")
        children = branch_edge(p, 2, best_value=float("inf"))
        assert len(children) == 2

    def test_bound_drop(self):
        p = fixture_problem("F3")
        children = branch_edge(p, 0, best_value=0)
        assert children == []


class TestShrinkTerminals:
    def test_count_from_delta(self):
        # ten terminals in a row, delta 0.1 isolates exactly one
        edges = [(i, 10 + i, 1) for i in range(10)] + \
                [(10 + i, 10 + i + 1, 1) for i in range(9)]
        p = make_problem(20, edges, tuple(range(10)))
        shrink_terminals(p, 0.1)
        p.refresh_active()
        assert p.active_count() == 9

    def test_two_terminals_guard(self):
        p = fixture_problem("F1")
        shrink_terminals(p, 0.1)
        p.refresh_active()
        assert p.active_count() == 1
        assert p.is_solved()

    def test_f3_trace(self):
        p = fixture_problem("F3")
        shrink_terminals(p, 0.1)
        assert p.deleted_weight == 1  # lowest-degree terminal t2 isolated
        assert not p.active[1]
        assert p.graph.is_live(0)  # center touches t3, so it is not grabbed

    def test_delta_zero_is_identity(self):
        p = fixture_problem("F3")
        assert shrink_terminals(p, 0.0) == 0
        assert p.deleted_weight == 0


class TestSolve:
    def test_fixtures_exact(self):
        for name, (n, edges, terminals, opt) in FIXTURES.items():
            g = ContractableGraph.from_edge_list(n, edges)
            r = solve(g, terminals)
            assert r.value == opt and r.optimal, name
            assert cut_value(g, terminals, r.labels) == opt

    def test_fixtures_inexact(self):
        for name, (n, edges, terminals, opt) in FIXTURES.items():
            g = ContractableGraph.from_edge_list(n, edges)
            r = solve(g, terminals, SolverConfig(mode="inexact"))
            assert r.value == opt, name
            assert not r.optimal

    def test_two_terminals_equal_max_flow(self):
        rng = random.Random(31)
        for _ in range(30):
            n, edges, terminals = random_instance(rng, ks=(2,))
            g = ContractableGraph.from_edge_list(n, edges)
            expected = max_flow_st(g, terminals[0], {terminals[1]}).value
            assert solve(g, terminals).value == expected

    def test_value_at_least_root_lower_bound(self):
        rng = random.Random(32)
        for _ in range(20):
            n, edges, terminals = random_instance(rng)
            p = make_problem(n, edges, terminals)
            run_reduction_loop(p, BoundState())
            root_lb = p.lower_bound
            g = ContractableGraph.from_edge_list(n, edges)
            assert solve(g, terminals).value >= root_lb

    def test_disconnected_input(self):
        # two components, one holding two terminals, one holding the third
        edges = [(0, 1, 2), (1, 2, 3), (3, 4, 5), (4, 5, 1)]
        g = ContractableGraph.from_edge_list(6, edges)
        opt, _ = brute_force_opt(6, edges, (0, 2, 5))
        r = solve(g, (0, 2, 5))
        assert r.value == opt == 2
        assert r.optimal

    def test_determinism_single_thread(self):
        rng = random.Random(33)
        n, edges, terminals = random_instance(rng, n_min=9, n_max=12)
        g = ContractableGraph.from_edge_list(n, edges)
        runs = [solve(g, terminals, SolverConfig(seed=7)) for _ in range(2)]
        assert [v for _, v in runs[0].events] == [v for _, v in runs[1].events]
        assert runs[0].value == runs[1].value
        assert runs[0].labels == runs[1].labels

    def test_events_monotone(self):
        rng = random.Random(34)
        for _ in range(10):
            n, edges, terminals = random_instance(rng)
            g = ContractableGraph.from_edge_list(n, edges)
            r = solve(g, terminals)
            values = [v for _, v in r.events]
            assert values == sorted(values, reverse=True)
            assert values[-1] == r.value

    def test_multithreaded_matches(self, corpus):
        for case in corpus[:25]:
            g = ContractableGraph.from_edge_list(case.n, case.edges)
            r = solve(g, case.terminals, SolverConfig(thread_count=4))
            assert r.value == case.opt

    def test_inexact_with_full_beta_and_zero_delta_is_exact(self, corpus):
        for case in corpus[:60]:
            g = ContractableGraph.from_edge_list(case.n, case.edges)
            cfg = SolverConfig(mode="inexact", delta=0.0,
                               beta=len(case.terminals))
            r = solve(g, case.terminals, cfg)
            assert r.value == case.opt

    def test_local_search_toggle(self, corpus):
        for case in corpus[:20]:
            g = ContractableGraph.from_edge_list(case.n, case.edges)
            r = solve(g, case.terminals, SolverConfig(local_search=False))
            assert r.value == case.opt

    def test_time_limit_returns_feasible(self):
        rng = random.Random(35)
        n, edges, terminals = random_instance(rng, n_min=10, n_max=12)
        g = ContractableGraph.from_edge_list(n, edges)
        r = solve(g, terminals, SolverConfig(time_limit=1e-9))
        assert cut_value(g, terminals, r.labels) == r.value
        assert not r.optimal
