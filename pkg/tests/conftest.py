import random

import pytest

from helpers import brute_force_opt, random_instance


class OracleCase:
    __slots__ = ("n", "edges", "terminals", "opt", "opt_labels")

    def __init__(self, n, edges, terminals, opt, opt_labels):
        self.n = n
        self.edges = edges
        self.terminals = terminals
        self.opt = opt
        self.opt_labels = opt_labels


def build_corpus(seed, count, **kwargs):
    rng = random.Random(seed)
    cases = []
    for _ in range(count):
        n, edges, terminals = random_instance(rng, **kwargs)
        opt, labels = brute_force_opt(n, edges, terminals)
        cases.append(OracleCase(n, edges, terminals, opt, labels))
    return cases


@pytest.fixture(scope="session")
def corpus():
    """The shared oracle corpus: 500 random connected weighted instances."""
    return build_corpus(20240101, 500)


@pytest.fixture(scope="session")
def small_corpus(corpus):
    return corpus[:120]
