import itertools

import numpy as np
import pytest

from ctxlab.hvmodel import Model, TransitionKernel, index_to_assignment

ABCD = ("A", "B", "C", "D")


def deterministic(n, mapping):
    """Deterministic kernel over n observables: identity except ``mapping``."""
    targets = list(range(2**n))
    for src, dst in mapping.items():
        targets[src] = dst
    return TransitionKernel.deterministic(targets)


@pytest.fixture
def alternation():
    return Model.point_mass(ABCD, 0, deterministic(4, {0: 8, 8: 0}))


@pytest.fixture
def absorbing_b_flip():
    return Model.point_mass(ABCD, 0, deterministic(4, {0: 4}))


def path_probability(m, path):
    K = m.kernel.to_dense()
    p = m.initial[path[0]]
    for a, b in zip(path, path[1:]):
        p *= K[a, b]
    return p


def brute_sequence_expectation(m, seq):
    """Literal sum over all state paths; independent of the propagation code."""
    col = {o: k for k, o in enumerate(m.labels)}
    total = 0.0
    for path in itertools.product(range(m.size), repeat=len(seq)):
        p = path_probability(m, path)
        if p:
            prod = 1
            for s, o in zip(path, seq):
                prod *= index_to_assignment(s, m.n)[col[o]]
            total += p * prod
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in test_acceptance.RESULTS:
        terminalreporter.write_line(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
