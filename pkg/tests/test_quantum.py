import itertools
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxlab.inequalities import YU_OH_PAIRS, InequalitySpec, SequenceTerm, catalog
from ctxlab.quantum import (
    I2,
    SX,
    SZ,
    YU_OH_RAYS,
    QuantumError,
    QuantumObservable,
    branch_probabilities,
    density_state,
    kcbs_directions,
    projectors,
    pure_state,
    quantum_value,
    random_density,
    scenario,
    sequential_correlation,
)


def obs(m, label="O"):
    return QuantumObservable(label, m)


def test_projectors():
    pp, pm = projectors(obs(SZ))
    np.testing.assert_allclose(pp, np.diag([1, 0]))
    np.testing.assert_allclose(pm, np.diag([0, 1]))
    pp, pm = projectors(obs(np.eye(3)))
    np.testing.assert_allclose(pp, np.eye(3))
    np.testing.assert_allclose(pm, 0)
    pp, pm = projectors(obs(np.kron(SZ, I2)))
    np.testing.assert_allclose(pp, np.diag([1, 1, 0, 0]))
    for P in (pp, pm):
        np.testing.assert_allclose(P @ P, P, atol=1e-10)
        np.testing.assert_allclose(P, P.conj().T, atol=1e-10)
    np.testing.assert_allclose(pp + pm, np.eye(4))


def test_observable_validation():
    with pytest.raises(QuantumError):
        obs(np.diag([1.0, 0.5]))
    with pytest.raises(QuantumError):
        obs(np.array([[0, 1], [0, 0]]))


def test_density_validation():
    with pytest.raises(QuantumError):
        density_state(np.diag([0.7, 0.7]))
    with pytest.raises(QuantumError):
        density_state(np.diag([1.5, -0.5]))
    density_state(random_density(3, np.random.default_rng(0)))


def test_sequential_correlation_examples():
    rho00 = pure_state([1, 0, 0, 0])
    assert sequential_correlation(rho00, [obs(np.kron(SZ, I2)), obs(np.kron(I2, SZ))]) == pytest.approx(1)
    assert sequential_correlation(pure_state([1, 0]), [obs(SZ), obs(SX)]) == pytest.approx(0, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(QuantumError):
        sequential_correlation(np.eye(3) / 3, [obs(SZ)])


def test_incompatible_triple_is_randomized():
    # Z, X, Z on |0>: the second Z is uncorrelated with the first
    probs = branch_probabilities(pure_state([1, 0]), [obs(SZ), obs(SX), obs(SZ)])
    assert probs[(1, 1, 1)] == pytest.approx(0.25)
    assert probs[(1, 1, -1)] == pytest.approx(0.25)
    assert probs[(-1, 1, 1)] == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.lists(st.integers(0, 8), min_size=1, max_size=3))
def test_branch_probabilities_normalized(seed, picks):
    scen, _ = scenario("pm")
    labels = list(scen.observables)
    rho = random_density(4, np.random.default_rng(seed))
    probs = branch_probabilities(rho, [scen[labels[i]] for i in picks])
    assert sum(probs.values()) == pytest.approx(1, abs=1e-10)
    assert min(probs.values()) >= 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(range(6)))
def test_commuting_sequences_match_trace(seed, ctx):
    scen, _ = scenario("pm")
    contexts = [("A", "B", "C"), ("a", "b", "c"), ("alpha", "beta", "gamma"),
                ("A", "a", "alpha"), ("B", "b", "beta"), ("C", "c", "gamma")]
    rho = random_density(4, np.random.default_rng(seed))
    for seq in itertools.permutations(contexts[ctx]):
        mats = [scen[o].matrix for o in seq]
        expected = np.trace(rho @ mats[0] @ mats[1] @ mats[2]).real
        assert sequential_correlation(rho, [scen[o] for o in seq]) == pytest.approx(expected, abs=1e-10)
        assert expected == pytest.approx(-1 if ctx == 5 else 1, abs=1e-10)


def test_pm_contexts_commute():
    scen, _ = scenario("pm")
    groups = ["A B C", "a b c", "alpha beta gamma", "A a alpha", "B b beta", "C c gamma"]
    for g in groups:
        for x, y in itertools.combinations(g.split(), 2):
            X, Y = scen[x].matrix, scen[y].matrix
            assert np.abs(X @ Y - Y @ X).max() < 1e-12


def test_chsh_scenario():
    scen, rho = scenario("chsh")
    for x, y in ["AB", "BC", "CD", "DA"]:
        X, Y = scen[x].matrix, scen[y].matrix
        assert np.abs(X @ Y - Y @ X).max() < 1e-12
    assert quantum_value(catalog("chsh"), scen, rho) == pytest.approx(2 * sqrt(2), abs=1e-9)
    assert quantum_value(catalog("chsh_star"), scen, rho) == pytest.approx(2 * sqrt(2), abs=1e-9)


def test_chsh_never_beats_tsirelson():
    scen, _ = scenario("chsh")
    rng = np.random.default_rng(77)
    vals = [quantum_value(catalog("chsh"), scen, random_density(4, rng)) for _ in range(1000)]
    assert max(vals) <= 2 * sqrt(2) + 1e-12


def test_kcbs_geometry():
    v = kcbs_directions()
    for k in range(5):
        assert np.dot(v[k], v[(k + 1) % 5]) == pytest.approx(0, abs=1e-12)
        assert np.dot(v[k], v[k]) == pytest.approx(1)
        assert v[k, 0] ** 2 == pytest.approx(1 / sqrt(5))


def test_kcbs_values():
    scen, rho = scenario("kcbs")
    assert quantum_value(catalog("kcbs"), scen, rho) == pytest.approx(5 - 4 * sqrt(5), abs=1e-9)
    assert quantum_value(catalog("kcbs_star"), scen, rho) == pytest.approx(4 - 4 * sqrt(5), abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_kcbs_star_is_kcbs_minus_one(seed):
    scen, _ = scenario("kcbs")
    rho = random_density(3, np.random.default_rng(seed))
    diff = quantum_value(catalog("kcbs_star"), scen, rho) - quantum_value(catalog("kcbs"), scen, rho)
    assert diff == pytest.approx(-1, abs=1e-10)


def test_yu_oh_rays_orthogonal_where_coupled():
    for i, j in YU_OH_PAIRS:
        assert np.dot(YU_OH_RAYS[i - 1], YU_OH_RAYS[j - 1]) == 0


@pytest.mark.parametrize("seed", range(5))
def test_yu_oh_state_independent(seed):
    scen, _ = scenario("yu_oh")
    rho = random_density(3, np.random.default_rng(seed))
    assert quantum_value(catalog("yu_oh"), scen, rho) == pytest.approx(52 / 3, abs=1e-9)
    assert quantum_value(catalog("yu_oh_star"), scen, rho) == pytest.approx(208 / 3, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_pm_star_state_independent(seed):
    scen, _ = scenario("pm")
    rho = random_density(4, np.random.default_rng(seed))
    assert quantum_value(catalog("pm_star"), scen, rho) == pytest.approx(6, abs=1e-9)


def test_scenario_export():
    d = scenario("chsh")[0].to_dict()
    assert d["dim"] == 4
    assert d["observables"]["A"][0][0] == [1.0, 0.0]


def test_unknown_scenario_and_label():
    with pytest.raises(QuantumError):
        scenario("ghz")
    scen, rho = scenario("kcbs")
    with pytest.raises(QuantumError):
        quantum_value(InequalitySpec("x", ["Z"], [SequenceTerm(1, "Z")]), scen, rho)
