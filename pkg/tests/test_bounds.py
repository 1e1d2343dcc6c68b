import itertools

import numpy as np
import pytest

from ctxlab import CapacityError
from ctxlab.bounds import certify, evolving_bound, position_supports, static_bound
from ctxlab.hvmodel import random_model
from ctxlab.inequalities import (
    CATALOG_NAMES,
    MAXIMIZE,
    InequalitySpec,
    SequenceTerm,
    catalog,
    evaluate_on_evolution,
    model_expectation,
)


def better(spec, a, b):
    return a >= b if spec.direction == MAXIMIZE else a <= b


def brute_static(spec):
    return (max if spec.direction == MAXIMIZE else min)(
        evaluate_on_evolution(spec, (i,) * spec.max_length) for i in range(2**spec.n)
    )


def brute_evolving(spec):
    opt = max if spec.direction == MAXIMIZE else min
    return opt(evaluate_on_evolution(spec, e) for e in itertools.product(range(2**spec.n), repeat=spec.max_length))


@pytest.mark.parametrize("name, expected", [
    ("chsh", 2), ("chsh_star", 2), ("pm", 4), ("pm_star", 4),
    ("kcbs", -3), ("kcbs_star", -4), ("yu_oh", 16), ("yu_oh_star", 68),
])
def test_static_bounds(name, expected):
    res = static_bound(catalog(name))
    assert res.value == expected and isinstance(res.value, int)
    assert res.value == catalog(name).classical_bound


@pytest.mark.parametrize("name", ["chsh", "chsh_star", "pm", "pm_star", "kcbs", "kcbs_star", "yu_oh"])
def test_static_bound_matches_brute_force(name):
    assert static_bound(catalog(name)).value == brute_static(catalog(name))


@pytest.mark.parametrize("name, expected", [
    ("chsh", 4), ("chsh_star", 2), ("pm_star", 4), ("kcbs_star", -4), ("yu_oh_star", 68),
])
def test_evolving_bounds(name, expected):
    assert evolving_bound(catalog(name)).value == expected


@pytest.mark.parametrize("name", ["chsh", "chsh_star", "kcbs", "kcbs_star"])
def test_evolving_bound_matches_brute_force(name):
    assert evolving_bound(catalog(name)).value == brute_evolving(catalog(name))


def test_unstarred_orderings_are_not_robust():
    # derived quantities: the evolving model saturates the algebraic maximum
    assert evolving_bound(catalog("pm")).value == 6
    assert evolving_bound(catalog("kcbs")).value == -5
    assert evolving_bound(catalog("yu_oh")).value == 52


def test_chsh_witness():
    res = evolving_bound(catalog("chsh"))
    assert res.witnesses[0] == (0, 8)
    assert len(res.witnesses) == 16
    assert list(res.witnesses) == sorted(res.witnesses)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_witnesses_attain_value(name):
    spec = catalog(name)
    for res in (static_bound(spec), evolving_bound(spec)):
        assert 1 <= len(res.witnesses) <= 16
        for w in res.witnesses:
            assert evaluate_on_evolution(spec, w) == res.value


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_evolving_dominates_static(name):
    spec = catalog(name)
    assert better(spec, evolving_bound(spec).value, static_bound(spec).value)


def test_supports():
    assert position_supports(catalog("chsh")) == [("A", "B", "C", "D")] * 2
    assert position_supports(catalog("pm_star")) == [("A", "c", "beta"), ("B", "a", "gamma"), ("C", "b", "alpha")]
    assert position_supports(catalog("kcbs_star")) == [("A", "C", "E"), ("A", "B", "D")]
    assert evolving_bound(catalog("chsh")).evaluated_count == 256
    assert evolving_bound(catalog("pm_star")).evaluated_count == 512
    assert evolving_bound(catalog("kcbs_star")).evaluated_count == 64


@pytest.mark.parametrize("name", [n for n in CATALOG_NAMES if catalog(n).n <= 9])
def test_reduction_is_sound(name):
    spec = catalog(name)
    full = evolving_bound(spec, reduce=False)
    assert full.value == evolving_bound(spec).value
    assert full.evaluated_count == 2 ** (spec.n * spec.max_length)


@pytest.mark.parametrize("workers", [2, 3, 8])
@pytest.mark.parametrize("name", ["chsh", "pm", "kcbs", "yu_oh"])
def test_worker_count_invariance(name, workers):
    assert evolving_bound(catalog(name), workers=workers) == evolving_bound(catalog(name), workers=1)


@pytest.mark.parametrize("name", ["yu_oh_star", "yu_oh", "chsh", "kcbs_star"])
def test_factorized_matches_enumeration(name):
    spec = catalog(name)
    fast = evolving_bound(spec, factorized=True)
    plain = evolving_bound(spec)
    assert fast.value == plain.value
    assert fast.witnesses == plain.witnesses


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_random_models_never_exceed_evolving_bound(name):
    spec = catalog(name)
    bound = evolving_bound(spec, factorized=spec.max_length == 2).value
    rng = np.random.default_rng(sum(map(ord, name)))
    kind = "dense" if spec.n <= 9 else "deterministic"
    for _ in range(100):
        m = random_model(spec.labels, rng, kind)
        assert better(spec, bound + (1e-12 if spec.direction == MAXIMIZE else -1e-12), model_expectation(spec, m))


@pytest.mark.parametrize("name, robust, pair", [
    ("chsh", False, (2, 4)), ("chsh_star", True, (2, 2)), ("pm_star", True, (4, 4)),
    ("kcbs_star", True, (-4, -4)), ("yu_oh_star", True, (68, 68)), ("pm", False, (4, 6)),
])
def test_certify(name, robust, pair):
    c = certify(catalog(name))
    assert c.robust is robust
    assert (c.static.value, c.evolving.value) == pair


def test_capacity_limits():
    labels = [f"X{i}" for i in range(14)]
    with pytest.raises(CapacityError):
        static_bound(InequalitySpec("big", labels, [SequenceTerm(1, labels[:2])]))
    with pytest.raises(CapacityError):
        evolving_bound(InequalitySpec("long", "AB", [SequenceTerm(1, "ABAB")]))


def test_real_coefficients():
    spec = InequalitySpec("real", "AB", [SequenceTerm(0.5, "AB"), SequenceTerm(-0.25, "BA"), SequenceTerm(0.1, "A")])
    res = evolving_bound(spec)
    assert isinstance(res.value, float)
    assert res.value == pytest.approx(brute_evolving(spec))
