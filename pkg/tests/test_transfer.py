import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randmodels import periodic_model, random_potential, random_primitive
from sftescape import (
    CylindricalPotential,
    InvalidModelError,
    PreconditionError,
    SftModel,
    admissible_words,
    build_transfer,
    check_normalized,
    entropy,
    equilibrium,
    integrate,
    normalize,
    perron,
    pressure,
    restrict,
)
from sftescape.oracle import brute_apply, markov_entropy, numpy_perron
from sftescape.transfer import block_potential, conformal_measure, potential_integral
from sftescape.sft import block_recode

STATIONARY = np.array([1 / 6, 3 / 13, 47 / 78])


def test_example_transfer_matrix(example_transfer):
    expected = np.array([[0, 0.2, 0.2], [0.3, 0, 0.3], [0.7, 0.8, 0.5]])
    assert example_transfer.states == ((0,), (1,), (2,))
    assert np.abs(example_transfer.weights - expected).max() <= 1e-15
    assert check_normalized(example_transfer)


def test_order_three_on_two_cycle():
    model = SftModel(["1", "2"], [[0, 1], [1, 0]])
    pot = CylindricalPotential(model, 3, {(0, 1, 0): math.log(2), (1, 0, 1): math.log(5)})
    t = build_transfer(model, pot)
    assert t.states == ((0, 1), (1, 0))
    assert np.allclose(t.weights, [[0, 2], [5, 0]], rtol=0, atol=1e-14)


def test_missing_and_bad_potential_values():
    model = SftModel(["1", "2"], [[1, 1], [1, 0]])
    with pytest.raises(InvalidModelError, match="not admissible"):
        CylindricalPotential(model, 2, {(1, 1): 0.0})
    with pytest.raises(InvalidModelError, match="finite"):
        CylindricalPotential(model, 2, {(0, 0): math.inf})
    with pytest.raises(InvalidModelError):
        CylindricalPotential(model, 1, {})
    partial = CylindricalPotential(model, 2, {(0, 0): 0.0, (0, 1): 0.0})
    with pytest.raises(InvalidModelError, match="missing potential value"):
        build_transfer(model, partial)


def test_potential_on_other_model_rejected(example):
    model, potential, _ = example
    other = SftModel(["a", "b", "c"], model.matrix)
    with pytest.raises(InvalidModelError):
        build_transfer(other, potential)


# -- Perron data -------------------------------------------------------------

def test_perron_periodic_block():
    data = perron(np.array([[0, 0.2], [0.3, 0]]))
    assert data.period == 2
    assert abs(data.eigenvalue - math.sqrt(0.06)) <= 1e-15
    assert data.residual <= 1e-14


def test_perron_aperiodic_restriction():
    data = perron(np.array([[0, 0.2], [0.7, 0.5]]))
    assert data.period == 1
    assert abs(data.eigenvalue - 0.7) <= 1e-14


def test_perron_example_is_one(example_transfer):
    data = perron(example_transfer)
    assert abs(data.eigenvalue - 1) <= 1e-15
    assert abs(pressure(data)) <= 1e-15
    assert np.abs(data.right - STATIONARY).max() <= 1e-15
    assert np.abs(data.left - 1).max() <= 1e-14


@pytest.mark.parametrize("matrix,exc", [
    ([[1, 1], [0, 1]], PreconditionError),
    ([[1, -1], [1, 1]], PreconditionError),
])
def test_perron_rejects(matrix, exc):
    with pytest.raises(exc):
        perron(np.array(matrix, float))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6), st.sampled_from([1, 2, 3]))
def test_perron_against_dense_eigensolver(seed, n, p):
    rng = np.random.default_rng(seed)
    if p == 1:
        model = random_primitive(rng, n)
        w = build_transfer(model, random_potential(rng, model)).weights
    else:
        model, delta = periodic_model(rng, p, max(p, n), max(p, n) + 1)
        sub = restrict(model, delta)
        w = build_transfer(sub, random_potential(rng, sub)).weights
    data = perron(w)
    lam, _ = numpy_perron(w)
    assert data.period == p
    assert abs(data.eigenvalue - lam) <= 1e-12 * lam
    assert np.abs(w @ data.right - data.eigenvalue * data.right).max() <= 1e-12 * lam
    assert np.abs(data.left @ w - data.eigenvalue * data.left).max() <= 1e-12 * lam * data.left.max()
    assert abs(data.right.sum() - 1) <= 1e-14 and abs(data.left @ data.right - 1) <= 1e-14


# -- normalization -----------------------------------------------------------

def test_zero_potential_not_normalized(example):
    model, _, _ = example
    zero = CylindricalPotential.constant(model, 0.0)
    assert not check_normalized(zero)
    lam, _ = numpy_perron(model.matrix)
    assert abs(pressure(perron(build_transfer(model, zero))) - math.log(lam)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5), st.sampled_from([2, 3]))
def test_normalize_properties(seed, n, order):
    rng = np.random.default_rng(seed)
    model = random_primitive(rng, n)
    raw = random_potential(rng, model, order)
    norm = normalize(raw)
    assert check_normalized(norm, 1e-12)
    assert abs(pressure(perron(build_transfer(model, norm)))) <= 1e-12
    again = normalize(norm)
    assert max(abs(again.values[w] - norm.values[w]) for w in norm.values) <= 1e-12
    # cohomologous: equal Birkhoff sums along periodic orbits up to n P
    p = pressure(perron(build_transfer(model, raw)))
    for length in range(1, 5):
        for word in admissible_words(model, length):
            if not model.matrix[word[-1], word[0]]:
                continue
            loop = (word * (order + 1))[: length + order - 1]
            assert abs(raw.birkhoff(loop) - norm.birkhoff(loop) - length * p) <= 1e-10


def test_normalize_fixes_example(example):
    model, potential, _ = example
    norm = normalize(potential)
    assert max(abs(norm.values[w] - potential.values[w]) for w in potential.values) <= 1e-14


# -- measures ----------------------------------------------------------------

def test_cylinder_values(example_transfer):
    mu = equilibrium(example_transfer)
    assert abs(mu.measure((0, 1, 0)) - 0.01) <= 1e-16
    for i, p in enumerate(STATIONARY):
        assert abs(mu.measure((i,)) - p) <= 1e-15
    assert mu.measure((0, 0)) == 0.0
    assert mu.measure(()) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("order", [2, 3])
def test_cylinder_additivity_and_shift_invariance(order):
    rng = np.random.default_rng(3 + order)
    model = random_primitive(rng, 3, 0.7)
    t = build_transfer(model, random_potential(rng, model, order))
    mu = equilibrium(t)
    for n in range(0, 7):
        for w in admissible_words(model, n):
            children = math.fsum(mu.measure(w + (s,)) for s in range(model.size))
            assert abs(children - mu.measure(w)) <= 1e-14
            parents = math.fsum(mu.measure((s,) + w) for s in range(model.size))
            assert abs(parents - mu.measure(w)) <= 1e-14


def test_conformal_measure_is_dual_eigenmeasure():
    rng = np.random.default_rng(11)
    model = random_primitive(rng, 4)
    t = build_transfer(model, random_potential(rng, model))
    data = perron(t)
    nu = conformal_measure(t, data)
    psi = rng.normal(size=len(t.states))
    assert abs(integrate(nu, t.apply(psi)) - data.eigenvalue * integrate(nu, psi)) <= 1e-12


def test_integrate_and_duality(example_transfer):
    mu = equilibrium(example_transfer)
    assert abs(integrate(mu, [1, 1, 2]) - 125 / 78) <= 1e-15
    for psi in np.eye(3):
        assert abs(integrate(mu, example_transfer.apply(psi)) - integrate(mu, psi)) <= 1e-15


def test_brute_apply_agrees_with_matrix(example):
    model, potential, _ = example
    t = build_transfer(model, potential)
    psi = np.array([0.4, -1.0, 2.5])
    lpsi = t.apply(psi)
    for x in itertools.chain(admissible_words(model, 1), admissible_words(model, 3)):
        assert abs(brute_apply(model, potential, lambda u: psi[u[0]], x) - lpsi[x[0]]) <= 1e-15


def test_entropy_and_variational_identity(example):
    model, potential, delta = example
    mu = equilibrium(build_transfer(model, potential))
    h = entropy(mu)
    assert h > 0
    assert abs(h - markov_entropy(mu)) <= 1e-14
    assert abs(h + potential_integral(mu)) <= 1e-15

    zero = CylindricalPotential.constant(model, 0.0)
    parry = equilibrium(build_transfer(model, zero))
    lam, _ = numpy_perron(model.matrix)
    assert abs(markov_entropy(parry) - math.log(lam)) <= 1e-12

    sub = restrict(model, delta)
    periodic = equilibrium(build_transfer(sub, potential.on_submodel(sub)))
    assert abs(markov_entropy(periodic)) <= 1e-15


def test_block_potential_is_birkhoff_sum(example):
    model, potential, delta = example
    block = block_recode(model, 2)
    bpot = block_potential(potential, block)
    assert bpot.order == 2
    for w in admissible_words(block.model, 2):
        flat = block.flatten(w)
        assert abs(bpot.values[w] - potential.birkhoff(flat[:3])) <= 1e-15
