import math

import numpy as np
import pytest

from src import measures, states
from src.errors import InvalidArgumentError


def test_bell_state_measures(bell):
    assert measures.negativity(bell) == pytest.approx(1.0)
    assert measures.negativity(bell, 1) == pytest.approx(1.0)
    assert measures.concurrence2(bell) == pytest.approx(1.0, abs=1e-7)
    assert measures.linear_entropy(bell) == pytest.approx(0.0, abs=1e-12)
    assert measures.mutual_information(bell, [0]) == pytest.approx(2 * math.log(2))


def test_separable_states(product2):
    mixed = states.maximally_mixed(2)
    for state in (product2, mixed):
        assert measures.negativity(state) == pytest.approx(0.0, abs=1e-12)
        assert measures.concurrence2(state) == pytest.approx(0.0, abs=1e-7)
    assert measures.linear_entropy(mixed) == pytest.approx(1.0)
    assert measures.von_neumann_entropy(mixed) == pytest.approx(2 * math.log(2))
    assert measures.mutual_information(product2, [1]) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.1, 0.4, 0.7])
def test_pure_two_qubit_negativity_equals_concurrence(theta):
    state = states.build(states.family("PureTheta", theta=theta))
    expected = math.sin(2 * theta)
    assert measures.negativity(state) == pytest.approx(expected, abs=1e-12)
    assert measures.concurrence2(state) == pytest.approx(expected, abs=1e-7)
    assert measures.negativity_pure_schmidt(state, [0]) == pytest.approx(expected, abs=1e-12)
    assert measures.pure_bipartite_concurrence(state, [0]) == pytest.approx(expected, abs=1e-12)


def test_negativity_is_at_most_concurrence(rng):
    for _ in range(50):
        state = states.random_mixed2(rng)
        assert measures.concurrence2(state) - measures.negativity(state) >= -1e-10


def test_negativity_lower_bound_in_concurrence(rng):
    for _ in range(50):
        state = states.random_mixed2(rng)
        c = measures.concurrence2(state)
        assert measures.negativity(state) >= measures.negativity_min_for_concurrence(c) - 1e-9


def test_schmidt_negativity_matches_partial_transpose(rng):
    state = states.random_pure(3, rng)
    for q in range(3):
        assert measures.negativity_pure_schmidt(state, [q]) == pytest.approx(
            measures.negativity(state, q), abs=1e-10
        )


def test_pure_only_measures_reject_mixed():
    with pytest.raises(InvalidArgumentError):
        measures.negativity_pure_schmidt(states.maximally_mixed(2), [0])


def test_linear_entropy_requires_two_qubits(ghz3):
    with pytest.raises(InvalidArgumentError):
        measures.linear_entropy(ghz3)


def test_bad_qubit_and_partition(bell):
    with pytest.raises(InvalidArgumentError, match="qubit"):
        measures.negativity(bell, 2)
    with pytest.raises(InvalidArgumentError, match="partition"):
        measures.mutual_information(bell, [0, 1])


def test_ghz_invariants(ghz3):
    inv = measures.invariants3(ghz3)
    assert inv.I1 == pytest.approx(0.5)
    assert inv.I4 == pytest.approx(0.25)
    assert inv.tau == pytest.approx(1.0, abs=1e-7)
    assert inv.N1 == pytest.approx(1.0)
    assert inv.C12 == pytest.approx(0.0, abs=1e-7)
    assert inv.Theta == pytest.approx(-0.25, abs=1e-7)


def test_w_invariants(w3):
    inv = measures.invariants3(w3)
    assert inv.I1 == pytest.approx(5 / 9)
    assert inv.I4 == pytest.approx(2 / 9)
    assert inv.tau == pytest.approx(0.0, abs=1e-7)
    assert inv.N1 == pytest.approx(2 * math.sqrt(2) / 3)
    assert inv.C12 == pytest.approx(2 / 3, abs=1e-7)
    assert inv.M == pytest.approx(8 / 27, abs=1e-7)


def test_i4_does_not_depend_on_pair(rng):
    state = states.random_pure(3, rng)
    values = [measures.invariant_i4(state, pair) for pair in ((0, 1), (0, 2), (1, 2))]
    np.testing.assert_allclose(values, values[0], atol=1e-12)


def test_theta_sign_follows_tangle_imbalance(rng):
    for _ in range(30):
        inv = measures.invariants3(states.random_pure(3, rng))
        imbalance = abs(inv.C12 ** 2 - inv.C13 ** 2) - inv.tau
        if abs(inv.Theta) > 1e-6:
            assert np.sign(inv.Theta) == np.sign(imbalance)


@pytest.mark.parametrize("a", [0.1, 0.3, 0.5])
def test_g_type_closed_form(a):
    state = states.build(states.family("GType", a=a))
    inv = measures.invariants3(state)
    expected = measures.g_type_invariants(a)
    assert inv.N1 == pytest.approx(expected["N"], abs=1e-10)
    assert inv.tau == pytest.approx(expected["tau"], abs=1e-6)
    assert inv.I4 == pytest.approx(expected["I4"], abs=1e-10)


@pytest.mark.parametrize("b", [0.2, 0.5, 0.8])
def test_j_state_closed_form(b):
    state = states.build(states.family("JState", b=b))
    inv = measures.invariants3(state)
    expected = measures.j_state_invariants(b)
    assert inv.N1 == pytest.approx(expected["N"], abs=1e-10)
    assert inv.tau == pytest.approx(expected["tau"], abs=1e-6)
    assert inv.I4 == pytest.approx(expected["I4"], abs=1e-10)


def test_upsilon_closed_form():
    c1, c2, c3 = 0.5, 0.5, math.sqrt(0.5)
    state = states.build(states.family("Upsilon", c1=c1, c2=c2, c3=c3))
    inv = measures.invariants3(state)
    expected = measures.upsilon_invariants(c1, c2, c3)
    assert inv.N1 == pytest.approx(expected["N"], abs=1e-10)
    assert inv.tau == pytest.approx(expected["tau"], abs=1e-6)


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("q", [0.0, 0.25, 0.6, 1.0])
def test_z_state_negativity(k, q):
    state = states.build(states.family("ZState", k=k, q=q, phi=0.7))
    assert measures.negativity(state) == pytest.approx(measures.z_state_negativity(k, q), abs=1e-10)


def test_w_k_negativity():
    state = states.build(states.family("WK", k=6))
    assert measures.negativity(state) == pytest.approx(measures.w_k_negativity(6), abs=1e-12)


@pytest.mark.parametrize("k,q", [(3, 0.4), (5, 0.7)])
def test_z_state_negativity_ignores_phase(k, q):
    values = [
        measures.negativity(states.build(states.family("ZState", k=k, q=q, phi=phi)))
        for phi in np.linspace(0.0, 2 * math.pi, 17)
    ]
    assert max(values) - min(values) <= 1e-10


def test_tangle_does_not_depend_on_reference_qubit(rng):
    for _ in range(10):
        inv = measures.invariants3(states.random_pure(3, rng))
        from_second = abs(inv.N2 ** 2 - inv.C12 ** 2 - inv.C23 ** 2)
        from_third = abs(inv.N3 ** 2 - inv.C13 ** 2 - inv.C23 ** 2)
        assert from_second == pytest.approx(inv.tau, abs=1e-6)
        assert from_third == pytest.approx(inv.tau, abs=1e-6)
