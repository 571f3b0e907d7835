import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src import measures, states
from src.data_models import FamilyTag, StateFamily
from src.errors import InfeasibleParametersError, InvalidArgumentError, InvalidShapeError
from src.linalg import hermitian_eigenvalues, partial_trace


ALL_FAMILIES = [
    ("PureTheta", {"theta": 0.3}),
    ("Ansatz", {"x": 0.1, "y": 0.2, "a": 0.2, "b": 0.1, "gamma": 0.4}),
    ("RhoM", {"gamma": 0.6}),
    ("RhoK", {"gamma": 0.6}),
    ("RhoC", {"gamma": 0.5, "a": 0.3, "b": 0.2}),
    ("RhoSL", {"gamma": 0.7, "theta": 0.4}),
    ("RhoItot", {"n": 0.3}),
    ("GHZ", {"k": 4}),
    ("W", {"k": 3}),
    ("WPrime", {"k": 3}),
    ("Symmetric", {"t1": 0.5, "t2": 0.5j, "t3": -0.5, "t4": 0.5}),
    ("GType", {"a": 0.3}),
    ("JState", {"b": 0.4}),
    ("Upsilon", {"c1": 0.6, "c2": 0.0, "c3": 0.8}),
    ("Lambda", {"c0": 0.6, "c1": 0.48, "c6": 0.64}),
    ("Omega", {"c0": 0.5, "c1": 0.5, "c2": 0.5, "c4": 0.5}),
    ("General3", {"amplitudes": [0.5, 0, 0, 0.5, 0, 0.5, 0.5, 0]}),
    ("GTypeK", {"k": 5, "alpha": 0.6, "beta": 0.8}),
    ("WK", {"k": 5}),
    ("ZState", {"k": 4, "q": 0.3, "phi": 1.0}),
    ("Pi", {"alpha": 0.6, "beta": 0.8, "theta0": math.pi / 4, "theta1": 0.2}),
    ("Mu", {"theta": 0.5}),
]


@pytest.mark.parametrize("tag,params", ALL_FAMILIES)
def test_every_family_is_a_density_matrix(tag, params):
    state = states.build(states.family(tag, **params))
    assert state.rho.shape == (state.dim, state.dim)
    assert np.trace(state.rho).real == pytest.approx(1.0, abs=1e-12)
    assert_allclose(state.rho, state.rho.conj().T, atol=1e-14)
    assert hermitian_eigenvalues(state.rho)[0] >= -1e-10


def test_unknown_family():
    with pytest.raises(InvalidArgumentError):
        states.family("Nope")


def test_from_amplitudes_requires_normalization():
    with pytest.raises(InvalidArgumentError):
        states.from_amplitudes([1, 1, 0, 0])
    state = states.from_amplitudes([1, 1, 0, 0], normalize=True)
    assert state.purity_hint
    assert state.k == 2


def test_from_amplitudes_rejects_bad_dimension():
    with pytest.raises(InvalidShapeError):
        states.from_amplitudes([1, 0, 0])


def test_from_density_matrix_checks():
    with pytest.raises(InvalidArgumentError):
        states.from_density_matrix(np.eye(4) / 2)
    with pytest.raises(InvalidArgumentError):
        states.from_density_matrix(np.diag([1.2, -0.2, 0.0, 0.0]))
    state = states.from_density_matrix(np.eye(4) / 4)
    assert not state.purity_hint


def test_product_state_index():
    state = states.product_state([1, 0])
    assert state.rho[2, 2] == 1.0


def test_ghz_and_w_vectors():
    assert_allclose(states.ghz_vector(3)[[0, 7]], [1 / math.sqrt(2)] * 2)
    w = states.w_vector(3)
    assert_allclose(w[[1, 2, 4]], [1 / math.sqrt(3)] * 3)
    assert_allclose(states.w_prime_vector(3)[[3, 5, 6]], [1 / math.sqrt(3)] * 3)


def test_pure_theta_range():
    with pytest.raises(InvalidArgumentError, match="theta"):
        states.build(states.family("PureTheta", theta=2.0))


def test_ansatz_weights_checked():
    with pytest.raises(InvalidArgumentError, match="gamma"):
        states.build(states.family("Ansatz", x=0.2, y=0.2, a=0.2, b=0.2, gamma=-0.2))
    with pytest.raises(InvalidArgumentError):
        states.build(states.family("Ansatz", x=0.2, y=0.2, a=0.2, b=0.2, gamma=0.3))


def test_rho_m_concurrence_and_negativity():
    gamma = 0.6
    state = states.build(states.family("RhoM", gamma=gamma))
    assert measures.concurrence2(state) == pytest.approx(gamma, abs=1e-10)
    expected = math.sqrt((1 - gamma) ** 2 + gamma ** 2) - (1 - gamma)
    assert measures.negativity(state) == pytest.approx(expected, abs=1e-12)


def test_rho_sl_matches_ansatz_coordinates():
    gamma, theta = 0.7, 0.4
    state = states.build(states.family("RhoSL", gamma=gamma, theta=theta))
    ansatz = states.ansatz_matrix(*states.rho_sl_ansatz_params(gamma, theta))
    assert_allclose(ansatz, state.rho, atol=1e-14)


def test_itot_curve():
    assert states.itot_curve(0.3) == pytest.approx(0.4922616, abs=1e-7)
    assert states.itot_curve(1.0) == pytest.approx(1.0)
    for n in np.linspace(0.01, 1.0, 20):
        assert states.itot_curve(n) >= n - 1e-12


@pytest.mark.parametrize("a_free", [0.0, 0.26])
def test_make_rho_itot_feasible(a_free):
    state = states.make_rho_itot(0.3, a_free)
    assert measures.negativity(state) == pytest.approx(0.3, abs=1e-10)
    assert measures.concurrence2(state) == pytest.approx(states.itot_curve(0.3), abs=1e-8)
    assert state.rho[1, 1].real == pytest.approx(a_free)


@pytest.mark.parametrize("a_free", [0.01, 0.1, 0.9])
def test_make_rho_itot_infeasible(a_free):
    with pytest.raises(InfeasibleParametersError):
        states.make_rho_itot(0.3, a_free)


def test_make_rho_itot_rejects_bad_target():
    with pytest.raises(InvalidArgumentError, match="n_target"):
        states.make_rho_itot(1.5, 0.0)


def test_symmetric_state_is_permutation_invariant():
    state = states.build(states.family("Symmetric", t1=0.5, t2=0.5j, t3=-0.5, t4=0.5))
    vec = state.amplitudes.reshape(2, 2, 2)
    assert_allclose(vec, np.transpose(vec, (1, 0, 2)), atol=1e-14)
    assert_allclose(vec, np.transpose(vec, (0, 2, 1)), atol=1e-14)


def test_pi_requires_frontier_condition():
    with pytest.raises(InvalidArgumentError, match="theta0"):
        states.build(states.family("Pi", alpha=0.6, beta=0.8, theta0=0.1, theta1=0.2))


def test_mu_is_product_with_third_qubit():
    state = states.build(states.family("Mu", theta=0.5))
    assert measures.negativity(state, 2) == pytest.approx(0.0, abs=1e-12)
    assert measures.negativity(state, 0) == pytest.approx(math.sin(1.0), abs=1e-12)


def test_general3_requires_eight_amplitudes():
    with pytest.raises(InvalidArgumentError, match="amplitudes"):
        states.build(states.family("General3", amplitudes=[1, 0, 0]))


def test_random_states_are_valid(rng):
    pure = states.random_pure(3, rng)
    assert states.purity(pure) == pytest.approx(1.0)
    mixed = states.random_mixed2(rng)
    assert np.trace(mixed.rho).real == pytest.approx(1.0)
    assert hermitian_eigenvalues(mixed.rho)[0] >= -1e-12
    assert states.purity(mixed) < 1.0


def test_mix():
    a = states.product_state([0, 0])
    b = states.product_state([1, 1])
    mixed = states.mix([(0.25, a), (0.75, b)])
    assert_allclose(np.diag(mixed.rho).real, [0.25, 0, 0, 0.75])
    with pytest.raises(InvalidArgumentError):
        states.mix([(0.5, a), (0.6, b)])
    with pytest.raises(InvalidArgumentError):
        states.mix([(0.5, a), (0.5, states.product_state([0]))])


def test_local_unitary_is_unitary(rng):
    u = states.random_local_unitary(3, rng)
    assert_allclose(u @ u.conj().T, np.eye(8), atol=1e-12)


def test_transform_keeps_amplitudes_in_sync(rng, ghz3):
    moved = states.transform(ghz3, states.random_local_unitary(3, rng))
    assert_allclose(np.outer(moved.amplitudes, moved.amplitudes.conj()), moved.rho, atol=1e-12)


def test_json_round_trip(rng):
    state = states.random_mixed2(rng)
    doc = states.state_to_json(state)
    assert doc["k"] == 2
    assert len(doc["rho"]) == 4 and len(doc["rho"][0][0]) == 2
    restored = states.state_from_json(json.loads(json.dumps(doc)))
    assert_allclose(restored.rho, state.rho, atol=1e-15)


def test_json_rejects_wrong_shape():
    with pytest.raises(InvalidShapeError):
        states.state_from_json({"k": 2, "rho": [[[1.0, 0.0]]]})
    with pytest.raises(InvalidArgumentError):
        states.state_from_json({"rho": []})


def test_build_from_state_family_object():
    state = states.build(StateFamily(FamilyTag.G_TYPE, {"a": 0.5}))
    assert measures.negativity(state) == pytest.approx(1.0)


def test_haar_reduced_purity_moment(rng):
    purities = []
    for _ in range(10_000):
        reduced = partial_trace(states.random_pure(2, rng).rho, [0], 2)
        purities.append(float(np.real(np.trace(reduced @ reduced))))
    # 2×2 二分下的 Haar 平均：(d_A + d_B) / (d_A d_B + 1) = 4/5
    assert np.mean(purities) == pytest.approx(0.8, abs=0.01)


def test_random_pure_is_deterministic_per_seed():
    first = states.random_pure(3, np.random.default_rng(99))
    second = states.random_pure(3, np.random.default_rng(99))
    other = states.random_pure(3, np.random.default_rng(100))
    assert np.array_equal(first.rho, second.rho)
    assert not np.array_equal(first.rho, other.rho)
    assert states.purity(first) == pytest.approx(1.0, abs=1e-12)
