import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src import channels, measures, states
from src.data_models import ChannelKind
from src.errors import InvalidArgumentError


@pytest.mark.parametrize("kind", list(ChannelKind))
@pytest.mark.parametrize("t", [0.0, 0.1, 2.0])
def test_kraus_completeness(kind, t):
    ops = channels.kraus_operators(t, kind)
    total = sum(op.conj().T @ op for op in ops)
    assert_allclose(total, np.eye(2), atol=1e-14)


def test_noise_parameters():
    s, p, p_prime = channels.noise_parameters(1.0)
    assert s == pytest.approx(math.exp(-1))
    assert p == pytest.approx(1 - math.exp(-1))
    assert p_prime == pytest.approx(0.75 * p)
    with pytest.raises(InvalidArgumentError, match="t="):
        channels.noise_parameters(-0.1)


def test_channel_kind_parse():
    assert ChannelKind.parse("Dephasing") is ChannelKind.DEPHASING
    with pytest.raises(InvalidArgumentError, match="channel"):
        ChannelKind.parse("amplitude")


def test_apply_at_zero_time_is_identity(ghz3):
    for kind in ChannelKind:
        assert_allclose(channels.apply_channel(ghz3, 0.0, kind).rho, ghz3.rho)


def test_depolarizing_shrinks_bloch_vector():
    plus = states.from_amplitudes([1, 1], normalize=True)
    out = channels.apply_channel(plus, 0.5, ChannelKind.DEPOLARIZING)
    assert out.rho[0, 1].real == pytest.approx(0.5 * math.exp(-0.5))
    assert not out.purity_hint


def test_dephasing_keeps_populations(bell):
    out = channels.apply_channel(bell, 0.3, ChannelKind.DEPHASING)
    assert_allclose(np.diag(out.rho), np.diag(bell.rho), atol=1e-15)
    assert out.rho[0, 3].real == pytest.approx(0.5 * math.exp(-0.6))


def test_bell_negativity_decay_under_dephasing(bell):
    t = 0.2
    out = channels.apply_channel(bell, t, ChannelKind.DEPHASING)
    assert measures.negativity(out) == pytest.approx(math.exp(-2 * t), abs=1e-12)


@pytest.mark.parametrize("kind", list(ChannelKind))
def test_generator_matches_finite_difference(rng, kind):
    state = states.random_pure(3, rng)
    dt = 1e-7
    numeric = (channels.apply_channel(state, dt, kind).rho - state.rho) / dt
    assert_allclose(channels.generator(state, kind), numeric, atol=1e-5)


@pytest.mark.parametrize("kind", list(ChannelKind))
def test_generator_is_traceless_and_hermitian(rng, kind):
    sigma = channels.generator(states.random_mixed2(rng), kind)
    assert abs(np.trace(sigma)) < 1e-12
    assert_allclose(sigma, sigma.conj().T)


def test_generator_vanishes_on_maximally_mixed():
    sigma = channels.generator(states.maximally_mixed(3), ChannelKind.DEPOLARIZING)
    assert_allclose(sigma, 0.0, atol=1e-15)


@pytest.mark.parametrize("kind", list(ChannelKind))
def test_channel_is_a_semigroup_in_time(rng, kind):
    state = states.random_mixed2(rng)
    once = channels.apply_channel(state, 0.7, kind)
    twice = channels.apply_channel(channels.apply_channel(state, 0.3, kind), 0.4, kind)
    assert_allclose(twice.rho, once.rho, atol=1e-10)


@pytest.mark.parametrize("kind", list(ChannelKind))
def test_generator_error_is_second_order(rng, kind):
    state = states.random_pure(3, rng)
    sigma = channels.generator(state, kind)

    def error(delta):
        step = channels.apply_channel(state, delta, kind).rho - state.rho
        return np.linalg.norm(step - delta * sigma)

    # 步长减半，误差约为四分之一
    assert error(1e-3) / error(5e-4) == pytest.approx(4.0, rel=0.05)
    assert error(1e-5) <= 10 * 1e-5 ** 2


def test_long_depolarization_gives_maximally_mixed(ghz3):
    out = channels.apply_channel(ghz3, 40.0, ChannelKind.DEPOLARIZING)
    assert_allclose(out.rho, states.maximally_mixed(3).rho, atol=1e-12)
