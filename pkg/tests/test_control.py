import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netsync.control import (
    ControllerSpec,
    decentralized_estimator_rate,
    decentralized_input,
    distributed_estimator_rate,
    distributed_input,
    network_estimator_rates,
    network_inputs,
)
from netsync.dynamics import LorenzModel
from netsync.errors import ValidationError
from netsync.graph import GainDiagonal, build_complete_R, build_path_laplacian, random_laplacian, zero_laplacian

MODEL = LorenzModel()
H = 10.0 * np.eye(3)


def _distributed(n, rng):
    z = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 2.0, n), 0.0)
    z[0] = 1.0
    return ControllerSpec(
        "distributed",
        Z=GainDiagonal(z),
        Zprime=GainDiagonal(np.where(z > 0, 3.0, 0.0)),
        k=rng.uniform(0.5, 5.0, n),
        B=random_laplacian(n, rng, density=0.3),
        C=random_laplacian(n, rng, density=0.3),
    )


def test_decentralized_input_by_hand():
    x, s = np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 1.0])
    gh = np.array([0.5, -1.0, 2.0])
    # -z H (x - s) - diag(x2 - x1, x1, -x3) gh
    expected = -2.0 * 10.0 * np.array([1.0, 1.0, 2.0]) - np.array([0.5, -1.0, -6.0])
    np.testing.assert_allclose(decentralized_input(x, s, 2.0, gh, MODEL, H), expected)


def test_decentralized_estimator_by_hand():
    x, s = np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 1.0])
    np.testing.assert_allclose(decentralized_estimator_rate(x, s, 0.5, MODEL), 0.5 * np.array([1.0, 1.0, -6.0]))


def test_compensation_cancels_true_mismatch_on_reference():
    # with gamma_hat = gamma and x_i = s the input exactly removes the mismatch drive
    rng = np.random.default_rng(0)
    s = rng.normal(size=3)
    g = rng.normal(size=3)
    u = decentralized_input(s, s, 10.0, g, MODEL, H)
    np.testing.assert_allclose(u + MODEL.apply_mismatch(s, g), 0.0, atol=1e-12)
    assert np.all(decentralized_estimator_rate(s, s, 1.0, MODEL) == 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 12))
def test_network_decentralized_matches_per_node(seed, n):
    rng = np.random.default_rng(seed)
    spec = ControllerSpec("decentralized", Z=GainDiagonal(rng.uniform(0.1, 5.0, n)), k=rng.uniform(0.1, 5.0, n))
    x, s, gh = rng.normal(size=(n, 3)) * 5, rng.normal(size=3), rng.normal(size=(n, 3))
    u = network_inputs(x, s, gh, spec, MODEL, H)
    r = network_estimator_rates(x, s, spec, MODEL)
    for i in range(n):
        np.testing.assert_allclose(u[i], decentralized_input(x[i], s, spec.Z.gains[i], gh[i], MODEL, H), atol=1e-10)
        np.testing.assert_allclose(r[i], decentralized_estimator_rate(x[i], s, spec.k[i], MODEL), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 12))
def test_network_distributed_matches_per_node(seed, n):
    rng = np.random.default_rng(seed)
    spec = _distributed(n, rng)
    x, s, gh = rng.normal(size=(n, 3)) * 5, rng.normal(size=3), rng.normal(size=(n, 3))
    u = network_inputs(x, s, gh, spec, MODEL, H)
    r = network_estimator_rates(x, s, spec, MODEL)
    for i in range(n):
        np.testing.assert_allclose(u[i], distributed_input(i, x, s, spec, MODEL, H, gh[i]), atol=1e-9)
        np.testing.assert_allclose(r[i], distributed_estimator_rate(i, x, s, spec, MODEL), atol=1e-9)


def test_distributed_estimator_uses_neighbours_only_through_C():
    n = 4
    C = build_path_laplacian(n)
    spec = ControllerSpec("distributed", Z=GainDiagonal.from_pins(n, [0]), Zprime=GainDiagonal.from_pins(n, [0], 2.0),
                          k=np.ones(n), B=zero_laplacian(n), C=C)
    rng = np.random.default_rng(1)
    x, s = rng.normal(size=(n, 3)), rng.normal(size=3)
    # node 3 is unpinned: signal = x_3 - x_2 (path neighbours); the diagonal of G is (x2-x1, x1, -x3)
    signal = x[3] - x[2]
    g = np.array([x[3, 1] - x[3, 0], x[3, 0], -x[3, 2]])
    np.testing.assert_allclose(distributed_estimator_rate(3, x, s, spec, MODEL), g * signal)


def test_open_loop_inputs_zero():
    spec = ControllerSpec("open_loop")
    x = np.ones((3, 3))
    assert not np.any(network_inputs(x, np.zeros(3), None, spec, MODEL, H))
    with pytest.raises(ValidationError):
        network_estimator_rates(x, np.zeros(3), spec, MODEL)


def test_spec_validation():
    with pytest.raises(ValidationError, match="regime"):
        ControllerSpec("centralized")
    with pytest.raises(ValidationError):
        ControllerSpec("decentralized", Z=GainDiagonal(np.ones(3)))
    with pytest.raises(ValidationError, match="z_i > 0"):
        ControllerSpec("decentralized", Z=GainDiagonal(np.array([1.0, 0.0])), k=np.ones(2))
    with pytest.raises(ValidationError, match="positive"):
        ControllerSpec("decentralized", Z=GainDiagonal(np.ones(2)), k=np.array([1.0, 0.0]))
    with pytest.raises(ValidationError, match="entries"):
        ControllerSpec("decentralized", Z=GainDiagonal(np.ones(2)), k=np.ones(3))


def test_distributed_spec_validation():
    n = 4
    ok = dict(Z=GainDiagonal.from_pins(n, [0]), Zprime=GainDiagonal.from_pins(n, [0]), k=np.ones(n),
              B=zero_laplacian(n), C=build_path_laplacian(n))
    ControllerSpec("distributed", **ok)
    with pytest.raises(ValidationError, match="connected"):
        ControllerSpec("distributed", **{**ok, "C": zero_laplacian(n)})
    with pytest.raises(ValidationError, match="z'_i"):
        ControllerSpec("distributed", **{**ok, "Zprime": GainDiagonal(np.zeros(n))})
    with pytest.raises(ValidationError, match="z_i"):
        ControllerSpec("distributed", **{**ok, "Z": GainDiagonal(np.zeros(n))})
    with pytest.raises(ValidationError, match="one entry per node"):
        ControllerSpec("distributed", **{**ok, "C": build_complete_R(5)})
    with pytest.raises(ValidationError, match="needs"):
        ControllerSpec("distributed", **{**ok, "B": None})


def test_decentralized_input_examples():
    np.testing.assert_allclose(decentralized_input(np.ones(3), np.zeros(3), 10.0, np.zeros(3), MODEL, H),
                               [-100.0, -100.0, -100.0])
    x = np.array([1.0, 3.0, 2.0])
    np.testing.assert_allclose(decentralized_input(x, x, 10.0, np.ones(3), MODEL, H), [-2.0, -1.0, 2.0])
    assert not np.any(decentralized_input(x, x, 10.0, np.zeros(3), MODEL, H))


def test_decentralized_estimator_examples():
    x = np.array([1.0, 3.0, 2.0])
    np.testing.assert_allclose(decentralized_estimator_rate(x, np.zeros(3), 1.0, MODEL), [2.0, 3.0, -4.0])
    np.testing.assert_array_equal(decentralized_estimator_rate(x, np.zeros(3), 2.0, MODEL),
                                  2.0 * decentralized_estimator_rate(x, np.zeros(3), 1.0, MODEL))


def test_distributed_estimator_two_node_example():
    spec = ControllerSpec("distributed", Z=GainDiagonal(np.array([1.0, 0.0])), Zprime=GainDiagonal(np.array([1.0, 0.0])),
                          k=np.ones(2), B=zero_laplacian(2), C=build_path_laplacian(2))
    x = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(distributed_estimator_rate(0, x, np.zeros(3), spec, MODEL), [-2.0, 0.0, 0.0])


def test_distributed_reduces_to_decentralized_for_pinned_node_without_B():
    rng = np.random.default_rng(3)
    n = 3
    spec = ControllerSpec("distributed", Z=GainDiagonal(np.array([1.0, 0.0, 0.0])),
                          Zprime=GainDiagonal(np.array([1.0, 0.0, 0.0])), k=np.ones(n), B=zero_laplacian(n),
                          C=build_path_laplacian(n))
    x, s, gh = rng.normal(size=(n, 3)), rng.normal(size=3), rng.normal(size=3)
    np.testing.assert_allclose(distributed_input(0, x, s, spec, MODEL, H, gh),
                               decentralized_input(x[0], s, 1.0, gh, MODEL, H), atol=1e-12)
    # unpinned node, no estimate: zero input
    assert not np.any(distributed_input(1, x, s, spec, MODEL, H, np.zeros(3)))


def test_single_node_distributed_equals_decentralized():
    rng = np.random.default_rng(4)
    x, s, gh = rng.normal(size=(1, 3)), rng.normal(size=3), rng.normal(size=(1, 3))
    dist = ControllerSpec("distributed", Z=GainDiagonal(np.array([2.0])), Zprime=GainDiagonal(np.array([2.0])),
                          k=np.array([3.0]), B=zero_laplacian(1), C=zero_laplacian(1))
    dec = ControllerSpec("decentralized", Z=GainDiagonal(np.array([2.0])), k=np.array([3.0]))
    np.testing.assert_allclose(network_inputs(x, s, gh, dist, MODEL, H), network_inputs(x, s, gh, dec, MODEL, H))
    # the single-node C contributes nothing, so only z' scales the error signal
    np.testing.assert_allclose(network_estimator_rates(x, s, dist, MODEL),
                               2.0 * network_estimator_rates(x, s, dec, MODEL))


def test_coupling_vanishes_on_synchronized_states():
    rng = np.random.default_rng(5)
    n = 5
    s = rng.normal(size=3)
    spec = _distributed(n, rng)
    x = np.tile(s, (n, 1))
    u = network_inputs(x, s, np.zeros((n, 3)), spec, MODEL, H)
    assert np.allclose(u, 0.0, atol=1e-12)
    assert np.allclose(network_estimator_rates(x, s, spec, MODEL), 0.0, atol=1e-12)


def test_equilibrium_consistency():
    rng = np.random.default_rng(6)
    s, g = rng.normal(size=3), rng.normal(size=3)
    u = decentralized_input(s, s, 5.0, g, MODEL, H)
    # x_i' = f(s) + G(s) gamma + u = f(s)
    np.testing.assert_allclose(MODEL.drift(s[None])[0] + MODEL.apply_mismatch(s, g) + u, MODEL.drift(s[None])[0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.floats(0.1, 10.0))
def test_linearity_in_gains_and_estimates(seed, scale):
    rng = np.random.default_rng(seed)
    n = 4
    spec = _distributed(n, rng)
    scaled = ControllerSpec("distributed", Z=spec.Z, Zprime=spec.Zprime, k=spec.k * scale, B=spec.B, C=spec.C)
    x, s = rng.normal(size=(n, 3)), rng.normal(size=3)
    np.testing.assert_allclose(network_estimator_rates(x, s, scaled, MODEL),
                               scale * network_estimator_rates(x, s, spec, MODEL), rtol=1e-12, atol=1e-12)
    g1, g2 = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
    u0 = network_inputs(x, s, np.zeros((n, 3)), spec, MODEL, H)
    mid = network_inputs(x, s, 0.5 * (g1 + g2), spec, MODEL, H)
    avg = 0.5 * (network_inputs(x, s, g1, spec, MODEL, H) + network_inputs(x, s, g2, spec, MODEL, H))
    np.testing.assert_allclose(mid, avg, atol=1e-10)
    assert u0.shape == (n, 3)
