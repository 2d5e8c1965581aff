import math

import numpy as np
import pytest

from netsync.control import ControllerSpec
from netsync.dynamics import (
    LinearDecayModel,
    LorenzModel,
    MismatchEnsemble,
    lorenz_bounds,
    lorenz_drift,
    sample_mismatches,
)
from netsync.errors import DivergenceError, ValidationError
from netsync.graph import GainDiagonal, build_complete_R, build_path_laplacian, zero_laplacian
from netsync.sim import (
    IntegrationConfig,
    NetworkState,
    NetworkSystem,
    average_error,
    initial_state,
    integrate,
    integrate_fixed,
    network_rhs,
    reference_error,
    rk4_step,
    settling_time,
)

from oracles import rk4_decay

OPEN = ControllerSpec("open_loop")


def _linear_system(n, L=None, rate=1.0, h=1.0, gammas=None):
    L = zero_laplacian(n) if L is None else L
    g = np.zeros((n, 1)) if gammas is None else gammas
    return NetworkSystem(LinearDecayModel(1, rate), L, np.array([[h]]),
                         MismatchEnsemble(g, np.full(1, max(1.0, np.abs(g).max()))), OPEN)


def _decentralized_lorenz(n, seed, z=10.0, k=1.0):
    spec = ControllerSpec("decentralized", Z=GainDiagonal(np.full(n, z)), k=np.full(n, k))
    return NetworkSystem(LorenzModel(), build_complete_R(n), 10.0 * np.eye(3),
                         sample_mismatches(n, lorenz_bounds(), seed), spec)


def test_rk4_step_matches_amplification_polynomial():
    y = rk4_step(lambda t, y: -y, 0.0, np.array([2.0]), 0.1)
    assert y[0] == pytest.approx(rk4_decay(2.0, 1.0, 0.1, 1), rel=1e-15)


def test_rk4_richardson_order_four():
    errs = [abs(integrate_fixed(lambda t, y: -y, np.array([1.0]), 0.0, 5.0, dt)[0] - math.exp(-5.0))
            for dt in (1e-2, 5e-3, 2.5e-3)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 8.0 <= coarse / fine <= 32.0


def test_rk4_richardson_on_lorenz_reference():
    # successive-halving differences shrink ~16x once dt is in the asymptotic range
    f = lambda t, y: lorenz_drift(y)  # noqa: E731
    ends = [integrate_fixed(f, np.ones(3), 0.0, 1.0, dt) for dt in (5e-3, 2.5e-3, 1.25e-3)]
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert 8.0 <= ratio <= 32.0


def test_zero_dynamics_constant():
    sysm = _linear_system(3, rate=0.0)
    cfg = IntegrationConfig(dt=0.1, t_end=1.0, seed=1, x0_box=((-1.0, 1.0),))
    tr = integrate(sysm, cfg, stride=1)
    np.testing.assert_array_equal(tr.final_state.x, initial_state(sysm, cfg).x)
    assert np.all(tr.e_avg == tr.e_avg[0])


def test_single_uncoupled_node_is_isolated_lorenz():
    sysm = NetworkSystem(LorenzModel(), zero_laplacian(1), 10.0 * np.eye(3),
                         MismatchEnsemble(np.zeros((1, 3)), lorenz_bounds()), OPEN)
    st = NetworkState(0.0, np.array([[1.0, 2.0, 3.0]]), None, np.array([4.0, 5.0, 6.0]))
    d = network_rhs(st, sysm)
    np.testing.assert_array_equal(d.x[0], lorenz_drift([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(d.s, lorenz_drift([4.0, 5.0, 6.0]))


def test_synchronized_open_loop_has_zero_error_derivative():
    sysm = NetworkSystem(LorenzModel(), build_complete_R(4), 10.0 * np.eye(3),
                         MismatchEnsemble(np.zeros((4, 3)), lorenz_bounds()), OPEN)
    s = np.array([1.0, -2.0, 20.0])
    d = network_rhs(NetworkState(0.0, np.tile(s, (4, 1)), None, s), sysm)
    np.testing.assert_array_equal(d.x, np.tile(lorenz_drift(s), (4, 1)))


@pytest.mark.parametrize("seed", range(5))
def test_average_error_matches_R_N_definition(seed):
    rng = np.random.default_rng(seed)
    n_nodes = int(rng.integers(2, 30))
    x = rng.normal(size=(n_nodes, 3)) * 10
    r = n_nodes * np.eye(n_nodes) - np.ones((n_nodes, n_nodes))
    direct = np.linalg.norm(np.kron(r, np.eye(3)) @ x.ravel()) / n_nodes
    assert average_error(x)[1] == pytest.approx(direct, rel=1e-9)


def test_rk4_nonautonomous():
    # y' = cos t, y(0) = 0 -> sin t
    y = integrate_fixed(lambda t, y: np.array([math.cos(t)]), np.zeros(1), 0.0, 2.0, 0.01)
    assert y[0] == pytest.approx(math.sin(2.0), abs=1e-9)


def test_uncoupled_linear_network_matches_closed_form():
    sysm = _linear_system(4, rate=2.0)
    cfg = IntegrationConfig(dt=0.01, t_end=1.0, seed=5, x0_box=((-1.0, 1.0),))
    tr = integrate(sysm, cfg, stride=100)
    x0 = initial_state(sysm, cfg).x[:, 0]
    np.testing.assert_allclose(tr.final_state.x[:, 0], rk4_decay(x0, 2.0, 0.01, 100), rtol=1e-13)


def test_complete_graph_disagreement_decays_at_coupled_rate():
    # x' = -x - h R_N x: the disagreement decays like exp(-(1 + N h) t)
    n, h = 5, 0.3
    sysm = _linear_system(n, L=build_complete_R(n), h=h)
    cfg = IntegrationConfig(dt=1e-3, t_end=1.0, seed=2, x0_box=((-1.0, 1.0),))
    tr = integrate(sysm, cfg, stride=100)
    expected = tr.e_avg[0] * np.exp(-(1 + n * h) * tr.t)
    np.testing.assert_allclose(tr.e_avg, expected, rtol=1e-10)


def test_sampling_schedule():
    sysm = _linear_system(2)
    tr = integrate(sysm, IntegrationConfig(dt=0.1, t_end=1.1, seed=0, x0_box=((-1.0, 1.0),)), stride=4)
    # 11 steps, samples at 0, 4, 8 and the final step
    np.testing.assert_allclose(tr.t, [0.0, 0.4, 0.8, 1.1])
    assert tr.stride == 4


def test_average_error_sums_to_zero_at_every_sample():
    sysm = NetworkSystem(LorenzModel(), build_path_laplacian(6), 10.0 * np.eye(3),
                         sample_mismatches(6, lorenz_bounds(), 3), OPEN)
    worst = []

    def obs(state):
        e, _ = average_error(state.x)
        worst.append(np.abs(e.sum(axis=0)).max())

    integrate(sysm, IntegrationConfig(t_end=1.0, seed=3), stride=10, observer=obs)
    assert len(worst) == 101 and max(worst) <= 1e-9


def test_error_helpers():
    e, norm = average_error(np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]))
    np.testing.assert_array_equal(e, [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    assert norm == pytest.approx(math.sqrt(2.0))
    s = np.array([0.5, -1.0, 2.0])
    per, total = reference_error(np.array([s + [3.0, 4.0, 0.0], s]), s)
    np.testing.assert_allclose(per, [5.0, 0.0])
    assert total == pytest.approx(5.0)
    assert average_error(np.ones((4, 3)))[1] == 0.0


def test_decentralized_lyapunov_function_decreases():
    n = 6
    sysm = _decentralized_lorenz(n, seed=4)
    values = []

    def obs(state):
        values.append(0.5 * np.sum((state.x - state.s) ** 2)
                      + 0.5 * np.sum((state.gamma_hat - sysm.mismatch.gammas) ** 2))

    integrate(sysm, IntegrationConfig(t_end=1.0, seed=4), stride=1, observer=obs)
    assert np.all(np.diff(values) < 0)


def test_controlled_run_reports_estimation_error():
    tr = integrate(_decentralized_lorenz(4, seed=1), IntegrationConfig(t_end=0.5, seed=1), stride=50, per_node=True)
    assert np.all(np.isfinite(tr.gamma_err))
    # gamma_hat starts at zero
    assert tr.gamma_err[0] == pytest.approx(np.linalg.norm(sample_mismatches(4, lorenz_bounds(), 1).gammas))
    np.testing.assert_allclose(np.linalg.norm(tr.node_norms, axis=1), tr.e_ref, rtol=1e-12)


def test_open_loop_gamma_err_is_nan_and_node_norms_are_average_errors():
    sysm = NetworkSystem(LorenzModel(), build_complete_R(4), 10.0 * np.eye(3),
                         sample_mismatches(4, lorenz_bounds(), 0), OPEN)
    tr = integrate(sysm, IntegrationConfig(t_end=0.1, seed=0), stride=10, per_node=True)
    assert np.all(np.isnan(tr.gamma_err))
    np.testing.assert_allclose(np.linalg.norm(tr.node_norms, axis=1), tr.e_avg, rtol=1e-12)


def test_mismatch_peak_matches_direct_evaluation():
    sysm = NetworkSystem(LorenzModel(), build_complete_R(4), 10.0 * np.eye(3),
                         sample_mismatches(4, lorenz_bounds(), 0), OPEN)
    peaks = []

    def obs(state):
        d = LorenzModel().apply_mismatch(state.x, sysm.mismatch.gammas)
        peaks.append(np.max(np.sum(d * d, axis=1)))

    tr = integrate(sysm, IntegrationConfig(t_end=0.2, seed=0), stride=5, observer=obs)
    assert tr.mismatch_peak == pytest.approx(max(peaks), rel=1e-14)


def test_divergence_stops_run():
    sysm = _linear_system(3, rate=-50.0)  # x' = 50 x
    tr = integrate(sysm, IntegrationConfig(dt=1e-3, t_end=2.0, seed=0, x0_box=((1.0, 2.0),)), stride=10)
    assert tr.diverged
    # |x| crosses 1e9 near t = ln(1e9 / |x0|) / 50 < 0.42
    assert 0.3 < tr.divergence_time < 0.42
    assert np.all(np.abs(tr.final_state.x) <= 1e9)
    assert tr.t[-1] == pytest.approx(tr.divergence_time)


def test_network_rhs_rejects_non_finite():
    sysm = _linear_system(2)
    bad = NetworkState(0.0, np.array([[np.nan], [0.0]]), None, np.zeros(1))
    with pytest.raises(DivergenceError) as info:
        network_rhs(bad, sysm)
    assert info.value.t == 0.0


def test_network_rhs_linear():
    sysm = _linear_system(2, L=build_complete_R(2), h=2.0, gammas=np.array([[0.5], [0.0]]))
    st = NetworkState(0.0, np.array([[1.0], [3.0]]), None, np.array([2.0]))
    d = network_rhs(st, sysm)
    # node 0: -1 + 0.5*1 - 2*(1 - 3); node 1: -3 - 2*(3 - 1)
    np.testing.assert_allclose(d.x[:, 0], [3.5, -7.0])
    np.testing.assert_allclose(d.s, [-2.0])


def test_csv_format_and_determinism():
    sysm = NetworkSystem(LorenzModel(), build_complete_R(3), 10.0 * np.eye(3),
                         sample_mismatches(3, lorenz_bounds(), 9), OPEN)
    cfg = IntegrationConfig(t_end=0.05, seed=9)
    a = integrate(sysm, cfg, stride=10, per_node=True).to_csv()
    b = integrate(sysm, cfg, stride=10, per_node=True).to_csv()
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "t,e_avg,e_ref,gamma_err,e_node_1,e_node_2,e_node_3"
    assert len(lines) == 1 + 6
    assert lines[1].split(",")[0] == "0" and lines[1].split(",")[3] == "nan"
    c = integrate(sysm, IntegrationConfig(t_end=0.05, seed=10), stride=10).to_csv()
    assert c.splitlines()[1] != lines[1]


def test_csv_writes_file(tmp_path):
    tr = integrate(_linear_system(2), IntegrationConfig(dt=0.1, t_end=0.3, seed=0, x0_box=((-1.0, 1.0),)))
    path = tmp_path / "t.csv"
    text = tr.to_csv(path)
    assert path.read_bytes() == text.encode()


def test_settling_time():
    tr = integrate(_linear_system(2), IntegrationConfig(dt=0.1, t_end=0.3, seed=0, x0_box=((-1.0, 1.0),)), stride=1)
    tr.e_avg = np.array([3.0, 0.5, 2.0, 0.4])
    assert settling_time(tr, 1.0) == pytest.approx(0.3)
    assert settling_time(tr, 5.0) == 0.0
    assert settling_time(tr, 0.1) is None
    with pytest.raises(ValidationError):
        settling_time(tr, 0.0)


def test_config_validation():
    with pytest.raises(ValidationError):
        IntegrationConfig(dt=0.0)
    with pytest.raises(ValidationError):
        IntegrationConfig(dt=1.0, t_end=0.5)
    with pytest.raises(ValidationError):
        IntegrationConfig(method="euler")
    with pytest.raises(ValidationError):
        IntegrationConfig(x0_box=((1.0, -1.0),))


def test_system_validation():
    with pytest.raises(ValidationError):
        NetworkSystem(LorenzModel(), build_complete_R(3), np.eye(2), sample_mismatches(3, lorenz_bounds(), 0), OPEN)
    with pytest.raises(ValidationError):
        NetworkSystem(LorenzModel(), build_complete_R(3), np.eye(3), sample_mismatches(4, lorenz_bounds(), 0), OPEN)
    with pytest.raises(ValidationError):
        NetworkSystem(LorenzModel(), build_complete_R(3), np.eye(3), sample_mismatches(3, lorenz_bounds(), 0),
                      ControllerSpec("decentralized", Z=GainDiagonal(np.ones(4)), k=np.ones(4)))


def test_time_varying_mismatch_is_used():
    g = np.array([[0.5]])
    ens = MismatchEnsemble(g, np.ones(1), time_varying=lambda t: g * math.cos(t))
    sysm = NetworkSystem(LinearDecayModel(1, 1.0), zero_laplacian(1), np.eye(1), ens, OPEN)
    cfg = IntegrationConfig(dt=1e-3, t_end=1.0, seed=0, x0_box=((1.0, 1.0),))
    # x' = (-1 + 0.5 cos t) x  ->  x = exp(-t + 0.5 sin t)
    x1 = integrate(sysm, cfg).final_state.x[0, 0]
    assert x1 == pytest.approx(math.exp(-1.0 + 0.5 * math.sin(1.0)), rel=1e-11)
