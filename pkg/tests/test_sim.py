"""Trajectory integration: bit-reproducibility, fused-loop equivalence with
the public step functions, guard events, and ensemble aggregation."""

import numpy as np
import pytest

from phreactor.control import ControllerGains, control_law
from phreactor.sim import (
    N_TRAJ_FLOOR,
    SimConfig,
    SimulationAbort,
    ensemble,
    euler_maruyama_step,
    scaled_errors,
    simulate,
    stability_estimate,
    trajectory_rng,
)
from phreactor.thermo import ThermoState


# ------------------------------------------------------------ configuration


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(mode="bogus")
    with pytest.raises(ValueError):
        SimConfig(dt=0.0)
    with pytest.raises(ValueError):
        SimConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        SimConfig(record_every=0)
    assert SimConfig(dt=1e-3, t_end=10.0).n_steps == 10000
    assert SimConfig(mode="closed_loop").noise_on
    assert SimConfig(mode="open_loop").noise_on
    assert not SimConfig(mode="deterministic").noise_on
    assert not SimConfig(mode="isolated").noise_on


def test_feedback_modes_require_setpoint_and_gains(net, x0):
    cfg = SimConfig(t_end=0.01, mode="closed_loop")
    with pytest.raises(ValueError):
        simulate(net, None, None, cfg, x0)


def test_record_grid(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.05, mode="deterministic", record_every=10)
    tr = simulate(net, sp, gains, cfg, x0)
    np.testing.assert_allclose(tr.times, [0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
                               atol=1e-15)
    # a stride that misses the end still records the final step
    cfg = SimConfig(dt=1e-3, t_end=0.05, mode="deterministic", record_every=7)
    tr = simulate(net, sp, gains, cfg, x0)
    steps = np.rint(tr.times / cfg.dt).astype(int)
    assert steps.tolist() == [0, 7, 14, 21, 28, 35, 42, 49, 50]


# ------------------------------------- fused loop vs the public step pieces


def test_deterministic_loop_matches_public_functions(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.3, mode="deterministic", record_every=10)
    tr = simulate(net, sp, gains, cfg, x0)
    x = x0.copy()
    states, qs, Qs = [x.copy()], [], []
    for k in range(cfg.n_steps):
        a = control_law(net, sp, gains, x)
        x = euler_maruyama_step(net, x, a.u, cfg.dt, np.zeros(3))
        if (k + 1) % cfg.record_every == 0:
            states.append(x.copy())
    np.testing.assert_array_equal(tr.states, np.array(states))
    for i, xs in enumerate(states):
        a = control_law(net, sp, gains, xs)
        assert tr.q[i] == a.q
        assert tr.Qdot[i] == a.Qdot


def test_noisy_loop_matches_public_functions(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.2, seed=123, mode="closed_loop",
                    record_every=10)
    tr = simulate(net, sp, gains, cfg, x0)
    rng = trajectory_rng(cfg.seed, 0)
    sq = np.sqrt(cfg.dt)
    x = x0.copy()
    states = [x.copy()]
    for k in range(cfg.n_steps):
        a = control_law(net, sp, gains, x)
        dW = rng.standard_normal(3) * sq
        x = euler_maruyama_step(net, x, a.u, cfg.dt, dW)
        if (k + 1) % cfg.record_every == 0:
            states.append(x.copy())
    # identical draws; only float summation order may differ
    np.testing.assert_allclose(tr.states, np.array(states), rtol=1e-12,
                               atol=1e-14)


# ---------------------------------------------------------- reproducibility


def test_seeded_rerun_is_bit_identical(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.2, seed=42, mode="closed_loop")
    a = simulate(net, sp, gains, cfg, x0)
    b = simulate(net, sp, gains, cfg, x0)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.q, b.q)
    assert a.events == b.events


def test_trajectory_rng_substreams():
    first = trajectory_rng(7, 0).standard_normal(4)
    np.testing.assert_array_equal(first, trajectory_rng(7, 0).standard_normal(4))
    assert not np.allclose(first, trajectory_rng(7, 1).standard_normal(4))
    assert not np.allclose(first, trajectory_rng(8, 0).standard_normal(4))


def test_ensemble_reuses_per_trajectory_substreams(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.1, seed=5, n_traj=3, mode="closed_loop")
    stats = ensemble(net, sp, gains, cfg, x0)
    assert len(stats.trajectories) == 3
    for i, tr in enumerate(stats.trajectories):
        solo = simulate(net, sp, gains, cfg, x0, traj_index=i)
        np.testing.assert_array_equal(tr.states, solo.states)
    assert not np.array_equal(stats.trajectories[0].states,
                              stats.trajectories[1].states)


# ------------------------------------------------------- physics invariants


def test_isolated_run_conserves_energy_and_grows_entropy(net, x0):
    cfg = SimConfig(dt=1e-3, t_end=1.0, mode="isolated", record_every=1)
    tr = simulate(net, None, None, cfg, x0)
    assert not tr.aborted
    np.testing.assert_array_equal(tr.U, np.full_like(tr.U, x0[0]))
    assert np.all(np.diff(tr.S) > 0)
    assert np.all(tr.q == 0) and np.all(tr.Qdot == 0)
    assert np.all(np.isnan(tr.avail))  # no setpoint given


def test_closed_loop_stays_near_setpoint_started_there(net, sp, gains):
    cfg = SimConfig(dt=1e-3, t_end=2.0, mode="deterministic")
    tr = simulate(net, sp, gains, cfg, sp.x_star)
    assert np.abs(tr.T - sp.T_star).max() < 0.2
    assert float(np.linalg.norm(tr.N[-1] - sp.N_star)) < 0.01
    assert tr.events == []


# ------------------------------------------------------------ guard events


def test_mole_floor_clamp_in_step(plain_net):
    st = ThermoState.from_temperature(plain_net, np.array([2.0, 1e-9]), 320.0)
    x_new = euler_maruyama_step(plain_net, st.x, np.array([0.5, 0.0]), 1e-3,
                                np.zeros(3))
    assert x_new[2] == N_TRAJ_FLOOR


def test_washout_logs_floor_events(plain_net):
    st = ThermoState.from_temperature(plain_net, np.array([1.0, 1.0]), 342.0)
    cfg = SimConfig(dt=1e-3, t_end=0.1, seed=3, mode="open_loop",
                    u_open=(0.5, 0.0))
    tr = simulate(plain_net, None, None, cfg, st.x)
    codes = [c for _, c in tr.events]
    assert codes.count("floor_B") > 10
    assert "floor_A" not in codes
    assert not tr.aborted
    assert tr.N[-1, 1] == N_TRAJ_FLOOR


def test_halving_retry_keeps_temperature_positive(net, x0):
    cfg = SimConfig(dt=1e-3, t_end=1.0, seed=0, mode="open_loop",
                    u_open=(0.0, -1e6))
    tr = simulate(net, None, None, cfg, x0)
    codes = {c for _, c in tr.events}
    assert "halve" in codes
    assert not tr.aborted
    assert np.all(tr.T > 0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blowup_aborts_and_keeps_prefix(net, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.1, seed=1, mode="open_loop",
                    u_open=(-1e9, 0.0))
    tr = simulate(net, None, None, cfg, x0)
    assert tr.aborted
    assert tr.abort_reason is not None
    assert len(tr.times) < 11      # stopped before the full grid
    assert len(tr.times) >= 1      # the initial record is always kept


def test_nonfinite_input_aborts_immediately(net, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.1, seed=1, mode="open_loop",
                    u_open=(0.0, float("nan")))
    tr = simulate(net, None, None, cfg, x0)
    assert tr.aborted
    assert tr.abort_reason == "non-finite state update"
    assert len(tr.times) == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_step_guards(net, x0):
    with pytest.raises(SimulationAbort):
        euler_maruyama_step(net, x0, np.array([0.0, 0.0]), 1e-3,
                            np.array([np.inf, 0.0, 0.0]))
    with pytest.raises(SimulationAbort):
        euler_maruyama_step(net, x0, np.array([0.0, -1e9]), 1.0, np.zeros(3))


def test_ensemble_raises_when_every_trajectory_aborts(net, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.1, seed=1, n_traj=2, mode="open_loop",
                    u_open=(0.0, float("nan")))
    with pytest.raises(SimulationAbort):
        ensemble(net, None, None, cfg, x0)


# -------------------------------------------------------------- aggregation


def test_scaled_errors_formula(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.05, mode="deterministic")
    tr = simulate(net, sp, gains, cfg, x0)
    err = scaled_errors(tr, sp)
    scale = np.concatenate(([abs(sp.U_star)], sp.N_star))
    want = np.linalg.norm((tr.states[0] - sp.x_star) / scale)
    assert err[0] == pytest.approx(want, rel=1e-14)
    assert err.shape == tr.times.shape


def test_stability_estimate_counts_trajectories_inside_ball(net, sp, gains):
    cfg = SimConfig(dt=1e-3, t_end=0.05, mode="deterministic")
    tr = simulate(net, sp, gains, cfg, sp.x_star)
    assert stability_estimate([tr], sp, eps=1.0) == 1.0
    assert stability_estimate([tr], sp, eps=1e-12) == 0.0
    assert stability_estimate([], sp, eps=1.0) == 0.0


def test_ensemble_statistics(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.1, seed=5, n_traj=3, mode="closed_loop",
                    record_every=10)
    stats = ensemble(net, sp, gains, cfg, x0)
    assert stats.n_aborted == 0
    stack = np.stack([tr.T for tr in stats.trajectories])
    np.testing.assert_allclose(stats.mean["T"], stack.mean(axis=0), rtol=1e-15)
    np.testing.assert_allclose(stats.std["T"], stack.std(axis=0), rtol=1e-12,
                               atol=1e-15)
    assert stats.terminal_T_error.shape == (3,)
    assert 0.0 <= stats.stabilization_probability <= 1.0
    np.testing.assert_array_equal(stats.times, stats.trajectories[0].times)


def test_open_loop_until_switches_to_feedback(net, sp, gains, x0):
    cfg = SimConfig(dt=1e-3, t_end=0.1, mode="deterministic",
                    open_loop_until=0.05, u_open=(0.0, 0.0), record_every=10)
    tr = simulate(net, sp, gains, cfg, x0)
    held = tr.times < 0.05
    assert np.all(tr.q[held] == 0.0)
    assert np.all(tr.Qdot[held] == 0.0)
    assert np.all(tr.q[~held] > 0.0)
