"""Euler-Maruyama stepping, the guard protocol, recording and serialization."""

import math

import numpy as np
import pytest

from monduff import (FIELD_CLASSICAL_FROZEN, FIELD_SEMICLASSICAL,
                     IntegratorConfig, ModelParams, NoiseStream,
                     SemiclassicalState, default_initial_state, hamiltonian,
                     integrate, step)
from monduff import storage
from monduff._kernels import em_step_core, run_steps
from conftest import fast_config, random_states


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(total_periods=10, transient_periods=10)
    with pytest.raises(ValueError):
        IntegratorConfig(total_periods=10, record_stride=3, steps_per_period=1000)
    with pytest.raises(ValueError):
        IntegratorConfig(total_periods=10, chi_min=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(total_periods=10, max_halvings=-1)


def test_step_hand_value():
    # explicit Euler on the hamiltonian drift at gamma=0
    p = ModelParams(beta=0.1, gamma=0.0, g=0.0)
    s = SemiclassicalState(t=0.0, x=1.0, p=0.0, chi=1.0, pi=0.0)
    out = step(s, p, dW=0.0, h=1e-3)
    assert out.x == pytest.approx(1.0, abs=1e-15)
    assert out.p == pytest.approx(0.96e-3, rel=1e-12)
    assert out.chi == pytest.approx(1.0, abs=1e-15)
    assert out.pi == pytest.approx(1.19e-3, rel=1e-12)
    assert out.t == pytest.approx(1e-3)


def test_step_is_deterministic_and_gamma0_ignores_noise():
    p = ModelParams(beta=0.1, gamma=0.4, g=0.3, phi=0.7)
    s = SemiclassicalState(t=0.3, x=2.0, p=-1.0, chi=0.8, pi=0.5)
    a = step(s, p, dW=0.0, h=2e-3)
    b = step(s, p, dW=0.0, h=2e-3)
    assert (a.x, a.p, a.chi, a.pi) == (b.x, b.p, b.chi, b.pi)
    p0 = ModelParams(beta=0.1, gamma=0.0, g=0.3, phi=0.7)
    c = step(s, p0, dW=7.0, h=2e-3)
    d = step(s, p0, dW=0.0, h=2e-3)
    assert (c.x, c.p, c.chi, c.pi) == (d.x, d.p, d.chi, d.pi)


def test_step_matches_kernel_bitwise():
    rng = np.random.default_rng(3)
    for s in random_states(rng, 40, chi_lo=0.2, chi_hi=3.0):
        p = ModelParams(beta=float(rng.uniform(0.02, 0.3)),
                        gamma=float(rng.uniform(0.0, 0.2)),
                        g=float(rng.uniform(0.0, 0.4)),
                        phi=float(rng.uniform(0.0, 2 * math.pi)))
        dw = float(rng.normal(0.0, 0.05))
        h = 1e-3
        via_step = step(s, p, dw, h)
        rec = np.empty((2, 4))
        status, k, x, pp, chi, pi = run_steps(
            FIELD_SEMICLASSICAL, s.x, s.p, s.chi, s.pi, 0, 1, h,
            np.array([dw]), p.beta, p.gamma, p.g, p.omega, p.phi,
            p.coupling_sign, p.fp_literal, 1e-12, 1e12, rec, 0, 0)
        # t=0 inside the kernel; shift the reference state's clock to match
        s0 = SemiclassicalState(t=0.0, x=s.x, p=s.p, chi=s.chi, pi=s.pi)
        ref = step(s0, p, dw, h)
        assert status == 0
        assert (x, pp, chi, pi) == (ref.x, ref.p, ref.chi, ref.pi)


def test_strong_convergence_order_on_geometric_diffusion():
    # endpoint strong error of Euler-Maruyama against the exact solution
    # Y = Y0 exp((a - b^2/2) t + b W); slope must be 0.5 +- 0.1
    a, b, y0, T = -1.0, 0.5, 1.0, 1.0
    n_fine, n_paths = 2 ** 12, 256
    dw = NoiseStream(42).wiener_increments(T / n_fine, n_fine * n_paths)
    dw = dw.reshape(n_paths, n_fine)
    y_exact = y0 * np.exp((a - 0.5 * b * b) * T + b * dw.sum(axis=1))
    errs, hs = [], []
    for k in range(6, 13):
        n = 2 ** k
        coarse = dw.reshape(n_paths, n, n_fine // n).sum(axis=2)
        h = T / n
        y = np.full(n_paths, y0)
        for i in range(n):
            y = y + a * y * h + b * y * coarse[:, i]
        errs.append(np.abs(y - y_exact).mean())
        hs.append(h)
    slope = np.polyfit(np.log2(hs), np.log2(errs), 1)[0]
    assert 0.4 <= slope <= 0.6


def test_hamiltonian_drift_bound_at_example_step():
    # explicit Euler at 1e4 steps/period drifts ~7e-4 relative over 10
    # periods (measured); pinned at twice that
    p = ModelParams(beta=0.1, gamma=0.0, g=0.0)
    s0 = default_initial_state(p)
    cfg = IntegratorConfig(total_periods=10, transient_periods=0,
                           steps_per_period=10_000, record_stride=1000)
    traj = integrate(s0, p, cfg, stream=NoiseStream(1))
    h0 = hamiltonian(s0, p)
    xe = traj.states[-1]
    h1 = hamiltonian(SemiclassicalState(t=traj.t[-1], x=xe[0], p=xe[1],
                                        chi=xe[2], pi=xe[3]), p)
    assert abs(h1 - h0) / abs(h0) <= 1.4e-3


def test_integrate_bit_identical():
    p = ModelParams(beta=0.05, gamma=0.1, g=0.3, phi=0.5)
    cfg = fast_config(total=30, transient=5, spp=1000, stride=10)
    t1 = integrate(None, p, cfg, stream=NoiseStream(8, 2))
    t2 = integrate(None, p, cfg, stream=NoiseStream(8, 2))
    assert np.array_equal(t1.states, t2.states)
    assert np.array_equal(t1.t, t2.t)
    assert np.array_equal(t1.increments, t2.increments)


def test_increments_replay_from_stream():
    p = ModelParams(beta=0.05, gamma=0.1, g=0.3)
    cfg = fast_config(total=10, transient=2, spp=500, stride=5)
    traj = integrate(None, p, cfg, stream=NoiseStream(21, 9))
    h = p.drive_period / cfg.steps_per_period
    replay = NoiseStream(21, 9).wiener_increments(h, 10 * 500)
    assert np.array_equal(traj.increments, replay)


def test_supplied_increments_reproduce_stream_run():
    p = ModelParams(beta=0.05, gamma=0.1, g=0.3, phi=1.0)
    cfg = fast_config(total=12, transient=3, spp=500, stride=5)
    via_stream = integrate(None, p, cfg, stream=NoiseStream(4, 4))
    h = p.drive_period / cfg.steps_per_period
    dw = NoiseStream(4, 4).wiener_increments(h, 12 * 500)
    via_array = integrate(None, p, cfg, increments=dw)
    assert np.array_equal(via_stream.states, via_array.states)
    with pytest.raises(ValueError):
        integrate(None, p, cfg)  # neither source
    with pytest.raises(ValueError):
        integrate(None, p, cfg, stream=NoiseStream(1), increments=dw)


def test_chi_positive_over_random_parameter_draws():
    rng = np.random.default_rng(12)
    cfg = fast_config(total=8, transient=2, spp=500, stride=5)
    for k in range(100):
        p = ModelParams(beta=float(rng.uniform(0.02, 0.3)),
                        gamma=float(rng.uniform(0.0, 0.12)),
                        g=float(rng.uniform(0.2, 0.4)),
                        phi=float(rng.uniform(0.0, 2 * math.pi)))
        traj = integrate(None, p, cfg, stream=NoiseStream(1000 + k))
        assert np.all(traj.states[:, 2] > cfg.chi_min), (k, p)
        if traj.status != "ok":
            assert traj.fail_time is not None


# the Gamma=0.05, beta=0.15, phi=0 cell at 1000 steps/period is stiff enough
# to drive chi into the guard; it exercises the whole halving protocol
STIFF = ModelParams(beta=0.15, gamma=0.05, g=0.3, phi=0.0)


def test_guard_protocol_records_events_and_stays_deterministic():
    cfg = IntegratorConfig(total_periods=40, transient_periods=10,
                           steps_per_period=1000, record_stride=10)
    t1 = integrate(None, STIFF, cfg, stream=NoiseStream(1, 0))
    kinds = [e.kind for e in t1.events]
    assert "guard_halving" in kinds
    assert np.all(t1.states[:, 2] > cfg.chi_min)
    if t1.status != "ok":
        assert t1.fail_time is not None
        assert kinds[-1] == f"{t1.status}_abort"
    t2 = integrate(None, STIFF, cfg, stream=NoiseStream(1, 0))
    assert np.array_equal(t1.states, t2.states)
    assert t1.status == t2.status


def test_guard_abort_when_halving_disabled():
    cfg = IntegratorConfig(total_periods=40, transient_periods=10,
                           steps_per_period=1000, record_stride=10,
                           max_halvings=0)
    traj = integrate(None, STIFF, cfg, stream=NoiseStream(1, 0))
    assert traj.status == "singularity"
    assert traj.fail_time is not None
    assert traj.t[-1] <= traj.fail_time


def test_escape_abort_carries_time():
    p = ModelParams(beta=1.0, gamma=0.0, g=1e12)
    cfg = fast_config(total=6, transient=1, spp=500, stride=5)
    traj = integrate(None, p, cfg, stream=NoiseStream(2))
    assert traj.status == "escape"
    assert traj.fail_time is not None
    assert any(e.kind == "escape_abort" for e in traj.events)


def test_initial_chi_must_clear_guard():
    p = ModelParams(beta=0.1)
    cfg = fast_config(chi_min=0.9)
    with pytest.raises(ValueError):
        integrate(SemiclassicalState(t=0, x=1, p=0, chi=0.5, pi=0), p, cfg,
                  stream=NoiseStream(1))


def test_halving_h_leaves_time_averages_within_seed_scatter():
    # self-consistency: step halving moves Hbar and U2bar by less than the
    # seed-to-seed spread at the default step
    from monduff import trajectory_stats
    p = ModelParams(beta=0.05, gamma=0.1, g=0.3, phi=0.0)
    seeds = range(5)

    def averages(spp, seed):
        cfg = IntegratorConfig(total_periods=220, transient_periods=60,
                               steps_per_period=spp, record_stride=spp // 100)
        traj = integrate(None, p, cfg, stream=NoiseStream(300 + seed))
        st = trajectory_stats(traj)
        return st.h_bar, st.u2_bar

    coarse = np.array([averages(1000, s) for s in seeds])
    fine = np.array([averages(2000, s) for s in seeds])
    scatter = coarse.std(axis=0, ddof=1)
    shift = np.abs(coarse.mean(axis=0) - fine.mean(axis=0))
    assert np.all(shift < scatter)


def test_trajectory_time_grid_and_post_transient():
    p = ModelParams(beta=0.05, gamma=0.1, g=0.3)
    cfg = fast_config(total=7, transient=3, spp=1000, stride=10)
    traj = integrate(None, p, cfg, stream=NoiseStream(3))
    assert traj.status == "ok"
    assert np.all(np.diff(traj.t) > 0)
    t_post, s_post = traj.post_transient()
    assert len(t_post) == 4 * (1000 // 10)
    assert t_post[0] > 3 * p.drive_period


def test_csv_round_trip(tmp_path):
    p = ModelParams(beta=0.1, gamma=0.05, g=0.3)
    cfg = fast_config(total=6, transient=2, spp=500, stride=50)
    traj = integrate(None, p, cfg, stream=NoiseStream(5))
    path = tmp_path / "traj.csv"
    storage.write_trajectory_csv(path, traj)
    t, states = storage.read_trajectory_csv(path)
    assert np.array_equal(t, traj.t)
    assert np.array_equal(states, traj.states)


def test_binary_round_trip(tmp_path):
    p = ModelParams(beta=0.15, gamma=0.05, g=0.3, phi=0.25)
    cfg = fast_config(total=6, transient=2, spp=500, stride=50)
    traj = integrate(None, p, cfg, stream=NoiseStream(6, 77))
    path = tmp_path / "traj.mdt"
    storage.write_trajectory_binary(path, traj)
    back = storage.read_trajectory_binary(path)
    assert back.params == traj.params
    assert back.config == traj.config
    assert back.seed == 6 and back.stream_id == 77
    assert back.status == traj.status
    assert np.array_equal(back.t, traj.t)
    assert np.array_equal(back.states, traj.states)
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.mdt"
        bad.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
        storage.read_trajectory_binary(bad)
