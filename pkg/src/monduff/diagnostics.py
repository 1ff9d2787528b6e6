"""Chaos and energetics analysis of integrated trajectories.

The largest Lyapunov exponent uses the two-trajectory Benettin method under
common noise: fiducial and shadow consume the identical Wiener increments, so
the measured divergence isolates dynamical instability from realization
differences. The energy ledger splits each recorded step's change of the
drive-free energy H0 into drive, dissipation and noise channels whose sum is
zero by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import IntegratorConfig, Trajectory, _Driver
from .model import (FIELD_CLASSICAL_FROZEN, FIELD_CLASSICAL_PASSIVE,
                    FIELD_LINEAR_OSC, FIELD_SEMICLASSICAL, ModelParams,
                    SemiclassicalState, default_initial_state)
from .stochastic import (NoiseStream, TAG_AUX, TAG_BOOTSTRAP,
                         TAG_REFINE_FIDUCIAL, TAG_REFINE_SHADOW)

@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest Lyapunov exponent per unit dimensionless time."""

    lam: float
    standard_error: float
    n_blocks: int
    converged: bool

    @property
    def chaotic(self) -> bool:
        return self.lam > 3.0 * self.standard_error

    @property
    def regular(self) -> bool:
        return self.lam < -3.0 * self.standard_error

    @property
    def classification(self) -> str:
        if self.chaotic:
            return "chaotic"
        if self.regular:
            return "regular"
        return "inconclusive"


@dataclass
class EnergyLedger:
    """Per-step channel increments; the four channels sum to zero exactly."""

    t: np.ndarray
    dE_g: np.ndarray
    dE_gamma: np.ndarray
    dE_sqrt_gamma: np.ndarray
    dE_H: np.ndarray
    post_mask: np.ndarray

    def means(self) -> dict[str, float]:
        m = self.post_mask
        return {
            "dE_g": float(self.dE_g[m].mean()),
            "dE_gamma": float(self.dE_gamma[m].mean()),
            "dE_sqrt_gamma": float(self.dE_sqrt_gamma[m].mean()),
            "dE_H": float(self.dE_H[m].mean()),
        }

    def cumulative(self) -> dict[str, np.ndarray]:
        """Running sums of each channel over the whole record."""
        return {
            "dE_g": np.cumsum(self.dE_g),
            "dE_gamma": np.cumsum(self.dE_gamma),
            "dE_sqrt_gamma": np.cumsum(self.dE_sqrt_gamma),
            "dE_H": np.cumsum(self.dE_H),
        }

    def balance_ratio(self) -> float:
        """|mean(dE_g) + mean(dE_gamma)| / |mean(dE_g)| post-transient."""
        m = self.means()
        return abs(m["dE_g"] + m["dE_gamma"]) / abs(m["dE_g"])

    def closure_residual(self) -> np.ndarray:
        """Per-step channel sum in the construction's association order.

        Zero exactly: the noise channel is defined as the negation of
        (dE_H + dE_g) + dE_gamma, and IEEE a + (-a) == 0.
        """
        return ((self.dE_H + self.dE_g) + self.dE_gamma) + self.dE_sqrt_gamma


@dataclass(frozen=True)
class TrajectoryStats:
    """Post-transient time averages and chi spread statistics."""

    u1_bar: float
    u2_bar: float
    u12_bar: float
    h_bar: float
    delta_h: float
    chi_q05: float
    chi_q50: float
    chi_q95: float

    @property
    def chi_range(self) -> float:
        return self.chi_q95 - self.chi_q05


@dataclass(frozen=True)
class PoincareSection:
    """Stroboscopic section points and the drive period index of each."""

    points: np.ndarray       # (n, 4) columns x, p, chi, pi
    period_index: np.ndarray
    phase: float


# ---------------------------------------------------------------------------

def lyapunov(params: ModelParams, config: IntegratorConfig, stream: NoiseStream,
             d0: float | None = None, renorm_period: float | None = None,
             field_kind: int = FIELD_SEMICLASSICAL,
             initial: SemiclassicalState | None = None) -> LyapunovEstimate:
    """Benettin common-noise estimate of the largest Lyapunov exponent.

    A shadow trajectory starts d0 away from the fiducial along a random
    direction; every renorm_period (default one drive period, which must be
    an integer number of steps) the separation is logged and rescaled back to
    d0. lambda is the mean log stretch per unit time over the post-transient
    blocks; its standard error comes from a moving-block bootstrap. The
    transient is integrated on the fiducial alone.

    Raises TrajectoryAbortError if either trajectory escapes or hits the
    chi singularity beyond repair.
    """
    if d0 is None:
        d0 = 1.0e-7 * max(1.0, 1.0 / params.beta)
    if d0 <= 0.0:
        raise ValueError("d0 must be > 0")
    h = params.drive_period / config.steps_per_period
    if renorm_period is None:
        renorm_period = params.drive_period
    renorm_steps = round(renorm_period / h)
    if renorm_steps < 1 or abs(renorm_steps * h - renorm_period) > 1e-9 * renorm_period:
        raise ValueError("renorm_period must be an integer number of steps")

    if initial is None:
        initial = default_initial_state(params)
    noisy = field_kind == FIELD_SEMICLASSICAL
    n_total = config.total_periods * config.steps_per_period
    n_trans = config.transient_periods * config.steps_per_period
    dw = (stream.wiener_increments(h, n_total) if noisy else np.zeros(n_total))
    aux = stream.substream(TAG_AUX)

    fid = _Driver(params, config, field_kind,
                  stream.substream(TAG_REFINE_FIDUCIAL) if noisy else None)
    sha = _Driver(params, config, field_kind,
                  stream.substream(TAG_REFINE_SHADOW) if noisy else None)

    state_f = (initial.x, initial.p, initial.chi, initial.pi)
    state_f = fid.advance(state_f, 0, n_trans, dw[:n_trans], None)

    # spread-frozen fields have only the centroid pair as active directions
    if field_kind in (FIELD_CLASSICAL_FROZEN, FIELD_LINEAR_OSC):
        u2 = aux.standard_normal(2)
        u2 = u2 / np.linalg.norm(u2)
        direction = np.array([u2[0], u2[1], 0.0, 0.0])
    else:
        direction = aux.standard_normal(4)
        direction = direction / np.linalg.norm(direction)
    state_s = tuple(np.array(state_f) + d0 * direction)

    n_blocks = (n_total - n_trans) // renorm_steps
    if n_blocks < 4:
        raise ValueError("too few renormalization blocks; extend total_periods")
    stretches = np.empty(n_blocks)
    n = n_trans
    for k in range(n_blocks):
        sl = dw[n:n + renorm_steps]
        state_f = fid.advance(state_f, n, renorm_steps, sl, None)
        state_s = sha.advance(state_s, n, renorm_steps, sl, None)
        n += renorm_steps
        delta = np.array(state_s) - np.array(state_f)
        d_k = float(np.linalg.norm(delta))
        if d_k == 0.0:
            # fully contracted below float resolution; re-seed the offset
            delta = d0 * direction
            d_k = d0
        stretches[k] = math.log(d_k / d0)
        state_s = tuple(np.array(state_f) + delta * (d0 / d_k))

    renorm_time = renorm_steps * h
    rates = stretches / renorm_time
    lam = float(rates.mean())
    se = _block_bootstrap_se(rates, stream.substream(TAG_BOOTSTRAP))
    q = n_blocks // 4
    lam_last = float(rates[-q:].mean()) if q >= 1 else lam
    converged = abs(lam_last - lam) <= max(3.0 * se, 1.0e-3) if q >= 4 else False
    return LyapunovEstimate(lam=lam, standard_error=se, n_blocks=n_blocks,
                            converged=converged)


def _block_bootstrap_se(rates: np.ndarray, stream: NoiseStream,
                        block_len: int = 25, n_resample: int = 400) -> float:
    """Moving-block bootstrap standard error of the mean rate."""
    n = len(rates)
    if n < 2:
        return float("nan")
    if n < 2 * block_len:
        return float(rates.std(ddof=1) / math.sqrt(n))
    n_blocks = int(math.ceil(n / block_len))
    starts = stream.integers(0, n - block_len + 1, size=(n_resample, n_blocks))
    offsets = np.arange(block_len)
    idx = (starts[:, :, None] + offsets[None, None, :]).reshape(n_resample, -1)[:, :n]
    means = rates[idx].mean(axis=1)
    return float(means.std(ddof=1))


def poincare(trajectory: Trajectory, omega: float, phase: float = 0.0) -> PoincareSection:
    """Post-transient states at drive phase `phase`: omega * t = phase (mod 2pi).

    The recording stride must land on the requested phase; with the default
    phase 0 any stride works because h divides the drive period.
    """
    cfg = trajectory.config
    spp = cfg.steps_per_period
    phase = float(phase) % (2.0 * math.pi)
    k_star = round(phase / (2.0 * math.pi) * spp) % spp
    if k_star % cfg.record_stride != 0:
        raise ValueError(
            f"section phase {phase:g} falls between recorded samples "
            f"(stride {cfg.record_stride})")
    steps = trajectory.record_step_indices()
    n_trans = cfg.transient_periods * spp
    mask = (steps % spp == k_star) & (steps > n_trans)
    pts = trajectory.states[mask]
    period_index = (steps[mask] - k_star) // spp
    return PoincareSection(points=pts, period_index=period_index, phase=phase)


# ---------------------------------------------------------------------------
# energy ledger

def _h0_series(states: np.ndarray, params: ModelParams) -> np.ndarray:
    """Drive-free energy H0 of each state row."""
    x, p, chi, pi = states.T
    b2 = params.beta * params.beta
    u = (-0.5 * x ** 2 + 0.25 * b2 * x ** 4
         + 0.75 * b2 * chi ** 4 - 0.5 * chi ** 2 + 0.125 / chi ** 2
         + 1.5 * b2 * x ** 2 * chi ** 2)
    return 0.5 * p ** 2 + 0.5 * pi ** 2 + u


def _channel_increments(t: np.ndarray, states: np.ndarray, params: ModelParams,
                        field_kind: int) -> tuple[np.ndarray, ...]:
    """Ledger channels for consecutive recorded pairs (evaluated at the left state)."""
    if field_kind == FIELD_LINEAR_OSC:
        raise ValueError("energy ledger is defined for the Duffing fields only")
    x, p, chi, pi = states[:-1].T
    tk = t[:-1]
    h_eff = np.diff(t)
    b2 = params.beta * params.beta

    dE_H = np.diff(_h0_series(states, params))

    drive_force = -(params.g / params.beta) * np.cos(params.omega * tk)
    dE_g = -(p * drive_force) * h_eff

    if params.fp_literal and field_kind == FIELD_SEMICLASSICAL:
        fp_term = (-2.0 * params.gamma) * p
    else:
        fp_term = (-2.0 * p) * p
    if field_kind in (FIELD_SEMICLASSICAL, FIELD_CLASSICAL_PASSIVE):
        c2, s2 = math.cos(2 * params.phi), math.sin(2 * params.phi)
        f_chi = ((chi - chi ** 3 + chi * pi ** 2 - 0.25 / chi) * c2
                 - pi * (-1.0 + 2.0 * chi ** 2) * s2
                 + (chi - chi ** 3 - chi * pi ** 2 + 0.25 / chi))
        f_pi = ((pi ** 3 - pi + 0.75 * pi / chi ** 2 - pi * chi ** 2) * c2
                + (-0.25 / chi ** 3 + 1.0 / chi - chi + 2.0 * chi * pi ** 2) * s2
                + (-pi ** 3 - pi - 0.75 * pi / chi ** 2 - pi * chi ** 2))
        du_dchi = (3.0 * b2 * chi ** 3 - chi - 0.25 / chi ** 3
                   + 3.0 * b2 * x * x * chi)
        spread_term = f_chi * du_dchi + f_pi * pi
    else:
        spread_term = 0.0
    dE_gamma = -(params.gamma * (fp_term + spread_term)) * h_eff

    dE_sqrt_gamma = -(dE_H + dE_g + dE_gamma)
    return tk, dE_g, dE_gamma, dE_sqrt_gamma, dE_H


def energy_ledger(trajectory: Trajectory, params: ModelParams | None = None) -> EnergyLedger:
    """Split recorded energy changes into drive/dissipation/noise/Hamiltonian channels.

    dE_H is the change of the drive-free energy H0 between recorded states;
    dE_g and dE_gamma integrate the drive and dissipation powers at the left
    state; the noise channel is the residual, which closes the sum exactly at
    every step. The drive/dissipation attribution is exact in the stride-1,
    h -> 0 limit.
    """
    if params is None:
        params = trajectory.params
    tk, dE_g, dE_gamma, dE_sq, dE_H = _channel_increments(
        trajectory.t, trajectory.states, params, trajectory.field_kind)
    t_trans = trajectory.config.transient_periods * params.drive_period
    post = tk >= t_trans * (1.0 - 1e-12)
    return EnergyLedger(t=tk, dE_g=dE_g, dE_gamma=dE_gamma,
                        dE_sqrt_gamma=dE_sq, dE_H=dE_H, post_mask=post)


def energy_balance(params: ModelParams, config: IntegratorConfig,
                   stream: NoiseStream,
                   field_kind: int = FIELD_SEMICLASSICAL,
                   initial: SemiclassicalState | None = None) -> dict[str, float]:
    """Streaming post-transient channel means at stride 1, one period per chunk.

    Equivalent to energy_ledger on a stride-1 recording of the whole run, but
    with O(steps_per_period) memory, so long fine-step balance runs fit.
    """
    if initial is None:
        initial = default_initial_state(params)
    noisy = field_kind == FIELD_SEMICLASSICAL
    spp = config.steps_per_period
    h = params.drive_period / spp
    n_total = config.total_periods * spp
    dw = stream.wiener_increments(h, n_total) if noisy else np.zeros(n_total)
    cfg1 = IntegratorConfig(
        total_periods=config.total_periods, steps_per_period=spp,
        chi_min=config.chi_min, max_halvings=config.max_halvings,
        transient_periods=config.transient_periods, record_stride=1)
    driver = _Driver(params, cfg1, field_kind,
                     stream.substream(TAG_REFINE_FIDUCIAL) if noisy else None)
    buf = np.empty((spp + 1, 4))
    state = (initial.x, initial.p, initial.chi, initial.pi)
    sums = np.zeros(4)
    count = 0
    for period in range(config.total_periods):
        n0 = period * spp
        buf[0] = state
        state = driver.advance(state, n0, spp, dw[n0:n0 + spp], buf,
                               rec_offset=n0)
        tloc = (n0 + np.arange(spp + 1)) * h
        if period < config.transient_periods:
            continue
        _, dE_g, dE_gamma, dE_sq, dE_H = _channel_increments(
            tloc, buf, params, field_kind)
        sums += (dE_g.sum(), dE_gamma.sum(), dE_sq.sum(), dE_H.sum())
        count += spp
    means = sums / count
    return {
        "dE_g": means[0], "dE_gamma": means[1],
        "dE_sqrt_gamma": means[2], "dE_H": means[3],
        "balance_ratio": abs(means[0] + means[1]) / abs(means[0]),
        "periods": config.total_periods - config.transient_periods,
    }


def trajectory_stats(trajectory: Trajectory, params: ModelParams | None = None) -> TrajectoryStats:
    """Time averages of the potentials and energy, and chi quantiles, post-transient."""
    if params is None:
        params = trajectory.params
    t, states = trajectory.post_transient()
    if len(t) == 0:
        raise ValueError("trajectory has no post-transient samples")
    x, p, chi, pi = states.T
    b2 = params.beta * params.beta
    u1 = (-0.5 * x ** 2 + 0.25 * b2 * x ** 4
          + (params.g / params.beta) * x * np.cos(params.omega * t))
    u2 = 0.75 * b2 * chi ** 4 - 0.5 * chi ** 2 + 0.125 / chi ** 2
    u12 = 1.5 * b2 * x ** 2 * chi ** 2
    h_series = 0.5 * p ** 2 + 0.5 * pi ** 2 + u1 + u2 + u12
    q05, q50, q95 = np.quantile(chi, [0.05, 0.5, 0.95])
    return TrajectoryStats(
        u1_bar=float(u1.mean()), u2_bar=float(u2.mean()), u12_bar=float(u12.mean()),
        h_bar=float(h_series.mean()), delta_h=float(h_series.std()),
        chi_q05=float(q05), chi_q50=float(q50), chi_q95=float(q95))
