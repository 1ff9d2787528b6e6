"""Closed-form model expressions for the monitored semiclassical Duffing oscillator.

The wavepacket is described by the 4D phase-space point X = (x, p, chi, pi):
the centroid pair (x, p) and the spread pair (chi, pi), with variances
V_x = chi^2, V_xp = chi*pi, V_p = 1/(4 chi^2) + pi^2.

Everything here is a pure, stateless function of (state, params). The scalar
cores are numba-compiled and shared with the integration kernels so the
reference path and the fast path evaluate identical floating-point
expressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# field kinds understood by the drift core (and the integration kernels)
FIELD_SEMICLASSICAL = 0
FIELD_CLASSICAL_FROZEN = 1   # classical centroid, spread held fixed
FIELD_CLASSICAL_PASSIVE = 2  # classical centroid, spread driven passively
FIELD_LINEAR_OSC = 3         # damped linear oscillator (validation system)


@dataclass(frozen=True)
class ModelParams:
    """Physical and measurement parameters.

    beta is the dimensionless effective Planck constant (beta -> 0 is the
    classical limit, never an input); gamma the dissipation strength; g and
    omega the sinusoidal drive amplitude and angular frequency; phi the
    homodyne local-oscillator phase, stored reduced to [0, 2pi).

    coupling_sign switches the spread-to-centroid coupling term
    coupling_sign * 3 beta^2 x chi^2 in dp/dt. The default -1 is the
    Hamiltonian-consistent choice; +1 reproduces the alternative convention.
    fp_literal=True replaces the momentum damping F_p = -2p with the constant
    force F_p = -2*gamma (no damping); it exists for comparison only.
    """

    beta: float
    gamma: float = 0.0
    g: float = 0.3
    omega: float = 1.0
    phi: float = 0.0
    coupling_sign: float = -1.0
    fp_literal: bool = False

    def __post_init__(self):
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be > 0 and finite, got {self.beta}")
        if not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not (self.g >= 0.0 and math.isfinite(self.g)):
            raise ValueError(f"g must be >= 0, got {self.g}")
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.coupling_sign not in (-1.0, 1.0):
            raise ValueError("coupling_sign must be -1.0 or +1.0")
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def drive_period(self) -> float:
        return TWO_PI / self.omega


@dataclass(frozen=True)
class SemiclassicalState:
    """Phase-space point (x, p, chi, pi) at time t. Requires chi > 0."""

    t: float
    x: float
    p: float
    chi: float
    pi: float

    def __post_init__(self):
        vals = (self.t, self.x, self.p, self.chi, self.pi)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite state {vals}")
        if self.chi <= 0.0:
            raise ValueError(f"chi must be > 0, got {self.chi}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.chi, self.pi])


@dataclass(frozen=True)
class ForceDecomposition:
    """Angular components of the spread dissipation: F = Fc cos2phi + Fs sin2phi + F0."""

    f0_chi: float
    f0_pi: float
    fc_chi: float
    fc_pi: float
    fs_chi: float
    fs_pi: float

    def recombine(self, phi: float) -> tuple[float, float]:
        c, s = math.cos(2.0 * phi), math.sin(2.0 * phi)
        return (self.fc_chi * c + self.fs_chi * s + self.f0_chi,
                self.fc_pi * c + self.fs_pi * s + self.f0_pi)


@dataclass(frozen=True)
class PotentialTerms:
    """Split of the 2D semiclassical potential U = U1(x,t) + U2(chi) + U12(x,chi)."""

    u1: float
    u2: float
    u12: float

    @property
    def total(self) -> float:
        return self.u1 + self.u2 + self.u12


# ---------------------------------------------------------------------------
# numba scalar cores (shared with the integration kernels)

@njit(cache=True)
def _force_core(chi, pi, cos2phi, sin2phi):
    chi2 = chi * chi
    chi3 = chi2 * chi
    pi2 = pi * pi
    f_chi = ((chi - chi3 + chi * pi2 - 0.25 / chi) * cos2phi
             - pi * (-1.0 + 2.0 * chi2) * sin2phi
             + (chi - chi3 - chi * pi2 + 0.25 / chi))
    f_pi = ((pi * pi2 - pi + 0.75 * pi / chi2 - pi * chi2) * cos2phi
            + (-0.25 / chi3 + 1.0 / chi - chi + 2.0 * chi * pi2) * sin2phi
            + (-pi * pi2 - pi - 0.75 * pi / chi2 - pi * chi2))
    return f_chi, f_pi


@njit(cache=True)
def _noise_core(chi, pi, cosphi, sinphi):
    n_x = 2.0 * (chi * chi - 0.5) * cosphi - 2.0 * chi * pi * sinphi
    n_p = (-2.0 * (0.25 / (chi * chi) + pi * pi - 0.5) * sinphi
           + 2.0 * chi * pi * cosphi)
    return n_x, n_p


@njit(cache=True)
def _potential_core(x, chi, t, beta, g, omega):
    beta2 = beta * beta
    u1 = -0.5 * x * x + 0.25 * beta2 * x ** 4 + (g / beta) * x * math.cos(omega * t)
    u2 = 0.75 * beta2 * chi ** 4 - 0.5 * chi * chi + 0.125 / (chi * chi)
    u12 = 1.5 * beta2 * x * x * chi * chi
    return u1, u2, u12


@njit(cache=True)
def _du_dchi_core(x, chi, beta):
    # chi-gradient of U2 + U12 (U1 carries no chi dependence)
    beta2 = beta * beta
    return (3.0 * beta2 * chi ** 3 - chi - 0.25 / chi ** 3
            + 3.0 * beta2 * x * x * chi)


@njit(cache=True)
def _drift_core(field_kind, t, x, p, chi, pi,
                beta, gamma, g, omega, phi, coupling_sign, fp_literal):
    """Deterministic (dt-proportional) part of the equations of motion."""
    if field_kind == FIELD_LINEAR_OSC:
        return p, -x - 2.0 * gamma * p, 0.0, 0.0
    beta2 = beta * beta
    drive = (g / beta) * math.cos(omega * t)
    if field_kind == FIELD_SEMICLASSICAL:
        if fp_literal:
            f_p = -2.0 * gamma
        else:
            f_p = -2.0 * p
        dp = (x - beta2 * x ** 3 + coupling_sign * 3.0 * beta2 * x * chi * chi
              - drive + gamma * f_p)
    else:
        # classical centroid: coupling and noise dropped, damping kept
        dp = x - beta2 * x ** 3 - drive - 2.0 * gamma * p
        if field_kind == FIELD_CLASSICAL_FROZEN:
            return p, dp, 0.0, 0.0
    f_chi, f_pi = _force_core(chi, pi, math.cos(2.0 * phi), math.sin(2.0 * phi))
    dchi = pi + gamma * f_chi
    dpi = (chi * (1.0 - 3.0 * beta2 * (x * x + chi * chi))
           + 0.25 / chi ** 3 + gamma * f_pi)
    return p, dp, dchi, dpi


# ---------------------------------------------------------------------------
# public operations

def drift(state: SemiclassicalState, params: ModelParams) -> np.ndarray:
    """Deterministic part of (dx/dt, dp/dt, dchi/dt, dpi/dt).

    The non-dissipative terms are the exact symplectic gradient of the
    Hamiltonian, so at gamma=0, g=0 the flow conserves `hamiltonian`.
    """
    out = _drift_core(FIELD_SEMICLASSICAL, state.t, state.x, state.p,
                      state.chi, state.pi, params.beta, params.gamma,
                      params.g, params.omega, params.phi,
                      params.coupling_sign, params.fp_literal)
    arr = np.array(out)
    if not np.all(np.isfinite(arr)):
        raise OverflowError(f"non-finite drift at state {state}")
    return arr


def noise_coefficients(state: SemiclassicalState, params: ModelParams) -> tuple[float, float]:
    """Measurement back-action noise amplitudes (N_x, N_p).

    The spread pair receives no direct noise (N_chi = N_pi = 0). Both
    coefficients vanish identically at the vacuum spread point
    (chi, pi) = (1/sqrt(2), 0), for every phi.
    """
    return _noise_core(state.chi, state.pi, math.cos(params.phi), math.sin(params.phi))


def dissipative_force(state: SemiclassicalState, params: ModelParams) -> tuple[float, float]:
    """Spread components (F_chi, F_pi) of the measurement-dependent dissipation.

    Depends on phi only through cos(2 phi) and sin(2 phi), hence pi-periodic
    in the measurement angle.
    """
    return _force_core(state.chi, state.pi,
                       math.cos(2.0 * params.phi), math.sin(2.0 * params.phi))


def force_decomposition(state: SemiclassicalState) -> ForceDecomposition:
    """Angle-independent parts F0, Fc, Fs of the dissipative force.

    Read off as the cos(2 phi) brackets (Fc), sin(2 phi) brackets (Fs) and
    the remaining terms (F0); `dissipative_force` recombines them as
    Fc cos2phi + Fs sin2phi + F0.
    """
    chi, pi = state.chi, state.pi
    chi2 = chi * chi
    chi3 = chi2 * chi
    pi2 = pi * pi
    fc_chi = chi - chi3 + chi * pi2 - 0.25 / chi
    fs_chi = -pi * (-1.0 + 2.0 * chi2)
    f0_chi = chi - chi3 - chi * pi2 + 0.25 / chi
    fc_pi = pi * pi2 - pi + 0.75 * pi / chi2 - pi * chi2
    fs_pi = -0.25 / chi3 + 1.0 / chi - chi + 2.0 * chi * pi2
    f0_pi = -pi * pi2 - pi - 0.75 * pi / chi2 - pi * chi2
    return ForceDecomposition(f0_chi=f0_chi, f0_pi=f0_pi,
                              fc_chi=fc_chi, fc_pi=fc_pi,
                              fs_chi=fs_chi, fs_pi=fs_pi)


def potential_terms(state: SemiclassicalState, params: ModelParams) -> PotentialTerms:
    """Evaluate U1 (double well + drive), U2 (spread oscillator), U12 (coupling).

    U12 = (3/2) beta^2 x^2 chi^2 >= 0 always.
    """
    u1, u2, u12 = _potential_core(state.x, state.chi, state.t,
                                  params.beta, params.g, params.omega)
    return PotentialTerms(u1=u1, u2=u2, u12=u12)


def hamiltonian(state: SemiclassicalState, params: ModelParams) -> float:
    """H = p^2/2 + pi^2/2 + U1 + U2 + U12 at the state's time."""
    u1, u2, u12 = _potential_core(state.x, state.chi, state.t,
                                  params.beta, params.g, params.omega)
    return 0.5 * state.p ** 2 + 0.5 * state.pi ** 2 + u1 + u2 + u12


def variances_from_spread(chi: float, pi: float) -> tuple[float, float, float]:
    """Map the spread pair to (V_x, V_xp, V_p).

    The parametrization guarantees V_x V_p - V_xp^2 = 1/4 identically.
    """
    if chi <= 0.0:
        raise ValueError(f"chi must be > 0, got {chi}")
    return chi * chi, chi * pi, 0.25 / (chi * chi) + pi * pi


def spread_potential_gradient(state: SemiclassicalState, params: ModelParams) -> float:
    """dU/dchi at the state (the drive term carries no chi dependence)."""
    return _du_dchi_core(state.x, state.chi, params.beta)


def classical_well_minimum(params: ModelParams) -> float:
    """Position of the g=0 double-well minima, x = 1/beta (value -1/(4 beta^2))."""
    return 1.0 / params.beta


def default_initial_state(params: ModelParams) -> SemiclassicalState:
    """Classical well minimum for the centroid, vacuum spread for (chi, pi)."""
    return SemiclassicalState(t=0.0, x=classical_well_minimum(params), p=0.0,
                              chi=1.0 / math.sqrt(2.0), pi=0.0)
