"""Fixed-step strong (Euler-Maruyama, Ito) integration with a chi > 0 guard.

The nominal step is h = drive_period / steps_per_period. When a step would
land at chi <= chi_min, it is retried as two half steps whose Wiener
sub-increments refine the original one consistently (Brownian bridge); after
max_halvings nested refinements the trajectory aborts with a singularity
event. Non-finite states or |x|, |p| beyond 1e6/beta abort as an escape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import _kernels
from .model import (FIELD_SEMICLASSICAL, ModelParams, SemiclassicalState,
                    default_initial_state)
from .stochastic import NoiseStream, TAG_REFINE_FIDUCIAL

ESCAPE_SCALE = 1.0e6


@dataclass(frozen=True)
class IntegratorConfig:
    """Step, guard and recording policy for one integration.

    record_stride must divide steps_per_period so stroboscopic sampling lands
    exactly on section times.
    """

    total_periods: int
    steps_per_period: int = 1000
    chi_min: float = 1.0e-4
    max_halvings: int = 8
    transient_periods: int = 100
    record_stride: int = 10
    record_increments: bool = True

    def __post_init__(self):
        if self.steps_per_period < 1:
            raise ValueError("steps_per_period must be >= 1")
        if not (self.chi_min > 0.0):
            raise ValueError("chi_min must be > 0")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be >= 0")
        if self.transient_periods < 0:
            raise ValueError("transient_periods must be >= 0")
        if self.total_periods <= self.transient_periods:
            raise ValueError("total_periods must exceed transient_periods")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.steps_per_period % self.record_stride != 0:
            raise ValueError("record_stride must divide steps_per_period")


@dataclass(frozen=True)
class TrajectoryEvent:
    kind: str          # "guard_halving" | "singularity_abort" | "escape_abort"
    step: int
    time: float
    detail: str = ""


@dataclass
class Trajectory:
    """Recorded states of one integration plus its provenance and events."""

    params: ModelParams
    config: IntegratorConfig
    field_kind: int
    seed: int | None
    stream_id: int | None
    t: np.ndarray                  # (n,) times of recorded states
    states: np.ndarray             # (n, 4) columns x, p, chi, pi
    events: list[TrajectoryEvent] = dataclass_field(default_factory=list)
    increments: np.ndarray | None = None   # nominal dW sequence actually consumed
    status: str = "ok"             # "ok" | "singularity" | "escape"
    fail_time: float | None = None

    @property
    def h(self) -> float:
        return self.params.drive_period / self.config.steps_per_period

    def post_transient(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, states) strictly after the transient window."""
        t_trans = self.config.transient_periods * self.params.drive_period
        keep = self.t > t_trans * (1.0 + 1e-12)
        return self.t[keep], self.states[keep]

    def record_step_indices(self) -> np.ndarray:
        return np.arange(len(self.t)) * self.config.record_stride


class TrajectoryAbortError(RuntimeError):
    """Raised by drivers that cannot proceed past a singularity or escape."""

    def __init__(self, kind: str, time: float, step: int):
        super().__init__(f"{kind} abort at t={time:.6g} (step {step})")
        self.kind = kind
        self.time = time
        self.step = step


def step(state: SemiclassicalState, params: ModelParams, dW: float, h: float,
         field_kind: int = FIELD_SEMICLASSICAL) -> SemiclassicalState:
    """One Euler-Maruyama step: X' = X + drift*h + sqrt(gamma)*(N_x, N_p, 0, 0)*dW.

    Reference (guard-free) path; `integrate` runs the same arithmetic through
    the compiled kernel.
    """
    if not (h > 0.0):
        raise ValueError("h must be > 0")
    x1, p1, chi1, pi1 = _kernels.em_step_core(
        field_kind, state.t, state.x, state.p, state.chi, state.pi, dW, h,
        params.beta, params.gamma, params.g, params.omega, params.phi,
        params.coupling_sign, params.fp_literal)
    return SemiclassicalState(t=state.t + h, x=x1, p=p1, chi=chi1, pi=pi1)


class _Driver:
    """Shared stepping engine: kernel chunks plus the python guard protocol."""

    def __init__(self, params: ModelParams, config: IntegratorConfig,
                 field_kind: int, refinement_stream: NoiseStream | None):
        self.params = params
        self.config = config
        self.field_kind = field_kind
        self.refine = refinement_stream
        self.h = params.drive_period / config.steps_per_period
        self.escape = ESCAPE_SCALE / params.beta
        self.events: list[TrajectoryEvent] = []

    def _raw_step(self, t, x, p, chi, pi, dw, h):
        pr = self.params
        return _kernels.em_step_core(self.field_kind, t, x, p, chi, pi, dw, h,
                                     pr.beta, pr.gamma, pr.g, pr.omega, pr.phi,
                                     pr.coupling_sign, pr.fp_literal)

    def _ok(self, x, p, chi, pi):
        if not all(map(math.isfinite, (x, p, chi, pi))):
            return "escape"
        if abs(x) > self.escape or abs(p) > self.escape:
            return "escape"
        if chi <= self.config.chi_min:
            return "guard"
        return "ok"

    def _resolve(self, t, x, p, chi, pi, dw, h, depth, n_step):
        """Refine one failing step by recursive halving of h and dW."""
        if depth > self.config.max_halvings:
            raise TrajectoryAbortError("singularity", t, n_step)
        if self.refine is None:
            raise TrajectoryAbortError("singularity", t, n_step)
        dw1, dw2 = self.refine.split_increment(dw, h)
        mid = self._try(t, x, p, chi, pi, dw1, h / 2.0, depth, n_step)
        return self._try(t + h / 2.0, *mid, dw2, h / 2.0, depth, n_step)

    def _try(self, t, x, p, chi, pi, dw, h, depth, n_step):
        cand = self._raw_step(t, x, p, chi, pi, dw, h)
        verdict = self._ok(*cand)
        if verdict == "ok":
            return cand
        if verdict == "escape":
            raise TrajectoryAbortError("escape", t, n_step)
        return self._resolve(t, x, p, chi, pi, dw, h, depth + 1, n_step)

    def advance(self, state4, n0: int, n_steps: int, dw: np.ndarray,
                rec: np.ndarray | None,
                rec_offset: int = 0) -> tuple[float, float, float, float]:
        """Advance n_steps from absolute step n0, resolving guard trips.

        Raises TrajectoryAbortError on singularity/escape. rec (if given) is
        a record buffer indexed as in the kernel, shifted by rec_offset rows.
        """
        cfg = self.config
        pr = self.params
        x, p, chi, pi = state4
        if rec is None:
            rec_arr = np.empty((1, 4))
            stride = 0
        else:
            rec_arr = rec
            stride = cfg.record_stride
        done = 0
        while done < n_steps:
            status, k, x, p, chi, pi = _kernels.run_steps(
                self.field_kind, x, p, chi, pi, n0 + done, n_steps - done,
                self.h, dw[done:], pr.beta, pr.gamma, pr.g, pr.omega, pr.phi,
                pr.coupling_sign, pr.fp_literal, cfg.chi_min, self.escape,
                rec_arr, stride, rec_offset)
            done += k
            if status == _kernels.STATUS_OK:
                break
            n_fail = n0 + done
            t_fail = n_fail * self.h
            if status == _kernels.STATUS_ESCAPE:
                raise TrajectoryAbortError("escape", t_fail, n_fail)
            # guard: resolve this one nominal step by bridge-refined halving
            x, p, chi, pi = self._resolve(t_fail, x, p, chi, pi, dw[done],
                                          self.h, 0, n_fail)
            self.events.append(TrajectoryEvent(
                kind="guard_halving", step=n_fail, time=t_fail,
                detail=f"chi guard at chi_min={cfg.chi_min:g}"))
            done += 1
            if stride > 0 and (n_fail + 1) % stride == 0:
                j = (n_fail + 1) // stride - rec_offset
                rec_arr[j, 0] = x
                rec_arr[j, 1] = p
                rec_arr[j, 2] = chi
                rec_arr[j, 3] = pi
        return x, p, chi, pi


def integrate(initial: SemiclassicalState | None, params: ModelParams,
              config: IntegratorConfig, stream: NoiseStream | None = None,
              increments: np.ndarray | None = None,
              field_kind: int = FIELD_SEMICLASSICAL,
              refinement_stream: NoiseStream | None = None) -> Trajectory:
    """Integrate total_periods drive periods, recording every record_stride-th step.

    Noise comes from `stream` (a fresh Wiener sequence) or from a supplied
    `increments` array (common-noise runs); exactly one may be given for the
    semiclassical field. Guard refinements draw from `refinement_stream`,
    defaulting to a substream of `stream`. Aborts are recorded in the
    trajectory (status, events, fail_time), not raised.
    """
    if initial is None:
        initial = default_initial_state(params)
    if initial.chi <= config.chi_min:
        raise ValueError("initial chi must exceed chi_min")
    if initial.t != 0.0:
        raise ValueError("integrate assumes t=0 at the start of the drive")

    noisy = field_kind == FIELD_SEMICLASSICAL
    n_total = config.total_periods * config.steps_per_period
    seed = stream_id = None
    if noisy:
        if (stream is None) == (increments is None):
            raise ValueError("provide exactly one of stream or increments")
        if stream is not None:
            seed, stream_id = stream.seed, stream.stream_id
            dw = stream.wiener_increments(
                params.drive_period / config.steps_per_period, n_total)
            if refinement_stream is None:
                refinement_stream = stream.substream(TAG_REFINE_FIDUCIAL)
        else:
            dw = np.asarray(increments, dtype=np.float64)
            if dw.shape != (n_total,):
                raise ValueError(f"increments must have shape ({n_total},)")
    else:
        dw = np.zeros(n_total)
        if stream is not None:
            seed, stream_id = stream.seed, stream.stream_id

    driver = _Driver(params, config, field_kind, refinement_stream)
    n_rows = n_total // config.record_stride + 1
    rec = np.empty((n_rows, 4))
    rec[0] = (initial.x, initial.p, initial.chi, initial.pi)

    status, fail_time = "ok", None
    try:
        driver.advance((initial.x, initial.p, initial.chi, initial.pi),
                       0, n_total, dw, rec)
        n_rows_done = n_rows
    except TrajectoryAbortError as abort:
        status = abort.kind
        fail_time = abort.time
        n_rows_done = abort.step // config.record_stride + 1
        driver.events.append(TrajectoryEvent(
            kind=f"{abort.kind}_abort", step=abort.step, time=abort.time))

    h = driver.h
    t = np.arange(n_rows_done) * (config.record_stride * h)
    return Trajectory(
        params=params, config=config, field_kind=field_kind,
        seed=seed, stream_id=stream_id,
        t=t, states=rec[:n_rows_done],
        events=driver.events,
        increments=dw if (noisy and config.record_increments) else None,
        status=status, fail_time=fail_time)
