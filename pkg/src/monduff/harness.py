"""Sweep engine over (Gamma, beta, phi) grids with seed ensembles.

Each (cell, seed) task owns the noise stream keyed by
stream_id = cell_index * 2**20 + seed_index, so sweep results are independent
of scheduling and worker count. Per-task section (and optionally trajectory)
files are written as tasks complete; the summary CSV and manifest are written
last in deterministic cell order. Wall-clock timings go to a separate
timings.csv that is excluded from the byte-identity guarantee.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (LyapunovEstimate, PoincareSection, TrajectoryStats,
                          lyapunov, poincare, trajectory_stats)
from .integrator import (IntegratorConfig, Trajectory, TrajectoryAbortError,
                         integrate)
from .model import (FIELD_CLASSICAL_FROZEN, FIELD_CLASSICAL_PASSIVE,
                    FIELD_SEMICLASSICAL, ModelParams)
from .stochastic import NoiseStream
from . import storage

STREAM_CELL_SHIFT = 20  # stream_id = cell_index << 20 | seed_index

# calibrated drive defaults: the g scan (see calibrate_drive) must reproduce
# the classical regimes Gamma=0.10 chaotic / Gamma=0.05 regular
DEFAULT_G = 0.3
DEFAULT_OMEGA = 1.0


@dataclass(frozen=True)
class SweepSpec:
    """Grid, ensemble and execution policy for one sweep."""

    gammas: tuple[float, ...]
    betas: tuple[float, ...]
    phis: tuple[float, ...]
    seeds: int
    config: IntegratorConfig
    base_seed: int = 2026
    g: float = DEFAULT_G
    omega: float = DEFAULT_OMEGA
    classical_mode: bool = False
    spread_mode: str = "frozen"          # classical mode: "frozen" | "passive"
    coupling_sign: float = -1.0
    d0: float | None = None              # None: 1e-7 * max(1, 1/beta)
    workers: int = 1
    out_dir: str | None = None
    save_trajectories: bool = False

    def __post_init__(self):
        if not self.gammas or not self.betas or not self.phis:
            raise ValueError("sweep grids must be non-empty")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if self.spread_mode not in ("frozen", "passive"):
            raise ValueError("spread_mode must be 'frozen' or 'passive'")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def cells(self) -> list[tuple[float, float, float]]:
        return list(itertools.product(self.gammas, self.betas, self.phis))

    def field_kind(self) -> int:
        if not self.classical_mode:
            return FIELD_SEMICLASSICAL
        return (FIELD_CLASSICAL_FROZEN if self.spread_mode == "frozen"
                else FIELD_CLASSICAL_PASSIVE)

    def params_for(self, cell: tuple[float, float, float]) -> ModelParams:
        gamma, beta, phi = cell
        return ModelParams(beta=beta, gamma=gamma, g=self.g, omega=self.omega,
                           phi=phi, coupling_sign=self.coupling_sign)


@dataclass
class SweepRecord:
    """Summary of one completed or aborted (cell, seed) task."""

    cell_index: int
    seed_index: int
    gamma: float
    beta: float
    phi: float
    stream_id: int
    status: str                       # "ok" | "singularity" | "escape"
    lyapunov: LyapunovEstimate | None
    stats: TrajectoryStats | None
    section: np.ndarray | None        # (n, 4) stroboscopic points
    section_periods: np.ndarray | None
    n_guard_events: int = 0
    fail_time: float | None = None
    wall_time: float = 0.0
    trajectory: Trajectory | None = None   # only when save_trajectories


def stream_id_for(cell_index: int, seed_index: int) -> int:
    if not (0 <= seed_index < 2 ** STREAM_CELL_SHIFT):
        raise ValueError("seed_index out of range")
    return (cell_index << STREAM_CELL_SHIFT) | seed_index


def run_task(spec: SweepSpec, cell_index: int, seed_index: int) -> SweepRecord:
    """Integrate, analyze and summarize one (cell, seed) combination."""
    t_start = time.perf_counter()
    cell = spec.cells()[cell_index]
    gamma, beta, phi = cell
    params = spec.params_for(cell)
    field = spec.field_kind()
    sid = stream_id_for(cell_index, seed_index)

    record = SweepRecord(cell_index=cell_index, seed_index=seed_index,
                         gamma=gamma, beta=beta, phi=phi, stream_id=sid,
                         status="ok", lyapunov=None, stats=None,
                         section=None, section_periods=None)
    traj = integrate(None, params, spec.config,
                     stream=NoiseStream(spec.base_seed, sid), field_kind=field)
    record.n_guard_events = sum(1 for e in traj.events if e.kind == "guard_halving")
    if traj.status != "ok":
        record.status = traj.status
        record.fail_time = traj.fail_time
        record.wall_time = time.perf_counter() - t_start
        return record

    record.stats = trajectory_stats(traj)
    section = poincare(traj, params.omega, 0.0)
    record.section = section.points
    record.section_periods = section.period_index
    if spec.save_trajectories:
        record.trajectory = traj
    try:
        record.lyapunov = lyapunov(params, spec.config,
                                   NoiseStream(spec.base_seed, sid),
                                   d0=spec.d0, field_kind=field)
    except TrajectoryAbortError as abort:
        record.status = abort.kind
        record.fail_time = abort.time
    record.wall_time = time.perf_counter() - t_start
    return record


def _task_entry(args):
    spec, ci, si = args
    return run_task(spec, ci, si)


def task_name(record: SweepRecord) -> str:
    return (f"cell{record.cell_index:03d}_g{record.gamma:g}_b{record.beta:g}"
            f"_phi{record.phi:.6g}_s{record.seed_index:02d}")


def run_sweep(spec: SweepSpec, out_dir: str | Path | None = None) -> list[SweepRecord]:
    """Execute all (cell, seed) tasks; aborted tasks are recorded, not fatal.

    With out_dir set, writes per-task section files (plus trajectories when
    requested), summary.csv, manifest.json, and timings.csv.
    """
    tasks = [(spec, ci, si)
             for ci in range(len(spec.cells()))
             for si in range(spec.seeds)]
    if out_dir is None:
        out_dir = spec.out_dir
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    records: list[SweepRecord] = []
    if spec.workers == 1:
        for task in tasks:
            rec = _task_entry(task)
            records.append(rec)
            if out is not None:
                _write_task_files(out, spec, rec)
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = {pool.submit(_task_entry, task): task for task in tasks}
            for fut in as_completed(futures):
                rec = fut.result()
                records.append(rec)
                if out is not None:
                    _write_task_files(out, spec, rec)
    records.sort(key=lambda r: (r.cell_index, r.seed_index))

    if out is not None:
        _write_summary(out / "summary.csv", records)
        _write_timings(out / "timings.csv", records)
        storage.write_manifest(out / "manifest.json", sweep_manifest(spec, records))
    return records


def _write_task_files(out: Path, spec: SweepSpec, rec: SweepRecord) -> None:
    name = task_name(rec)
    if rec.section is not None:
        storage.write_section_csv(
            out / f"{name}_section.csv",
            PoincareSection(points=rec.section, period_index=rec.section_periods,
                            phase=0.0))
    if rec.trajectory is not None:
        storage.write_trajectory_csv(out / f"{name}_traj.csv", rec.trajectory)


SUMMARY_COLUMNS = (
    "cell_index", "seed_index", "gamma", "beta", "phi", "stream_id", "status",
    "lam", "lam_se", "n_blocks", "converged", "classification",
    "u1_bar", "u2_bar", "u12_bar", "h_bar", "delta_h",
    "chi_q05", "chi_q50", "chi_q95", "chi_range", "n_guard_events")


def _summary_row(r: SweepRecord) -> list:
    ly, st = r.lyapunov, r.stats
    return [
        r.cell_index, r.seed_index, r.gamma, r.beta, r.phi, r.stream_id,
        r.status,
        ly.lam if ly else "", ly.standard_error if ly else "",
        ly.n_blocks if ly else "", ly.converged if ly else "",
        ly.classification if ly else "aborted",
        st.u1_bar if st else "", st.u2_bar if st else "",
        st.u12_bar if st else "", st.h_bar if st else "",
        st.delta_h if st else "",
        st.chi_q05 if st else "", st.chi_q50 if st else "",
        st.chi_q95 if st else "", st.chi_range if st else "",
        r.n_guard_events,
    ]


def _write_summary(path: Path, records: list[SweepRecord]) -> None:
    storage._write_csv(path, SUMMARY_COLUMNS, [_summary_row(r) for r in records])


def _write_timings(path: Path, records: list[SweepRecord]) -> None:
    rows = [[r.cell_index, r.seed_index, f"{r.wall_time:.3f}"] for r in records]
    storage._write_csv(path, ("cell_index", "seed_index", "wall_time_s"), rows)


def sweep_manifest(spec: SweepSpec, records: list[SweepRecord]) -> dict:
    return {
        "tool": "monduff",
        "version": __version__,
        "numpy_version": np.__version__,
        "drive": {"g": spec.g, "omega": spec.omega},
        "grid": {"gammas": list(spec.gammas), "betas": list(spec.betas),
                 "phis": list(spec.phis), "seeds": spec.seeds},
        "base_seed": spec.base_seed,
        "stream_policy": f"stream_id = cell_index*2^{STREAM_CELL_SHIFT} + seed_index",
        "classical_mode": spec.classical_mode,
        "spread_mode": spec.spread_mode,
        "coupling_sign": spec.coupling_sign,
        "config": asdict(spec.config),
        "files": sorted(f"{task_name(r)}_section.csv"
                        for r in records if r.section is not None),
        "aborted": sorted(task_name(r) for r in records if r.status != "ok"),
    }


# ---------------------------------------------------------------------------

def classical_reference(gamma: float, g: float, omega: float,
                        config: IntegratorConfig, seed: int,
                        beta: float = 0.05, phi: float = 0.0,
                        spread_mode: str = "frozen") -> SweepRecord:
    """Classical damped driven Duffing baseline (coupling and noise dropped).

    The centroid dynamics are invariant under beta up to the x ~ 1/beta
    rescaling, so beta only sets the scale.
    """
    spec = SweepSpec(gammas=(gamma,), betas=(beta,), phis=(phi,), seeds=1,
                     config=config, base_seed=seed, g=g, omega=omega,
                     classical_mode=True, spread_mode=spread_mode,
                     save_trajectories=True)
    return run_task(spec, 0, 0)


def calibrate_drive(config: IntegratorConfig,
                    g_values=None,
                    gammas: tuple[float, float] = (0.05, 0.10),
                    omega: float = DEFAULT_OMEGA,
                    seed: int = 2026,
                    prefer: float = DEFAULT_G) -> dict:
    """Scan g for classical baselines with Gamma=0.10 chaotic, Gamma=0.05 regular.

    Returns the admissible g values, per-g lambda table, and the chosen g
    (admissible value closest to `prefer`).
    """
    if g_values is None:
        g_values = [round(0.20 + 0.02 * k, 2) for k in range(11)]
    gamma_reg, gamma_chaos = sorted(gammas)
    table = []
    admissible = []
    for g in g_values:
        row = {"g": g}
        for gamma in (gamma_reg, gamma_chaos):
            rec = classical_reference(gamma, g, omega, config, seed)
            if rec.lyapunov is None:
                row[f"lambda_{gamma:g}"] = None
                row[f"se_{gamma:g}"] = None
            else:
                row[f"lambda_{gamma:g}"] = rec.lyapunov.lam
                row[f"se_{gamma:g}"] = rec.lyapunov.standard_error
        lam_r, se_r = row[f"lambda_{gamma_reg:g}"], row[f"se_{gamma_reg:g}"]
        lam_c, se_c = row[f"lambda_{gamma_chaos:g}"], row[f"se_{gamma_chaos:g}"]
        ok = (lam_r is not None and lam_c is not None
              and lam_r < -3.0 * se_r and lam_c > 3.0 * se_c)
        row["admissible"] = ok
        if ok:
            admissible.append(g)
        table.append(row)
    chosen = min(admissible, key=lambda g: (abs(g - prefer), g)) if admissible else None
    return {"omega": omega, "gammas": [gamma_reg, gamma_chaos],
            "chosen_g": chosen, "admissible": admissible, "table": table}
