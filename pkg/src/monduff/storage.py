"""On-disk formats: CSV files, the compact binary trajectory form, manifests.

All CSV output is UTF-8 with a header row; floats are written with repr
(shortest round-trip), so byte-identical inputs yield byte-identical files.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .diagnostics import EnergyLedger, PoincareSection, TrajectoryStats
from .integrator import IntegratorConfig, Trajectory, TrajectoryEvent
from .model import ModelParams

TRAJECTORY_COLUMNS = ("t", "x", "p", "chi", "pi")
SECTION_COLUMNS = ("x", "p", "chi", "pi", "period_index")
LEDGER_COLUMNS = ("t", "dE_g", "dE_gamma", "dE_sqrt_gamma", "dE_H")

BINARY_MAGIC = b"MDUFTRJ1"
BINARY_VERSION = 1


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_trajectory_csv(path, trajectory: Trajectory) -> None:
    rows = np.column_stack([trajectory.t, trajectory.states])
    _write_csv(path, TRAJECTORY_COLUMNS, rows)


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (t, states); metadata lives in the binary form, not the CSV."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = np.atleast_1d(data["t"])
    states = np.column_stack([np.atleast_1d(data[c]) for c in ("x", "p", "chi", "pi")])
    return t, states


def write_section_csv(path, section: PoincareSection) -> None:
    rows = np.column_stack([section.points, section.period_index])
    _write_csv(path, SECTION_COLUMNS, rows)


def write_ledger_csv(path, ledger: EnergyLedger) -> None:
    rows = np.column_stack([ledger.t, ledger.dE_g, ledger.dE_gamma,
                            ledger.dE_sqrt_gamma, ledger.dE_H])
    _write_csv(path, LEDGER_COLUMNS, rows)


def write_stats_csv(path, stats: TrajectoryStats) -> None:
    d = asdict(stats)
    d["chi_range"] = stats.chi_range
    _write_csv(path, list(d.keys()), [list(d.values())])


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# binary trajectory form: magic, version, JSON header, float64 LE records

def write_trajectory_binary(path, trajectory: Trajectory) -> None:
    header = {
        "params": asdict(trajectory.params),
        "config": asdict(trajectory.config),
        "field_kind": trajectory.field_kind,
        "seed": trajectory.seed,
        "stream_id": trajectory.stream_id,
        "status": trajectory.status,
        "fail_time": trajectory.fail_time,
        "events": [asdict(e) for e in trajectory.events],
        "n_records": int(len(trajectory.t)),
        "columns": list(TRAJECTORY_COLUMNS),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    records = np.column_stack([trajectory.t, trajectory.states]).astype("<f8")
    with Path(path).open("wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<II", BINARY_VERSION, len(blob)))
        fh.write(blob)
        fh.write(records.tobytes())


def read_trajectory_binary(path) -> Trajectory:
    with Path(path).open("rb") as fh:
        magic = fh.read(8)
        if magic != BINARY_MAGIC:
            raise ValueError(f"not a trajectory file (magic {magic!r})")
        version, blob_len = struct.unpack("<II", fh.read(8))
        if version != BINARY_VERSION:
            raise ValueError(f"unsupported trajectory format version {version}")
        header = json.loads(fh.read(blob_len).decode("utf-8"))
        n = header["n_records"]
        data = np.frombuffer(fh.read(n * 5 * 8), dtype="<f8").reshape(n, 5)
    events = [TrajectoryEvent(**e) for e in header["events"]]
    return Trajectory(
        params=ModelParams(**header["params"]),
        config=IntegratorConfig(**header["config"]),
        field_kind=header["field_kind"],
        seed=header["seed"], stream_id=header["stream_id"],
        t=data[:, 0].copy(), states=data[:, 1:].copy(),
        events=events, increments=None,
        status=header["status"], fail_time=header["fail_time"])


# ---------------------------------------------------------------------------
# model-surface exports consumed by the plotting package

def write_potential_grid_csv(path, params: ModelParams, x: np.ndarray,
                             chi: np.ndarray, t: float = 0.0) -> None:
    """Potential terms on the cartesian product of x and chi at fixed time."""
    b2 = params.beta * params.beta
    rows = []
    for xv in x:
        u1 = (-0.5 * xv ** 2 + 0.25 * b2 * xv ** 4
              + (params.g / params.beta) * xv * np.cos(params.omega * t))
        for cv in chi:
            u2 = 0.75 * b2 * cv ** 4 - 0.5 * cv ** 2 + 0.125 / cv ** 2
            u12 = 1.5 * b2 * xv ** 2 * cv ** 2
            rows.append((xv, cv, u1, u2, u12))
    _write_csv(path, ("x", "chi", "u1", "u2", "u12"), rows)


def write_force_grid_csv(path, chi: np.ndarray, pi: np.ndarray) -> None:
    """Angular force components on the cartesian product of chi and pi."""
    from .model import SemiclassicalState, force_decomposition
    rows = []
    for cv in chi:
        for pv in pi:
            d = force_decomposition(SemiclassicalState(t=0.0, x=0.0, p=0.0,
                                                       chi=float(cv), pi=float(pv)))
            rows.append((cv, pv, d.f0_chi, d.f0_pi, d.fc_chi, d.fc_pi,
                         d.fs_chi, d.fs_pi))
    _write_csv(path, ("chi", "pi", "f0_chi", "f0_pi", "fc_chi", "fc_pi",
                      "fs_chi", "fs_pi"), rows)
