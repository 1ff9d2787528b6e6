"""Generate simulator outputs once per session through the monduff CLI.

The plots package consumes files only; these fixtures call the simulator as
a subprocess so no simulator code is imported into this test process.
"""

import subprocess
import sys

import pytest

PI_HALF = "1.5707963267948966"


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "monduff.cli", *map(str, args)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Dict of input files for every renderer, produced by the simulator CLI."""
    root = tmp_path_factory.mktemp("sim_outputs")
    out = {}

    # potential surfaces (drive off), small and large beta
    for beta in ("0.05", "0.3"):
        path = root / f"potential_b{beta}.csv"
        run_cli("simulate", "--beta", beta, "--g", "0",
                "--emit-potential-grid", path, "--grid-n", "81")
        out[f"potential_{beta}"] = path

    # dissipative force components on the spread plane
    force = root / "force_grid.csv"
    run_cli("simulate", "--beta", "0.05", "--emit-force-grid", force,
            "--grid-n", "41")
    out["force"] = force

    # classical baselines: chaotic and regular, sections plus trajectories
    for gamma, tag in (("0.1", "chaotic"), ("0.05", "regular")):
        d = root / f"classical_{tag}"
        run_cli("poincare", "--beta", "0.05", "--gamma", gamma, "--classical",
                "--total-periods", "260", "--transient-periods", "60",
                "--out-dir", d, "--seed", "11")
        run_cli("simulate", "--beta", "0.05", "--gamma", gamma, "--classical",
                "--total-periods", "260", "--transient-periods", "60",
                "--out-dir", d, "--seed", "11")
        out[f"classical_{tag}_section"] = d / "section.csv"
        out[f"classical_{tag}_traj"] = d / "trajectory.csv"

    # semiclassical sections: the Gamma=0.1 pair and a Gamma=0.05 cell
    for gamma, beta, phi, spp, tag in (
            ("0.1", "0.05", "0", "1000", "g10_phi0"),
            ("0.1", "0.05", PI_HALF, "1000", "g10_phihalf"),
            ("0.05", "0.15", PI_HALF, "4000", "g05_phihalf")):
        d = root / f"semi_{tag}"
        run_cli("poincare", "--beta", beta, "--gamma", gamma, "--phi", phi,
                "--steps-per-period", spp, "--total-periods", "220",
                "--transient-periods", "60", "--out-dir", d, "--seed", "11")
        run_cli("simulate", "--beta", beta, "--gamma", gamma, "--phi", phi,
                "--steps-per-period", spp, "--total-periods", "220",
                "--transient-periods", "60", "--out-dir", d, "--seed", "11")
        out[f"semi_{tag}_section"] = d / "section.csv"
        out[f"semi_{tag}_traj"] = d / "trajectory.csv"

    # a small sweep summary
    sweep_dir = root / "sweep"
    run_cli("sweep", "--gammas", "0.1", "--betas", "0.05",
            "--phis", f"0,{PI_HALF}", "--seeds", "2",
            "--total-periods", "150", "--transient-periods", "50",
            "--out-dir", sweep_dir, "--seed", "7")
    out["summary"] = sweep_dir / "summary.csv"
    return out
