"""Acceptance: figure analogues render end to end; data-level checks back
the claims the figures are supposed to show."""

import numpy as np
import pytest

from monduff_plots import FigureSpec, read_table, render


def test_criterion_10_figure_analogues_render(tmp_path, artifacts):
    figures = [
        ("fig1a", "potential-surface",
         {"potential_grid": artifacts["potential_0.05"]}, {"clip": 5.0}),
        ("fig1b", "potential-surface",
         {"potential_grid": artifacts["potential_0.3"]}, {"clip": 2.0}),
        ("fig2", "force-quiver", {"force_grid": artifacts["force"]},
         {"components": ["f0", "fc", "fs"]}),
        ("fig2b", "force-quiver", {"force_grid": artifacts["force"]},
         {"components": ["f0+fc", "f0-fc"]}),
        ("fig3a", "poincare-overlay",
         {"section": artifacts["classical_chaotic_section"],
          "trajectory": artifacts["classical_chaotic_traj"]},
         {"projection": "xp"}),
        ("fig3b", "poincare-overlay",
         {"section": artifacts["classical_regular_section"],
          "trajectory": artifacts["classical_regular_traj"]},
         {"projection": "xp"}),
        ("fig4_xp", "poincare-overlay",
         {"section": artifacts["semi_g10_phi0_section"],
          "trajectory": artifacts["semi_g10_phi0_traj"]},
         {"projection": "xp"}),
        ("fig4_xchi", "poincare-overlay",
         {"section": artifacts["semi_g10_phihalf_section"],
          "trajectory": artifacts["semi_g10_phihalf_traj"]},
         {"projection": "xchi"}),
        ("fig5_xchi", "poincare-overlay",
         {"section": artifacts["semi_g05_phihalf_section"],
          "trajectory": artifacts["semi_g05_phihalf_traj"]},
         {"projection": "xchi"}),
        ("sweep", "sweep-summary", {"summary": artifacts["summary"]}, {}),
    ]
    written = []
    for name, kind, inputs, options in figures:
        out = render(FigureSpec(kind=kind, inputs=inputs,
                                output=tmp_path / f"{name}.png",
                                options=options))
        assert out.exists() and out.stat().st_size > 0
        written.append(name)
    print(f"ACCEPTANCE 10: PASS - rendered {len(written)} figure analogues: "
          + ", ".join(written))


def test_criterion_10_large_beta_saddle_between_wells(artifacts):
    # at beta=0.3 the inter-well path through larger chi dips below the
    # barrier the system faces at small chi
    tab = read_table(artifacts["potential_0.3"], "potential_grid")
    u = tab["u1"] + tab["u2"] + tab["u12"]
    x, chi = tab["x"], tab["chi"]
    on_ridge = np.abs(x) == np.min(np.abs(x))          # column nearest x = 0
    ridge_chi = chi[on_ridge]
    ridge_u = u[on_ridge]
    small_chi = ridge_u[np.argmin(np.abs(ridge_chi - 1.0 / np.sqrt(2.0)))]
    saddle = ridge_u[ridge_chi >= 1.0].min()
    wells = u.min()
    assert saddle < small_chi, (saddle, small_chi)
    assert wells < saddle
    print(f"ACCEPTANCE 10 (saddle): PASS - ridge saddle {saddle:+.3f} below "
          f"small-chi barrier {small_chi:+.3f}; wells at {wells:+.3f}")


def test_compressive_angle_from_force_grid(artifacts):
    # along the pi = 0 axis the phi=0 combination F0+Fc pushes chi inward
    # at chi > 1 while the phi=pi/2 combination F0-Fc does not
    tab = read_table(artifacts["force"], "force_grid")
    axis = np.abs(tab["pi"]) == np.min(np.abs(tab["pi"]))
    outer = axis & (tab["chi"] > 1.0)
    inward = (tab["f0_chi"] + tab["fc_chi"])[outer].mean()
    outward = (tab["f0_chi"] - tab["fc_chi"])[outer].mean()
    assert inward < 0.0 < outward
