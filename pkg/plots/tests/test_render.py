"""Renderer behavior: schemas, errors, determinism, CLI."""

import json

import numpy as np
import pytest

from monduff_plots import (FigureSpec, FigureSpecError, load_spec, read_table,
                           render)
from monduff_plots.cli import main


def spec_for(kind, inputs, output, **kw):
    return FigureSpec(kind=kind, inputs=inputs, output=output, **kw)


def test_unknown_kind_rejected(tmp_path, artifacts):
    with pytest.raises(FigureSpecError, match="unrecognized"):
        spec_for("volcano-plot", {"summary": artifacts["summary"]},
                 tmp_path / "x.png")


def test_missing_input_file_rejected(tmp_path):
    with pytest.raises(FigureSpecError, match="not found"):
        spec_for("sweep-summary", {"summary": tmp_path / "nope.csv"},
                 tmp_path / "x.png")


def test_missing_required_input_name(tmp_path, artifacts):
    with pytest.raises(FigureSpecError, match="needs input"):
        spec_for("poincare-overlay", {}, tmp_path / "x.png")


def test_parse_error_names_the_missing_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,chi,u1,u2\n0.0,1.0,0.0,0.0\n")
    with pytest.raises(FigureSpecError, match="u12"):
        read_table(bad, "potential_grid")


def test_each_kind_renders(tmp_path, artifacts):
    outputs = [
        spec_for("potential-surface",
                 {"potential_grid": artifacts["potential_0.3"]},
                 tmp_path / "pot.png", options={"clip": 2.0}),
        spec_for("force-quiver", {"force_grid": artifacts["force"]},
                 tmp_path / "force.png"),
        spec_for("poincare-overlay",
                 {"section": artifacts["classical_chaotic_section"],
                  "trajectory": artifacts["classical_chaotic_traj"]},
                 tmp_path / "sec.png", options={"projection": "xp"}),
        spec_for("sweep-summary", {"summary": artifacts["summary"]},
                 tmp_path / "sweep.png"),
    ]
    for spec in outputs:
        path = render(spec)
        assert path.exists() and path.stat().st_size > 0


def test_render_is_deterministic(tmp_path, artifacts):
    def once(name):
        out = tmp_path / name
        render(spec_for("poincare-overlay",
                        {"section": artifacts["semi_g10_phi0_section"]},
                        out, options={"projection": "xchi"}))
        return out.read_bytes()

    assert once("a.png") == once("b.png")


def test_empty_section_renders_with_warning(tmp_path):
    empty = tmp_path / "empty_section.csv"
    empty.write_text("x,p,chi,pi,period_index\n")
    out = tmp_path / "empty.png"
    with pytest.warns(UserWarning, match="no points"):
        render(spec_for("poincare-overlay", {"section": empty}, out))
    assert out.exists() and out.stat().st_size > 0


def test_axis_ranges_applied(tmp_path, artifacts):
    out = tmp_path / "lim.png"
    render(spec_for("poincare-overlay",
                    {"section": artifacts["classical_regular_section"]},
                    out, xlim=(-40.0, 40.0), ylim=(-30.0, 30.0)))
    assert out.exists()


def test_bad_quiver_component_rejected(tmp_path, artifacts):
    with pytest.raises(FigureSpecError, match="component"):
        render(spec_for("force-quiver", {"force_grid": artifacts["force"]},
                        tmp_path / "x.png", options={"components": ["f9"]}))


def test_spec_json_round_trip(tmp_path, artifacts):
    doc = {
        "kind": "sweep-summary",
        "inputs": {"summary": str(artifacts["summary"])},
        "output": str(tmp_path / "from_json.png"),
        "title": "one sweep",
        "xlim": [0, 4],
    }
    spec_file = tmp_path / "fig.json"
    spec_file.write_text(json.dumps(doc))
    spec = load_spec(spec_file)
    assert spec.kind == "sweep-summary"
    assert spec.xlim == (0.0, 4.0)
    render(spec)
    assert (tmp_path / "from_json.png").exists()


def test_cli_render_and_exit_codes(tmp_path, artifacts, capsys):
    doc = {
        "kind": "potential-surface",
        "inputs": {"potential_grid": str(artifacts["potential_0.05"])},
        "output": str(tmp_path / "cli.png"),
    }
    spec_file = tmp_path / "fig.json"
    spec_file.write_text(json.dumps(doc))
    assert main(["render", "--spec", str(spec_file)]) == 0
    assert (tmp_path / "cli.png").exists()

    assert main(["render", "--spec", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "nope", "inputs": {}, "output": "x.png"}))
    assert main(["render", "--spec", str(bad)]) == 1
    assert main(["bogus-command"]) == 1
