"""Figure specifications: what to render, from which files, to where.

A spec is a JSON document:

    {
      "kind": "potential-surface",
      "inputs": {"potential_grid": "pot.csv"},
      "output": "potential.png",
      "title": "...",            # optional
      "xlim": [-6, 6],           # optional
      "ylim": [0, 3],            # optional
      "options": {...}           # kind-specific, optional
    }

Inputs are CSV files written by the simulator CLI; this package never links
against the simulator itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

KINDS = ("potential-surface", "force-quiver", "poincare-overlay",
         "sweep-summary")

REQUIRED_INPUTS = {
    "potential-surface": ("potential_grid",),
    "force-quiver": ("force_grid",),
    "poincare-overlay": ("section",),
    "sweep-summary": ("summary",),
}

OPTIONAL_INPUTS = {
    "poincare-overlay": ("trajectory",),
}

REQUIRED_COLUMNS = {
    "potential_grid": ("x", "chi", "u1", "u2", "u12"),
    "force_grid": ("chi", "pi", "f0_chi", "f0_pi", "fc_chi", "fc_pi",
                   "fs_chi", "fs_pi"),
    "section": ("x", "p", "chi", "pi", "period_index"),
    "trajectory": ("t", "x", "p", "chi", "pi"),
    "summary": ("gamma", "beta", "phi", "status", "lam", "chi_range"),
}


class FigureSpecError(ValueError):
    """Bad figure spec or unparseable input file."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: dict[str, Path]
    output: Path
    title: str | None = None
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureSpecError(
                f"unrecognized figure kind {self.kind!r}; expected one of {KINDS}")
        allowed = set(REQUIRED_INPUTS[self.kind]) | set(
            OPTIONAL_INPUTS.get(self.kind, ()))
        for name in REQUIRED_INPUTS[self.kind]:
            if name not in self.inputs:
                raise FigureSpecError(
                    f"{self.kind} needs input {name!r}")
        for name, path in self.inputs.items():
            if name not in allowed:
                raise FigureSpecError(
                    f"{self.kind} does not take input {name!r}")
            if not Path(path).exists():
                raise FigureSpecError(f"input file not found: {path}")


def load_spec(path) -> FigureSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FigureSpecError(f"spec file not found: {path}")
    except json.JSONDecodeError as exc:
        raise FigureSpecError(f"spec is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise FigureSpecError("spec must be a JSON object")
    try:
        kind = doc["kind"]
        inputs = {k: Path(v) for k, v in doc.get("inputs", {}).items()}
        output = Path(doc["output"])
    except KeyError as exc:
        raise FigureSpecError(f"spec is missing {exc.args[0]!r}")
    lims = {}
    for key in ("xlim", "ylim"):
        if key in doc:
            pair = doc[key]
            if (not isinstance(pair, (list, tuple)) or len(pair) != 2):
                raise FigureSpecError(f"{key} must be a [lo, hi] pair")
            lims[key] = (float(pair[0]), float(pair[1]))
    return FigureSpec(kind=kind, inputs=inputs, output=output,
                      title=doc.get("title"),
                      options=doc.get("options", {}), **lims)


def read_table(path, role: str) -> dict[str, np.ndarray]:
    """Read a CSV into named columns, verifying the role's schema.

    Numeric columns become float arrays; non-numeric ones (e.g. status)
    stay as strings. A header-only file yields empty columns.
    """
    import csv

    required = REQUIRED_COLUMNS[role]
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FigureSpecError(f"{path} is empty (no header row)")
            rows = list(reader)
    except OSError as exc:
        raise FigureSpecError(f"cannot read {path}: {exc}")
    for col in required:
        if col not in header:
            raise FigureSpecError(
                f"{path} is missing column {col!r} (has {header})")
    out = {}
    for j, col in enumerate(header):
        values = [row[j] if j < len(row) else "" for row in rows]
        try:
            out[col] = np.array([float(v) if v != "" else np.nan
                                 for v in values])
        except ValueError:
            out[col] = np.array(values, dtype=object)
    return out
