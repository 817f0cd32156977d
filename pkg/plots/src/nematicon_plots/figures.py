"""Deterministic figure rendering from solver artifacts.

Three figure kinds cover the published plots:

  profiles_with_iterates -- two panels (beam profile u, director angle
      rho) with the intermediate fixed-point iterates dashed and the
      final profiles solid, read from a run directory;
  profile_family         -- the same two panels overlaying the final
      profiles of several runs (one legend entry per run);
  loglog_mass            -- squared beam norm against the distance of
      the multiplier from the bifurcation point, log-log, plus a zoom
      on the last 15 points written next to the main file.

Rendering is read-only over the inputs and byte-deterministic: fixed
style, hashed SVG ids salted with a constant, and no embedded dates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_VERSION = 1

SWEEP_COLUMNS = [
    "varied_param_name",
    "varied_param_value",
    "mass",
    "u0",
    "rho0",
    "energy",
    "pohozaev_residual",
    "multiplier_residual",
    "gaussian_shape_error",
    "picard_iters_used",
    "converged",
]

KINDS = ("profiles_with_iterates", "profile_family", "loglog_mass")

plt.rcParams["svg.hashsalt"] = "nematicon-plots"
plt.rcParams["figure.dpi"] = 110


class SchemaMismatch(RuntimeError):
    """Input artifact does not match the declared figure kind/schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    labels: tuple = field(default_factory=tuple)
    title: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaMismatch(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaMismatch("figure spec needs at least one input")


def read_profile_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "value"]:
            raise SchemaMismatch(f"{path}: expected an x,value profile header")
        rows = [(float(r[0]), float(r[1])) for r in reader]
    if not rows:
        raise SchemaMismatch(f"{path}: no rows")
    data = np.asarray(rows)
    return data[:, 0], data[:, 1]


def read_run_dir(run_dir) -> dict:
    run_dir = Path(run_dir)
    record_path = run_dir / "run.json"
    try:
        record = json.loads(record_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaMismatch(f"cannot read run record: {exc}") from exc
    if record.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"{record_path}: schema_version {record.get('schema_version')!r}, "
            f"expected {SCHEMA_VERSION}"
        )
    iterates = sorted((run_dir / "iterates").glob("u_*.csv"))
    rho_iterates = sorted((run_dir / "iterates").glob("rho_*.csv"))
    return {
        "record": record,
        "u": read_profile_csv(run_dir / "u.csv"),
        "rho": read_profile_csv(run_dir / "rho.csv"),
        "u_iterates": [read_profile_csv(p) for p in iterates],
        "rho_iterates": [read_profile_csv(p) for p in rho_iterates],
    }


def read_sweep_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_COLUMNS:
            raise SchemaMismatch(f"{path}: unexpected sweep header {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise SchemaMismatch(f"{path}: no rows")
    return rows


def read_manifest(path) -> dict:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    if record.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"{path}: unsupported schema_version")
    return record


def _save(fig, output: str) -> list[str]:
    out = Path(output)
    written = []
    for suffix in (".png", ".svg"):
        target = out.with_suffix(suffix)
        fig.savefig(target, metadata={"Date": None} if suffix == ".svg" else None)
        written.append(str(target))
    plt.close(fig)
    return written


def _render_profiles_with_iterates(spec: FigureSpec) -> list[str]:
    data = read_run_dir(spec.inputs[0])
    fig, (ax_u, ax_rho) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    for ax, final, iterates, name in (
        (ax_u, data["u"], data["u_iterates"], "u"),
        (ax_rho, data["rho"], data["rho_iterates"], "rho"),
    ):
        for x, vals in iterates[:-1]:
            ax.plot(x, vals, linestyle="--", linewidth=0.7, color="0.55")
        x, vals = final
        ax.plot(x, vals, linestyle="-", linewidth=1.6, color="C0")
        ax.set_xlabel("x")
        ax.set_ylabel(name)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    return _save(fig, spec.output)


def _render_profile_family(spec: FigureSpec) -> list[str]:
    # inputs alternate u.csv / rho.csv per run when two panels are wanted;
    # plain profile lists render into a single panel
    labels = spec.labels or tuple(Path(p).parent.name for p in spec.inputs)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for path, label in zip(spec.inputs, labels):
        x, vals = read_profile_csv(path)
        ax.plot(x, vals, linewidth=1.2, label=str(label))
    ax.set_xlabel("x")
    ax.legend(loc="upper right", fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec.output)


def _render_loglog_mass(spec: FigureSpec) -> list[str]:
    rows = read_sweep_csv(spec.inputs[0])
    if len(spec.inputs) < 2:
        raise SchemaMismatch("loglog_mass needs the sweep CSV and its manifest")
    manifest = read_manifest(spec.inputs[1])
    H = float(manifest["config"]["params"]["H"])
    lambda0 = abs(H)
    mu = np.array([float(r["varied_param_value"]) for r in rows])
    mass = np.array([float(r["mass"]) for r in rows])
    gap = lambda0 + mu
    if np.any(gap <= 0):
        raise SchemaMismatch("multiplier values sit outside the branch (gap <= 0)")

    written = []
    for tag, sl in (("", slice(None)), ("_zoom", slice(-15, None))):
        fig, ax = plt.subplots(figsize=(4.6, 3.6))
        ax.loglog(gap[sl], mass[sl], marker="o", markersize=3.0, linewidth=1.0)
        ax.set_xlabel("lambda0 + mu")
        ax.set_ylabel("squared beam norm")
        if spec.title:
            ax.set_title(spec.title + (" (zoom)" if tag else ""))
        fig.tight_layout()
        out = Path(spec.output)
        written += _save(fig, str(out.with_name(out.stem + tag)))
    return written


_RENDERERS = {
    "profiles_with_iterates": _render_profiles_with_iterates,
    "profile_family": _render_profile_family,
    "loglog_mass": _render_loglog_mass,
}


def render(spec: FigureSpec) -> list[str]:
    """Render one figure; returns the list of files written (PNG + SVG)."""
    return _RENDERERS[spec.kind](spec)
