"""End-to-end check against real solver artifacts.

Skipped when the solver package is not installed: the plots component
must stand alone, consuming only the documented file formats.
"""

import importlib.util
import subprocess
import sys

import pytest

from nematicon_plots import FigureSpec, render

needs_solver = pytest.mark.skipif(
    importlib.util.find_spec("nematicon") is None,
    reason="solver package not installed",
)


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "nematicon", *args], capture_output=True, text=True
    )


@needs_solver
def test_fig1_style_figure_from_real_run(tmp_path):
    run_dir = tmp_path / "run"
    proc = run_cli("solve", "--out", str(run_dir), "--dx", "0.006", "--n-points", "1001")
    assert proc.returncode == 0, proc.stderr
    before = (run_dir / "u.csv").read_bytes()
    out = tmp_path / "fig1.png"
    written = render(FigureSpec("profiles_with_iterates", (str(run_dir),), str(out)))
    assert len(written) == 2
    assert (run_dir / "u.csv").read_bytes() == before


@needs_solver
def test_fig3_style_figure_from_real_sweep(tmp_path):
    sweep_dir = tmp_path / "sweep"
    proc = run_cli(
        "sweep-mu", "--out", str(sweep_dir), "--H", "2.0",
        "--mu-start", "-1.9", "--mu-stop", "-1.999", "--count", "4",
        "--dx", "0.006", "--n-points", "1001",
    )
    assert proc.returncode == 0, proc.stderr
    csv_path = next(sweep_dir.glob("sweep_mu_*.csv"))
    manifest = sweep_dir / "sweep_mu_manifest.json"
    out = tmp_path / "fig3.png"
    written = render(FigureSpec("loglog_mass", (str(csv_path), str(manifest)), str(out)))
    assert {p.split("/")[-1] for p in written} == {
        "fig3.png", "fig3.svg", "fig3_zoom.png", "fig3_zoom.svg",
    }
