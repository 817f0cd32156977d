"""Command-line entry point, configuration files, and run persistence.

Runs are fully deterministic: the resolved configuration is echoed into
a schema-versioned run record whose only wall-clock field is the
explicitly labeled "timestamp" (excluded from artifact comparisons).
Configuration files are a flat key = value format with [sections]
(a TOML-compatible subset); command-line flags override file values,
which override the built-in defaults.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import diagnostics, evolution, sweeps
from .director import ShootConfig
from .errors import ConfigError, NematiconError, PicardStall
from .grid import Grid, Params, RealProfile, load_profile, reflect_even, save_profile
from .standing import DEFAULT_U_BRACKET, PicardConfig, picard_fixed_point

SCHEMA_VERSION = 1
OUTPUT_ROOT_ENV = "NEMATICON_OUT"

COMMANDS = ("solve", "sweep-mu", "sweep-h", "evolve", "stability", "support", "diagnose")

# Defaults reproduce the baseline standing-wave run:
# H=1, mu=-0.8, lam=0.1, b=1 on a half line with dx=0.002, 3001 nodes,
# and 15 Picard iterations.
DEFAULTS = {
    "params": {"H": 1.0, "mu": -0.8, "lambda": 0.1, "b": 1.0, "a": -1.0, "alpha": 1.0},
    "grid": {"dx": 0.002, "n_points": 3001, "symmetric": False},
    "shoot": {
        "bracket_lo": DEFAULT_U_BRACKET[0],
        "bracket_hi": DEFAULT_U_BRACKET[1],
        "max_bisections": 200,
        "blowup_factor": 5.0,
        "monotonicity_tol": 0.0,
    },
    "picard": {"max_iters": 15, "rel_tol": 1e-6, "relaxation": "auto"},
    "evolution": {"T": 5.0, "dt": 5e-4, "stride": 100},
    "sweep": {
        "start": -1.9,
        "stop": -1.9999153,
        "count": 60,
        "spacing": "log",
        "h_values": "0.5,1.0,1.5,2.0",
        "jobs": 1,
    },
    "stability": {"delta": 1e-2, "T": 10.0, "dt": 2e-3, "stride": 50},
    "support": {"theta": 1.0, "delta": 1.0, "T": 2.0, "dt": 1e-3},
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=lambda: dict(DEFAULTS["params"]))
    grid: dict = field(default_factory=lambda: dict(DEFAULTS["grid"]))
    shoot: dict = field(default_factory=lambda: dict(DEFAULTS["shoot"]))
    picard: dict = field(default_factory=lambda: dict(DEFAULTS["picard"]))
    evolution: dict = field(default_factory=lambda: dict(DEFAULTS["evolution"]))
    sweep: dict = field(default_factory=lambda: dict(DEFAULTS["sweep"]))
    stability: dict = field(default_factory=lambda: dict(DEFAULTS["stability"]))
    support: dict = field(default_factory=lambda: dict(DEFAULTS["support"]))
    output_dir: str = "."
    input_dir: str | None = None

    def physics(self) -> Params:
        p = self.params
        return Params(
            H=p["H"], mu=p["mu"], lam=p["lambda"], b=p["b"], a=p["a"], alpha=p["alpha"]
        )

    def mesh(self) -> Grid:
        g = self.grid
        mode = "symmetric_about_0" if g["symmetric"] else "half_line_from_0"
        return Grid(int(g["n_points"]), float(g["dx"]), mode)

    def shoot_config(self) -> ShootConfig:
        s = self.shoot
        return ShootConfig(
            bracket_lo=s["bracket_lo"],
            bracket_hi=s["bracket_hi"],
            max_bisections=int(s["max_bisections"]),
            blowup_factor=s["blowup_factor"],
            monotonicity_tol=s["monotonicity_tol"],
        )

    def picard_config(self) -> PicardConfig:
        p = self.picard
        return PicardConfig(
            max_iters=int(p["max_iters"]),
            rel_tol=p["rel_tol"],
            relaxation=p["relaxation"],
        )

    def resolved(self) -> dict:
        return {
            "command": self.command,
            "params": dict(self.params),
            "grid": dict(self.grid),
            "shoot": dict(self.shoot),
            "picard": dict(self.picard),
            "evolution": dict(self.evolution),
            "sweep": dict(self.sweep),
            "stability": dict(self.stability),
            "support": dict(self.support),
            "output_dir": str(self.output_dir),
        }


# ---------------------------------------------------------------------------
# Config-file parsing: flat key = value lines grouped under [sections].


def _parse_scalar(raw: str, key: str, lineno: int):
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse value for key '{key}': {raw!r}")


def parse_config_text(text: str) -> dict:
    sections: dict = {}
    current = "top"
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if not current:
                raise ConfigError(f"line {lineno}: empty section name")
            sections.setdefault(current, {})
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key before '='")
        sections.setdefault(current, {})[key] = _parse_scalar(raw, key, lineno)
    return sections


_SECTION_FIELDS = {
    "params": "params",
    "grid": "grid",
    "shoot": "shoot",
    "picard": "picard",
    "evolution": "evolution",
    "sweep": "sweep",
    "stability": "stability",
    "support": "support",
}


def apply_config_file(config: RunConfig, path: str) -> None:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    sections = parse_config_text(text)
    for section, payload in sections.items():
        if section == "top":
            for key, value in payload.items():
                if key == "command":
                    config.command = str(value)
                elif key == "output_dir":
                    config.output_dir = str(value)
                else:
                    raise ConfigError(f"unknown top-level key '{key}' in {path}")
            continue
        attr = _SECTION_FIELDS.get(section)
        if attr is None:
            raise ConfigError(f"unknown section [{section}] in {path}")
        target = getattr(config, attr)
        for key, value in payload.items():
            if key not in target:
                raise ConfigError(f"unknown key '{key}' in section [{section}] of {path}")
            target[key] = value


# ---------------------------------------------------------------------------
# Artifact writers.


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_record(path: Path, config: RunConfig, result: dict) -> None:
    record = {
        "schema_version": SCHEMA_VERSION,
        "timestamp": _timestamp(),
        "config": config.resolved(),
        "result": result,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _solve_standing_wave(config: RunConfig):
    return picard_fixed_point(
        config.mesh(), config.physics(), config.picard_config(), config.shoot_config()
    )


def _wave_result_payload(wave) -> dict:
    report = wave.diagnostics or diagnostics.compute_report(wave)
    return {
        "converged": wave.converged,
        "picard_iters_used": wave.picard_iters_used,
        "final_delta": wave.final_delta,
        "deltas": list(wave.deltas),
        "u0": wave.u0,
        "rho0": wave.rho0,
        "u0_history": list(wave.u0_history),
        "rho0_history": list(wave.rho0_history),
        "telemetry": wave.telemetry,
        "diagnostics": report.as_dict(),
    }


def _write_wave_artifacts(outdir: Path, wave) -> None:
    save_profile(wave.u, outdir / "u.csv")
    save_profile(wave.rho, outdir / "rho.csv")
    iterates = outdir / "iterates"
    iterates.mkdir(exist_ok=True)
    for k, (u_it, rho_it) in enumerate(zip(wave.u_history, wave.rho_history)):
        save_profile(u_it, iterates / f"u_{k:03d}.csv")
        save_profile(rho_it, iterates / f"rho_{k:03d}.csv")


# ---------------------------------------------------------------------------
# Command handlers: return process exit status.


def cmd_solve(config: RunConfig, outdir: Path) -> int:
    try:
        wave = _solve_standing_wave(config)
    except PicardStall as exc:
        wave = exc.partial
    result = _wave_result_payload(wave)
    _write_wave_artifacts(outdir, wave)
    write_record(outdir / "run.json", config, result)
    return 0 if wave.converged else 2


def _sweep_values(config: RunConfig) -> list[float]:
    s = config.sweep
    count = int(s["count"])
    if count < 1:
        raise ConfigError("sweep count must be at least 1")
    start, stop = float(s["start"]), float(s["stop"])
    if s["spacing"] == "log":
        lam0 = config.physics().lambda0
        g0, g1 = start + lam0, stop + lam0
        if g0 <= 0 or g1 <= 0:
            raise ConfigError(
                "log spacing needs both endpoints above the bifurcation point"
            )
        gaps = np.geomspace(g0, g1, count)
        return [float(g - lam0) for g in gaps]
    if s["spacing"] == "linear":
        return [float(v) for v in np.linspace(start, stop, count)]
    raise ConfigError(f"unknown sweep spacing {s['spacing']!r}")


def cmd_sweep_mu(config: RunConfig, outdir: Path) -> int:
    values = _sweep_values(config)
    base = config.physics()
    jobs = int(config.sweep["jobs"])
    if jobs > 1:
        rows = sweeps.parallel_sweep(
            base, "mu", values, config.mesh(), jobs,
            config.picard_config(), config.shoot_config(),
        )
    else:
        rows = sweeps.mu_sweep(
            base, values, config.mesh(), config.picard_config(), config.shoot_config()
        )
    stamp = _timestamp()
    csv_path = outdir / f"sweep_mu_{stamp}.csv"
    sweeps.export(rows, "csv", csv_path)
    result = {
        "rows": len(rows),
        "converged_rows": sum(r.converged for r in rows),
        "csv": csv_path.name,
        "first_divergence": sweeps.first_divergence(rows),
    }
    write_record(outdir / "sweep_mu_manifest.json", config, result)
    return 0 if all(r.converged for r in rows) else 2


def cmd_sweep_h(config: RunConfig, outdir: Path) -> int:
    values = [float(tok) for tok in str(config.sweep["h_values"]).split(",") if tok]
    base = config.physics()
    jobs = int(config.sweep["jobs"])
    if jobs > 1:
        rows = sweeps.parallel_sweep(
            base, "H", values, config.mesh(), jobs,
            config.picard_config(), config.shoot_config(),
        )
    else:
        rows = sweeps.h_sweep(
            base, values, config.mesh(), config.picard_config(), config.shoot_config()
        )
    stamp = _timestamp()
    csv_path = outdir / f"sweep_H_{stamp}.csv"
    sweeps.export(rows, "csv", csv_path)
    result = {
        "rows": len(rows),
        "converged_rows": sum(r.converged for r in rows),
        "csv": csv_path.name,
        "first_divergence": sweeps.first_divergence(rows),
    }
    write_record(outdir / "sweep_H_manifest.json", config, result)
    return 0 if all(r.converged for r in rows) else 2


def _initial_coupled_state(config: RunConfig):
    """Standing wave re-solved at lam = 0, reflected onto the full line."""
    from .grid import ComplexProfile

    lam0_params = replace(config.physics(), lam=0.0)
    cfg = replace(config)
    cfg.params = dict(config.params)
    cfg.params["lambda"] = 0.0
    wave = picard_fixed_point(
        cfg.mesh(), lam0_params, cfg.picard_config(), cfg.shoot_config()
    )
    u_sym = reflect_even(wave.u)
    rho_sym = reflect_even(wave.rho)
    state = evolution.EvolutionState(
        t=0.0,
        u=ComplexProfile.from_real(u_sym),
        rho=rho_sym,
        rho_t=RealProfile.zeros(u_sym.grid),
    )
    return state, lam0_params, wave


def cmd_evolve(config: RunConfig, outdir: Path) -> int:
    state, params, _ = _initial_coupled_state(config)
    T = float(config.evolution["T"])
    dt = float(config.evolution["dt"])
    stride = int(config.evolution["stride"])
    samples, log = evolution.evolve_coupled(state, T, dt, params, sample_stride=stride)
    with open(outdir / "conserved.csv", "w", encoding="utf-8") as fh:
        fh.write("t,mass,energy\n")
        for t, m, e in zip(log.times, log.mass_series, log.energy_series):
            fh.write(f"{t:.17g},{m:.17g},{e:.17g}\n")
    snapdir = outdir / "snapshots"
    snapdir.mkdir(exist_ok=True)
    for k, sample in enumerate(samples):
        save_profile(sample.u, snapdir / f"u_{k:05d}.csv")
    mass0, massT = log.mass_series[0], log.mass_series[-1]
    energies = np.asarray(log.energy_series)
    result = {
        "T": T,
        "dt": dt,
        "mass_initial": mass0,
        "mass_drift": abs(massT - mass0) / abs(mass0),
        "energy_initial": float(energies[0]),
        "energy_drift": float(np.max(np.abs(energies - energies[0])) / abs(energies[0])),
        "samples": len(samples),
    }
    write_record(outdir / "evolve.json", config, result)
    return 0


def cmd_stability(config: RunConfig, outdir: Path) -> int:
    wave = _solve_standing_wave(config)
    s = config.stability
    res = evolution.stability_experiment(
        wave, float(s["delta"]), float(s["T"]), float(s["dt"]),
        sample_stride=int(s["stride"]),
    )
    with open(outdir / "stability.csv", "w", encoding="utf-8") as fh:
        fh.write("t,orbital_distance,rho_h1_dev,phase\n")
        for t, d, r, p in zip(res.times, res.distances, res.rho_h1_devs, res.phases):
            fh.write(f"{t:.17g},{d:.17g},{r:.17g},{p:.17g}\n")
    result = {
        "initial_distance": res.initial_distance,
        "sup_distance": res.sup_distance,
        "phase_slope": res.phase_slope,
        "mu": config.params["mu"],
    }
    write_record(outdir / "stability.json", config, result)
    return 0 if wave.converged else 2


def compact_support_state(grid: Grid, theta: float) -> "evolution.EvolutionState":
    """Compact data inside (-theta, theta) with an active wave channel.

    The cos^2 bump drives all three fields; the nonzero initial rho_t
    makes the ballistic director front carry the bulk of the escaping
    density, which is what gives the exterior mass its accelerating
    (cubic-shaped) growth once the front crosses the inflated region.
    """
    from .grid import ComplexProfile

    x = grid.x
    bump = np.where(np.abs(x) < theta, np.cos(0.5 * np.pi * x / theta) ** 2, 0.0)
    return evolution.EvolutionState(
        t=0.0,
        u=ComplexProfile(grid, (0.3 * bump).astype(complex)),
        rho=RealProfile(grid, 0.5 * bump),
        rho_t=RealProfile(grid, 0.4 * bump),
    )


def cmd_support(config: RunConfig, outdir: Path) -> int:
    s = config.support
    params = replace(config.physics(), lam=0.0)
    grid = config.mesh()
    if not grid.is_symmetric:
        n = grid.n_points if grid.n_points % 2 == 1 else grid.n_points + 1
        grid = Grid.symmetric(2 * n - 1, grid.dx)
    theta = float(s["theta"])
    state = compact_support_state(grid, theta)
    spec = evolution.SupportSpec(theta=theta, delta=float(s["delta"]))
    T, dt = float(s["T"]), float(s["dt"])
    stride = max(1, int(round(T / dt / 4)))
    samples, _ = evolution.evolve_coupled(state, T, dt, params, sample_stride=stride)
    masses = [evolution.exterior_mass(st, spec) for st in samples]
    times = [st.t for st in samples]
    coeff_a, coeff_b = evolution.fit_growth_envelope(times[-3:], masses[-3:])
    result = {
        "times": times,
        "exterior_masses": masses,
        "initial_exterior_mass": masses[0],
        "envelope_cubic_coeff": coeff_a,
        "envelope_quadratic_coeff": coeff_b,
    }
    write_record(outdir / "support.json", config, result)
    return 0


def cmd_diagnose(config: RunConfig, outdir: Path) -> int:
    indir = Path(config.input_dir or config.output_dir)
    u = load_profile(indir / "u.csv")
    rho = load_profile(indir / "rho.csv")
    params = config.physics()
    report = diagnostics.DiagnosticsReport(
        mass=2.0 * float(np.trapezoid(u.values**2, dx=u.grid.dx)),
        energy=diagnostics.energy(u, rho, params.H),
        pohozaev_residual=diagnostics.pohozaev_residual(u, rho, params.H),
        multiplier_residual=diagnostics.multiplier_residual(u, rho, params),
        lambda0=params.lambda0,
        gaussian_shape_error=diagnostics.gaussian_shape_error(u, params.H),
    )
    write_record(outdir / "diagnostics.json", config, report.as_dict())
    for key, value in report.as_dict().items():
        print(f"{key} = {value:.12g}")
    return 0


_HANDLERS = {
    "solve": cmd_solve,
    "sweep-mu": cmd_sweep_mu,
    "sweep-h": cmd_sweep_h,
    "evolve": cmd_evolve,
    "stability": cmd_stability,
    "support": cmd_support,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nematicon",
        description="Standing waves and dynamics of a laser beam in a nematic "
        "liquid crystal under a magnetic field.",
    )
    parser.add_argument("command", choices=COMMANDS, help="what to run")
    parser.add_argument("--config", metavar="PATH", help="key = value config file")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--in", dest="input_dir", metavar="DIR",
                        help="input run directory (diagnose)")
    parser.add_argument("--dx", type=float, help="grid spacing")
    parser.add_argument("--n-points", type=int, help="number of grid nodes")
    parser.add_argument("--H", type=float, help="magnetic intensity")
    parser.add_argument("--mu", type=float, help="Lagrange multiplier")
    parser.add_argument("--lambda", dest="lam", type=float,
                        help="cubic elastic coefficient")
    parser.add_argument("--b", type=float, help="linear elastic restoring coefficient")
    parser.add_argument("--picard-iters", type=int, help="Picard iteration budget")
    parser.add_argument("--jobs", type=int, help="parallel workers for cold sweeps")
    parser.add_argument("--T", type=float, help="evolution horizon")
    parser.add_argument("--dt", type=float, help="evolution time step")
    parser.add_argument("--mu-start", type=float, help="sweep start value")
    parser.add_argument("--mu-stop", type=float, help="sweep stop value")
    parser.add_argument("--count", type=int, help="number of sweep values")
    parser.add_argument("--spacing", choices=("log", "linear"), help="sweep spacing")
    parser.add_argument("--h-values", help="comma-separated H list for sweep-h")
    return parser


def _apply_flags(config: RunConfig, args: argparse.Namespace) -> None:
    if args.out is not None:
        config.output_dir = args.out
    if args.input_dir is not None:
        config.input_dir = args.input_dir
    if args.dx is not None:
        config.grid["dx"] = args.dx
    if args.n_points is not None:
        config.grid["n_points"] = args.n_points
    if args.H is not None:
        config.params["H"] = args.H
    if args.mu is not None:
        config.params["mu"] = args.mu
    if args.lam is not None:
        config.params["lambda"] = args.lam
    if args.b is not None:
        config.params["b"] = args.b
    if args.picard_iters is not None:
        config.picard["max_iters"] = args.picard_iters
    if args.jobs is not None:
        config.sweep["jobs"] = args.jobs
    if args.T is not None:
        config.evolution["T"] = args.T
        config.stability["T"] = args.T
        config.support["T"] = args.T
    if args.dt is not None:
        config.evolution["dt"] = args.dt
        config.stability["dt"] = args.dt
        config.support["dt"] = args.dt
    if args.mu_start is not None:
        config.sweep["start"] = args.mu_start
    if args.mu_stop is not None:
        config.sweep["stop"] = args.mu_stop
    if args.count is not None:
        config.sweep["count"] = args.count
    if args.spacing is not None:
        config.sweep["spacing"] = args.spacing
    if args.h_values is not None:
        config.sweep["h_values"] = args.h_values


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    config = RunConfig(command=args.command)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root:
        config.output_dir = root
    try:
        if args.config:
            apply_config_file(config, args.config)
        config.command = args.command
        _apply_flags(config, args)
        outdir = Path(config.output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        handler = _HANDLERS[config.command]
        return handler(config, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NematiconError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
