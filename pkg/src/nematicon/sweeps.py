"""Parameter continuation along the standing-wave branch.

Sweeps run the Picard solver across an ordered list of multiplier or
field-intensity values, warm-starting each beam bracket from the
previous amplitude so continuation only speeds things up without
changing answers.  Rows that fail to converge are kept (flagged) and
the sweep moves on.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
from dataclasses import asdict, dataclass, replace

from .diagnostics import compute_report
from .director import ShootConfig
from .errors import BracketError, NewtonDivergence, PicardStall
from .grid import Grid, Params
from .standing import DEFAULT_U_BRACKET, PicardConfig, StandingWave, picard_fixed_point

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


@dataclass(frozen=True)
class SweepRow:
    varied_param_name: str
    varied_param_value: float
    mass: float
    u0: float
    rho0: float
    energy: float
    pohozaev_residual: float
    multiplier_residual: float
    gaussian_shape_error: float
    picard_iters_used: int
    converged: bool


def _row_from_wave(name: str, value: float, wave: StandingWave) -> SweepRow:
    report = wave.diagnostics or compute_report(wave)
    return SweepRow(
        varied_param_name=name,
        varied_param_value=value,
        mass=report.mass,
        u0=wave.u0,
        rho0=wave.rho0,
        energy=report.energy,
        pohozaev_residual=report.pohozaev_residual,
        multiplier_residual=report.multiplier_residual,
        gaussian_shape_error=report.gaussian_shape_error,
        picard_iters_used=wave.picard_iters_used,
        converged=wave.converged,
    )


def _failed_row(name: str, value: float, partial: StandingWave | None) -> SweepRow:
    if partial is not None:
        row = _row_from_wave(name, value, partial)
        return replace(row, converged=False)
    return SweepRow(
        varied_param_name=name,
        varied_param_value=value,
        mass=float("nan"),
        u0=float("nan"),
        rho0=float("nan"),
        energy=float("nan"),
        pohozaev_residual=float("nan"),
        multiplier_residual=float("nan"),
        gaussian_shape_error=float("nan"),
        picard_iters_used=0,
        converged=False,
    )


def solve_point(
    grid: Grid,
    params: Params,
    pcfg: PicardConfig | None = None,
    scfg: ShootConfig | None = None,
    name: str = "mu",
    value: float | None = None,
) -> tuple[SweepRow, StandingWave | None]:
    """One branch point; never raises on solver failure."""
    if value is None:
        value = getattr(params, name)
    try:
        wave = picard_fixed_point(grid, params, pcfg, scfg)
    except PicardStall as exc:
        return _failed_row(name, value, exc.partial), exc.partial
    except (BracketError, NewtonDivergence):
        return _failed_row(name, value, None), None
    return _row_from_wave(name, value, wave), wave


def sweep_standing_waves(
    base: Params,
    param_name: str,
    values,
    grid: Grid,
    pcfg: PicardConfig | None = None,
    scfg: ShootConfig | None = None,
    *,
    warm_start: bool = True,
    on_solution=None,
) -> list[SweepRow]:
    """Continuation over an ordered list of values of one Params field.

    on_solution(row, wave_or_None) fires after every point; waves are
    not retained otherwise.
    """
    rows: list[SweepRow] = []
    prev_u0: float | None = None
    for value in values:
        params = replace(base, **{param_name: float(value)})
        cfg = scfg
        if warm_start and prev_u0 is not None and prev_u0 > 0:
            cfg = _warm_config(scfg, prev_u0)
        row, wave = solve_point(grid, params, pcfg, cfg)
        if warm_start and not row.converged and cfg is not scfg:
            # retry cold before accepting the failure
            row, wave = solve_point(grid, params, pcfg, scfg)
        row = replace(row, varied_param_name=param_name, varied_param_value=float(value))
        rows.append(row)
        if row.converged and wave is not None:
            prev_u0 = wave.u0
        if on_solution is not None:
            on_solution(row, wave)
    return rows


def _warm_config(scfg: ShootConfig | None, u0: float) -> ShootConfig:
    base = scfg or ShootConfig(*DEFAULT_U_BRACKET)
    return replace(base, bracket_lo=0.8 * u0, bracket_hi=1.2 * u0)


def mu_sweep(base: Params, mu_values, grid: Grid, pcfg=None, scfg=None,
             *, warm_start: bool = True, on_solution=None) -> list[SweepRow]:
    """Trace the branch in the Lagrange multiplier.

    Every mu must stay above -lambda0: the multiplier of a nontrivial
    wave satisfies -mu < lambda0 and reaches lambda0 only in the
    zero-mass bifurcation limit.
    """
    mu_values = [float(m) for m in mu_values]
    lam0 = base.lambda0
    for m in mu_values:
        if m <= -lam0:
            raise ValueError(
                f"mu={m} is not above the bifurcation point -lambda0={-lam0}"
            )
    return sweep_standing_waves(
        base, "mu", mu_values, grid, pcfg, scfg,
        warm_start=warm_start, on_solution=on_solution,
    )


def h_sweep(base: Params, H_values, grid: Grid, pcfg=None, scfg=None,
            *, warm_start: bool = True, on_solution=None) -> list[SweepRow]:
    """Trace the branch in the magnetic intensity (ascending H > 0)."""
    H_values = [float(h) for h in H_values]
    if any(h <= 0 for h in H_values):
        raise ValueError("H values must be positive")
    if H_values != sorted(H_values):
        raise ValueError("H values must be ascending")
    return sweep_standing_waves(
        base, "H", H_values, grid, pcfg, scfg,
        warm_start=warm_start, on_solution=on_solution,
    )


def first_divergence(rows: list[SweepRow]) -> float | None:
    """Varied value of the first non-converged row, if any."""
    for row in rows:
        if not row.converged:
            return row.varied_param_value
    return None


def bifurcation_gaps(rows: list[SweepRow], lambda0: float) -> list[float]:
    """Distance of -mu below lambda0 for each row (log-log abscissa)."""
    return [lambda0 + row.varied_param_value for row in rows]


# ---------------------------------------------------------------------------
# Parallel cold-start mode.

_POOL_STATE: dict = {}


def _pool_solve(args):
    index, base, param_name, value, grid, pcfg, scfg = args
    params = replace(base, **{param_name: float(value)})
    row, _ = solve_point(grid, params, pcfg, scfg)
    row = replace(row, varied_param_name=param_name, varied_param_value=float(value))
    return index, row


def parallel_sweep(
    base: Params,
    param_name: str,
    values,
    grid: Grid,
    jobs: int,
    pcfg: PicardConfig | None = None,
    scfg: ShootConfig | None = None,
) -> list[SweepRow]:
    """Cold-started rows across worker processes; order-independent."""
    tasks = [
        (i, base, param_name, float(v), grid, pcfg, scfg) for i, v in enumerate(values)
    ]
    results: dict[int, SweepRow] = {}
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        for index, row in pool.map(_pool_solve, tasks):
            results[index] = row
    return [results[i] for i in range(len(tasks))]


# ---------------------------------------------------------------------------
# Export: CSV at full precision, JSON losslessly.


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def export(rows: list[SweepRow], format: str, path) -> None:
    if format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SWEEP_COLUMNS)
            for row in rows:
                record = asdict(row)
                writer.writerow([_format_cell(record[c]) for c in SWEEP_COLUMNS])
    elif format == "json":
        payload = [asdict(row) for row in rows]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError(f"unknown export format {format!r}")


def load_rows(path) -> list[SweepRow]:
    """Read back either export format into SweepRow records."""
    path = str(path)
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return [SweepRow(**item) for item in payload]
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for record in reader:
            rows.append(
                SweepRow(
                    varied_param_name=record["varied_param_name"],
                    varied_param_value=float(record["varied_param_value"]),
                    mass=float(record["mass"]),
                    u0=float(record["u0"]),
                    rho0=float(record["rho0"]),
                    energy=float(record["energy"]),
                    pohozaev_residual=float(record["pohozaev_residual"]),
                    multiplier_residual=float(record["multiplier_residual"]),
                    gaussian_shape_error=float(record["gaussian_shape_error"]),
                    picard_iters_used=int(record["picard_iters_used"]),
                    converged=record["converged"] == "true",
                )
            )
        return rows
