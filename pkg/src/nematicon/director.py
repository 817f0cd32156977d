"""Director-field solvers on the half line.

The production path is an outward-shooting integrator for

    -rho_xx - lam * (rho_x^3)_x + b * rho = phi^2,
    rho'(0) = 0,  rho -> 0 far out,

bisecting on rho(0).  The far boundary condition is enforced by
classifying each march: too small a start drives rho negative, too
large a start makes it turn around and grow, and the admissible class
(positive, decreasing, decaying) sits on the boundary between the two.

Two independent boundary-value solvers act as oracles: a tridiagonal
finite-difference solve of the lam = 0 problem (with an FFT realization
of the same Green's function) and a damped Newton solve of the full
quasilinear residual for lam >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import BracketError, NewtonDivergence, SingularSystem
from .grid import Grid, Params, RealProfile

# Classification labels for a truncated outward march.
WENT_NEGATIVE = "went_negative"
BECAME_INCREASING = "became_increasing"
SURVIVED = "survived"

_KIND_NAMES = {
    _kernels.SURVIVED: SURVIVED,
    _kernels.WENT_NEGATIVE: WENT_NEGATIVE,
    _kernels.BECAME_INCREASING: BECAME_INCREASING,
}

DEFAULT_MAX_BISECTIONS = 200
DEFAULT_BLOWUP_FACTOR = 5.0


@dataclass(frozen=True)
class ShootConfig:
    """Bracket and termination knobs for a shooting bisection."""

    bracket_lo: float
    bracket_hi: float
    max_bisections: int = DEFAULT_MAX_BISECTIONS
    blowup_factor: float = DEFAULT_BLOWUP_FACTOR
    monotonicity_tol: float = 0.0

    def __post_init__(self) -> None:
        if self.bracket_lo < 0:
            raise ValueError("bracket_lo must be nonnegative")
        if not self.bracket_hi > self.bracket_lo:
            raise ValueError("bracket_hi must exceed bracket_lo")
        if self.max_bisections < 1:
            raise ValueError("max_bisections must be positive")
        if not self.blowup_factor > 1:
            raise ValueError("blowup_factor must exceed 1")
        if self.monotonicity_tol < 0:
            raise ValueError("monotonicity_tol must be nonnegative")


@dataclass(frozen=True)
class MarchOutcome:
    """A truncated outward march and how it left the admissible class.

    first_bad_index is the first offending node (None if the march
    survived the whole window); the profile is clamped to zero from
    that node on.
    """

    profile: RealProfile
    classification: str
    first_bad_index: int | None


def _outcome(grid: Grid, values: np.ndarray, kind: int, bad: int) -> MarchOutcome:
    if kind == _kernels.NEWTON_FAILED:
        raise NewtonDivergence(
            f"cubic increment Newton hit its iteration cap at node {bad}"
        )
    if bad >= 0:
        values = values.copy()
        values[bad:] = 0.0
    return MarchOutcome(
        profile=RealProfile(grid, values),
        classification=_KIND_NAMES[kind],
        first_bad_index=bad if bad >= 0 else None,
    )


def newton_v_step(v_j: float, rho_j: float, phi_j: float, params: Params, dx: float) -> float:
    """One implicit update of the slope variable v = rho_x.

    Solves v + lam v^3 = v_j + lam v_j^3 + dx (b rho_j - phi_j^2); for
    lam = 0 this is exactly the explicit Euler update.
    """
    rhs = v_j + params.lam * v_j**3 + dx * (params.b * rho_j - phi_j**2)
    v = _kernels.newton_cubic_increment(v_j, rhs, params.lam)
    if not np.isfinite(v):
        raise NewtonDivergence("cubic increment Newton hit its iteration cap")
    return float(v)


def march_director(
    rho0: float,
    phi: RealProfile,
    params: Params,
    *,
    blowup_factor: float = DEFAULT_BLOWUP_FACTOR,
    monotonicity_tol: float = 0.0,
) -> MarchOutcome:
    """March the director equation outward from rho(0) = rho0, v(0) = 0."""
    if phi.grid.is_symmetric:
        raise ValueError("director marches run on half-line grids")
    source = phi.values**2
    values, kind, bad = _kernels.march_director(
        rho0, source, params.lam, params.b, phi.grid.dx, blowup_factor, monotonicity_tol
    )
    return _outcome(phi.grid, values, kind, bad)


# ---------------------------------------------------------------------------
# Bisection driver (shared with the beam shooting in standing.py).


def bisect_classified(march, lo: float, hi: float, max_bisections: int, should_stop):
    """Classification-driven bisection on a shooting parameter.

    march(value) -> MarchOutcome.  Keeps the invariant that the two
    endpoints classify differently and moves whichever endpoint matches
    the midpoint's classification; this is agnostic about which side of
    the bracket each class lives on.  A midpoint that survives the
    whole window is returned immediately.  should_stop(lo, hi) supplies
    the width criterion.  Returns (value, outcome, stats).
    """
    out_lo = march(lo)
    if out_lo.classification == SURVIVED:
        return lo, out_lo, {"bisections": 0, "final_width": hi - lo}
    out_hi = march(hi)
    if out_hi.classification == SURVIVED:
        return hi, out_hi, {"bisections": 0, "final_width": hi - lo}
    if out_lo.classification == out_hi.classification:
        raise BracketError(
            f"both endpoints classify {out_lo.classification}: [{lo}, {hi}]"
        )
    lo_kind = out_lo.classification
    bisections = 0
    for _ in range(max_bisections):
        if should_stop(lo, hi):
            break
        mid = 0.5 * (lo + hi)
        out_mid = march(mid)
        bisections += 1
        if out_mid.classification == SURVIVED:
            return mid, out_mid, {"bisections": bisections, "final_width": hi - lo}
        if out_mid.classification == lo_kind:
            lo = mid
        else:
            hi = mid
    value = 0.5 * (lo + hi)
    return value, march(value), {"bisections": bisections, "final_width": hi - lo}


def widen_bracket(march, cfg: ShootConfig, attempts: int = 10) -> ShootConfig:
    """Double the bracket outward until its endpoints classify differently."""
    lo, hi = cfg.bracket_lo, cfg.bracket_hi
    for _ in range(attempts):
        kinds = {march(lo).classification, march(hi).classification}
        if len(kinds) == 2 or SURVIVED in kinds:
            return replace(cfg, bracket_lo=lo, bracket_hi=hi)
        lo = lo / 2.0
        hi = hi * 2.0
    raise BracketError(f"could not find a sign change widening to [{lo}, {hi}]")


def default_director_config(phi: RealProfile, params: Params) -> ShootConfig | None:
    """Bracket [0, 10 max(phi^2)/b]; None when the source vanishes."""
    peak = float(np.max(phi.values**2))
    if peak == 0.0:
        return None
    return ShootConfig(bracket_lo=0.0, bracket_hi=10.0 * peak / params.b)


def shoot_director(
    phi: RealProfile,
    params: Params,
    cfg: ShootConfig | None = None,
    *,
    telemetry: dict | None = None,
) -> RealProfile:
    """Solve the director equation by bisection on rho(0).

    The start value is raised when the march goes negative and lowered
    when it turns increasing (the inverse of the beam's dependence).
    Returns the final midpoint's marched profile, tail-clamped past the
    first offending node.
    """
    if cfg is None:
        cfg = default_director_config(phi, params)
        if cfg is None:
            zero = RealProfile.zeros(phi.grid)
            if telemetry is not None:
                telemetry.update({"bisections": 0, "final_width": 0.0, "rho0": 0.0})
            return zero

    def march(rho0: float) -> MarchOutcome:
        return march_director(
            rho0,
            phi,
            params,
            blowup_factor=cfg.blowup_factor,
            monotonicity_tol=cfg.monotonicity_tol,
        )

    stop_width = phi.grid.dx * 1e-6
    rho0, outcome, stats = bisect_classified(
        march,
        cfg.bracket_lo,
        cfg.bracket_hi,
        cfg.max_bisections,
        lambda lo, hi: hi - lo < stop_width,
    )
    if telemetry is not None:
        telemetry.update(stats)
        telemetry["rho0"] = rho0
        telemetry["classification"] = outcome.classification
    return outcome.profile


# ---------------------------------------------------------------------------
# Oracle 1: lam = 0 linear boundary-value solves.


def _check_b(b: float) -> None:
    if not b > 0:
        raise SingularSystem("linear director system requires b > 0")


def oracle_linear_director(phi: RealProfile, b: float) -> RealProfile:
    """Tridiagonal finite-difference solve of -rho_xx + b rho = phi^2.

    Neumann reflection at x = 0 on half-line grids (ghost node
    rho_{-1} = rho_1), homogeneous Dirichlet at the truncation ends.
    """
    _check_b(b)
    grid = phi.grid
    n = grid.n_points
    inv_dx2 = 1.0 / grid.dx**2
    rhs = phi.values**2

    diag = np.full(n, 2.0 * inv_dx2 + b)
    upper = np.full(n, -inv_dx2)
    lower = np.full(n, -inv_dx2)
    rhs = rhs.copy()
    if grid.is_symmetric:
        for k in (0, n - 1):
            diag[k] = 1.0
            rhs[k] = 0.0
        upper[0] = 0.0
        lower[n - 1] = 0.0
    else:
        upper[0] = -2.0 * inv_dx2
        diag[n - 1] = 1.0
        lower[n - 1] = 0.0
        rhs[n - 1] = 0.0

    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    values = scipy.linalg.solve_banded((1, 1), ab, rhs)
    return RealProfile(grid, values)


def fourier_linear_director(phi: RealProfile, b: float) -> RealProfile:
    """FFT realization of the same lam = 0 Green's function.

    Divides the transform of phi^2 by b + 4 pi^2 xi^2 on the periodic
    even extension of the grid; agrees with the tridiagonal solve on
    smooth decayed inputs.
    """
    _check_b(b)
    grid = phi.grid
    source = phi.values**2
    if grid.is_symmetric:
        ext = source[:-1]
    else:
        ext = np.concatenate([source, source[-2:0:-1]])
    xi = np.fft.fftfreq(ext.shape[0], d=grid.dx)
    rho_ext = np.fft.ifft(np.fft.fft(ext) / (b + 4.0 * np.pi**2 * xi**2)).real
    if grid.is_symmetric:
        values = np.concatenate([rho_ext, rho_ext[:1]])
    else:
        values = rho_ext[: grid.n_points]
    return RealProfile(grid, values)


# ---------------------------------------------------------------------------
# Oracle 2: damped Newton on the full quasilinear residual.


def _quasilinear_residual(rho: np.ndarray, source: np.ndarray, lam: float, b: float,
                          dx: float, symmetric: bool) -> np.ndarray:
    n = rho.shape[0]
    inv_dx = 1.0 / dx
    inv_dx2 = inv_dx * inv_dx
    res = np.zeros(n)
    v = (rho[1:] - rho[:-1]) * inv_dx        # slopes on half-nodes
    flux = v + lam * v**3                    # sigma(rho_x) with alpha = 1
    res[1:-1] = -(flux[1:] - flux[:-1]) * inv_dx + b * rho[1:-1] - source[1:-1]
    if symmetric:
        res[0] = rho[0]
        res[-1] = rho[-1]
    else:
        # even reflection: the ghost flux at -dx/2 is -flux[0]
        res[0] = -2.0 * flux[0] * inv_dx + b * rho[0] - source[0]
        res[-1] = rho[-1]
    return res


def _quasilinear_jacobian_banded(rho: np.ndarray, lam: float, b: float, dx: float,
                                 symmetric: bool) -> np.ndarray:
    n = rho.shape[0]
    inv_dx2 = 1.0 / dx**2
    v = (rho[1:] - rho[:-1]) / dx
    g = (1.0 + 3.0 * lam * v**2) * inv_dx2   # d(flux)/d(rho jump) / dx
    diag = np.zeros(n)
    upper = np.zeros(n)
    lower = np.zeros(n)
    diag[1:-1] = g[1:] + g[:-1] + b
    upper[1:-1] = -g[1:]
    lower[1:-1] = -g[:-1]
    if symmetric:
        diag[0] = 1.0
        diag[-1] = 1.0
    else:
        diag[0] = 2.0 * g[0] + b
        upper[0] = -2.0 * g[0]
        diag[-1] = 1.0
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return ab


def oracle_newton_director(
    phi: RealProfile,
    params: Params,
    *,
    initial: RealProfile | None = None,
    tol: float = 1e-10,
    max_iters: int = 100,
) -> RealProfile:
    """Damped Newton solve of the quasilinear director boundary problem.

    Starts from the lam = 0 linear solve unless an initial iterate is
    supplied (time steppers warm-start from the previous solution).
    """
    grid = phi.grid
    source = phi.values**2
    sym = grid.is_symmetric
    if initial is None:
        rho = oracle_linear_director(phi, params.b).values.copy()
    else:
        rho = initial.values.copy()
    res = _quasilinear_residual(rho, source, params.lam, params.b, grid.dx, sym)
    res_norm = float(np.max(np.abs(res)))
    eps = float(np.finfo(float).eps)
    for _ in range(max_iters):
        # the flux-form residual is amplified by 1/dx^2, so its roundoff
        # floor scales the same way; an absolute target below that floor
        # is unreachable on fine grids
        floor = 16.0 * eps * (2.0 / grid.dx**2 + params.b) * max(
            1.0, float(np.max(np.abs(rho)))
        )
        if res_norm <= max(tol, floor):
            return RealProfile(grid, rho)
        ab = _quasilinear_jacobian_banded(rho, params.lam, params.b, grid.dx, sym)
        step = scipy.linalg.solve_banded((1, 1), ab, res)
        damping = 1.0
        for _ in range(40):
            trial = rho - damping * step
            trial_res = _quasilinear_residual(
                trial, source, params.lam, params.b, grid.dx, sym
            )
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm:
                break
            damping *= 0.5
        rho, res, res_norm = trial, trial_res, trial_norm
    floor = 16.0 * eps * (2.0 / grid.dx**2 + params.b) * max(
        1.0, float(np.max(np.abs(rho)))
    )
    if res_norm <= max(tol, floor):
        return RealProfile(grid, rho)
    raise NewtonDivergence(
        f"director Newton stalled at residual {res_norm:.3e} after {max_iters} iterations"
    )
