"""Time integration of the coupled beam/director dynamics.

The beam channel

    i u_t + u_xx = -rho u + a |u|^2 u + H^2 x^2 u

is advanced by a split step: a pointwise exact phase rotation for the
local terms (rho - a |u|^2) wrapped symmetrically around one
Crank-Nicolson step of the linear part u_xx - H^2 x^2 u with Dirichlet
ends.  The rotation preserves |u| pointwise and Crank-Nicolson is
unitary, so the discrete beam mass is conserved to solver roundoff.

The director channel (semilinear case only, lam = 0)

    rho_tt = alpha rho_xx - b rho + |u|^2

uses an explicit kick-drift-kick leapfrog under the usual CFL bound.
Coupled runs interleave the two with half wave steps around a full
beam step.  Quasi-static runs drop the wave channel entirely and
re-solve the elliptic director problem from |u|^2 before every beam
step, which is the regime the stability experiment probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .director import oracle_linear_director, oracle_newton_director
from .errors import CflViolation, DomainTooSmall, LinearSolveFailure
from .grid import (
    ComplexProfile,
    Grid,
    Params,
    RealProfile,
    norms,
    reflect_even,
)

__all__ = [
    "EvolutionState",
    "ConservedLog",
    "SupportSpec",
    "StabilityResult",
    "nls_step",
    "wave_step",
    "evolve_coupled",
    "evolve_quasistatic",
    "time_energy",
    "orbital_distance",
    "orbital_distance_scan",
    "optimal_phase",
    "perturbation_bump",
    "stability_experiment",
    "exterior_mass",
    "fit_growth_envelope",
    "cfl_limit",
]


@dataclass(frozen=True)
class EvolutionState:
    t: float
    u: ComplexProfile
    rho: RealProfile
    rho_t: RealProfile

    def __post_init__(self) -> None:
        if not self.u.grid.is_symmetric:
            raise ValueError("evolution runs on symmetric grids")
        if self.u.grid != self.rho.grid or self.u.grid != self.rho_t.grid:
            raise ValueError("state fields live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid


@dataclass
class ConservedLog:
    times: list = field(default_factory=list)
    mass_series: list = field(default_factory=list)
    energy_series: list = field(default_factory=list)

    def append(self, t: float, mass: float, energy: float) -> None:
        self.times.append(t)
        self.mass_series.append(mass)
        self.energy_series.append(energy)


@dataclass(frozen=True)
class SupportSpec:
    """Initial support (-theta, theta) and the inflation radius delta."""

    theta: float
    delta: float

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


def cfl_limit(grid: Grid, alpha: float) -> float:
    return 0.9 * grid.dx / np.sqrt(alpha)


# ---------------------------------------------------------------------------
# Beam channel.

_CN_CACHE: dict = {}


def _cn_operators(grid: Grid, H: float, dt: float):
    """Banded Crank-Nicolson factors for u_t = i (u_xx - H^2 x^2 u)."""
    key = (grid.n_points, grid.dx, grid.origin_mode, H, dt)
    hit = _CN_CACHE.get(key)
    if hit is not None:
        return hit
    n = grid.n_points
    inv_dx2 = 1.0 / grid.dx**2
    x = grid.x
    diag = -2.0 * inv_dx2 - H * H * x**2
    off = inv_dx2
    z = 0.5j * dt
    # interior system; Dirichlet ends are pinned to zero
    m = n - 2
    ab = np.zeros((3, m), dtype=np.complex128)
    ab[0, 1:] = -z * off
    ab[1, :] = 1.0 - z * diag[1:-1]
    ab[2, :-1] = -z * off
    rhs_diag = 1.0 + z * diag[1:-1]
    rhs_off = z * off
    _CN_CACHE[key] = (ab, rhs_diag, rhs_off)
    if len(_CN_CACHE) > 32:
        _CN_CACHE.pop(next(iter(_CN_CACHE)))
    return _CN_CACHE[key]


def _cn_apply(values: np.ndarray, grid: Grid, H: float, dt: float) -> np.ndarray:
    ab, rhs_diag, rhs_off = _cn_operators(grid, H, dt)
    inner = values[1:-1]
    rhs = rhs_diag * inner
    rhs[1:] += rhs_off * inner[:-1]
    rhs[:-1] += rhs_off * inner[1:]
    rhs[0] += rhs_off * values[0]
    rhs[-1] += rhs_off * values[-1]
    try:
        solved = scipy.linalg.solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - dt > 0 keeps this regular
        raise LinearSolveFailure(str(exc)) from exc
    out = values.copy()
    out[1:-1] = solved
    return out


def _phase_rotation(u_vals: np.ndarray, rho_vals: np.ndarray, a: float, tau: float):
    return u_vals * np.exp(1j * tau * (rho_vals - a * np.abs(u_vals) ** 2))


def _solve_director_for(u_vals: np.ndarray, grid: Grid, params: Params,
                        guess: RealProfile | None = None) -> RealProfile:
    amplitude = RealProfile(grid, np.abs(u_vals))
    if params.lam == 0.0:
        return oracle_linear_director(amplitude, params.b)
    return oracle_newton_director(amplitude, params, initial=guess)


def nls_step(
    state: EvolutionState,
    dt: float,
    params: Params,
    potential_mode: str = "coupled",
    *,
    director_guess: RealProfile | None = None,
) -> EvolutionState:
    """One beam step; rho and rho_t are carried through untouched.

    potential_mode "coupled" uses the state's rho as the potential;
    "quasistatic" first re-solves the elliptic director problem from
    the current |u|^2 and evolves against that slaved potential.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if potential_mode not in ("coupled", "quasistatic"):
        raise ValueError(f"unknown potential_mode {potential_mode!r}")
    grid = state.grid
    if potential_mode == "quasistatic":
        rho = _solve_director_for(state.u.values, grid, params, director_guess)
    else:
        rho = state.rho
    u_vals = _phase_rotation(state.u.values, rho.values, params.a, 0.5 * dt)
    u_vals = _cn_apply(u_vals, grid, params.H, dt)
    u_vals = _phase_rotation(u_vals, rho.values, params.a, 0.5 * dt)
    new_rho = rho if potential_mode == "quasistatic" else state.rho
    return EvolutionState(
        t=state.t + dt,
        u=ComplexProfile(grid, u_vals),
        rho=new_rho,
        rho_t=state.rho_t,
    )


# ---------------------------------------------------------------------------
# Director wave channel (lam = 0).


def _wave_accel(rho: np.ndarray, u_sq: np.ndarray, alpha: float, b: float,
                inv_dx2: float) -> np.ndarray:
    acc = np.zeros_like(rho)
    acc[1:-1] = (
        alpha * (rho[2:] - 2.0 * rho[1:-1] + rho[:-2]) * inv_dx2
        - b * rho[1:-1]
        + u_sq[1:-1]
    )
    return acc


def wave_step(state: EvolutionState, dt: float, params: Params) -> EvolutionState:
    """Kick-drift-kick leapfrog for rho_tt = alpha rho_xx - b rho + |u|^2."""
    if params.lam != 0.0:
        raise ValueError("wave channel is restricted to the semilinear case lam = 0")
    if not dt > 0:
        raise ValueError("dt must be positive")
    limit = cfl_limit(state.grid, params.alpha)
    if dt > limit:
        raise CflViolation(f"dt={dt} exceeds CFL bound {limit:.6g}")
    grid = state.grid
    inv_dx2 = 1.0 / grid.dx**2
    u_sq = np.abs(state.u.values) ** 2
    rho = state.rho.values.copy()
    w = state.rho_t.values.copy()
    # end nodes are never updated: they hold their initial (decayed)
    # values, which is the Dirichlet truncation without manufacturing a
    # kink when the data carries a small tail
    w += 0.5 * dt * _wave_accel(rho, u_sq, params.alpha, params.b, inv_dx2)
    rho[1:-1] += dt * w[1:-1]
    w += 0.5 * dt * _wave_accel(rho, u_sq, params.alpha, params.b, inv_dx2)
    return EvolutionState(
        t=state.t + dt,
        u=state.u,
        rho=RealProfile(grid, rho),
        rho_t=RealProfile(grid, w),
    )


def time_energy(state: EvolutionState, params: Params) -> float:
    """Conserved energy of the coupled flow, evaluated literally.

    Gradient terms use the staggered (forward-difference) Dirichlet
    form, which is the quadratic form of the 3-point Laplacian both
    steppers discretize with; that makes this the invariant the scheme
    actually conserves, so drift measures time-integration error only.
    Note the beam gradient enters with coefficient 1 here while the
    stationary functional in diagnostics uses 1/2; the two conventions
    are intentional and must not be reconciled against each other.
    """
    dx = state.grid.dx
    x = state.grid.x
    rho = state.rho.values
    rho_t = state.rho_t.values
    rho_x = np.diff(rho) / dx
    u_abs2 = np.abs(state.u.values) ** 2
    u_x = np.diff(state.u.values) / dx

    def integral(f):
        return float(np.trapezoid(f, dx=dx))

    def staggered_sum(f):
        return float(np.sum(f) * dx)

    return (
        0.5 * integral(rho_t**2)
        + 0.5 * params.alpha * staggered_sum(rho_x**2)
        + 0.25 * params.lam * staggered_sum(rho_x**4)
        + 0.5 * params.b * integral(rho**2)
        - integral(rho * u_abs2)
        + staggered_sum(np.abs(u_x) ** 2)
        + 0.5 * params.a * integral(u_abs2**2)
        + params.H**2 * integral(x**2 * u_abs2)
    )


def beam_mass(state: EvolutionState) -> float:
    return float(np.trapezoid(np.abs(state.u.values) ** 2, dx=state.grid.dx))


def evolve_coupled(
    state0: EvolutionState,
    T: float,
    dt: float,
    params: Params,
    *,
    sample_stride: int = 20,
) -> tuple[list[EvolutionState], ConservedLog]:
    """Strang coupling: half wave, full beam, half wave, per step.

    Samples (including the initial state) are retained every
    sample_stride steps plus the final state; the conserved log records
    mass and the literal coupled energy at every sample.
    """
    if params.lam != 0.0:
        raise ValueError("coupled evolution is restricted to lam = 0")
    limit = cfl_limit(state0.grid, params.alpha)
    if dt > limit:
        raise CflViolation(f"dt={dt} exceeds CFL bound {limit:.6g}")
    n_steps = int(round(T / dt))
    log = ConservedLog()
    samples = [state0]
    log.append(state0.t, beam_mass(state0), time_energy(state0, params))
    state = state0
    for k in range(n_steps):
        state = wave_step(state, 0.5 * dt, params)
        state = nls_step(state, dt, params, "coupled")
        state = wave_step(state, 0.5 * dt, params)
        # the three substeps cover one physical step of size dt
        state = replace(state, t=state0.t + (k + 1) * dt)
        if (k + 1) % sample_stride == 0 or k == n_steps - 1:
            samples.append(state)
            log.append(state.t, beam_mass(state), time_energy(state, params))
    return samples, log


def evolve_quasistatic(
    u0: ComplexProfile,
    T: float,
    dt: float,
    params: Params,
    *,
    sample_stride: int = 20,
    on_sample=None,
) -> list[EvolutionState]:
    """Beam evolution with the director slaved to |u|^2 at every step."""
    grid = u0.grid
    rho = _solve_director_for(u0.values, grid, params)
    zero = RealProfile.zeros(grid)
    state = EvolutionState(t=0.0, u=u0, rho=rho, rho_t=zero)
    samples = [state]
    if on_sample is not None:
        on_sample(state)
    n_steps = int(round(T / dt))
    for k in range(n_steps):
        state = nls_step(state, dt, params, "quasistatic", director_guess=state.rho)
        if (k + 1) % sample_stride == 0 or k == n_steps - 1:
            samples.append(state)
            if on_sample is not None:
                on_sample(state)
    return samples


# ---------------------------------------------------------------------------
# Orbital distance and the stability experiment.


def _as_symmetric_real(u, grid: Grid) -> RealProfile:
    prof = u.u if hasattr(u, "u") else u
    if not prof.grid.is_symmetric:
        prof = reflect_even(prof)
    if prof.grid != grid:
        raise ValueError("standing-wave grid does not match the field grid")
    return prof


def optimal_phase(psi: ComplexProfile, u_ref: RealProfile) -> float:
    """Phase of the L^2 pairing <psi, u>; closed-form alignment angle."""
    inner = np.trapezoid(psi.values * u_ref.values, dx=psi.grid.dx)
    return float(np.angle(inner))


def orbital_distance(psi: ComplexProfile, sw, H: float) -> float:
    """Energy-norm distance of psi from the phase orbit of a standing wave.

    The minimizing angle is taken in closed form from the L^2 pairing
    and the distance is then measured in the gradient-and-moment norm.
    Accepts a StandingWave or a bare real profile; half-line profiles
    are reflected first.
    """
    u_ref = _as_symmetric_real(sw, psi.grid)
    theta = optimal_phase(psi, u_ref)
    diff = ComplexProfile(psi.grid, psi.values - np.exp(1j * theta) * u_ref.values)
    return float(np.sqrt(norms(diff, H).xa_sq))


def orbital_distance_scan(psi: ComplexProfile, sw, H: float, n_theta: int = 64) -> float:
    """Brute-force phase scan (with one refinement pass) of the same distance."""
    u_ref = _as_symmetric_real(sw, psi.grid)

    def dist(theta: float) -> float:
        diff = ComplexProfile(psi.grid, psi.values - np.exp(1j * theta) * u_ref.values)
        return float(np.sqrt(norms(diff, H).xa_sq))

    thetas = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    coarse = [dist(t) for t in thetas]
    best = int(np.argmin(coarse))
    span = 2.0 * np.pi / n_theta
    fine = np.linspace(thetas[best] - span, thetas[best] + span, n_theta)
    return min(dist(t) for t in fine)


def perturbation_bump(grid: Grid, H: float, width: float = 0.5) -> RealProfile:
    """Gaussian bump at the origin, normalized to unit energy norm."""
    raw = RealProfile(grid, np.exp(-(grid.x**2) / (2.0 * width**2)))
    scale = np.sqrt(norms(raw, H).xa_sq)
    return RealProfile(grid, raw.values / scale)


@dataclass(frozen=True)
class StabilityResult:
    times: np.ndarray
    distances: np.ndarray
    rho_h1_devs: np.ndarray
    phases: np.ndarray
    initial_distance: float
    sup_distance: float
    phase_slope: float


def _h1_norm(values: np.ndarray, dx: float) -> float:
    vx = np.gradient(values, dx, edge_order=2)
    return float(np.sqrt(np.trapezoid(values**2 + vx**2, dx=dx)))


def stability_experiment(
    sw,
    perturbation_size: float,
    T: float,
    dt: float,
    *,
    sample_stride: int = 20,
) -> StabilityResult:
    """Quasi-static evolution of a multiplicatively perturbed standing wave.

    The initial datum is u * (1 + delta * bump) with the documented
    unit-energy-norm Gaussian bump, rescaled back onto the standing
    wave's mass sphere (stability holds within the fixed-mass orbit
    family; an off-shell datum precesses at a neighbouring multiplier
    instead).  Records the orbital distance, the H^1 deviation of the
    slaved director from the standing one, and the alignment phase at
    every sample; the phase slope comes from an unwrapped linear fit.
    """
    params = sw.params
    u_half = sw.u
    u_ref = reflect_even(u_half)
    grid = u_ref.grid
    xa_ref = np.sqrt(norms(u_ref, params.H).xa_sq)
    if perturbation_size > 0.1 * xa_ref:
        raise ValueError("perturbation_size must stay below 0.1 of the wave's norm")
    bump = perturbation_bump(grid, params.H)
    perturbed = u_ref.values * (1.0 + perturbation_size * bump.values)
    if perturbation_size != 0.0:
        mass_ref = np.trapezoid(u_ref.values**2, dx=grid.dx)
        mass_new = np.trapezoid(perturbed**2, dx=grid.dx)
        perturbed = perturbed * np.sqrt(mass_ref / mass_new)
    u0 = ComplexProfile(grid, perturbed)
    rho_ref = reflect_even(sw.rho)

    times, distances, rho_devs, phases = [], [], [], []

    def record(state: EvolutionState) -> None:
        times.append(state.t)
        distances.append(orbital_distance(state.u, u_ref, params.H))
        rho_devs.append(_h1_norm(state.rho.values - rho_ref.values, grid.dx))
        phases.append(optimal_phase(state.u, u_ref))

    evolve_quasistatic(
        u0, T, dt, params, sample_stride=sample_stride, on_sample=record
    )
    times_arr = np.asarray(times)
    phases_arr = np.unwrap(np.asarray(phases))
    slope = float(np.polyfit(times_arr, phases_arr, 1)[0])
    distances_arr = np.asarray(distances)
    return StabilityResult(
        times=times_arr,
        distances=distances_arr,
        rho_h1_devs=np.asarray(rho_devs),
        phases=phases_arr,
        initial_distance=float(distances_arr[0]),
        sup_distance=float(np.max(distances_arr)),
        phase_slope=slope,
    )


# ---------------------------------------------------------------------------
# Compact-support experiment.


def exterior_mass(state: EvolutionState, spec: SupportSpec) -> float:
    """Field density integrated outside the inflated support region.

    Density is |u|^2 + rho^2 + rho_x^2 + rho_t^2; the region excluded
    is (-theta - delta, theta + delta).
    """
    grid = state.grid
    cutoff = spec.theta + spec.delta
    half_len = grid.length / 2.0
    if half_len <= cutoff:
        raise DomainTooSmall(
            f"grid half-width {half_len} does not extend past theta+delta={cutoff}"
        )
    x = grid.x
    rho_x = np.gradient(state.rho.values, grid.dx, edge_order=2)
    density = (
        np.abs(state.u.values) ** 2
        + state.rho.values**2
        + rho_x**2
        + state.rho_t.values**2
    )
    density = np.where(np.abs(x) >= cutoff, density, 0.0)
    return float(np.trapezoid(density, dx=grid.dx))


def fit_growth_envelope(times, masses) -> tuple[float, float]:
    """Least-squares coefficients (A, B) of m(t) ~ A t^3 + B t^2.

    The exterior mass of compactly supported data starts at zero and is
    bounded by a cubic-plus-quadratic envelope in time; fitting three
    or more samples recovers its coefficients.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(masses, dtype=float)
    if t.shape[0] < 2:
        raise ValueError("need at least two time samples to fit the envelope")
    design = np.column_stack([t**3, t**2])
    coeffs, *_ = np.linalg.lstsq(design, m, rcond=None)
    return float(coeffs[0]), float(coeffs[1])
