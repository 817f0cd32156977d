"""Identity residuals and shape measures for computed standing waves.

Every analytic identity a converged pair (u, rho) must satisfy is
evaluated here as a normalized residual: the stationarity energy, the
virial-type balance obtained by weighting the equation with x u, the
multiplier balance from weighting with u, and the distance of the
normalized profile from the Gaussian ground mode of the harmonic trap.
All residuals are normalized by their largest constituent term so that
small-amplitude solutions cannot masquerade as converged.

Integrals are taken over the half-line grid and doubled (profiles are
even); the x-weighted integrands are even as well since rho_x is odd.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroProfile
from .grid import Params, RealProfile

__all__ = [
    "DiagnosticsReport",
    "energy",
    "pohozaev_residual",
    "multiplier_residual",
    "gaussian_shape_error",
    "compute_report",
    "half_height_radius",
]


@dataclass(frozen=True)
class DiagnosticsReport:
    mass: float
    energy: float
    pohozaev_residual: float
    multiplier_residual: float
    lambda0: float
    gaussian_shape_error: float

    def as_dict(self) -> dict:
        return {
            "mass": self.mass,
            "energy": self.energy,
            "pohozaev_residual": self.pohozaev_residual,
            "multiplier_residual": self.multiplier_residual,
            "lambda0": self.lambda0,
            "gaussian_shape_error": self.gaussian_shape_error,
        }


def _half_integral(grid_dx: float, integrand: np.ndarray) -> float:
    return float(np.trapezoid(integrand, dx=grid_dx))


def _full_line_pieces(u: RealProfile, rho: RealProfile) -> dict:
    """Doubled half-line integrals of every elementary term."""
    dx = u.grid.dx
    x = u.grid.x
    uv = u.values
    ux = np.gradient(uv, dx, edge_order=2)
    rho_x = np.gradient(rho.values, dx, edge_order=2)
    return {
        "grad": 2.0 * _half_integral(dx, ux**2),
        "moment": 2.0 * _half_integral(dx, x**2 * uv**2),
        "quartic": 2.0 * _half_integral(dx, uv**4),
        "interaction": 2.0 * _half_integral(dx, rho.values * uv**2),
        "x_rho_x": 2.0 * _half_integral(dx, uv**2 * x * rho_x),
        "mass": 2.0 * _half_integral(dx, uv**2),
    }


def energy(u: RealProfile, rho: RealProfile, H: float) -> float:
    """Stationary energy 1/2|u_x|^2 + 1/2 H^2 x^2 u^2 - 1/4 u^4 - 1/2 rho u^2."""
    p = _full_line_pieces(u, rho)
    return (
        0.5 * p["grad"]
        + 0.5 * H * H * p["moment"]
        - 0.25 * p["quartic"]
        - 0.5 * p["interaction"]
    )


def _normalized(defect: float, terms) -> float:
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(defect) / scale


def pohozaev_residual(u: RealProfile, rho: RealProfile, H: float) -> float:
    """Defect of 2|u_x|^2 - 2 H^2 |x u|^2 - 1/2 u^4 + int u^2 x rho_x = 0.

    rho_x comes from central differences of the solved rho, not from
    the marching slope variable, so the check stays independent of the
    solver path.
    """
    p = _full_line_pieces(u, rho)
    terms = (
        2.0 * p["grad"],
        -2.0 * H * H * p["moment"],
        -0.5 * p["quartic"],
        p["x_rho_x"],
    )
    return _normalized(sum(terms), terms)


def multiplier_residual(u: RealProfile, rho: RealProfile, params: Params) -> float:
    """Defect of |u_x|^2 + H^2 |x u|^2 - int rho u^2 - u^4 + mu |u|^2 = 0."""
    H = params.H
    p = _full_line_pieces(u, rho)
    terms = (
        p["grad"],
        H * H * p["moment"],
        -p["interaction"],
        -p["quartic"],
        params.mu * p["mass"],
    )
    return _normalized(sum(terms), terms)


def gaussian_shape_error(u: RealProfile, H: float) -> float:
    """Relative L^2 distance of u/|u|_2 from the normalized ground Gaussian."""
    dx = u.grid.dx
    u_norm = np.sqrt(_half_integral(dx, u.values**2))
    if u_norm == 0.0:
        raise ZeroProfile("cannot normalize an identically-zero profile")
    gauss = np.exp(-0.5 * abs(H) * u.grid.x**2)
    g_norm = np.sqrt(_half_integral(dx, gauss**2))
    diff = u.values / u_norm - gauss / g_norm
    return float(np.sqrt(_half_integral(dx, diff**2)))


def half_height_radius(profile: RealProfile) -> float:
    """First x where the profile falls to half its origin value.

    Linear interpolation between the bracketing nodes; used to measure
    how concentrated the director angle is.
    """
    vals = profile.values
    target = 0.5 * vals[0]
    if vals[0] <= 0:
        raise ZeroProfile("half-height radius needs a positive origin value")
    below = np.nonzero(vals <= target)[0]
    if below.size == 0:
        return float(profile.grid.x[-1])
    j = int(below[0])
    if j == 0:
        return 0.0
    x = profile.grid.x
    frac = (vals[j - 1] - target) / (vals[j - 1] - vals[j])
    return float(x[j - 1] + frac * (x[j] - x[j - 1]))


def compute_report(wave, attach: bool = True) -> DiagnosticsReport:
    """Fill the full diagnostics block for a computed standing wave."""
    u, rho, params = wave.u, wave.rho, wave.params
    p = _full_line_pieces(u, rho)
    report = DiagnosticsReport(
        mass=p["mass"],
        energy=energy(u, rho, params.H),
        pohozaev_residual=pohozaev_residual(u, rho, params.H),
        multiplier_residual=multiplier_residual(u, rho, params),
        lambda0=params.lambda0,
        gaussian_shape_error=gaussian_shape_error(u, params.H),
    )
    if attach:
        wave.diagnostics = report
    return report
