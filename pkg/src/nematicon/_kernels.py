"""JIT-compiled marching kernels for the shooting integrators.

The outward Euler marches dominate the cost of every solve (a single
bisection runs dozens of them over thousands of nodes), so the inner
loops are compiled with numba.  Classification codes: 0 = survived the
whole window, 1 = went negative, 2 = became increasing (or blew past
blowup * start), 3 = the scalar Newton solve for the cubic increment
hit its iteration cap.
"""

import numpy as np
from numba import njit

SURVIVED = 0
WENT_NEGATIVE = 1
BECAME_INCREASING = 2
NEWTON_FAILED = 3

NEWTON_TOL = 1e-13
NEWTON_MAX_ITERS = 50


@njit(cache=True)
def newton_cubic_increment(v_start, rhs, lam):
    """Root of g(v) = v + lam*v^3 = rhs; g is strictly increasing.

    Newton from v_start; the residual target is 1e-13 scaled up by |rhs|
    once that exceeds one (an absolute 1e-13 sits below roundoff for
    large operands).  Returns NaN if the iteration cap is hit.
    """
    if lam == 0.0:
        return rhs
    tol = NEWTON_TOL * max(1.0, abs(rhs))
    v = v_start
    for _ in range(NEWTON_MAX_ITERS):
        f = v + lam * v * v * v - rhs
        if abs(f) <= tol:
            return v
        v -= f / (1.0 + 3.0 * lam * v * v)
    if abs(v + lam * v * v * v - rhs) <= tol:
        return v
    return np.nan


@njit(cache=True)
def march_beam(beta, rho, mu, H, a, dx, blowup_factor, monotonicity_tol):
    """Euler march of u_x = w, w_x = (H^2 x^2 + mu - rho) u + a u^3.

    Starts at u(0) = beta, w(0) = 0; the slope is kicked before each
    drift with the trap potential sampled at the cell midpoint, which
    keeps the discrete bifurcation value of -mu within O(dx^2) of the
    continuum eigenvalue (whole-node sampling displaces it by O(dx),
    more than the finest multiplier gaps the branch sweep resolves).
    Stops at the first node where u drops below zero or starts
    increasing.
    """
    n = rho.shape[0]
    u = np.zeros(n)
    u[0] = beta
    w = 0.0
    kind = SURVIVED
    bad = -1
    for j in range(n - 1):
        x = (j + 0.5) * dx
        w += dx * ((H * H * x * x + mu - rho[j]) * u[j] + a * u[j] ** 3)
        u_next = u[j] + dx * w
        u[j + 1] = u_next
        if u_next < 0.0:
            kind = WENT_NEGATIVE
            bad = j + 1
            break
        if u_next > u[j] + monotonicity_tol or u_next > blowup_factor * beta:
            kind = BECAME_INCREASING
            bad = j + 1
            break
    return u, kind, bad


@njit(cache=True)
def march_director(rho0, source, lam, b, dx, blowup_factor, monotonicity_tol):
    """Outward march of rho_x = v with the implicit cubic v-update.

    The v equation discretizes (v + lam v^3)' = b rho - source, i.e.
    v_{j+1} + lam v_{j+1}^3 = v_j + lam v_j^3 + dx (b rho_j - source_j),
    solved per step by newton_cubic_increment; rho then drifts with the
    fresh slope (kick-then-drift, matching the beam march, so a valid
    start descends strictly from the very first node).  source holds
    phi^2.
    """
    n = source.shape[0]
    rho = np.zeros(n)
    rho[0] = rho0
    v = 0.0
    kind = SURVIVED
    bad = -1
    for j in range(n - 1):
        rhs = v + lam * v * v * v + dx * (b * rho[j] - source[j])
        v = newton_cubic_increment(v, rhs, lam)
        if not np.isfinite(v):
            kind = NEWTON_FAILED
            bad = j + 1
            break
        rho_next = rho[j] + dx * v
        rho[j + 1] = rho_next
        if rho_next < 0.0:
            kind = WENT_NEGATIVE
            bad = j + 1
            break
        if rho_next > rho[j] + monotonicity_tol or rho_next > blowup_factor * rho0:
            kind = BECAME_INCREASING
            bad = j + 1
            break
    return rho, kind, bad
