"""Uniform 1-D grids, sampled field profiles, quadrature, and norms.

Steady problems live on a half line [0, L] (profiles are radial/even);
time evolution lives on a symmetric interval [-L, L] with x = 0 on a
node.  Half-line integrals of even integrands are doubled explicitly by
callers -- none of the quadrature helpers apply a hidden factor of two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroProfile

HALF_LINE = "half_line_from_0"
SYMMETRIC = "symmetric_about_0"


@dataclass(frozen=True)
class Grid:
    """Uniform mesh with n_points nodes spaced dx apart.

    origin_mode selects the embedding: HALF_LINE puts x[0] = 0,
    SYMMETRIC centres the mesh on x = 0 (odd n_points so the origin is
    a node).
    """

    n_points: int
    dx: float
    origin_mode: str = HALF_LINE

    def __post_init__(self) -> None:
        if self.n_points < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if self.origin_mode not in (HALF_LINE, SYMMETRIC):
            raise ValueError(f"unknown origin_mode {self.origin_mode!r}")
        if self.origin_mode == SYMMETRIC and self.n_points % 2 == 0:
            raise ValueError("symmetric grids need an odd n_points")

    @classmethod
    def half_line(cls, n_points: int, dx: float) -> "Grid":
        return cls(n_points, dx, HALF_LINE)

    @classmethod
    def symmetric(cls, n_points: int, dx: float) -> "Grid":
        return cls(n_points, dx, SYMMETRIC)

    @property
    def length(self) -> float:
        return (self.n_points - 1) * self.dx

    @property
    def is_symmetric(self) -> bool:
        return self.origin_mode == SYMMETRIC

    @property
    def x(self) -> np.ndarray:
        idx = np.arange(self.n_points, dtype=float)
        if self.is_symmetric:
            idx -= (self.n_points - 1) // 2
        return idx * self.dx


def _check_values(grid: Grid, values: np.ndarray) -> None:
    if values.shape != (grid.n_points,):
        raise ValueError(
            f"profile has {values.shape[0]} samples, grid has {grid.n_points} nodes"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("profile contains non-finite samples")


@dataclass(frozen=True)
class RealProfile:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        _check_values(self.grid, values)

    @classmethod
    def zeros(cls, grid: Grid) -> "RealProfile":
        return cls(grid, np.zeros(grid.n_points))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "RealProfile":
        return cls(grid, np.asarray(fn(grid.x), dtype=np.float64))


@dataclass(frozen=True)
class ComplexProfile:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        object.__setattr__(self, "values", values)
        _check_values(self.grid, values)

    @classmethod
    def from_real(cls, profile: RealProfile) -> "ComplexProfile":
        return cls(profile.grid, profile.values.astype(np.complex128))


Profile = RealProfile | ComplexProfile


@dataclass(frozen=True)
class Params:
    """Physical constants of the coupled beam/director system.

    lam is the cubic elastic coefficient (lam >= 0); a is the cubic
    Schroedinger coefficient and alpha the linear elastic one.  Standing
    wave computations fix a = -1 (attractive case) and alpha = 1.
    """

    H: float
    mu: float
    lam: float = 0.0
    b: float = 1.0
    a: float = -1.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if not self.b > 0:
            raise ValueError("b must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def lambda0(self) -> float:
        """First eigenvalue of -d_xx + H^2 x^2 (Gaussian ground mode)."""
        return abs(self.H)


@dataclass(frozen=True)
class NormSet:
    l2_sq: float
    l4_4: float
    xa_sq: float


def integrate_trapezoid(f: RealProfile) -> float:
    """Trapezoid rule over the profile's own grid (no doubling)."""
    return float(np.trapezoid(f.values, dx=f.grid.dx))


def derivative(f: Profile) -> Profile:
    """Central differences interior, second-order one-sided at the ends."""
    dvals = np.gradient(f.values, f.grid.dx, edge_order=2)
    if np.iscomplexobj(f.values):
        return ComplexProfile(f.grid, dvals)
    return RealProfile(f.grid, dvals)


def norms(f: Profile, H: float) -> NormSet:
    """L^2 and L^4 powers plus the gradient-and-moment energy norm.

    xa_sq = int |f_x|^2 + H^2 int x^2 |f|^2, with f_x by the same
    differences as derivative().  Integrals run over the profile's grid
    only; callers double half-line results themselves.
    """
    dx = f.grid.dx
    absq = np.abs(f.values) ** 2
    fx = np.gradient(f.values, dx, edge_order=2)
    l2_sq = float(np.trapezoid(absq, dx=dx))
    l4_4 = float(np.trapezoid(absq**2, dx=dx))
    xa_sq = float(
        np.trapezoid(np.abs(fx) ** 2, dx=dx)
        + H * H * np.trapezoid(f.grid.x**2 * absq, dx=dx)
    )
    return NormSet(l2_sq=l2_sq, l4_4=l4_4, xa_sq=xa_sq)


def l2_distance(f: Profile, g: Profile) -> float:
    if f.grid != g.grid:
        raise ValueError("profiles live on different grids")
    diff = np.abs(f.values - g.values) ** 2
    return float(np.sqrt(np.trapezoid(diff, dx=f.grid.dx)))


def relative_l2_error(f: Profile, ref: Profile) -> float:
    denom = np.sqrt(np.trapezoid(np.abs(ref.values) ** 2, dx=ref.grid.dx))
    if denom == 0.0:
        raise ZeroProfile("reference profile is identically zero")
    return l2_distance(f, ref) / float(denom)


def reflect_even(f: Profile) -> Profile:
    """Even extension of a half-line profile onto the symmetric grid."""
    if f.grid.is_symmetric:
        return f
    sym = Grid.symmetric(2 * f.grid.n_points - 1, f.grid.dx)
    values = np.concatenate([f.values[:0:-1], f.values])
    if np.iscomplexobj(f.values):
        return ComplexProfile(sym, values)
    return RealProfile(sym, values)


# ---------------------------------------------------------------------------
# CSV serialization: one node per line, >= 15 significant digits.

def save_profile(f: Profile, path) -> None:
    x = f.grid.x
    with open(path, "w", encoding="utf-8") as fh:
        if np.iscomplexobj(f.values):
            fh.write("x,re,im\n")
            for xi, vi in zip(x, f.values):
                fh.write(f"{xi:.17g},{vi.real:.17g},{vi.imag:.17g}\n")
        else:
            fh.write("x,value\n")
            for xi, vi in zip(x, f.values):
                fh.write(f"{xi:.17g},{vi:.17g}\n")


def _grid_from_x(x: np.ndarray) -> Grid:
    # full-span estimate: differencing adjacent nodes loses an ulp
    dx = float((x[-1] - x[0]) / (len(x) - 1))
    mode = SYMMETRIC if x[0] < 0 else HALF_LINE
    return Grid(len(x), dx, mode)


def load_profile(path) -> Profile:
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    x = np.atleast_1d(data["x"])
    grid = _grid_from_x(x)
    if names == ("x", "re", "im"):
        return ComplexProfile(grid, np.atleast_1d(data["re"]) + 1j * np.atleast_1d(data["im"]))
    if names == ("x", "value"):
        return RealProfile(grid, np.atleast_1d(data["value"]))
    raise ValueError(f"unrecognized profile header {names} in {path}")
