"""Uniform 1-D position grids and single-particle wavefunctions.

All states live on explicit uniform grids. Nothing is ever resampled
implicitly: operations on mismatched grids raise GridMismatch. Grid minima
sit on the grid's own lattice (min is an integer multiple of the spacing),
which keeps the index arithmetic of the shift operations exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatch,
    GridTooNarrow,
    InvalidBounds,
    LatticeMisaligned,
    NonPositiveVariance,
    SupportOutsideGrid,
    ZeroNorm,
)

# Amplitudes with modulus at or below this are treated as numerical dust:
# they define the support used by shift overflow checks.
SUPPORT_EPS = 1e-14

# Lattice alignment and commensurability ratios must be integers within this.
LATTICE_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n points from min to max inclusive."""

    min: float
    max: float
    n: int

    @property
    def spacing(self) -> float:
        return (self.max - self.min) / (self.n - 1)

    def points(self) -> np.ndarray:
        return self.min + np.arange(self.n) * self.spacing

    def descriptor(self) -> dict:
        return {"min": self.min, "max": self.max, "n": self.n}


@dataclass(frozen=True)
class SupportSpec:
    """Open interval (lo, hi) on which a compactly supported state lives."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise InvalidBounds(f"support needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)


@dataclass(frozen=True)
class Wavefunction:
    """Complex amplitudes sampled on a Grid.

    The `normalized` flag marks states whose constructor guarantees unit
    norm (within 1e-9); derived states from superpose() are unflagged until
    normalize() is applied.
    """

    grid: Grid
    amplitudes: np.ndarray
    normalized: bool = field(default=False, compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n,):
            raise GridMismatch(
                f"amplitude count {amps.shape} does not match grid n={self.grid.n}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def make_grid(lo: float, hi: float, n: int) -> Grid:
    """Build a uniform grid.

    Requires lo < hi, n >= 9, and lo to be an integer multiple of the
    resulting spacing (within 1e-12), so that shift commensurability checks
    downstream reduce to exact integer arithmetic.
    """
    if not (lo < hi):
        raise InvalidBounds(f"grid needs min < max, got [{lo}, {hi}]")
    if n < 9:
        raise InvalidBounds(f"grid needs at least 9 points, got n={n}")
    grid = Grid(float(lo), float(hi), int(n))
    ratio = grid.min / grid.spacing
    if abs(ratio - round(ratio)) > LATTICE_TOL:
        raise LatticeMisaligned(
            f"grid min {lo} is not on the lattice of spacing {grid.spacing}"
            f" (min/spacing = {ratio})"
        )
    return grid


def grids_equal(a: Grid, b: Grid) -> bool:
    return a.min == b.min and a.max == b.max and a.n == b.n


def _require_same_grid(f: Wavefunction, g: Wavefunction, what: str) -> None:
    if not grids_equal(f.grid, g.grid):
        raise GridMismatch(f"{what}: operands live on different grids")


def gaussian_wf(
    grid: Grid,
    mean: float,
    variance: float,
    convention: str = "density",
) -> Wavefunction:
    """Normalized Gaussian amplitude centered at `mean`.

    Under the default "density" convention `variance` is the variance of the
    probability density |psi|^2, i.e. the amplitude is proportional to
    exp(-(q-mean)^2 / (4 variance)). The "amplitude" convention instead puts
    `variance` in the amplitude exponent, exp(-(q-mean)^2 / (2 variance)),
    which makes the density variance half as large. Raises GridTooNarrow when
    the grid truncates more than 1e-9 of the density mass.
    """
    if variance <= 0:
        raise NonPositiveVariance(f"variance must be positive, got {variance}")
    if convention == "density":
        dens_var = float(variance)
    elif convention == "amplitude":
        dens_var = float(variance) / 2.0
    else:
        raise ValueError(f"unknown gaussian convention {convention!r}")
    sigma = math.sqrt(dens_var)
    lo_mass = 0.5 * math.erfc((mean - grid.min) / (sigma * math.sqrt(2.0)))
    hi_mass = 0.5 * math.erfc((grid.max - mean) / (sigma * math.sqrt(2.0)))
    if lo_mass + hi_mass > 1e-9:
        raise GridTooNarrow(
            f"grid [{grid.min}, {grid.max}] truncates {lo_mass + hi_mass:.3e} of the"
            f" density mass for mean={mean}, variance={variance} ({convention})"
        )
    q = grid.points()
    amps = np.exp(-((q - mean) ** 2) / (4.0 * dens_var)).astype(np.complex128)
    amps /= math.sqrt(np.sum(np.abs(amps) ** 2).real * grid.spacing)
    return Wavefunction(grid, amps, normalized=True)


def bump_wf(grid: Grid, support: SupportSpec) -> Wavefunction:
    """Normalized smooth bump, exactly zero outside the open support interval.

    The profile is exp(-1/(1-t^2)) with t rescaled so t = +-1 at the interval
    endpoints. Zeros outside the interval are bitwise zeros, so states with
    disjoint supports are exactly orthogonal.
    """
    if not (support.lo > grid.min and support.hi < grid.max):
        raise SupportOutsideGrid(
            f"support ({support.lo}, {support.hi}) must lie strictly inside"
            f" the grid [{grid.min}, {grid.max}]"
        )
    q = grid.points()
    t = (q - support.center) / support.half_width
    u = 1.0 - t * t
    amps = np.zeros(grid.n, dtype=np.complex128)
    # exp(-1/u) underflows for u < ~1/745; evaluating only above that keeps
    # the outside (and the underflowed rim) at literal 0.0
    mask = u > 1.0 / 700.0
    amps[mask] = np.exp(-1.0 / u[mask])
    total = np.sum(np.abs(amps) ** 2).real * grid.spacing
    if total <= 1e-24:
        raise ZeroNorm(
            f"support ({support.lo}, {support.hi}) contains no grid point with"
            " positive amplitude"
        )
    amps /= math.sqrt(total)
    return Wavefunction(grid, amps, normalized=True)


def superpose(a: complex, f: Wavefunction, b: complex, g: Wavefunction) -> Wavefunction:
    """a*f + b*g on the shared grid; the result is not flagged normalized."""
    _require_same_grid(f, g, "superpose")
    return Wavefunction(f.grid, a * f.amplitudes + b * g.amplitudes)


def inner(f: Wavefunction, g: Wavefunction) -> complex:
    """Riemann inner product <f|g> = sum conj(f) g * spacing (conjugate-left)."""
    _require_same_grid(f, g, "inner")
    return complex(np.vdot(f.amplitudes, g.amplitudes) * f.grid.spacing)


def norm(f: Wavefunction) -> float:
    return math.sqrt(max(inner(f, f).real, 0.0))


def normalize(f: Wavefunction) -> Wavefunction:
    n = norm(f)
    if n <= 1e-12:
        raise ZeroNorm(f"cannot normalize: norm {n} at or below 1e-12")
    return Wavefunction(f.grid, f.amplitudes / n, normalized=True)


def density(f: Wavefunction) -> np.ndarray:
    return (np.abs(f.amplitudes) ** 2).real


def density_moments(f: Wavefunction) -> tuple[float, float]:
    """Mean and variance of the |f|^2 probability density on the grid."""
    w = density(f) * f.grid.spacing
    total = w.sum()
    if total <= 0:
        raise ZeroNorm("cannot take moments of an all-zero density")
    w = w / total
    q = f.grid.points()
    mean = float(np.sum(q * w))
    var = float(np.sum((q - mean) ** 2 * w))
    return mean, var


def wavefunction_to_json(f: Wavefunction) -> dict:
    return {
        "grid": f.grid.descriptor(),
        "amplitudes": [[float(z.real), float(z.imag)] for z in f.amplitudes],
        "normalized": bool(f.normalized),
    }


def wavefunction_from_json(obj: dict) -> Wavefunction:
    g = obj["grid"]
    grid = make_grid(g["min"], g["max"], g["n"])
    amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
    return Wavefunction(grid, amps, normalized=bool(obj.get("normalized", False)))
