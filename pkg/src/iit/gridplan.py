"""Derives commensurate, overflow-safe grids from physical run parameters.

Shift strengths must be integer multiples of the spacing ratio for the exact
permutation dynamics, and every axis must hold the full support (amplitudes
above the 1e-14 dust threshold) of its states both before and after the
shifts. This module picks spacings and spans satisfying both, and records
the derivation so runs can print it.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .errors import ConfigError
from .grids import Grid, make_grid

# Target amplitude level treated as the edge of a Gaussian's support when
# sizing grids; two orders below the 1e-14 overflow threshold for headroom.
_PAD_AMPLITUDE = 1e-16

PROFILES = {"compact": 0.25, "full": 0.125}


def resolve_profile(explicit: str | None = None) -> str:
    """Resolution profile precedence: explicit value, then IIT_PROFILE, then
    "compact"."""
    if explicit is not None:
        if explicit not in PROFILES:
            raise ConfigError(
                f"unknown profile {explicit!r}; expected one of {sorted(PROFILES)}"
            )
        return explicit
    env = os.environ.get("IIT_PROFILE")
    if env:
        if env not in PROFILES:
            raise ConfigError(
                f"IIT_PROFILE={env!r} is not a known profile;"
                f" expected one of {sorted(PROFILES)}"
            )
        return env
    return "compact"


def gaussian_support_radius(density_variance: float, amplitude: float = _PAD_AMPLITUDE) -> float:
    """Half-width beyond which a unit-norm Gaussian amplitude stays below
    `amplitude`."""
    v = density_variance
    val = 4.0 * v * (-math.log(amplitude) - 0.25 * math.log(2.0 * math.pi * v))
    return math.sqrt(max(val, 0.0))


@dataclass(frozen=True)
class GridPlan:
    axis1: Grid
    axis2: Grid
    axis3: Grid
    r12: int
    r23: int
    lines: tuple[str, ...]

    @property
    def grids(self) -> tuple[Grid, Grid, Grid]:
        return (self.axis1, self.axis2, self.axis3)


def _snapped_grid(lo: float, hi: float, dq: float) -> Grid:
    k_lo = math.floor(lo / dq)
    k_hi = math.ceil(hi / dq)
    if k_hi - k_lo < 8:
        pad = (8 - (k_hi - k_lo) + 1) // 2
        k_lo -= pad
        k_hi += pad
    return make_grid(k_lo * dq, k_hi * dq, k_hi - k_lo + 1)


def plan_grids(
    psi_hull: tuple[float, float],
    phi0_mean: float,
    phi0_density_variance: float,
    chi0_density_variance: float,
    d12: float,
    c23: float,
    profile: str = "compact",
) -> GridPlan:
    """Choose the three grids for a run.

    psi_hull is the interval containing both first-particle supports. The
    middle spacing comes from the profile; the first-axis spacing is the
    nearest value making d12 * dq1 / dq2 an integer, and the third-axis
    spacing the nearest making c23 * dq2 / dq3 an integer. Spans cover each
    Gaussian's 1e-16 amplitude radius plus the largest shift it can receive.
    """
    if profile not in PROFILES:
        raise ConfigError(
            f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}"
        )
    dq2 = PROFILES[profile]
    lines = [f"profile {profile}: base spacing dq2 = {dq2}"]

    if d12 == 0.0:
        r12, dq1 = 0, dq2
        lines.append("d12 = 0: axis-1 spacing copies dq2, no middle shift")
    else:
        r12 = max(1, round(abs(d12)))
        if d12 < 0:
            r12 = -r12
        dq1 = r12 * dq2 / d12
        lines.append(
            f"r12 = d12*dq1/dq2 = {r12} with dq1 = {dq1:.12g} (d12 = {d12:.12g})"
        )

    q1_lo, q1_hi = psi_hull
    grid1 = _snapped_grid(q1_lo - 2 * dq1, q1_hi + 2 * dq1, dq1)

    rad2 = gaussian_support_radius(phi0_density_variance)
    shift2_lo = min(d12 * q1_lo, d12 * q1_hi, 0.0)
    shift2_hi = max(d12 * q1_lo, d12 * q1_hi, 0.0)
    lo2 = phi0_mean - rad2 + shift2_lo
    hi2 = phi0_mean + rad2 + shift2_hi
    grid2 = _snapped_grid(lo2, hi2, dq2)
    lines.append(
        f"axis 2 spans [{grid2.min:g}, {grid2.max:g}]: carrier radius {rad2:.3g}"
        f" plus shift range [{shift2_lo:g}, {shift2_hi:g}]"
    )

    if c23 == 0.0:
        r23, dq3 = 0, dq2
        lines.append("c23 = 0: axis-3 spacing copies dq2, no far shift")
    else:
        r23 = max(1, round(abs(c23)))
        if c23 < 0:
            r23 = -r23
        dq3 = c23 * dq2 / r23
        lines.append(
            f"r23 = c23*dq2/dq3 = {r23} with dq3 = {dq3:.12g} (c23 = {c23:.12g})"
        )

    rad3 = gaussian_support_radius(chi0_density_variance)
    shift3_lo = min(c23 * grid2.min, c23 * grid2.max, 0.0)
    shift3_hi = max(c23 * grid2.min, c23 * grid2.max, 0.0)
    grid3 = _snapped_grid(-rad3 + shift3_lo, rad3 + shift3_hi, dq3)
    lines.append(
        f"axis 3 spans [{grid3.min:g}, {grid3.max:g}]: carrier radius {rad3:.3g}"
        f" plus shift range [{shift3_lo:g}, {shift3_hi:g}]"
    )
    lines.append(
        f"points per axis: {grid1.n} x {grid2.n} x {grid3.n}"
    )
    return GridPlan(grid1, grid2, grid3, r12, r23, tuple(lines))
