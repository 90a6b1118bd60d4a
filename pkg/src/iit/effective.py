"""Factorized effective states: weight-averaged shifted carriers.

After the exact transport, each branch of the entangled state carries a
target factor that still depends on the source coordinate. The effective
description replaces it with a single state per branch, the carrier shifted
by d*q and averaged over the branch's source density. The branch overlaps of
these effective states (gamma2 on the middle particle, gamma3 on the far one)
are the quantities the measurement formulas consume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadCoefficients,
    GridMismatch,
    IncommensurateShift,
    NonOrthogonalPsi,
    UnnormalizedWeight,
)
from .grids import (
    LATTICE_TOL,
    Grid,
    Wavefunction,
    density,
    grids_equal,
    inner,
    norm,
)
from .states import TensorState


@dataclass(frozen=True)
class EffectivePair:
    """Effective branch states on a shared grid, with raw overlap and norms.

    `gamma` is the raw overlap <plus|minus> of the states exactly as
    constructed; the norms are measured, never assumed to be 1. For the pair
    built on the far axis, `weight_integral_deviation` records how far the
    literal source-density integrals were from 1 (plus branch, minus branch).
    """

    plus: Wavefunction
    minus: Wavefunction
    gamma: complex
    norm_plus: float
    norm_minus: float
    weight_integral_deviation: tuple[float, float] | None = None

    @property
    def gamma_normalized(self) -> complex:
        return self.gamma / (self.norm_plus * self.norm_minus)


def weighted_shift(
    weight: np.ndarray, src: Grid, carrier: Wavefunction, strength: float
) -> Wavefunction:
    """Average of shifted carrier copies: sum_i w_i dq_src carrier(q - d q_i).

    The weight is a probability density on `src` (sum * dq = 1 within 1e-6,
    renormalized before use; beyond that raises UnnormalizedWeight). The shift
    must be commensurate: strength * dq_src / dq_tgt an integer within 1e-12.
    Carrier samples shifted off the target grid contribute zero, so the output
    norm never exceeds the carrier norm (Young bound).
    """
    w = np.asarray(weight, dtype=np.float64)
    if w.shape != (src.n,):
        raise GridMismatch(f"weight length {w.shape} != source grid n={src.n}")
    total = float(w.sum() * src.spacing)
    if abs(total - 1.0) > 1e-6:
        raise UnnormalizedWeight(
            f"weight density integrates to {total}, off 1 by more than 1e-6"
        )
    w = w / total

    tgt = carrier.grid
    r = strength * src.spacing / tgt.spacing
    if abs(r - round(r)) > LATTICE_TOL:
        raise IncommensurateShift(
            f"strength {strength} gives shift ratio {r} (dq_src={src.spacing},"
            f" dq_tgt={tgt.spacing}); not an integer within 1e-12"
        )
    r = int(round(r))
    n0 = round(src.min / src.spacing)

    out = np.zeros(tgt.n, dtype=np.complex128)
    carr = carrier.amplitudes
    n_tgt = tgt.n
    for i in range(src.n):
        wi = w[i] * src.spacing
        if wi == 0.0:
            continue
        s = r * (n0 + i)
        if abs(s) >= n_tgt:
            continue
        if s >= 0:
            out[s:] += wi * carr[: n_tgt - s]
        else:
            out[: n_tgt + s] += wi * carr[-s:]
    return Wavefunction(tgt, out)


def make_phi_pm(
    psi_plus: Wavefunction,
    psi_minus: Wavefunction,
    phi0: Wavefunction,
    d12: float,
) -> EffectivePair:
    """Effective middle-particle branch states and their raw overlap gamma2.

    Each branch is the carrier phi0 shifted by d12*q and averaged over that
    branch's |psi|^2 density.
    """
    if not grids_equal(psi_plus.grid, psi_minus.grid):
        raise GridMismatch("make_phi_pm: psi branches on different grids")
    phi_p = weighted_shift(density(psi_plus), psi_plus.grid, phi0, d12)
    phi_m = weighted_shift(density(psi_minus), psi_minus.grid, phi0, d12)
    return EffectivePair(
        plus=phi_p,
        minus=phi_m,
        gamma=inner(phi_p, phi_m),
        norm_plus=norm(phi_p),
        norm_minus=norm(phi_m),
    )


def make_chi_pm(
    psi_plus: Wavefunction,
    psi_minus: Wavefunction,
    phi_plus: Wavefunction,
    phi_minus: Wavefunction,
    chi0: Wavefunction,
    g23: float,
    duration: float,
) -> EffectivePair:
    """Effective far-particle branch states and their raw overlap gamma3.

    Evaluates the defining double integral literally: the source-density
    integral over the first particle (expected to be 1, its deviation is
    recorded, not assumed) times the |phi|^2-weighted average of chi0 shifted
    by g23*duration*q. The phi weights are normalized for the averaging and
    their measured mass is multiplied back, so unnormalized effective inputs
    are handled exactly as written.
    """
    c = g23 * duration
    dq1 = psi_plus.grid.spacing
    dq2 = phi_plus.grid.spacing
    if not grids_equal(phi_plus.grid, phi_minus.grid):
        raise GridMismatch("make_chi_pm: phi branches on different grids")
    out = []
    deviations = []
    for psi, phi in ((psi_plus, phi_plus), (psi_minus, phi_minus)):
        q1_integral = float(np.sum(density(psi)) * dq1)
        deviations.append(abs(q1_integral - 1.0))
        mass = float(np.sum(density(phi)) * dq2)
        if mass <= 0.0:
            raise UnnormalizedWeight("make_chi_pm: phi branch has zero mass")
        chi = weighted_shift(density(phi) / mass, phi.grid, chi0, c)
        scaled = Wavefunction(chi.grid, q1_integral * mass * chi.amplitudes)
        out.append(scaled)
    chi_p, chi_m = out
    return EffectivePair(
        plus=chi_p,
        minus=chi_m,
        gamma=inner(chi_p, chi_m),
        norm_plus=norm(chi_p),
        norm_minus=norm(chi_m),
        weight_integral_deviation=(deviations[0], deviations[1]),
    )


def effective_tripartite(
    a: complex,
    psi_plus: Wavefunction,
    phi_plus: Wavefunction,
    chi_plus: Wavefunction,
    b: complex,
    psi_minus: Wavefunction,
    phi_minus: Wavefunction,
    chi_minus: Wavefunction,
) -> TensorState:
    """Rank-3 branch-factorized state a psi+ phi+ chi+ + b psi- phi- chi-."""
    for name, wp, wm in (
        ("psi", psi_plus, psi_minus),
        ("phi", phi_plus, phi_minus),
        ("chi", chi_plus, chi_minus),
    ):
        if not grids_equal(wp.grid, wm.grid):
            raise GridMismatch(f"effective_tripartite: {name} branches on different grids")
    ov = inner(psi_plus, psi_minus)
    if abs(ov) > 1e-9:
        raise NonOrthogonalPsi(f"|<psi+|psi->| = {abs(ov):.3e} exceeds 1e-9")
    weight = abs(a) ** 2 + abs(b) ** 2
    if abs(weight - 1.0) > 1e-9:
        raise BadCoefficients(f"|a|^2 + |b|^2 = {weight} is not 1 within 1e-9")
    amps = a * np.multiply.outer(
        psi_plus.amplitudes, np.multiply.outer(phi_plus.amplitudes, chi_plus.amplitudes)
    )
    amps += b * np.multiply.outer(
        psi_minus.amplitudes,
        np.multiply.outer(phi_minus.amplitudes, chi_minus.amplitudes),
    )
    flag = all(
        w.normalized for w in (phi_plus, chi_plus, phi_minus, chi_minus)
    )
    return TensorState(
        (psi_plus.grid, phi_plus.grid, chi_plus.grid), amps, normalized=flag
    )
