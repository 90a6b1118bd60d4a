"""Rank-2/3 grid states, the exact impulsive shift, and local observables.

The impulsive position-position coupling g * q(src) * p(tgt), integrated over
an interval, transports amplitudes along the target axis by d * q_src with
d = g * duration. On commensurate grids (d * dq_src an integer multiple of
dq_tgt) this is an exact index permutation, so the dynamics here is unitary
to machine precision rather than a PDE approximation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadAxis,
    BadCoefficients,
    GridMismatch,
    GridOverflow,
    IncommensurateShear,
    NonHermitian,
    NonOrthogonalPsi,
    NonOrthonormalBasis,
)
from .grids import LATTICE_TOL, SUPPORT_EPS, Grid, Wavefunction, grids_equal, make_grid


@dataclass(frozen=True)
class TensorState:
    """Complex amplitudes over an ordered tuple of grids (axes = particles)."""

    grids: tuple[Grid, ...]
    amplitudes: np.ndarray
    normalized: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.grids) not in (2, 3):
            raise BadAxis(f"rank must be 2 or 3, got {len(self.grids)}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = tuple(g.n for g in self.grids)
        if amps.shape != expected:
            raise GridMismatch(f"amplitude shape {amps.shape} != grid shape {expected}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "grids", tuple(self.grids))

    @property
    def rank(self) -> int:
        return len(self.grids)

    def volume_element(self) -> float:
        out = 1.0
        for g in self.grids:
            out *= g.spacing
        return out


@dataclass(frozen=True)
class Operator1:
    """Finite-rank observable on one axis: a Hermitian 2x2 matrix over an
    orthonormal pair of single-particle states."""

    psi_plus: Wavefunction
    psi_minus: Wavefunction
    matrix: np.ndarray

    @property
    def alpha(self) -> complex:
        """Off-diagonal element <psi_plus| A |psi_minus>."""
        return complex(self.matrix[0, 1])

    @property
    def a_pp(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def a_mm(self) -> float:
        return float(self.matrix[1, 1].real)


def product(f: Wavefunction, g: Wavefunction) -> TensorState:
    """Rank-2 product state f(q1) g(q2)."""
    amps = np.multiply.outer(f.amplitudes, g.amplitudes)
    return TensorState((f.grid, g.grid), amps, normalized=f.normalized and g.normalized)


def attach(state: TensorState, f: Wavefunction) -> TensorState:
    """Tensor one more particle onto the state as a new last axis."""
    if state.rank != 2:
        raise BadAxis("attach expects a rank-2 state")
    amps = np.multiply.outer(state.amplitudes, f.amplitudes)
    return TensorState(
        state.grids + (f.grid,), amps, normalized=state.normalized and f.normalized
    )


def entangled_pair(
    a: complex,
    psi_plus: Wavefunction,
    phi_plus: Wavefunction,
    b: complex,
    psi_minus: Wavefunction,
    phi_minus: Wavefunction,
) -> TensorState:
    """a psi+ (x) phi+  +  b psi- (x) phi-  with orthogonal psi branches.

    Requires |<psi+|psi->| <= 1e-9 and |a|^2 + |b|^2 = 1 within 1e-9. When the
    phi factors are unit-normalized the result has norm 1 within 1e-8.
    """
    from .grids import inner as wf_inner

    if not grids_equal(psi_plus.grid, psi_minus.grid):
        raise GridMismatch("entangled_pair: psi branches on different grids")
    if not grids_equal(phi_plus.grid, phi_minus.grid):
        raise GridMismatch("entangled_pair: phi branches on different grids")
    ov = wf_inner(psi_plus, psi_minus)
    if abs(ov) > 1e-9:
        raise NonOrthogonalPsi(f"|<psi+|psi->| = {abs(ov):.3e} exceeds 1e-9")
    weight = abs(a) ** 2 + abs(b) ** 2
    if abs(weight - 1.0) > 1e-9:
        raise BadCoefficients(f"|a|^2 + |b|^2 = {weight} is not 1 within 1e-9")
    amps = a * np.multiply.outer(psi_plus.amplitudes, phi_plus.amplitudes)
    amps += b * np.multiply.outer(psi_minus.amplitudes, phi_minus.amplitudes)
    flag = phi_plus.normalized and phi_minus.normalized
    return TensorState((psi_plus.grid, phi_plus.grid), amps, normalized=flag)


def commensurate_ratio(strength: float, src: Grid, tgt: Grid) -> int:
    """Index shift per source lattice step: strength * dq_src / dq_tgt.

    Raises IncommensurateShear unless the ratio is an integer within 1e-12.
    """
    r = strength * src.spacing / tgt.spacing
    if abs(r - round(r)) > LATTICE_TOL:
        raise IncommensurateShear(
            f"strength {strength} gives shift ratio {r} (dq_src={src.spacing},"
            f" dq_tgt={tgt.spacing}); not an integer within 1e-12"
        )
    return int(round(r))


def shear(state: TensorState, src_axis: int, tgt_axis: int, strength: float) -> TensorState:
    """Exact transport: psi(q_tgt) -> psi(q_tgt - strength * q_src).

    Amplitudes are permuted along tgt_axis by an integer index shift per
    source index; any amplitude above the 1e-14 support threshold that would
    leave the grid raises GridOverflow. Norm is preserved (permutation).
    """
    rank = state.rank
    if not (0 <= src_axis < rank and 0 <= tgt_axis < rank):
        raise BadAxis(f"axes ({src_axis}, {tgt_axis}) out of range for rank {rank}")
    if src_axis == tgt_axis:
        raise BadAxis("source and target axes must differ")
    src, tgt = state.grids[src_axis], state.grids[tgt_axis]
    r = commensurate_ratio(strength, src, tgt)
    n0 = round(src.min / src.spacing)

    work = np.moveaxis(state.amplitudes, (src_axis, tgt_axis), (0, 1))
    out = np.zeros_like(work)
    n_tgt = tgt.n
    for i in range(src.n):
        s = r * (n0 + i)
        sl = work[i]
        if s == 0:
            out[i] = sl
            continue
        if abs(s) >= n_tgt:
            lost = np.abs(sl).max() if sl.size else 0.0
            if lost > SUPPORT_EPS:
                raise GridOverflow(
                    f"shift {s} at source index {i} moves amplitude {lost:.3e}"
                    f" (> {SUPPORT_EPS}) entirely off the target grid"
                )
            continue
        if s > 0:
            lost = np.abs(sl[n_tgt - s :]).max()
            if lost > SUPPORT_EPS:
                raise GridOverflow(
                    f"shift {s} at source index {i} pushes amplitude {lost:.3e}"
                    f" (> {SUPPORT_EPS}) past the upper grid edge"
                )
            out[i, s:] = sl[: n_tgt - s]
        else:
            lost = np.abs(sl[:-s]).max()
            if lost > SUPPORT_EPS:
                raise GridOverflow(
                    f"shift {s} at source index {i} pushes amplitude {lost:.3e}"
                    f" (> {SUPPORT_EPS}) past the lower grid edge"
                )
            out[i, : n_tgt + s] = sl[-s:]
    amps = np.moveaxis(out, (0, 1), (src_axis, tgt_axis))
    return TensorState(state.grids, amps, normalized=state.normalized)


def state_norm(state: TensorState) -> float:
    val = np.sum(np.abs(state.amplitudes) ** 2).real * state.volume_element()
    return float(np.sqrt(max(val, 0.0)))


def overlap_states(s1: TensorState, s2: TensorState) -> complex:
    """<s1|s2> over the shared grid tuple (conjugate-left)."""
    if s1.rank != s2.rank or any(
        not grids_equal(a, b) for a, b in zip(s1.grids, s2.grids)
    ):
        raise GridMismatch("overlap_states: grid tuples differ")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes) * s1.volume_element())


def marginal_density(state: TensorState, axis: int) -> np.ndarray:
    """Real probability density on one axis (others integrated out)."""
    if not (0 <= axis < state.rank):
        raise BadAxis(f"axis {axis} out of range for rank {state.rank}")
    others = tuple(k for k in range(state.rank) if k != axis)
    weight = 1.0
    for k in others:
        weight *= state.grids[k].spacing
    dens = np.sum(np.abs(state.amplitudes) ** 2, axis=others) * weight
    return dens.real


def dyad_operator(
    psi_plus: Wavefunction, psi_minus: Wavefunction, matrix: np.ndarray
) -> Operator1:
    """Validate and assemble a finite-rank observable on the (psi+, psi-) span.

    The matrix must be Hermitian exactly as stored; the basis pair must be
    orthonormal within 1e-9.
    """
    from .grids import inner as wf_inner, norm as wf_norm

    if not grids_equal(psi_plus.grid, psi_minus.grid):
        raise GridMismatch("dyad_operator: basis states on different grids")
    m = np.asarray(matrix, dtype=np.complex128)
    if m.shape != (2, 2):
        raise NonHermitian(f"matrix must be 2x2, got shape {m.shape}")
    if not np.array_equal(m, m.conj().T):
        raise NonHermitian("matrix is not Hermitian exactly as stored")
    if abs(wf_inner(psi_plus, psi_minus)) > 1e-9:
        raise NonOrthonormalBasis("basis states are not orthogonal within 1e-9")
    for name, wf in (("psi_plus", psi_plus), ("psi_minus", psi_minus)):
        if abs(wf_norm(wf) - 1.0) > 1e-9:
            raise NonOrthonormalBasis(f"{name} is not unit-normalized within 1e-9")
    m = m.copy()
    m.flags.writeable = False
    return Operator1(psi_plus, psi_minus, m)


def expect_local(state: TensorState, axis: int, op: Operator1) -> float:
    """Expectation of the finite-rank observable acting on one axis.

    Projects the axis onto the 2-dimensional operator span and contracts the
    resulting 2x2 Gram with the operator matrix. Hermiticity makes the result
    real; the residual imaginary part is checked against 1e-10.
    """
    if not (0 <= axis < state.rank):
        raise BadAxis(f"axis {axis} out of range for rank {state.rank}")
    axis_grid = state.grids[axis]
    if not grids_equal(op.psi_plus.grid, axis_grid):
        raise GridMismatch("expect_local: operator basis grid != axis grid")
    dq = axis_grid.spacing
    rest_weight = state.volume_element() / dq
    coeffs = []
    for basis in (op.psi_plus, op.psi_minus):
        c = np.tensordot(basis.amplitudes.conj(), state.amplitudes, axes=([0], [axis]))
        coeffs.append(c * dq)
    gram = np.empty((2, 2), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            gram[i, j] = np.vdot(coeffs[i], coeffs[j]) * rest_weight
    val = complex(np.sum(op.matrix * gram))
    assert abs(val.imag) <= 1e-10, f"expectation imaginary part {val.imag:.3e}"
    return float(val.real)


def tensor_to_json(state: TensorState) -> dict:
    """Axis-major (C-order) flattened serialization with [re, im] pairs."""
    flat = state.amplitudes.reshape(-1)
    return {
        "grids": [g.descriptor() for g in state.grids],
        "amplitudes": [[float(z.real), float(z.imag)] for z in flat],
        "normalized": bool(state.normalized),
    }


def tensor_from_json(obj: dict) -> TensorState:
    grids = tuple(make_grid(g["min"], g["max"], g["n"]) for g in obj["grids"])
    flat = np.array([complex(re, im) for re, im in obj["amplitudes"]])
    amps = flat.reshape(tuple(g.n for g in grids))
    return TensorState(grids, amps, normalized=bool(obj.get("normalized", False)))
