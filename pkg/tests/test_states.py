import numpy as np
import pytest

from iit import (
    SupportSpec,
    attach,
    bump_wf,
    dyad_operator,
    entangled_pair,
    expect_local,
    gaussian_wf,
    make_grid,
    marginal_density,
    product,
    shear,
    state_norm,
    superpose,
)
from iit.errors import (
    BadCoefficients,
    GridOverflow,
    IncommensurateShear,
    NonHermitian,
    NonOrthogonalPsi,
    NonOrthonormalBasis,
)
from iit.states import (
    commensurate_ratio,
    overlap_states,
    tensor_from_json,
    tensor_to_json,
)

G1 = make_grid(-2.0, 2.0, 17)
G2 = make_grid(-8.0, 8.0, 65)
G3 = make_grid(-12.0, 12.0, 97)


def _branches():
    return (
        bump_wf(G1, SupportSpec(-1.25, -0.75)),
        bump_wf(G1, SupportSpec(0.75, 1.25)),
    )


def test_product_norm_and_shape():
    psi_p, _ = _branches()
    phi = gaussian_wf(G2, 0.0, 0.25)
    st = product(psi_p, phi)
    assert st.amplitudes.shape == (17, 65)
    assert abs(state_norm(st) - 1.0) <= 1e-12


def test_attach_extends_to_rank_three():
    psi_p, _ = _branches()
    st = attach(product(psi_p, gaussian_wf(G2, 0.0, 0.25)), gaussian_wf(G3, 0.0, 0.25))
    assert st.amplitudes.shape == (17, 65, 97)
    assert abs(state_norm(st) - 1.0) <= 1e-12


def test_entangled_pair_requires_orthogonal_branches():
    psi_p, _ = _branches()
    overlapping = bump_wf(G1, SupportSpec(-1.5, -0.5))
    phi = gaussian_wf(G2, 0.0, 0.25)
    with pytest.raises(NonOrthogonalPsi):
        entangled_pair(0.6, psi_p, phi, 0.8, overlapping, phi)


def test_entangled_pair_requires_unit_coefficients():
    psi_p, psi_m = _branches()
    phi = gaussian_wf(G2, 0.0, 0.25)
    with pytest.raises(BadCoefficients):
        entangled_pair(0.9, psi_p, phi, 0.9, psi_m, phi)


def test_commensurate_ratio_exact_and_rejecting():
    assert commensurate_ratio(1.0, G1, G2) == 1
    assert commensurate_ratio(-2.0, G1, G2) == -2
    with pytest.raises(IncommensurateShear):
        commensurate_ratio(0.5, G1, G2)


def test_shear_is_the_expected_index_permutation():
    psi_p, psi_m = _branches()
    phi = gaussian_wf(G2, 0.0, 0.25)
    zeta = superpose(np.sqrt(0.5), psi_p, np.sqrt(0.5), psi_m)
    st = product(zeta, phi)
    out = shear(st, 0, 1, 1.0)

    # strength 1 with equal spacings shifts row i by the lattice index of q1
    n0 = round(G1.min / G1.spacing)
    expected = np.zeros_like(st.amplitudes)
    for i in range(G1.n):
        s = n0 + i
        if zeta.amplitudes[i] == 0.0:
            continue
        lo = max(0, s)
        hi = min(G2.n, G2.n + s)
        expected[i, lo:hi] = zeta.amplitudes[i] * phi.amplitudes[lo - s : hi - s]
    assert np.allclose(out.amplitudes, expected, rtol=0.0, atol=0.0)
    assert abs(state_norm(out) - state_norm(st)) <= 1e-12


def test_shear_norm_preserved_and_marginal_on_source_axis_unchanged():
    psi_p, psi_m = _branches()
    phi = gaussian_wf(G2, 0.0, 0.25)
    zeta = superpose(0.6, psi_p, 0.8j, psi_m)
    st = product(zeta, phi)
    out = shear(st, 0, 1, 2.0)
    assert abs(state_norm(out) - 1.0) <= 1e-12
    np.testing.assert_allclose(
        marginal_density(out, 0), marginal_density(st, 0), rtol=0.0, atol=1e-15
    )


def test_shear_overflow_raises():
    psi_p, psi_m = _branches()
    phi = gaussian_wf(G2, 0.0, 0.25)
    st = product(superpose(np.sqrt(0.5), psi_p, np.sqrt(0.5), psi_m), phi)
    with pytest.raises(GridOverflow):
        shear(st, 0, 1, 8.0)


def test_marginal_density_normalization():
    psi_p, _ = _branches()
    st = product(psi_p, gaussian_wf(G2, 0.0, 0.25))
    for axis, grid in ((0, G1), (1, G2)):
        assert abs(np.sum(marginal_density(st, axis)) * grid.spacing - 1.0) <= 1e-12


def test_dyad_operator_requires_hermitian_matrix():
    psi_p, psi_m = _branches()
    with pytest.raises(NonHermitian):
        dyad_operator(psi_p, psi_m, np.array([[0.5, 0.5], [0.4, 0.5]]))


def test_dyad_operator_requires_orthonormal_basis():
    psi_p, _ = _branches()
    wide = bump_wf(G1, SupportSpec(-1.3, 0.2))
    with pytest.raises(NonOrthonormalBasis):
        dyad_operator(psi_p, wide, np.array([[0.5, 0.5], [0.5, 0.5]]))


def test_expect_local_matches_dense_position_space_oracle():
    psi_p, psi_m = _branches()
    rng = np.random.default_rng(42)
    matrix = np.array([[0.7, 0.3 - 0.2j], [0.3 + 0.2j, -0.4]])
    op = dyad_operator(psi_p, psi_m, matrix)

    # random rank-2 state with support inside and outside the dyad span
    amps = rng.normal(size=(G1.n, G2.n)) + 1j * rng.normal(size=(G1.n, G2.n))
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2) * G1.spacing * G2.spacing)
    from iit import TensorState

    st = TensorState((G1, G2), amps, normalized=True)

    # dense kernel: O[i, j] = sum_mn psi_m[i] A[m, n] conj(psi_n[j]) dq1
    basis = np.stack([psi_p.amplitudes, psi_m.amplitudes])
    kernel = np.einsum("mi,mn,nj->ij", basis, matrix, np.conj(basis)) * G1.spacing
    acted = np.tensordot(kernel, amps, axes=(1, 0))
    dense = np.sum(np.conj(amps) * acted) * G1.spacing * G2.spacing
    assert abs(dense.imag) <= 1e-12
    assert abs(expect_local(st, 0, op) - dense.real) <= 1e-12


def test_expect_local_on_entangled_pair_matches_two_level_arithmetic():
    psi_p, psi_m = _branches()
    phi_p = gaussian_wf(G2, -0.5, 0.25)
    phi_m = gaussian_wf(G2, 0.5, 0.25)
    a, b = 0.6, 0.8
    st = entangled_pair(a, psi_p, phi_p, b, psi_m, phi_m)
    matrix = np.array([[0.5, 0.5], [0.5, 0.5]])
    op = dyad_operator(psi_p, psi_m, matrix)

    from iit import inner

    gamma = inner(phi_m, phi_p)
    expected = (
        a * a * 0.5 + b * b * 0.5 + 2.0 * (a * b * gamma * 0.5).real
    )
    assert abs(expect_local(st, 0, op) - expected) <= 1e-12


def test_overlap_states_is_conjugate_symmetric():
    psi_p, psi_m = _branches()
    phi = gaussian_wf(G2, 0.0, 0.25)
    s1 = product(superpose(0.6, psi_p, 0.8, psi_m), phi)
    s2 = product(superpose(1.0, psi_p, 0.0, psi_m), gaussian_wf(G2, 0.5, 0.25))
    assert abs(overlap_states(s1, s2) - np.conj(overlap_states(s2, s1))) <= 1e-14


def test_tensor_json_round_trip_is_bitwise():
    psi_p, _ = _branches()
    st = product(psi_p, gaussian_wf(G2, 0.0, 0.25))
    back = tensor_from_json(tensor_to_json(st))
    assert back.amplitudes.shape == st.amplitudes.shape
    assert np.array_equal(back.amplitudes, st.amplitudes)
