import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iit import (
    Grid,
    SupportSpec,
    bump_wf,
    density,
    density_moments,
    gaussian_wf,
    inner,
    make_grid,
    norm,
    normalize,
    superpose,
)
from iit.errors import (
    GridTooNarrow,
    InvalidBounds,
    LatticeMisaligned,
    SupportOutsideGrid,
    ZeroNorm,
)
from iit.grids import grids_equal, wavefunction_from_json, wavefunction_to_json


def test_make_grid_spacing_and_points():
    g = make_grid(-2.0, 2.0, 17)
    assert g.spacing == 0.25
    pts = g.points()
    assert pts[0] == -2.0 and pts[-1] == 2.0 and len(pts) == 17


def test_make_grid_rejects_bad_bounds():
    with pytest.raises(InvalidBounds):
        make_grid(1.0, -1.0, 17)
    with pytest.raises(InvalidBounds):
        make_grid(-1.0, 1.0, 5)


def test_make_grid_rejects_off_lattice_origin():
    # min/spacing = -1.1/0.3 is not an integer
    with pytest.raises(LatticeMisaligned):
        make_grid(-1.1, 1.3, 9)


def test_gaussian_unit_norm_and_moments():
    g = make_grid(-12.0, 12.0, 385)
    f = gaussian_wf(g, 0.5, 1.25)
    assert abs(norm(f) - 1.0) <= 1e-12
    mean, var = density_moments(f)
    assert abs(mean - 0.5) <= 1e-9
    assert abs(var - 1.25) <= 1e-9


def test_gaussian_amplitude_convention_halves_density_variance():
    g = make_grid(-12.0, 12.0, 385)
    f = gaussian_wf(g, 0.0, 1.0, convention="amplitude")
    _, var = density_moments(f)
    assert abs(var - 0.5) <= 1e-9


def test_gaussian_overlap_matches_analytic_value():
    # overlap of unit-mass density-convention gaussians displaced by 2 with
    # variance 1 is exp(-2^2 / 8) = exp(-1/2)
    g = make_grid(-16.0, 16.0, 1025)
    f = gaussian_wf(g, -1.0, 1.0)
    h = gaussian_wf(g, 1.0, 1.0)
    assert abs(inner(f, h) - np.exp(-0.5)) <= 1e-12


def test_gaussian_rejects_truncated_tails():
    with pytest.raises(GridTooNarrow):
        gaussian_wf(make_grid(-2.0, 2.0, 33), 0.0, 4.0)


def test_bump_exact_zeros_and_norm():
    g = make_grid(-2.0, 2.0, 65)
    f = bump_wf(g, SupportSpec(-1.0, 0.0))
    pts = g.points()
    outside = (pts <= -1.0) | (pts >= 0.0)
    assert np.all(f.amplitudes[outside] == 0.0)
    assert np.any(f.amplitudes != 0.0)
    assert abs(norm(f) - 1.0) <= 1e-12


def test_bump_must_sit_strictly_inside_the_grid():
    g = make_grid(-2.0, 2.0, 65)
    with pytest.raises(SupportOutsideGrid):
        bump_wf(g, SupportSpec(-2.5, 0.0))
    with pytest.raises(SupportOutsideGrid):
        bump_wf(g, SupportSpec(0.0, 2.0))


def test_superpose_and_inner_are_conjugate_linear_on_the_left():
    g = make_grid(-2.0, 2.0, 33)
    f = bump_wf(g, SupportSpec(-1.5, 0.0))
    h = bump_wf(g, SupportSpec(0.0, 1.5))
    s = superpose(0.6, f, 0.8j, h)
    assert abs(norm(s) - 1.0) <= 1e-12
    assert abs(inner(s, f) - 0.6) <= 1e-12
    assert abs(inner(s, h) - (-0.8j)) <= 1e-12


def test_normalize_rejects_zero_vector():
    g = make_grid(-2.0, 2.0, 33)
    f = bump_wf(g, SupportSpec(-1.0, 1.0))
    zero = superpose(1.0, f, -1.0, f)
    with pytest.raises(ZeroNorm):
        normalize(zero)


def test_density_integrates_to_one():
    g = make_grid(-8.0, 8.0, 129)
    f = gaussian_wf(g, 0.0, 1.0)
    assert abs(np.sum(density(f)) * g.spacing - 1.0) <= 1e-12


def test_wavefunction_json_round_trip_is_bitwise():
    g = make_grid(-4.0, 4.0, 33)
    f = gaussian_wf(g, 0.25, 0.25)
    back = wavefunction_from_json(wavefunction_to_json(f))
    assert grids_equal(back.grid, f.grid)
    assert np.array_equal(back.amplitudes, f.amplitudes)
    assert back.normalized == f.normalized


@settings(max_examples=25, deadline=None)
@given(
    mean=st.floats(-2.0, 2.0),
    variance=st.floats(0.1, 2.0),
)
def test_gaussian_properties_hold_across_parameters(mean, variance):
    g = make_grid(-24.0, 24.0, 769)
    f = gaussian_wf(g, mean, variance)
    assert abs(norm(f) - 1.0) <= 1e-12
    m, v = density_moments(f)
    assert abs(m - mean) <= 1e-6
    assert abs(v - variance) <= 1e-6
    self_overlap = inner(f, f)
    assert abs(self_overlap.imag) <= 1e-15
    assert abs(self_overlap.real - 1.0) <= 1e-12
