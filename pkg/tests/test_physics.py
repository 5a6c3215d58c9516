import numpy as np
import pytest

from core.elastowave.errors import AnisotropicUnsupported, InvalidLame, NotSPD
from core.elastowave.physics.physics import (
    COMPONENTS_2D,
    MaterialModel,
    characteristics,
    coefficient_matrix,
    eigen_spectrum,
    impedance,
    isotropic_stiffness,
    reduce_to_2d,
    retained_closure_violations,
    selection_block,
    traction,
    wave_speeds,
    wave_system,
)
from core.elastowave.solver.solver import ader_step, build_discretization, create_state, stable_dt

LAYER = MaterialModel.from_speeds(2600.0, 4000.0, 2000.0, name="layer")


def test_isotropic_stiffness_unit_parameters():
    C = isotropic_stiffness(1.0, 1.0)
    expected = np.zeros((6, 6))
    expected[:3, :3] = 1.0
    expected[np.arange(3), np.arange(3)] = 3.0
    expected[np.arange(3, 6), np.arange(3, 6)] = 1.0
    np.testing.assert_array_equal(C, expected)


def test_isotropic_stiffness_zero_lambda():
    np.testing.assert_array_equal(isotropic_stiffness(0.0, 1.0), np.diag([2.0, 2.0, 2.0, 1.0, 1.0, 1.0]))


def test_lame_from_speeds(rock):
    lam, mu = rock.lame
    assert mu == pytest.approx(3.2398e10, rel=1e-4)
    assert lam == pytest.approx(3.2404e10, rel=1e-4)


@pytest.mark.parametrize("rho, cp, cs", [(2700.0, 6000.0, 3464.0), (2600.0, 4000.0, 2000.0), (2670.0, 6000.0, 3464.0)])
def test_wave_speed_roundtrip(rho, cp, cs):
    m = MaterialModel.from_speeds(rho, cp, cs)
    got_cp, got_cs = wave_speeds(m)
    assert got_cp == pytest.approx(cp, rel=1e-9)
    assert got_cs == pytest.approx(cs, rel=1e-9)


def test_unit_wave_speeds(unit_material):
    cp, cs = wave_speeds(unit_material)
    assert cp == pytest.approx(np.sqrt(3.0), rel=1e-14)
    assert cs == pytest.approx(1.0, rel=1e-14)


def test_impedances(rock):
    assert impedance(rock, "x", "x") == pytest.approx(1.62e7, rel=1e-12)
    assert impedance(rock, "x", "y") == pytest.approx(9.3528e6, rel=1e-9)
    assert impedance(rock, 2, 2) == pytest.approx(rock.Zp)


@pytest.mark.parametrize("lam, mu, error", [(1.0, 0.0, InvalidLame), (1.0, -1.0, InvalidLame), (-0.9, 1.0, NotSPD)])
def test_invalid_lame(lam, mu, error):
    with pytest.raises(error):
        MaterialModel.from_lame(1.0, lam, mu)


def test_invalid_density():
    with pytest.raises(InvalidLame):
        MaterialModel.from_speeds(0.0, 2.0, 1.0)


def test_anisotropic_material_has_no_lame_parameters():
    C = isotropic_stiffness(1.0, 1.0)
    C[0, 0] += 0.5
    m = MaterialModel(rho=1.0, C=C, name="tilted")
    assert not m.is_isotropic
    with pytest.raises(AnisotropicUnsupported):
        m.lame


def test_traction_rows():
    np.testing.assert_array_equal(traction([1, 0, 0, 0, 0, 0], "x"), [1, 0, 0])
    np.testing.assert_array_equal(traction([0, 0, 0, 1, 0, 0], "y"), [1, 0, 0])
    np.testing.assert_array_equal(traction(np.zeros(6), "z"), [0, 0, 0])
    np.testing.assert_array_equal(traction([1, 2, 3, 4, 5, 6], "x"), [1, 4, 5])
    np.testing.assert_array_equal(traction([1, 2, 3, 4, 5, 6], "y"), [4, 2, 6])
    np.testing.assert_array_equal(traction([1, 2, 3, 4, 5, 6], "z"), [5, 6, 3])


def test_selection_picks_sigma_eta_xi():
    voigt = {(0, 0): 0, (1, 1): 1, (2, 2): 2, (0, 1): 3, (0, 2): 4, (1, 2): 5}
    for xi in range(3):
        a = selection_block(xi)
        for eta in range(3):
            expected = np.zeros(6)
            expected[voigt[tuple(sorted((xi, eta)))]] = 1.0
            np.testing.assert_array_equal(a[eta], expected)


def test_characteristics():
    assert characteristics(0.0, 0.0, 1.0) == (0.0, 0.0)
    assert characteristics(1.0, 0.0, 2.0) == (1.0, 1.0)
    rng = np.random.default_rng(3)
    v, T, Z = rng.standard_normal(50), rng.standard_normal(50), rng.uniform(0.5, 2.0, 50)
    q, p = characteristics(v, T, Z)
    np.testing.assert_allclose((q + p) / Z, v, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(q - p, T, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_coefficient_matrix_symmetric(axis):
    A = coefficient_matrix(axis)
    np.testing.assert_array_equal(A, A.T)


def _expected_spectrum(m):
    cp, cs = m.cp, m.cs
    return np.array([-cp, -cs, -cs, 0.0, 0.0, 0.0, cs, cs, cp])


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@pytest.mark.parametrize("material", ["rock", "layer", "unit"])
def test_eigen_spectrum(material, axis, rock, unit_material):
    m = {"rock": rock, "layer": LAYER, "unit": unit_material}[material]
    spectrum = eigen_spectrum(m, axis)
    np.testing.assert_allclose(spectrum, _expected_spectrum(m), rtol=1e-9, atol=1e-9 * m.cp)


def test_material_matrix_positive_definite(rock):
    assert np.min(np.linalg.eigvalsh(rock.material_matrix())) > 0


def test_reduce_to_2d_components():
    system = reduce_to_2d()
    assert system.components == COMPONENTS_2D
    assert system.ncomp == 5
    np.testing.assert_array_equal(system.selection("x"), [[1, 0, 0], [0, 0, 1]])
    np.testing.assert_array_equal(system.selection("y"), [[0, 0, 1], [0, 1, 0]])


def test_reduced_coefficient_matrix():
    A = wave_system(2).coefficient_matrix(0)
    assert A.shape == (5, 5)
    np.testing.assert_array_equal(A[:2, 2:], [[1, 0, 0], [0, 0, 1]])
    np.testing.assert_array_equal(A[2:, :2], A[:2, 2:].T)


def test_reduced_traction_on_x_face():
    system = wave_system(2)
    sigma = np.array([1.0, 2.0, 3.0])  # sxx, syy, sxy
    np.testing.assert_array_equal(system.selection(0) @ sigma, [1.0, 3.0])


def test_psv_subsystem_closed(rock):
    assert retained_closure_violations(rock, wave_system(2)) == []


def test_z_invariant_3d_run_matches_plane_strain(make_mesh, rock):
    planar = {(0, -1): 1.0, (0, 1): 0.0, (1, -1): -1.0, (1, 1): 0.5}
    # z faces: free for the in-plane velocities, clamped for vz, so the z-invariant state sees no fluctuation
    slab = {**planar, (2, -1): [1.0, 1.0, -1.0], (2, 1): [1.0, 1.0, -1.0]}
    disc2 = build_discretization(make_mesh((3, 3), boundary=planar, material=rock), 3)
    disc3 = build_discretization(make_mesh((3, 3, 1), boundary=slab, material=rock), 3)

    Q2 = np.random.default_rng(6).standard_normal(disc2.field_shape)
    Q3 = np.zeros(disc3.field_shape)
    rows = [disc3.system.index_of(name) for name in COMPONENTS_2D]
    Q3[rows] = Q2[:, :, :, None, :, :, None]
    flat, slab_state = create_state(disc2, Q2), create_state(disc3, Q3)

    dt = stable_dt(disc2.mesh, 3, 0.5)
    for _ in range(10):
        ader_step(flat, dt)
        ader_step(slab_state, dt)

    expected = np.broadcast_to(flat.Q[:, :, :, None, :, :, None], slab_state.Q[rows].shape)
    np.testing.assert_allclose(slab_state.Q[rows], expected, rtol=0, atol=1e-10 * np.max(np.abs(flat.Q)))
    for name in ("vz", "sxz", "syz"):
        assert np.max(np.abs(slab_state.Q[disc3.system.index_of(name)])) <= 1e-10 * np.max(np.abs(flat.Q))


def test_unknown_dimension():
    with pytest.raises(ValueError):
        wave_system(1)
