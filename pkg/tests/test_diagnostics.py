import numpy as np
import pytest

from core.elastowave.diagnostics.diagnostics import (
    InteriorSamples,
    PlaneWaveSpec,
    TimeSeries,
    bump,
    check_reference_geometry,
    convergence_rates,
    discrete_energy,
    linf_series,
    plane_wave_error,
    plane_wave_mode,
    plane_wave_residual,
    plane_wave_state,
    pml_error,
    seismogram_misfit,
)
from core.elastowave.errors import DegenerateError, GeometryInsufficient, ShapeMismatch
from core.elastowave.mesh.mesh import MaterialRegion, build_mesh
from core.elastowave.physics.physics import MaterialModel
from core.elastowave.solver.solver import build_discretization, create_state

KM = 1e3


def test_zero_state_has_zero_energy(make_state):
    assert discrete_energy(make_state((3, 2), degree=3)).E == 0.0


def test_single_node_kinetic_energy(make_state):
    heavy = MaterialModel.from_lame(2.0, 1.0, 1.0, name="heavy")
    state = make_state((1, 1), degree=1, upper=[2.0, 2.0], material=heavy)
    state.Q[0, 0, 0, 0, 0] = 1.0
    assert discrete_energy(state).E == pytest.approx(1.0, rel=1e-14)


def test_energy_is_quadratic(make_state):
    state = make_state((3, 3), degree=2, seed=4)
    E = discrete_energy(state).E
    assert E > 0
    state.Q *= 2.0
    assert discrete_energy(state).E == pytest.approx(4.0 * E, rel=1e-13)


def test_energy_counts_stress_through_compliance(make_state):
    state = make_state((1, 1), degree=1, upper=[2.0, 2.0])
    state.Q[2] = 1.0
    S = state.discretization.system.compliance(state.discretization.mesh.materials[0])
    assert discrete_energy(state).E == pytest.approx(0.5 * S[0, 0] * 4.0, rel=1e-13)


def test_linf_of_velocity(make_state):
    state = make_state((2, 2), degree=2)
    state.Q[0, 1, 1, 2, 0] = 3.0
    state.Q[1, 1, 1, 2, 0] = -4.0
    state.Q[2] = 100.0
    assert linf_series(state) == pytest.approx(5.0)


def _sampled(state, lower, upper):
    samples = InteriorSamples(np.asarray(lower, float), np.asarray(upper, float)).bind(state.discretization.mesh)
    samples(state)
    return samples


def test_pml_error_of_identical_runs(make_state):
    state = make_state((4, 4), degree=2, seed=2)
    run = _sampled(state, [1.0, 1.0], [3.0, 3.0])
    assert run.slices == (slice(1, 3), slice(1, 3))
    assert pml_error(run, _sampled(state, [1.0, 1.0], [3.0, 3.0])) == 0.0


def test_pml_error_is_symmetric(make_state):
    a = make_state((4, 4), degree=2, seed=2)
    b = make_state((4, 4), degree=2, seed=3)
    ra, rb = _sampled(a, [1.0, 1.0], [3.0, 3.0]), _sampled(b, [1.0, 1.0], [3.0, 3.0])
    assert pml_error(ra, rb) == pml_error(rb, ra) > 0


def test_pml_error_mismatches(make_state):
    a = make_state((4, 4), degree=2, seed=2)
    empty = InteriorSamples(np.array([1.0, 1.0]), np.array([3.0, 3.0])).bind(a.discretization.mesh)
    with pytest.raises(ShapeMismatch):
        pml_error(empty, empty)
    shifted = make_state((4, 4), degree=2, seed=2)
    shifted.time = 0.5
    with pytest.raises(ShapeMismatch):
        pml_error(_sampled(a, [1.0, 1.0], [3.0, 3.0]), _sampled(shifted, [1.0, 1.0], [3.0, 3.0]))
    with pytest.raises(ShapeMismatch):
        pml_error(_sampled(a, [1.0, 1.0], [3.0, 3.0]), _sampled(a, [0.0, 1.0], [3.0, 3.0]))


def test_empty_interior_box(make_state):
    with pytest.raises(GeometryInsufficient):
        InteriorSamples(np.array([1.1, 0.0]), np.array([1.2, 4.0])).bind(make_state((4, 4), degree=1).discretization.mesh)


def test_published_convergence_rates():
    errors = [8.2513e-4, 1.3602e-5, 1.1745e-7, 3.7712e-9]
    rates = convergence_rates(errors, [10.0, 5.0, 2.5, 1.25])
    np.testing.assert_allclose(rates, [5.9228, 6.8556, 4.9608], atol=1e-4)


def test_ideal_sixth_order_rate():
    assert convergence_rates([64.0, 1.0], [2.0, 1.0]) == [pytest.approx(6.0)]


@pytest.mark.parametrize("errors, spacings", [([1.0], [1.0]), ([1.0, 0.0], [2.0, 1.0]), ([1.0, 0.5], [1.0])])
def test_degenerate_rates(errors, spacings):
    with pytest.raises(DegenerateError):
        convergence_rates(errors, spacings)


def test_reference_geometry():
    # cp = 6 km/s, T = 20 s: reflections need 60 km of margin
    check_reference_geometry([-50 * KM, 0.0], [50 * KM, 50 * KM], [-110 * KM, 0.0], [110 * KM, 110 * KM], [(0, -1), (0, 1), (1, 1)], 6000.0, 20.0)
    with pytest.raises(GeometryInsufficient):
        check_reference_geometry([-50 * KM, 0.0], [50 * KM, 50 * KM], [-100 * KM, 0.0], [110 * KM, 110 * KM], [(0, -1)], 6000.0, 20.0)


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("mode", ["P", "S"])
def test_plane_wave_is_a_traveling_mode(rock, dim, mode):
    spec = PlaneWaveSpec(direction=(1.0, 2.0, 0.5), mode=mode)
    assert plane_wave_residual(spec, rock, dim) < 1e-12


def test_plane_p_wave_structure(rock):
    Q0, c = plane_wave_mode(PlaneWaveSpec(direction=(1.0, 0.0)), rock, 2)
    lam, mu = rock.lame
    vx, vy, sxx, syy, sxy = Q0 / np.sign(Q0[0])
    assert c == pytest.approx(rock.cp, rel=1e-12)
    assert vx == pytest.approx(1.0)
    assert vy == pytest.approx(0.0, abs=1e-12)
    assert sxx == pytest.approx(-rock.Zp, rel=1e-12)
    assert syy == pytest.approx(-lam / rock.cp, rel=1e-12)
    assert sxy == pytest.approx(0.0, abs=1e-6)


def test_plane_s_wave_speed(rock):
    _, c = plane_wave_mode(PlaneWaveSpec(direction=(0.0, 1.0, 0.0), mode="S", polarization=(0.0, 0.0, 1.0)), rock, 3)
    assert c == pytest.approx(rock.cs, rel=1e-12)


def test_unknown_plane_wave_mode(rock):
    with pytest.raises(ValueError):
        plane_wave_mode(PlaneWaveSpec(direction=(1.0, 0.0), mode="Love"), rock, 2)


def test_bump():
    assert bump(0.0, 2.0) == 1.0
    assert bump(2.0, 2.0) == 0.0
    assert bump(-3.0, 2.0) == 0.0
    assert bump(1.0, 2.0) == pytest.approx(0.75 ** 6)


def test_plane_wave_error_of_exact_state(rock):
    mesh = build_mesh([0.0, 0.0], [20 * KM, 20 * KM], (4, 4), [MaterialRegion(rock)])
    spec = PlaneWaveSpec(direction=(1.0, 0.0), width=4 * KM, offset=8 * KM)
    disc = build_discretization(mesh, 3)
    state = create_state(disc, plane_wave_state(spec, mesh, 0.0, 3))
    assert plane_wave_error(state, spec) == 0.0
    assert plane_wave_error(state, spec, [0.0, 5 * KM], [20 * KM, 15 * KM]) == 0.0
    state.time = 0.5
    assert plane_wave_error(state, spec) > 0.1


def test_plane_wave_travels_at_its_speed(rock):
    mesh = build_mesh([0.0, 0.0], [20 * KM, 20 * KM], (4, 4), [MaterialRegion(rock)])
    spec = PlaneWaveSpec(direction=(1.0, 0.0), width=4 * KM, offset=8 * KM)
    shifted = PlaneWaveSpec(direction=(1.0, 0.0), width=4 * KM, offset=8 * KM + rock.cp * 0.5)
    np.testing.assert_allclose(
        plane_wave_state(spec, mesh, 0.5, 3), plane_wave_state(shifted, mesh, 0.0, 3), rtol=1e-9, atol=1e-9 * rock.Zp
    )


def test_misfit_of_identical_series():
    t = np.linspace(0.0, 1.0, 11)
    values = np.stack([np.sin(t), np.cos(t)], axis=1)
    assert seismogram_misfit(t, values, t, values) == 0.0
    assert seismogram_misfit(t, values, t, values + [0.0, 0.25]) == pytest.approx(0.25)


def test_misfit_interpolates_onto_common_window():
    t = np.linspace(0.0, 2.0, 21)
    coarse = np.linspace(0.5, 1.5, 3)
    assert seismogram_misfit(t, 3 * t, coarse, 3 * coarse) == pytest.approx(0.0, abs=1e-14)


def test_misfit_mismatches():
    t = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ShapeMismatch):
        seismogram_misfit(t, np.zeros((5, 2)), t, np.zeros((5, 3)))
    with pytest.raises(ShapeMismatch):
        seismogram_misfit(t, np.zeros(5), t + 2.0, np.zeros(5))


def test_time_series():
    series = TimeSeries("energy")
    for t, v in [(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)]:
        series.append(t, v)
    assert series.window_max(0.5, 2.0) == 3.0
    assert series.at(0.5) == pytest.approx(2.0)
    assert np.isnan(series.window_max(5.0, 6.0))
