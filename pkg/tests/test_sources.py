import logging

import numpy as np
import pytest

from core.elastowave.errors import UnsupportedOrder
from core.elastowave.harness.presets import SURFACE_RECEIVERS_KM
from core.elastowave.mesh.mesh import MaterialRegion, build_mesh, map_to_physical
from core.elastowave.operators.operators import build_operators
from core.elastowave.solver.solver import RhsBuffers, build_discretization, create_state
from core.elastowave.sources.sources import (
    GaussianPulse,
    MomentTensorSource,
    RampPulse,
    Receiver,
    inject_source,
    place_source,
    record,
    sample,
    stf_eval,
)

KM = 1e3


def _rhs(mesh, degree):
    disc = build_discretization(mesh, degree)
    return RhsBuffers(dQ=np.zeros(disc.field_shape)), disc


def test_gaussian_peak():
    assert stf_eval(GaussianPulse(0.1149, 0.7), 0.7) == pytest.approx(3.4723, rel=1e-3)
    assert stf_eval(GaussianPulse(0.1149, 0.7), 0.7, 1) == pytest.approx(0.0, abs=1e-12)


def test_ramp_values():
    ramp = RampPulse(0.1)
    assert stf_eval(ramp, 0.1) == pytest.approx(3.6788, rel=1e-4)
    assert stf_eval(ramp, 0.0) == 0.0
    assert stf_eval(ramp, -1.0, 2) == 0.0


@pytest.mark.parametrize("stf", [GaussianPulse(0.1149, 0.7), RampPulse(0.1)], ids=["gaussian", "ramp"])
@pytest.mark.parametrize("k", [1, 2, 3, 6])
def test_derivatives_match_finite_differences(stf, k):
    h = 1e-6
    scale = np.max(np.abs(stf_eval(stf, np.linspace(0.3, 0.9, 61), k)))
    for t in (0.35, 0.6, 0.81):
        fd = (stf_eval(stf, t + h, k - 1) - stf_eval(stf, t - h, k - 1)) / (2 * h)
        assert abs(stf_eval(stf, t, k) - fd) <= 1e-6 * scale


@pytest.mark.parametrize("k", [-1, 99, 1.5])
def test_unsupported_order(k):
    with pytest.raises(UnsupportedOrder):
        stf_eval(RampPulse(0.1), 0.1, k)


def test_moment_must_be_symmetric():
    M = np.zeros((3, 3))
    M[0, 1] = 1.0
    with pytest.raises(ValueError):
        MomentTensorSource(M, (0.0, 0.0, 0.0), RampPulse(0.1))
    with pytest.raises(ValueError):
        MomentTensorSource(np.eye(2), (0.0, 0.0), RampPulse(0.1))


def test_moment_from_components():
    src = MomentTensorSource.from_components({"myz": 2.0}, (0.0, 0.0, 0.0), RampPulse(0.1))
    assert src.moment[1, 2] == src.moment[2, 1] == 2.0
    assert np.count_nonzero(src.moment) == 2


def test_source_on_gll_node(make_mesh):
    mesh = make_mesh((2, 2), upper=[2.0, 2.0])
    rhs, disc = _rhs(mesh, 2)
    stf = GaussianPulse(0.2, 0.0)
    placed = place_source(MomentTensorSource.explosive(3.0, (0.5, 0.5), stf), mesh, 2)
    assert placed.element == (0, 0)
    inject_source(rhs, placed, 0.0)
    g = stf_eval(stf, 0.0)
    system = disc.system
    for name in ("sxx", "syy"):
        row = system.index_of(name)
        assert rhs.dQ[row, 0, 0, 1, 1] == pytest.approx(2.25 * 3.0 * g)
        assert np.sum(np.abs(rhs.dQ[row]) > 1e-12) == 1
    assert not np.any(rhs.dQ[system.velocity])
    assert not np.any(rhs.dQ[system.index_of("sxy")])


def test_zero_stf_leaves_rhs_untouched(make_mesh):
    mesh = make_mesh((2, 2))
    rhs, _ = _rhs(mesh, 3)
    placed = place_source(MomentTensorSource.explosive(1.0, (0.3, 0.7), RampPulse(0.1)), mesh, 3)
    inject_source(rhs, placed, -0.5)
    np.testing.assert_array_equal(rhs.dQ, 0.0)


@pytest.mark.parametrize("point", [(0.3, 0.7), (1.61, 0.05), (2.9, 2.2)])
def test_delta_projection_integrates_polynomials(make_mesh, point):
    mesh = make_mesh((3, 3), upper=[3.0, 3.0])
    degree = 4
    placed = place_source(MomentTensorSource.explosive(1.0, point, RampPulse(0.1)), mesh, degree)
    ops = build_operators(degree)
    H = np.multiply.outer(ops.weights, ops.weights) * mesh.jacobian
    assert np.sum(H * placed.weights) == pytest.approx(1.0, rel=1e-12)

    lo, _ = mesh.element_box(placed.element)
    x = lo[0] + 0.5 * mesh.spacing[0] * (ops.nodes + 1)
    y = lo[1] + 0.5 * mesh.spacing[1] * (ops.nodes + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    f = X ** 3 - 2 * X * Y ** 2 + 1
    assert np.sum(H * placed.weights * f) == pytest.approx(point[0] ** 3 - 2 * point[0] * point[1] ** 2 + 1, rel=1e-11)


def test_injection_is_additive(make_mesh):
    mesh = make_mesh((2, 2))
    stf = GaussianPulse(0.1, 0.05)
    a = place_source(MomentTensorSource.explosive(1.0, (0.4, 0.4), stf), mesh, 3)
    b = place_source(MomentTensorSource.from_components({"mxy": 2.0}, (1.3, 0.6), stf), mesh, 3)
    both, _ = _rhs(mesh, 3)
    inject_source(both, a, 0.0, 1)
    inject_source(both, b, 0.0, 1)
    only_a, _ = _rhs(mesh, 3)
    only_b, _ = _rhs(mesh, 3)
    inject_source(only_a, a, 0.0, 1)
    inject_source(only_b, b, 0.0, 1)
    np.testing.assert_allclose(both.dQ, only_a.dQ + only_b.dQ, rtol=1e-15)


def test_source_on_face_warns(rock, caplog):
    mesh = build_mesh([0.0, 0.0], [2 * KM, 2 * KM], (2, 2), [MaterialRegion(rock)])
    with caplog.at_level(logging.WARNING):
        placed = place_source(MomentTensorSource.explosive(1.0, (1 * KM, 0.5 * KM), RampPulse(0.1)), mesh, 2)
    assert placed.element == (0, 0)
    assert "face" in caplog.text


def test_receiver_at_node_reads_nodal_value(make_state):
    state = make_state((2, 2), degree=3, seed=3)
    ops = state.discretization.ops
    mesh = state.discretization.mesh
    point = map_to_physical(mesh, (1, 0), [ops.nodes[1], ops.nodes[2]])
    receiver = Receiver(tuple(point)).place(mesh, 3)
    np.testing.assert_allclose(sample(receiver, state.Q), state.Q[:2, 1, 0, 1, 2], rtol=1e-13, atol=1e-13)


def test_receiver_on_constant_field(make_state):
    state = make_state((3, 2), degree=4)
    state.Q[0] = 2.5
    state.Q[1] = -1.0
    receiver = Receiver((1.37, 0.81), components=("vx", "vy")).place(state.discretization.mesh, 4)
    np.testing.assert_allclose(sample(receiver, state.Q), [2.5, -1.0], rtol=1e-13)


def test_receiver_stress_components(make_state):
    state = make_state((2, 2), degree=2)
    state.Q[state.discretization.system.index_of("sxy")] = 4.0
    receiver = Receiver((0.5, 0.5), components=("sxy",)).place(state.discretization.mesh, 2)
    np.testing.assert_allclose(sample(receiver, state.Q), [4.0])


def test_record_skips_repeated_times(make_state):
    state = make_state((2, 2), degree=2, seed=1)
    receiver = Receiver((0.5, 1.5)).place(state.discretization.mesh, 2)
    record(receiver, state)
    record(receiver, state)
    record(receiver, state, 0.1)
    times, values = receiver.series()
    np.testing.assert_array_equal(times, [0.0, 0.1])
    assert values.shape == (2, 2)


def test_record_is_read_only(make_state):
    state = make_state((2, 2), degree=2, seed=1)
    before = state.Q.copy()
    record(Receiver((0.5, 1.5)).place(state.discretization.mesh, 2), state)
    np.testing.assert_array_equal(state.Q, before)


def test_unplaced_receiver(make_state):
    with pytest.raises(ValueError):
        record(Receiver((0.5, 0.5)), make_state((2, 2), degree=2))


def test_surface_receiver_roundtrip(rock):
    mesh = build_mesh(
        [0.0, -2.287 * KM, -2.287 * KM], [16.333 * KM, 14.046 * KM, 14.046 * KM], (25, 25, 25), [MaterialRegion(rock)]
    )
    y, z = SURFACE_RECEIVERS_KM[3]
    location = (0.0, y * KM, z * KM)
    receiver = Receiver(location).place(mesh, 1)
    assert receiver.element[0] == 0
    assert receiver.reference[0] == pytest.approx(-1.0)
    np.testing.assert_allclose(
        map_to_physical(mesh, receiver.element, receiver.reference), location, atol=1e-9 * 16.333 * KM
    )
    state = create_state(build_discretization(mesh, 1))
    record(receiver, state)
    assert receiver.series()[1].shape == (1, 3)
