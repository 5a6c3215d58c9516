"""Benchmark reproductions. Each run takes minutes; select them with `pytest -m slow`."""
import time

import numpy as np
import pytest

from core.elastowave.diagnostics.diagnostics import discrete_energy
from core.elastowave.errors import DivergenceDetected
from core.elastowave.harness.config import build_config
from core.elastowave.harness.experiments import (
    check_operators,
    compare_boundary_treatments,
    convergence_study,
    run_experiment,
    simulate,
)
from core.elastowave.harness.presets import preset
from core.elastowave.solver.solver import ader_step, stable_dt
from tests.test_solver import MIXED_GAMMA

pytestmark = pytest.mark.slow

KM = 1e3


def test_operator_suite_up_to_degree_twelve():
    started = time.perf_counter()
    rows = check_operators(12)
    assert len(rows) == 36
    assert all(row["passed"] for row in rows)
    assert time.perf_counter() - started < 5.0


@pytest.mark.parametrize("degree", [2, 5])
def test_undamped_energy_never_grows(make_state, degree):
    state = make_state((4, 4), degree=degree, boundary=MIXED_GAMMA, seed=21)
    dt = stable_dt(state.discretization.mesh, degree, 0.5)
    energies = [discrete_energy(state).E]
    for _ in range(500):
        ader_step(state, dt)
        energies.append(discrete_energy(state).E)
    energies = np.array(energies)
    assert np.max(np.diff(energies) / energies[:-1]) < 1e-10


def test_stabilized_layer_stays_bounded():
    linf = simulate(preset("strip2d", theta=1)).linf
    assert linf.window_max(50.0, 100.0) <= 1.05 * linf.window_max(0.0, 50.0)


def test_unstabilized_layer_grows():
    try:
        linf = simulate(preset("strip2d", theta=0)).linf
    except DivergenceDetected:
        return
    assert linf.at(100.0) >= 1e3 * linf.at(20.0)


def test_h_convergence_against_published_errors(tmp_path):
    study = convergence_study(
        preset("strip2d", t_end=20.0), spacings=[10 * KM, 5 * KM, 2.5 * KM], output_dir=tmp_path, auto_tol=True
    )
    assert study["auto_tol"]
    for measured, published in zip(study["errors"], [8.2513e-4, 1.3602e-5, 1.1745e-7]):
        assert published / 5 <= measured <= published * 5
    assert all(rate >= 4.5 for rate in study["rates"])


def test_p_convergence(tmp_path):
    study = convergence_study(preset("strip2d", t_end=20.0), degrees=[2, 4, 6, 8], output_dir=tmp_path, auto_tol=True)
    errors = study["errors"]
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= coarse / 10


@pytest.mark.parametrize("degree", [2, 3])
def test_plane_wave_convergence_2d(degree, tmp_path):
    study = convergence_study(preset("planewave", degree=degree), spacings=[1.25 * KM, 0.625 * KM], output_dir=tmp_path)
    assert study["rates"][0] >= degree + 0.5


def _plane_wave_cube(degree: int):
    edge = 20 * KM
    return build_config({
        "run": {"dimension": 3, "degree": degree, "t_end": 1.0, "kind": "planewave3d"},
        "domain": {"lower": [0.0] * 3, "upper": [edge] * 3, "elements": [8, 8, 8]},
        "materials": [{"name": "rock", "rho": 2700.0, "cp": 6000.0, "cs": 3464.0}],
        "boundary": {f"{a}_{s}": [0.0] for a in "xyz" for s in ("lower", "upper")},
        "initial": {"kind": "planewave", "direction": [1.0, 0.0, 0.0], "mode": "P", "width": 4 * KM, "offset": 8 * KM},
        "metadata": {"interior": {"lower": [0.0, 7.5 * KM, 7.5 * KM], "upper": [edge, 12.5 * KM, 12.5 * KM]}},
    })


@pytest.mark.parametrize("degree", [2, 3])
def test_plane_wave_convergence_3d(degree, tmp_path):
    study = convergence_study(_plane_wave_cube(degree), spacings=[2.5 * KM, 1.25 * KM], output_dir=tmp_path)
    assert study["rates"][0] >= degree + 0.5


def test_layer_beats_absorbing_boundary_in_3d():
    misfits = compare_boundary_treatments(preset("hws3d", elements=10, degree=3, t_end=3.0))
    assert misfits["pml"]["receiver2"] <= 0.2 * misfits["abc"]["receiver2"]


def test_runs_are_bitwise_reproducible(tmp_path):
    data = preset("strip2d").model_dump()
    data["receivers"] = [{"name": "surface", "location": [20 * KM, 50 * KM]}]
    config = build_config(data)
    run_experiment(config, tmp_path / "a")
    run_experiment(config, tmp_path / "b")
    assert (tmp_path / "a" / "surface.csv").read_bytes() == (tmp_path / "b" / "surface.csv").read_bytes()
