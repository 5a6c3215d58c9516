"""
Experiment drivers: single runs with their artifacts, PML-error and plane-wave
convergence studies, boundary-treatment comparisons and the operator check.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..diagnostics.diagnostics import (
    InteriorSamples,
    TimeSeries,
    check_reference_geometry,
    convergence_rates,
    discrete_energy,
    linf_series,
    pml_error,
    plane_wave_error,
    seismogram_misfit,
)
from ..errors import GeometryInsufficient, ValidationError
from ..operators.operators import QuadratureKind, build_operators
from ..settings.settings import OUTPUT_DIR, worker_count
from ..simulation import Simulation, create_simulation
from ..solver.solver import IntervalCallback
from ..sources.sources import record
from .config import RunConfig, build_config, elements_for_spacing
from .io import write_convergence, write_metadata, write_seismogram, write_series, write_snapshot

logger = logging.getLogger(__name__)

# strip setups resolve the layer tolerance per refinement level unless told otherwise
AUTO_TOL_KINDS = ("strip2d", "halfplane2d")


def output_directory(config: RunConfig, output_dir: Optional[Path] = None) -> Path:
    if output_dir is not None:
        return Path(output_dir)
    if config.output.directory:
        return Path(config.output.directory)
    return Path(OUTPUT_DIR) / config.run.kind


def interior_box(config: RunConfig):
    box = config.metadata.get("interior")
    if box:
        return np.asarray(box["lower"], float), np.asarray(box["upper"], float)
    lower = np.asarray(config.domain.lower, float)
    upper = np.asarray(config.domain.upper, float)
    for spec in config.active_pml():
        width = config.pml_width(spec)
        if "lower" in spec.sides:
            lower[spec.index] += width
        if "upper" in spec.sides:
            upper[spec.index] -= width
    return lower, upper


class RunRecorder:
    """The callbacks of one run and the series they collect"""

    def __init__(self, sim: Simulation, output_dir: Optional[Path] = None, interior: bool = False):
        out = sim.config.output
        self.sim = sim
        self.energy = TimeSeries("energy")
        self.linf = TimeSeries("linf")
        self.interior: Optional[InteriorSamples] = None
        self.snapshots: List[Path] = []
        self.callbacks = [
            IntervalCallback(lambda s: self.energy.append(s.time, discrete_energy(s).E), out.energy_interval, "energy"),
            IntervalCallback(lambda s: self.linf.append(s.time, linf_series(s)), out.linf_interval, "linf"),
        ]
        for receiver in sim.receivers:
            self.callbacks.append(IntervalCallback(lambda s, r=receiver: record(r, s), receiver.interval, receiver.name))
        if interior:
            lower, upper = interior_box(sim.config)
            self.interior = InteriorSamples(lower, upper).bind(sim.mesh)
            self.callbacks.append(IntervalCallback(self.interior, out.interior_interval, "interior"))
        if output_dir is not None and out.snapshot_interval:
            self.callbacks.append(IntervalCallback(lambda s: self._snapshot(s, output_dir), out.snapshot_interval, "snapshot"))

    def _snapshot(self, state, output_dir: Path):
        out = self.sim.config.output
        paths = write_snapshot(state, Path(output_dir) / "snapshots", len(self.snapshots), out.snapshot_format, out.snapshot_components)
        self.snapshots.append(paths[0])


def simulate(config: RunConfig, interior: bool = False, output_dir: Optional[Path] = None) -> RunRecorder:
    sim = create_simulation(config)
    recorder = RunRecorder(sim, output_dir, interior)
    sim.advance(callbacks=recorder.callbacks)
    return recorder


def run_experiment(config: RunConfig, output_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Run one configuration and write seismograms, series, snapshots and metadata"""
    directory = output_directory(config, output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    recorder = simulate(config, output_dir=directory)
    sim = recorder.sim

    files = [write_series(recorder.energy, directory / "energy.csv"), write_series(recorder.linf, directory / "linf.csv")]
    for receiver in sim.receivers:
        files.append(write_seismogram(receiver, directory / f"{receiver.name}.csv"))

    summary = {
        "final_time": sim.state.time,
        "steps": sim.state.step,
        "final_energy": recorder.energy.values[-1],
        "max_linf": max(recorder.linf.values),
        "snapshots": len(recorder.snapshots),
    }
    if sim.plane_wave is not None:
        lower, upper = interior_box(config)
        summary["plane_wave_error"] = plane_wave_error(sim.state, sim.plane_wave, lower, upper)

    metadata = dict(sim.metadata, config=config.model_dump(), summary=summary)
    files.append(write_metadata(directory, metadata))
    logger.info("wrote %d file(s) to %s", len(files) + len(recorder.snapshots), directory)
    return {"directory": str(directory), "files": [str(f) for f in files], "summary": summary, "recorder": recorder}


def enlarged_reference(config: RunConfig) -> RunConfig:
    """The same run without a PML on a domain large enough that its own edges stay silent"""
    data = config.model_dump()
    spacing = config.domain.spacing()
    cp = max(m.to_model().cp for m in config.materials)
    lower, upper = interior_box(config)
    margin_needed = cp * config.run.t_end / 2.0

    new_lower = list(config.domain.lower)
    new_upper = list(config.domain.upper)
    truncated = []
    for spec in config.active_pml():
        axis = spec.index
        width = config.pml_width(spec)
        n = width / spacing[axis]
        if abs(n - round(n)) > 1e-9 * max(n, 1.0):
            raise GeometryInsufficient(f"pml.{spec.axis}: width {width:g} m is not a whole number of elements")
        layers = max(1, math.ceil(margin_needed / spacing[axis] - 1e-9))
        if "lower" in spec.sides:
            new_lower[axis] = lower[axis] - layers * spacing[axis]
            truncated.append((axis, -1))
        if "upper" in spec.sides:
            new_upper[axis] = upper[axis] + layers * spacing[axis]
            truncated.append((axis, 1))
    check_reference_geometry(lower, upper, new_lower, new_upper, truncated, cp, config.run.t_end)

    data["domain"]["lower"] = new_lower
    data["domain"]["upper"] = new_upper
    data["domain"]["elements"] = [int(round((hi - lo) / h)) for lo, hi, h in zip(new_lower, new_upper, spacing)]
    data["pml_enabled"] = False
    data["metadata"] = dict(
        config.metadata,
        provenance="enlarged-domain run",
        interior={"lower": [float(v) for v in lower], "upper": [float(v) for v in upper]},
    )
    return build_config(data)


def _run_interior(config: RunConfig) -> InteriorSamples:
    return simulate(config, interior=True).interior


def measure_pml_error(config: RunConfig, reference: Optional[RunConfig] = None, pool: Optional[ThreadPoolExecutor] = None) -> float:
    reference = reference or enlarged_reference(config)
    if pool is None:
        return pml_error(_run_interior(config), _run_interior(reference))
    run_future = pool.submit(_run_interior, config)
    reference_future = pool.submit(_run_interior, reference)
    return pml_error(run_future.result(), reference_future.result())


def _level_error(config: RunConfig) -> float:
    if config.active_pml():
        return measure_pml_error(config)
    if config.initial.kind == "planewave":
        recorder = simulate(config)
        lower, upper = interior_box(config)
        return plane_wave_error(recorder.sim.state, recorder.sim.plane_wave, lower, upper)
    raise ValidationError(["convergence needs a PML or a plane-wave initial condition"])


def refinement_levels(
    config: RunConfig,
    spacings: Optional[Sequence[float]] = None,
    degrees: Optional[Sequence[int]] = None,
    auto_tol: Optional[bool] = None,
) -> List[RunConfig]:
    """One configuration per h or P level; `auto_tol=None` resolves the tolerance per level for strip setups"""
    if bool(spacings) == bool(degrees):
        raise ValidationError(["give either spacings or degrees"])
    if auto_tol is None:
        auto_tol = config.run.kind in AUTO_TOL_KINDS
    levels = []
    for value in spacings or degrees:
        data = config.model_dump()
        if spacings:
            data["domain"]["elements"] = elements_for_spacing(config, value)
        else:
            data["run"]["degree"] = int(value)
        if auto_tol:
            for layer in data["pml"]:
                layer.update(tol=None, d0=None, tol_auto=True)
        levels.append(build_config(data))
    return levels


def convergence_study(
    config: RunConfig,
    spacings: Optional[Sequence[float]] = None,
    degrees: Optional[Sequence[int]] = None,
    output_dir: Optional[Path] = None,
    auto_tol: Optional[bool] = None,
) -> Dict[str, Any]:
    """Errors over h levels (with rates) or over degrees at fixed h"""
    levels = refinement_levels(config, spacings, degrees, auto_tol)
    auto_tol = any(layer.tol_auto for layer in levels[0].pml)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        errors = list(pool.map(_level_error, levels))

    directory = output_directory(config, output_dir)
    if spacings:
        rates = convergence_rates(errors, spacings)
        path = write_convergence(directory / "convergence.csv", spacings, errors, rates, "h")
        values = list(spacings)
    else:
        rates = []
        path = write_convergence(directory / "convergence.csv", degrees, errors, rates, "degree")
        values = list(degrees)
    for value, error in zip(values, errors):
        logger.info("level %g: error %.4e", value, error)
    return {"levels": values, "errors": errors, "rates": rates, "auto_tol": auto_tol, "file": str(path)}


def compare_boundary_treatments(config: RunConfig) -> Dict[str, Any]:
    """Receiver misfits of the PML run and of the pure absorbing-boundary run against an enlarged reference"""
    abc = build_config(dict(config.model_dump(), pml_enabled=False))
    reference = enlarged_reference(config)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        futures = {name: pool.submit(simulate, cfg) for name, cfg in (("pml", config), ("abc", abc), ("reference", reference))}
        runs = {name: f.result() for name, f in futures.items()}

    misfits: Dict[str, Dict[str, float]] = {"pml": {}, "abc": {}}
    for i, ref_receiver in enumerate(runs["reference"].sim.receivers):
        t_ref, v_ref = ref_receiver.series()
        for name in ("pml", "abc"):
            t, v = runs[name].sim.receivers[i].series()
            misfits[name][ref_receiver.name] = seismogram_misfit(t, v, t_ref, v_ref)
    return misfits


def check_operators(max_degree: int = 12) -> List[Dict[str, Any]]:
    """SBP residual, derivative exactness and weight sums for every rule up to max_degree"""
    rows = []
    for P in range(1, max_degree + 1):
        for kind in QuadratureKind:
            ops = build_operators(P, kind)
            sbp = float(np.max(np.abs(ops.Qmat + ops.Qmat.T - ops.B)))
            x = ops.nodes
            derivative = max(
                float(np.max(np.abs(ops.D @ x ** k - k * x ** max(k - 1, 0))) / max(k, 1))
                for k in range(P + 1)
            )
            weights = abs(float(np.sum(ops.weights)) - 2.0)
            rows.append({
                "degree": P,
                "kind": kind.value,
                "sbp_residual": sbp,
                "derivative_error": derivative,
                "weight_sum_error": weights,
                "passed": sbp <= 1e-12 and derivative <= 1e-10 and weights <= 1e-13,
            })
    return rows
