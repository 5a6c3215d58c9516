import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .diagnostics.diagnostics import PlaneWaveSpec, plane_wave_state
from .harness.config import RunConfig
from .mesh.mesh import CartesianMesh, build_mesh
from .physics.physics import AXES, wave_system
from .pml.pml import PmlAxis, PmlConfig, d0_from_tol, default_alpha, describe, resolve_tol
from .settings.settings import DEFAULT_ALPHA_2D, SOLVER_SETTINGS
from .solver.solver import (
    Discretization,
    IntervalCallback,
    SimulationState,
    build_discretization,
    create_state,
    run,
    stable_dt,
)
from .sources.sources import GaussianPulse, MomentTensorSource, RampPulse, Receiver, place_all

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Simulation:
    config: RunConfig
    discretization: Discretization
    state: SimulationState
    receivers: List[Receiver]
    dt: float
    metadata: Dict[str, Any] = field(default_factory=dict)
    plane_wave: Optional[PlaneWaveSpec] = None

    @property
    def mesh(self) -> CartesianMesh:
        return self.discretization.mesh

    def advance(self, t_end: Optional[float] = None, callbacks: Sequence[IntervalCallback] = ()) -> SimulationState:
        t_end = self.config.run.t_end if t_end is None else t_end
        return run(self.state, t_end, callbacks, dt=self.dt)


def _boundary(config: RunConfig) -> Dict[tuple, list]:
    faces = {}
    for name, gamma in config.boundary.items():
        axis, side = name.split("_")
        faces[(AXES.index(axis), -1 if side == "lower" else 1)] = gamma if len(gamma) > 1 else gamma[0]
    return faces


def build_pml(config: RunConfig, mesh: CartesianMesh, metadata: Dict[str, Any]) -> PmlConfig:
    axes = {}
    cp = max(m.cp for m in mesh.materials)
    for spec in config.active_pml():
        axis = spec.index
        width = config.pml_width(spec)
        lower = width if "lower" in spec.sides else 0.0
        upper = width if "upper" in spec.sides else 0.0
        interior = (mesh.lower[axis] + lower, mesh.upper[axis] - upper)

        if spec.d0 is not None:
            d0 = spec.d0
        else:
            tol = spec.tol
            if spec.tol_auto:
                span = spec.tol_width or (interior[1] - interior[0])
                tol = resolve_tol(config.run.degree, float(mesh.spacing[axis]), span)
                metadata.setdefault("pml_tol", {})[spec.axis] = tol
            d0 = d0_from_tol(cp, width, tol) if width > 0 else 0.0

        alpha = spec.alpha
        if alpha is None:
            alpha = default_alpha(mesh.dim, cp, width, DEFAULT_ALPHA_2D) if width > 0 else 0.0
            metadata.setdefault("defaults", {})[f"pml.{spec.axis}.alpha"] = alpha
            if mesh.dim == 3:
                logger.warning("pml.%s: alpha defaulted to cp/(10 width) = %.4g 1/s", spec.axis, alpha)

        axes[axis] = PmlAxis(
            axis=axis,
            interior_lower=interior[0],
            interior_upper=interior[1],
            width_lower=lower,
            width_upper=upper,
            d0=d0,
            alpha=alpha,
            theta=spec.theta,
            exponent=spec.exponent,
        )
    return PmlConfig(axes=axes)


def build_sources(config: RunConfig) -> List[MomentTensorSource]:
    sources = []
    for spec in config.sources:
        if spec.stf == "gaussian":
            stf = GaussianPulse(sigma=spec.sigma, t0=spec.t0)
        else:
            stf = RampPulse(T=spec.T)
        sources.append(MomentTensorSource.from_components(spec.moment_components(), spec.location, stf, spec.name))
    return sources


def initial_field(config: RunConfig, disc: Discretization) -> Optional[np.ndarray]:
    spec = config.initial
    mesh = disc.mesh
    system = disc.system
    if spec.kind == "zero":
        return None
    if spec.kind == "random":
        rng = np.random.default_rng(spec.seed)
        Q = spec.amplitude * rng.standard_normal(disc.field_shape)
        # stresses on the impedance scale so both halves of the energy are comparable
        Zp = disc.Zp.reshape(disc.Zp.shape + (1,) * mesh.dim)
        Q[system.stress] *= Zp
        return Q
    if spec.kind == "planewave":
        return plane_wave_state(plane_wave_spec(config), mesh, 0.0, disc.degree)

    coords = mesh.node_coordinates(disc.ops.nodes)
    r2 = sum((coords[a] - spec.center[a]) ** 2 for a in range(mesh.dim))
    profile = spec.amplitude * np.exp(-np.log(2.0) * r2 / spec.width ** 2)
    Q = np.zeros(disc.field_shape)
    components = spec.components or list(system.components[system.velocity])
    for name in components:
        Q[system.index_of(name)] = profile
    return Q


def plane_wave_spec(config: RunConfig) -> Optional[PlaneWaveSpec]:
    spec = config.initial
    if spec.kind != "planewave":
        return None
    return PlaneWaveSpec(
        direction=tuple(spec.direction),
        mode=spec.mode,
        width=spec.width,
        offset=spec.offset,
        amplitude=spec.amplitude,
        polarization=tuple(spec.polarization) if spec.polarization else None,
    )


def create_simulation(config: RunConfig) -> Simulation:
    metadata: Dict[str, Any] = {"kind": config.run.kind}
    metadata.update(config.metadata)

    regions = [m.region() for m in config.materials]
    mesh = build_mesh(config.domain.lower, config.domain.upper, config.domain.elements, regions, _boundary(config))
    pml = build_pml(config, mesh, metadata)
    degree = config.run.degree
    sources = place_all(build_sources(config), mesh, degree)
    disc = build_discretization(mesh, degree, pml, sources, config.run.taylor_order)
    state = create_state(disc, initial_field(config, disc))

    system = wave_system(mesh.dim)
    receivers = [
        Receiver(location=tuple(r.location), name=r.name, components=tuple(r.components),
                 interval=config.output.receiver_interval).place(mesh, degree, system)
        for r in config.receivers
    ]
    dt = stable_dt(mesh, degree, config.run.cfl)

    metadata.update({
        "mesh": mesh.describe(),
        "degree": degree,
        "taylor_order": disc.taylor_order,
        "dt": dt,
        "pml": describe(pml) if pml.enabled else "disabled",
        "damped_elements": {AXES[a]: int(len(e[0])) for a, e in disc.damped.items()},
        "settings": dict(SOLVER_SETTINGS),
    })
    logger.info("%s, P=%d, dt=%.6g s", mesh.describe(), degree, dt)
    for line in describe(pml):
        logger.info("pml %s", line)
    return Simulation(config, disc, state, receivers, dt, metadata, plane_wave_spec(config))
