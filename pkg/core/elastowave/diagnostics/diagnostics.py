"""
Energy, L-infinity series, PML error, convergence rates and plane-wave solutions.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import AnisotropicUnsupported, DegenerateError, GeometryInsufficient, ShapeMismatch
from ..mesh.mesh import CartesianMesh
from ..operators.operators import build_operators
from ..physics.physics import AXES, wave_system

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergySample:
    t: float
    E: float


@dataclass
class TimeSeries:
    """A `t,value` series such as energy or the velocity L-infinity norm"""
    name: str
    times: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)

    def append(self, t: float, value: float):
        self.times.append(float(t))
        self.values.append(float(value))

    def window_max(self, start: float, stop: float) -> float:
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        mask = (t >= start) & (t <= stop)
        return float(np.max(v[mask])) if np.any(mask) else float("nan")

    def at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))


def _quadrature_weights(disc) -> np.ndarray:
    """J * h_a h_b [h_c] broadcast over (*counts, *nodes)"""
    h = disc.ops.weights
    w = np.ones(())
    for _ in range(disc.dim):
        w = np.multiply.outer(w, h)
    return disc.mesh.jacobian * w


def discrete_energy(state) -> EnergySample:
    """1/2 sum J H (rho |v|^2 + sigma^T C^-1 sigma), reduced element by element in index order"""
    disc = state.discretization
    system = disc.system
    d = disc.dim
    Q = state.Q
    v = Q[system.velocity]
    s = Q[system.stress]
    density = disc.rho.reshape(disc.rho.shape + (1,) * d) * np.sum(v * v, axis=0)

    ids = disc.mesh.material_ids
    strain = np.empty_like(density)
    for mid, material in enumerate(disc.mesh.materials):
        S = system.compliance(material)
        mask = ids == mid
        strain[mask] = np.einsum("a...,ab,b...->...", s[:, mask], S, s[:, mask])

    weighted = 0.5 * (density + strain) * _quadrature_weights(disc)
    per_element = weighted.reshape(disc.mesh.n_elements, -1).sum(axis=1)
    return EnergySample(t=state.time, E=float(np.sum(per_element)))


def linf_series(state) -> float:
    """max over nodes of |v|"""
    v = state.Q[state.discretization.system.velocity]
    return float(np.sqrt(np.max(np.sum(v * v, axis=0), initial=0.0)))


def velocity_magnitude(state) -> np.ndarray:
    v = state.Q[state.discretization.system.velocity]
    return np.sqrt(np.sum(v * v, axis=0))


@dataclass
class InteriorSamples:
    """Nodal velocities of the elements inside a box, sampled over time"""
    lower: np.ndarray
    upper: np.ndarray
    slices: Tuple[slice, ...] = ()
    times: List[float] = field(default_factory=list)
    values: List[np.ndarray] = field(default_factory=list)

    def bind(self, mesh: CartesianMesh) -> "InteriorSamples":
        centroids = [mesh.lower[a] + mesh.spacing[a] * (np.arange(mesh.counts[a]) + 0.5) for a in range(mesh.dim)]
        slices = []
        for a, c in enumerate(centroids):
            inside = np.flatnonzero((c >= self.lower[a]) & (c <= self.upper[a]))
            if inside.size == 0:
                raise GeometryInsufficient(f"no elements inside the sampled box along {AXES[a]}")
            slices.append(slice(int(inside[0]), int(inside[-1]) + 1))
        self.slices = tuple(slices)
        return self

    def __call__(self, state):
        v = state.Q[state.discretization.system.velocity]
        self.times.append(state.time)
        self.values.append(v[(slice(None),) + self.slices].copy())


def pml_error(run: InteriorSamples, reference: InteriorSamples) -> float:
    """max over shared sample times and interior nodes of |v_run - v_reference|"""
    n = min(len(run.times), len(reference.times))
    if n == 0:
        raise ShapeMismatch("no samples to compare")
    if not np.allclose(run.times[:n], reference.times[:n], rtol=1e-9, atol=1e-12):
        raise ShapeMismatch("run and reference were sampled at different times")
    error = 0.0
    for a, b in zip(run.values[:n], reference.values[:n]):
        if a.shape != b.shape:
            raise ShapeMismatch(f"interior discretizations differ: {a.shape} vs {b.shape}")
        error = max(error, float(np.sqrt(np.max(np.sum((a - b) ** 2, axis=0), initial=0.0))))
    return error


def check_reference_geometry(
    interior_lower: Sequence[float],
    interior_upper: Sequence[float],
    reference_lower: Sequence[float],
    reference_upper: Sequence[float],
    truncated: Sequence[Tuple[int, int]],
    cp: float,
    t_end: float,
):
    """Reflections off a truncated reference side must not reach the interior before t_end"""
    needed = cp * t_end / 2.0
    for axis, side in truncated:
        if side < 0:
            margin = interior_lower[axis] - reference_lower[axis]
        else:
            margin = reference_upper[axis] - interior_upper[axis]
        if margin < needed * (1 - 1e-12):
            raise GeometryInsufficient(
                f"reference margin {margin:g} m on {AXES[axis]}{'-' if side < 0 else '+'} is below cp*T/2 = {needed:g} m"
            )


def convergence_rates(errors: Sequence[float], spacings: Sequence[float]) -> List[float]:
    errors = np.asarray(errors, dtype=float)
    spacings = np.asarray(spacings, dtype=float)
    if errors.size < 2 or errors.size != spacings.size:
        raise DegenerateError("convergence rates need at least two levels with one spacing each")
    if np.any(errors <= 0):
        raise DegenerateError(f"errors must be positive, got {errors.tolist()}")
    return list(np.log(errors[:-1] / errors[1:]) / np.log(spacings[:-1] / spacings[1:]))


def seismogram_misfit(times_a, values_a, times_b, values_b) -> float:
    """Max-norm difference after interpolating b onto a's times within the common window"""
    times_a = np.asarray(times_a, dtype=float)
    times_b = np.asarray(times_b, dtype=float)
    values_a = np.asarray(values_a, dtype=float).reshape(len(times_a), -1)
    values_b = np.asarray(values_b, dtype=float).reshape(len(times_b), -1)
    if values_a.shape[1] != values_b.shape[1]:
        raise ShapeMismatch(f"component counts differ: {values_a.shape[1]} vs {values_b.shape[1]}")
    keep = (times_a >= times_b[0]) & (times_a <= times_b[-1])
    if not np.any(keep):
        raise ShapeMismatch("seismograms do not overlap in time")
    misfit = 0.0
    for c in range(values_a.shape[1]):
        other = np.interp(times_a[keep], times_b, values_b[:, c])
        misfit = max(misfit, float(np.max(np.abs(values_a[keep, c] - other))))
    return misfit


@dataclass(frozen=True)
class PlaneWaveSpec:
    direction: Tuple[float, ...]
    mode: str = "P"
    width: float = 1.0
    offset: float = 0.0
    amplitude: float = 1.0
    polarization: Optional[Tuple[float, ...]] = None


def bump(s, width: float):
    """(1 - (s/w)^2)^6 on |s| < w, zero elsewhere; five continuous derivatives"""
    r = np.asarray(s, dtype=float) / width
    return np.where(np.abs(r) < 1.0, (1.0 - r ** 2) ** 6, 0.0)


def plane_wave_mode(spec: PlaneWaveSpec, material, dim: int) -> Tuple[np.ndarray, float]:
    """Eigenvector Q0 and speed c with -c Q0 = P A_n Q0 for the requested mode"""
    if not material.is_isotropic:
        raise AnisotropicUnsupported(f"{material.name}: plane waves need an isotropic material")
    system = wave_system(dim)
    n = np.asarray(spec.direction, dtype=float)[:dim]
    n = n / np.linalg.norm(n)
    a_n = sum(n[axis] * system.selection(axis) for axis in range(dim))
    C = system.stiffness(material)
    eigvals, eigvecs = np.linalg.eigh(a_n @ C @ a_n.T / material.rho)

    mode = spec.mode.upper()
    if mode == "P":
        v0 = eigvecs[:, -1]
    elif mode == "S":
        shear = eigvecs[:, :-1]
        if spec.polarization is not None:
            hint = np.asarray(spec.polarization, dtype=float)[:dim]
            v0 = shear @ (shear.T @ hint)
            if np.linalg.norm(v0) < 1e-12:
                raise ValueError("S polarization hint is parallel to the propagation direction")
        else:
            v0 = shear[:, 0]
        eigvals = eigvals[:-1]
    else:
        raise ValueError(f"plane-wave mode must be P or S, got {spec.mode!r}")
    v0 = v0 / np.linalg.norm(v0)
    c = float(np.sqrt(eigvals[-1] if mode == "P" else eigvals[0]))
    sigma0 = -(C @ a_n.T @ v0) / c
    return np.concatenate([v0, sigma0]) * spec.amplitude, c


def plane_wave_state(spec: PlaneWaveSpec, mesh: CartesianMesh, t: float, degree: int) -> np.ndarray:
    """Nodal sampling of Q0 phi(n.x - offset - c t) over the whole mesh"""
    if len(mesh.materials) != 1:
        raise AnisotropicUnsupported("plane waves need a homogeneous material")
    Q0, c = plane_wave_mode(spec, mesh.materials[0], mesh.dim)
    n = np.asarray(spec.direction, dtype=float)[: mesh.dim]
    n = n / np.linalg.norm(n)
    coords = mesh.node_coordinates(build_operators(degree).nodes)
    phase = sum(n[a] * coords[a] for a in range(mesh.dim)) - spec.offset - c * t
    profile = bump(phase, spec.width)
    return Q0.reshape((-1,) + (1,) * profile.ndim) * profile[None]


def plane_wave_residual(spec: PlaneWaveSpec, material, dim: int) -> float:
    """|| c Q0 + P A_n Q0 || relative to ||Q0||, zero for an exact traveling mode"""
    system = wave_system(dim)
    Q0, c = plane_wave_mode(spec, material, dim)
    n = np.asarray(spec.direction, dtype=float)[:dim]
    n = n / np.linalg.norm(n)
    A_n = sum(n[axis] * system.coefficient_matrix(axis) for axis in range(dim))
    residual = c * Q0 + system.material_matrix(material) @ A_n @ Q0
    return float(np.linalg.norm(residual) / (c * np.linalg.norm(Q0)))


def plane_wave_error(state, spec: PlaneWaveSpec, lower=None, upper=None) -> float:
    """Max velocity error against the exact mode, optionally over the elements inside [lower, upper]"""
    disc = state.discretization
    exact = plane_wave_state(spec, disc.mesh, state.time, disc.degree)
    index = (disc.system.velocity,)
    if lower is not None and upper is not None:
        box = InteriorSamples(np.asarray(lower, float), np.asarray(upper, float)).bind(disc.mesh)
        index += box.slices
    return float(np.max(np.abs(state.Q[index] - exact[index])))
