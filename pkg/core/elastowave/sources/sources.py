"""
Moment-tensor point sources and receivers.

A source adds M g^(k)(t) times the inverse-mass projection of a Dirac delta to
the stress rates of its owning element; a receiver evaluates the nodal
polynomial of its owning element at a fixed reference point.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import hermite_e

from ..errors import UnsupportedOrder
from ..mesh.mesh import CartesianMesh, ElementId, locate_point
from ..operators.operators import build_operators, eval_basis_at
from ..physics.physics import WaveSystem, wave_system
from ..settings.settings import MAX_DEGREE

logger = logging.getLogger(__name__)

# Voigt index -> (i, j) entry of a symmetric 3x3 tensor
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class GaussianPulse:
    sigma: float
    t0: float
    amplitude: float = 1.0

    def derivative(self, t, k: int):
        u = (np.asarray(t, dtype=float) - self.t0) / self.sigma
        scale = self.amplitude / (self.sigma * np.sqrt(2.0 * np.pi))
        # d^k/dt^k exp(-u^2/2) = (-1)^k He_k(u) exp(-u^2/2) / sigma^k
        return scale * (-1) ** k * hermite_e.hermeval(u, [0] * k + [1]) * np.exp(-0.5 * u ** 2) / self.sigma ** k


@dataclass(frozen=True)
class RampPulse:
    """(t / T^2) exp(-t/T) for t >= 0"""
    T: float
    amplitude: float = 1.0

    def derivative(self, t, k: int):
        t = np.asarray(t, dtype=float)
        rate = -1.0 / self.T
        value = np.exp(-np.maximum(t, 0.0) / self.T) * (rate ** k * t + k * rate ** (k - 1)) / self.T ** 2
        return self.amplitude * np.where(t >= 0, value, 0.0)


SourceTimeFunction = Union[GaussianPulse, RampPulse]


def stf_eval(stf: SourceTimeFunction, t: float, k: int = 0, max_order: int = MAX_DEGREE + 1) -> float:
    if not isinstance(k, (int, np.integer)) or k < 0 or k > max_order:
        raise UnsupportedOrder(f"derivative order must lie in [0, {max_order}], got {k!r}")
    value = stf.derivative(t, int(k))
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, eq=False)
class MomentTensorSource:
    moment: np.ndarray
    location: Tuple[float, ...]
    stf: SourceTimeFunction
    name: str = "source"

    def __post_init__(self):
        M = np.asarray(self.moment, dtype=float)
        if M.shape != (3, 3):
            raise ValueError(f"{self.name}: moment tensor must be 3x3, got {M.shape}")
        if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * max(np.max(np.abs(M)), 1.0)):
            raise ValueError(f"{self.name}: moment tensor must be symmetric")
        M = 0.5 * (M + M.T)
        M.setflags(write=False)
        object.__setattr__(self, "moment", M)

    @classmethod
    def explosive(cls, m0: float, location, stf, name: str = "source") -> "MomentTensorSource":
        return cls(m0 * np.eye(3), tuple(location), stf, name)

    @classmethod
    def from_components(cls, components: dict, location, stf, name: str = "source") -> "MomentTensorSource":
        """Build from keys like mxx, myz (missing entries are zero)"""
        M = np.zeros((3, 3))
        for v, (i, j) in enumerate(_VOIGT_PAIRS):
            key = "m" + "xyz"[i] + "xyz"[j]
            value = float(components.get(key, 0.0))
            M[i, j] = M[j, i] = value
        return cls(M, tuple(location), stf, name)


@dataclass(frozen=True, eq=False)
class PlacedSource:
    source: MomentTensorSource
    element: ElementId
    reference: np.ndarray
    rows: np.ndarray
    amplitudes: np.ndarray
    weights: np.ndarray

    @property
    def stf(self) -> SourceTimeFunction:
        return self.source.stf


def _nodal_delta(mesh: CartesianMesh, degree: int, reference: np.ndarray) -> np.ndarray:
    ops = build_operators(degree)
    weights = np.ones(())
    for axis in range(mesh.dim):
        column = eval_basis_at(ops, float(reference[axis])) / ops.weights
        weights = np.multiply.outer(weights, column)
    return weights / mesh.jacobian


def place_source(source: MomentTensorSource, mesh: CartesianMesh, degree: int) -> PlacedSource:
    system = wave_system(mesh.dim)
    element, reference = locate_point(mesh, source.location[: mesh.dim])
    if np.any(np.abs(reference) >= 1.0 - 1e-12):
        logger.warning("%s sits on a face of element %s; injecting into that element only", source.name, element)
    rows, amplitudes = [], []
    for position, voigt in enumerate(system.stress_voigt):
        i, j = _VOIGT_PAIRS[voigt]
        if source.moment[i, j] != 0.0:
            rows.append(system.dim + position)
            amplitudes.append(source.moment[i, j])
    return PlacedSource(
        source=source,
        element=element,
        reference=reference,
        rows=np.asarray(rows, dtype=int),
        amplitudes=np.asarray(amplitudes, dtype=float),
        weights=_nodal_delta(mesh, degree, reference),
    )


def inject_source(rhs, placed: PlacedSource, t: float, k: int = 0):
    """Add the k-th time derivative of the source term to rhs.dQ"""
    if placed.rows.size == 0:
        return rhs
    g = stf_eval(placed.stf, t, k)
    if g == 0.0:
        return rhs
    index = (placed.rows,) + placed.element
    shape = (-1,) + (1,) * placed.weights.ndim
    rhs.dQ[index] += (g * placed.amplitudes).reshape(shape) * placed.weights
    return rhs


@dataclass(eq=False)
class Receiver:
    location: Tuple[float, ...]
    name: str = "receiver"
    components: Tuple[str, ...] = ()
    interval: Optional[float] = None
    element: Optional[ElementId] = None
    reference: Optional[np.ndarray] = None
    bases: List[np.ndarray] = field(default_factory=list)
    rows: Tuple[int, ...] = ()
    times: List[float] = field(default_factory=list)
    samples: List[np.ndarray] = field(default_factory=list)

    def place(self, mesh: CartesianMesh, degree: int, system: Optional[WaveSystem] = None) -> "Receiver":
        system = system or wave_system(mesh.dim)
        if not self.components:
            self.components = system.components[system.velocity]
        self.rows = tuple(system.index_of(c) for c in self.components)
        self.element, self.reference = locate_point(mesh, self.location[: mesh.dim])
        ops = build_operators(degree)
        self.bases = [eval_basis_at(ops, float(r)) for r in self.reference]
        return self

    def series(self) -> Tuple[np.ndarray, np.ndarray]:
        values = np.array(self.samples) if self.samples else np.zeros((0, len(self.components)))
        return np.array(self.times), values


def sample(receiver: Receiver, Q: np.ndarray) -> np.ndarray:
    values = Q[(list(receiver.rows),) + receiver.element]
    for basis in receiver.bases:
        values = np.tensordot(values, basis, axes=([1], [0]))
    return values


def record(receiver: Receiver, state, t: Optional[float] = None) -> Receiver:
    """Append the receiver's components at time t (defaults to state.time); repeated times are skipped"""
    if receiver.element is None:
        raise ValueError(f"{receiver.name} has not been placed on a mesh")
    t = state.time if t is None else float(t)
    if receiver.times and t <= receiver.times[-1]:
        return receiver
    receiver.times.append(t)
    receiver.samples.append(sample(receiver, state.Q))
    return receiver


def place_all(sources: Sequence[MomentTensorSource], mesh: CartesianMesh, degree: int) -> Tuple[PlacedSource, ...]:
    return tuple(place_source(s, mesh, degree) for s in sources)
