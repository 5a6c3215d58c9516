"""
Semi-discrete DG operator with PML memory terms and the ADER Taylor stepper.

Fields are stored mesh-wide: Q has shape (ncomp, *counts, *nodes) and the
auxiliary field of axis xi has shape (ncomp, n_damped_xi, *nodes). Face data
is computed once per axis and reused by both the Q and the w_xi updates.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DivergenceDetected, UnsupportedDegree
from ..flux.flux import boundary_hats, fluctuation_values, flux_values, interface_hats
from ..mesh.mesh import CartesianMesh
from ..operators.operators import ElementOperators, build_operators, derivative_along
from ..physics.physics import AXES, WaveSystem, wave_system
from ..pml.pml import AuxiliaryField, PmlConfig, allocate_auxiliary, damped_elements, nodal_damping
from ..settings.settings import DEFAULT_CFL
from ..sources.sources import inject_source

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Discretization:
    """Everything a step reads but never writes"""
    mesh: CartesianMesh
    system: WaveSystem
    ops: ElementOperators
    rho: np.ndarray
    Zp: np.ndarray
    Zs: np.ndarray
    stiffness: Tuple[np.ndarray, ...]
    pml: PmlConfig
    damping: Dict[int, np.ndarray]
    damped: Dict[int, Tuple[np.ndarray, ...]]
    sources: Tuple = ()
    taylor_order: int = 0

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def degree(self) -> int:
        return self.ops.degree

    @property
    def ncomp(self) -> int:
        return self.system.ncomp

    @property
    def field_shape(self) -> Tuple[int, ...]:
        return (self.ncomp,) + self.mesh.counts + (self.ops.size,) * self.dim


@dataclass(eq=False)
class SimulationState:
    discretization: Discretization
    Q: np.ndarray
    aux: Dict[int, AuxiliaryField] = field(default_factory=dict)
    time: float = 0.0
    step: int = 0

    def copy(self) -> "SimulationState":
        aux = {
            axis: AuxiliaryField(axis=f.axis, elements=f.elements, values=f.values.copy())
            for axis, f in self.aux.items()
        }
        return SimulationState(self.discretization, self.Q.copy(), aux, self.time, self.step)


@dataclass(eq=False)
class RhsBuffers:
    dQ: np.ndarray
    dw: Dict[int, np.ndarray] = field(default_factory=dict)


def build_discretization(
    mesh: CartesianMesh,
    degree: int,
    pml: Optional[PmlConfig] = None,
    sources: Sequence = (),
    taylor_order: Optional[int] = None,
) -> Discretization:
    ops = build_operators(degree)
    system = wave_system(mesh.dim)
    pml = pml or PmlConfig()

    ids = mesh.material_ids
    rho = np.array([m.rho for m in mesh.materials])[ids]
    Zp = np.array([m.Zp for m in mesh.materials])[ids]
    Zs = np.array([m.Zs for m in mesh.materials])[ids]
    stiffness = tuple(system.stiffness(m) for m in mesh.materials)

    damping = nodal_damping(mesh, pml, ops.nodes)
    damped = damped_elements(mesh, damping)
    order = degree + 1 if taylor_order is None else int(taylor_order)
    if order < 1:
        raise UnsupportedDegree(f"Taylor order must be at least 1, got {order}")
    return Discretization(
        mesh=mesh, system=system, ops=ops, rho=rho, Zp=Zp, Zs=Zs, stiffness=stiffness,
        pml=pml, damping=damping, damped=damped, sources=tuple(sources), taylor_order=order,
    )


def create_state(disc: Discretization, Q: Optional[np.ndarray] = None, time: float = 0.0) -> SimulationState:
    if Q is None:
        Q = np.zeros(disc.field_shape)
    elif Q.shape != disc.field_shape:
        raise ValueError(f"initial field has shape {Q.shape}, expected {disc.field_shape}")
    aux = allocate_auxiliary(disc.damped, disc.ncomp, disc.ops.size, disc.dim)
    return SimulationState(disc, np.array(Q, dtype=float), aux, float(time), 0)


def _along(axis: int, index) -> tuple:
    """Index on element axis `axis` of an array with a leading component axis"""
    return (slice(None),) * (1 + axis) + (index,)


def _face_fluxes(disc: Discretization, Q: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """FL on every xi = -1 face and FR on every xi = +1 face, shape (ncomp, *counts, n^(d-1))"""
    d = disc.dim
    system = disc.system
    a = system.selection(axis)
    node_axis = 1 + d + axis
    QL = np.take(Q, 0, axis=node_axis)
    QR = np.take(Q, -1, axis=node_axis)
    vL, TL = QL[system.velocity], np.tensordot(a, QL[system.stress], axes=1)
    vR, TR = QR[system.velocity], np.tensordot(a, QR[system.stress], axes=1)

    Z = np.stack([disc.Zp if eta == axis else disc.Zs for eta in range(d)])
    Z = Z.reshape(Z.shape + (1,) * (d - 1))

    FL = np.empty_like(QL)
    FR = np.empty_like(QR)
    K = disc.mesh.counts[axis]
    if K > 1:
        m, p = _along(axis, slice(0, K - 1)), _along(axis, slice(1, K))
        v_hat, T_hat = interface_hats(vR[m], TR[m], Z[m], vL[p], TL[p], Z[p])
        G = fluctuation_values(vR[m], TR[m], v_hat, T_hat, Z[m], 1)
        FR[m] = flux_values(system, G, Z[m], axis, 1)
        G = fluctuation_values(vL[p], TL[p], v_hat, T_hat, Z[p], -1)
        FL[p] = flux_values(system, G, Z[p], axis, -1)

    for side, trace_v, trace_T, out, index in ((-1, vL, TL, FL, 0), (1, vR, TR, FR, K - 1)):
        b = _along(axis, slice(index, index + 1))
        gamma = disc.mesh.gamma(axis, side).reshape((d,) + (1,) * (2 * d - 1))
        v_hat, T_hat = boundary_hats(trace_v[b], trace_T[b], Z[b], gamma, side)
        G = fluctuation_values(trace_v[b], trace_T[b], v_hat, T_hat, Z[b], side)
        out[b] = flux_values(system, G, Z[b], axis, side)
    return FL, FR


def _apply_material(disc: Discretization, raw: np.ndarray) -> np.ndarray:
    system = disc.system
    d = disc.dim
    out = np.empty_like(raw)
    out[system.velocity] = raw[system.velocity] / disc.rho.reshape(disc.rho.shape + (1,) * d)
    stress = raw[system.stress]
    if len(disc.stiffness) == 1:
        out[system.stress] = np.tensordot(disc.stiffness[0], stress, axes=1)
        return out
    target = out[system.stress]
    ids = disc.mesh.material_ids
    for mid, C in enumerate(disc.stiffness):
        mask = ids == mid
        target[:, mask] = np.tensordot(C, stress[:, mask], axes=1)
    return out


def apply_operator(disc: Discretization, Q: np.ndarray, aux: Dict[int, np.ndarray]) -> RhsBuffers:
    """The linear semi-discrete operator L(Q, w) without sources"""
    d = disc.dim
    system = disc.system
    ops = disc.ops
    spacing = disc.mesh.spacing
    raw = np.zeros_like(Q)
    dw = {}

    for axis in range(d):
        a = system.selection(axis)
        node_axis = 1 + d + axis
        DQ = derivative_along(Q, node_axis, ops, spacing[axis])
        AD = np.empty_like(Q)
        AD[system.velocity] = np.tensordot(a, DQ[system.stress], axes=1)
        AD[system.stress] = np.tensordot(a.T, DQ[system.velocity], axes=1)
        raw += AD

        FL, FR = _face_fluxes(disc, Q, axis)
        scale = 2.0 / spacing[axis]
        first = (slice(None),) * node_axis + (0,)
        last = (slice(None),) * node_axis + (-1,)
        raw[first] -= FL * (scale / ops.weights[0])
        raw[last] -= FR * (scale / ops.weights[-1])

        if axis not in aux:
            continue
        elements = disc.damped[axis]
        sub = (slice(None),) + elements
        layer = disc.pml.axes[axis]
        w = aux[axis]
        shape = [len(elements[0])] + [1] * d
        shape[1 + axis] = ops.size
        damping = disc.damping[axis][elements[axis]].reshape(shape)

        face = np.zeros_like(w)
        sub_first = (slice(None),) * (2 + axis) + (0,)
        sub_last = (slice(None),) * (2 + axis) + (-1,)
        face[sub_first] = FL[sub] * (scale / ops.weights[0])
        face[sub_last] = FR[sub] * (scale / ops.weights[-1])

        dw[axis] = AD[sub] - (damping + layer.alpha) * w - layer.theta * face
        raw[sub] -= damping * w

    return RhsBuffers(dQ=_apply_material(disc, raw), dw=dw)


def compute_rhs(state: SimulationState) -> RhsBuffers:
    aux = {axis: f.values for axis, f in state.aux.items()}
    return apply_operator(state.discretization, state.Q, aux)


def stable_dt(mesh: CartesianMesh, degree: int, cfl: float = DEFAULT_CFL) -> float:
    """CFL min(spacing) / (sqrt(cp^2 + cs^2) (2P + 1)) with the largest speeds present"""
    if not isinstance(degree, (int, np.integer)) or degree < 1:
        raise UnsupportedDegree(f"degree must be at least 1, got {degree!r}")
    if not 0 < cfl <= 1:
        raise ValueError(f"CFL number must lie in (0, 1], got {cfl}")
    cp = max(m.cp for m in mesh.materials)
    cs = max(m.cs for m in mesh.materials)
    return float(cfl * np.min(mesh.spacing) / (math.sqrt(cp ** 2 + cs ** 2) * (2 * degree + 1)))


def ader_step(state: SimulationState, dt: float, sources: Optional[Iterable] = None) -> SimulationState:
    """One Taylor step sum_k dt^k/k! u^(k) with u^(k+1) = L u^(k) + f^(k)(t_n), in place"""
    disc = state.discretization
    sources = disc.sources if sources is None else tuple(sources)

    Q_k = state.Q
    w_k = {axis: f.values for axis, f in state.aux.items()}
    Q_next = state.Q.copy()
    w_next = {axis: w.copy() for axis, w in w_k.items()}
    factor = 1.0
    for k in range(disc.taylor_order):
        rhs = apply_operator(disc, Q_k, w_k)
        for src in sources:
            inject_source(rhs, src, state.time, k)
        factor *= dt / (k + 1)
        Q_next += factor * rhs.dQ
        for axis, dw in rhs.dw.items():
            w_next[axis] += factor * dw
        Q_k, w_k = rhs.dQ, rhs.dw

    if not np.all(np.isfinite(Q_next)) or not all(np.all(np.isfinite(w)) for w in w_next.values()):
        raise DivergenceDetected(state.time + dt, state.step + 1)
    state.Q = Q_next
    for axis, w in w_next.items():
        state.aux[axis].values = w
    state.time += dt
    state.step += 1
    return state


class IntervalCallback:
    """Calls `fn(state)` at the start, every `interval` seconds and at the end"""

    def __init__(self, fn: Callable[[SimulationState], None], interval: Optional[float] = None, name: str = ""):
        self.fn = fn
        self.interval = interval if interval and interval > 0 else None
        self.name = name or getattr(fn, "__name__", "callback")
        self._next = 0.0
        self._last: Optional[float] = None

    def _fire(self, state: SimulationState):
        self.fn(state)
        self._last = state.time
        if self.interval is not None:
            while self._next <= state.time * (1 + 1e-12) + 1e-12:
                self._next += self.interval

    def start(self, state: SimulationState):
        self._next = state.time
        self._fire(state)

    def after_step(self, state: SimulationState):
        if self.interval is None or state.time >= self._next - 1e-9 * self.interval:
            self._fire(state)

    def finish(self, state: SimulationState):
        if self._last != state.time:
            self._fire(state)


def run(
    state: SimulationState,
    t_end: float,
    callbacks: Sequence[IntervalCallback] = (),
    dt: Optional[float] = None,
    cfl: float = DEFAULT_CFL,
) -> SimulationState:
    """Fixed-step march landing exactly on t_end"""
    if t_end < state.time:
        raise ValueError(f"t_end={t_end} lies before the current time {state.time}")
    disc = state.discretization
    dt = dt or stable_dt(disc.mesh, disc.degree, cfl)
    t0 = state.time
    n_steps = int(math.ceil((t_end - t0) / dt - 1e-9)) if t_end > t0 else 0
    logger.info(
        "marching %d step(s) of dt=%.6g s to t=%g s (%s damped elements)",
        n_steps, dt, t_end, {AXES[a]: len(e[0]) for a, e in disc.damped.items()} or "no",
    )

    for cb in callbacks:
        cb.start(state)
    for i in range(n_steps):
        final = i == n_steps - 1
        ader_step(state, t_end - state.time if final else dt)
        state.time = t_end if final else t0 + (i + 1) * dt
        if state.step % 100 == 0:
            logger.debug("step %d, t=%.6g s", state.step, state.time)
        for cb in callbacks:
            cb.after_step(state)
    for cb in callbacks:
        cb.finish(state)
    return state
