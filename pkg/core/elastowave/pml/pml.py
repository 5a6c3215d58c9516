"""
Perfectly matched layer: damping profiles, CFS shift, θ and auxiliary fields.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import InvalidTol
from ..mesh.mesh import CartesianMesh
from ..physics.physics import AXES
from ..settings.settings import PROFILE_EXPONENT

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PmlAxis:
    """Damping along one axis; a side with zero width carries no layer"""
    axis: int
    interior_lower: float
    interior_upper: float
    width_lower: float
    width_upper: float
    d0: float
    alpha: float = 0.0
    theta: float = 1.0
    exponent: int = PROFILE_EXPONENT

    def __post_init__(self):
        if self.width_lower < 0 or self.width_upper < 0:
            raise ValueError(f"PML widths must be non-negative on axis {AXES[self.axis]}")
        if self.d0 < 0 or self.alpha < 0:
            raise ValueError(f"PML d0 and alpha must be non-negative on axis {AXES[self.axis]}")
        if self.theta not in (0, 1):
            logger.warning("theta=%g on axis %s; only 0 and 1 are analysed", self.theta, AXES[self.axis])

    @property
    def active(self) -> bool:
        return self.d0 > 0 and (self.width_lower > 0 or self.width_upper > 0)


@dataclass(frozen=True)
class PmlConfig:
    axes: Dict[int, PmlAxis] = field(default_factory=dict)

    @property
    def enabled(self) -> bool:
        return any(layer.active for layer in self.axes.values())

    def interior_box(self, mesh: CartesianMesh) -> Tuple[np.ndarray, np.ndarray]:
        lower, upper = mesh.lower.copy(), mesh.upper.copy()
        for axis, layer in self.axes.items():
            if layer.width_lower > 0:
                lower[axis] = layer.interior_lower
            if layer.width_upper > 0:
                upper[axis] = layer.interior_upper
        return lower, upper


@dataclass(eq=False)
class AuxiliaryField:
    """Memory variables w_xi on the damped elements of one axis"""
    axis: int
    elements: Tuple[np.ndarray, ...]
    values: np.ndarray

    @property
    def count(self) -> int:
        return len(self.elements[0]) if self.elements else 0

    @property
    def nbytes(self) -> int:
        return self.values.nbytes


def damping_at(x, layer: PmlAxis):
    """d0 (dist/width)^n inside the layer, 0 in the interior, clamped to d0 past the layer end"""
    x = np.asarray(x, dtype=float)
    d = np.zeros_like(x)
    if layer.width_lower > 0:
        dist = layer.interior_lower - x
        depth = np.clip(dist / layer.width_lower, 0.0, 1.0)
        d = np.where(dist > 0, layer.d0 * depth ** layer.exponent, d)
    if layer.width_upper > 0:
        dist = x - layer.interior_upper
        depth = np.clip(dist / layer.width_upper, 0.0, 1.0)
        d = np.where(dist > 0, layer.d0 * depth ** layer.exponent, d)
    return d if d.ndim else float(d)


def d0_from_tol(cp: float, width: float, tol: float) -> float:
    if not 0 < tol < 1:
        if tol == 1:
            return 0.0
        raise InvalidTol(f"PML tolerance must lie in (0, 1), got {tol}")
    if cp <= 0 or width <= 0:
        raise InvalidTol(f"d0 needs positive cp and width, got cp={cp}, width={width}")
    return float(4.0 * cp / (2.0 * width) * np.log(1.0 / tol))


def resolve_tol(degree: int, spacing: float, width: float) -> float:
    """Relative PML error target tied to the degrees of freedom spanning `width`"""
    if degree < 1 or spacing <= 0 or width <= 0:
        raise InvalidTol(f"resolve_tol needs positive arguments, got P={degree}, dx={spacing}, W={width}")
    return float((width * (degree + 1) / spacing) ** (-(degree + 1)))


def default_alpha(dim: int, cp: float, width: float, alpha_2d: float) -> float:
    if dim == 2:
        return alpha_2d
    return cp / (10.0 * width)


def nodal_damping(mesh: CartesianMesh, pml: PmlConfig, nodes: np.ndarray) -> Dict[int, np.ndarray]:
    """Nodal damping per active axis, shape (counts[axis], n)"""
    return {
        axis: damping_at(mesh.axis_coordinates(axis, nodes), layer)
        for axis, layer in sorted(pml.axes.items())
        if layer.active
    }


def damped_elements(mesh: CartesianMesh, damping: Dict[int, np.ndarray]) -> Dict[int, Tuple[np.ndarray, ...]]:
    """Element index arrays (np.nonzero order) of every element with positive damping along an axis"""
    damped = {}
    for axis, d in damping.items():
        hot = np.max(d, axis=1) > 0
        shape = [1] * mesh.dim
        shape[axis] = mesh.counts[axis]
        mask = np.broadcast_to(hot.reshape(shape), mesh.counts)
        if np.any(mask):
            damped[axis] = np.nonzero(mask)
    return damped


def allocate_auxiliary(
    damped: Dict[int, Tuple[np.ndarray, ...]], ncomp: int, n: int, dim: int
) -> Dict[int, AuxiliaryField]:
    aux = {}
    for axis, elements in damped.items():
        values = np.zeros((ncomp, len(elements[0])) + (n,) * dim)
        aux[axis] = AuxiliaryField(axis=axis, elements=elements, values=values)
    total = sum(a.nbytes for a in aux.values())
    logger.debug("auxiliary fields: %s (%d bytes)", {AXES[a]: f.count for a, f in aux.items()}, total)
    return aux


def describe(pml: PmlConfig) -> List[str]:
    lines = []
    for axis, layer in sorted(pml.axes.items()):
        if not layer.active:
            continue
        lines.append(
            f"{AXES[axis]}: widths ({layer.width_lower:g}, {layer.width_upper:g}) m, "
            f"d0={layer.d0:.4g} 1/s, alpha={layer.alpha:.4g} 1/s, theta={layer.theta:g}"
        )
    return lines


def interior_width(pml: PmlConfig, axis: int) -> Optional[float]:
    layer = pml.axes.get(axis)
    if layer is None:
        return None
    return layer.interior_upper - layer.interior_lower
