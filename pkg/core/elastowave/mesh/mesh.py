"""
Structured Cartesian multi-element grid.

Elements are addressed by their multi-index (k, l[, m]); nodal arrays carry the
element axes first and the node axes after them, so an element field of shape
(*counts, *nodes) lines up with the mesh without any reshaping.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidExtent, InvalidReflectionCoefficient, PointOutsideDomain
from ..physics.physics import AXES, MaterialModel

logger = logging.getLogger(__name__)

ElementId = Tuple[int, ...]
FaceKey = Tuple[int, int]

LOCATE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class FaceRef:
    element: ElementId
    axis: int
    side: int
    neighbor: Optional[ElementId] = None
    gamma: Optional[np.ndarray] = None

    @property
    def is_boundary(self) -> bool:
        return self.neighbor is None


@dataclass(frozen=True, eq=False)
class MaterialRegion:
    """A material assigned to every element whose centroid lies in [lower, upper]"""
    material: MaterialModel
    lower: Optional[Sequence[float]] = None
    upper: Optional[Sequence[float]] = None

    def contains(self, points: np.ndarray) -> np.ndarray:
        inside = np.ones(points.shape[:-1], dtype=bool)
        if self.lower is not None:
            inside &= np.all(points >= np.asarray(self.lower, dtype=float), axis=-1)
        if self.upper is not None:
            inside &= np.all(points <= np.asarray(self.upper, dtype=float), axis=-1)
        return inside


@dataclass(frozen=True, eq=False)
class CartesianMesh:
    dim: int
    counts: Tuple[int, ...]
    lower: np.ndarray
    upper: np.ndarray
    material_ids: np.ndarray
    materials: Tuple[MaterialModel, ...]
    boundary: Dict[FaceKey, np.ndarray]

    @property
    def extent(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def spacing(self) -> np.ndarray:
        return self.extent / np.asarray(self.counts, dtype=float)

    @property
    def jacobian(self) -> float:
        return float(np.prod(self.spacing / 2.0))

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.counts))

    def elements(self) -> Iterator[ElementId]:
        return itertools.product(*(range(k) for k in self.counts))

    def gamma(self, axis: int, side: int) -> np.ndarray:
        return self.boundary[(axis, side)]

    def neighbor(self, element: ElementId, axis: int, side: int) -> Optional[ElementId]:
        k = element[axis] + side
        if not 0 <= k < self.counts[axis]:
            return None
        return element[:axis] + (k,) + element[axis + 1:]

    def faces(self) -> List[FaceRef]:
        faces = []
        for element in self.elements():
            for axis in range(self.dim):
                for side in (-1, 1):
                    neighbor = self.neighbor(element, axis, side)
                    gamma = None if neighbor is not None else self.gamma(axis, side)
                    faces.append(FaceRef(element, axis, side, neighbor, gamma))
        return faces

    def material_of(self, element: ElementId) -> MaterialModel:
        return self.materials[int(self.material_ids[element])]

    def axis_coordinates(self, axis: int, nodes: np.ndarray) -> np.ndarray:
        """Physical coordinate of every node along one axis, shape (counts[axis], n)"""
        k = np.arange(self.counts[axis])[:, None]
        return self.lower[axis] + self.spacing[axis] * (k + 0.5 * (np.asarray(nodes)[None, :] + 1.0))

    def node_coordinates(self, nodes: np.ndarray) -> List[np.ndarray]:
        """Per-axis coordinates broadcastable against (*counts, *nodes) fields"""
        coords = []
        n = len(nodes)
        for axis in range(self.dim):
            shape = [1] * (2 * self.dim)
            shape[axis] = self.counts[axis]
            shape[self.dim + axis] = n
            coords.append(self.axis_coordinates(axis, nodes).reshape(shape))
        return coords

    def centroids(self) -> np.ndarray:
        """Element centroids, shape (*counts, dim)"""
        axes = [self.lower[a] + self.spacing[a] * (np.arange(self.counts[a]) + 0.5) for a in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def element_box(self, element: ElementId) -> Tuple[np.ndarray, np.ndarray]:
        lo = self.lower + self.spacing * np.asarray(element, dtype=float)
        return lo, lo + self.spacing

    def describe(self) -> str:
        shape = "x".join(str(k) for k in self.counts)
        spacing = ", ".join(f"d{AXES[a]}={self.spacing[a]:g}" for a in range(self.dim))
        return f"{self.dim}D mesh {shape} ({spacing} m, {len(self.materials)} material(s))"


def _gamma_vector(value, dim: int, key: FaceKey) -> np.ndarray:
    gamma = np.broadcast_to(np.asarray(value, dtype=float), (dim,)).copy()
    if np.any(np.abs(gamma) > 1.0):
        axis, side = key
        face = f"{AXES[axis]}_{'lower' if side < 0 else 'upper'}"
        raise InvalidReflectionCoefficient(f"{face}: reflection coefficients must lie in [-1, 1], got {gamma.tolist()}")
    gamma.setflags(write=False)
    return gamma


def assign_materials(
    lower: np.ndarray,
    upper: np.ndarray,
    counts: Sequence[int],
    regions: Sequence[MaterialRegion],
) -> Tuple[np.ndarray, Tuple[MaterialModel, ...]]:
    """Per-element material ids by centroid; later regions override earlier ones"""
    counts = tuple(int(k) for k in counts)
    dim = len(counts)
    spacing = (upper - lower) / np.asarray(counts, dtype=float)
    axes = [lower[a] + spacing[a] * (np.arange(counts[a]) + 0.5) for a in range(dim)]
    centroids = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    ids = np.full(counts, -1, dtype=np.int64)
    for index, region in enumerate(regions):
        ids[region.contains(centroids)] = index
        for bounds in (region.lower, region.upper):
            if bounds is None:
                continue
            offsets = (np.asarray(bounds, dtype=float)[:dim] - lower) / spacing
            inside = np.isfinite(offsets) & (offsets > 0) & (offsets < np.asarray(counts))
            offsets = np.where(inside, offsets, 0.0)
            if np.any(inside & (np.abs(offsets - np.round(offsets)) > 1e-9)):
                logger.warning(
                    "material %s: region boundary %s does not coincide with element faces",
                    region.material.name, list(bounds),
                )
    if np.any(ids < 0):
        raise InvalidExtent("material regions do not cover the domain")

    used = sorted(set(int(i) for i in np.unique(ids)))
    compact = np.searchsorted(np.asarray(used), ids).astype(np.int64)
    compact.setflags(write=False)
    return compact, tuple(regions[i].material for i in used)


def build_mesh(
    lower: Sequence[float],
    upper: Sequence[float],
    counts: Sequence[int],
    regions: Sequence[MaterialRegion],
    boundary: Optional[Dict[FaceKey, object]] = None,
) -> CartesianMesh:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = len(counts)
    if dim not in (2, 3):
        raise InvalidExtent(f"dimension must be 2 or 3, got {dim}")
    if lower.shape != (dim,) or upper.shape != (dim,):
        raise InvalidExtent(f"box corners must have {dim} coordinates")
    if any(int(k) != k or k < 1 for k in counts):
        raise InvalidExtent(f"element counts must be positive integers, got {list(counts)}")
    if np.any(upper <= lower) or not np.all(np.isfinite(upper - lower)):
        raise InvalidExtent(f"box must have positive finite extent, got {lower.tolist()} .. {upper.tolist()}")

    boundary = dict(boundary or {})
    unknown = [key for key in boundary if key not in itertools.product(range(dim), (-1, 1))]
    if unknown:
        raise InvalidExtent(f"boundary faces {unknown} do not exist in {dim}D")
    gammas = {}
    for key in itertools.product(range(dim), (-1, 1)):
        if key not in boundary:
            logger.debug("face %s%+d has no boundary condition, using absorbing", AXES[key[0]], key[1])
        gammas[key] = _gamma_vector(boundary.get(key, 0.0), dim, key)

    counts = tuple(int(k) for k in counts)
    ids, materials = assign_materials(lower, upper, counts, regions)
    lower.setflags(write=False)
    upper.setflags(write=False)
    mesh = CartesianMesh(dim, counts, lower, upper, ids, materials, gammas)
    logger.debug("built %s", mesh.describe())
    return mesh


def map_to_physical(mesh: CartesianMesh, element: ElementId, reference: Sequence[float]) -> np.ndarray:
    ref = np.asarray(reference, dtype=float)
    return mesh.lower + mesh.spacing * (np.asarray(element, dtype=float) + 0.5 * (ref + 1.0))


def locate_point(mesh: CartesianMesh, point: Sequence[float]) -> Tuple[ElementId, np.ndarray]:
    """Owning element and reference coordinates; points on a shared face go to the lower index"""
    x = np.asarray(point, dtype=float)
    if x.shape != (mesh.dim,):
        raise PointOutsideDomain(f"point {list(point)} does not have {mesh.dim} coordinates")
    tol = LOCATE_TOLERANCE * mesh.extent
    if np.any(x < mesh.lower - tol) or np.any(x > mesh.upper + tol):
        raise PointOutsideDomain(f"point {x.tolist()} lies outside the box {mesh.lower.tolist()} .. {mesh.upper.tolist()}")

    s = (x - mesh.lower) / mesh.spacing
    k = np.clip(np.ceil(s) - 1, 0, np.asarray(mesh.counts) - 1).astype(int)
    reference = np.clip(2.0 * (s - k) - 1.0, -1.0, 1.0)
    return tuple(int(i) for i in k), reference
