"""
Velocity-stress form of linear elastodynamics.

State layout in 3D is (vx, vy, vz, sxx, syy, szz, sxy, sxz, syz); the 2D
plane-strain (P-SV) mode keeps (vx, vy, sxx, syy, sxy).
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np
import scipy.linalg

from ..errors import AnisotropicUnsupported, InvalidLame, NotSPD

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
COMPONENTS_3D = ("vx", "vy", "vz", "sxx", "syy", "szz", "sxy", "sxz", "syz")
COMPONENTS_2D = ("vx", "vy", "sxx", "syy", "sxy")
STRESS_VOIGT = ("sxx", "syy", "szz", "sxy", "sxz", "syz")

# rows: traction family eta, columns: Voigt stress index
_SELECTION = {
    0: np.array([[1, 0, 0, 0, 0, 0],
                 [0, 0, 0, 1, 0, 0],
                 [0, 0, 0, 0, 1, 0]], dtype=float),
    1: np.array([[0, 0, 0, 1, 0, 0],
                 [0, 1, 0, 0, 0, 0],
                 [0, 0, 0, 0, 0, 1]], dtype=float),
    2: np.array([[0, 0, 0, 0, 1, 0],
                 [0, 0, 0, 0, 0, 1],
                 [0, 0, 1, 0, 0, 0]], dtype=float),
}


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        return AXES.index(axis)
    return int(axis)


def selection_block(axis) -> np.ndarray:
    """The 3x6 block a_xi mapping the Voigt stress vector to the traction on a xi-face"""
    return _SELECTION[_axis_index(axis)].copy()


def coefficient_matrix(axis) -> np.ndarray:
    """Symmetric 9x9 A_xi with off-diagonal blocks a_xi and a_xi^T"""
    a = _SELECTION[_axis_index(axis)]
    A = np.zeros((9, 9))
    A[:3, 3:] = a
    A[3:, :3] = a.T
    return A


def isotropic_stiffness(lam: float, mu: float) -> np.ndarray:
    if not mu > 0 or not lam > -mu:
        raise InvalidLame(f"Lame parameters need mu > 0 and lambda > -mu, got lambda={lam}, mu={mu}")
    C = np.zeros((6, 6))
    C[:3, :3] = lam
    C[:3, :3] += np.diag([2.0 * mu] * 3)
    C[3:, 3:] = np.diag([mu] * 3)
    if np.min(np.linalg.eigvalsh(C)) <= 0:
        raise NotSPD(f"stiffness is not positive definite for lambda={lam}, mu={mu} (needs lambda > -2mu/3)")
    return C


@dataclass(frozen=True, eq=False)
class MaterialModel:
    rho: float
    C: np.ndarray
    name: str = field(default="material", compare=False)

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.shape != (6, 6):
            raise NotSPD(f"stiffness must be 6x6, got {C.shape}")
        if not self.rho > 0:
            raise InvalidLame(f"density must be positive, got {self.rho}")
        scale = np.max(np.abs(C))
        if not np.allclose(C, C.T, rtol=0.0, atol=1e-12 * scale):
            raise NotSPD("stiffness matrix is not symmetric")
        if np.min(np.linalg.eigvalsh(C)) <= 0:
            raise NotSPD("stiffness matrix is not positive definite")
        C = 0.5 * (C + C.T)
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @classmethod
    def from_lame(cls, rho: float, lam: float, mu: float, name: str = "material") -> "MaterialModel":
        return cls(rho=rho, C=isotropic_stiffness(lam, mu), name=name)

    @classmethod
    def from_speeds(cls, rho: float, cp: float, cs: float, name: str = "material") -> "MaterialModel":
        if not cp > cs > 0:
            raise InvalidLame(f"wave speeds need cp > cs > 0, got cp={cp}, cs={cs}")
        mu = rho * cs ** 2
        lam = rho * cp ** 2 - 2.0 * mu
        return cls.from_lame(rho, lam, mu, name=name)

    @property
    def is_isotropic(self) -> bool:
        lam, mu = self.C[0, 1], self.C[3, 3]
        try:
            reference = isotropic_stiffness(lam, mu)
        except (InvalidLame, NotSPD):
            return False
        return bool(np.allclose(self.C, reference, rtol=1e-12, atol=1e-12 * np.max(np.abs(self.C))))

    @property
    def lame(self) -> Tuple[float, float]:
        if not self.is_isotropic:
            raise AnisotropicUnsupported(f"{self.name}: Lame parameters need an isotropic stiffness")
        return float(self.C[0, 1]), float(self.C[3, 3])

    @property
    def cp(self) -> float:
        return wave_speeds(self)[0]

    @property
    def cs(self) -> float:
        return wave_speeds(self)[1]

    @property
    def Zp(self) -> float:
        return self.rho * self.cp

    @property
    def Zs(self) -> float:
        return self.rho * self.cs

    def material_matrix(self) -> np.ndarray:
        """The 9x9 block-diagonal P = diag(rho^-1 I, C)"""
        P = np.zeros((9, 9))
        P[:3, :3] = np.eye(3) / self.rho
        P[3:, 3:] = self.C
        return P


def wave_speeds(m: MaterialModel) -> Tuple[float, float]:
    lam, mu = m.lame
    return float(np.sqrt((2.0 * mu + lam) / m.rho)), float(np.sqrt(mu / m.rho))


def impedance(m: MaterialModel, face_axis, family) -> float:
    cp, cs = wave_speeds(m)
    c = cp if _axis_index(face_axis) == _axis_index(family) else cs
    return m.rho * c


def traction(sigma: np.ndarray, axis) -> np.ndarray:
    return _SELECTION[_axis_index(axis)] @ np.asarray(sigma, dtype=float)


def characteristics(v, T, Z):
    """(q, p) = ((Z v + T)/2, (Z v - T)/2)"""
    return 0.5 * (Z * v + T), 0.5 * (Z * v - T)


def eigen_spectrum(m: MaterialModel, axis) -> np.ndarray:
    """Eigenvalues of P A_xi, sorted ascending"""
    values = scipy.linalg.eigvals(m.material_matrix() @ coefficient_matrix(axis))
    return np.sort(values.real)


@dataclass(frozen=True, eq=False)
class WaveSystem:
    """Component bookkeeping for the 3D system or its 2D P-SV restriction"""
    dim: int
    components: Tuple[str, ...]
    state_index: Tuple[int, ...]
    stress_voigt: Tuple[int, ...]

    @property
    def ncomp(self) -> int:
        return len(self.components)

    @property
    def velocity(self) -> slice:
        return slice(0, self.dim)

    @property
    def stress(self) -> slice:
        return slice(self.dim, self.ncomp)

    @property
    def nstress(self) -> int:
        return len(self.stress_voigt)

    def selection(self, axis) -> np.ndarray:
        """a_xi restricted to the retained families and stresses"""
        return _SELECTION[_axis_index(axis)][: self.dim][:, list(self.stress_voigt)]

    def coefficient_matrix(self, axis) -> np.ndarray:
        idx = list(self.state_index)
        return coefficient_matrix(axis)[np.ix_(idx, idx)]

    def stiffness(self, m: MaterialModel) -> np.ndarray:
        idx = list(self.stress_voigt)
        return m.C[np.ix_(idx, idx)]

    def compliance(self, m: MaterialModel) -> np.ndarray:
        return np.linalg.inv(self.stiffness(m))

    def material_matrix(self, m: MaterialModel) -> np.ndarray:
        idx = list(self.state_index)
        return m.material_matrix()[np.ix_(idx, idx)]

    def index_of(self, name: str) -> int:
        return self.components.index(name)


@lru_cache(maxsize=None)
def wave_system(dim: int) -> WaveSystem:
    if dim == 3:
        return WaveSystem(3, COMPONENTS_3D, tuple(range(9)), (0, 1, 2, 3, 4, 5))
    if dim == 2:
        return reduce_to_2d()
    raise ValueError(f"dimension must be 2 or 3, got {dim}")


def reduce_to_2d() -> WaveSystem:
    """P-SV restriction: d/dz = 0, keep (vx, vy, sxx, syy, sxy)"""
    state_index = tuple(COMPONENTS_3D.index(c) for c in COMPONENTS_2D)
    stress_voigt = tuple(STRESS_VOIGT.index(c) for c in COMPONENTS_2D[2:])
    return WaveSystem(2, COMPONENTS_2D, state_index, stress_voigt)


def retained_closure_violations(m: MaterialModel, system: WaveSystem) -> List[Tuple[int, int]]:
    """(row, col) pairs where a dropped component would feed a retained one"""
    keep = list(system.state_index)
    drop = [i for i in range(9) if i not in keep]
    violations = []
    for axis in range(system.dim):
        PA = m.material_matrix() @ coefficient_matrix(axis)
        block = PA[np.ix_(keep, drop)]
        for r, c in zip(*np.nonzero(np.abs(block) > 0)):
            violations.append((keep[r], drop[c]))
    return violations
