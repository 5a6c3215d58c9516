"""
Hat variables, fluctuations and flux vectors on element faces.

All functions work elementwise on broadcastable arrays, one scalar problem per
wave family and face node. Characteristics follow q = (Z v + T)/2 and
p = (Z v - T)/2; on a xi = +1 face p leaves the element and q enters it, on a
xi = -1 face the roles swap.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidReflectionCoefficient
from ..physics.physics import WaveSystem, characteristics

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TractionVelocityPair:
    v: np.ndarray
    T: np.ndarray


@dataclass(frozen=True, eq=False)
class Fluctuation:
    G: np.ndarray


@dataclass(frozen=True, eq=False)
class FluxVectors:
    """FL on a xi = -1 face, FR on a xi = +1 face; the other one is None"""
    side: int
    values: np.ndarray

    @property
    def FL(self):
        return self.values if self.side < 0 else None

    @property
    def FR(self):
        return self.values if self.side > 0 else None


def _check_side(side: int):
    if side not in (-1, 1):
        raise ValueError(f"face side must be -1 or +1, got {side}")


def boundary_hats(v, T, Z, gamma, side: int):
    """Array form of hat_boundary returning (v_hat, T_hat)"""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(np.abs(gamma) > 1.0):
        raise InvalidReflectionCoefficient(f"reflection coefficients must lie in [-1, 1], got {gamma}")
    q, p = characteristics(v, T, Z)
    if side > 0:
        return (1.0 + gamma) * p / Z, (gamma - 1.0) * p
    return (1.0 + gamma) * q / Z, (1.0 - gamma) * q


def interface_hats(v_minus, T_minus, Z_minus, v_plus, T_plus, Z_plus):
    """Array form of hat_interface; the minus element sits on the negative side of the face"""
    _, p_minus = characteristics(v_minus, T_minus, Z_minus)
    q_plus, _ = characteristics(v_plus, T_plus, Z_plus)
    total = Z_minus + Z_plus
    v_hat = 2.0 * (p_minus + q_plus) / total
    T_hat = 2.0 * (Z_minus * q_plus - Z_plus * p_minus) / total
    return v_hat, T_hat


def fluctuation_values(v, T, v_hat, T_hat, Z, side: int):
    if side > 0:
        return 0.5 * Z * (v - v_hat) + 0.5 * (T - T_hat)
    return 0.5 * Z * (v - v_hat) - 0.5 * (T - T_hat)


def flux_values(system: WaveSystem, G: np.ndarray, Z: np.ndarray, axis: int, side: int) -> np.ndarray:
    """(G; side * a_xi^T Z^-1 G) with the family on axis 0 of G and Z"""
    a = system.selection(axis)
    out = np.empty((system.ncomp,) + np.shape(G)[1:])
    out[system.velocity] = G
    out[system.stress] = side * np.tensordot(a.T, G / Z, axes=1)
    return out


def hat_boundary(v, T, Z, gamma, side: int) -> TractionVelocityPair:
    _check_side(side)
    v_hat, T_hat = boundary_hats(np.asarray(v, dtype=float), np.asarray(T, dtype=float), np.asarray(Z, dtype=float), gamma, side)
    return TractionVelocityPair(v=v_hat, T=T_hat)


def hat_interface(v_minus, T_minus, Z_minus, v_plus, T_plus, Z_plus) -> TractionVelocityPair:
    v_hat, T_hat = interface_hats(*(np.asarray(a, dtype=float) for a in (v_minus, T_minus, Z_minus, v_plus, T_plus, Z_plus)))
    return TractionVelocityPair(v=v_hat, T=T_hat)


def fluctuation(v, T, v_hat, T_hat, Z, side: int) -> Fluctuation:
    _check_side(side)
    return Fluctuation(G=fluctuation_values(*(np.asarray(a, dtype=float) for a in (v, T, v_hat, T_hat, Z)), side))


def flux_vectors(G, Z, axis: int, side: int, system: WaveSystem) -> FluxVectors:
    _check_side(side)
    G = np.asarray(G, dtype=float)
    Z = np.broadcast_to(np.asarray(Z, dtype=float), G.shape)
    return FluxVectors(side=side, values=flux_values(system, G, Z, axis, side))


def face_energy_rate(v, T, v_hat, T_hat, Z, side: int):
    """Energy rate a face contributes per family: -(G^2/Z -+ T_hat v_hat)"""
    G = fluctuation_values(v, T, v_hat, T_hat, Z, side)
    return -(G ** 2 / Z - side * T_hat * v_hat)
