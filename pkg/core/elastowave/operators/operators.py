"""
Nodal spectral operators on the reference interval [-1, 1].

The 1D building blocks (quadrature, Lagrange basis, derivative and face
matrices) satisfy the summation-by-parts identity Q + Q^T = B and are applied
along one axis of a tensor-product nodal field at a time.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial import legendre

from ..errors import NonConvergence, OutOfReferenceDomain, ShapeMismatch, UnsupportedDegree
from ..settings.settings import MAX_DEGREE, NEWTON_MAX_ITER, NEWTON_TOL

logger = logging.getLogger(__name__)


class QuadratureKind(str, Enum):
    GLL = "GLL"
    GL = "GL"
    GLR = "GLR"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    degree: int
    kind: QuadratureKind
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def exactness(self) -> int:
        """Highest monomial degree integrated exactly"""
        return {
            QuadratureKind.GLL: 2 * self.degree - 1,
            QuadratureKind.GLR: 2 * self.degree,
            QuadratureKind.GL: 2 * self.degree + 1,
        }[self.kind]


@dataclass(frozen=True, eq=False)
class ElementOperators:
    rule: QuadratureRule
    H: np.ndarray
    Qmat: np.ndarray
    D: np.ndarray
    B: np.ndarray
    eL: np.ndarray
    eR: np.ndarray
    barycentric: np.ndarray

    @property
    def degree(self) -> int:
        return self.rule.degree

    @property
    def size(self) -> int:
        return self.rule.degree + 1

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights


@dataclass(frozen=True, eq=False)
class NodalField:
    """Nodal coefficients of one element, shape (components, n, n[, n])"""
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.ndim - 1

    @property
    def components(self) -> int:
        return self.values.shape[0]


def _legendre(n: int, x: np.ndarray) -> np.ndarray:
    return legendre.legval(x, [0] * n + [1])


def _legendre_deriv(n: int, x: np.ndarray, m: int = 1) -> np.ndarray:
    return legendre.legval(x, legendre.legder([0] * n + [1], m))


def _newton(f, df, guess: np.ndarray, label: str) -> np.ndarray:
    x = guess.copy()
    for _ in range(NEWTON_MAX_ITER):
        step = f(x) / df(x)
        x = x - step
        if np.max(np.abs(step), initial=0.0) <= NEWTON_TOL:
            return x
    raise NonConvergence(f"Newton iteration for {label} nodes did not reach {NEWTON_TOL:g}")


def build_quadrature(P: int, kind=QuadratureKind.GLL) -> QuadratureRule:
    """Nodes and weights of the (P+1)-point GLL, GL or GLR rule"""
    kind = QuadratureKind(kind)
    if not isinstance(P, (int, np.integer)) or not 1 <= P <= MAX_DEGREE:
        raise UnsupportedDegree(f"degree must be an integer in [1, {MAX_DEGREE}], got {P!r}")
    P = int(P)
    i = np.arange(P + 1)

    if kind is QuadratureKind.GLL:
        inner = -np.cos(np.pi * i[1:-1] / P)
        inner = _newton(
            lambda x: _legendre_deriv(P, x),
            lambda x: _legendre_deriv(P, x, 2),
            inner,
            "GLL",
        )
        nodes = np.concatenate(([-1.0], inner, [1.0]))
        weights = 2.0 / (P * (P + 1) * _legendre(P, nodes) ** 2)
    elif kind is QuadratureKind.GL:
        nodes = _newton(
            lambda x: _legendre(P + 1, x),
            lambda x: _legendre_deriv(P + 1, x),
            -np.cos(np.pi * (2 * i + 1) / (2 * P + 2)),
            "GL",
        )
        weights = 2.0 / ((1.0 - nodes ** 2) * _legendre_deriv(P + 1, nodes) ** 2)
    else:
        # left-endpoint Radau: roots of P_P + P_{P+1}
        inner = _newton(
            lambda x: _legendre(P, x) + _legendre(P + 1, x),
            lambda x: _legendre_deriv(P, x) + _legendre_deriv(P + 1, x),
            -np.cos(2.0 * np.pi * i[1:] / (2 * P + 1)),
            "GLR",
        )
        nodes = np.concatenate(([-1.0], inner))
        weights = (1.0 - nodes) / ((P + 1) ** 2 * _legendre(P, nodes) ** 2)
        weights[0] = 2.0 / (P + 1) ** 2

    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(degree=P, kind=kind, nodes=nodes, weights=weights)


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def _lagrange_at(nodes: np.ndarray, bary: np.ndarray, x: float) -> np.ndarray:
    diff = x - nodes
    hit = np.flatnonzero(diff == 0.0)
    if hit.size:
        values = np.zeros_like(nodes)
        values[hit[0]] = 1.0
        return values
    terms = bary / diff
    return terms / np.sum(terms)


@lru_cache(maxsize=None)
def build_operators(P: int, kind=QuadratureKind.GLL) -> ElementOperators:
    """H, Q, D = H^-1 Q, B and face vectors for degree P; cached and read-only"""
    rule = build_quadrature(P, kind)
    nodes = rule.nodes
    bary = _barycentric_weights(nodes)

    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))

    H = np.diag(rule.weights)
    Qmat = H @ D
    if rule.kind is QuadratureKind.GLL:
        eL = np.zeros(P + 1)
        eR = np.zeros(P + 1)
        eL[0] = 1.0
        eR[-1] = 1.0
    else:
        eL = _lagrange_at(nodes, bary, -1.0)
        eR = _lagrange_at(nodes, bary, 1.0)
    B = np.outer(eR, eR) - np.outer(eL, eL)

    for array in (H, Qmat, D, B, eL, eR, bary):
        array.setflags(write=False)
    logger.debug("built %s operators of degree %d", rule.kind.value, P)
    return ElementOperators(rule=rule, H=H, Qmat=Qmat, D=D, B=B, eL=eL, eR=eR, barycentric=bary)


def eval_basis_at(ops: ElementOperators, x: float) -> np.ndarray:
    """All Lagrange cardinals L_i(x) of the element basis"""
    if abs(x) > 1.0 + 1e-12:
        raise OutOfReferenceDomain(f"reference coordinate {x!r} outside [-1, 1]")
    x = float(np.clip(x, -1.0, 1.0))
    return _lagrange_at(ops.nodes, ops.barycentric, x)


def derivative_along(values: np.ndarray, node_axis: int, ops: ElementOperators, spacing: float) -> np.ndarray:
    """(2/spacing) D applied to every pencil along `node_axis`; returns a new array"""
    moved = np.tensordot(values, ops.D, axes=([node_axis], [1]))
    return np.moveaxis(moved, -1, node_axis) * (2.0 / spacing)


def apply_derivative(field: NodalField, axis: int, ops: ElementOperators, spacing: float) -> NodalField:
    values = field.values
    nodes_shape: Tuple[int, ...] = values.shape[1:]
    if field.dim not in (2, 3) or any(n != ops.size for n in nodes_shape):
        raise ShapeMismatch(f"nodal extents {nodes_shape} do not match degree {ops.degree}")
    if not 0 <= axis < field.dim:
        raise ShapeMismatch(f"axis {axis} invalid for a {field.dim}D field")
    if spacing <= 0:
        raise ShapeMismatch(f"element spacing must be positive, got {spacing}")
    return NodalField(derivative_along(values, 1 + axis, ops, spacing))
