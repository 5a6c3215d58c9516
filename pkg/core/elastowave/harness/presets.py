"""
Benchmark setups as ready-made run configurations.

Every preset carries the published scale by default; `elements` rescales the
mesh to N elements across the preset's reference length (50 km for the 2D
strip and half-plane, the box edge in 3D) and the metadata records the change.
"""
import logging
import math
from typing import Any, Callable, Dict, Optional

from ..errors import UnknownPreset, ValidationError
from ..settings.settings import DEFAULT_3D_TOL
from .config import RunConfig, build_config

logger = logging.getLogger(__name__)

KM = 1e3
INF = math.inf

ROCK = {"rho": 2700.0, "cp": 6000.0, "cs": 3464.0}

# receivers on the free surface, (y, z) relative to the epicenter
SURFACE_RECEIVERS_KM = (
    (0.0, 0.693), (0.0, 5.542), (0.0, 10.392),
    (0.490, 0.490), (3.919, 3.919), (7.348, 7.348),
    (0.577, 0.384), (4.612, 3.075), (8.647, 5.764),
)


def _scaled_counts(lower, upper, reference: float, elements: Optional[int], default: int):
    n = default if elements is None else elements
    spacing = reference / n
    counts = []
    for lo, hi in zip(lower, upper):
        k = (hi - lo) / spacing
        if abs(k - round(k)) > 1e-6 * max(k, 1.0) and elements is not None:
            raise ValidationError([f"--elements {elements} does not tile the extent {(hi - lo) / KM:g} km"])
        counts.append(max(1, int(round(k))))
    return counts


def _strip(elements: Optional[int], halfplane: bool) -> Dict[str, Any]:
    top = 60 * KM if halfplane else 50 * KM
    lower, upper = [-60 * KM, 0.0], [60 * KM, top]
    pml = [{"axis": "x", "width": 10 * KM, "tol": 1e-6, "tol_width": 50 * KM, "alpha": 0.15}]
    if halfplane:
        pml.append({"axis": "y", "width": 10 * KM, "sides": ["upper"], "tol": 1e-6, "tol_width": 50 * KM, "alpha": 0.15})
    return {
        "run": {"dimension": 2, "degree": 5, "t_end": 100.0, "kind": "halfplane2d" if halfplane else "strip2d"},
        "domain": {"lower": lower, "upper": upper, "elements": _scaled_counts(lower, upper, 50 * KM, elements, 10)},
        "materials": [dict(ROCK, name="rock")],
        "boundary": {"x_lower": [0.0], "x_upper": [0.0], "y_lower": [1.0], "y_upper": [0.0]},
        "pml": pml,
        "initial": {"kind": "gaussian", "center": [0.0, 25 * KM], "width": 3 * KM, "components": ["vx", "vy"]},
        "output": {"linf_interval": 0.5, "energy_interval": 0.5, "interior_interval": 0.5},
        "metadata": {
            "interior": {"lower": [-50 * KM, 0.0], "upper": [50 * KM, 50 * KM]},
            "bottom": "pml" if halfplane else "absorbing",
        },
    }


def strip2d(elements: Optional[int] = None) -> Dict[str, Any]:
    return _strip(elements, halfplane=False)


def halfplane2d(elements: Optional[int] = None) -> Dict[str, Any]:
    return _strip(elements, halfplane=True)


def _pml_3d(edge: float, elements: Optional[int], axes=("x", "y", "z"), free_x_lower: bool = False):
    # three of the 25 published elements, rounded to whole elements of a rescaled mesh
    n = 25 if elements is None else elements
    width = max(1, round(3 * n / 25)) * edge / n
    layers = []
    for axis in axes:
        sides = ["upper"] if (axis == "x" and free_x_lower) else ["lower", "upper"]
        layers.append({"axis": axis, "width": width, "sides": sides, "tol": DEFAULT_3D_TOL})
    return layers


def hws3d(elements: Optional[int] = None) -> Dict[str, Any]:
    edge = 10 * KM
    lower, upper = [0.0] * 3, [edge] * 3
    return {
        "run": {"dimension": 3, "degree": 5, "t_end": 3.0, "kind": "hws3d"},
        "domain": {"lower": lower, "upper": upper, "elements": _scaled_counts(lower, upper, edge, elements, 25)},
        "materials": [{"name": "rock", "rho": 2670.0, "cp": 6000.0, "cs": 3464.0}],
        "boundary": {f"{a}_{s}": [0.0] for a in "xyz" for s in ("lower", "upper")},
        "pml": _pml_3d(edge, elements),
        "sources": [{
            "name": "explosion", "location": [3.4 * KM, 5 * KM, 5 * KM],
            "stf": "gaussian", "sigma": 0.1149, "t0": 0.7, "m0": 1e18,
        }],
        "receivers": [
            {"name": "receiver1", "location": [4.4 * KM, 5 * KM, 5 * KM]},
            {"name": "receiver2", "location": [8.4 * KM, 5 * KM, 5 * KM]},
        ],
        "output": {"receiver_interval": 0.0},
    }


def _halfspace_box(elements: Optional[int]):
    edge = 16.333 * KM
    lower = [0.0, -2.287 * KM, -2.287 * KM]
    upper = [16.333 * KM, 14.046 * KM, 14.046 * KM]
    return lower, upper, _scaled_counts(lower, upper, edge, elements, 25), edge


def _surface_receivers():
    return [
        {"name": f"receiver{i}", "location": [0.0, y * KM, z * KM]}
        for i, (y, z) in enumerate(SURFACE_RECEIVERS_KM, start=1)
    ]


def _halfspace(kind: str, elements: Optional[int], source_depth: float, t_end: float, layered: bool) -> Dict[str, Any]:
    lower, upper, counts, edge = _halfspace_box(elements)
    materials = [dict(ROCK, name="halfspace")]
    if layered:
        materials.append({
            "name": "layer", "rho": 2600.0, "cp": 4000.0, "cs": 2000.0,
            "lower": [-INF, -INF, -INF], "upper": [1 * KM, INF, INF],
        })
    boundary = {f"{a}_{s}": [0.0] for a in "xyz" for s in ("lower", "upper")}
    boundary["x_lower"] = [1.0]
    return {
        "run": {"dimension": 3, "degree": 5, "t_end": t_end, "kind": kind},
        "domain": {"lower": lower, "upper": upper, "elements": counts},
        "materials": materials,
        "boundary": boundary,
        "pml": _pml_3d(edge, elements, free_x_lower=True),
        "sources": [{
            "name": "double_couple", "location": [source_depth, 0.0, 0.0],
            "stf": "ramp", "T": 0.1, "myz": 1e18,
        }],
        "receivers": _surface_receivers(),
        "output": {"receiver_interval": 0.0},
    }


def hhs3d(elements: Optional[int] = None) -> Dict[str, Any]:
    return _halfspace("hhs3d", elements, 0.693 * KM, 5.0, layered=False)


def loh1(elements: Optional[int] = None) -> Dict[str, Any]:
    return _halfspace("loh1", elements, 2 * KM, 9.0, layered=True)


def planewave(elements: Optional[int] = None) -> Dict[str, Any]:
    edge = 20 * KM
    lower, upper = [0.0, 0.0], [edge, edge]
    return {
        "run": {"dimension": 2, "degree": 3, "t_end": 1.0, "kind": "planewave"},
        "domain": {"lower": lower, "upper": upper, "elements": _scaled_counts(lower, upper, edge, elements, 8)},
        "materials": [dict(ROCK, name="rock")],
        "boundary": {f"{a}_{s}": [0.0] for a in "xy" for s in ("lower", "upper")},
        "initial": {
            "kind": "planewave", "direction": [1.0, 0.0], "mode": "P",
            "width": 4 * KM, "offset": 8 * KM,
        },
        "output": {"linf_interval": 0.1},
        # the absorbing y faces disturb the exact solution at cp t from the edge
        "metadata": {"interior": {"lower": [0.0, 7.5 * KM], "upper": [edge, 12.5 * KM]}},
    }


PRESETS: Dict[str, Callable[[Optional[int]], Dict[str, Any]]] = {
    "strip2d": strip2d,
    "halfplane2d": halfplane2d,
    "hws3d": hws3d,
    "hhs3d": hhs3d,
    "loh1": loh1,
    "planewave": planewave,
}


def preset(
    name: str,
    elements: Optional[int] = None,
    degree: Optional[int] = None,
    theta: Optional[int] = None,
    t_end: Optional[float] = None,
    pml: bool = True,
) -> RunConfig:
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset '{name}' (available: {', '.join(PRESETS)})")
    data = PRESETS[name](elements)
    overrides = {}
    if elements is not None:
        overrides["elements"] = elements
    if degree is not None:
        data["run"]["degree"] = degree
        overrides["degree"] = degree
    if theta is not None:
        for layer in data.get("pml", []):
            layer["theta"] = theta
        overrides["theta"] = theta
    if t_end is not None:
        data["run"]["t_end"] = t_end
        overrides["t_end"] = t_end
    if not pml:
        data["pml_enabled"] = False
        overrides["pml"] = "disabled (characteristic absorbing boundaries)"
    metadata = data.setdefault("metadata", {})
    metadata["preset"] = name
    if overrides:
        metadata["deviates_from_published_setup"] = overrides
        logger.warning("preset %s runs with overrides %s", name, overrides)
    return build_config(data)
