"""
Run configuration: the sectioned `key = value` format and its pydantic models.

    [run]
    dimension = 2
    degree = 5
    t_end = 100 s

    [domain]
    lower = -60 km, 0 km
    upper = 60 km, 50 km
    elements = 24, 10

    [material.crust]
    rho = 2.7 g/cm3
    cp = 6 km/s
    cs = 3.464 km/s
"""
import logging
import math
from typing import Annotated, Any, Dict, List, Literal, Optional

import numpy as np
import pydantic
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from ..errors import ElastowaveError, ParseError, ValidationError
from ..mesh.mesh import MaterialRegion, assign_materials
from ..physics.physics import AXES, MaterialModel, wave_system
from ..settings.settings import DEFAULT_CFL, MAX_DEGREE, PROFILE_EXPONENT
from .units import UnitError, parse_quantity

logger = logging.getLogger(__name__)

FACES = tuple(f"{axis}_{side}" for axis in AXES for side in ("lower", "upper"))


def _as_list(value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [value]


FloatList = Annotated[List[float], BeforeValidator(_as_list)]
IntList = Annotated[List[int], BeforeValidator(_as_list)]
StrList = Annotated[List[str], BeforeValidator(_as_list)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSpec(_Section):
    dimension: Literal[2, 3]
    degree: int = Field(5, ge=1, le=MAX_DEGREE)
    cfl: float = Field(DEFAULT_CFL, gt=0, le=1)
    t_end: float = Field(ge=0)
    taylor_order: Optional[int] = Field(None, ge=1)
    kind: str = "custom"
    seed: int = 0


class DomainSpec(_Section):
    lower: FloatList
    upper: FloatList
    elements: IntList

    def spacing(self) -> np.ndarray:
        return (np.asarray(self.upper) - np.asarray(self.lower)) / np.asarray(self.elements)


class MaterialSpec(_Section):
    name: str
    rho: float = Field(gt=0)
    cp: Optional[float] = Field(None, gt=0)
    cs: Optional[float] = Field(None, gt=0)
    lam: Optional[float] = None
    mu: Optional[float] = Field(None, gt=0)
    lower: Optional[FloatList] = None
    upper: Optional[FloatList] = None

    @model_validator(mode="after")
    def _one_parametrization(self):
        speeds = self.cp is not None and self.cs is not None
        lame = self.lam is not None and self.mu is not None
        if speeds == lame:
            raise ValueError("give either cp and cs or lam and mu")
        return self

    def to_model(self) -> MaterialModel:
        if self.cp is not None:
            return MaterialModel.from_speeds(self.rho, self.cp, self.cs, name=self.name)
        return MaterialModel.from_lame(self.rho, self.lam, self.mu, name=self.name)

    def region(self) -> MaterialRegion:
        return MaterialRegion(self.to_model(), self.lower, self.upper)


class PmlAxisSpec(_Section):
    axis: Literal["x", "y", "z"]
    width: Optional[float] = Field(None, ge=0)
    elements: Optional[int] = Field(None, ge=0)
    sides: StrList = ["lower", "upper"]
    tol: Optional[float] = None
    tol_auto: bool = False
    tol_width: Optional[float] = Field(None, gt=0)
    d0: Optional[float] = Field(None, ge=0)
    alpha: Optional[float] = Field(None, ge=0)
    theta: Literal[0, 1] = 1
    exponent: int = Field(PROFILE_EXPONENT, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _auto_tol(cls, data):
        if isinstance(data, dict) and isinstance(data.get("tol"), str) and data["tol"].lower() == "auto":
            data = dict(data, tol=None, tol_auto=True)
        return data

    @property
    def index(self) -> int:
        return AXES.index(self.axis)


class InitialSpec(_Section):
    kind: Literal["zero", "gaussian", "random", "planewave"] = "zero"
    amplitude: float = 1.0
    center: Optional[FloatList] = None
    width: Optional[float] = Field(None, gt=0)
    components: StrList = []
    direction: Optional[FloatList] = None
    mode: Literal["P", "S"] = "P"
    offset: float = 0.0
    polarization: Optional[FloatList] = None
    seed: int = 0


class SourceSpec(_Section):
    name: str
    location: FloatList
    stf: Literal["gaussian", "ramp"]
    sigma: Optional[float] = Field(None, gt=0)
    t0: Optional[float] = None
    T: Optional[float] = Field(None, gt=0)
    m0: Optional[float] = None
    mxx: float = 0.0
    myy: float = 0.0
    mzz: float = 0.0
    mxy: float = 0.0
    mxz: float = 0.0
    myz: float = 0.0

    @model_validator(mode="after")
    def _stf_parameters(self):
        if self.stf == "gaussian" and (self.sigma is None or self.t0 is None):
            raise ValueError("gaussian source time function needs sigma and t0")
        if self.stf == "ramp" and self.T is None:
            raise ValueError("ramp source time function needs T")
        return self

    def moment_components(self) -> Dict[str, float]:
        components = {k: getattr(self, k) for k in ("mxx", "myy", "mzz", "mxy", "mxz", "myz")}
        if self.m0 is not None:
            for k in ("mxx", "myy", "mzz"):
                components[k] += self.m0
        return components


class ReceiverSpec(_Section):
    name: str
    location: FloatList
    components: StrList = []


class OutputSpec(_Section):
    directory: Optional[str] = None
    energy_interval: Optional[float] = Field(None, ge=0)
    linf_interval: Optional[float] = Field(None, ge=0)
    receiver_interval: Optional[float] = Field(None, ge=0)
    snapshot_interval: Optional[float] = Field(None, gt=0)
    snapshot_format: Literal["binary", "csv"] = "binary"
    snapshot_components: StrList = []
    interior_interval: float = Field(0.5, gt=0)


class RunConfig(_Section):
    run: RunSpec
    domain: DomainSpec
    materials: List[MaterialSpec]
    boundary: Dict[str, FloatList] = {}
    pml_enabled: bool = True
    pml: List[PmlAxisSpec] = []
    initial: InitialSpec = InitialSpec()
    sources: List[SourceSpec] = []
    receivers: List[ReceiverSpec] = []
    output: OutputSpec = OutputSpec()
    metadata: Dict[str, Any] = {}

    @property
    def dim(self) -> int:
        return self.run.dimension

    def active_pml(self) -> List[PmlAxisSpec]:
        return list(self.pml) if self.pml_enabled else []

    def pml_width(self, spec: PmlAxisSpec) -> float:
        if spec.width is not None:
            return spec.width
        return (spec.elements or 0) * float(self.domain.spacing()[spec.index])


def _inside(point, lower, upper) -> bool:
    extent = np.asarray(upper) - np.asarray(lower)
    tol = 1e-9 * extent
    p = np.asarray(point)
    return bool(np.all(p >= np.asarray(lower) - tol) and np.all(p <= np.asarray(upper) + tol))


def config_violations(cfg: RunConfig) -> List[str]:
    """Cross-field checks pydantic cannot express per field"""
    violations = []
    d = cfg.dim
    dom = cfg.domain
    if not (len(dom.lower) == len(dom.upper) == len(dom.elements) == d):
        violations.append(f"domain: lower, upper and elements need {d} entries each")
        return violations
    if any(lo >= hi for lo, hi in zip(dom.lower, dom.upper)):
        violations.append("domain: every lower bound must be below its upper bound")
    if any(k < 1 for k in dom.elements):
        violations.append("domain: element counts must be positive")

    for face, gamma in cfg.boundary.items():
        if face not in FACES[: 2 * d]:
            violations.append(f"boundary: unknown face '{face}' for a {d}D run")
        if len(gamma) not in (1, d):
            violations.append(f"boundary.{face}: give one reflection coefficient or {d}")
        if any(abs(g) > 1 for g in gamma):
            violations.append(f"boundary.{face}: reflection coefficients must lie in [-1, 1], got {gamma}")

    if not cfg.materials:
        violations.append("material: at least one material section is required")
    else:
        try:
            regions = [m.region() for m in cfg.materials]
            if not violations:
                assign_materials(np.asarray(dom.lower, float), np.asarray(dom.upper, float), dom.elements, regions)
        except ElastowaveError as e:
            violations.append(f"material: {e}")

    seen = set()
    for spec in cfg.active_pml():
        label = f"pml.{spec.axis}"
        if spec.index >= d:
            violations.append(f"{label}: axis does not exist in {d}D")
            continue
        if spec.axis in seen:
            violations.append(f"{label}: given twice")
        seen.add(spec.axis)
        if (spec.width is None) == (spec.elements is None):
            violations.append(f"{label}: give exactly one of width or elements")
        given = [spec.tol is not None, spec.tol_auto, spec.d0 is not None]
        if sum(given) != 1:
            violations.append(f"{label}: give exactly one damping specification (tol, tol = auto or d0)")
        if spec.tol is not None and not 0 < spec.tol < 1:
            violations.append(f"{label}: tol must lie in (0, 1), got {spec.tol}")
        bad_sides = [s for s in spec.sides if s not in ("lower", "upper")]
        if bad_sides or not spec.sides:
            violations.append(f"{label}: sides must be lower and/or upper, got {spec.sides}")
        if spec.width is not None or spec.elements is not None:
            width = cfg.pml_width(spec)
            extent = dom.upper[spec.index] - dom.lower[spec.index]
            if width * len(set(spec.sides)) >= extent:
                violations.append(f"{label}: layers of {width:g} m leave no interior")

    names = set(wave_system(d).components)
    for component in cfg.initial.components + cfg.output.snapshot_components:
        if component not in names:
            violations.append(f"unknown field component '{component}' for a {d}D run")
    if cfg.initial.kind == "gaussian" and (cfg.initial.center is None or cfg.initial.width is None):
        violations.append("initial: gaussian needs center and width")
    if cfg.initial.kind == "planewave":
        if cfg.initial.direction is None or cfg.initial.width is None:
            violations.append("initial: planewave needs direction and width")
        elif len(cfg.materials) != 1:
            violations.append("initial: planewave needs a single homogeneous material")

    for kind, items in (("source", cfg.sources), ("receiver", cfg.receivers)):
        for item in items:
            if len(item.location) < d:
                violations.append(f"{kind}.{item.name}: location needs {d} coordinates")
            elif not _inside(item.location[:d], dom.lower, dom.upper):
                violations.append(f"{kind}.{item.name}: location {item.location} lies outside the domain")
    for receiver in cfg.receivers:
        for component in receiver.components:
            if component not in names:
                violations.append(f"receiver.{receiver.name}: unknown component '{component}'")
    return violations


def validate_config(cfg: RunConfig) -> RunConfig:
    violations = config_violations(cfg)
    if violations:
        raise ValidationError(violations)
    return cfg


def build_config(data: Dict[str, Any]) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(data)
    except pydantic.ValidationError as e:
        raise ValidationError(
            [f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()]
        ) from None
    return validate_config(cfg)


def _parse_value(raw: str, line: int):
    items = [item.strip() for item in raw.split(",")]
    values = []
    for item in items:
        if not item:
            raise ParseError(f"empty list entry in '{raw}'", line)
        try:
            quantity = parse_quantity(item)
        except UnitError as e:
            raise ParseError(str(e), line) from None
        if quantity is not None:
            values.append(int(quantity) if _looks_integral(item) else quantity)
        elif item.lower() in ("true", "false"):
            values.append(item.lower() == "true")
        else:
            values.append(item)
    return values[0] if len(values) == 1 else values


def _looks_integral(item: str) -> bool:
    return item.lstrip("+-").isdigit()


_SINGLE = ("run", "domain", "boundary", "initial", "output", "pml", "metadata")
_NAMED = ("material", "source", "receiver", "pml")


def parse_sections(text: str) -> List[tuple]:
    """(section, name, {key: value}) in file order"""
    sections = []
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError(f"unterminated section header '{stripped}'", number)
            header = stripped[1:-1].strip()
            section, _, name = header.partition(".")
            if name and section not in _NAMED:
                raise ParseError(f"section [{section}] does not take a name", number)
            if not name and section not in _SINGLE:
                raise ParseError(f"unknown section [{header}]", number)
            if any(s == section and n == name for s, n, _ in sections):
                raise ParseError(f"section [{header}] appears twice", number)
            current = {}
            sections.append((section, name, current))
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected 'key = value', got '{stripped}'", number)
        if current is None:
            raise ParseError(f"'{key.strip()}' appears before any section", number)
        key = key.strip()
        if key in current:
            raise ParseError(f"duplicate key '{key}'", number)
        if not value.strip():
            raise ParseError(f"missing value for '{key}'", number)
        current[key] = _parse_value(value.strip(), number)
    return sections


def parse_config(text: str) -> RunConfig:
    data: Dict[str, Any] = {"materials": [], "pml": [], "sources": [], "receivers": []}
    for section, name, values in parse_sections(text):
        if section == "material":
            data["materials"].append(dict(values, name=name))
        elif section == "source":
            data["sources"].append(dict(values, name=name))
        elif section == "receiver":
            data["receivers"].append(dict(values, name=name))
        elif section == "pml" and name:
            data["pml"].append(dict(values, axis=name))
        elif section == "pml":
            unknown = set(values) - {"enabled"}
            if unknown:
                raise ParseError(f"[pml] only takes 'enabled', got {sorted(unknown)}")
            data["pml_enabled"] = values.get("enabled", True)
        else:
            data[section] = values
    return build_config(data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle.read())


def with_elements(cfg: RunConfig, elements: List[int]) -> RunConfig:
    data = cfg.model_dump()
    data["domain"]["elements"] = list(elements)
    return build_config(data)


def elements_for_spacing(cfg: RunConfig, spacing: float) -> List[int]:
    counts = []
    for lo, hi in zip(cfg.domain.lower, cfg.domain.upper):
        n = (hi - lo) / spacing
        if not math.isclose(n, round(n), rel_tol=0, abs_tol=1e-9 * max(n, 1.0)) or round(n) < 1:
            raise ValidationError([f"spacing {spacing:g} m does not divide the extent {hi - lo:g} m"])
        counts.append(int(round(n)))
    return counts
