from pathlib import Path
from typing import ClassVar, List, Optional

from pydantic import BaseModel, Field

from ...diagnostics.diagnostics import seismogram_misfit
from ...errors import DivergenceDetected, ElastowaveError
from ...settings.settings import MAX_DEGREE
from ..config import load_config
from ..experiments import check_operators, convergence_study, run_experiment
from ..io import ingest_reference
from ..presets import preset
from ..units import parse_quantity


def _failure(error: Exception) -> dict:
    result = {"success": False, "error": str(error)}
    if isinstance(error, DivergenceDetected):
        result.update(diverged=True, time=error.time, step=error.step)
    return result


class RunConfigTool(BaseModel):
    """Runs a simulation described by a configuration file"""
    name: ClassVar[str] = "run_config"
    description: ClassVar[str] = "Parse a run configuration file, run it and write seismograms, series and metadata."

    config_path: str = Field(description="Path to the configuration file")
    output_dir: Optional[str] = Field(None, description="Directory for the run artifacts")

    def run(self) -> dict:
        try:
            config = load_config(self.config_path)
            result = run_experiment(config, Path(self.output_dir) if self.output_dir else None)
            result.pop("recorder", None)
            return {"success": True, **result}
        except (ElastowaveError, OSError) as e:
            return _failure(e)


class RunPresetTool(BaseModel):
    """Runs one of the benchmark presets, optionally rescaled for a desk run"""
    name: ClassVar[str] = "run_preset"
    description: ClassVar[str] = "Run a benchmark preset with optional element, degree, theta and end-time overrides."

    preset: str = Field(description="Preset name")
    elements: Optional[int] = Field(None, ge=1, description="Elements across the preset's reference length")
    degree: Optional[int] = Field(None, ge=1, le=MAX_DEGREE)
    theta: Optional[int] = Field(None, ge=0, le=1)
    t_end: Optional[float] = Field(None, ge=0)
    pml: bool = Field(True, description="False replaces the PML by characteristic absorbing boundaries")
    output_dir: Optional[str] = None

    def run(self) -> dict:
        try:
            config = preset(self.preset, self.elements, self.degree, self.theta, self.t_end, self.pml)
            result = run_experiment(config, Path(self.output_dir) if self.output_dir else None)
            result.pop("recorder", None)
            return {"success": True, **result}
        except (ElastowaveError, OSError) as e:
            return _failure(e)


class ConvergenceStudyTool(BaseModel):
    """h- or p-refinement study of a configuration"""
    name: ClassVar[str] = "convergence_study"
    description: ClassVar[str] = "Measure errors over mesh spacings (with rates) or over degrees and write convergence.csv."

    config_path: str
    levels: List[str] = Field(default_factory=list, description="Element spacings, unit tags allowed ('10 km')")
    degrees: List[int] = Field(default_factory=list)
    auto_tol: Optional[bool] = Field(None, description="Derive the PML tolerance from each level's resolution (default: strip presets only)")
    output_dir: Optional[str] = None

    def run(self) -> dict:
        try:
            config = load_config(self.config_path)
            spacings = [parse_quantity(level) for level in self.levels]
            if any(s is None for s in spacings):
                raise ValueError(f"levels must be numbers, got {self.levels}")
            result = convergence_study(
                config,
                spacings=spacings or None,
                degrees=self.degrees or None,
                output_dir=Path(self.output_dir) if self.output_dir else None,
                auto_tol=self.auto_tol,
            )
            return {"success": True, **result}
        except (ElastowaveError, OSError, ValueError) as e:
            return _failure(e)


class OperatorCheckTool(BaseModel):
    """Checks the SBP property, derivative exactness and weights of every quadrature family"""
    name: ClassVar[str] = "check_operators"
    description: ClassVar[str] = "Verify the 1D element operators for degrees 1..max_degree."

    max_degree: int = Field(12, ge=1, le=MAX_DEGREE)

    def run(self) -> dict:
        try:
            rows = check_operators(self.max_degree)
            return {"success": all(r["passed"] for r in rows), "rows": rows}
        except ElastowaveError as e:
            return _failure(e)


class CompareSeismogramTool(BaseModel):
    """Misfit of a receiver seismogram against a reference seismogram"""
    name: ClassVar[str] = "compare_seismograms"
    description: ClassVar[str] = "Interpolate the reference onto the receiver times and report the max-norm misfit."

    receiver_csv: str
    reference_csv: str

    def run(self) -> dict:
        try:
            receiver = ingest_reference(Path(self.receiver_csv))
            reference = ingest_reference(Path(self.reference_csv), components=receiver.components)
            misfit = seismogram_misfit(receiver.times, receiver.values, reference.times, reference.values)
            return {"success": True, "misfit": misfit, "components": list(receiver.components)}
        except ElastowaveError as e:
            return _failure(e)
