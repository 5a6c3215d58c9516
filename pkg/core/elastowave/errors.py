from typing import List, Optional


class ElastowaveError(Exception):
    """Base class for every error raised by the solver and its harness"""


# operators
class UnsupportedDegree(ElastowaveError, ValueError):
    pass


class NonConvergence(ElastowaveError, RuntimeError):
    pass


class OutOfReferenceDomain(ElastowaveError, ValueError):
    pass


class ShapeMismatch(ElastowaveError, ValueError):
    pass


# physics
class InvalidLame(ElastowaveError, ValueError):
    pass


class NotSPD(ElastowaveError, ValueError):
    pass


class AnisotropicUnsupported(ElastowaveError, ValueError):
    pass


# mesh
class InvalidExtent(ElastowaveError, ValueError):
    pass


class InvalidReflectionCoefficient(ElastowaveError, ValueError):
    pass


class PointOutsideDomain(ElastowaveError, ValueError):
    pass


# pml
class InvalidTol(ElastowaveError, ValueError):
    pass


# solver
class DivergenceDetected(ElastowaveError, RuntimeError):
    def __init__(self, time: float, step: int):
        super().__init__(f"non-finite field detected at t={time:.6g} s (step {step})")
        self.time = time
        self.step = step


# sources
class UnsupportedOrder(ElastowaveError, ValueError):
    pass


# diagnostics
class GeometryInsufficient(ElastowaveError, ValueError):
    pass


class DegenerateError(ElastowaveError, ValueError):
    pass


# harness
class ParseError(ElastowaveError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class ValidationError(ElastowaveError, ValueError):
    """Configuration violations, all of them at once"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.violations))


class UnknownPreset(ElastowaveError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown preset"


class FormatError(ElastowaveError, ValueError):
    pass
