"""
Exception hierarchy for the parity layout compiler
"""
from typing import Optional


class ParityForgeError(Exception):
    """Base class for all compiler errors"""


class ProblemParseError(ParityForgeError):
    """Problem file could not be read or failed validation"""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.column = column
        self.path = path
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        elif path:
            location = f" (at {path})"
        super().__init__(f"{message}{location}")


class DimensionError(ParityForgeError, ValueError):
    """Bit vector or matrix labels do not match"""


class LayoutError(ParityForgeError, ValueError):
    """Illegal mutation of a layout"""


class BoundaryMapError(ParityForgeError):
    """An interior qubit could not be expressed through boundary qubits"""


class PlacementError(ParityForgeError):
    """Decomposer preconditions violated"""


class CompilationError(ParityForgeError):
    """Compilation could not finish"""


class SideConditionError(CompilationError):
    """Side-condition terms cannot be laid out contiguously"""
