"""Exceptions raised by solid_dewetting."""
from typing import Iterable, Optional, Tuple


class DewettingError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DewettingError):
    """A run configuration could not be parsed or validated.

    ``problems`` is a list of ``(line, message)`` pairs; ``line`` is the 1-based YAML line
    the problem was traced to, or None when it could not be located.
    """

    def __init__(self, problems: Iterable[Tuple[Optional[int], str]], source: str = "<config>"):
        self.problems = list(problems)
        self.source = source
        lines = []
        for line, message in self.problems:
            where = f"{source}:{line}" if line is not None else source
            lines.append(f"{where}: {message}")
        super().__init__("\n".join(lines) or f"{source}: invalid configuration")


class MeshError(DewettingError, ValueError):
    """Invalid mesh, field or profile geometry."""


class SolverError(DewettingError):
    """A linear solve did not meet its residual contract."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")


class UnphysicalStateError(DewettingError):
    """The film thickness dropped below the configured unphysical floor."""

    def __init__(self, state, min_height: float, floor: float):
        self.state = state
        self.min_height = min_height
        self.floor = floor
        super().__init__(f"min h = {min_height:.6g} fell below the unphysical floor {floor:.6g} at t = {state.t:.6g}")


class DiagnosticsError(DewettingError, ValueError):
    """A diagnostic could not be evaluated on the given data."""
