"""Time steppers for the 2D and 3D film models."""
from .base import FilmState, discrete_first_variation, integrate
from .film2d import maybe_extend_domain, run, step
from .film3d import run3d, step3d

__all__ = [
    "FilmState",
    "discrete_first_variation",
    "integrate",
    "maybe_extend_domain",
    "run",
    "run3d",
    "step",
    "step3d",
]
