"""Alternating direction explicit solvers for diffusion and fractional-time problems."""

from .ade import ade_step_1d, ade_step_2d, build_step_matrix_1d
from .grid import BoundarySpec, Grid1D, Grid2D, TimeAxis, convergence_rates, l2_norm, linf_norm
from .kernels import GlKernel, collapse_kernel, gl_coefficients, lambda_sequence
from .solvers import DistOrderProblem, TuringProblem, run_to_final

__all__ = [
    "BoundarySpec",
    "DistOrderProblem",
    "GlKernel",
    "Grid1D",
    "Grid2D",
    "TimeAxis",
    "TuringProblem",
    "ade_step_1d",
    "ade_step_2d",
    "build_step_matrix_1d",
    "collapse_kernel",
    "convergence_rates",
    "gl_coefficients",
    "l2_norm",
    "lambda_sequence",
    "linf_norm",
    "run_to_final",
]
