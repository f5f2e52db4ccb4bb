"""Exact laboratory for one-dimensional Brascamp-Lieb-Luttinger forms."""

from .core import (Configuration, Interval, IntervalUnion, as_rational, builtin_config,
                   format_decimal, format_rational, measure, measure_vector, normalize,
                   symmetric_difference_measure, symmetrize, translate)
from .polytope import (Polytope, Vertex, build_box_polytope, double_slice_volume,
                       enumerate_vertices, lp_maximize, slice_volume, volume)
from .conditions import (check_admissible, check_all, check_generic, check_nondegenerate,
                         check_strictly_admissible, is_connected, skeleton_graph)
from .functional import (expansion_residual, first_order_term, integrate_K, kernel_K,
                         kernel_K_left_derivative, kernel_L, phi, psi, second_order_term,
                         shell_perturbation)

__version__ = "0.1.0"

__all__ = [
    "Configuration", "Interval", "IntervalUnion", "as_rational", "builtin_config", "format_decimal",
    "format_rational", "measure", "measure_vector", "normalize", "symmetric_difference_measure",
    "symmetrize", "translate",
    "Polytope", "Vertex", "build_box_polytope", "double_slice_volume", "enumerate_vertices",
    "lp_maximize", "slice_volume", "volume",
    "check_admissible", "check_all", "check_generic", "check_nondegenerate",
    "check_strictly_admissible", "is_connected", "skeleton_graph",
    "expansion_residual", "first_order_term", "integrate_K", "kernel_K", "kernel_K_left_derivative",
    "kernel_L", "phi", "psi", "second_order_term", "shell_perturbation",
]
