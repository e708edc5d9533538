from ._core import (
    NumericalError,
    TMeshError,
    ValidationError,
    check_complex,
    convergence,
    operators,
    solve_eig,
    solve_source,
    solve_waveguide,
    tmesh_check,
    tspline_complex,
)

__all__ = [
    "NumericalError",
    "TMeshError",
    "ValidationError",
    "check_complex",
    "convergence",
    "operators",
    "solve_eig",
    "solve_source",
    "solve_waveguide",
    "tmesh_check",
    "tspline_complex",
]
