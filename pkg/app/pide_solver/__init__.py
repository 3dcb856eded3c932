from app.pide_solver.grid import LevyAtoms, PideGrid, discretize_levy
from app.pide_solver.scheme import (
    advance,
    hamiltonian,
    minimize_hamiltonian,
    quadratic_hedge_ratio,
    step_backward,
)
from app.pide_solver.solver import (
    MEASURES,
    PideSolution,
    PideSolver,
    indifference_spread_pide,
    solve_pide,
)
from app.pide_solver.tridiag import solve_tridiagonal

__all__ = [
    "MEASURES",
    "LevyAtoms",
    "PideGrid",
    "PideSolution",
    "PideSolver",
    "advance",
    "discretize_levy",
    "hamiltonian",
    "indifference_spread_pide",
    "minimize_hamiltonian",
    "quadratic_hedge_ratio",
    "solve_pide",
    "solve_tridiagonal",
    "step_backward",
]
