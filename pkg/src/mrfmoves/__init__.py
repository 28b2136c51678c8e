"""Move-making minimisation of pairwise discrete energies.

ICM, alpha-beta swap, alpha-expansion and alpha-expansion beta-shrink moves
on an exact min-cut back-end, with brute-force oracles for small problems.
"""

from .energy import (
    EPS,
    Instance,
    InvalidInputError,
    check_pairwise_submodular,
    check_triangle,
    conditional_energy,
    total_energy,
)
from .mincut import BinaryProblem, SubmodularityError, decompose, max_flow, solve_binary
from .moves import ICM, ExpShrink, Expansion, Swap, build_subproblem, move_space_size, optimal_move, truncate
from .oracle import MoveSet, best_in_move_set, brute_force_minimum, dominance_report, enumerate_moves
from .schedule import Method, RunReport, relative_energy_report, run, run_icm

__all__ = [
    "EPS", "Instance", "InvalidInputError", "check_pairwise_submodular", "check_triangle",
    "conditional_energy", "total_energy", "BinaryProblem", "SubmodularityError", "decompose",
    "max_flow", "solve_binary", "ICM", "ExpShrink", "Expansion", "Swap", "build_subproblem",
    "move_space_size", "optimal_move", "truncate", "MoveSet", "best_in_move_set",
    "brute_force_minimum", "dominance_report", "enumerate_moves", "Method", "RunReport",
    "relative_energy_report", "run", "run_icm",
]
