"""Workbench for round-elimination analysis of locally checkable labelings."""

from .problems import (Configuration, Constraint, Problem, ParseError,
                       SearchBudgetExceeded, parse_problem,
                       equal_up_to_renaming, zero_round_solvable,
                       remove_unused_labels)
from .diagrams import (Diagram, LatticeViolation, validate_lattice, reverse,
                       edge_diagram, right_closed_subsets, default_diagram,
                       subset_diagram, parse_diagram)
from .re_engine import (CombineSpec, PruneFlags, combine, dominates,
                        discard_non_maximal, newre, exists_side, re_step,
                        rere_step, full_step, is_fixed_point,
                        brute_force_universal)
from .fixedpoint import (ProvenanceTree, d_combine, d_dominates, fp, gen_lift,
                         fixed_point, trivial_witness_provenance)

__version__ = "0.1.0"
