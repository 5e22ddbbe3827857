"""Free termination of semiautomata."""

from ._backend import BACKEND
from .algebra import (
    AlgebraReport,
    Antichain,
    algebra_report,
    all_invertible,
    check_commutativity_ft_props,
    check_inverse_curse,
    check_semilattice_ft_props,
    extract_antichain,
    ft_of_threshold,
    identity_states,
    is_acyclic,
    is_antitone_query,
    is_commutative_query,
    is_commutative_update,
    is_deflationary,
    is_inflationary,
    is_join_semilattice,
    is_monotone_query,
    natural_order,
    threshold_query,
)
from .automaton import Query, Semiautomaton, TransitionGraph, apply_sequence, build_graph, reach_set, reaches
from .errors import (
    FreetermError,
    InvalidAutomaton,
    InvalidQuery,
    PreconditionError,
    PropositionViolated,
    SizeCapExceeded,
)
from .ft import FtVerdict, all_ft_states, classify_figure1_category, ft_oracle, is_ft_state
from .minimize import (
    CollapseMap,
    check_equivalence,
    check_minimal_ft_acyclicity,
    collapse_closure,
    collapse_fixpoint,
    minimize_moore,
)
from .order import PartialOrder, ValueOrder
from .verdict import PropVerdict

__all__ = [
    "BACKEND", "AlgebraReport", "Antichain", "CollapseMap", "FreetermError", "FtVerdict", "InvalidAutomaton",
    "InvalidQuery", "PartialOrder", "PreconditionError", "PropVerdict", "PropositionViolated", "Query",
    "Semiautomaton", "SizeCapExceeded", "TransitionGraph", "ValueOrder", "algebra_report", "all_ft_states",
    "all_invertible", "apply_sequence", "build_graph", "check_commutativity_ft_props", "check_equivalence",
    "check_inverse_curse", "check_minimal_ft_acyclicity", "check_semilattice_ft_props",
    "classify_figure1_category", "collapse_closure", "collapse_fixpoint", "extract_antichain", "ft_of_threshold",
    "ft_oracle", "identity_states", "is_acyclic", "is_antitone_query", "is_commutative_query",
    "is_commutative_update", "is_deflationary", "is_ft_state", "is_inflationary", "is_join_semilattice",
    "is_monotone_query", "minimize_moore", "natural_order", "reach_set", "reaches",
    "threshold_query",
]
