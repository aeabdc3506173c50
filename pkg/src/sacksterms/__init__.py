"""Finite, checkable models of the term presentation of Sacks forcing.

Boolean terms over pair variables, Cantor normal form ordinals, clipped
Sacks trees, presented term substitutions, coding data with coherence,
ordinal-indexed condition matrices, and the explicit constructions built
on them.  Every verdict about an infinite object is scoped to a
:class:`Window`.
"""

from .conditions import (
    NotSplittable,
    RCondition,
    Trivial,
    determining_cells,
    evaluate_under,
    split,
    stack,
    term_stronger,
    validate_R,
)
from .conditions import from_json as condition_from_json
from .constructions import (
    HypothesisViolation,
    build_r_copy,
    build_r_delta,
    build_r_mult,
    certify_pipeline,
    coding,
    decode,
    gurke_pipeline,
    matrix_to_condition,
    schedule_matrix,
)
from .dot import export_dot
from .ordinals import OMEGA, Ordinal, parse_ordinal
from .pairing import tau, tau_inv, triangle_leq
from .prep import (
    BitSequence,
    Coding,
    ConflictError,
    Nu,
    PrepData,
    check_cohere,
    extend_condition,
    g_eval,
    reconstruct,
)
from .qstar import Mode, PresentedSubstitution, Window, validate_condition, verify_order_witness
from .report import Report
from .suites import Profile, run_suite
from .terms import ONE, ZERO, Term, compose, determines, equiv, evaluate, substitute, x
from .trees import (
    ClippedTree,
    canonical_terms,
    refinement_substitution,
    search_common_refinement,
    splitting_fronts,
    tree_of_terms,
    validate_tree,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
