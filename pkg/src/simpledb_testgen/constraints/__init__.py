"""Relational constraint IR, its evaluator and the Alloy text emitter."""
from .emit import emit_constraints_text, formula_str, normalize, term_str
from .evaluate import Assignment, SortMismatch, eval_term, evaluate
from .ir import *  # noqa: F401,F403
from .ir import ConstraintSystem, SymVar, free_input_vars
