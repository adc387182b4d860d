"""Bounded model finding (z3 backend) and an exhaustive interpreter-based oracle."""
from .oracle import brute_force_oracle
from .scope import EXHAUSTED, SAT, UNSAT, Scope, SolveResult
from .solve import SolverSelfCheckError, check_model, extract_test_input, solve
