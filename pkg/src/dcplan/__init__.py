"""Probabilistic planning workbench.

Two subsystems share one term language:

* a dynamic distributional-clause engine with sampling and exact
  inference plus a finite-horizon sparse-sampling planner, and
* a belief-program interpreter over basic action theories with noisy
  actions, Gaussian likelihoods, and GOLOG-style control.
"""

from .lang.parser import parse_formula_text, parse_program, parse_term_text
from .lang.printer import pretty_print, print_formula, print_term

from .errors import DclError, InferenceError, ValidationError
from .validator import validate, validated_info

from .worlds import (
    QueryResult,
    World,
    estimate_query,
    exact_query,
    holds,
    parse_evidence,
    sample_world,
)

from .planner import (
    PlanConfig,
    Policy,
    applicable_actions,
    evaluate_policy,
    plan,
    reward_of,
    state_key,
)

from .belief import (
    BeliefState,
    Particle,
    belief_interval,
    degree_of_belief,
    init_belief,
    observe,
    progress,
    ssa_value,
)

from .golog import ExecConfig, Outcome, check_plan, run

__all__ = [
    "BeliefState",
    "DclError",
    "ExecConfig",
    "InferenceError",
    "Outcome",
    "Particle",
    "PlanConfig",
    "Policy",
    "QueryResult",
    "ValidationError",
    "World",
    "applicable_actions",
    "belief_interval",
    "check_plan",
    "degree_of_belief",
    "estimate_query",
    "evaluate_policy",
    "exact_query",
    "holds",
    "init_belief",
    "observe",
    "parse_evidence",
    "parse_formula_text",
    "parse_program",
    "parse_term_text",
    "plan",
    "pretty_print",
    "print_formula",
    "print_term",
    "progress",
    "reward_of",
    "run",
    "sample_world",
    "ssa_value",
    "state_key",
    "validate",
    "validated_info",
]
