"""Search-based execution of control programs over belief states.

The interpreter runs iterative deepening on trace length: depth cap 0 first,
then 1, and so on up to the configured maximum, so the first success found
has the shortest action trace the program admits. Within a cap the search is
depth-first with the usual preferences: Choice tries its left branch first,
Pick enumerates the object domain in declared order, Star tries zero
iterations before one more.

Search runs on copied beliefs, so nothing is committed until a full path
succeeds. Per-step randomness is seeded by trace position only, which makes
a found success replay to the same success.

While and If are sugar: while (f) b = star(?(f); b); ?(not f), and
if (f) a else b = (?(f); a) | (?(not f); b).

Program configurations repeating since the last executed action are pruned;
this terminates test-only loops such as star(?(true)) without bounding
genuine action sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .belief import BeliefState, action_kind, degree_of_belief, observe, progress
from .errors import InferenceError
from .lang.ast import (
    ActionTheory,
    AndF,
    AtomF,
    Choice,
    CmpF,
    Compound,
    Const,
    ExistsF,
    ForallF,
    Formula,
    If,
    NotF,
    OrF,
    Pick,
    Prim,
    ProgramExpr,
    Seq,
    Star,
    Term,
    Test,
    Var,
    While,
)
from .lang.printer import print_term
from .worlds import _master_seed

DEFAULT_THRESHOLD = 0.999
DEFAULT_PARTICLES = 10_000

_TEST_EPS = 1e-12
_NODE_BUDGET = 1_000_000


@dataclass(frozen=True)
class ExecConfig:
    max_search_depth: int
    test_threshold: float = DEFAULT_THRESHOLD
    n_particles: int = DEFAULT_PARTICLES

    def __post_init__(self):
        if self.max_search_depth < 0:
            raise InferenceError("max_search_depth must be non-negative")
        if not 0.0 < self.test_threshold <= 1.0:
            raise InferenceError("test_threshold must be in (0, 1]")
        if self.n_particles < 1:
            raise InferenceError("n_particles must be at least 1")


@dataclass(frozen=True)
class Outcome:
    status: str  # success | failure | depth_exhausted
    trace: Tuple[Term, ...]
    final_belief: BeliefState
    last_test_degree: Optional[float] = None


# ---------------------------------------------------------------------------
# Substitution of pick variables
# ---------------------------------------------------------------------------


def _subst_term(t: Term, name: str, value: Term) -> Term:
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_subst_term(a, name, value) for a in t.args))
    return t


def _subst_formula(f: Formula, name: str, value: Term) -> Formula:
    if isinstance(f, AtomF):
        return AtomF(_subst_term(f.atom, name, value))
    if isinstance(f, CmpF):
        return CmpF(f.op, _subst_term(f.lhs, name, value), _subst_term(f.rhs, name, value))
    if isinstance(f, NotF):
        return NotF(_subst_formula(f.body, name, value))
    if isinstance(f, AndF):
        return AndF(tuple(_subst_formula(g, name, value) for g in f.items))
    if isinstance(f, OrF):
        return OrF(tuple(_subst_formula(g, name, value) for g in f.items))
    if isinstance(f, (ExistsF, ForallF)):
        if f.var == name:
            return f
        return type(f)(f.var, _subst_formula(f.body, name, value))
    return f


def _subst_expr(e: ProgramExpr, name: str, value: Term) -> ProgramExpr:
    if isinstance(e, Prim):
        return Prim(_subst_term(e.action, name, value))
    if isinstance(e, Test):
        return Test(_subst_formula(e.formula, name, value))
    if isinstance(e, Seq):
        return Seq(_subst_expr(e.left, name, value), _subst_expr(e.right, name, value))
    if isinstance(e, Choice):
        return Choice(_subst_expr(e.left, name, value), _subst_expr(e.right, name, value))
    if isinstance(e, Pick):
        if e.var == name:
            return e
        return Pick(e.var, _subst_expr(e.body, name, value))
    if isinstance(e, Star):
        return Star(_subst_expr(e.body, name, value))
    if isinstance(e, While):
        return While(_subst_formula(e.formula, name, value), _subst_expr(e.body, name, value))
    if isinstance(e, If):
        return If(
            _subst_formula(e.formula, name, value),
            _subst_expr(e.then, name, value),
            _subst_expr(e.els, name, value),
        )
    return e


def _is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Compound):
        return all(_is_ground(a) for a in t.args)
    return True


# ---------------------------------------------------------------------------
# Depth-first search under a trace-length cap
# ---------------------------------------------------------------------------


class _Search:
    def __init__(self, theory: ActionTheory, config: ExecConfig, seed: int, cap: int):
        self.theory = theory
        self.config = config
        self.seed = seed
        self.cap = cap
        self.cutoff = False
        self.nodes = 0
        self.last_test: Optional[float] = None

    def run(self, stack, belief, trace, seen):
        theory = self.theory
        while True:
            self.nodes += 1
            if self.nodes > _NODE_BUDGET:
                raise InferenceError("control search exceeded the node budget")
            if not stack:
                return belief, trace
            if stack in seen:
                return None
            seen = seen + (stack,)
            head = stack[0]
            rest = stack[1:]

            if isinstance(head, Prim):
                if len(trace) >= self.cap:
                    self.cutoff = True
                    return None
                action = head.action
                if not _is_ground(action):
                    raise InferenceError(
                        f"action {print_term(action)} is not ground at execution"
                    )
                step_rng = np.random.default_rng(
                    np.random.SeedSequence((self.seed, len(trace)))
                )
                if action_kind(theory, action) == "sensing":
                    belief = observe(belief, action, theory, step_rng)
                else:
                    belief = progress(belief, action, theory, step_rng)
                trace = trace + (action,)
                seen = ()
                stack = rest
                continue

            if isinstance(head, Test):
                degree = degree_of_belief(belief, head.formula)
                self.last_test = degree
                if degree + _TEST_EPS < self.config.test_threshold:
                    return None
                stack = rest
                continue

            if isinstance(head, Seq):
                stack = (head.left, head.right) + rest
                continue

            if isinstance(head, While):
                stack = (
                    Star(Seq(Test(head.formula), head.body)),
                    Test(NotF(head.formula)),
                ) + rest
                continue

            if isinstance(head, If):
                stack = (
                    Choice(
                        Seq(Test(head.formula), head.then),
                        Seq(Test(NotF(head.formula)), head.els),
                    ),
                ) + rest
                continue

            if isinstance(head, Choice):
                found = self.run((head.left,) + rest, belief, trace, seen)
                if found is not None:
                    return found
                stack = (head.right,) + rest
                continue

            if isinstance(head, Pick):
                if not theory.domain:
                    raise InferenceError(
                        "pick requires a declared object domain"
                    )
                for obj in theory.domain:
                    branch = _subst_expr(head.body, head.var, obj)
                    found = self.run((branch,) + rest, belief, trace, seen)
                    if found is not None:
                        return found
                return None

            if isinstance(head, Star):
                found = self.run(rest, belief, trace, seen)
                if found is not None:
                    return found
                stack = (head.body, head) + rest
                continue

            raise InferenceError(f"cannot execute {head!r}")


def run(
    expr: ProgramExpr,
    belief: BeliefState,
    theory: ActionTheory,
    config: ExecConfig,
    rng,
) -> Outcome:
    """Search for a successful execution of the program.

    Iterative deepening returns the shortest successful trace; failure is
    reported only once the whole search space is exhausted below the depth
    cap, and depth_exhausted when deeper solutions might still exist.
    """
    seed = _master_seed(rng)
    last_test = None
    for cap in range(config.max_search_depth + 1):
        search = _Search(theory, config, seed, cap)
        found = search.run((expr,), belief, (), ())
        last_test = search.last_test
        if found is not None:
            final_belief, trace = found
            return Outcome("success", trace, final_belief, search.last_test)
        if not search.cutoff:
            return Outcome("failure", (), belief, search.last_test)
    return Outcome("depth_exhausted", (), belief, last_test)


def check_plan(
    actions,
    goal: Formula,
    belief: BeliefState,
    theory: ActionTheory,
    config: ExecConfig,
    rng,
) -> Outcome:
    """Execute a fixed action sequence and test the goal at the end."""
    expr: ProgramExpr = Test(goal)
    for action in reversed(list(actions)):
        expr = Seq(Prim(action), expr)
    return run(expr, belief, theory, config, rng)
