"""Particle belief states over basic action theories.

A belief is a weighted set of particles, each a total valuation of the
declared fluent instances. Updates follow the progression style: physical
actions push every particle through the successor state axioms, noisy
actions additionally sample their actual argument per particle from the
declared likelihood, and observations reweight by likelihood density.

When every prior distribution is discrete with small support, the belief is
built by exact enumeration instead of sampling: particles carry the support
points with their true probabilities, observation updates stay exact, and
resampling is skipped. Continuous priors fall back to the usual Monte Carlo
ensemble. Noisy branching can grow an exact ensemble past the requested
particle count, at which point the belief degrades to the sampled kind.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import distributions
from .distributions import values_equal
from .engine import Derivation, RandomChoice, enumerate_worlds, ground_dist, term_key
from .errors import InferenceError
from .lang.ast import (
    ARITH_FUNCTORS,
    ActionTheory,
    AndF,
    AtomF,
    CmpF,
    Compound,
    Const,
    Delta,
    Discrete,
    EvalTerm,
    ExistsF,
    FalseF,
    FloatLit,
    ForallF,
    Formula,
    IntLit,
    NotF,
    OrF,
    Program,
    Term,
    TrueF,
    Var,
)
from .lang.printer import print_term
from .validator import validated_info
from .worlds import _master_seed

Valuation = Dict[Term, object]

_SORT_DEFAULTS = {"bool": False, "real": 0.0, "int": 0}


@dataclass(frozen=True)
class Particle:
    valuation: Valuation
    weight: float


@dataclass(frozen=True)
class BeliefState:
    particles: Tuple[Particle, ...]
    family_member: int
    theory: ActionTheory
    exact: bool
    n_target: int

    @property
    def n_particles(self) -> int:
        return len(self.particles)


# ---------------------------------------------------------------------------
# Terms over valuations
# ---------------------------------------------------------------------------


def _term_value(t: Term):
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, FloatLit):
        return t.value
    if isinstance(t, Const):
        if t.name == "true":
            return True
        if t.name == "false":
            return False
        return t
    return t


def _value_term(v) -> Term:
    if isinstance(v, bool):
        return Const("true" if v else "false")
    if isinstance(v, int):
        return IntLit(v)
    if isinstance(v, float):
        return FloatLit(v)
    if isinstance(v, (Const, Compound)):
        return v
    raise InferenceError(f"cannot embed {v!r} in a term")


def eval_fluent_term(t: Term, binding: Dict[str, object], valuation: Valuation):
    """Evaluate a theory-side expression: fluents read from the valuation."""
    if isinstance(t, Var):
        if t.name not in binding:
            raise InferenceError(f"unbound variable {t.name} in expression")
        return binding[t.name]
    if isinstance(t, (IntLit, FloatLit)):
        return t.value
    if isinstance(t, EvalTerm):
        raise InferenceError("~= has no meaning in an action theory expression")
    if isinstance(t, Const):
        if t in valuation:
            return valuation[t]
        return _term_value(t)
    if isinstance(t, Compound):
        args = [eval_fluent_term(a, binding, valuation) for a in t.args]
        if t.functor in ARITH_FUNCTORS:
            for a in args:
                if isinstance(a, bool) or not isinstance(a, (int, float)):
                    raise InferenceError(
                        f"arithmetic over non-number in {print_term(t)}"
                    )
            if t.functor == "+":
                return args[0] + args[1]
            if t.functor == "-":
                return args[0] - args[1] if len(args) == 2 else -args[0]
            return args[0] * args[1]
        ground = Compound(t.functor, tuple(_value_term(a) for a in args))
        if ground in valuation:
            return valuation[ground]
        return ground
    raise InferenceError(f"cannot evaluate {t!r}")


def _match(pattern: Term, ground: Term, binding: Dict[str, object]) -> bool:
    if isinstance(pattern, Var):
        val = _term_value(ground)
        if pattern.name in binding:
            return values_equal(binding[pattern.name], val)
        binding[pattern.name] = val
        return True
    if isinstance(pattern, (IntLit, FloatLit)):
        return isinstance(ground, (IntLit, FloatLit)) and values_equal(
            pattern.value, ground.value
        )
    if isinstance(pattern, Const):
        return isinstance(ground, Const) and pattern.name == ground.name
    if isinstance(pattern, Compound):
        return (
            isinstance(ground, Compound)
            and pattern.functor == ground.functor
            and len(pattern.args) == len(ground.args)
            and all(
                _match(p, g, binding) for p, g in zip(pattern.args, ground.args)
            )
        )
    return False


# ---------------------------------------------------------------------------
# Successor state axioms
# ---------------------------------------------------------------------------


def ssa_value(theory: ActionTheory, fluent: Term, action: Term, valuation: Valuation):
    """Value of the fluent after the action: unique matching case, else frame."""
    matches = []
    for ssa in theory.ssas:
        base: Dict[str, object] = {}
        if not _match(ssa.fluent, fluent, base):
            continue
        for case in ssa.cases:
            binding = dict(base)
            if _match(case.action, action, binding):
                matches.append((case, binding))
    if len(matches) > 1:
        raise InferenceError(
            f"successor cases for {print_term(fluent)} are not exclusive "
            f"under {print_term(action)}"
        )
    if not matches:
        if fluent not in valuation:
            raise InferenceError(f"{print_term(fluent)} is not a declared fluent")
        return valuation[fluent]
    case, binding = matches[0]
    return eval_fluent_term(case.effect, binding, valuation)


def _apply_action(theory: ActionTheory, action: Term, valuation: Valuation) -> Valuation:
    return {f: ssa_value(theory, f, action, valuation) for f in valuation}


# ---------------------------------------------------------------------------
# Action classification
# ---------------------------------------------------------------------------


def _functor(t: Term) -> Tuple[str, int]:
    if isinstance(t, Const):
        return (t.name, 0)
    if isinstance(t, Compound):
        return (t.functor, len(t.args))
    raise InferenceError(f"{print_term(t)} cannot be used as an action")


def _noisy_decl(theory: ActionTheory, action: Term):
    name, arity = _functor(action)
    for nd in theory.noisy:
        if nd.name == name and arity in (nd.arity, nd.arity - 1):
            return nd
    return None


def _has_ssa_case(theory: ActionTheory, name: str) -> bool:
    for ssa in theory.ssas:
        for case in ssa.cases:
            if _functor(case.action)[0] == name:
                return True
    return False


def _likelihood_for(theory: ActionTheory, action: Term):
    for lik in theory.likelihoods:
        binding: Dict[str, object] = {}
        if _match(lik.action, action, binding):
            return lik, binding
    return None


def action_kind(theory: ActionTheory, action: Term) -> str:
    """One of "noisy", "sensing", "physical"."""
    if _noisy_decl(theory, action) is not None:
        return "noisy"
    name, _ = _functor(action)
    has_lik = any(_functor(l.action)[0] == name for l in theory.likelihoods)
    if has_lik and not _has_ssa_case(theory, name):
        return "sensing"
    return "physical"


# ---------------------------------------------------------------------------
# Prior sampling
# ---------------------------------------------------------------------------


def _default_valuation(theory: ActionTheory) -> Valuation:
    val: Valuation = {}
    for fl in theory.fluents:
        default = _SORT_DEFAULTS[fl.sort]
        if fl.arity == 0:
            val[Const(fl.name)] = default
        else:
            for combo in itertools.product(theory.domain, repeat=fl.arity):
                val[Compound(fl.name, combo)] = default
    return val


def _valuation_from_derivation(d: Derivation, theory: ActionTheory) -> Valuation:
    val = _default_valuation(theory)
    for atoms in d.store.by_pred.values():
        for atom in atoms:
            if atom not in val:
                raise InferenceError(
                    f"prior asserts {print_term(atom)}, which is not a "
                    "declared fluent instance"
                )
            val[atom] = True
    for key, value in d.rv_memo.items():
        term = d.rv_terms[key]
        if term not in val:
            raise InferenceError(
                f"prior asserts {print_term(term)}, which is not a "
                "declared fluent instance"
            )
        val[term] = value
    return val


def init_belief(theory: ActionTheory, member: int, n_particles: int, rng) -> BeliefState:
    """Particle ensemble for one member of the prior family."""
    if not theory.priors:
        raise InferenceError("the action theory declares no prior")
    if not 0 <= member < len(theory.priors):
        raise InferenceError(
            f"prior member {member} out of range (family has {len(theory.priors)})"
        )
    if n_particles < 1:
        raise InferenceError("n_particles must be at least 1")
    program = Program(clauses=theory.priors[member].clauses)
    info = validated_info(program)

    try:
        support: List[Tuple[Valuation, float]] = []
        for deriv, prob in enumerate_worlds(program, info, horizon=0):
            support.append((_valuation_from_derivation(deriv, theory), prob))
            if len(support) > n_particles:
                raise InferenceError("support larger than the particle budget")
        return BeliefState(
            particles=_merged(support),
            family_member=member,
            theory=theory,
            exact=True,
            n_target=n_particles,
        )
    except InferenceError:
        pass

    seed = _master_seed(rng)
    particles = []
    w = 1.0 / n_particles
    for i in range(n_particles):
        child = np.random.default_rng(np.random.SeedSequence((seed, i)))
        d = Derivation(program, info, 0, RandomChoice(child))
        d.run_all()
        particles.append(Particle(_valuation_from_derivation(d, theory), w))
    return BeliefState(
        particles=tuple(particles),
        family_member=member,
        theory=theory,
        exact=False,
        n_target=n_particles,
    )


def _canon(valuation: Valuation) -> Tuple:
    out = []
    for term, v in valuation.items():
        if isinstance(v, float):
            v = repr(v)
        elif isinstance(v, (Const, Compound)):
            v = print_term(v)
        out.append((term_key(term), v))
    out.sort()
    return tuple(out)


def _merged(weighted: Sequence[Tuple[Valuation, float]]) -> Tuple[Particle, ...]:
    by_key: Dict[Tuple, int] = {}
    out: List[Particle] = []
    for val, w in weighted:
        key = _canon(val)
        if key in by_key:
            old = out[by_key[key]]
            out[by_key[key]] = Particle(old.valuation, old.weight + w)
        else:
            by_key[key] = len(out)
            out.append(Particle(val, w))
    return tuple(out)


# ---------------------------------------------------------------------------
# Progression
# ---------------------------------------------------------------------------


def _insert_actual(action: Term, nd, actual: Optional[Term]) -> Term:
    """Full-arity action term with the actual argument slot filled."""
    name, arity = _functor(action)
    args = list(action.args) if isinstance(action, Compound) else []
    slot = nd.actual - 1
    if arity == nd.arity - 1:
        args.insert(slot, actual)
    elif isinstance(args[slot], Var) or actual is not None:
        args[slot] = actual
    return Compound(name, tuple(args))


def _likelihood_dist(theory, full_action: Term, valuation: Valuation):
    found = _likelihood_for(theory, full_action)
    if found is None:
        raise InferenceError(
            f"no likelihood model matches {print_term(full_action)}"
        )
    lik, binding = found
    gd = ground_dist(lik.dist, lambda t: eval_fluent_term(t, binding, valuation))
    return lik, binding, gd


def _resample_weighted(
    particles: Sequence[Particle], n: int, u: float
) -> Tuple[Particle, ...]:
    weights = np.array([p.weight for p in particles])
    cum = np.cumsum(weights / weights.sum())
    positions = (u + np.arange(n)) / n
    idx = np.searchsorted(cum, positions)
    w = 1.0 / n
    return tuple(Particle(particles[int(i)].valuation, w) for i in idx)


def progress(belief: BeliefState, action: Term, theory: ActionTheory, rng=None) -> BeliefState:
    """Push the belief through one physical action.

    A noisy action may be given without its actual argument, with a variable
    in that slot (both sample the actual per particle), or fully ground
    (replayed as given). Weights are unchanged: sampling from the likelihood
    itself needs no importance correction.
    """
    nd = _noisy_decl(theory, action)
    if nd is None:
        new = [
            Particle(_apply_action(theory, action, p.valuation), p.weight)
            for p in belief.particles
        ]
        return _replaced(belief, new)

    name, arity = _functor(action)
    if arity == nd.arity:
        slot_term = action.args[nd.actual - 1]
        if not isinstance(slot_term, Var):
            full = action
            new = [
                Particle(_apply_action(theory, full, p.valuation), p.weight)
                for p in belief.particles
            ]
            return _replaced(belief, new)

    if belief.exact:
        branched: List[Tuple[Valuation, float]] = []
        discrete_only = True
        for p in belief.particles:
            probe = _insert_actual(action, nd, Const("true"))
            lik, _, _gd = _likelihood_dist(theory, probe, p.valuation)
            if not isinstance(lik.dist, (Discrete, Delta)):
                discrete_only = False
                break
        if discrete_only:
            for p in belief.particles:
                probe = _insert_actual(action, nd, Const("true"))
                _, _, gd = _likelihood_dist(theory, probe, p.valuation)
                items = gd[1] if gd[0] == "discrete" else ((gd[1], 1.0),)
                for value, prob in items:
                    full = _insert_actual(action, nd, _value_term(value))
                    branched.append(
                        (_apply_action(theory, full, p.valuation), p.weight * prob)
                    )
            merged = _merged(branched)
            if len(merged) <= belief.n_target:
                return _replaced(belief, merged, exact=True)
            u = rng_uniform(rng)
            return _replaced(
                belief,
                _resample_weighted(merged, belief.n_target, u),
                exact=False,
            )
        belief = _expanded(belief, rng)

    seed = _master_seed(rng) if rng is not None else 0
    new = []
    for i, p in enumerate(belief.particles):
        child = np.random.default_rng(np.random.SeedSequence((seed, i)))
        probe = _insert_actual(action, nd, Const("true"))
        _, _, gd = _likelihood_dist(theory, probe, p.valuation)
        z = distributions.draw(gd, child)
        full = _insert_actual(action, nd, _value_term(z))
        new.append(Particle(_apply_action(theory, full, p.valuation), p.weight))
    return _replaced(belief, new)


def _replaced(belief: BeliefState, particles, exact: Optional[bool] = None) -> BeliefState:
    return BeliefState(
        particles=tuple(particles),
        family_member=belief.family_member,
        theory=belief.theory,
        exact=belief.exact if exact is None else exact,
        n_target=belief.n_target,
    )


def _expanded(belief: BeliefState, rng) -> BeliefState:
    """Exact ensemble inflated to the target particle count for sampling."""
    u = rng_uniform(rng)
    return _replaced(
        belief,
        _resample_weighted(belief.particles, belief.n_target, u),
        exact=False,
    )


def rng_uniform(rng) -> float:
    if rng is None:
        return 0.5
    if isinstance(rng, np.random.Generator):
        return float(rng.random())
    return float(np.random.default_rng(rng).random())


def observe(belief: BeliefState, action: Term, theory: ActionTheory, rng=None) -> BeliefState:
    """Condition the belief on an observation action with a ground actual."""
    weights = []
    for p in belief.particles:
        lik, binding, gd = _likelihood_dist(theory, action, p.valuation)
        z = binding.get(lik.actual)
        if z is None or isinstance(z, Var):
            raise InferenceError(
                f"observation {print_term(action)} does not supply a value "
                f"for {lik.actual}"
            )
        weights.append(p.weight * distributions.density(gd, z))
    total = sum(weights)
    if total <= 0.0:
        raise InferenceError(
            f"observation {print_term(action)} has probability zero under "
            "every particle"
        )
    new = [
        Particle(p.valuation, w / total) for p, w in zip(belief.particles, weights)
    ]
    if belief.exact:
        return _replaced(belief, new)
    n = len(new)
    ess = total * total / sum(w * w for w in weights)
    if ess < n / 2:
        return _replaced(belief, _resample_weighted(new, n, rng_uniform(rng)))
    return _replaced(belief, new)


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def _atom_truth(term: Term, binding, valuation: Valuation, theory) -> bool:
    if isinstance(term, Compound):
        args = tuple(
            _value_term(eval_fluent_term(a, binding, valuation)) for a in term.args
        )
        ground: Term = Compound(term.functor, args)
    else:
        ground = term
    if ground not in valuation:
        raise InferenceError(
            f"{print_term(ground)} is not a declared fluent instance"
        )
    v = valuation[ground]
    if not isinstance(v, bool):
        raise InferenceError(
            f"{print_term(ground)} is not boolean, compare its value instead"
        )
    return v


def _formula_holds(f: Formula, binding, valuation: Valuation, theory) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, AtomF):
        return _atom_truth(f.atom, binding, valuation, theory)
    if isinstance(f, CmpF):
        left = eval_fluent_term(f.lhs, binding, valuation)
        right = eval_fluent_term(f.rhs, binding, valuation)
        return _compare(f.op, left, right)
    if isinstance(f, NotF):
        return not _formula_holds(f.body, binding, valuation, theory)
    if isinstance(f, AndF):
        return all(_formula_holds(g, binding, valuation, theory) for g in f.items)
    if isinstance(f, OrF):
        return any(_formula_holds(g, binding, valuation, theory) for g in f.items)
    if isinstance(f, (ExistsF, ForallF)):
        if not theory.domain:
            raise InferenceError(
                "quantified formula requires a declared object domain"
            )
        results = (
            _formula_holds(
                f.body, {**binding, f.var: _term_value(c)}, valuation, theory
            )
            for c in theory.domain
        )
        return any(results) if isinstance(f, ExistsF) else all(results)
    raise InferenceError(f"cannot evaluate formula {f!r}")


def _compare(op: str, left, right) -> bool:
    if op == "==":
        return values_equal(left, right)
    if op == "!=":
        return not values_equal(left, right)
    for side in (left, right):
        if isinstance(side, bool) or not isinstance(side, (int, float)):
            raise InferenceError(f"ordering comparison over non-number {side!r}")
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def degree_of_belief(belief: BeliefState, formula: Formula) -> float:
    """Total weight of the particles satisfying the formula."""
    total = 0.0
    for p in belief.particles:
        if _formula_holds(formula, {}, p.valuation, belief.theory):
            total += p.weight
    return min(max(total, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Prior families
# ---------------------------------------------------------------------------


def replay_trace(
    theory: ActionTheory,
    member: int,
    trace: Sequence[Term],
    n_particles: int,
    seed: int,
) -> BeliefState:
    """Run init/progress/observe for one family member with derived seeds."""
    init_rng = np.random.default_rng(np.random.SeedSequence((seed, member, 0)))
    b = init_belief(theory, member, n_particles, init_rng)
    for k, act in enumerate(trace, start=1):
        step_rng = np.random.default_rng(np.random.SeedSequence((seed, member, k)))
        if action_kind(theory, act) == "sensing":
            b = observe(b, act, theory, step_rng)
        else:
            b = progress(b, act, theory, step_rng)
    return b


def belief_interval(
    theory: ActionTheory,
    formula: Formula,
    trace: Sequence[Term],
    n_particles: int,
    rng,
) -> Tuple[float, float]:
    """Range of the degree of belief across the declared prior family."""
    if not theory.priors:
        raise InferenceError("the action theory declares no prior")
    seed = _master_seed(rng)
    values = [
        degree_of_belief(replay_trace(theory, m, trace, n_particles, seed), formula)
        for m in range(len(theory.priors))
    ]
    return min(values), max(values)
