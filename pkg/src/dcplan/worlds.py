"""Possible worlds: sampling, formula evaluation, and query estimation.

A World is one frozen outcome of a clause program: every random variable
has one drawn value and the facts those values entail are closed under the
rules, layer by layer. Queries are estimated by likelihood weighting over
sampled worlds, with an exact enumeration path for finite discrete
programs that serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from . import engine, tabular
from .analysis import PredKey, ProgramInfo, pred_key
from .distributions import values_equal
from .engine import Derivation, RandomChoice, _EvalMiss, term_key
from .errors import InferenceError
from .lang.ast import (
    AndF,
    AtomF,
    CmpF,
    Compound,
    Const,
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
    term_vars,
)
from .lang.parser import parse_term_text
from .lang.printer import print_term
from .validator import validated_info

DEFAULT_SAMPLES = 10_000

EvidenceItem = Tuple[Term, object]
Evidence = Tuple[EvidenceItem, ...]


@dataclass(frozen=True)
class QueryResult:
    estimate: float
    stderr: float
    n_samples: int
    effective_sample_size: float


@dataclass
class World:
    """One sampled outcome: ground facts and rv values, layered by time."""

    horizon: int
    fact_keys: Set[str]
    facts_by_pred: Dict[PredKey, Tuple[Term, ...]]
    rv_values: Dict[str, object]
    rv_terms: Dict[str, Term]
    temporal: frozenset
    domain: Tuple[Const, ...]
    _layers: Optional[Dict[int, Tuple[Dict[str, object], Tuple[Term, ...]]]] = field(
        default=None, repr=False
    )

    def has_atom(self, atom: Term) -> bool:
        return term_key(atom) in self.fact_keys

    def atoms(self, name: str, arity: int) -> Tuple[Term, ...]:
        return self.facts_by_pred.get((name, arity), ())

    def rv(self, term: Term):
        return self.rv_values.get(term_key(term))

    def _time_of(self, t: Term) -> Optional[int]:
        k = pred_key(t)
        if k is None or k not in self.temporal:
            return None
        if isinstance(t, Compound) and isinstance(t.args[-1], IntLit):
            return t.args[-1].value
        return None

    @property
    def layers(self) -> Dict[int, Tuple[Dict[str, object], Tuple[Term, ...]]]:
        """Map time -> (rv values, facts) for the temporal part of the world."""
        if self._layers is None:
            facts: Dict[int, List[Term]] = {t: [] for t in range(self.horizon + 1)}
            rvs: Dict[int, Dict[str, object]] = {
                t: {} for t in range(self.horizon + 1)
            }
            for atoms in self.facts_by_pred.values():
                for atom in atoms:
                    t = self._time_of(atom)
                    if t is not None and t in facts:
                        facts[t].append(atom)
            for key, term in self.rv_terms.items():
                t = self._time_of(term)
                if t is not None and t in rvs:
                    rvs[t][key] = self.rv_values[key]
            self._layers = {
                t: (rvs[t], tuple(facts[t])) for t in range(self.horizon + 1)
            }
        return self._layers

    @property
    def static_facts(self) -> Tuple[Term, ...]:
        out: List[Term] = []
        for atoms in self.facts_by_pred.values():
            for atom in atoms:
                if self._time_of(atom) is None:
                    out.append(atom)
        return tuple(out)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _master_seed(rng) -> int:
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return int(rng)
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    raise TypeError("rng must be an integer seed or a numpy Generator")


def world_from_derivation(
    d: Derivation, info: ProgramInfo, domain: Tuple[Const, ...]
) -> World:
    return World(
        horizon=d.horizon,
        fact_keys=d.store.keys,
        facts_by_pred={k: tuple(v) for k, v in d.store.by_pred.items()},
        rv_values=d.rv_memo,
        rv_terms=d.rv_terms,
        temporal=frozenset(info.temporal),
        domain=domain,
    )


def _domain_of(program: Program) -> Tuple[Const, ...]:
    return tuple(program.theory.domain) if program.theory is not None else ()


def sample_world(program: Program, horizon: int, rng) -> World:
    """Sample one possible world up to the given horizon."""
    if horizon < 0:
        raise InferenceError("horizon must be non-negative")
    info = validated_info(program)
    d = Derivation(program, info, horizon, RandomChoice(_as_rng(rng)))
    d.run_all()
    return world_from_derivation(d, info, _domain_of(program))


# ---------------------------------------------------------------------------
# Formula evaluation over a finished world
# ---------------------------------------------------------------------------


def _world_rv_get(world: World):
    def get(key: str):
        if key in world.rv_values:
            return world.rv_values[key]
        raise _EvalMiss(key)

    return get


def _atom_target(world: World, atom: Term, t: int) -> Term:
    key = pred_key(atom)
    if key is None:
        raise InferenceError(f"{print_term(atom)} is not an atom")
    name, arity = key
    if key in world.temporal:
        return atom
    if (name, arity + 1) in world.temporal:
        args = atom.args if isinstance(atom, Compound) else ()
        return Compound(name, args + (IntLit(t),))
    return atom


def _holds(world: World, f: Formula, t: int, env: Dict[str, Term]) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, AtomF):
        target = _atom_target(world, f.atom, t)
        try:
            ground = engine.normalize_term(target, env, _world_rv_get(world))
        except _EvalMiss:
            return False
        return term_key(ground) in world.fact_keys
    if isinstance(f, CmpF):
        get = _world_rv_get(world)
        try:
            l = engine.eval_term(f.lhs, env, get)
            r = engine.eval_term(f.rhs, env, get)
        except _EvalMiss:
            return False
        return engine.compare_values(f.op, l, r)
    if isinstance(f, NotF):
        return not _holds(world, f.body, t, env)
    if isinstance(f, AndF):
        return all(_holds(world, item, t, env) for item in f.items)
    if isinstance(f, OrF):
        return any(_holds(world, item, t, env) for item in f.items)
    if isinstance(f, (ExistsF, ForallF)):
        if not world.domain:
            raise InferenceError(
                "quantified query requires a declared domain"
            )
        results = (
            _holds(world, f.body, t, {**env, f.var: c}) for c in world.domain
        )
        return any(results) if isinstance(f, ExistsF) else all(results)
    raise TypeError(f"not a formula: {f!r}")


def holds(world: World, formula: Formula, t: int = 0) -> bool:
    """Evaluate a ground formula against one world at time t."""
    if t > world.horizon:
        raise InferenceError(
            f"time {t} is beyond the world horizon {world.horizon}"
        )
    return _holds(world, formula, t, {})


# ---------------------------------------------------------------------------
# Query estimation
# ---------------------------------------------------------------------------


def _weighted_result(
    weights: Sequence[float], indicators: Sequence[float], n: int
) -> QueryResult:
    w = np.asarray(weights, dtype=float)
    q = np.asarray(indicators, dtype=float)
    total = float(w.sum())
    if total <= 0.0:
        raise InferenceError(
            "all sample weights are zero: evidence is impossible under "
            "every sampled world"
        )
    estimate = float((w * q).sum() / total)
    stderr = float(math.sqrt(((w * (q - estimate)) ** 2).sum()) / total)
    ess = float(total * total / (w * w).sum())
    return QueryResult(estimate, stderr, n, ess)


def estimate_query(
    program: Program,
    query: Formula,
    evidence: Evidence = (),
    n: int = DEFAULT_SAMPLES,
    horizon: int = 0,
    rng=0,
    method: str = "auto",
) -> QueryResult:
    """Likelihood-weighted query estimate over n sampled worlds."""
    if n < 1:
        raise InferenceError("n must be at least 1")
    if method not in ("auto", "scalar", "tabular"):
        raise ValueError(f"unknown method {method!r}")
    info = validated_info(program)
    seed = _master_seed(rng)

    if method in ("auto", "tabular"):
        table = tabular.compile_program(program, info, query, evidence)
        if table is not None:
            weights, indicators = tabular.evaluate(table, n, seed)
            return _weighted_result(weights, indicators, n)
        if method == "tabular":
            raise InferenceError(
                "program or query is outside the vectorized evaluator's "
                "supported fragment"
            )

    clamps = engine.prepare_clamps(program, info, evidence)
    domain = _domain_of(program)
    weights: List[float] = []
    indicators: List[float] = []
    for i in range(n):
        child = np.random.default_rng(np.random.SeedSequence((seed, i)))
        d = Derivation(program, info, horizon, RandomChoice(child), clamps)
        d.run_all()
        w = d.finalize_weight()
        weights.append(w)
        if w > 0.0:
            world = world_from_derivation(d, info, domain)
            indicators.append(1.0 if holds(world, query) else 0.0)
        else:
            indicators.append(0.0)
    return _weighted_result(weights, indicators, n)


def _evidence_satisfied(world: World, evidence: Evidence) -> bool:
    for term, value in evidence:
        key = term_key(term)
        if isinstance(value, bool):
            if (key in world.fact_keys) != value:
                return False
        else:
            if key not in world.rv_values:
                return False
            if not values_equal(world.rv_values[key], value):
                return False
    return True


def exact_query(
    program: Program,
    query: Formula,
    evidence: Evidence = (),
    horizon: int = 0,
) -> float:
    """Query probability by full enumeration of a finite discrete program."""
    info = validated_info(program)
    domain = _domain_of(program)
    numer = 0.0
    denom = 0.0
    for d, p in engine.enumerate_worlds(program, info, horizon):
        world = world_from_derivation(d, info, domain)
        if not _evidence_satisfied(world, evidence):
            continue
        denom += p
        if holds(world, query):
            numer += p
    if denom <= 0.0:
        raise InferenceError("evidence has probability zero")
    return numer / denom


# ---------------------------------------------------------------------------
# Evidence parsing (shared by the CLI and tests)
# ---------------------------------------------------------------------------


def _term_to_value(t: Term):
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
    if isinstance(t, Compound) and not term_vars(t):
        return t
    raise InferenceError(f"cannot use {print_term(t)} as an observed value")


def parse_evidence_item(text: str) -> EvidenceItem:
    """Parse one 'term=value' evidence string."""
    if "=" not in text:
        raise InferenceError(
            f"evidence item {text!r} must have the form term=value"
        )
    lhs_text, rhs_text = text.rsplit("=", 1)
    lhs = parse_term_text(lhs_text.strip())
    rhs = parse_term_text(rhs_text.strip())
    if term_vars(lhs):
        raise InferenceError(f"evidence term {lhs_text.strip()!r} must be ground")
    return (lhs, _term_to_value(rhs))


def parse_evidence(items: Iterable[str]) -> Evidence:
    return tuple(parse_evidence_item(s) for s in items)
