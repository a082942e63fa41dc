"""Layered derivation engine for clause programs.

One Derivation builds one possible world: the static stratum first, then
time layers in order. Random variables are drawn at most once (memoized on
the canonical ground head), probabilistic facts flip one coin per (clause,
ground head), and negation is evaluated closed-world per completed stratum.

Randomness is abstracted behind a choice source so the same derivation code
serves three callers: sampling (RandomChoice), likelihood weighting
(evidence clamps handled here, weights accumulated), and exact enumeration
(ScriptedChoice walks every branch of the choice tree).
"""

from __future__ import annotations

import math
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from . import distributions
from .analysis import BUILTIN_PREDS, PredKey, ProgramInfo, pred_key, time_form
from .errors import InferenceError
from .lang.ast import (
    ARITH_FUNCTORS,
    AtomLit,
    Clause,
    CmpLit,
    Compound,
    Const,
    Delta,
    Discrete,
    DistClause,
    EvalTerm,
    FloatLit,
    Gaussian,
    IntLit,
    Poisson,
    ProbFact,
    Program,
    Rule,
    Term,
    UniformCont,
    Var,
    term_vars,
)
from .lang.printer import print_term

DEFAULT_STEP_LIMIT = 10_000

TRUE_CONST = Const("true")
FALSE_CONST = Const("false")


class _EvalMiss(Exception):
    """A referenced random variable has no drawn value in this world."""


def value_to_term(v) -> Term:
    if isinstance(v, bool):
        return TRUE_CONST if v else FALSE_CONST
    if isinstance(v, int):
        return IntLit(v)
    if isinstance(v, float):
        return FloatLit(v)
    if isinstance(v, (Const, Compound, IntLit, FloatLit)):
        return v
    raise TypeError(f"cannot embed value {v!r} in a term")


def eval_term(t: Term, subst: Dict[str, Term], rv_get):
    """Evaluate a term to a value: bool, int, float, or a symbolic term.

    rv_get maps a random variable's canonical key to its value and raises
    _EvalMiss when the variable has no value in the current world.
    """
    if isinstance(t, Var):
        bound = subst.get(t.name)
        if bound is None:
            raise InferenceError(f"unbound variable {t.name}")
        return eval_term(bound, subst, rv_get)
    if isinstance(t, (IntLit, FloatLit)):
        return t.value
    if isinstance(t, Const):
        if t.name == "true":
            return True
        if t.name == "false":
            return False
        return t
    if isinstance(t, EvalTerm):
        atom = value_to_term(eval_term(t.inner, subst, rv_get))
        return rv_get(term_key(atom))
    if isinstance(t, Compound):
        if t.functor in ARITH_FUNCTORS:
            l = eval_term(t.args[0], subst, rv_get)
            r = eval_term(t.args[1], subst, rv_get)
            for v in (l, r):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise InferenceError(f"arithmetic on non-numeric value {v!r}")
            if t.functor == "+":
                return l + r
            if t.functor == "-":
                return l - r
            return l * r
        return Compound(
            t.functor,
            tuple(value_to_term(eval_term(a, subst, rv_get)) for a in t.args),
        )
    raise TypeError(f"not a term: {t!r}")


def normalize_term(t: Term, subst: Dict[str, Term], rv_get) -> Term:
    return value_to_term(eval_term(t, subst, rv_get))


def compare_values(op: str, l, r) -> bool:
    if op == "==":
        return distributions.values_equal(l, r)
    if op == "!=":
        return not distributions.values_equal(l, r)
    for v in (l, r):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InferenceError(f"ordering comparison on non-numeric value {v!r}")
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    return l >= r


def term_key(t: Term) -> str:
    return print_term(t)


def ground_dist(dist, eval_fn) -> Tuple:
    """Evaluate a DistributionSpec's parameters to a ground instance tuple."""
    if isinstance(dist, Gaussian):
        return ("gaussian", eval_fn(dist.mean), eval_fn(dist.variance))
    if isinstance(dist, Poisson):
        return ("poisson", eval_fn(dist.rate))
    if isinstance(dist, UniformCont):
        return ("uniform", eval_fn(dist.lo), eval_fn(dist.hi))
    if isinstance(dist, Discrete):
        return ("discrete", tuple((eval_fn(v), eval_fn(w)) for v, w in dist.items))
    if isinstance(dist, Delta):
        return ("delta", eval_fn(dist.value))
    raise TypeError(f"not a distribution: {dist!r}")


# ---------------------------------------------------------------------------
# Choice sources
# ---------------------------------------------------------------------------


class RandomChoice:
    def __init__(self, rng):
        self.rng = rng

    def flip(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def draw(self, gd: Tuple):
        return distributions.draw(gd, self.rng)


MAX_EXACT_CHOICE_POINTS = 24


class ScriptedChoice:
    """Deterministic choice source for exact enumeration.

    Replays a prefix of branch indices, then takes the first branch at each
    new choice point while recording (index, n_branches, branch_prob).
    """

    def __init__(self, prefix: Sequence[int] = ()):
        self.prefix = list(prefix)
        self.trail: List[Tuple[int, int, float]] = []

    def _choose(self, n: int, probs: Sequence[float]) -> int:
        pos = len(self.trail)
        idx = self.prefix[pos] if pos < len(self.prefix) else 0
        if len(self.trail) >= MAX_EXACT_CHOICE_POINTS:
            raise InferenceError(
                "enumeration bound exceeded: more than "
                f"{MAX_EXACT_CHOICE_POINTS} choice points"
            )
        self.trail.append((idx, n, probs[idx]))
        return idx

    def flip(self, p: float) -> bool:
        idx = self._choose(2, (p, 1.0 - p))
        return idx == 0

    def draw(self, gd: Tuple):
        kind = gd[0]
        if kind == "delta":
            return gd[1]
        if kind == "discrete":
            distributions.check_params(gd)
            items = gd[1]
            idx = self._choose(len(items), [w for _, w in items])
            return items[idx][0]
        raise InferenceError(
            f"continuous distribution present ({kind}); exact enumeration "
            "supports only probabilistic facts, discrete, and delta"
        )

    def path_prob(self) -> float:
        p = 1.0
        for _, _, bp in self.trail:
            p *= bp
        return p

    def next_prefix(self) -> Optional[List[int]]:
        i = len(self.trail) - 1
        while i >= 0 and self.trail[i][0] >= self.trail[i][1] - 1:
            i -= 1
        if i < 0:
            return None
        return [e[0] for e in self.trail[:i]] + [self.trail[i][0] + 1]


# ---------------------------------------------------------------------------
# Fact storage
# ---------------------------------------------------------------------------


class FactStore:
    """Ground atoms, deduplicated by canonical key, in insertion order."""

    __slots__ = ("by_pred", "keys")

    def __init__(self):
        self.by_pred: Dict[PredKey, List[Term]] = {}
        self.keys: Set[str] = set()

    def add(self, atom: Term, key: Optional[str] = None) -> bool:
        if key is None:
            key = term_key(atom)
        if key in self.keys:
            return False
        self.keys.add(key)
        self.by_pred.setdefault(pred_key(atom), []).append(atom)
        return True

    def has(self, key: str) -> bool:
        return key in self.keys

    def candidates(self, key: PredKey) -> List[Term]:
        return self.by_pred.get(key, [])

    def copy(self) -> "FactStore":
        new = FactStore()
        new.by_pred = {k: list(v) for k, v in self.by_pred.items()}
        new.keys = set(self.keys)
        return new


# ---------------------------------------------------------------------------
# Evidence
# ---------------------------------------------------------------------------


class EvidenceClamps:
    """Preprocessed evidence: rv value clamps and atom truth clamps."""

    def __init__(self, rv_values: Dict[str, object], atoms_true: Dict[str, Term],
                 atoms_false: Dict[str, Term]):
        self.rv_values = rv_values
        self.atoms_true = atoms_true
        self.atoms_false = atoms_false

    @property
    def empty(self) -> bool:
        return not (self.rv_values or self.atoms_true or self.atoms_false)


EMPTY_CLAMPS = EvidenceClamps({}, {}, {})


# ---------------------------------------------------------------------------
# Derivation
# ---------------------------------------------------------------------------


class Derivation:
    def __init__(
        self,
        program: Program,
        info: ProgramInfo,
        horizon: int,
        choice,
        clamps: EvidenceClamps = EMPTY_CLAMPS,
        step_limit: int = DEFAULT_STEP_LIMIT,
    ):
        self.program = program
        self.info = info
        self.horizon = horizon
        self.choice = choice
        self.clamps = clamps
        self.step_limit = step_limit

        self.store = FactStore()
        self.rv_memo: Dict[str, object] = {}
        self.rv_terms: Dict[str, Term] = {}
        self.coin_memo: Dict[Tuple[int, str], Optional[bool]] = {}
        self.prob_groups: Dict[str, List[float]] = {}
        self.rule_derived: Set[str] = set()
        self.contradiction = False
        self.weight = 1.0
        self.steps = 0
        self.layers_done = -1

        self._static_ids: List[int] = []
        self._temporal_ids: List[int] = []
        for idx, c in enumerate(program.clauses):
            hk = pred_key(c.head)
            if info.is_temporal(hk):
                self._temporal_ids.append(idx)
            else:
                self._static_ids.append(idx)
        # stable stratum-major order
        strata = info.clause_stratum
        self._static_ids.sort(key=lambda i: (strata[i], i))
        self._temporal_ids.sort(key=lambda i: (strata[i], i))

        for key, atom in clamps.atoms_true.items():
            self.store.add(atom, key)

    # -- forking (planner rollouts) ----------------------------------------

    def fork(self) -> "Derivation":
        new = Derivation.__new__(Derivation)
        new.program = self.program
        new.info = self.info
        new.horizon = self.horizon
        new.choice = self.choice
        new.clamps = self.clamps
        new.step_limit = self.step_limit
        new.store = self.store.copy()
        new.rv_memo = dict(self.rv_memo)
        new.rv_terms = dict(self.rv_terms)
        new.coin_memo = dict(self.coin_memo)
        new.prob_groups = {k: list(v) for k, v in self.prob_groups.items()}
        new.rule_derived = set(self.rule_derived)
        new.contradiction = self.contradiction
        new.weight = self.weight
        new.steps = self.steps
        new.layers_done = self.layers_done
        new._static_ids = self._static_ids
        new._temporal_ids = self._temporal_ids
        return new

    # -- term evaluation -----------------------------------------------------

    def _rv_get(self, key: str):
        if key not in self.rv_memo:
            raise _EvalMiss(key)
        return self.rv_memo[key]

    def eval_term(self, t: Term, subst: Dict[str, Term]):
        return eval_term(t, subst, self._rv_get)

    def normalize(self, t: Term, subst: Dict[str, Term]) -> Term:
        """Ground a term: substitute, evaluate arithmetic and eval-terms."""
        return value_to_term(self.eval_term(t, subst))

    # -- matching -------------------------------------------------------------

    def match_term(self, pat: Term, fact: Term, subst: Dict[str, Term]):
        if isinstance(pat, Var):
            bound = subst.get(pat.name)
            if bound is not None:
                return subst if bound == fact else None
            out = dict(subst)
            out[pat.name] = fact
            return out
        if isinstance(pat, (IntLit, FloatLit, Const)):
            return subst if pat == fact else None
        if isinstance(pat, Compound) and pat.functor not in ARITH_FUNCTORS:
            if (
                not isinstance(fact, Compound)
                or fact.functor != pat.functor
                or len(fact.args) != len(pat.args)
            ):
                return None
            cur = subst
            for pa, fa in zip(pat.args, fact.args):
                cur = self.match_term(pa, fa, cur)
                if cur is None:
                    return None
            return cur
        # arithmetic or eval-term in an argument: must be evaluable now
        if term_vars(pat) <= set(subst):
            try:
                val = self.normalize(pat, subst)
            except _EvalMiss:
                return None
            return subst if val == fact else None
        return None

    def match_atom(self, pattern: Term, fact: Term, subst: Dict[str, Term]):
        if isinstance(pattern, Const):
            return subst if pattern == fact else None
        if not isinstance(fact, Compound) or fact.functor != pattern.functor:
            return None
        if len(fact.args) != len(pattern.args):
            return None
        cur = subst
        for pa, fa in zip(pattern.args, fact.args):
            cur = self.match_term(pa, fa, cur)
            if cur is None:
                return None
        return cur

    # -- body solving ----------------------------------------------------------

    def _ground_under(self, t: Term, subst: Dict[str, Term]) -> bool:
        return term_vars(t) <= set(subst)

    def _ready(self, lit, subst: Dict[str, Term]) -> bool:
        if isinstance(lit, CmpLit):
            return self._ground_under(lit.lhs, subst) and self._ground_under(
                lit.rhs, subst
            )
        key = pred_key(lit.atom)
        if key is not None and key[0] == "between" and key[1] == 3:
            lo, hi, _ = lit.atom.args
            return self._ground_under(lo, subst) and self._ground_under(hi, subst)
        if lit.negated:
            return self._ground_under(lit.atom, subst)
        return True

    def solve_body(
        self, body: Tuple, subst: Dict[str, Term]
    ) -> Iterator[Dict[str, Term]]:
        if not body:
            yield subst
            return
        pick = -1
        for i, lit in enumerate(body):
            if self._ready(lit, subst):
                pick = i
                break
        if pick < 0:
            raise InferenceError(
                "cannot order body literals: unbound comparison or negation"
            )
        lit = body[pick]
        rest = body[:pick] + body[pick + 1 :]

        if isinstance(lit, CmpLit):
            if self._cmp_holds(lit, subst):
                yield from self.solve_body(rest, subst)
            return

        key = pred_key(lit.atom)
        if key == ("between", 3):
            yield from self._solve_between(lit, rest, subst)
            return
        if lit.negated:
            try:
                atom = self.normalize(lit.atom, subst)
            except _EvalMiss:
                yield from self.solve_body(rest, subst)
                return
            if not self.store.has(term_key(atom)):
                yield from self.solve_body(rest, subst)
            return

        # positive atom: join against stored facts
        if self._ground_under(lit.atom, subst):
            try:
                atom = self.normalize(lit.atom, subst)
            except _EvalMiss:
                return
            if self.store.has(term_key(atom)):
                yield from self.solve_body(rest, subst)
            return
        for fact in self.store.candidates(key):
            m = self.match_atom(lit.atom, fact, subst)
            if m is not None:
                yield from self.solve_body(rest, m)

    def _solve_between(self, lit, rest, subst) -> Iterator[Dict[str, Term]]:
        if lit.negated:
            raise InferenceError("negated between/3 is not supported")
        lo_t, hi_t, x_t = lit.atom.args
        try:
            lo = self.eval_term(lo_t, subst)
            hi = self.eval_term(hi_t, subst)
        except _EvalMiss:
            return
        if isinstance(lo, bool) or isinstance(hi, bool) or not (
            isinstance(lo, int) and isinstance(hi, int)
        ):
            raise InferenceError("between/3 bounds must be integers")
        if self._ground_under(x_t, subst):
            try:
                x = self.eval_term(x_t, subst)
            except _EvalMiss:
                return
            if isinstance(x, int) and not isinstance(x, bool) and lo <= x <= hi:
                yield from self.solve_body(rest, subst)
            return
        if not isinstance(x_t, Var):
            raise InferenceError(
                "between/3 third argument must be a variable or ground"
            )
        for v in range(lo, hi + 1):
            out = dict(subst)
            out[x_t.name] = IntLit(v)
            yield from self.solve_body(rest, out)

    def _cmp_holds(self, lit: CmpLit, subst) -> bool:
        try:
            l = self.eval_term(lit.lhs, subst)
            r = self.eval_term(lit.rhs, subst)
        except _EvalMiss:
            return False
        res = compare_values(lit.op, l, r)
        return (not res) if lit.negated else res

    # -- clause firing -----------------------------------------------------------

    def _count_step(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise InferenceError(
                f"derivation step limit exceeded ({self.step_limit}); "
                "likely recursion without time progression"
            )

    def _fire(self, idx: int, clause: Clause, subst: Dict[str, Term]) -> bool:
        self._count_step()
        try:
            head = self.normalize(clause.head, subst)
        except _EvalMiss:
            return False
        key = term_key(head)

        if isinstance(clause, Rule):
            if key in self.clamps.atoms_false:
                self.contradiction = True
                return False
            if key in self.clamps.atoms_true:
                self.rule_derived.add(key)
            return self.store.add(head, key)

        if isinstance(clause, ProbFact):
            memo_key = (idx, key)
            if memo_key in self.coin_memo:
                return False
            clamped = (
                key in self.clamps.atoms_true or key in self.clamps.atoms_false
            )
            if clamped:
                self.coin_memo[memo_key] = None
                self.prob_groups.setdefault(key, []).append(clause.prob)
                return False
            coin = self.choice.flip(clause.prob)
            self.coin_memo[memo_key] = coin
            if coin:
                return self.store.add(head, key)
            return False

        # DistClause
        if key in self.rv_memo:
            return False
        def ev(t):
            try:
                return self.eval_term(t, subst)
            except _EvalMiss as e:
                raise InferenceError(
                    f"unbound distribution parameter: random variable "
                    f"{e.args[0]} has no value"
                ) from None
        gd = ground_dist(clause.dist, ev)
        if key in self.clamps.rv_values:
            obs = self.clamps.rv_values[key]
            self.rv_memo[key] = obs
            self.weight *= distributions.density(gd, obs)
        else:
            self.rv_memo[key] = self.choice.draw(gd)
        self.rv_terms[key] = head
        return True

    # -- passes --------------------------------------------------------------

    def _instantiations(self, clause: Clause, layer: Optional[int]):
        if layer is None:
            return ({},)
        fa = clause.head.args[-1] if isinstance(clause.head, Compound) else None
        tf = time_form(fa) if fa is not None else None
        if tf is None:
            raise InferenceError(
                f"temporal head {print_term(clause.head)} has an unusable "
                "time argument"
            )
        if tf.var is None:
            return ({},) if tf.offset == layer else ()
        t0 = layer - tf.offset
        if t0 < 0:
            return ()
        return ({tf.var: IntLit(t0)},)

    def _pass(self, clause_ids: List[int], layer: Optional[int]):
        strata = self.info.clause_stratum
        groups: List[List[int]] = []
        cur_stratum = None
        for idx in clause_ids:
            if strata[idx] != cur_stratum:
                groups.append([])
                cur_stratum = strata[idx]
            groups[-1].append(idx)
        for group in groups:
            changed = True
            while changed:
                changed = False
                for idx in group:
                    clause = self.program.clauses[idx]
                    for s0 in self._instantiations(clause, layer):
                        for s in self.solve_body(clause.body, s0):
                            if self._fire(idx, clause, s):
                                changed = True

    def run_static(self):
        self._pass(self._static_ids, None)

    def run_layer(self, layer: int):
        self._pass(self._temporal_ids, layer)
        self.layers_done = max(self.layers_done, layer)

    def run_all(self):
        self.run_static()
        for layer in range(self.horizon + 1):
            self.run_layer(layer)

    def inject(self, atom: Term, layer: int):
        """Assert an externally chosen fact (an action) and re-close its layer."""
        self.store.add(atom)
        self._pass(self._temporal_ids, layer)

    # -- results ------------------------------------------------------------------

    def finalize_weight(self) -> float:
        if self.contradiction:
            return 0.0
        w = self.weight
        for key in self.clamps.atoms_true:
            if key in self.rule_derived:
                continue
            ps = self.prob_groups.get(key)
            if not ps:
                return 0.0
            miss = 1.0
            for p in ps:
                miss *= 1.0 - p
            w *= 1.0 - miss
        for key in self.clamps.atoms_false:
            for p in self.prob_groups.get(key, ()):
                w *= 1.0 - p
        for key in self.clamps.rv_values:
            if key not in self.rv_memo:
                return 0.0
        return w


def prepare_clamps(program: Program, info: ProgramInfo, evidence) -> EvidenceClamps:
    """Split evidence items into rv clamps and atom truth clamps.

    Items are (ground term, value) pairs; boolean values clamp atom truth,
    anything else clamps a random variable's drawn value.
    """
    rv_values: Dict[str, object] = {}
    atoms_true: Dict[str, Term] = {}
    atoms_false: Dict[str, Term] = {}
    for term, value in evidence:
        if term_vars(term):
            raise InferenceError(
                f"evidence term {print_term(term)} must be ground"
            )
        key = term_key(term)
        if isinstance(value, bool):
            (atoms_true if value else atoms_false)[key] = term
        else:
            rv_values[key] = value
    return EvidenceClamps(rv_values, atoms_true, atoms_false)


def enumerate_worlds(
    program: Program, info: ProgramInfo, horizon: int
) -> Iterator[Tuple["Derivation", float]]:
    """Yield every world of a finite discrete program with its probability."""
    for c in program.clauses:
        if isinstance(c, DistClause) and isinstance(
            c.dist, (Gaussian, Poisson, UniformCont)
        ):
            raise InferenceError(
                "continuous distribution present; exact enumeration supports "
                "only probabilistic facts, discrete, and delta"
            )
    prefix: List[int] = []
    while True:
        ch = ScriptedChoice(prefix)
        d = Derivation(program, info, horizon, ch)
        d.run_all()
        yield d, ch.path_prob()
        nxt = ch.next_prefix()
        if nxt is None:
            return
        prefix = nxt
