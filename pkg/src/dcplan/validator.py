"""Static checks run before inference, planning, or execution.

Catches the program shapes the runtime cannot give meaning to: unbound
variables in heads or negated literals, predicates used both as random
variables and as atoms, malformed action theories, and control programs
that reference undeclared structure. Structural analysis problems
(negative cycles, time-dropping clauses) are folded in from analysis.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Set, Tuple

from .analysis import ProgramInfo, analyze, pred_key, time_form
from .errors import ValidationError
from .lang.ast import (
    ActionTheory,
    AtomLit,
    AndF,
    Choice,
    Clause,
    CmpLit,
    CmpF,
    Compound,
    Const,
    Diagnostic,
    Discrete,
    DistClause,
    ExistsF,
    FalseF,
    FloatLit,
    ForallF,
    Formula,
    Gaussian,
    LikelihoodModel,
    If,
    IntLit,
    NotF,
    OrF,
    Pick,
    Poisson,
    Prim,
    Program,
    ProgramExpr,
    Seq,
    Star,
    Term,
    Test,
    TrueF,
    AtomF,
    UniformCont,
    Var,
    While,
    RESERVED_PREDICATES,
    dist_param_terms,
    term_vars,
)
from .lang.printer import print_term

WEIGHT_SUM_TOL = 1e-9


def _diag(diags: List[Diagnostic], severity: str, message: str,
          pos: Optional[Tuple[int, int]] = None):
    line, col = pos if pos else (0, 0)
    diags.append(Diagnostic(severity, message, line, col))


def _lit_value(t: Term) -> Optional[float]:
    if isinstance(t, (IntLit, FloatLit)):
        return t.value
    return None


def _check_dist_literals(dist, diags: List[Diagnostic], pos):
    if isinstance(dist, Gaussian):
        v = _lit_value(dist.variance)
        if v is not None and v <= 0:
            _diag(diags, "error", f"gaussian variance must be positive, got {v}", pos)
    elif isinstance(dist, Poisson):
        r = _lit_value(dist.rate)
        if r is not None and r <= 0:
            _diag(diags, "error", f"poisson rate must be positive, got {r}", pos)
    elif isinstance(dist, UniformCont):
        lo, hi = _lit_value(dist.lo), _lit_value(dist.hi)
        if lo is not None and hi is not None and not lo < hi:
            _diag(diags, "error", f"uniform bounds must satisfy lo < hi, got {lo}, {hi}", pos)
    elif isinstance(dist, Discrete):
        weights = [_lit_value(w) for _, w in dist.items]
        if any(w is not None and w < 0 for w in weights):
            _diag(diags, "error", "discrete weights must be non-negative", pos)
        if all(w is not None for w in weights):
            total = sum(weights)
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                _diag(diags, "error",
                      f"discrete weights must sum to 1, got {total!r}", pos)


def _clause_bound_vars(clause: Clause, temporal_head: bool) -> Set[str]:
    bound: Set[str] = set()
    for lit in clause.body:
        if isinstance(lit, AtomLit) and not lit.negated:
            key = pred_key(lit.atom)
            if key == ("between", 3):
                x = lit.atom.args[2]
                if isinstance(x, Var):
                    bound.add(x.name)
            else:
                bound |= term_vars(lit.atom)
    if temporal_head and isinstance(clause.head, Compound):
        tf = time_form(clause.head.args[-1])
        if tf is not None and tf.var is not None:
            bound.add(tf.var)
    return bound


def _check_clause_scope(clause: Clause, info: ProgramInfo,
                        diags: List[Diagnostic]):
    hk = pred_key(clause.head)
    temporal_head = hk is not None and info.is_temporal(hk)
    bound = _clause_bound_vars(clause, temporal_head)
    where = print_term(clause.head)

    for v in sorted(term_vars(clause.head) - bound):
        _diag(diags, "error",
              f"variable {v} in head {where} is not bound by a positive "
              "body literal", clause.pos)
    for lit in clause.body:
        if isinstance(lit, CmpLit):
            free = (term_vars(lit.lhs) | term_vars(lit.rhs)) - bound
            for v in sorted(free):
                _diag(diags, "error",
                      f"variable {v} in comparison is not bound by a "
                      f"positive body literal (clause {where})", clause.pos)
        elif lit.negated:
            for v in sorted(term_vars(lit.atom) - bound):
                _diag(diags, "error",
                      f"variable {v} in negated literal is not bound by a "
                      f"positive body literal (clause {where})", clause.pos)
        elif pred_key(lit.atom) == ("between", 3):
            lo, hi, _ = lit.atom.args
            for v in sorted((term_vars(lo) | term_vars(hi)) - bound):
                _diag(diags, "error",
                      f"variable {v} in between/3 bounds is not bound by a "
                      f"positive body literal (clause {where})", clause.pos)
    if isinstance(clause, DistClause):
        for p in dist_param_terms(clause.dist):
            for v in sorted(term_vars(p) - bound):
                _diag(diags, "error",
                      f"variable {v} in distribution parameters is not bound "
                      f"by a positive body literal (clause {where})", clause.pos)
        _check_dist_literals(clause.dist, diags, clause.pos)


def _check_reserved_heads(clause: Clause, diags: List[Diagnostic]):
    hk = pred_key(clause.head)
    if hk is None:
        _diag(diags, "error",
              f"clause head {print_term(clause.head)} is not an atom",
              clause.pos)
        return
    name, arity = hk
    if name == "between":
        _diag(diags, "error", "between/3 is a builtin and cannot be redefined",
              clause.pos)
    expected = RESERVED_PREDICATES.get(name)
    if expected is not None:
        if arity != expected:
            _diag(diags, "error",
                  f"{name} is reserved with arity {expected}, "
                  f"got {name}/{arity}", clause.pos)
        elif isinstance(clause, DistClause):
            _diag(diags, "error",
                  f"{name}/{expected} is reserved for atoms and cannot name "
                  "a random variable", clause.pos)


def _atom_usage_keys(clauses) -> Dict[Tuple[str, int], Optional[Tuple[int, int]]]:
    used: Dict[Tuple[str, int], Optional[Tuple[int, int]]] = {}
    for c in clauses:
        if not isinstance(c, DistClause):
            hk = pred_key(c.head)
            if hk is not None:
                used.setdefault(hk, c.pos)
        for lit in c.body:
            if isinstance(lit, AtomLit):
                k = pred_key(lit.atom)
                if k is not None and k != ("between", 3):
                    used.setdefault(k, c.pos)
    return used


def _check_clauses(program: Program, info: ProgramInfo,
                   diags: List[Diagnostic]):
    for c in program.clauses:
        _check_reserved_heads(c, diags)
        _check_clause_scope(c, info, diags)

    used_as_atom = _atom_usage_keys(program.clauses)
    for key in sorted(info.dist_heads):
        if key in used_as_atom:
            _diag(diags, "error",
                  f"{key[0]}/{key[1]} is defined as a random variable but "
                  "also used as an atom", used_as_atom[key])

    arities: Dict[str, Set[int]] = {}
    for (name, arity) in list(used_as_atom) + list(info.dist_heads):
        arities.setdefault(name, set()).add(arity)
    for name in sorted(arities):
        if len(arities[name]) > 1 and name not in RESERVED_PREDICATES:
            lst = ", ".join(str(a) for a in sorted(arities[name]))
            _diag(diags, "warning",
                  f"predicate {name} is used with multiple arities: {lst}")


# ---------------------------------------------------------------------------
# Action theory
# ---------------------------------------------------------------------------


def _pattern_ok(t: Term) -> bool:
    if isinstance(t, Const):
        return True
    if not isinstance(t, Compound) or t.functor in ("+", "-", "*"):
        return False
    return all(isinstance(a, (Var, Const, IntLit, FloatLit)) for a in t.args)


def _check_theory(theory: ActionTheory, diags: List[Diagnostic]):
    fluents: Dict[Tuple[str, int], str] = {}
    for f in theory.fluents:
        key = (f.name, f.arity)
        if key in fluents:
            _diag(diags, "error", f"duplicate fluent declaration {f.name}/{f.arity}")
        fluents[key] = f.sort

    for ssa in theory.ssas:
        fk = pred_key(ssa.fluent)
        if fk is None or not _pattern_ok(ssa.fluent):
            _diag(diags, "error",
                  f"ssa header {print_term(ssa.fluent)} is not a fluent pattern",
                  ssa.pos)
            continue
        if fk not in fluents:
            _diag(diags, "error",
                  f"ssa for undeclared fluent {fk[0]}/{fk[1]}", ssa.pos)
        head_vars = term_vars(ssa.fluent)
        for case in ssa.cases:
            if not _pattern_ok(case.action):
                _diag(diags, "error",
                      f"action pattern {print_term(case.action)} in ssa "
                      f"{fk[0]}/{fk[1]} is not an atom", ssa.pos)
                continue
            allowed = head_vars | term_vars(case.action)
            for v in sorted(term_vars(case.effect) - allowed):
                _diag(diags, "error",
                      f"variable {v} in effect for {fk[0]}/{fk[1]} is bound by "
                      "neither the fluent nor the action pattern", ssa.pos)

    liks: Dict[Tuple[str, int], LikelihoodModel] = {}
    for lik in theory.likelihoods:
        ak = pred_key(lik.action)
        if ak is None or not _pattern_ok(lik.action):
            _diag(diags, "error",
                  f"likelihood pattern {print_term(lik.action)} is not an atom",
                  lik.pos)
            continue
        if ak in liks:
            _diag(diags, "error",
                  f"duplicate likelihood for {ak[0]}/{ak[1]}", lik.pos)
        liks[ak] = lik
        pat_vars = term_vars(lik.action)
        if lik.actual not in pat_vars:
            _diag(diags, "error",
                  f"likelihood actual variable {lik.actual} does not appear "
                  f"in the pattern {print_term(lik.action)}", lik.pos)
        for p in dist_param_terms(lik.dist):
            for v in sorted(term_vars(p) - pat_vars):
                _diag(diags, "error",
                      f"variable {v} in likelihood parameters for "
                      f"{ak[0]}/{ak[1]} is not in the action pattern", lik.pos)
        _check_dist_literals(lik.dist, diags, lik.pos)

    seen_noisy: Set[Tuple[str, int]] = set()
    for nd in theory.noisy:
        key = (nd.name, nd.arity)
        if key in seen_noisy:
            _diag(diags, "error", f"duplicate noisy declaration for {nd.name}/{nd.arity}",
                  nd.pos)
        seen_noisy.add(key)
        for label, idx in (("intended", nd.intended), ("actual", nd.actual)):
            if not 1 <= idx <= nd.arity:
                _diag(diags, "error",
                      f"noisy {nd.name}/{nd.arity}: {label} index {idx} is out "
                      f"of range", nd.pos)
        if nd.intended == nd.actual:
            _diag(diags, "error",
                  f"noisy {nd.name}/{nd.arity}: intended and actual must be "
                  "distinct arguments", nd.pos)
        lik = liks.get(key)
        if lik is None:
            _diag(diags, "error",
                  f"noisy action {nd.name}/{nd.arity} has no likelihood model",
                  nd.pos)
        elif 1 <= nd.actual <= nd.arity and isinstance(lik.action, Compound):
            arg = lik.action.args[nd.actual - 1]
            if not (isinstance(arg, Var) and arg.name == lik.actual):
                _diag(diags, "error",
                      f"likelihood for {nd.name}/{nd.arity} ranges over "
                      f"{lik.actual}, but the noisy declaration marks argument "
                      f"{nd.actual} as actual", lik.pos)

    seen_dom: Set[str] = set()
    for c in theory.domain:
        if c.name in seen_dom:
            _diag(diags, "warning", f"duplicate domain element {c.name}")
        seen_dom.add(c.name)

    for spec in theory.priors:
        for c in spec.clauses:
            hk = pred_key(c.head)
            if hk is None:
                _diag(diags, "error",
                      f"prior head {print_term(c.head)} is not an atom", c.pos)
                continue
            if hk not in fluents:
                _diag(diags, "error",
                      f"prior clause head {hk[0]}/{hk[1]} is not a declared "
                      "fluent", c.pos)
            if isinstance(c, DistClause):
                _check_dist_literals(c.dist, diags, c.pos)
            for v in sorted(term_vars(c.head)):
                _diag(diags, "error",
                      f"prior clause head {print_term(c.head)} must be ground "
                      f"(variable {v})", c.pos)


# ---------------------------------------------------------------------------
# Control programs
# ---------------------------------------------------------------------------


def _formula_free_vars(f: Formula, bound: Set[str]) -> Set[str]:
    if isinstance(f, (TrueF, FalseF)):
        return set()
    if isinstance(f, AtomF):
        return term_vars(f.atom) - bound
    if isinstance(f, CmpF):
        return (term_vars(f.lhs) | term_vars(f.rhs)) - bound
    if isinstance(f, NotF):
        return _formula_free_vars(f.body, bound)
    if isinstance(f, (AndF, OrF)):
        out: Set[str] = set()
        for item in f.items:
            out |= _formula_free_vars(item, bound)
        return out
    if isinstance(f, (ExistsF, ForallF)):
        return _formula_free_vars(f.body, bound | {f.var})
    raise TypeError(f"not a formula: {f!r}")


def _formula_has_quantifier(f: Formula) -> bool:
    if isinstance(f, (ExistsF, ForallF)):
        return True
    if isinstance(f, NotF):
        return _formula_has_quantifier(f.body)
    if isinstance(f, (AndF, OrF)):
        return any(_formula_has_quantifier(i) for i in f.items)
    return False


def _check_control(prog: ProgramExpr, theory: Optional[ActionTheory],
                   diags: List[Diagnostic]):
    if theory is None:
        _diag(diags, "error",
              "a control program requires an action theory section")
        return
    has_domain = bool(theory.domain)

    def check_formula(f: Formula, bound: Set[str], where: str):
        for v in sorted(_formula_free_vars(f, bound)):
            _diag(diags, "error",
                  f"variable {v} in {where} is not bound by pick or a "
                  "quantifier")
        if _formula_has_quantifier(f) and not has_domain:
            _diag(diags, "error",
                  f"quantifier in {where} requires a declared domain")

    def walk(p: ProgramExpr, bound: Set[str]):
        if isinstance(p, Prim):
            if isinstance(p.action, Var):
                if p.action.name not in bound:
                    _diag(diags, "error",
                          f"action variable {p.action.name} is not bound by pick")
                return
            if not isinstance(p.action, (Const, Compound)):
                _diag(diags, "error",
                      f"{print_term(p.action)} cannot be used as an action")
                return
            for v in sorted(term_vars(p.action) - bound):
                _diag(diags, "error",
                      f"action argument variable {v} is not bound by pick")
        elif isinstance(p, Test):
            check_formula(p.formula, bound, "a test")
        elif isinstance(p, (Seq, Choice)):
            walk(p.left, bound)
            walk(p.right, bound)
        elif isinstance(p, Pick):
            if not has_domain:
                _diag(diags, "error", "pick requires a non-empty domain")
            if p.var in bound:
                _diag(diags, "error",
                      f"pick variable {p.var} shadows an enclosing pick")
            walk(p.body, bound | {p.var})
        elif isinstance(p, Star):
            walk(p.body, bound)
        elif isinstance(p, While):
            check_formula(p.formula, bound, "a while condition")
            walk(p.body, bound)
        elif isinstance(p, If):
            check_formula(p.formula, bound, "an if condition")
            walk(p.then, bound)
            walk(p.els, bound)
        else:
            raise TypeError(f"not a program expression: {p!r}")

    walk(prog, set())


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def validate(program: Program) -> Tuple[ProgramInfo, List[Diagnostic]]:
    """Analyze and check a program; returns (analysis info, diagnostics)."""
    info = analyze(program)
    diags: List[Diagnostic] = []
    for severity, message, pos in info.problems:
        _diag(diags, severity, message, pos)
    _check_clauses(program, info, diags)
    if program.theory is not None:
        _check_theory(program.theory, diags)
    if program.control is not None:
        _check_control(program.control, program.theory, diags)
    return info, diags


def validated_info(program: Program) -> ProgramInfo:
    """Validate and return analysis info; raise ValidationError on errors."""
    info, diags = validate(program)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ValidationError(errors)
    return info
