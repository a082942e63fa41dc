"""Pretty-printer. parse_program(pretty_print(p)) reproduces p structurally."""

from __future__ import annotations

from .ast import (
    ARITH_FUNCTORS,
    ActionTheory,
    AndF,
    AtomF,
    AtomLit,
    Choice,
    Clause,
    CmpF,
    CmpLit,
    Compound,
    Const,
    Delta,
    Discrete,
    DistributionSpec,
    EvalTerm,
    ExistsF,
    FalseF,
    FloatLit,
    ForallF,
    Formula,
    Gaussian,
    If,
    IntLit,
    LikelihoodModel,
    Literal,
    NoisyDecl,
    NotF,
    OrF,
    Pick,
    Poisson,
    Prim,
    PriorSpec,
    ProbFact,
    Program,
    ProgramExpr,
    Rule,
    SSA,
    Seq,
    Star,
    Term,
    Test,
    TrueF,
    UniformCont,
    Var,
    While,
)

# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


def print_term(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, FloatLit):
        return repr(t.value)
    if isinstance(t, EvalTerm):
        return f"~=({print_term(t.inner)})"
    if isinstance(t, Compound):
        if t.functor in ARITH_FUNCTORS:
            l, r = t.args
            return f"({print_term(l)} {t.functor} {print_term(r)})"
        return f"{t.functor}({', '.join(print_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def print_dist(d: DistributionSpec) -> str:
    if isinstance(d, Gaussian):
        return f"gaussian({print_term(d.mean)}, {print_term(d.variance)})"
    if isinstance(d, Poisson):
        return f"poisson({print_term(d.rate)})"
    if isinstance(d, UniformCont):
        return f"uniform({print_term(d.lo)}, {print_term(d.hi)})"
    if isinstance(d, Delta):
        return f"delta({print_term(d.value)})"
    if isinstance(d, Discrete):
        items = ", ".join(f"{print_term(v)}: {print_term(w)}" for v, w in d.items)
        return f"discrete({items})"
    raise TypeError(f"not a distribution: {d!r}")


# ---------------------------------------------------------------------------
# Clauses
# ---------------------------------------------------------------------------


def print_literal(lit: Literal) -> str:
    neg = "not " if lit.negated else ""
    if isinstance(lit, AtomLit):
        return neg + print_term(lit.atom)
    return f"{neg}{print_term(lit.lhs)} {lit.op} {print_term(lit.rhs)}"


def print_clause(c: Clause) -> str:
    if isinstance(c, ProbFact):
        head = f"{repr(c.prob)}::{print_term(c.head)}"
    elif isinstance(c, Rule):
        head = print_term(c.head)
    else:
        head = f"{print_term(c.head)} ~ {print_dist(c.dist)}"
    if c.body:
        body = ", ".join(print_literal(l) for l in c.body)
        return f"{head} <- {body}."
    return f"{head}."


# ---------------------------------------------------------------------------
# Formulas. Levels: quantifier 0, or 1, and 2, not 3, primary 4.
# A node is parenthesized when its level is below the context's minimum.
# ---------------------------------------------------------------------------


def _formula_level(f: Formula) -> int:
    if isinstance(f, (ExistsF, ForallF)):
        return 0
    if isinstance(f, OrF):
        return 1
    if isinstance(f, AndF):
        return 2
    if isinstance(f, NotF):
        return 3
    return 4


def print_formula(f: Formula, min_level: int = 0) -> str:
    s = _formula_str(f)
    if _formula_level(f) < min_level:
        return f"({s})"
    return s


def _formula_str(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, AtomF):
        return print_term(f.atom)
    if isinstance(f, CmpF):
        return f"{print_term(f.lhs)} {f.op} {print_term(f.rhs)}"
    if isinstance(f, NotF):
        return f"not {print_formula(f.body, 4)}"
    if isinstance(f, AndF):
        return ", ".join(print_formula(x, 3) for x in f.items)
    if isinstance(f, OrF):
        return "; ".join(print_formula(x, 2) for x in f.items)
    if isinstance(f, ExistsF):
        return f"exists {f.var} {print_formula(f.body, 0)}"
    if isinstance(f, ForallF):
        return f"forall {f.var} {print_formula(f.body, 0)}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Control programs. Levels: pick 0, choice 1, seq 2, basic 3, delimited 4.
# ---------------------------------------------------------------------------


def _prog_level(e: ProgramExpr) -> int:
    if isinstance(e, Pick):
        return 0
    if isinstance(e, Choice):
        return 1
    if isinstance(e, Seq):
        return 2
    if isinstance(e, (Prim, While, If)):
        return 3
    return 4  # Test, Star


def print_progexpr(e: ProgramExpr, min_level: int = 0) -> str:
    s = _prog_str(e)
    if _prog_level(e) < min_level:
        return f"({s})"
    return s


def _prog_str(e: ProgramExpr) -> str:
    if isinstance(e, Prim):
        return f"prim {print_term(e.action)}"
    if isinstance(e, Test):
        return f"?({print_formula(e.formula, 0)})"
    if isinstance(e, Seq):
        return f"{print_progexpr(e.left, 2)}; {print_progexpr(e.right, 3)}"
    if isinstance(e, Choice):
        return f"{print_progexpr(e.left, 1)} | {print_progexpr(e.right, 2)}"
    if isinstance(e, Pick):
        return f"pick {e.var} . {print_progexpr(e.body, 0)}"
    if isinstance(e, Star):
        return f"star({print_progexpr(e.body, 0)})"
    if isinstance(e, While):
        return f"while ({print_formula(e.formula, 0)}) {print_progexpr(e.body, 3)}"
    if isinstance(e, If):
        return (
            f"if ({print_formula(e.formula, 0)}) {print_progexpr(e.then, 3)} "
            f"else {print_progexpr(e.els, 3)}"
        )
    raise TypeError(f"not a program expression: {e!r}")


# ---------------------------------------------------------------------------
# Action theory and whole programs
# ---------------------------------------------------------------------------


def print_ssa(ssa: SSA) -> str:
    cases = " ".join(
        f"{print_term(c.action)} => {print_term(c.effect)};" for c in ssa.cases
    )
    inner = f" {cases} " if cases else " "
    return f"ssa {print_term(ssa.fluent)} {{{inner}}}"


def print_likelihood(lm: LikelihoodModel) -> str:
    d = lm.dist
    if isinstance(d, Gaussian):
        params = f"{print_term(d.mean)}, {print_term(d.variance)}"
        name = "gaussian"
    elif isinstance(d, Poisson):
        params = print_term(d.rate)
        name = "poisson"
    elif isinstance(d, UniformCont):
        params = f"{print_term(d.lo)}, {print_term(d.hi)}"
        name = "uniform"
    elif isinstance(d, Delta):
        params = print_term(d.value)
        name = "delta"
    else:
        params = ", ".join(
            f"{print_term(v)}: {print_term(w)}" for v, w in d.items
        )
        name = "discrete"
    return f"likelihood {print_term(lm.action)} : {name}({lm.actual}; {params})."


def print_theory(theory: ActionTheory) -> str:
    lines = ["#actions"]
    for fl in theory.fluents:
        lines.append(f"fluent {fl.name}/{fl.arity} : {fl.sort}.")
    for ssa in theory.ssas:
        lines.append(print_ssa(ssa))
    for lm in theory.likelihoods:
        lines.append(print_likelihood(lm))
    for nd in theory.noisy:
        lines.append(
            f"noisy {nd.name}/{nd.arity} intended={nd.intended} actual={nd.actual}."
        )
    if theory.domain:
        lines.append(f"domain {{{', '.join(c.name for c in theory.domain)}}}.")
    for spec in theory.priors:
        lines.append(print_prior(spec))
    return "\n".join(lines)


def print_prior(spec: PriorSpec) -> str:
    if not spec.clauses:
        return "prior { }"
    inner = "\n".join("  " + print_clause(c) for c in spec.clauses)
    return "prior {\n" + inner + "\n}"


def pretty_print(program: Program) -> str:
    parts = []
    if program.clauses:
        parts.append("#clauses\n" + "\n".join(print_clause(c) for c in program.clauses))
    if program.theory is not None:
        parts.append(print_theory(program.theory))
    if program.control is not None:
        parts.append("#control\n" + print_progexpr(program.control, 0) + ".")
    if not parts:
        return ""
    return "\n\n".join(parts) + "\n"
