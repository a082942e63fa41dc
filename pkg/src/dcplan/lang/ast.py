"""AST for the .dcl language: terms, clauses, action theories, control programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class IntLit:
    value: int

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class FloatLit:
    value: float

    def __repr__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __repr__(self):
        return f"{self.functor}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class EvalTerm:
    """Reference to a random variable's drawn value, spelled ~=(rv)."""

    inner: "Term"

    def __repr__(self):
        return f"~=({self.inner!r})"


Term = Union[Var, Const, IntLit, FloatLit, Compound, EvalTerm]

# Functors reserved for in-term arithmetic; rendered infix by the printer.
ARITH_FUNCTORS = ("+", "-", "*")


def is_numeric_lit(t: Term) -> bool:
    return isinstance(t, (IntLit, FloatLit))


def term_vars(t: Term) -> set:
    """All variable names occurring in a term."""
    out = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Var):
            out.add(cur.name)
        elif isinstance(cur, Compound):
            stack.extend(cur.args)
        elif isinstance(cur, EvalTerm):
            stack.append(cur.inner)
    return out


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    mean: Term
    variance: Term


@dataclass(frozen=True)
class Poisson:
    rate: Term


@dataclass(frozen=True)
class UniformCont:
    lo: Term
    hi: Term


@dataclass(frozen=True)
class Discrete:
    # (value, weight) pairs; weights must be >= 0 and sum to 1 when ground.
    items: Tuple[Tuple[Term, Term], ...]


@dataclass(frozen=True)
class Delta:
    value: Term


DistributionSpec = Union[Gaussian, Poisson, UniformCont, Discrete, Delta]


def dist_param_terms(dist: DistributionSpec) -> Tuple[Term, ...]:
    if isinstance(dist, Gaussian):
        return (dist.mean, dist.variance)
    if isinstance(dist, Poisson):
        return (dist.rate,)
    if isinstance(dist, UniformCont):
        return (dist.lo, dist.hi)
    if isinstance(dist, Discrete):
        return tuple(t for pair in dist.items for t in pair)
    if isinstance(dist, Delta):
        return (dist.value,)
    raise TypeError(f"not a distribution: {dist!r}")


# ---------------------------------------------------------------------------
# Clause bodies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomLit:
    atom: Term
    negated: bool = False


@dataclass(frozen=True)
class CmpLit:
    op: str  # one of < > <= >= == !=
    lhs: Term
    rhs: Term
    negated: bool = False


Literal = Union[AtomLit, CmpLit]

# ---------------------------------------------------------------------------
# Clauses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    head: Term
    body: Tuple[Literal, ...] = ()
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class ProbFact:
    prob: float
    head: Term
    body: Tuple[Literal, ...] = ()
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class DistClause:
    head: Term
    dist: DistributionSpec
    body: Tuple[Literal, ...] = ()
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


Clause = Union[Rule, ProbFact, DistClause]

# ---------------------------------------------------------------------------
# Formulas (queries, tests, quantified goals)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class AtomF:
    atom: Term


@dataclass(frozen=True)
class CmpF:
    op: str
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class NotF:
    body: "Formula"


@dataclass(frozen=True)
class AndF:
    items: Tuple["Formula", ...]


@dataclass(frozen=True)
class OrF:
    items: Tuple["Formula", ...]


@dataclass(frozen=True)
class ExistsF:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ForallF:
    var: str
    body: "Formula"


Formula = Union[TrueF, FalseF, AtomF, CmpF, NotF, AndF, OrF, ExistsF, ForallF]

# ---------------------------------------------------------------------------
# Action theory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FluentDecl:
    name: str
    arity: int
    sort: str  # real | int | bool


@dataclass(frozen=True)
class SSACase:
    action: Term  # action pattern, shares variables with the fluent pattern
    effect: Term  # expression giving the fluent's next value


@dataclass(frozen=True)
class SSA:
    fluent: Term  # fluent pattern, e.g. pos(X)
    cases: Tuple[SSACase, ...]
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class LikelihoodModel:
    action: Term  # full action pattern including the actual argument
    actual: str  # variable in the pattern that the density ranges over
    dist: DistributionSpec
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class NoisyDecl:
    name: str
    arity: int  # arity of the full action term, actual included
    intended: int  # 1-based argument positions
    actual: int
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class PriorSpec:
    clauses: Tuple[Clause, ...]


@dataclass(frozen=True)
class ActionTheory:
    fluents: Tuple[FluentDecl, ...] = ()
    ssas: Tuple[SSA, ...] = ()
    likelihoods: Tuple[LikelihoodModel, ...] = ()
    noisy: Tuple[NoisyDecl, ...] = ()
    domain: Tuple[Const, ...] = ()
    priors: Tuple[PriorSpec, ...] = ()


# ---------------------------------------------------------------------------
# Control programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prim:
    action: Term


@dataclass(frozen=True)
class Test:
    formula: Formula


@dataclass(frozen=True)
class Seq:
    left: "ProgramExpr"
    right: "ProgramExpr"


@dataclass(frozen=True)
class Choice:
    left: "ProgramExpr"
    right: "ProgramExpr"


@dataclass(frozen=True)
class Pick:
    var: str
    body: "ProgramExpr"


@dataclass(frozen=True)
class Star:
    body: "ProgramExpr"


@dataclass(frozen=True)
class While:
    formula: Formula
    body: "ProgramExpr"


@dataclass(frozen=True)
class If:
    formula: Formula
    then: "ProgramExpr"
    els: "ProgramExpr"


ProgramExpr = Union[Prim, Test, Seq, Choice, Pick, Star, While, If]

# ---------------------------------------------------------------------------
# Whole program
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Program:
    clauses: Tuple[Clause, ...] = ()
    theory: Optional[ActionTheory] = None
    control: Optional[ProgramExpr] = None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


# Words with grammatical meaning; not usable as constants or functors.
RESERVED_WORDS = frozenset(
    {
        "not", "true", "false", "exists", "forall",
        "prim", "pick", "star", "while", "if", "else",
        "fluent", "ssa", "likelihood", "noisy", "domain", "prior",
        "gaussian", "poisson", "uniform", "discrete", "delta",
    }
)

# Reserved predicates: name -> required arity (the final argument is time).
RESERVED_PREDICATES = {"poss": 2, "reward": 2}
