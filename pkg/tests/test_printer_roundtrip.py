"""Printer round trip: parse(pretty_print(ast)) reproduces the ast.

The generator below builds random programs from a fixed palette of names
and literals, covering every AST node kind: terms (variables, constants,
integer and float literals, arithmetic, eval references), all five
distribution families, the three clause forms, full action theories, and
every control construct. Structural equality ignores source positions,
so the comparison is exact.
"""

import random

from dcplan import parse_program, pretty_print
from dcplan.lang.ast import (
    ActionTheory,
    AndF,
    AtomF,
    AtomLit,
    Choice,
    CmpF,
    CmpLit,
    Compound,
    Const,
    Delta,
    Discrete,
    DistClause,
    EvalTerm,
    ExistsF,
    FalseF,
    FloatLit,
    FluentDecl,
    ForallF,
    Gaussian,
    If,
    IntLit,
    LikelihoodModel,
    NoisyDecl,
    NotF,
    OrF,
    Pick,
    Poisson,
    Prim,
    PriorSpec,
    ProbFact,
    Program,
    Rule,
    SSA,
    SSACase,
    Seq,
    Star,
    Test,
    TrueF,
    UniformCont,
    Var,
    While,
)

NAMES = ["aa", "bb", "cc", "dd", "ee", "ff"]
VARS = ["X", "Y", "Z", "W"]
FLOATS = [0.1, 0.25, 0.5, 0.75, 0.9, 1.5, 2.0]
CMP_OPS = ["<", ">", "<=", ">=", "==", "!="]


def gen_term(r: random.Random, depth: int):
    kinds = ["var", "const", "int", "float"]
    if depth > 0:
        kinds += ["compound", "arith", "eval"]
    k = r.choice(kinds)
    if k == "var":
        return Var(r.choice(VARS))
    if k == "const":
        return Const(r.choice(NAMES))
    if k == "int":
        return IntLit(r.randrange(0, 10))
    if k == "float":
        return FloatLit(r.choice(FLOATS))
    if k == "eval":
        return EvalTerm(gen_term(r, 0))
    if k == "arith":
        op = r.choice(["+", "-", "*"])
        return Compound(op, (gen_term(r, depth - 1), gen_term(r, depth - 1)))
    args = tuple(gen_term(r, depth - 1) for _ in range(r.randrange(1, 4)))
    return Compound(r.choice(NAMES), args)


def gen_atom(r: random.Random, depth: int = 1):
    if r.random() < 0.15:
        return Const(r.choice(NAMES))
    args = tuple(gen_term(r, depth) for _ in range(r.randrange(1, 4)))
    return Compound(r.choice(NAMES), args)


def gen_dist(r: random.Random):
    k = r.choice(["gaussian", "poisson", "uniform", "discrete", "delta"])
    if k == "gaussian":
        return Gaussian(gen_term(r, 1), gen_term(r, 0))
    if k == "poisson":
        return Poisson(gen_term(r, 0))
    if k == "uniform":
        return UniformCont(gen_term(r, 0), gen_term(r, 0))
    if k == "delta":
        return Delta(gen_term(r, 1))
    items = tuple(
        (gen_term(r, 0), FloatLit(r.choice(FLOATS)))
        for _ in range(r.randrange(1, 4))
    )
    return Discrete(items)


def gen_literal(r: random.Random):
    negated = r.random() < 0.3
    if r.random() < 0.3:
        return CmpLit(r.choice(CMP_OPS), gen_term(r, 1), gen_term(r, 1), negated)
    return AtomLit(gen_atom(r), negated)


def gen_clause(r: random.Random):
    body = tuple(gen_literal(r) for _ in range(r.randrange(0, 4)))
    k = r.random()
    if k < 0.4:
        return Rule(gen_atom(r), body)
    if k < 0.7:
        return ProbFact(r.choice(FLOATS[:5]), gen_atom(r), body)
    return DistClause(gen_atom(r), gen_dist(r), body)


def gen_formula(r: random.Random, depth: int):
    kinds = ["true", "false", "atom", "cmp"]
    if depth > 0:
        kinds += ["not", "and", "or", "exists", "forall"]
    k = r.choice(kinds)
    if k == "true":
        return TrueF()
    if k == "false":
        return FalseF()
    if k == "atom":
        return AtomF(gen_atom(r))
    if k == "cmp":
        return CmpF(r.choice(CMP_OPS), gen_term(r, 1), gen_term(r, 1))
    if k == "not":
        return NotF(gen_formula(r, depth - 1))
    if k in ("and", "or"):
        items = tuple(
            gen_formula(r, depth - 1) for _ in range(r.randrange(2, 4))
        )
        return AndF(items) if k == "and" else OrF(items)
    body = gen_formula(r, depth - 1)
    return ExistsF(r.choice(VARS), body) if k == "exists" else ForallF(
        r.choice(VARS), body
    )


def gen_progexpr(r: random.Random, depth: int):
    kinds = ["prim", "test"]
    if depth > 0:
        kinds += ["seq", "choice", "pick", "star", "while", "if"]
    k = r.choice(kinds)
    if k == "prim":
        return Prim(gen_atom(r))
    if k == "test":
        return Test(gen_formula(r, 1))
    if k == "seq":
        return Seq(gen_progexpr(r, depth - 1), gen_progexpr(r, depth - 1))
    if k == "choice":
        return Choice(gen_progexpr(r, depth - 1), gen_progexpr(r, depth - 1))
    if k == "pick":
        return Pick(r.choice(VARS), gen_progexpr(r, depth - 1))
    if k == "star":
        return Star(gen_progexpr(r, depth - 1))
    if k == "while":
        return While(gen_formula(r, 1), gen_progexpr(r, depth - 1))
    return If(
        gen_formula(r, 1),
        gen_progexpr(r, depth - 1),
        gen_progexpr(r, depth - 1),
    )


def gen_theory(r: random.Random):
    fluent_names = r.sample(NAMES, r.randrange(1, 3))
    fluents = tuple(
        FluentDecl(n, r.randrange(0, 3), r.choice(["real", "int", "bool"]))
        for n in fluent_names
    )
    ssas = []
    for fl in fluents:
        if r.random() < 0.7:
            pattern = (
                Const(fl.name)
                if fl.arity == 0
                else Compound(fl.name, tuple(Var(v) for v in VARS[: fl.arity]))
            )
            cases = tuple(
                SSACase(gen_atom(r), gen_term(r, 1))
                for _ in range(r.randrange(0, 3))
            )
            ssas.append(SSA(pattern, cases))
    likelihoods = []
    if r.random() < 0.6:
        actual = r.choice(VARS)
        pattern = Compound(r.choice(NAMES), (Var("W"), Var(actual)))
        if actual != "W":
            likelihoods.append(LikelihoodModel(pattern, actual, gen_dist(r)))
    noisy = []
    if r.random() < 0.5:
        noisy.append(NoisyDecl(r.choice(NAMES), 2, 1, 2))
    domain = tuple(Const(n) for n in r.sample(NAMES, r.randrange(0, 3)))
    priors = tuple(
        PriorSpec(tuple(gen_clause(r) for _ in range(r.randrange(1, 3))))
        for _ in range(r.randrange(0, 3))
    )
    return ActionTheory(fluents, tuple(ssas), tuple(likelihoods), tuple(noisy),
                        domain, priors)


def gen_program(r: random.Random):
    clauses = tuple(gen_clause(r) for _ in range(r.randrange(0, 5)))
    theory = gen_theory(r) if r.random() < 0.5 else None
    control = (
        gen_progexpr(r, r.randrange(1, 4))
        if theory is not None and r.random() < 0.6
        else None
    )
    return Program(clauses, theory, control)


def test_thousand_fuzzed_programs_round_trip():
    failures = []
    for i in range(1000):
        r = random.Random(90_000 + i)
        original = gen_program(r)
        text = pretty_print(original)
        res = parse_program(text)
        if not res.ok:
            failures.append((i, [str(d) for d in res.diagnostics], text))
        elif res.program != original:
            failures.append((i, "mismatch", text))
        if len(failures) >= 3:
            break
    assert not failures, failures[:3]


def test_scenario_files_round_trip(scenario):
    for name in (
        "line_det.dcl",
        "line_stoch.dcl",
        "kalman.dcl",
        "family.dcl",
        "clear_table.dcl",
        "line4.dcl",
        "table.dcl",
        "table_exists.dcl",
        "urn.dcl",
    ):
        first = parse_program(scenario(name))
        assert first.ok, name
        text = pretty_print(first.program)
        second = parse_program(text)
        assert second.ok, (name, [str(d) for d in second.diagnostics])
        assert second.program == first.program, name
