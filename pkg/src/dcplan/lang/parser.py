"""Recursive-descent parser for .dcl programs.

Grammar summary (sections default to #clauses):

  clause   := NUMBER '::' atom ('<-' body)? '.'
            | atom '~' dist ('<-' body)? '.'
            | atom ('<-' body)? '.'
  body     := literal (',' literal)*
  literal  := 'not'? (atom | term CMP term)
  dist     := gaussian(T, T) | poisson(T) | uniform(T, T)
            | discrete(T: T, ...) | delta(T)
  term     := additive over '+' '-' '*' with '(...)' grouping,
              '~=(rv)' eval terms, variables, constants, numbers

  action declarations: fluent f/N : sort.   ssa f(X) { act => effect; ... }
            likelihood act : dist(Actual; params).
            noisy name/N intended=I actual=J.   domain {c1, ...}.
            prior { clauses }

  control  := choice ('|' choice)*, sequence ';', 'prim' term,
              '?(formula)', 'pick X . body', 'star(body)',
              'while (formula) body', 'if (formula) body else body'

  formula  := 'exists'/'forall' V body | or-list ';' | and-list ','
              | 'not' f | term CMP term | atom | true | false | (f)

'pick' and quantifier bodies extend to the end of the enclosing group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

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
    Diagnostic,
    Discrete,
    DistClause,
    DistributionSpec,
    EvalTerm,
    ExistsF,
    FalseF,
    FloatLit,
    FluentDecl,
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
    RESERVED_WORDS,
    Rule,
    SSA,
    SSACase,
    Seq,
    Star,
    Term,
    Test,
    TrueF,
    UniformCont,
    Var,
    While,
)
from .lexer import LexError, Token, TokenType, tokenize


class ParseError(Exception):
    def __init__(self, message: str, token: Token):
        super().__init__(f"at line {token.line}, col {token.col}: {message}")
        self.message = message
        self.token = token


class _Reparse(Exception):
    """Internal: a parenthesized formula needs re-reading as a term."""


@dataclass
class ParseResult:
    program: Optional[Program]
    diagnostics: List[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.program is not None


_CMP_TOKENS = {
    TokenType.LT: "<",
    TokenType.GT: ">",
    TokenType.LE: "<=",
    TokenType.GE: ">=",
    TokenType.EQEQ: "==",
    TokenType.NEQ: "!=",
}

_DIST_NAMES = ("gaussian", "poisson", "uniform", "discrete", "delta")

_ACTION_KEYWORDS = ("fluent", "ssa", "likelihood", "noisy", "domain", "prior")


def _is_atom(t: Term) -> bool:
    if isinstance(t, Const):
        return True
    return isinstance(t, Compound) and t.functor not in ARITH_FUNCTORS


class Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.type != TokenType.EOF:
            self.i += 1
        return tok

    def check(self, ttype: TokenType) -> bool:
        return self.peek().type == ttype

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.type == TokenType.IDENT and tok.value == word

    def expect(self, ttype: TokenType, what: str = "") -> Token:
        tok = self.peek()
        if tok.type != ttype:
            want = what or ttype.name
            got = tok.value if tok.value else tok.type.name
            raise ParseError(f"expected {want}, got {got!r}", tok)
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_keyword(word):
            got = tok.value if tok.value else tok.type.name
            raise ParseError(f"expected '{word}', got {got!r}", tok)
        return self.advance()

    # -- terms --------------------------------------------------------------

    def parse_term(self) -> Term:
        return self.parse_additive()

    def parse_additive(self) -> Term:
        t = self.parse_mult()
        while self.peek().type in (TokenType.PLUS, TokenType.MINUS):
            op = "+" if self.advance().type == TokenType.PLUS else "-"
            r = self.parse_mult()
            t = Compound(op, (t, r))
        return t

    def parse_mult(self) -> Term:
        t = self.parse_atom_term()
        while self.check(TokenType.STAR_OP):
            self.advance()
            r = self.parse_atom_term()
            t = Compound("*", (t, r))
        return t

    def parse_atom_term(self) -> Term:
        tok = self.peek()
        if tok.type == TokenType.MINUS and self.peek(1).type in (
            TokenType.INT,
            TokenType.FLOAT,
        ):
            self.advance()
            num = self.advance()
            if num.type == TokenType.INT:
                return IntLit(-int(num.value))
            return FloatLit(-float(num.value))
        if tok.type == TokenType.INT:
            self.advance()
            return IntLit(int(tok.value))
        if tok.type == TokenType.FLOAT:
            self.advance()
            return FloatLit(float(tok.value))
        if tok.type == TokenType.EVALOP:
            self.advance()
            self.expect(TokenType.LPAREN, "'(' after '~='")
            inner = self.parse_term()
            self.expect(TokenType.RPAREN)
            return EvalTerm(inner)
        if tok.type == TokenType.VARIABLE:
            self.advance()
            return Var(tok.value)
        if tok.type == TokenType.IDENT:
            name = tok.value
            if name in ("true", "false"):
                self.advance()
                if self.check(TokenType.LPAREN):
                    raise ParseError(f"'{name}' cannot take arguments", tok)
                return Const(name)
            if name in RESERVED_WORDS:
                raise ParseError(f"reserved word '{name}' used as a term", tok)
            self.advance()
            if self.check(TokenType.LPAREN):
                self.advance()
                args = [self.parse_term()]
                while self.check(TokenType.COMMA):
                    self.advance()
                    args.append(self.parse_term())
                self.expect(TokenType.RPAREN)
                return Compound(name, tuple(args))
            return Const(name)
        if tok.type == TokenType.LPAREN:
            self.advance()
            inner = self.parse_additive()
            self.expect(TokenType.RPAREN)
            return inner
        got = tok.value if tok.value else tok.type.name
        raise ParseError(f"expected a term, got {got!r}", tok)

    def parse_atom(self, what: str = "atom") -> Term:
        tok = self.peek()
        t = self.parse_term()
        if not _is_atom(t):
            raise ParseError(f"expected {what}, got non-atom term {t!r}", tok)
        return t

    # -- distributions ------------------------------------------------------

    def parse_dist(self) -> DistributionSpec:
        tok = self.peek()
        if tok.type != TokenType.IDENT or tok.value not in _DIST_NAMES:
            got = tok.value if tok.value else tok.type.name
            raise ParseError(
                f"expected a distribution ({', '.join(_DIST_NAMES)}), got {got!r}",
                tok,
            )
        name = self.advance().value
        self.expect(TokenType.LPAREN, f"'(' after '{name}'")
        dist = self._dist_params(name, tok)
        self.expect(TokenType.RPAREN)
        return dist

    def _dist_params(self, name: str, tok: Token) -> DistributionSpec:
        if name == "gaussian":
            mean = self.parse_term()
            self.expect(TokenType.COMMA)
            var = self.parse_term()
            return Gaussian(mean, var)
        if name == "poisson":
            return Poisson(self.parse_term())
        if name == "uniform":
            lo = self.parse_term()
            self.expect(TokenType.COMMA)
            hi = self.parse_term()
            return UniformCont(lo, hi)
        if name == "delta":
            return Delta(self.parse_term())
        # discrete(v1: w1, v2: w2, ...)
        items = []
        while True:
            v = self.parse_term()
            self.expect(TokenType.COLON, "':' between value and weight")
            w = self.parse_term()
            items.append((v, w))
            if not self.check(TokenType.COMMA):
                break
            self.advance()
        if not items:
            raise ParseError("discrete distribution needs at least one item", tok)
        return Discrete(tuple(items))

    # -- clause bodies ------------------------------------------------------

    def parse_literal(self) -> Literal:
        negated = False
        if self.at_keyword("not"):
            self.advance()
            negated = True
        start = self.peek()
        lhs = self.parse_term()
        if self.peek().type in _CMP_TOKENS:
            op = _CMP_TOKENS[self.advance().type]
            rhs = self.parse_term()
            return CmpLit(op, lhs, rhs, negated)
        if not _is_atom(lhs):
            raise ParseError(
                f"expected an atom or comparison, got term {lhs!r}", start
            )
        return AtomLit(lhs, negated)

    def parse_body(self) -> Tuple[Literal, ...]:
        lits = [self.parse_literal()]
        while self.check(TokenType.COMMA):
            self.advance()
            lits.append(self.parse_literal())
        return tuple(lits)

    # -- clauses ------------------------------------------------------------

    def parse_clause(self, diags: List[Diagnostic]) -> Optional[Clause]:
        tok = self.peek()
        pos = (tok.line, tok.col)
        if tok.type in (TokenType.INT, TokenType.FLOAT) and self.peek(1).type == TokenType.DOUBLECOLON:
            self.advance()
            prob = float(tok.value)
            self.advance()  # ::
            head = self.parse_atom("probabilistic fact head")
            body: Tuple[Literal, ...] = ()
            if self.check(TokenType.ARROW):
                self.advance()
                body = self.parse_body()
            self.expect(TokenType.DOT, "'.' at end of clause")
            if not (0.0 <= prob <= 1.0):
                diags.append(
                    Diagnostic(
                        "error",
                        f"probability {prob} out of range [0, 1]",
                        pos[0],
                        pos[1],
                    )
                )
                return None
            return ProbFact(prob, head, body, pos=pos)

        head = self.parse_atom("clause head")
        if self.check(TokenType.TILDE):
            self.advance()
            dist = self.parse_dist()
            body = ()
            if self.check(TokenType.ARROW):
                self.advance()
                body = self.parse_body()
            self.expect(TokenType.DOT, "'.' at end of clause")
            return DistClause(head, dist, body, pos=pos)
        if self.check(TokenType.ARROW):
            self.advance()
            body = self.parse_body()
            self.expect(TokenType.DOT, "'.' at end of clause")
            return Rule(head, body, pos=pos)
        self.expect(TokenType.DOT, "'.' at end of clause")
        return Rule(head, (), pos=pos)

    # -- formulas -----------------------------------------------------------

    def parse_formula(self) -> Formula:
        return self.parse_or_formula()

    def parse_or_formula(self) -> Formula:
        items = [self.parse_and_formula()]
        while self.check(TokenType.SEMI):
            self.advance()
            items.append(self.parse_and_formula())
        if len(items) == 1:
            return items[0]
        return OrF(tuple(items))

    def parse_and_formula(self) -> Formula:
        items = [self.parse_not_formula()]
        while self.check(TokenType.COMMA):
            self.advance()
            items.append(self.parse_not_formula())
        if len(items) == 1:
            return items[0]
        return AndF(tuple(items))

    def parse_not_formula(self) -> Formula:
        if self.at_keyword("not"):
            self.advance()
            return NotF(self.parse_not_formula())
        if self.at_keyword("exists") or self.at_keyword("forall"):
            kw = self.advance().value
            var = self.expect(TokenType.VARIABLE, "quantified variable").value
            body = self.parse_formula()
            return ExistsF(var, body) if kw == "exists" else ForallF(var, body)
        return self.parse_primary_formula()

    def parse_primary_formula(self) -> Formula:
        tok = self.peek()
        if tok.type == TokenType.LPAREN:
            snap = self.i
            try:
                self.advance()
                f = self.parse_formula()
                self.expect(TokenType.RPAREN)
                if self.peek().type in _CMP_TOKENS:
                    # the parens wrapped a term, e.g. (X + 1) < 2
                    raise _Reparse()
                return f
            except (ParseError, _Reparse):
                self.i = snap
        if self.at_keyword("true"):
            self.advance()
            return TrueF()
        if self.at_keyword("false"):
            self.advance()
            return FalseF()
        lhs = self.parse_term()
        if self.peek().type in _CMP_TOKENS:
            op = _CMP_TOKENS[self.advance().type]
            rhs = self.parse_term()
            return CmpF(op, lhs, rhs)
        if _is_atom(lhs):
            return AtomF(lhs)
        raise ParseError(f"expected a formula, got term {lhs!r}", tok)

    # -- control programs ---------------------------------------------------

    def parse_progexpr(self) -> ProgramExpr:
        return self.parse_choice_expr()

    def parse_choice_expr(self) -> ProgramExpr:
        e = self.parse_seq_expr()
        while self.check(TokenType.PIPE):
            self.advance()
            r = self.parse_seq_expr()
            e = Choice(e, r)
        return e

    def parse_seq_expr(self) -> ProgramExpr:
        e = self.parse_basic_expr()
        while self.check(TokenType.SEMI):
            self.advance()
            r = self.parse_basic_expr()
            e = Seq(e, r)
        return e

    def parse_basic_expr(self) -> ProgramExpr:
        tok = self.peek()
        if self.at_keyword("prim"):
            self.advance()
            return Prim(self.parse_term())
        if tok.type == TokenType.QUESTION:
            self.advance()
            self.expect(TokenType.LPAREN, "'(' after '?'")
            f = self.parse_formula()
            self.expect(TokenType.RPAREN)
            return Test(f)
        if self.at_keyword("pick"):
            self.advance()
            var = self.expect(TokenType.VARIABLE, "pick variable").value
            self.expect(TokenType.DOT, "'.' after pick variable")
            body = self.parse_progexpr()
            return Pick(var, body)
        if self.at_keyword("star"):
            self.advance()
            self.expect(TokenType.LPAREN, "'(' after 'star'")
            body = self.parse_progexpr()
            self.expect(TokenType.RPAREN)
            return Star(body)
        if self.at_keyword("while"):
            self.advance()
            self.expect(TokenType.LPAREN, "'(' after 'while'")
            f = self.parse_formula()
            self.expect(TokenType.RPAREN)
            body = self.parse_basic_expr()
            return While(f, body)
        if self.at_keyword("if"):
            self.advance()
            self.expect(TokenType.LPAREN, "'(' after 'if'")
            f = self.parse_formula()
            self.expect(TokenType.RPAREN)
            then = self.parse_basic_expr()
            self.expect_keyword("else")
            els = self.parse_basic_expr()
            return If(f, then, els)
        if tok.type == TokenType.LPAREN:
            self.advance()
            e = self.parse_progexpr()
            self.expect(TokenType.RPAREN)
            return e
        if tok.type == TokenType.LBRACKET:
            self.advance()
            e = self.parse_progexpr()
            self.expect(TokenType.RBRACKET)
            return e
        got = tok.value if tok.value else tok.type.name
        raise ParseError(f"expected a program expression, got {got!r}", tok)

    # -- action-theory declarations ------------------------------------------

    def parse_fluent_decl(self) -> FluentDecl:
        self.expect_keyword("fluent")
        name = self.expect(TokenType.IDENT, "fluent name").value
        self.expect(TokenType.SLASH, "'/' before arity")
        arity = int(self.expect(TokenType.INT, "fluent arity").value)
        self.expect(TokenType.COLON, "':' before sort")
        sort_tok = self.expect(TokenType.IDENT, "sort (real, int, bool)")
        if sort_tok.value not in ("real", "int", "bool"):
            raise ParseError(
                f"unknown sort '{sort_tok.value}' (expected real, int, bool)",
                sort_tok,
            )
        self.expect(TokenType.DOT, "'.' at end of fluent declaration")
        return FluentDecl(name, arity, sort_tok.value)

    def parse_ssa(self) -> SSA:
        tok = self.expect_keyword("ssa")
        pos = (tok.line, tok.col)
        fluent = self.parse_atom("fluent pattern")
        self.expect(TokenType.LBRACE, "'{' starting SSA cases")
        cases = []
        while not self.check(TokenType.RBRACE):
            action = self.parse_atom("action pattern")
            self.expect(TokenType.FATARROW, "'=>' between action and effect")
            effect = self.parse_term()
            cases.append(SSACase(action, effect))
            if self.check(TokenType.SEMI):
                self.advance()
            else:
                break
        self.expect(TokenType.RBRACE, "'}' ending SSA cases")
        return SSA(fluent, tuple(cases), pos=pos)

    def parse_likelihood(self) -> LikelihoodModel:
        tok = self.expect_keyword("likelihood")
        pos = (tok.line, tok.col)
        action = self.parse_atom("action pattern")
        self.expect(TokenType.COLON, "':' before density")
        name_tok = self.peek()
        if name_tok.type != TokenType.IDENT or name_tok.value not in _DIST_NAMES:
            got = name_tok.value if name_tok.value else name_tok.type.name
            raise ParseError(f"expected a distribution name, got {got!r}", name_tok)
        name = self.advance().value
        self.expect(TokenType.LPAREN, f"'(' after '{name}'")
        actual = self.expect(TokenType.VARIABLE, "actual-argument variable").value
        self.expect(TokenType.SEMI, "';' after the actual argument")
        if name == "gaussian":
            mean = self.parse_term()
            self.expect(TokenType.COMMA)
            var = self.parse_term()
            dist: DistributionSpec = Gaussian(mean, var)
        elif name == "poisson":
            dist = Poisson(self.parse_term())
        elif name == "uniform":
            lo = self.parse_term()
            self.expect(TokenType.COMMA)
            hi = self.parse_term()
            dist = UniformCont(lo, hi)
        elif name == "delta":
            dist = Delta(self.parse_term())
        else:
            items = []
            while True:
                v = self.parse_term()
                self.expect(TokenType.COLON, "':' between value and weight")
                w = self.parse_term()
                items.append((v, w))
                if not self.check(TokenType.COMMA):
                    break
                self.advance()
            dist = Discrete(tuple(items))
        self.expect(TokenType.RPAREN)
        self.expect(TokenType.DOT, "'.' at end of likelihood declaration")
        return LikelihoodModel(action, actual, dist, pos=pos)

    def parse_noisy(self) -> NoisyDecl:
        tok = self.expect_keyword("noisy")
        pos = (tok.line, tok.col)
        name = self.expect(TokenType.IDENT, "action name").value
        self.expect(TokenType.SLASH, "'/' before arity")
        arity = int(self.expect(TokenType.INT, "action arity").value)
        self.expect_keyword("intended")
        self.expect(TokenType.EQ, "'=' after 'intended'")
        intended = int(self.expect(TokenType.INT, "intended argument index").value)
        self.expect_keyword("actual")
        self.expect(TokenType.EQ, "'=' after 'actual'")
        actual = int(self.expect(TokenType.INT, "actual argument index").value)
        self.expect(TokenType.DOT, "'.' at end of noisy declaration")
        return NoisyDecl(name, arity, intended, actual, pos=pos)

    def parse_domain(self) -> Tuple[Const, ...]:
        self.expect_keyword("domain")
        self.expect(TokenType.LBRACE, "'{' starting domain")
        consts = []
        if not self.check(TokenType.RBRACE):
            while True:
                tok = self.expect(TokenType.IDENT, "domain constant")
                if tok.value in RESERVED_WORDS:
                    raise ParseError(
                        f"reserved word '{tok.value}' used as a domain constant", tok
                    )
                consts.append(Const(tok.value))
                if not self.check(TokenType.COMMA):
                    break
                self.advance()
        self.expect(TokenType.RBRACE, "'}' ending domain")
        self.expect(TokenType.DOT, "'.' at end of domain declaration")
        return tuple(consts)

    def parse_prior(self, diags: List[Diagnostic]) -> PriorSpec:
        self.expect_keyword("prior")
        self.expect(TokenType.LBRACE, "'{' starting prior block")
        clauses = []
        while not self.check(TokenType.RBRACE):
            if self.check(TokenType.EOF):
                raise ParseError("unterminated prior block", self.peek())
            c = self.parse_clause(diags)
            if c is not None:
                clauses.append(c)
        self.expect(TokenType.RBRACE)
        return PriorSpec(tuple(clauses))


def _skip_to_recovery_point(p: Parser):
    """After an error, resync at the next clause/declaration boundary."""
    depth = 0
    while True:
        tok = p.peek()
        if tok.type == TokenType.EOF or tok.type == TokenType.SECTION:
            return
        if tok.type in (TokenType.LBRACE, TokenType.LBRACKET, TokenType.LPAREN):
            depth += 1
        elif tok.type in (TokenType.RBRACE, TokenType.RBRACKET, TokenType.RPAREN):
            depth -= 1
            if tok.type == TokenType.RBRACE and depth <= 0:
                p.advance()
                return
        elif tok.type == TokenType.DOT and depth <= 0:
            p.advance()
            return
        p.advance()


def parse_program(text: str) -> ParseResult:
    """Parse .dcl source. Returns the AST or diagnostics, never both."""
    diags: List[Diagnostic] = []
    try:
        tokens = tokenize(text)
    except LexError as e:
        return ParseResult(None, [Diagnostic("error", e.message, e.line, e.col)])

    p = Parser(tokens)
    clauses: List[Clause] = []
    fluents: List[FluentDecl] = []
    ssas: List[SSA] = []
    likelihoods: List[LikelihoodModel] = []
    noisy: List[NoisyDecl] = []
    domain: Tuple[Const, ...] = ()
    priors: List[PriorSpec] = []
    control: Optional[ProgramExpr] = None
    saw_actions = False
    seen_ssa_keys = set()

    section = "clauses"
    while not p.check(TokenType.EOF):
        if p.check(TokenType.SECTION):
            tok = p.advance()
            if tok.value not in ("clauses", "actions", "control"):
                diags.append(
                    Diagnostic(
                        "error", f"unknown section '#{tok.value}'", tok.line, tok.col
                    )
                )
                section = "clauses"
                continue
            section = tok.value
            if section == "actions":
                saw_actions = True
            continue

        try:
            if section == "clauses":
                c = p.parse_clause(diags)
                if c is not None:
                    clauses.append(c)
            elif section == "actions":
                tok = p.peek()
                if tok.type != TokenType.IDENT or tok.value not in _ACTION_KEYWORDS:
                    got = tok.value if tok.value else tok.type.name
                    raise ParseError(
                        "expected an action declaration "
                        f"(fluent, ssa, likelihood, noisy, domain, prior), got {got!r}",
                        tok,
                    )
                if tok.value == "fluent":
                    fluents.append(p.parse_fluent_decl())
                elif tok.value == "ssa":
                    ssa = p.parse_ssa()
                    key = _fluent_key(ssa.fluent)
                    if key in seen_ssa_keys:
                        diags.append(
                            Diagnostic(
                                "error",
                                f"duplicate SSA for fluent {key[0]}/{key[1]}",
                                ssa.pos[0] if ssa.pos else tok.line,
                                ssa.pos[1] if ssa.pos else tok.col,
                            )
                        )
                    else:
                        seen_ssa_keys.add(key)
                        ssas.append(ssa)
                elif tok.value == "likelihood":
                    likelihoods.append(p.parse_likelihood())
                elif tok.value == "noisy":
                    noisy.append(p.parse_noisy())
                elif tok.value == "domain":
                    domain = p.parse_domain()
                else:
                    priors.append(p.parse_prior(diags))
            else:
                if control is not None:
                    tok = p.peek()
                    raise ParseError(
                        "only one control program is allowed per file", tok
                    )
                control = p.parse_progexpr()
                p.expect(TokenType.DOT, "'.' at end of control program")
        except ParseError as e:
            diags.append(
                Diagnostic("error", e.message, e.token.line, e.token.col)
            )
            _skip_to_recovery_point(p)

    if any(d.severity == "error" for d in diags):
        return ParseResult(None, diags)

    theory = None
    if saw_actions:
        theory = ActionTheory(
            fluents=tuple(fluents),
            ssas=tuple(ssas),
            likelihoods=tuple(likelihoods),
            noisy=tuple(noisy),
            domain=domain,
            priors=tuple(priors),
        )
    return ParseResult(
        Program(clauses=tuple(clauses), theory=theory, control=control), diags
    )


def _fluent_key(t: Term) -> Tuple[str, int]:
    if isinstance(t, Const):
        return (t.name, 0)
    assert isinstance(t, Compound)
    return (t.functor, len(t.args))


def _parse_one(text: str, what: str, produce):
    try:
        tokens = tokenize(text)
    except LexError as e:
        raise ParseError(e.message, Token(TokenType.EOF, "", e.line, e.col)) from None
    p = Parser(tokens)
    result = produce(p)
    tok = p.peek()
    if tok.type != TokenType.EOF:
        got = tok.value if tok.value else tok.type.name
        raise ParseError(f"unexpected input after {what}: {got!r}", tok)
    return result


def parse_formula_text(text: str) -> Formula:
    """Parse a standalone formula, e.g. a CLI query string."""
    return _parse_one(text, "formula", lambda p: p.parse_formula())


def parse_term_text(text: str) -> Term:
    """Parse a standalone term, e.g. an evidence key."""
    return _parse_one(text, "term", lambda p: p.parse_term())
