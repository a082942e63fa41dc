"""Vectorized world sampling for ground, static, discrete clause programs.

The scalar engine derives one world at a time; for programs that are just
ground probabilistic facts and ground rules, all N worlds can be sampled
as boolean matrices instead (one column per ground atom, one coin column
per probabilistic fact). Same distribution, different arithmetic path, so
results can be cross-checked against both the scalar route and the exact
enumerator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .analysis import ProgramInfo, pred_key
from .engine import term_key
from .lang.ast import (
    AndF,
    AtomF,
    AtomLit,
    FalseF,
    Formula,
    NotF,
    OrF,
    ProbFact,
    Program,
    Rule,
    TrueF,
    term_vars,
)


@dataclass
class _ClauseRow:
    head: int
    body: Tuple[Tuple[int, bool], ...]  # (column, positive)
    coin: Optional[int]  # coin column for a probabilistic fact


@dataclass
class Table:
    n_columns: int
    coin_probs: np.ndarray
    strata: List[List[_ClauseRow]]
    query: Callable[[np.ndarray], np.ndarray]


def _ground_literal_columns(body, col_of) -> Optional[Tuple[Tuple[int, bool], ...]]:
    out: List[Tuple[int, bool]] = []
    for lit in body:
        if not isinstance(lit, AtomLit):
            return None
        if term_vars(lit.atom):
            return None
        key = pred_key(lit.atom)
        if key is None or key == ("between", 3):
            return None
        out.append((col_of(lit.atom), not lit.negated))
    return tuple(out)


def _compile_formula(f: Formula, col_of) -> Optional[Callable]:
    if isinstance(f, TrueF):
        return lambda m: np.ones(m.shape[0], dtype=bool)
    if isinstance(f, FalseF):
        return lambda m: np.zeros(m.shape[0], dtype=bool)
    if isinstance(f, AtomF):
        if term_vars(f.atom) or pred_key(f.atom) is None:
            return None
        col = col_of(f.atom)
        return lambda m: m[:, col]
    if isinstance(f, NotF):
        inner = _compile_formula(f.body, col_of)
        return None if inner is None else (lambda m: ~inner(m))
    if isinstance(f, (AndF, OrF)):
        parts = [_compile_formula(item, col_of) for item in f.items]
        if any(p is None for p in parts):
            return None
        if isinstance(f, AndF):
            return lambda m: np.logical_and.reduce([p(m) for p in parts])
        return lambda m: np.logical_or.reduce([p(m) for p in parts])
    return None


def compile_program(
    program: Program,
    info: ProgramInfo,
    query: Formula,
    evidence,
) -> Optional[Table]:
    """Compile to matrix form, or None when outside the supported fragment."""
    if evidence:
        return None
    if info.dist_heads:
        return None

    columns: Dict[str, int] = {}

    def col_of(atom) -> int:
        key = term_key(atom)
        if key not in columns:
            columns[key] = len(columns)
        return columns[key]

    coin_probs: List[float] = []
    rows: List[Tuple[int, _ClauseRow]] = []
    for idx, c in enumerate(program.clauses):
        if not isinstance(c, (Rule, ProbFact)):
            return None
        if term_vars(c.head):
            return None
        head_key = pred_key(c.head)
        if head_key is None or info.is_temporal(head_key):
            return None
        body = _ground_literal_columns(c.body, col_of)
        if body is None:
            return None
        head_col = col_of(c.head)
        coin = None
        if isinstance(c, ProbFact):
            coin = len(coin_probs)
            coin_probs.append(c.prob)
        rows.append(
            (info.clause_stratum[idx], _ClauseRow(head_col, body, coin))
        )

    query_fn = _compile_formula(query, col_of)
    if query_fn is None:
        return None

    grouped: List[List[_ClauseRow]] = []
    last_stratum: Optional[int] = None
    for stratum, row in sorted(rows, key=lambda r: r[0]):
        if stratum != last_stratum:
            grouped.append([])
            last_stratum = stratum
        grouped[-1].append(row)

    return Table(
        n_columns=len(columns),
        coin_probs=np.asarray(coin_probs, dtype=float),
        strata=grouped,
        query=query_fn,
    )


def evaluate(table: Table, n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sample n worlds at once; returns (weights, query indicators)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if len(table.coin_probs):
        coins = rng.random((n, len(table.coin_probs))) < table.coin_probs[None, :]
    else:
        coins = np.zeros((n, 0), dtype=bool)
    facts = np.zeros((n, table.n_columns), dtype=bool)

    for group in table.strata:
        changed = True
        while changed:
            changed = False
            for row in group:
                mask = np.ones(n, dtype=bool)
                if row.coin is not None:
                    mask &= coins[:, row.coin]
                for col, positive in row.body:
                    mask &= facts[:, col] if positive else ~facts[:, col]
                new = mask & ~facts[:, row.head]
                if new.any():
                    facts[:, row.head] |= new
                    changed = True

    indicators = table.query(facts).astype(float)
    weights = np.ones(n, dtype=float)
    return weights, indicators
