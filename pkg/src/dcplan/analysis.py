"""Static analysis of clause programs.

Computes, per predicate:
  - temporality (does the final argument index a time layer?)
  - negation strata over the same-layer dependency graph
  - which predicates are asserted by planner actions (taint), so that
    unsound within-layer negation over them can be rejected.

Temporal predicates are inferred, not declared. Seeds: poss/2 and reward/2,
plus any clause head whose final argument is arithmetic over a variable
(e.g. t+1). Temporality then propagates through shared time variables
until a fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .lang.ast import (
    ARITH_FUNCTORS,
    AtomLit,
    Clause,
    CmpLit,
    Compound,
    Const,
    DistClause,
    EvalTerm,
    IntLit,
    ProbFact,
    Program,
    RESERVED_PREDICATES,
    Rule,
    Term,
    Var,
    dist_param_terms,
)

PredKey = Tuple[str, int]

BUILTIN_PREDS: Dict[str, int] = {"between": 3}


def pred_key(atom: Term) -> Optional[PredKey]:
    if isinstance(atom, Const):
        return (atom.name, 0)
    if isinstance(atom, Compound) and atom.functor not in ARITH_FUNCTORS:
        return (atom.functor, len(atom.args))
    return None


@dataclass(frozen=True)
class TimeForm:
    """Shape of a final argument viewed as a time index."""

    var: Optional[str]  # None when ground
    offset: int  # t = var + offset, or the literal layer when ground


def time_form(t: Term) -> Optional[TimeForm]:
    if isinstance(t, IntLit):
        return TimeForm(None, t.value)
    if isinstance(t, Var):
        return TimeForm(t.name, 0)
    if isinstance(t, Compound) and t.functor in ("+", "-") and len(t.args) == 2:
        l, r = t.args
        if isinstance(l, Var) and isinstance(r, IntLit):
            k = r.value if t.functor == "+" else -r.value
            return TimeForm(l.name, k)
    return None


def _final_arg(atom: Term) -> Optional[Term]:
    if isinstance(atom, Compound) and atom.args:
        return atom.args[-1]
    return None


@dataclass
class AtomOcc:
    """One predicate occurrence: a head, a body atom, or an eval-term target."""

    key: PredKey
    atom: Term
    negated: bool
    is_head: bool
    via_eval: bool


def _collect_eval_targets(t: Term, out: List[Term]):
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, EvalTerm):
            out.append(cur.inner)
            stack.append(cur.inner)
        elif isinstance(cur, Compound):
            stack.extend(cur.args)


def clause_occurrences(c: Clause) -> List[AtomOcc]:
    occs: List[AtomOcc] = []
    evals: List[Term] = []

    occs.append(AtomOcc(pred_key(c.head), c.head, False, True, False))
    _collect_eval_targets(c.head, evals)
    if isinstance(c, DistClause):
        for p in dist_param_terms(c.dist):
            _collect_eval_targets(p, evals)
    for lit in c.body:
        if isinstance(lit, AtomLit):
            occs.append(AtomOcc(pred_key(lit.atom), lit.atom, lit.negated, False, False))
            _collect_eval_targets(lit.atom, evals)
        else:
            _collect_eval_targets(lit.lhs, evals)
            _collect_eval_targets(lit.rhs, evals)
    for target in evals:
        k = pred_key(target)
        if k is not None:
            occs.append(AtomOcc(k, target, False, False, True))
    return [o for o in occs if o.key is not None]


@dataclass
class ProgramInfo:
    clauses: Tuple[Clause, ...]
    temporal: Set[PredKey] = field(default_factory=set)
    strata: Dict[PredKey, int] = field(default_factory=dict)
    n_strata: int = 1
    # clause index -> stratum of its head
    clause_stratum: List[int] = field(default_factory=list)
    # action functor name -> arity of the poss pattern (asserted with +1 time arg)
    action_functors: Dict[str, int] = field(default_factory=dict)
    dist_heads: Set[PredKey] = field(default_factory=set)
    pred_arities: Dict[str, Set[int]] = field(default_factory=dict)
    tainted: Set[PredKey] = field(default_factory=set)
    # analysis-level problems, reported through the validator
    problems: List[Tuple[str, str, Optional[Tuple[int, int]]]] = field(
        default_factory=list
    )

    def is_temporal(self, key: PredKey) -> bool:
        return key in self.temporal


def _infer_temporal(
    clauses: Tuple[Clause, ...], occ_by_clause, seeds: Set[PredKey]
) -> Set[PredKey]:
    temporal: Set[PredKey] = set(seeds)
    for name, arity in RESERVED_PREDICATES.items():
        temporal.add((name, arity))
    for c in clauses:
        fa = _final_arg(c.head)
        tf = time_form(fa) if fa is not None else None
        if tf is not None and tf.var is not None and tf.offset != 0:
            temporal.add(pred_key(c.head))

    changed = True
    while changed:
        changed = False
        for occs in occ_by_clause:
            time_vars: Set[str] = set()
            for o in occs:
                if o.key in temporal:
                    tf = time_form(_final_arg(o.atom) or IntLit(0))
                    if tf is not None and tf.var is not None:
                        time_vars.add(tf.var)
            if not time_vars:
                continue
            for o in occs:
                if o.key in temporal or o.key[0] in BUILTIN_PREDS:
                    continue
                fa = _final_arg(o.atom)
                if fa is None:
                    continue
                tf = time_form(fa)
                if tf is not None and tf.var in time_vars:
                    temporal.add(o.key)
                    changed = True
    return temporal


def _same_layer(head_tf: Optional[TimeForm], body_tf: Optional[TimeForm]) -> bool:
    """Conservatively decide whether two occurrences can share a layer."""
    if head_tf is None or body_tf is None:
        return True  # unanalyzable time terms: assume same layer
    if head_tf.var is None and body_tf.var is None:
        return head_tf.offset == body_tf.offset
    if head_tf.var == body_tf.var:
        return head_tf.offset == body_tf.offset
    return True  # distinct time variables can coincide


def _sccs(nodes: List[PredKey], edges: Dict[PredKey, Set[PredKey]]) -> List[List[PredKey]]:
    """Tarjan's algorithm, iterative. Returns SCCs in reverse topological order."""
    index: Dict[PredKey, int] = {}
    low: Dict[PredKey, int] = {}
    on_stack: Set[PredKey] = set()
    stack: List[PredKey] = []
    sccs: List[List[PredKey]] = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(edges.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
    return sccs


def analyze(program: Program) -> ProgramInfo:
    clauses = program.clauses
    info = ProgramInfo(clauses=clauses)
    occ_by_clause = [clause_occurrences(c) for c in clauses]

    for occs in occ_by_clause:
        for o in occs:
            info.pred_arities.setdefault(o.key[0], set()).add(o.key[1])

    for c in clauses:
        if isinstance(c, DistClause):
            info.dist_heads.add(pred_key(c.head))

    # action functors come from poss heads: poss(pattern, T)
    for c in clauses:
        hk = pred_key(c.head)
        if hk == ("poss", 2) and isinstance(c.head, Compound):
            pat = c.head.args[0]
            pk = pred_key(pat)
            if pk is None:
                info.problems.append(
                    ("error", "poss pattern must be an action atom", c.pos)
                )
            else:
                prev = info.action_functors.get(pk[0])
                if prev is not None and prev != pk[1]:
                    info.problems.append(
                        (
                            "error",
                            f"action '{pk[0]}' used with inconsistent arities in poss",
                            c.pos,
                        )
                    )
                info.action_functors[pk[0]] = pk[1]

    # atoms the planner asserts (action + time argument) live in layers
    action_seeds = {
        (name, arity + 1) for name, arity in info.action_functors.items()
    }
    info.temporal = _infer_temporal(clauses, occ_by_clause, action_seeds)

    # same-layer dependency graph
    pos_edges: Dict[PredKey, Set[PredKey]] = {}
    neg_edges: Dict[PredKey, Set[PredKey]] = {}
    nodes: Set[PredKey] = set()
    for c, occs in zip(clauses, occ_by_clause):
        hk = pred_key(c.head)
        nodes.add(hk)
        head_temporal = hk in info.temporal
        head_tf = time_form(_final_arg(c.head) or IntLit(0)) if head_temporal else None
        if head_temporal and head_tf is None:
            info.problems.append(
                (
                    "error",
                    f"head of temporal predicate {hk[0]}/{hk[1]} has an "
                    "unrecognized time argument (use T, T+k, or an integer)",
                    c.pos,
                )
            )
        for o in occs:
            if o.is_head or o.key[0] in BUILTIN_PREDS:
                continue
            nodes.add(o.key)
            o_temporal = o.key in info.temporal
            if head_temporal != o_temporal:
                if not head_temporal and o_temporal:
                    info.problems.append(
                        (
                            "error",
                            f"static predicate {hk[0]}/{hk[1]} is derived from "
                            f"temporal predicate {o.key[0]}/{o.key[1]}",
                            c.pos,
                        )
                    )
                continue
            if head_temporal:
                o_tf = time_form(_final_arg(o.atom) or IntLit(0))
                if o_tf is not None and head_tf is not None:
                    if (
                        o_tf.var is not None
                        and o_tf.var == head_tf.var
                        and o_tf.offset > head_tf.offset
                    ):
                        info.problems.append(
                            (
                                "error",
                                f"body of {hk[0]}/{hk[1]} references a later "
                                f"time layer than its head",
                                c.pos,
                            )
                        )
                if not _same_layer(head_tf, o_tf):
                    continue
            (neg_edges if o.negated else pos_edges).setdefault(hk, set()).add(o.key)

    all_edges: Dict[PredKey, Set[PredKey]] = {}
    for src in set(pos_edges) | set(neg_edges):
        all_edges[src] = pos_edges.get(src, set()) | neg_edges.get(src, set())

    node_list = sorted(nodes)
    comps = _sccs(node_list, all_edges)  # reverse topological order
    comp_of: Dict[PredKey, int] = {}
    for i, comp in enumerate(comps):
        for k in comp:
            comp_of[k] = i

    # negative edge inside one SCC = within-layer negative cycle
    for src, dsts in neg_edges.items():
        for dst in dsts:
            if comp_of.get(src) == comp_of.get(dst):
                info.problems.append(
                    (
                        "error",
                        f"within-layer negative cycle through "
                        f"{src[0]}/{src[1]} and {dst[0]}/{dst[1]}",
                        None,
                    )
                )

    # strata: condensation is already topologically ordered (reversed)
    for i, comp in enumerate(comps):
        for k in comp:
            info.strata[k] = i
    info.n_strata = max(len(comps), 1)

    # taint: predicates whose same-layer derivation can involve action atoms
    asserted = {
        (name, arity + 1) for name, arity in info.action_functors.items()
    }
    tainted = set(asserted)
    changed = True
    while changed:
        changed = False
        for src in sorted(all_edges):
            if src in tainted:
                continue
            if all_edges[src] & tainted:
                tainted.add(src)
                changed = True
    info.tainted = tainted
    for src, dsts in neg_edges.items():
        for dst in dsts:
            if dst in tainted:
                info.problems.append(
                    (
                        "error",
                        f"{src[0]}/{src[1]} negates action-dependent predicate "
                        f"{dst[0]}/{dst[1]} within the same time layer",
                        None,
                    )
                )

    info.clause_stratum = [
        info.strata.get(pred_key(c.head), 0) for c in clauses
    ]
    return info
