"""Finite-horizon planning over clause programs by sampled lookahead.

States are time layers of a live derivation. Q values are estimated by
rolling the derivation forward one layer per candidate action and bootstrapping
through a value memo keyed on a canonical state serialization, so discrete
state spaces collapse to value iteration with sampled transitions while
continuous states simply never share memo keys.

The episode return is the plain finite-horizon sum: G = sum over t in 1..H of
discount^(t-1) * reward(t), each layer's reward counted exactly once, and a
horizon of zero scores just the time-zero reward. plan and evaluate_policy
share this convention.

Rollout randomness is derived from (seed, time, action, rollout index) only.
Keeping the state out of the derivation makes the same nature draws apply
before and after reward-shaping edits, which keeps added rewards monotone.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .analysis import ProgramInfo
from .engine import Derivation, RandomChoice, term_key
from .errors import InferenceError
from .lang.ast import Compound, Const, FloatLit, IntLit, Program, Term
from .lang.printer import print_term
from .validator import validated_info
from .worlds import World, _master_seed

DEFAULT_DISCOUNT = 0.95
DEFAULT_ROLLOUTS = 100

_KEY_QUANTUM = 1e-9

# tags keeping the planner's derived rng streams disjoint
_TAG_INIT = 0
_TAG_ROLLOUT = 1
_TAG_EPISODE = 2


@dataclass(frozen=True)
class PlanConfig:
    horizon: int
    discount: float = DEFAULT_DISCOUNT
    rollouts_per_action: int = DEFAULT_ROLLOUTS
    max_depth: Optional[int] = None

    def __post_init__(self):
        if self.horizon < 0:
            raise InferenceError("horizon must be non-negative")
        if not 0.0 <= self.discount <= 1.0:
            raise InferenceError("discount must be in [0, 1]")
        if self.rollouts_per_action < 1:
            raise InferenceError("rollouts_per_action must be at least 1")

    @property
    def depth_cap(self) -> int:
        return self.horizon if self.max_depth is None else min(
            self.horizon, self.max_depth
        )


@dataclass
class Policy:
    """Map from (state key, time) to the chosen ground action.

    A stored action of None is the distinguished no-op: let the world evolve
    by its frame clauses alone. Unseen states fall back to the no-op.
    """

    table: Dict[Tuple[str, int], Optional[Term]]
    config: PlanConfig
    root_key: str
    root_value: float
    root_stderr: float

    @property
    def root_action(self) -> Optional[Term]:
        return self.table.get((self.root_key, 0))

    def action_for(self, key: str, t: int) -> Optional[Term]:
        return self.table.get((key, t))


def _quantized(value) -> str:
    if isinstance(value, bool):
        return "t" if value else "f"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "q%d" % int(round(value / _KEY_QUANTUM))
    return print_term(value)


def _strip_time(atom: Term) -> str:
    if isinstance(atom, Compound):
        if len(atom.args) == 1:
            return atom.functor
        return print_term(Compound(atom.functor, atom.args[:-1]))
    return print_term(atom)


def _layer_time(atom: Term) -> Optional[int]:
    if isinstance(atom, Compound) and isinstance(atom.args[-1], IntLit):
        return atom.args[-1].value
    return None


def state_key_parts(facts_by_pred, rv_values, rv_terms, temporal, t: int) -> str:
    lines: List[str] = []
    for pk, atoms in facts_by_pred.items():
        if pk[0] in ("poss", "reward"):
            continue
        if pk in temporal:
            for atom in atoms:
                if _layer_time(atom) == t:
                    lines.append(_strip_time(atom))
        else:
            for atom in atoms:
                lines.append(term_key(atom))
    for key, term in rv_terms.items():
        pk = (
            (term.functor, len(term.args))
            if isinstance(term, Compound)
            else (term.name, 0)
        )
        if pk in temporal:
            if _layer_time(term) == t:
                lines.append(_strip_time(term) + "=" + _quantized(rv_values[key]))
        else:
            lines.append(key + "=" + _quantized(rv_values[key]))
    lines.sort()
    return "\n".join(lines)


def state_key(world: World, t: int) -> str:
    """Canonical serialization of a world's state at time t."""
    return state_key_parts(
        world.facts_by_pred, world.rv_values, world.rv_terms, world.temporal, t
    )


def _deriv_state_key(d: Derivation, t: int) -> str:
    return state_key_parts(
        d.store.by_pred, d.rv_memo, d.rv_terms, d.info.temporal, t
    )


# ---------------------------------------------------------------------------
# Reading poss and reward facts
# ---------------------------------------------------------------------------


def _poss_actions(facts_by_pred, t: int) -> List[Term]:
    out = []
    for atom in facts_by_pred.get(("poss", 2), ()):
        if _layer_time(atom) == t:
            out.append(atom.args[0])
    out.sort(key=print_term)
    return out


def _reward_sum(facts_by_pred, t: int) -> float:
    total = 0.0
    for atom in facts_by_pred.get(("reward", 2), ()):
        if _layer_time(atom) == t:
            num = atom.args[0]
            if not isinstance(num, (IntLit, FloatLit)):
                raise InferenceError(
                    f"reward amount {print_term(num)} is not numeric"
                )
            total += num.value
    return total


def applicable_actions(program: Program, world: World, t: int) -> Tuple[Term, ...]:
    """Ground actions whose poss atoms hold in the world at time t."""
    return tuple(_poss_actions(world.facts_by_pred, t))


def reward_of(program: Program, world: World, t: int) -> float:
    """Sum of reward amounts derivable in the world at time t."""
    return _reward_sum(world.facts_by_pred, t)


def _action_atom(action: Term, t: int) -> Term:
    if isinstance(action, Const):
        return Compound(action.name, (IntLit(t),))
    if isinstance(action, Compound):
        return Compound(action.functor, action.args + (IntLit(t),))
    raise InferenceError(f"{print_term(action)} cannot be used as an action")


def _action_tag(action: Optional[Term]) -> int:
    text = "" if action is None else print_term(action)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _rollout_rng(seed: int, t: int, action: Optional[Term], r: int):
    ss = np.random.SeedSequence((seed, _TAG_ROLLOUT, t, _action_tag(action), r))
    return np.random.default_rng(ss)


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------


class _Planner:
    def __init__(self, program: Program, info: ProgramInfo, config: PlanConfig,
                 seed: int):
        self.program = program
        self.info = info
        self.config = config
        self.seed = seed
        self.memo: Dict[Tuple[str, int], float] = {}
        self.table: Dict[Tuple[str, int], Optional[Term]] = {}
        self.root_stderr = 0.0
        self._root_candidates: List[Tuple[float, float]] = []

    def _step(self, d: Derivation, action: Optional[Term], t: int,
              rollout: int) -> Derivation:
        nxt = d.fork()
        nxt.choice = RandomChoice(_rollout_rng(self.seed, t, action, rollout))
        if action is not None:
            nxt.inject(_action_atom(action, t), t)
        nxt.run_layer(t + 1)
        return nxt

    def _q_value(self, d: Derivation, action: Optional[Term], t: int,
                 at_root: bool) -> float:
        gamma = self.config.discount
        returns = []
        for r in range(self.config.rollouts_per_action):
            nxt = self._step(d, action, t, r)
            returns.append(
                _reward_sum(nxt.store.by_pred, t + 1) + gamma * self._value(nxt, t + 1)
            )
        mean = sum(returns) / len(returns)
        if at_root:
            var = sum((x - mean) ** 2 for x in returns)
            n = len(returns)
            stderr = math.sqrt(var / (n - 1) / n) if n > 1 else 0.0
            self._root_candidates.append((mean, stderr))
        return mean

    def _value(self, d: Derivation, t: int) -> float:
        if t >= self.config.depth_cap:
            return 0.0
        key = (_deriv_state_key(d, t), t)
        if key in self.memo:
            return self.memo[key]
        at_root = t == 0
        actions: List[Optional[Term]] = list(_poss_actions(d.store.by_pred, t))
        if not actions:
            actions = [None]
        best_action: Optional[Term] = None
        best_q = -math.inf
        best_idx = -1
        for i, action in enumerate(actions):
            q = self._q_value(d, action, t, at_root)
            if q > best_q:
                best_q = q
                best_action = action
                best_idx = i
        self.memo[key] = best_q
        self.table[key] = best_action
        if at_root and self._root_candidates:
            self.root_stderr = self._root_candidates[best_idx][1]
        return best_q


def plan(program: Program, config: PlanConfig, rng) -> Policy:
    """Compute a policy by depth-limited sampled lookahead."""
    info = validated_info(program)
    seed = _master_seed(rng)
    init_rng = np.random.default_rng(np.random.SeedSequence((seed, _TAG_INIT)))
    d0 = Derivation(program, info, config.horizon, RandomChoice(init_rng))
    d0.run_static()
    d0.run_layer(0)
    root_key = _deriv_state_key(d0, 0)

    planner = _Planner(program, info, config, seed)
    if config.depth_cap == 0:
        root_value = _reward_sum(d0.store.by_pred, 0)
    else:
        root_value = planner._value(d0, 0)
    return Policy(
        table=planner.table,
        config=config,
        root_key=root_key,
        root_value=root_value,
        root_stderr=planner.root_stderr,
    )


def evaluate_policy(
    program: Program, policy: Policy, episodes: int, rng
) -> Tuple[float, float]:
    """Mean discounted return over sampled episodes following the policy."""
    if episodes < 1:
        raise InferenceError("episodes must be at least 1")
    info = validated_info(program)
    seed = _master_seed(rng)
    cfg = policy.config
    gamma = cfg.discount
    returns = np.zeros(episodes)
    for e in range(episodes):
        ep_rng = np.random.default_rng(
            np.random.SeedSequence((seed, _TAG_EPISODE, e))
        )
        d = Derivation(program, info, cfg.horizon, RandomChoice(ep_rng))
        d.run_static()
        d.run_layer(0)
        if cfg.horizon == 0:
            returns[e] = _reward_sum(d.store.by_pred, 0)
            continue
        total = 0.0
        for t in range(cfg.horizon):
            action = policy.action_for(_deriv_state_key(d, t), t)
            if action is not None:
                d.inject(_action_atom(action, t), t)
            d.run_layer(t + 1)
            total += gamma**t * _reward_sum(d.store.by_pred, t + 1)
        returns[e] = total
    mean = float(returns.mean())
    stderr = (
        float(returns.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    )
    return mean, stderr
