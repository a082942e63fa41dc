"""Command-line front end.

One JSON report line per invocation: {command, seed, elapsed_ms, result,
diagnostics}. The result payload is a pure function of the inputs and the
seed; elapsed_ms lives outside it so replays compare byte for byte. Errors
print the same shape to stderr with exit code 1 (parse), 2 (validation), or
3 (inference). An unsuccessful program search is a result, not an error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import List, Optional

import numpy as np

from .belief import belief_interval, degree_of_belief, init_belief
from .errors import InferenceError, ValidationError
from .golog import DEFAULT_PARTICLES, DEFAULT_THRESHOLD, ExecConfig, run as run_program
from .lang.ast import Diagnostic
from .lang.parser import parse_formula_text, parse_program
from .lang.printer import print_formula, print_term
from .planner import DEFAULT_DISCOUNT, DEFAULT_ROLLOUTS, PlanConfig, evaluate_policy, plan
from .validator import validate
from .worlds import DEFAULT_SAMPLES, estimate_query, exact_query, parse_evidence

DEFAULT_DEPTH = 16
EVAL_EPISODES = 200

EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_INFERENCE = 3


class _CliFailure(Exception):
    def __init__(self, code: int, diagnostics: List[Diagnostic]):
        super().__init__(f"exit {code}")
        self.code = code
        self.diagnostics = diagnostics


def _diag_dicts(diags) -> List[dict]:
    return [
        {"severity": d.severity, "message": d.message, "line": d.line, "col": d.col}
        for d in diags
    ]


def _load(path: str) -> tuple:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise _CliFailure(
            EXIT_PARSE, [Diagnostic("error", f"cannot read {path}: {e}", 0, 0)]
        )
    parsed = parse_program(text)
    if not parsed.ok:
        raise _CliFailure(EXIT_PARSE, parsed.diagnostics)
    info, diags = validate(parsed.program)
    if any(d.severity == "error" for d in diags):
        raise _CliFailure(EXIT_VALIDATION, diags)
    return parsed.program, info, diags


def _parse_query(text: str):
    try:
        return parse_formula_text(text)
    except Exception as e:
        raise _CliFailure(
            EXIT_PARSE, [Diagnostic("error", f"bad query {text!r}: {e}", 0, 0)]
        )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_query(args, seed: int) -> tuple:
    program, info, diags = _load(args.file)
    query = _parse_query(args.query)
    try:
        evidence = parse_evidence(args.evidence)
    except Exception as e:
        raise _CliFailure(EXIT_PARSE, [Diagnostic("error", str(e), 0, 0)])
    if args.exact:
        estimate = exact_query(program, query, evidence, horizon=args.horizon)
        result = {
            "query": print_formula(query),
            "estimate": estimate,
            "stderr": 0.0,
            "n_samples": None,
            "ess": None,
            "horizon": args.horizon,
            "samples": None,
            "evidence": list(args.evidence),
            "exact": True,
        }
    else:
        r = estimate_query(
            program,
            query,
            evidence,
            n=args.samples,
            horizon=args.horizon,
            rng=seed,
        )
        result = {
            "query": print_formula(query),
            "estimate": r.estimate,
            "stderr": r.stderr,
            "n_samples": r.n_samples,
            "ess": r.effective_sample_size,
            "horizon": args.horizon,
            "samples": args.samples,
            "evidence": list(args.evidence),
            "exact": False,
        }
    return result, diags


def _cmd_plan(args, seed: int) -> tuple:
    program, info, diags = _load(args.file)
    config = PlanConfig(
        horizon=args.horizon,
        discount=args.discount,
        rollouts_per_action=args.rollouts,
    )
    policy = plan(program, config, seed)
    mean, stderr = evaluate_policy(program, policy, EVAL_EPISODES, seed)
    first = policy.root_action
    result = {
        "first_action": None if first is None else print_term(first),
        "value": policy.root_value,
        "value_stderr": policy.root_stderr,
        "eval_mean": mean,
        "eval_stderr": stderr,
        "policy_states": len(policy.table),
        "horizon": args.horizon,
        "discount": args.discount,
        "rollouts": args.rollouts,
        "episodes": EVAL_EPISODES,
    }
    return result, diags


def _cmd_run(args, seed: int) -> tuple:
    program, info, diags = _load(args.file)
    if program.theory is None or program.control is None:
        raise _CliFailure(
            EXIT_VALIDATION,
            [
                Diagnostic(
                    "error",
                    "run needs a file with #actions and #control sections",
                    0,
                    0,
                )
            ],
        )
    theory = program.theory
    config = ExecConfig(
        max_search_depth=args.depth,
        test_threshold=args.theta,
        n_particles=args.particles,
    )
    member = args.prior_member
    init_rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    belief = init_belief(theory, member, args.particles, init_rng)
    search_rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    outcome = run_program(program.control, belief, theory, config, search_rng)

    queries = []
    for qtext in args.query or []:
        formula = _parse_query(qtext)
        if args.interval:
            lo, hi = belief_interval(
                theory, formula, outcome.trace, args.particles, seed
            )
            queries.append({"query": print_formula(formula), "lo": lo, "hi": hi})
        else:
            degree = degree_of_belief(outcome.final_belief, formula)
            queries.append({"query": print_formula(formula), "degree": degree})

    result = {
        "status": outcome.status,
        "trace": [print_term(a) for a in outcome.trace],
        "queries": queries,
        "last_test_degree": outcome.last_test_degree,
        "prior_member": member,
        "interval": bool(args.interval),
        "particles": args.particles,
        "theta": args.theta,
        "depth": args.depth,
    }
    return result, diags


def _cmd_check(args, seed: int) -> tuple:
    try:
        program, info, diags = _load(args.file)
    except _CliFailure as e:
        raise e
    errors = sum(1 for d in diags if d.severity == "error")
    warnings = sum(1 for d in diags if d.severity == "warning")
    result = {
        "ok": errors == 0,
        "errors": errors,
        "warnings": warnings,
        "has_theory": program.theory is not None,
        "has_control": program.control is not None,
        "n_clauses": len(program.clauses),
    }
    return result, diags


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="dcplan", description="probabilistic planning workbench"
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help=".dcl program file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--pretty", action="store_true")

    q = sub.add_parser("query", help="estimate or compute a query probability")
    common(q)
    q.add_argument("query", help="formula, e.g. 'inRoom(c)'")
    q.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    q.add_argument("--horizon", type=int, default=0)
    q.add_argument("--exact", action="store_true")
    q.add_argument(
        "--evidence",
        action="append",
        default=[],
        help="observed fact, term=value, repeatable",
    )

    p = sub.add_parser("plan", help="plan over a temporal program")
    common(p)
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--discount", type=float, default=DEFAULT_DISCOUNT)
    p.add_argument("--rollouts", type=int, default=DEFAULT_ROLLOUTS)

    r = sub.add_parser("run", help="execute the #control program")
    common(r)
    r.add_argument("--particles", type=int, default=DEFAULT_PARTICLES)
    r.add_argument("--theta", type=float, default=DEFAULT_THRESHOLD)
    r.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    r.add_argument("--prior-member", type=int, default=0)
    r.add_argument("--interval", action="store_true")
    r.add_argument("--query", action="append", help="belief query, repeatable")

    c = sub.add_parser("check", help="parse and validate only")
    common(c)

    return top


_DISPATCH = {
    "query": _cmd_query,
    "plan": _cmd_plan,
    "run": _cmd_run,
    "check": _cmd_check,
}


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            pass
    return 0


def _emit(report: dict, pretty: bool, stream) -> None:
    if pretty:
        print(json.dumps(report, indent=2, sort_keys=True), file=stream)
    else:
        print(
            json.dumps(report, sort_keys=True, separators=(",", ":")), file=stream
        )


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    seed = _resolve_seed(args)
    started = time.perf_counter()

    try:
        try:
            result, diags = _DISPATCH[args.command](args, seed)
        except ValidationError as e:
            raise _CliFailure(EXIT_VALIDATION, e.diagnostics)
        except InferenceError as e:
            raise _CliFailure(
                EXIT_INFERENCE, [Diagnostic("error", str(e), 0, 0)]
            )
    except _CliFailure as failure:
        report = {
            "command": args.command,
            "seed": seed,
            "elapsed_ms": int((time.perf_counter() - started) * 1000),
            "result": None,
            "diagnostics": _diag_dicts(failure.diagnostics),
        }
        _emit(report, args.pretty, sys.stderr)
        return failure.code

    report = {
        "command": args.command,
        "seed": seed,
        "elapsed_ms": int((time.perf_counter() - started) * 1000),
        "result": result,
        "diagnostics": _diag_dicts(diags),
    }
    _emit(report, args.pretty, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
