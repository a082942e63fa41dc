"""Release gate: the eight end-to-end properties, one verdict line each.

Each test prints `[accept] <name>: PASS` or `: FAIL` so a log scrape can
recover the verdicts; the assertions carry the stated tolerances.
"""

import json
import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import SCENARIO_DIR, parsed, scenario_text
from dcplan import (
    ExecConfig,
    PlanConfig,
    estimate_query,
    exact_query,
    init_belief,
    belief_interval,
    degree_of_belief,
    observe,
    parse_formula_text,
    parse_program,
    parse_term_text,
    plan,
    pretty_print,
    progress,
    run,
    sample_world,
)
from dcplan.cli import main
from dcplan.lang.ast import Compound, Const, IntLit
from dcplan.lang.printer import print_term

from test_planner import line_value_iteration
from test_printer_roundtrip import gen_program
from test_tabular import random_ground_program
from test_golog import bfs_shortest_line_walk, clear_table_source

f = parse_formula_text
t = parse_term_text


@contextmanager
def checked(name):
    try:
        yield
    except BaseException:
        print(f"[accept] {name}: FAIL")
        raise
    print(f"[accept] {name}: PASS")


def path(name: str) -> str:
    return str(SCENARIO_DIR / name)


def test_01_weighted_estimates_match_enumeration():
    with checked("weighted estimates vs enumeration, 100 random programs"):
        started = time.perf_counter()
        n = 50_000
        misses = 0
        for case in range(100):
            r = random.Random(31_000 + case)
            prog = parsed(random_ground_program(r))
            query = f(r.choice(["d0", "f0, not f1", "d0; f0"]))
            truth = exact_query(prog, query)
            est = estimate_query(prog, query, n=n, rng=case)
            band = 3.0 * math.sqrt(truth * (1.0 - truth) / n) + 0.003
            if abs(est.estimate - truth) > band:
                misses += 1
        elapsed = time.perf_counter() - started
        assert misses <= 1, f"{misses} of 100 programs out of band"
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_02_worked_example_probabilities():
    with checked("worked examples: table, urn, unknown object"):
        table = parsed(scenario_text("table.dcl"))
        assert exact_query(table, f("inRoom(c)")) == 0.6

        urn = parsed(scenario_text("urn.dcl"))
        rng = np.random.default_rng(12)
        ns = []
        for _ in range(10_000):
            w = sample_world(urn, 0, rng)
            count = w.rv(Const("n"))
            ns.append(count)
            for i in range(1, count + 1):
                v = w.rv(Compound("pos", (IntLit(i),)))
                assert 1.0 <= v <= 10.0
        assert abs(float(np.mean(ns)) - 6.0) <= 0.08

        somewhere = parsed(scenario_text("table_exists.dcl"))
        exists_q = f("exists X onTable(X)")
        assert exact_query(somewhere, exists_q) == 0.6
        est = estimate_query(somewhere, exists_q, n=10_000, rng=3)
        assert abs(est.estimate - 0.6) <= 0.015


def test_03_gaussian_filter_equivalence():
    with checked("particle belief vs closed-form Gaussian filter"):
        theory = parsed(scenario_text("kalman.dcl")).theory
        n = 10_000
        belief = init_belief(theory, 0, n, rng=0)
        belief = progress(belief, t("move(1)"), theory,
                          rng=np.random.default_rng(1))
        belief = observe(belief, t("obs(1.2)"), theory,
                         rng=np.random.default_rng(2))
        xs = np.array([p.valuation[Const("pos")] for p in belief.particles])
        ws = np.array([p.weight for p in belief.particles])
        mean = float((ws * xs).sum())
        var = float((ws * (xs - mean) ** 2).sum())
        post_mean, post_var = 10.0 / 9.0, 5.0 / 9.0
        assert abs(mean - post_mean) <= 3.0 * math.sqrt(post_var / n)
        assert abs(var - post_var) <= 3.0 * post_var * math.sqrt(2.0 / n)


def test_04_planner_matches_value_iteration():
    with checked("lookahead planning vs exact value iteration"):
        started = time.perf_counter()

        det = parsed(scenario_text("line_det.dcl"))
        det_policy = plan(det, PlanConfig(horizon=5, discount=0.95,
                                          rollouts_per_action=500), rng=0)
        assert print_term(det_policy.root_action) == "move(1)"
        det_oracle = line_value_iteration(1.0, 0.95, 5)
        assert det_policy.root_value == pytest.approx(det_oracle, rel=1e-9)

        stoch = parsed(scenario_text("line_stoch.dcl"))
        policy = plan(stoch, PlanConfig(horizon=5, discount=0.95,
                                        rollouts_per_action=500), rng=0)
        oracle = line_value_iteration(0.8, 0.95, 5)
        assert policy.root_stderr > 0.0
        assert abs(policy.root_value - oracle) <= 3.0 * policy.root_stderr

        distinct_keys = {key for key, _ in policy.table}
        assert len(distinct_keys) <= 200

        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_05_control_program_semantics():
    with checked("control search: sweep lengths and shortest walk"):
        for k in (0, 1, 3, 7):
            prog = parsed(clear_table_source(k))
            config = ExecConfig(max_search_depth=k + 2, test_threshold=0.999,
                                n_particles=64)
            belief = init_belief(prog.theory, 0, 64, rng=0)
            outcome = run(prog.control, belief, prog.theory, config, rng=0)
            assert outcome.status == "success", k
            assert len(outcome.trace) == k

        walk = parsed(scenario_text("line4.dcl"))
        config = ExecConfig(max_search_depth=6, test_threshold=0.999,
                            n_particles=8)
        belief = init_belief(walk.theory, 0, 8, rng=0)
        outcome = run(walk.control, belief, walk.theory, config, rng=0)
        assert outcome.status == "success"
        assert len(outcome.trace) == bfs_shortest_line_walk(0, 3, -6, 6)


def test_06_interval_beliefs_span_the_family():
    with checked("belief intervals across the prior family"):
        family = parsed(scenario_text("family.dcl")).theory
        query = f("onTable(c)")
        lo, hi = belief_interval(family, query, (), 200, rng=0)
        assert abs(lo - 0.3) <= 0.02 and abs(hi - 0.7) <= 0.02
        for member in (0, 1):
            belief = init_belief(family, member, 200, rng=0)
            assert lo <= degree_of_belief(belief, query) <= hi

        singleton = parsed(scenario_text("kalman.dcl")).theory
        slo, shi = belief_interval(singleton, f("pos > 0"), (), 500, rng=0)
        assert slo == shi


def test_07_seeded_runs_are_byte_identical(capsys):
    with checked("repeated seeded commands emit identical payloads"):
        commands = [
            ["query", path("urn.dcl"), "~=(n) >= 4", "--samples", "2000",
             "--seed", "6"],
            ["query", path("table.dcl"), "inRoom(c)", "--exact", "--seed", "6"],
            ["plan", path("line_stoch.dcl"), "--horizon", "4", "--rollouts",
             "50", "--seed", "6"],
            ["run", path("clear_table.dcl"), "--particles", "32", "--depth",
             "5", "--query", "exists X onTable(X)", "--seed", "6"],
            ["run", path("family.dcl"), "--interval", "--query", "onTable(c)",
             "--particles", "64", "--seed", "6"],
            ["check", path("line_det.dcl"), "--seed", "6"],
        ]
        for argv in commands:
            payloads = []
            for _ in range(2):
                code = main(list(argv))
                out = capsys.readouterr().out
                assert code == 0, argv
                report = json.loads(out)
                payloads.append(
                    json.dumps(report["result"], sort_keys=True,
                               separators=(",", ":"))
                )
            assert payloads[0] == payloads[1], argv


def test_08_printer_parser_round_trip():
    with checked("1000 fuzzed programs round trip through the printer"):
        for i in range(1000):
            r = random.Random(90_000 + i)
            original = gen_program(r)
            res = parse_program(pretty_print(original))
            assert res.ok, (i, [str(d) for d in res.diagnostics])
            assert res.program == original, i
