"""Non-interference probes, the subword scan, tier preservation, growth fits."""

import pytest

from tierlang import (
    Assign,
    OpCall,
    Program,
    Skip,
    Store,
    Tier,
    Var,
    While,
    unary,
)
from tierlang.analysis import (
    GrowthRow,
    GrowthTable,
    fit_polynomial,
    measure_growth,
    ni_suite,
    scheduled_run_stores,
    store_equiv,
    subword_invariant,
    tier_one_projection,
    tier_preservation,
)
from tierlang.fixtures import load_source
from tierlang.ops import default_registry
from tierlang.scheduling import RoundRobin, run_with_scheduler
from tierlang.typecheck import build_sig_env


def test_store_equiv_ignores_tier_zero():
    gamma = {"x": Tier.ONE, "s": Tier.ZERO}
    assert store_equiv(gamma, Store.of(x="1", s="a"), Store.of(x="1", s="b")) is None
    witness = store_equiv(gamma, Store.of(x="1"), Store.of(x="11"))
    assert (witness.var, witness.left, witness.right) == ("x", "1", "11")


def test_tier_one_projection():
    gamma = {"x": Tier.ONE, "s": Tier.ZERO}
    proj = tier_one_projection(Store.of(x="1", s="hidden"), gamma)
    assert proj == Store.of(x="1")


def test_ni_passes_on_the_adder():
    src = load_source("add.tier")
    report = ni_suite(src.program(), src.annotations(), scheduler=RoundRobin(), trials=30, seed=1)
    assert report.passed
    assert report.trials == 30
    assert report.mode == "scheduler"
    assert report.scheduler == "round-robin"
    assert report.to_dict()["failure"] is None


def test_ni_catches_a_projection_leak():
    leaky = Program.of({"t": Assign("x", Var("s"))})
    gamma = {"x": Tier.ONE, "s": Tier.ZERO}
    report = ni_suite(leaky, gamma, scheduler=RoundRobin(), trials=20, seed=0)
    assert not report.passed
    assert report.trials == 1
    assert report.failure.reason == "tier1-projection"
    assert "'x'" in report.failure.detail


def test_ni_catches_secret_steered_loop_counts():
    src = load_source("unsafe_loop.tier")
    report = ni_suite(
        src.program(), src.annotations(), scheduler=RoundRobin(),
        trials=200, fuel=10_000, seed=7, max_len=5,
    )
    assert not report.passed
    assert report.failure.reason == "loop-count"
    assert report.failure.detail == "loop counts differ: 4 vs 3"


def test_ni_catches_mixed_termination():
    # the guard reads tier-0 data, so one store spins while the other stops
    prog = Program.of({"t": While(OpCall("gt0", (Var("s"),)), Skip())})
    report = ni_suite(
        prog, {"s": Tier.ZERO}, scheduler=RoundRobin(),
        trials=10, fuel=50, seed=0, max_len=1,
    )
    assert not report.passed
    assert report.failure.reason == "termination"
    assert "the other did not" in report.failure.detail


def test_ni_explore_mode_on_safe_fixture():
    src = load_source("intro_zero.tier")
    report = ni_suite(
        src.program(), src.annotations(), trials=25, seed=7, max_len=4,
        mode="explore", explore_max_steps=300, explore_max_states=50_000,
    )
    assert report.passed
    assert report.mode == "explore"
    assert report.scheduler is None


def test_ni_explore_mode_flags_worst_case_loops():
    src = load_source("unsafe_loop.tier")
    report = ni_suite(
        src.program(), src.annotations(), trials=200, seed=7, max_len=4,
        mode="explore", explore_max_steps=300, explore_max_states=50_000,
    )
    assert not report.passed
    assert report.trials == 1
    assert report.failure.reason == "loop-count"


def test_ni_explore_mode_flags_terminal_sets():
    leaky = Program.of({"t": Assign("x", Var("s"))})
    gamma = {"x": Tier.ONE, "s": Tier.ZERO}
    report = ni_suite(leaky, gamma, trials=20, seed=0, mode="explore")
    assert not report.passed
    assert report.failure.reason == "terminal-set"


def test_ni_explore_mode_reports_unclosed_graphs():
    src = load_source("zrange.tier")
    report = ni_suite(
        src.program(), src.annotations(), trials=5, seed=7, max_len=4,
        mode="explore", explore_max_steps=2,
    )
    assert not report.passed
    assert report.failure.reason == "fuel"


def test_ni_argument_validation():
    src = load_source("add.tier")
    with pytest.raises(ValueError):
        ni_suite(src.program(), src.annotations(), mode="scheduler")
    with pytest.raises(ValueError):
        ni_suite(src.program(), src.annotations(), mode="bogus")


# --- subword invariant -----------------------------------------------------------


def test_subword_holds_along_an_adder_run():
    src = load_source("add.tier")
    store = Store.of(x=unary(4))
    run = run_with_scheduler(store, src.program(), RoundRobin(), keep_trace=True)
    report = subword_invariant(store, scheduled_run_stores(run), src.annotations())
    assert report.passed
    assert report.steps_checked == 13
    assert report.to_dict()["violation"] is None


def test_subword_violated_by_a_growing_tier_one_var():
    src = load_source("unsafe_subword.tier")
    store = Store.of(x="0110")
    run = run_with_scheduler(store, src.program(), RoundRobin(), keep_trace=True)
    report = subword_invariant(store, scheduled_run_stores(run), src.annotations())
    assert not report.passed
    assert report.steps_checked == 1
    assert report.violation.step == 1
    assert report.violation.var == "x"
    assert report.violation.value == "10110"


def test_subword_accepts_truth_words():
    gamma = {"x": Tier.ONE}
    report = subword_invariant(Store.of(x="0101"), [(1, Store.of(x="T"))], gamma)
    assert report.passed


# --- tier preservation -----------------------------------------------------------


def test_tiers_preserved_along_adder_runs():
    src = load_source("add.tier")
    registry = default_registry()
    sig_env, diags = build_sig_env(src, registry)
    assert not diags
    report = tier_preservation(Store.of(x="11"), src.program(), src.annotations(), sig_env, registry)
    assert report.passed
    assert report.complete
    assert report.edges_checked == 7


def test_rejected_program_fails_tier_preservation_immediately():
    src = load_source("unsafe_loop.tier")
    registry = default_registry()
    sig_env, _ = build_sig_env(src, registry)
    report = tier_preservation(
        Store.of(secret="11"), src.program(), src.annotations(), sig_env, registry
    )
    assert not report.passed
    assert report.edges_checked == 1
    violation = report.violation
    assert violation.thread == "leak"
    assert violation.depth == 0
    assert violation.tiers_before == ()
    assert "while" in violation.before
    assert report.to_dict()["violation"]["thread"] == "leak"


# --- growth measurement ----------------------------------------------------------


def test_measure_growth_csv():
    src = load_source("add.tier")
    table = measure_growth(src.program(), lambda n: {"x": unary(n)}, [1, 2, 3], RoundRobin())
    assert table.to_csv() == "n,max_t,max_k,fuel_hit\n1,1,4,0\n2,2,7,0\n3,3,10,0\n"
    assert list(table.sizes()) == [1.0, 2.0, 3.0]
    assert list(table.column("max_t")) == [1.0, 2.0, 3.0]
    assert list(table.column("max_k")) == [4.0, 7.0, 10.0]
    with pytest.raises(KeyError):
        table.column("bogus")


def test_measure_growth_marks_fuel_exhaustion():
    src = load_source("spin.tier")
    table = measure_growth(src.program(), lambda n: {"x": unary(n)}, [1], RoundRobin(), fuel=40)
    assert table.rows[0].fuel_hit
    assert table.rows[0].max_steps == 40


def test_fit_recovers_exact_degrees():
    rows = tuple(GrowthRow(n, n * n, 2 * n * n + 3 * n + 1, False) for n in range(2, 12))
    steps_fit = fit_polynomial(GrowthTable(rows), column="max_k")
    loops_fit = fit_polynomial(GrowthTable(rows), column="max_t")
    assert (steps_fit.verdict, steps_fit.degree) == ("polynomial", 2)
    assert (loops_fit.verdict, loops_fit.degree) == ("polynomial", 2)
    assert steps_fit.residual < 1e-9


def test_fit_flags_exponential_growth():
    rows = tuple(GrowthRow(n, 2**n, 3 * 2**n, False) for n in range(2, 14))
    report = fit_polynomial(GrowthTable(rows))
    assert report.verdict == "superpolynomial-suspect"
    assert report.degree is None
    assert report.residual > 0.05
    assert report.to_dict()["degree"] is None


def test_fit_needs_enough_rows():
    rows = tuple(GrowthRow(n, n, n, False) for n in range(5))
    with pytest.raises(ValueError):
        fit_polynomial(GrowthTable(rows), max_degree=4)
