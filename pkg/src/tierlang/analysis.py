"""Empirical harnesses for the guarantees the type system promises.

* ``ni_suite`` probes non-interference: runs from stores that agree on
  tier-1 variables must agree on tier-1 results, loop counts, and (under
  one fixed deterministic scheduler) step counts.
* ``subword_invariant`` checks that tier-1 variables only ever hold
  truth words or contiguous factors of the initial tier-1 values.
* ``measure_growth`` and ``fit_polynomial`` chart how step and loop
  counts scale with input size and estimate the polynomial degree.

These are test harnesses, not proofs: they sample or enumerate within
stated bounds and report the first counterexample found.
"""

from __future__ import annotations

import io
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .lang import (
    DEFAULT_ALPHABET,
    Alphabet,
    Program,
    Store,
    Tier,
    Word,
    free_vars,
    is_truth_value,
    subword,
)
from .ops import Registry, default_registry
from .parser import pretty_command
from .scheduling import (
    ExplorationReport,
    GlobalConfig,
    Scheduler,
    ScheduledRun,
    explore,
    random_equiv_stores,
    run_with_scheduler,
    step_global,
)
from .semantics import StuckGuardError
from .typecheck import BOTH_TIERS, SigEnv, command_tiers

TierEnv = Mapping[str, Tier]


def tier_one_vars(gamma: TierEnv) -> tuple[str, ...]:
    return tuple(sorted(v for v, t in gamma.items() if t == Tier.ONE))


def tier_one_projection(store: Store, gamma: TierEnv) -> Store:
    return store.restrict(tier_one_vars(gamma))


@dataclass(frozen=True)
class EquivWitness:
    """Why two stores are not tier-1 equivalent."""

    var: str
    left: Word
    right: Word


def store_equiv(gamma: TierEnv, left: Store, right: Store) -> EquivWitness | None:
    """``None`` when the stores agree on every tier-1 variable, else the
    first disagreeing variable in name order."""
    for var in tier_one_vars(gamma):
        a, b = left.lookup(var), right.lookup(var)
        if a != b:
            return EquivWitness(var, a, b)
    return None


# --- non-interference ------------------------------------------------------------


@dataclass(frozen=True)
class NiFailure:
    trial: int
    reason: str  # "tier1-projection" | "loop-count" | "step-count" | "terminal-set" | "fuel"
    detail: str


@dataclass(frozen=True)
class NiReport:
    passed: bool
    trials: int
    mode: str
    scheduler: str | None
    failure: NiFailure | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "mode": self.mode,
            "scheduler": self.scheduler,
            "failure": None
            if self.failure is None
            else {
                "trial": self.failure.trial,
                "reason": self.failure.reason,
                "detail": self.failure.detail,
            },
        }


def _compare_runs(gamma: TierEnv, a: ScheduledRun, b: ScheduledRun, trial: int) -> NiFailure | None:
    """Both runs used the same deterministic scheduler, so they must
    stay in lockstep on everything tier-1 visible.  Runs that both hit
    the fuel bound are compared at that common horizon; one run
    terminating without the other is itself a temporal divergence."""
    if a.finished != b.finished:
        return NiFailure(
            trial,
            "termination",
            f"one run terminated ({a.steps} vs {b.steps} steps), the other did not",
        )
    witness = store_equiv(gamma, a.store, b.store)
    if witness is not None:
        return NiFailure(
            trial,
            "tier1-projection",
            f"final values of {witness.var!r} differ: {witness.left!r} vs {witness.right!r}",
        )
    if a.loops != b.loops:
        return NiFailure(trial, "loop-count", f"loop counts differ: {a.loops} vs {b.loops}")
    if a.steps != b.steps:
        return NiFailure(trial, "step-count", f"step counts differ: {a.steps} vs {b.steps}")
    return None


def ni_suite(
    program: Program,
    gamma: TierEnv,
    scheduler: Scheduler | None = None,
    trials: int = 200,
    fuel: int = 100_000,
    registry: Registry | None = None,
    seed: int = 0,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    max_len: int = 6,
    mode: str = "scheduler",
    explore_max_steps: int = 200,
    explore_max_states: int = 200_000,
) -> NiReport:
    """Randomized non-interference probe.

    ``scheduler`` mode runs each pair of tier-1-equivalent stores under
    one fixed deterministic scheduler and demands equal tier-1 results,
    equal loop counts, and equal step counts; non-terminating runs are
    compared at the shared fuel horizon.  ``explore`` mode compares the
    terminal tier-1 outcome sets and worst-case loop counts across every
    interleaving of both runs; it needs the state graph to close within
    the given bounds.
    """
    registry = registry or default_registry()
    rng = random.Random(seed)
    variables = sorted(free_vars(program))
    if mode == "scheduler":
        if scheduler is None:
            raise ValueError("scheduler mode needs a scheduler")
        for trial in range(trials):
            a, b = random_equiv_stores(gamma, variables, rng, alphabet, max_len)
            run_a = run_with_scheduler(a, program, scheduler, fuel, registry)
            run_b = run_with_scheduler(b, program, scheduler, fuel, registry)
            failure = _compare_runs(gamma, run_a, run_b, trial)
            if failure is not None:
                return NiReport(False, trial + 1, mode, scheduler.name, failure)
        return NiReport(True, trials, mode, scheduler.name)
    if mode == "explore":
        for trial in range(trials):
            a, b = random_equiv_stores(gamma, variables, rng, alphabet, max_len)
            failure = _compare_explorations(
                program, gamma, a, b, trial, registry, explore_max_steps, explore_max_states
            )
            if failure is not None:
                return NiReport(False, trial + 1, mode, None, failure)
        return NiReport(True, trials, mode, None)
    raise ValueError(f"unknown mode {mode!r}")


def _outcome_set(
    report: ExplorationReport, gamma: TierEnv
) -> frozenset[Store]:
    return frozenset(tier_one_projection(s, gamma) for s in report.terminal_stores)


def _compare_explorations(
    program: Program,
    gamma: TierEnv,
    a: Store,
    b: Store,
    trial: int,
    registry: Registry,
    max_steps: int,
    max_states: int,
) -> NiFailure | None:
    rep_a = explore(a, program, registry, max_steps, max_states)
    rep_b = explore(b, program, registry, max_steps, max_states)
    if not (rep_a.complete and rep_b.complete):
        return NiFailure(
            trial, "fuel", "exploration did not close within bounds; raise them for this program"
        )
    if rep_a.cycle_found != rep_b.cycle_found:
        return NiFailure(
            trial,
            "termination",
            f"one side can loop forever, the other cannot "
            f"(cycles: {rep_a.cycle_found} vs {rep_b.cycle_found})",
        )
    set_a = _outcome_set(rep_a, gamma)
    set_b = _outcome_set(rep_b, gamma)
    if set_a != set_b:
        return NiFailure(
            trial,
            "terminal-set",
            f"tier-1 outcome sets differ: {sorted(s.items() for s in set_a)} vs "
            f"{sorted(s.items() for s in set_b)}",
        )
    if rep_a.max_loops_terminating != rep_b.max_loops_terminating:
        return NiFailure(
            trial,
            "loop-count",
            f"worst-case loop counts differ: {rep_a.max_loops_terminating} vs "
            f"{rep_b.max_loops_terminating}",
        )
    return None


# --- subword invariant ------------------------------------------------------------


@dataclass(frozen=True)
class SubwordViolation:
    step: int
    var: str
    value: Word


@dataclass(frozen=True)
class SubwordReport:
    passed: bool
    steps_checked: int
    violation: SubwordViolation | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "steps_checked": self.steps_checked,
            "violation": None
            if self.violation is None
            else {
                "step": self.violation.step,
                "var": self.violation.var,
                "value": self.violation.value,
            },
        }


def subword_invariant(
    initial: Store,
    stores: Iterable[tuple[int, Store]],
    gamma: TierEnv,
) -> SubwordReport:
    """Check that along a run every tier-1 value is a truth word or a
    contiguous factor of some initial tier-1 value.

    ``stores`` yields (step index, store) pairs; pair the initial store
    as step 0 yourself if it should be checked too.
    """
    ones = tier_one_vars(gamma)
    sources = [initial.lookup(v) for v in ones]
    checked = 0
    for step, store in stores:
        checked += 1
        for var in ones:
            value = store.lookup(var)
            if is_truth_value(value):
                continue
            if any(subword(value, src) for src in sources):
                continue
            return SubwordReport(False, checked, SubwordViolation(step, var, value))
    return SubwordReport(True, checked)


def scheduled_run_stores(run: ScheduledRun) -> list[tuple[int, Store]]:
    return [(entry.index, entry.store) for entry in run.trace]


# --- tier preservation ---------------------------------------------------------------


@dataclass(frozen=True)
class TierDropViolation:
    """An edge where a thread's command lost typing or climbed tiers."""

    thread: str
    depth: int
    before: str
    after: str | None
    tiers_before: tuple[Tier, ...]
    tiers_after: tuple[Tier, ...]


@dataclass(frozen=True)
class TierPreservationReport:
    passed: bool
    edges_checked: int
    complete: bool
    violation: TierDropViolation | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "edges_checked": self.edges_checked,
            "complete": self.complete,
            "violation": None
            if self.violation is None
            else {
                "thread": self.violation.thread,
                "depth": self.violation.depth,
                "before": self.violation.before,
                "after": self.violation.after,
                "tiers_before": [str(t) for t in self.violation.tiers_before],
                "tiers_after": [str(t) for t in self.violation.tiers_after],
            },
        }


def tier_preservation(
    store: Store,
    program: Program,
    gamma: TierEnv,
    sig_env: SigEnv,
    registry: Registry | None = None,
    max_steps: int = 200,
    max_states: int = 200_000,
) -> TierPreservationReport:
    """Walk every reachable configuration and check that stepping a
    thread never makes its command harder to type.

    For each edge the stepped thread's residual must still check, at a
    tier no higher than the lowest tier its predecessor checked at.  A
    predecessor that does not check at all is reported immediately, so
    a rejected program fails at depth zero.  The walk covers every
    interleaving within the bounds; ``complete`` says whether it closed.
    """
    registry = registry or default_registry()
    tier_cache: dict = {}

    def tiers_of(cmd) -> frozenset[Tier]:
        cached = tier_cache.get(cmd)
        if cached is None:
            cached = command_tiers(gamma, sig_env, registry, cmd)
            tier_cache[cmd] = cached
        return cached

    start = GlobalConfig(store, program)
    seen = {(store, program)}
    frontier = deque([start])
    edges = 0
    complete = True
    while frontier:
        config = frontier.popleft()
        if config.steps >= max_steps:
            complete = False
            continue
        for tid in config.program.thread_ids():
            before_cmd = config.program.command(tid)
            before = tiers_of(before_cmd)
            try:
                step = step_global(config, tid, registry)
            except StuckGuardError:
                continue
            edges += 1
            after_cmd = None if step.stopped else step.config.program.command(tid)
            after = BOTH_TIERS if after_cmd is None else tiers_of(after_cmd)
            if not before or not after or min(after) > min(before):
                return TierPreservationReport(
                    False,
                    edges,
                    complete,
                    TierDropViolation(
                        tid,
                        config.steps,
                        pretty_command(before_cmd),
                        None if after_cmd is None else pretty_command(after_cmd),
                        tuple(sorted(before)),
                        tuple(sorted(after)),
                    ),
                )
            key = (step.config.store, step.config.program)
            if key not in seen:
                if len(seen) >= max_states:
                    complete = False
                    continue
                seen.add(key)
                frontier.append(step.config)
    return TierPreservationReport(True, edges, complete)


# --- growth measurement -------------------------------------------------------------


@dataclass(frozen=True)
class GrowthRow:
    n: int
    max_loops: int
    max_steps: int
    fuel_hit: bool


@dataclass(frozen=True)
class GrowthTable:
    rows: tuple[GrowthRow, ...]

    def sizes(self) -> np.ndarray:
        return np.array([r.n for r in self.rows], dtype=float)

    def column(self, name: str) -> np.ndarray:
        if name == "max_t":
            return np.array([r.max_loops for r in self.rows], dtype=float)
        if name == "max_k":
            return np.array([r.max_steps for r in self.rows], dtype=float)
        raise KeyError(name)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("n,max_t,max_k,fuel_hit\n")
        for r in self.rows:
            out.write(f"{r.n},{r.max_loops},{r.max_steps},{int(r.fuel_hit)}\n")
        return out.getvalue()


def measure_growth(
    program: Program,
    input_gen: Callable[[int], Mapping[str, Word]],
    sizes: Sequence[int],
    scheduler: Scheduler,
    fuel: int = 1_000_000,
    registry: Registry | None = None,
) -> GrowthTable:
    """Run the program at each input size and record loop and step counts.

    A fuel-exhausted run is recorded with the counts reached so far and
    ``fuel_hit`` set, so a diverging program still produces a table.
    """
    registry = registry or default_registry()
    rows = []
    for n in sizes:
        store = Store(dict(input_gen(n)))
        run = run_with_scheduler(store, program, scheduler, fuel, registry)
        rows.append(GrowthRow(n, run.loops, run.steps, not run.finished))
    return GrowthTable(tuple(rows))


@dataclass(frozen=True)
class FitReport:
    verdict: str  # "polynomial" | "superpolynomial-suspect"
    degree: int | None
    coefficients: tuple[float, ...]
    residual: float
    column: str

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "degree": self.degree,
            "coefficients": list(self.coefficients),
            "residual": self.residual,
            "column": self.column,
        }


def fit_polynomial(
    table: GrowthTable,
    max_degree: int = 4,
    column: str = "max_k",
    threshold: float = 0.05,
) -> FitReport:
    """Smallest polynomial degree whose least-squares fit has relative
    RMS error below ``threshold`` on the top half of the sizes.

    The top-half restriction makes the check about asymptotics: small
    sizes carry constant overhead that even a correct degree will not
    match.  When no degree up to ``max_degree`` fits, the verdict is
    ``superpolynomial-suspect`` and the best attempt is reported.
    """
    if len(table.rows) < max_degree + 2:
        raise ValueError(f"need at least {max_degree + 2} rows to fit degree {max_degree}")
    xs = table.sizes()
    ys = table.column(column)
    half = len(xs) // 2
    top_x, top_y = xs[half:], ys[half:]
    best: FitReport | None = None
    for degree in range(1, max_degree + 1):
        coeffs = np.polyfit(xs, ys, degree)
        predicted = np.polyval(coeffs, top_x)
        scale = np.maximum(np.abs(top_y), 1.0)
        residual = float(np.sqrt(np.mean(((predicted - top_y) / scale) ** 2)))
        report = FitReport("polynomial", degree, tuple(float(c) for c in coeffs), residual, column)
        if residual < threshold:
            return report
        if best is None or residual < best.residual:
            best = report
    assert best is not None
    return FitReport("superpolynomial-suspect", None, best.coefficients, best.residual, column)
