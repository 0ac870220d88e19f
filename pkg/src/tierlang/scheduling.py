"""Multi-threaded execution: global steps, schedulers, and exploration.

A global configuration is a shared store plus a pool of named threads.
One global step picks a live thread and advances it one atomic step;
threads that terminate leave the pool.  The ``loops`` counter accumulates
loop unfoldings across all threads and the ``steps`` counter counts
global steps, so ``loops <= steps`` always.

Schedulers are deterministic: a choice function over the current pool
and store plus private state.  A scheduler is *quiet* when its choice
never depends on tier-0 data; the flag on each scheduler records the
claim and ``quietness_test`` probes it behaviorally by running the same
program from stores that agree on tier-1 variables only.

``explore`` enumerates every interleaving up to bounded depth, memoizing
on the (store, pool) configuration.  A configuration revisited along one
path is a cycle, which witnesses a non-terminating schedule.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .lang import Alphabet, DEFAULT_ALPHABET, Program, Store, Tier, Word
from .ops import Registry, default_registry
from .semantics import StuckGuardError, step_command


@dataclass(frozen=True)
class GlobalConfig:
    store: Store
    program: Program
    loops: int = 0
    steps: int = 0

    @property
    def terminal(self) -> bool:
        return self.program.empty


@dataclass(frozen=True)
class GlobalStep:
    """One global step: the new configuration plus what happened."""

    config: GlobalConfig
    thread: str
    rule: str
    stopped: bool
    assigned: tuple[str, Word] | None = None


def step_global(config: GlobalConfig, tid: str, registry: Registry | None = None) -> GlobalStep:
    """Advance the named thread one step (it must be in the pool)."""
    registry = registry or default_registry()
    cmd = config.program.command(tid)
    outcome = step_command(config.store, cmd, registry)
    if outcome.residual is None:
        pool = config.program.without(tid)
        stopped = True
    else:
        pool = config.program.updated(tid, outcome.residual)
        stopped = False
    nxt = GlobalConfig(
        outcome.store, pool, config.loops + outcome.loop_increment, config.steps + 1
    )
    return GlobalStep(nxt, tid, outcome.rule, stopped, outcome.assigned)


# --- schedulers ---------------------------------------------------------------


class Scheduler:
    """Deterministic thread choice with private state.

    ``quiet`` is the scheduler's claim that its choices ignore tier-0
    data; it is what ``quietness_test`` puts on trial.
    """

    name = "scheduler"
    quiet = True

    def fresh_state(self) -> object:
        return None

    def choose(self, program: Program, store: Store, state: object) -> tuple[str, object]:
        raise NotImplementedError


class RoundRobin(Scheduler):
    """Cycle through live threads in name order."""

    name = "round-robin"
    quiet = True

    def choose(self, program: Program, store: Store, state: object) -> tuple[str, object]:
        tids = program.thread_ids()
        last = state
        if isinstance(last, str):
            later = [t for t in tids if t > last]
            chosen = later[0] if later else tids[0]
        else:
            chosen = tids[0]
        return chosen, chosen


class FirstAlive(Scheduler):
    """Always run the alphabetically first live thread.

    Deterministic and quiet but unfair: it starves every other thread
    while its favorite can still move.
    """

    name = "first-alive"
    quiet = True

    def choose(self, program: Program, store: Store, state: object) -> tuple[str, object]:
        return program.thread_ids()[0], None


class SeededRandom(Scheduler):
    """Pseudo-random choice from a seed; quiet because the draw ignores
    the store entirely."""

    name = "random"
    quiet = True

    def __init__(self, seed: int = 0):
        self.seed = seed

    def fresh_state(self) -> object:
        return random.Random(self.seed)

    def choose(self, program: Program, store: Store, state: object) -> tuple[str, object]:
        assert isinstance(state, random.Random)
        tids = program.thread_ids()
        return state.choice(tids), state


class StorePeek(Scheduler):
    """Negative control: pick a thread by the length of one variable's
    value.  When that variable is tier 0 the scheduler is not quiet, and
    the quietness test should expose it."""

    quiet = False

    def __init__(self, var: str):
        self.var = var
        self.name = f"peek-{var}"

    def choose(self, program: Program, store: Store, state: object) -> tuple[str, object]:
        tids = program.thread_ids()
        return tids[len(store.lookup(self.var)) % len(tids)], None


def named_schedulers(seed: int = 0) -> dict[str, Scheduler]:
    return {
        "round-robin": RoundRobin(),
        "first-alive": FirstAlive(),
        "random": SeededRandom(seed),
    }


# --- scheduled runs --------------------------------------------------------------


@dataclass(frozen=True)
class GlobalTraceStep:
    index: int
    thread: str
    rule: str
    loops: int
    assigned: tuple[str, Word] | None
    store: Store


@dataclass(frozen=True)
class ScheduledRun:
    store: Store
    residual: Program
    steps: int
    loops: int
    finished: bool
    choices: tuple[str, ...]
    trace: tuple[GlobalTraceStep, ...] = field(repr=False, default=())


def run_with_scheduler(
    store: Store,
    program: Program,
    scheduler: Scheduler,
    fuel: int = 100_000,
    registry: Registry | None = None,
    keep_trace: bool = False,
    trace_cap: int = 10_000,
) -> ScheduledRun:
    """Drive the pool with the scheduler until it empties or fuel runs out."""
    registry = registry or default_registry()
    config = GlobalConfig(store, program)
    state = scheduler.fresh_state()
    choices: list[str] = []
    trace: list[GlobalTraceStep] = []
    while not config.terminal:
        if config.steps >= fuel:
            return ScheduledRun(
                config.store, config.program, config.steps, config.loops,
                False, tuple(choices), tuple(trace),
            )
        tid, state = scheduler.choose(config.program, config.store, state)
        step = step_global(config, tid, registry)
        config = step.config
        choices.append(tid)
        if keep_trace and len(trace) < trace_cap:
            trace.append(
                GlobalTraceStep(
                    config.steps, tid, step.rule, config.loops, step.assigned, config.store
                )
            )
    return ScheduledRun(
        config.store, config.program, config.steps, config.loops,
        True, tuple(choices), tuple(trace),
    )


def dump_global_trace(run: ScheduledRun) -> str:
    lines = ["step\tthread\trule\tloops\tassignment"]
    for entry in run.trace:
        if entry.assigned is not None:
            var, value = entry.assigned
            shown = f"{var}={value!r}"
        else:
            shown = "-"
        lines.append(f"{entry.index}\t{entry.thread}\t{entry.rule}\t{entry.loops}\t{shown}")
    return "\n".join(lines)


# --- exhaustive exploration --------------------------------------------------------


@dataclass(frozen=True)
class ExplorationReport:
    """What bounded exhaustive interleaving found.

    ``complete`` means no path was cut off by the depth or state caps;
    with ``cycle_found`` false as well, every schedule terminates, and
    the maxima are exact over all interleavings.  A revisited
    configuration along one path (a cycle) witnesses an infinite
    schedule, in which case the maxima are reported as ``None``.
    """

    terminal_stores: frozenset[Store]
    max_steps_terminating: int | None
    max_loops_terminating: int | None
    cycle_found: bool
    complete: bool
    visited_states: int
    stuck_states: int

    @property
    def strongly_terminating(self) -> bool:
        return self.complete and not self.cycle_found

    def to_dict(self) -> dict:
        return {
            "terminal_stores": [dict(s.items()) for s in sorted(
                self.terminal_stores, key=lambda s: s.items()
            )],
            "max_steps_terminating": self.max_steps_terminating,
            "max_loops_terminating": self.max_loops_terminating,
            "cycle_found": self.cycle_found,
            "complete": self.complete,
            "strongly_terminating": self.strongly_terminating,
            "visited_states": self.visited_states,
            "stuck_states": self.stuck_states,
        }


def explore(
    store: Store,
    program: Program,
    registry: Registry | None = None,
    max_steps: int = 200,
    max_states: int = 200_000,
) -> ExplorationReport:
    """Enumerate all interleavings, memoizing on (store, pool) states."""
    registry = registry or default_registry()
    root = (store, program)
    ids: dict[tuple[Store, Program], int] = {root: 0}
    nodes: list[tuple[Store, Program]] = [root]
    succ: dict[int, tuple[tuple[int, int], ...]] = {}
    depth = {0: 0}
    terminal: set[int] = set()
    stuck: set[int] = set()
    complete = True

    frontier: deque[int] = deque((0,))
    while frontier:
        nid = frontier.popleft()
        node_store, pool = nodes[nid]
        if pool.empty:
            terminal.add(nid)
            succ[nid] = ()
            continue
        if depth[nid] >= max_steps:
            complete = False
            succ[nid] = ()
            continue
        edges: list[tuple[int, int]] = []
        config = GlobalConfig(node_store, pool)
        for tid in pool.thread_ids():
            try:
                step = step_global(config, tid, registry)
            except StuckGuardError:
                stuck.add(nid)
                continue
            key = (step.config.store, step.config.program)
            child = ids.get(key)
            if child is None:
                if len(nodes) >= max_states:
                    complete = False
                    continue
                child = len(nodes)
                ids[key] = child
                nodes.append(key)
                depth[child] = depth[nid] + 1
                frontier.append(child)
            # The base config above starts at loop count 0, so the new
            # config's count is exactly this edge's loop increment.
            edges.append((child, step.config.loops))
        succ[nid] = tuple(edges)

    cycle_found = _has_cycle(succ)
    max_k: int | None = None
    max_t: int | None = None
    if not cycle_found:
        max_k, max_t = _longest_paths(succ, terminal)
    return ExplorationReport(
        terminal_stores=frozenset(nodes[n][0] for n in terminal),
        max_steps_terminating=max_k,
        max_loops_terminating=max_t,
        cycle_found=cycle_found,
        complete=complete and not stuck,
        visited_states=len(nodes),
        stuck_states=len(stuck),
    )


def _has_cycle(succ: dict[int, tuple[tuple[int, int], ...]]) -> bool:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in succ}
    for start in succ:
        if color[start] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            node, idx = stack[-1]
            children = succ[node]
            if idx == len(children):
                color[node] = BLACK
                stack.pop()
                continue
            stack[-1] = (node, idx + 1)
            child = children[idx][0]
            if color[child] == GRAY:
                return True
            if color[child] == WHITE:
                color[child] = GRAY
                stack.append((child, 0))
    return False


def _longest_paths(
    succ: dict[int, tuple[tuple[int, int], ...]], terminal: set[int]
) -> tuple[int | None, int | None]:
    """Longest step count and loop count over paths from node 0 to a
    terminal node, on an acyclic graph.  ``None`` when no explored path
    from the root terminates."""
    memo_k: dict[int, int | None] = {}
    memo_t: dict[int, int | None] = {}

    order: list[int] = []
    seen: set[int] = set()
    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for child, _ in succ[node]:
            if child not in seen:
                stack.append((child, False))

    for node in order:
        if node in terminal:
            memo_k[node] = 0
            memo_t[node] = 0
            continue
        best_k: int | None = None
        best_t: int | None = None
        for child, inc in succ[node]:
            ck = memo_k.get(child)
            ct = memo_t.get(child)
            if ck is None or ct is None:
                continue
            cand_k = 1 + ck
            cand_t = inc + ct
            if best_k is None or cand_k > best_k:
                best_k = cand_k
            if best_t is None or cand_t > best_t:
                best_t = cand_t
        memo_k[node] = best_k
        memo_t[node] = best_t
    return memo_k.get(0), memo_t.get(0)


# --- store pairs and quietness -------------------------------------------------------


def random_word(rng: random.Random, alphabet: Alphabet = DEFAULT_ALPHABET, max_len: int = 6) -> Word:
    letters = alphabet.sorted_letters()
    length = rng.randint(0, max_len)
    return "".join(rng.choice(letters) for _ in range(length))


def random_equiv_stores(
    gamma: dict[str, Tier],
    variables: Iterable[str],
    rng: random.Random,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    max_len: int = 6,
) -> tuple[Store, Store]:
    """Two stores agreeing on every tier-1 variable and drawing tier-0
    values independently."""
    left: dict[str, Word] = {}
    right: dict[str, Word] = {}
    for var in sorted(set(variables)):
        tier = gamma.get(var)
        if tier is None:
            raise KeyError(f"no tier for variable {var!r}")
        if tier == Tier.ONE:
            value = random_word(rng, alphabet, max_len)
            left[var] = value
            right[var] = value
        else:
            left[var] = random_word(rng, alphabet, max_len)
            right[var] = random_word(rng, alphabet, max_len)
    return Store(left), Store(right)


@dataclass(frozen=True)
class QuietnessReport:
    passed: bool
    trials: int
    scheduler: str
    divergence: tuple[int, int, str, str] | None = None  # trial, step, choice_a, choice_b

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "scheduler": self.scheduler,
            "divergence": list(self.divergence) if self.divergence else None,
        }


def quietness_test(
    scheduler: Scheduler,
    program: Program,
    gamma: dict[str, Tier],
    trials: int = 100,
    fuel: int = 100_000,
    registry: Registry | None = None,
    seed: int = 0,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    max_len: int = 6,
) -> QuietnessReport:
    """Probe the scheduler's quietness claim on one program.

    Each trial runs the program from two stores that agree exactly on
    the tier-1 variables and compares the choice sequences; a divergence
    in the common prefix means some choice read tier-0 data.  Meaningful
    for programs whose tier-1 state evolves identically from equivalent
    stores (safe programs).
    """
    registry = registry or default_registry()
    rng = random.Random(seed)
    from .lang import free_vars  # local import keeps module load order simple

    variables = sorted(free_vars(program))
    for trial in range(trials):
        a, b = random_equiv_stores(gamma, variables, rng, alphabet, max_len)
        run_a = run_with_scheduler(a, program, scheduler, fuel, registry)
        run_b = run_with_scheduler(b, program, scheduler, fuel, registry)
        for i, (ca, cb) in enumerate(zip(run_a.choices, run_b.choices)):
            if ca != cb:
                return QuietnessReport(False, trial + 1, scheduler.name, (trial, i, ca, cb))
    return QuietnessReport(True, trials, scheduler.name)
