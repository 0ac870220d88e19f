"""Small-step operational semantics for commands.

Expressions evaluate in one go (operators are total, unbound variables
read as the empty word).  Commands step one atomic action at a time;
each step reports the innermost rule that fired and whether it unfolded
a loop with a true guard.  The count of such unfoldings, written
``loops`` throughout, is the measure the polynomial-bound harnesses
track: it only grows on genuine loop iterations, never on bookkeeping
steps.

Conditionals and loops demand an exact truth word (``T`` or ``F``) from
their guard; any other value is a hard error rather than a silent
default, so ill-formed guards surface immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import (
    FF,
    TT,
    Assign,
    Command,
    Expr,
    If,
    OpCall,
    Seq,
    Skip,
    Store,
    Var,
    While,
    Word,
)
from .ops import Registry, default_registry


class StuckGuardError(RuntimeError):
    """A conditional or loop guard evaluated to a non-truth word."""

    def __init__(self, cmd: Command, value: Word):
        super().__init__(f"guard evaluated to {value!r}, expected {TT!r} or {FF!r}")
        self.cmd = cmd
        self.value = value


class FuelExhausted(RuntimeError):
    """A bounded run used up its step budget before terminating."""

    def __init__(self, steps: int):
        super().__init__(f"no terminal configuration within {steps} steps")
        self.steps = steps


def eval_expr(store: Store, expr: Expr, registry: Registry | None = None) -> Word:
    """The word an expression denotes in the given store."""
    registry = registry or default_registry()
    if isinstance(expr, Var):
        return store.lookup(expr.name)
    if isinstance(expr, OpCall):
        op = registry.resolve(expr.op)
        args = [eval_expr(store, a, registry) for a in expr.args]
        return op.apply(*args)
    raise TypeError(f"not an expression: {expr!r}")


@dataclass(frozen=True)
class StepOutcome:
    """One atomic step: the new store, the residual command (``None``
    when the command terminated), the innermost rule that fired, and
    whether a loop guard was unfolded true."""

    store: Store
    residual: Command | None
    rule: str
    loop_increment: int
    assigned: tuple[str, Word] | None = None


def _guard_value(store: Store, cmd: If | While, registry: Registry) -> bool:
    value = eval_expr(store, cmd.guard, registry)
    if value == TT:
        return True
    if value == FF:
        return False
    raise StuckGuardError(cmd, value)


def step_command(store: Store, cmd: Command, registry: Registry | None = None) -> StepOutcome:
    """Perform exactly one atomic step of the command."""
    registry = registry or default_registry()
    if isinstance(cmd, Skip):
        return StepOutcome(store, None, "skip", 0)
    if isinstance(cmd, Assign):
        value = eval_expr(store, cmd.expr, registry)
        return StepOutcome(store.bind(cmd.var, value), None, "assign", 0, (cmd.var, value))
    if isinstance(cmd, Seq):
        inner = step_command(store, cmd.first, registry)
        if inner.residual is None:
            residual: Command = cmd.second
        else:
            residual = Seq(inner.residual, cmd.second, cmd.span)
        return StepOutcome(inner.store, residual, inner.rule, inner.loop_increment, inner.assigned)
    if isinstance(cmd, If):
        if _guard_value(store, cmd, registry):
            return StepOutcome(store, cmd.then_branch, "if-tt", 0)
        return StepOutcome(store, cmd.else_branch, "if-ff", 0)
    if isinstance(cmd, While):
        if _guard_value(store, cmd, registry):
            return StepOutcome(store, Seq(cmd.body, cmd, cmd.span), "while-tt", 1)
        return StepOutcome(store, None, "while-ff", 0)
    raise TypeError(f"not a command: {cmd!r}")


@dataclass(frozen=True)
class TraceStep:
    """One recorded step of a sequential run."""

    index: int
    rule: str
    loops: int
    assigned: tuple[str, Word] | None
    store: Store
    residual: Command | None


@dataclass(frozen=True)
class SequentialRun:
    """Outcome of running one command to termination (or out of fuel)."""

    store: Store
    residual: Command | None
    steps: int
    loops: int
    finished: bool
    trace: tuple[TraceStep, ...] = field(repr=False, default=())
    trace_complete: bool = True


def run_sequential(
    store: Store,
    cmd: Command,
    fuel: int = 100_000,
    registry: Registry | None = None,
    keep_trace: bool = True,
    trace_cap: int = 10_000,
) -> SequentialRun:
    """Run a command deterministically for at most ``fuel`` steps.

    The trace keeps up to ``trace_cap`` steps (each with the full store,
    so exploration-sized runs can opt out via ``keep_trace=False``);
    step and loop counters always cover the whole run.
    """
    registry = registry or default_registry()
    trace: list[TraceStep] = []
    loops = 0
    steps = 0
    current: Command | None = cmd
    trace_complete = True
    while current is not None:
        if steps >= fuel:
            return SequentialRun(store, current, steps, loops, False, tuple(trace), trace_complete)
        outcome = step_command(store, current, registry)
        steps += 1
        loops += outcome.loop_increment
        store = outcome.store
        current = outcome.residual
        if keep_trace:
            if len(trace) < trace_cap:
                trace.append(
                    TraceStep(steps, outcome.rule, loops, outcome.assigned, store, current)
                )
            else:
                trace_complete = False
    return SequentialRun(store, None, steps, loops, True, tuple(trace), trace_complete)


def dump_trace(run: SequentialRun) -> str:
    """Text rendering of a trace: step index, rule, cumulative loop
    count, and the assignment performed (if any), one line per step."""
    lines = ["step\trule\tloops\tassignment"]
    for entry in run.trace:
        if entry.assigned is not None:
            var, value = entry.assigned
            shown = f"{var}={value!r}"
        else:
            shown = "-"
        lines.append(f"{entry.index}\t{entry.rule}\t{entry.loops}\t{shown}")
    if not run.trace_complete:
        lines.append(f"... trace truncated; run continued to step {run.steps}")
    return "\n".join(lines)
