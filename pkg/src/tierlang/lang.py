"""Core vocabulary for the tiered while-language.

Values are finite words over a fixed alphabet, encoded as plain Python
strings.  The truth values are the one-letter words ``T`` and ``F``.
Stores map variable names to words, commands form a small structured
language (skip, assignment, sequence, conditional, loop), and a program
is a finite set of named threads sharing one store.

Everything here is immutable and hashable so that configurations can be
used as keys during state-space exploration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

Word = str

TT: Word = "T"
FF: Word = "F"
EMPTY: Word = ""

DEFAULT_LETTERS = frozenset({"0", "1", "T", "F"})


def is_truth_value(word: Word) -> bool:
    return word == TT or word == FF


def subword(needle: Word, haystack: Word) -> bool:
    """Whether ``needle`` occurs as a contiguous factor of ``haystack``.

    The empty word is a subword of everything.
    """
    return needle in haystack


def unary(n: int) -> Word:
    """The unary encoding of a natural number: ``n`` copies of ``1``."""
    if n < 0:
        raise ValueError("unary encoding needs a natural number")
    return "1" * n


class Tier(enum.IntEnum):
    """The two-point information-flow lattice: ZERO below ONE.

    Tier ONE data may steer loops but can never grow; tier ZERO data may
    grow but must stay out of loop guards.
    """

    ZERO = 0
    ONE = 1

    def join(self, other: Tier) -> Tier:
        return Tier(max(self, other))

    def meet(self, other: Tier) -> Tier:
        return Tier(min(self, other))

    def leq(self, other: Tier) -> bool:
        return self <= other

    def __str__(self) -> str:
        return str(int(self))


def join_all(tiers: Iterable[Tier]) -> Tier:
    """Least upper bound; the empty join is ZERO."""
    out = Tier.ZERO
    for t in tiers:
        out = out.join(t)
    return out


def meet_all(tiers: Iterable[Tier]) -> Tier:
    """Greatest lower bound; the empty meet is ONE."""
    out = Tier.ONE
    for t in tiers:
        out = out.meet(t)
    return out


@dataclass(frozen=True)
class Alphabet:
    """A finite, nonempty set of one-character letters."""

    letters: frozenset[str]

    def __post_init__(self) -> None:
        if not self.letters:
            raise ValueError("alphabet must be nonempty")
        for letter in self.letters:
            if len(letter) != 1:
                raise ValueError(f"alphabet letters are single characters, got {letter!r}")

    def __contains__(self, letter: str) -> bool:
        return letter in self.letters

    def admits(self, word: Word) -> bool:
        return all(c in self.letters for c in word)

    def sorted_letters(self) -> tuple[str, ...]:
        return tuple(sorted(self.letters))

    def words_up_to(self, max_len: int) -> Iterator[Word]:
        """All words of length at most ``max_len``, shortest first."""
        letters = self.sorted_letters()
        frontier: list[Word] = [""]
        yield ""
        for _ in range(max_len):
            frontier = [w + c for w in frontier for c in letters]
            yield from frontier


DEFAULT_ALPHABET = Alphabet(DEFAULT_LETTERS)


@dataclass(frozen=True)
class Span:
    """A source position (1-based line and column) for diagnostics."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# --- expressions ----------------------------------------------------------


class Expr:
    """Base class for expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class OpCall(Expr):
    """An operator applied to argument expressions.

    Word literals and the truth constants are zero-argument calls: the
    literal ``"01"`` uses the operator name ``"01"`` including quotes,
    and ``tt`` / ``ff`` use their own names.
    """

    op: str
    args: tuple[Expr, ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)


def word_literal(word: Word, span: Span | None = None) -> OpCall:
    return OpCall('"' + word + '"', (), span)


# --- commands -------------------------------------------------------------


class Command:
    """Base class for commands."""

    __slots__ = ()


@dataclass(frozen=True)
class Skip(Command):
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign(Command):
    var: str
    expr: Expr
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq(Command):
    first: Command
    second: Command
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If(Command):
    guard: Expr
    then_branch: Command
    else_branch: Command
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While(Command):
    guard: Expr
    body: Command
    span: Span | None = field(default=None, compare=False, repr=False)


def seq_all(commands: Iterable[Command]) -> Command:
    """Right-nested sequence of the given commands; empty gives skip."""
    items = list(commands)
    if not items:
        return Skip()
    out = items[-1]
    for cmd in reversed(items[:-1]):
        out = Seq(cmd, out)
    return out


def free_vars(node: Expr | Command | "Program") -> frozenset[str]:
    """Variable names occurring in an expression, command, or program."""
    out: set[str] = set()
    stack: list[Expr | Command] = []
    if isinstance(node, Program):
        stack.extend(cmd for _, cmd in node.threads)
    else:
        stack.append(node)
    while stack:
        item = stack.pop()
        if isinstance(item, Var):
            out.add(item.name)
        elif isinstance(item, OpCall):
            stack.extend(item.args)
        elif isinstance(item, Skip):
            pass
        elif isinstance(item, Assign):
            out.add(item.var)
            stack.append(item.expr)
        elif isinstance(item, Seq):
            stack.append(item.first)
            stack.append(item.second)
        elif isinstance(item, If):
            stack.append(item.guard)
            stack.append(item.then_branch)
            stack.append(item.else_branch)
        elif isinstance(item, While):
            stack.append(item.guard)
            stack.append(item.body)
        else:
            raise TypeError(f"not an AST node: {item!r}")
    return frozenset(out)


def assigned_vars(node: Command | "Program") -> frozenset[str]:
    """Variables written by some assignment in the command or program."""
    out: set[str] = set()
    stack: list[Command] = []
    if isinstance(node, Program):
        stack.extend(cmd for _, cmd in node.threads)
    else:
        stack.append(node)
    while stack:
        item = stack.pop()
        if isinstance(item, Assign):
            out.add(item.var)
        elif isinstance(item, Seq):
            stack.extend((item.first, item.second))
        elif isinstance(item, If):
            stack.extend((item.then_branch, item.else_branch))
        elif isinstance(item, While):
            stack.append(item.body)
    return frozenset(out)


def ops_used(node: Expr | Command | "Program") -> frozenset[str]:
    """Operator names occurring in the expression, command, or program."""
    out: set[str] = set()
    stack: list[Expr | Command] = []
    if isinstance(node, Program):
        stack.extend(cmd for _, cmd in node.threads)
    else:
        stack.append(node)
    while stack:
        item = stack.pop()
        if isinstance(item, OpCall):
            out.add(item.op)
            stack.extend(item.args)
        elif isinstance(item, Assign):
            stack.append(item.expr)
        elif isinstance(item, Seq):
            stack.extend((item.first, item.second))
        elif isinstance(item, If):
            stack.extend((item.guard, item.then_branch, item.else_branch))
        elif isinstance(item, While):
            stack.extend((item.guard, item.body))
    return frozenset(out)


# --- stores ---------------------------------------------------------------


class Store:
    """An immutable map from variable names to words.

    Unbound variables read as the empty word, and bindings to the empty
    word are normalized away, so two stores that agree on every lookup
    compare (and hash) equal.
    """

    __slots__ = ("_bindings", "_hash")

    def __init__(self, bindings: Mapping[str, Word] | Iterable[tuple[str, Word]] | None = None):
        data: dict[str, Word] = {}
        if bindings is not None:
            items = bindings.items() if isinstance(bindings, Mapping) else bindings
            for name, word in items:
                if word:
                    data[name] = word
        object.__setattr__(self, "_bindings", data)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def of(cls, **bindings: Word) -> Store:
        return cls(bindings)

    def lookup(self, var: str) -> Word:
        return self._bindings.get(var, EMPTY)

    def bind(self, var: str, word: Word) -> Store:
        data = dict(self._bindings)
        if word:
            data[var] = word
        else:
            data.pop(var, None)
        return Store(data)

    def bind_many(self, updates: Mapping[str, Word]) -> Store:
        out = self
        for name, word in updates.items():
            out = out.bind(name, word)
        return out

    def restrict(self, variables: Iterable[str]) -> Store:
        keep = set(variables)
        return Store({k: v for k, v in self._bindings.items() if k in keep})

    def items(self) -> list[tuple[str, Word]]:
        return sorted(self._bindings.items())

    def bound_names(self) -> frozenset[str]:
        return frozenset(self._bindings)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Store):
            return NotImplemented
        return self._bindings == other._bindings

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(frozenset(self._bindings.items()))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.items())
        return f"Store({inner})"

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Store is immutable")


EMPTY_STORE = Store()


# --- programs -------------------------------------------------------------


@dataclass(frozen=True)
class Program:
    """A finite set of named threads, each a command over the shared store.

    Threads are kept sorted by name so that equal programs compare equal
    regardless of construction order.
    """

    threads: tuple[tuple[str, Command], ...]

    def __post_init__(self) -> None:
        names = [tid for tid, _ in self.threads]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate thread names: {names}")
        ordered = tuple(sorted(self.threads))
        object.__setattr__(self, "threads", ordered)

    @classmethod
    def of(cls, threads: Mapping[str, Command]) -> Program:
        return cls(tuple(threads.items()))

    @classmethod
    def single(cls, command: Command, tid: str = "main") -> Program:
        return cls(((tid, command),))

    def thread_ids(self) -> tuple[str, ...]:
        return tuple(tid for tid, _ in self.threads)

    def command(self, tid: str) -> Command:
        for name, cmd in self.threads:
            if name == tid:
                return cmd
        raise KeyError(tid)

    def without(self, tid: str) -> Program:
        if tid not in self.thread_ids():
            raise KeyError(tid)
        return Program(tuple((n, c) for n, c in self.threads if n != tid))

    def updated(self, tid: str, command: Command) -> Program:
        if tid not in self.thread_ids():
            raise KeyError(tid)
        return Program(tuple((n, command if n == tid else c) for n, c in self.threads))

    @property
    def empty(self) -> bool:
        return not self.threads
