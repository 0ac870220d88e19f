"""Operator library: total word functions with growth-class metadata.

Operators come in three classes:

* ``neutral-predicate``: every output is one of the truth words.
* ``neutral-subword``: every output is a contiguous factor of one of the
  inputs.
* ``positive``: output length is bounded by the longest input plus a
  fixed constant (the ``growth`` field).

Every neutral operator is positive with constant 0; the class recorded
here is the strongest claim the operator honestly satisfies, and
``validate_class`` checks the claim by enumeration or sampling.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable

from .lang import DEFAULT_ALPHABET, FF, TT, Alphabet, Word, subword

NEUTRAL_PREDICATE = "neutral-predicate"
NEUTRAL_SUBWORD = "neutral-subword"
POSITIVE = "positive"

CLASSES = (NEUTRAL_PREDICATE, NEUTRAL_SUBWORD, POSITIVE)


class DuplicateOperatorError(ValueError):
    pass


class UnknownOperatorError(KeyError):
    pass


@dataclass(frozen=True)
class OperatorDef:
    """A named total function on words together with its growth class."""

    name: str
    arity: int
    fn: Callable[..., Word]
    kind: str
    growth: int = 0

    def __post_init__(self) -> None:
        if self.kind not in CLASSES:
            raise ValueError(f"unknown operator class {self.kind!r}")
        if self.arity < 0:
            raise ValueError("arity must be nonnegative")
        if self.growth < 0:
            raise ValueError("growth constant must be nonnegative")
        if self.kind != POSITIVE and self.growth != 0:
            raise ValueError("neutral operators have growth constant 0")

    @property
    def is_neutral(self) -> bool:
        return self.kind != POSITIVE

    def apply(self, *args: Word) -> Word:
        if len(args) != self.arity:
            raise TypeError(f"{self.name} expects {self.arity} arguments, got {len(args)}")
        return self.fn(*args)


@dataclass(frozen=True)
class ClassVerdict:
    """Outcome of checking an operator against its declared class."""

    ok: bool
    checked: int
    exhaustive: bool
    counterexample: tuple[Word, ...] | None = None
    output: Word | None = None


def validate_class(
    op: OperatorDef,
    max_len: int = 4,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    sample_cap: int = 20000,
    seed: int = 0,
) -> ClassVerdict:
    """Check the declared growth class on all argument tuples of words up
    to ``max_len``, falling back to a seeded random sample when the full
    product exceeds ``sample_cap`` tuples.
    """
    words = list(alphabet.words_up_to(max_len))
    total = len(words) ** op.arity
    exhaustive = total <= sample_cap
    if exhaustive:
        tuples = itertools.product(words, repeat=op.arity)
        count = total
    else:
        rng = random.Random(seed)
        tuples = (tuple(rng.choice(words) for _ in range(op.arity)) for _ in range(sample_cap))
        count = sample_cap
    for args in tuples:
        out = op.fn(*args)
        if op.kind == NEUTRAL_PREDICATE:
            good = out == TT or out == FF
        elif op.kind == NEUTRAL_SUBWORD:
            good = any(subword(out, arg) for arg in args)
        else:
            longest = max((len(a) for a in args), default=0)
            good = len(out) <= longest + op.growth
        if not good:
            return ClassVerdict(False, count, exhaustive, tuple(args), out)
    return ClassVerdict(True, count, exhaustive)


# --- the builtin library ---------------------------------------------------


def _first_digit(word: Word) -> Word:
    """The first letter of a word, with truth values read as binary digits."""
    if not word:
        return ""
    head = word[0]
    if head == TT:
        return "1"
    if head == FF:
        return "0"
    return head


def _truth(flag: bool) -> Word:
    return TT if flag else FF


def _pred(u: Word) -> Word:
    return u[1:]


def _head(u: Word) -> Word:
    return u[:1]


def _erase(u: Word) -> Word:
    return ""


def _nonempty(u: Word) -> Word:
    return _truth(u != "")


def _negate(u: Word) -> Word:
    return _truth(u == FF)


def _is_empty(u: Word) -> Word:
    return _truth(u == "")


def _equal(u: Word, v: Word) -> Word:
    return _truth(u == v)


def _not_equal(u: Word, v: Word) -> Word:
    return _truth(u != v)


def _either(u: Word, v: Word) -> Word:
    return _truth(u == TT or v == TT)


def _both(u: Word, v: Word) -> Word:
    return _truth(u == TT and v == TT)


def _bit(u: Word) -> Word:
    return _truth(_first_digit(u) == "1")


def _carry(u: Word, v: Word, w: Word) -> Word:
    ones = sum(_first_digit(x) == "1" for x in (u, v, w))
    return _truth(ones >= 2)


def _bitsum(u: Word, v: Word, w: Word) -> Word:
    ones = sum(_first_digit(x) == "1" for x in (u, v, w))
    return _truth(ones % 2 == 1)


def _concat(u: Word, v: Word) -> Word:
    return _first_digit(u) + v


def _add_one(u: Word) -> Word:
    return "1" + u


def _binary_value(u: Word) -> int:
    digits = "".join(c if c in "01" else "0" for c in u)
    return int(digits, 2) if digits else 0


def _binary_encode(value: int, width: int) -> Word:
    if width == 0:
        return ""
    return format(value, "b").zfill(width)[-width:]


def _binary_dec(u: Word) -> Word:
    value = max(_binary_value(u) - 1, 0)
    return _binary_encode(value, len(u))


def _binary_inc(u: Word) -> Word:
    value = _binary_value(u) + 1
    width = max(len(u), value.bit_length())
    return _binary_encode(value, width)


def builtins() -> tuple[OperatorDef, ...]:
    """The fixed operator library (word-family operators are resolved on
    demand by the registry and are not listed here)."""
    return (
        OperatorDef("pred", 1, _pred, NEUTRAL_SUBWORD),
        OperatorDef("head", 1, _head, NEUTRAL_SUBWORD),
        OperatorDef("sub1", 1, _pred, NEUTRAL_SUBWORD),
        OperatorDef("zero", 1, _erase, NEUTRAL_SUBWORD),
        OperatorDef("gt0", 1, _nonempty, NEUTRAL_PREDICATE),
        OperatorDef("not", 1, _negate, NEUTRAL_PREDICATE),
        OperatorDef("eq_eps", 1, _is_empty, NEUTRAL_PREDICATE),
        OperatorDef("bit", 1, _bit, NEUTRAL_PREDICATE),
        OperatorDef("eq", 2, _equal, NEUTRAL_PREDICATE),
        OperatorDef("neq", 2, _not_equal, NEUTRAL_PREDICATE),
        OperatorDef("or", 2, _either, NEUTRAL_PREDICATE),
        OperatorDef("and", 2, _both, NEUTRAL_PREDICATE),
        OperatorDef("carry", 3, _carry, NEUTRAL_PREDICATE),
        OperatorDef("bitsum", 3, _bitsum, NEUTRAL_PREDICATE),
        OperatorDef("tt", 0, lambda: TT, NEUTRAL_PREDICATE),
        OperatorDef("ff", 0, lambda: FF, NEUTRAL_PREDICATE),
        OperatorDef("add1", 1, _add_one, POSITIVE, growth=1),
        OperatorDef("concat", 2, _concat, POSITIVE, growth=1),
        OperatorDef("bdec", 1, _binary_dec, POSITIVE, growth=0),
        OperatorDef("binc", 1, _binary_inc, POSITIVE, growth=1),
    )


def _family_member(name: str) -> OperatorDef | None:
    """Resolve the word-indexed operator families.

    ``eq_<w>`` tests whether ``<w>`` is a prefix of the argument,
    ``suc_<w>`` prepends ``<w>``, and a double-quoted name is a word
    constant.  ``eq_eps`` is taken by the builtin emptiness test before
    this is consulted.
    """
    if len(name) >= 2 and name.startswith('"') and name.endswith('"'):
        word = name[1:-1]
        return OperatorDef(name, 0, lambda w=word: w, POSITIVE, growth=len(word))
    if name.startswith("eq_") and len(name) > 3:
        word = name[3:]
        return OperatorDef(name, 1, lambda u, w=word: _truth(u.startswith(w)), NEUTRAL_PREDICATE)
    if name.startswith("suc_") and len(name) > 4:
        word = name[4:]
        return OperatorDef(name, 1, lambda u, w=word: w + u, POSITIVE, growth=len(word))
    return None


class Registry:
    """Name-to-operator resolution with support for the word families.

    Registration happens up front (duplicates are rejected); resolution
    afterwards is read-only, so resolved family members are cached.
    """

    def __init__(self, defs: tuple[OperatorDef, ...] = ()):
        self._defs: dict[str, OperatorDef] = {}
        self._family_cache: dict[str, OperatorDef] = {}
        for op in defs:
            self.register(op)

    def register(self, op: OperatorDef) -> OperatorDef:
        if op.name in self._defs:
            raise DuplicateOperatorError(f"operator {op.name!r} already registered")
        self._defs[op.name] = op
        return op

    def resolve(self, name: str) -> OperatorDef:
        try:
            return self._defs[name]
        except KeyError:
            pass
        cached = self._family_cache.get(name)
        if cached is not None:
            return cached
        member = _family_member(name)
        if member is None:
            raise UnknownOperatorError(name)
        self._family_cache[name] = member
        return member

    def knows(self, name: str) -> bool:
        try:
            self.resolve(name)
        except UnknownOperatorError:
            return False
        return True

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._defs))


def default_registry() -> Registry:
    return Registry(builtins())
