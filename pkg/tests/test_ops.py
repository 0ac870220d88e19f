"""Built-in operators: exact values, growth classes, family resolution."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tierlang import OperatorDef, Registry, builtins, default_registry, validate_class
from tierlang.ops import (
    NEUTRAL_PREDICATE,
    NEUTRAL_SUBWORD,
    POSITIVE,
    DuplicateOperatorError,
    UnknownOperatorError,
)

words = st.text(alphabet="01TF", max_size=6)
reg = default_registry()


def ap(name, *args):
    return reg.resolve(name).apply(*args)


# --- exact values, worked out by hand ----------------------------------------


def test_word_shrinkers():
    assert ap("pred", "101") == "01"
    assert ap("pred", "") == ""
    assert ap("head", "101") == "1"
    assert ap("head", "") == ""
    assert ap("sub1", "111") == "11"
    assert ap("zero", "101") == ""


def test_predicates():
    assert ap("gt0", "10") == "T"
    assert ap("gt0", "0") == "T"  # any nonempty word counts as positive
    assert ap("gt0", "") == "F"
    assert ap("eq_eps", "") == "T"
    assert ap("eq_eps", "0") == "F"
    assert ap("not", "F") == "T"
    assert ap("not", "T") == "F"
    assert ap("not", "10") == "F"
    assert ap("eq", "10", "10") == "T"
    assert ap("eq", "10", "1") == "F"
    assert ap("neq", "10", "1") == "T"
    assert ap("or", "T", "F") == "T"
    assert ap("or", "F", "F") == "F"
    assert ap("and", "T", "T") == "T"
    assert ap("and", "T", "F") == "F"


def test_first_digit_view():
    # T counts as the digit 1 and F as 0, so predicates can feed
    # arithmetic ops directly.
    assert ap("bit", "10") == "T"
    assert ap("bit", "01") == "F"
    assert ap("bit", "T") == "T"
    assert ap("bit", "F") == "F"
    assert ap("bit", "") == "F"


def test_binary_adder_helpers():
    # carry = majority, bitsum = parity of the three first digits
    assert ap("carry", "1", "1", "0") == "T"
    assert ap("carry", "1", "0", "F") == "F"
    assert ap("carry", "T", "F", "T") == "T"
    assert ap("bitsum", "1", "1", "0") == "F"
    assert ap("bitsum", "1", "0", "0") == "T"
    assert ap("bitsum", "1", "1", "1") == "T"
    assert ap("bitsum", "0", "0", "0") == "F"


def test_growers():
    assert ap("add1", "11") == "111"
    assert ap("add1", "") == "1"
    assert ap("concat", "1", "01") == "101"
    assert ap("concat", "T", "01") == "101"
    assert ap("concat", "F", "01") == "001"
    assert ap("concat", "", "01") == "01"
    assert ap("binc", "011") == "100"  # most significant digit first: 3 -> 4
    assert ap("binc", "11") == "100"   # 3 -> 4, one digit wider
    assert ap("bdec", "110") == "101"  # 6 -> 5, width kept
    assert ap("bdec", "000") == "000"
    assert ap("tt") == "T"
    assert ap("ff") == "F"


# --- operator families --------------------------------------------------------


def test_quoted_constants():
    assert ap('"01"') == "01"
    assert ap('""') == ""


def test_prefix_test_family():
    assert ap("eq_0", "01") == "T"
    assert ap("eq_0", "10") == "F"
    assert ap("eq_B", "B1") == "T"
    assert ap("eq_B", "") == "F"


def test_prepend_family():
    assert ap("suc_1", "0") == "10"
    assert ap("suc_B", "") == "B"
    op = reg.resolve("suc_1")
    assert op.kind == POSITIVE and op.growth == 1


def test_unknown_operator():
    with pytest.raises(UnknownOperatorError):
        reg.resolve("frobnicate")
    assert not reg.knows("frobnicate")
    assert reg.knows("eq_anything")
    assert reg.knows('"literal"')


def test_registry_rejects_duplicates():
    fresh = Registry(builtins())
    with pytest.raises(DuplicateOperatorError):
        fresh.register(OperatorDef("pred", 1, lambda u: u, NEUTRAL_SUBWORD))


# --- growth classes -----------------------------------------------------------


def test_operator_def_validation():
    with pytest.raises(ValueError):
        OperatorDef("bad", 1, lambda u: u, "weird-kind")
    with pytest.raises(ValueError):
        OperatorDef("bad", -1, lambda u: u, NEUTRAL_SUBWORD)
    with pytest.raises(ValueError):
        # neutral operators must not claim growth
        OperatorDef("bad", 1, lambda u: u, NEUTRAL_SUBWORD, growth=1)


def test_every_builtin_validates():
    for op in builtins():
        verdict = validate_class(op, max_len=3)
        assert verdict.ok, (op.name, verdict.counterexample)
        if op.arity <= 2:  # arity-3 spaces exceed the sample cap
            assert verdict.exhaustive, op.name


def test_validate_class_finds_liars():
    liar = OperatorDef("liar", 1, lambda u: u + u, NEUTRAL_SUBWORD)
    verdict = validate_class(liar, max_len=3)
    assert not verdict.ok
    assert verdict.counterexample is not None
    bad_pred = OperatorDef("liar2", 1, lambda u: u, NEUTRAL_PREDICATE)
    assert not validate_class(bad_pred, max_len=2).ok
    undergrown = OperatorDef("liar3", 1, lambda u: u + "11", POSITIVE, growth=1)
    assert not validate_class(undergrown, max_len=2).ok


def test_validate_class_samples_large_spaces():
    op = reg.resolve("concat")
    verdict = validate_class(op, max_len=5, sample_cap=500, seed=1)
    assert verdict.ok
    assert not verdict.exhaustive
    assert verdict.checked == 500


# --- growth laws as properties -------------------------------------------------


@given(words)
def test_neutral_unary_ops_never_grow(u):
    for name in ("pred", "head", "sub1", "zero"):
        out = ap(name, u)
        assert out in u  # contiguous factor of the input


@given(words, words)
def test_binary_predicates_return_truth_words(u, v):
    for name in ("eq", "neq", "or", "and"):
        assert ap(name, u, v) in ("T", "F")


@given(words, words)
def test_positive_ops_respect_growth_budget(u, v):
    assert len(ap("concat", u, v)) <= max(len(u), len(v)) + 1
    assert len(ap("add1", u)) <= len(u) + 1
    assert len(ap("binc", u)) <= len(u) + 1
    assert len(ap("bdec", u)) <= len(u)


@given(st.integers(min_value=0, max_value=200))
def test_binary_increment_matches_arithmetic(n):
    # most significant digit first: binc is +1 on the represented value
    word = format(n, "b")
    out = ap("binc", word)
    assert int(out, 2) == n + 1


@given(st.integers(min_value=0, max_value=200))
def test_binary_decrement_matches_arithmetic(n):
    word = format(n, "b").zfill(n.bit_length() + 1)
    out = ap("bdec", word)
    assert len(out) == len(word)
    assert int(out, 2) == max(n - 1, 0)
