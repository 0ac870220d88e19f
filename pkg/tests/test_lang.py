"""Core data model: words, tiers, syntax trees, stores, thread pools."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tierlang import (
    DEFAULT_ALPHABET,
    Alphabet,
    Assign,
    If,
    OpCall,
    Program,
    Seq,
    Skip,
    Store,
    Tier,
    Var,
    While,
    free_vars,
    assigned_vars,
    join_all,
    meet_all,
    ops_used,
    seq_all,
    subword,
    unary,
    word_literal,
)

words = st.text(alphabet="01TF", max_size=8)


# --- tiers ------------------------------------------------------------------


def test_tier_lattice_tables():
    zero, one = Tier.ZERO, Tier.ONE
    assert zero.join(zero) == zero
    assert zero.join(one) == one
    assert one.join(zero) == one
    assert one.join(one) == one
    assert zero.meet(zero) == zero
    assert zero.meet(one) == zero
    assert one.meet(one) == one
    assert zero.leq(zero) and zero.leq(one) and one.leq(one)
    assert not one.leq(zero)


def test_tier_fold_identities():
    assert join_all(()) == Tier.ZERO
    assert meet_all(()) == Tier.ONE
    assert join_all([Tier.ZERO, Tier.ONE]) == Tier.ONE
    assert meet_all([Tier.ZERO, Tier.ONE]) == Tier.ZERO


def test_tier_strings():
    assert str(Tier.ZERO) == "0"
    assert str(Tier.ONE) == "1"


# --- words ------------------------------------------------------------------


def test_subword_is_contiguous_factor():
    assert subword("", "anything")
    assert subword("01", "1011")
    assert subword("101", "101")
    assert not subword("11", "101")
    assert not subword("1011", "101")


def test_unary():
    assert unary(0) == ""
    assert unary(4) == "1111"


@given(words, words)
def test_subword_matches_python_containment(needle, haystack):
    assert subword(needle, haystack) == (needle in haystack)


# --- alphabet ---------------------------------------------------------------


def test_alphabet_membership_and_words():
    ab = Alphabet(frozenset("01"))
    assert "0" in ab and "x" not in ab
    assert ab.admits("0101") and not ab.admits("012")
    assert ab.admits("")
    assert sorted(ab.words_up_to(2)) == sorted(["", "0", "1", "00", "01", "10", "11"])


def test_alphabet_rejects_multichar_letters():
    with pytest.raises(ValueError):
        Alphabet(frozenset({"ab"}))


def test_default_alphabet_has_truth_letters():
    assert "T" in DEFAULT_ALPHABET and "F" in DEFAULT_ALPHABET


# --- syntax -----------------------------------------------------------------


def test_ast_equality_ignores_spans():
    from tierlang import Span

    a = Var("x", span=Span(1, 1))
    b = Var("x", span=Span(9, 9))
    assert a == b
    assert hash(a) == hash(b)


def test_word_literal_is_a_nullary_call():
    lit = word_literal("01")
    assert isinstance(lit, OpCall)
    assert lit.args == ()
    assert lit.op == '"01"'


def test_seq_all():
    a, b, c = Assign("x", Var("y")), Skip(), Assign("z", Var("x"))
    assert seq_all([a]) == a
    assert seq_all([a, b, c]) == Seq(a, Seq(b, c))
    assert seq_all([]) == Skip()


def test_variable_walkers():
    body = Seq(Assign("x", OpCall("sub1", (Var("x"),))), Assign("y", OpCall("add1", (Var("y"),))))
    loop = While(OpCall("gt0", (Var("x"),)), body)
    cmd = If(OpCall("eq", (Var("a"), Var("b"))), loop, Skip())
    assert free_vars(cmd) == {"a", "b", "x", "y"}
    assert assigned_vars(cmd) == {"x", "y"}
    assert ops_used(cmd) == {"eq", "gt0", "sub1", "add1"}


def test_walkers_cover_programs():
    prog = Program.of({"t1": Assign("x", Var("y")), "t2": Assign("z", word_literal("1"))})
    assert free_vars(prog) == {"x", "y", "z"}
    assert assigned_vars(prog) == {"x", "z"}
    assert ops_used(prog) == {'"1"'}


# --- stores -----------------------------------------------------------------


def test_store_defaults_to_empty_word():
    s = Store.of(x="11")
    assert s.lookup("x") == "11"
    assert s.lookup("never_bound") == ""


def test_store_normalizes_empty_bindings():
    assert Store.of(x="") == Store()
    assert Store.of(x="", y="1") == Store.of(y="1")
    assert Store.of(x="").bound_names() == frozenset()


def test_store_bind_is_persistent():
    s = Store.of(x="1")
    t = s.bind("y", "0")
    assert s.lookup("y") == ""
    assert t.lookup("y") == "0"
    assert t.bind("y", "").bound_names() == {"x"}


def test_store_restrict_and_items_sorted():
    s = Store.of(b="1", a="0", c="11")
    assert s.items() == [("a", "0"), ("b", "1"), ("c", "11")]
    assert s.restrict(["a", "c", "missing"]) == Store.of(a="0", c="11")


def test_store_equality_and_hash():
    assert Store.of(x="1", y="0") == Store.of(y="0", x="1")
    assert hash(Store.of(x="1")) == hash(Store.of(x="1"))
    assert Store.of(x="1") != Store.of(x="0")


def test_store_is_immutable():
    s = Store.of(x="1")
    with pytest.raises(AttributeError):
        s.whatever = 3


@given(st.dictionaries(st.sampled_from("abcxyz"), words, max_size=4))
def test_store_roundtrips_nonempty_bindings(bindings):
    s = Store(bindings)
    for var, value in bindings.items():
        assert s.lookup(var) == value
    assert s.bound_names() == {v for v, w in bindings.items() if w}


# --- thread pools -----------------------------------------------------------


def test_program_threads_sorted_by_name():
    prog = Program.of({"zed": Skip(), "alpha": Skip()})
    assert prog.thread_ids() == ("alpha", "zed")


def test_program_rejects_duplicate_names():
    with pytest.raises(ValueError):
        Program((("t", Skip()), ("t", Skip())))


def test_program_update_and_removal():
    prog = Program.of({"a": Skip(), "b": Assign("x", Var("y"))})
    smaller = prog.without("a")
    assert smaller.thread_ids() == ("b",)
    assert not smaller.empty
    assert smaller.without("b").empty
    changed = prog.updated("b", Skip())
    assert changed.command("b") == Skip()
    assert prog.command("b") == Assign("x", Var("y"))


def test_program_single():
    prog = Program.single(Skip())
    assert prog.thread_ids() == ("main",)
