"""Machine format, direct simulator, and the compiler into tiered programs."""

import pytest

from tierlang import Store, parse, pretty, run_sequential
from tierlang.fixtures import fixture_text
from tierlang.tm import (
    TMFormatError,
    compile_tm,
    parse_tm,
    render_tm,
    simulate_tm,
)
from tierlang.typecheck import check_program


def lsb_value(word):
    return int(word[::-1], 2) if word else 0


def lsb_words(max_len):
    yield ""
    for length in range(1, max_len + 1):
        for bits in range(2**length):
            yield format(bits, "b").zfill(length)[::-1]


@pytest.fixture(scope="module")
def inc():
    return parse_tm(fixture_text("binary_inc.tm"))


def test_parse_tm_golden(inc):
    assert inc.states == ("scan", "done")
    assert inc.alphabet == ("0", "1")
    assert inc.blank == "B"
    assert inc.init == "scan"
    assert inc.halting == frozenset({"done"})
    assert inc.clock_degree == 1
    assert inc.transitions[("scan", "1")] == ("scan", "0", "R")
    assert inc.transitions[("scan", "0")] == ("done", "1", "R")
    assert inc.transitions[("scan", "B")] == ("done", "1", "R")


@pytest.mark.parametrize("name", ["binary_inc.tm", "identity.tm", "busy.tm"])
def test_render_round_trips(name):
    spec = parse_tm(fixture_text(name))
    assert parse_tm(render_tm(spec)) == spec


BAD_MACHINES = {
    "not total": "states s h\nalphabet 0\ninit s\nhalt h\nclock 1\ndelta s 0 -> h 0 R\n",
    "blank in alphabet": (
        "states s h\nalphabet 0 B\ninit s\nhalt h\nclock 1\n"
        "delta s 0 -> h 0 R\ndelta s B -> h 0 R\n"
    ),
    "halting transition": "states s\nalphabet 0\ninit s\nhalt s\nclock 1\ndelta s 0 -> s 0 R\n",
    "multi-char letter": "states s h\nalphabet 01\ninit s\nhalt h\nclock 1\n",
    "truth letter": "states s h\nalphabet T\ninit s\nhalt h\nclock 1\n",
    "missing section": "states s h\nalphabet 0\ninit s\nclock 1\n",
    "bad delta": "states s h\nalphabet 0\ninit s\nhalt h\nclock 1\ndelta s 0 h 0 R\n",
    "unknown keyword": "stat s\n",
    "clock zero": "states s h\nalphabet 0\ninit s\nhalt h\nclock 0\n",
}


@pytest.mark.parametrize("label", sorted(BAD_MACHINES))
def test_malformed_machines_rejected(label):
    with pytest.raises(TMFormatError):
        parse_tm(BAD_MACHINES[label])


def test_input_letters_must_be_on_the_tape_alphabet(inc):
    with pytest.raises(ValueError):
        simulate_tm(inc, "10x")


# --- simulation -----------------------------------------------------------------


def test_simulator_increments_lsb_first_binary(inc):
    for word in lsb_words(6):
        result = simulate_tm(inc, word)
        assert result.halted
        assert lsb_value(result.tape) == lsb_value(word) + 1
        # a carry past the end materializes exactly one blank cell
        assert len(result.tape) == len(word) + (0 if "0" in word else 1)


def test_simulator_goldens(inc):
    assert simulate_tm(inc, "11").tape == "001"
    assert simulate_tm(inc, "11").steps == 3
    empty = simulate_tm(inc, "")
    assert (empty.tape, empty.steps) == ("1", 1)


def test_identity_machine_halts_at_once():
    ident = parse_tm(fixture_text("identity.tm"))
    result = simulate_tm(ident, "0101")
    assert result.halted
    assert result.steps == 0
    assert result.tape == "0101"


def test_busy_machine_hits_the_step_bound():
    busy = parse_tm(fixture_text("busy.tm"))
    result = simulate_tm(busy, "00", max_steps=40)
    assert not result.halted
    assert result.tape is None
    assert result.steps == 40


def test_left_move_bounces_at_the_tape_edge():
    bounce = parse_tm(
        "states go done\nalphabet 0 1\nblank B\ninit go\nhalt done\nclock 1\n"
        "delta go 0 -> done 1 L\ndelta go 1 -> done 0 L\ndelta go B -> done 1 L\n"
    )
    assert simulate_tm(bounce, "01").tape == "11"
    assert simulate_tm(bounce, "").tape == "1"


# --- compilation ----------------------------------------------------------------


def test_state_codes_are_fixed_width(inc):
    assert dict(compile_tm(inc).state_codes) == {"scan": "0", "done": "1"}
    three = parse_tm(
        "states a b h\nalphabet 0\ninit a\nhalt h\nclock 1\n"
        "delta a 0 -> b 0 R\ndelta a B -> b 0 R\n"
        "delta b 0 -> h 0 R\ndelta b B -> h 0 R\n"
    )
    assert dict(compile_tm(three).state_codes) == {"a": "00", "b": "01", "h": "10"}


def test_cascade_budgets(inc):
    compiled = compile_tm(inc)
    assert compiled.sim_cascades(3) == 8
    assert compiled.rewind_cascades(3) == 11
    quadratic = parse_tm(
        "states s h\nalphabet 0\ninit s\nhalt h\nclock 2\n"
        "delta s 0 -> h 0 R\ndelta s B -> h 0 R\n"
    )
    assert compile_tm(quadratic).sim_cascades(3) == 20


def test_compiled_program_parses_back(inc):
    source = compile_tm(inc).source
    assert parse(pretty(source)).program() == source.program()


def test_compiled_program_type_checks(inc):
    assert check_program(compile_tm(inc).source).safe


def test_compiled_program_matches_the_simulator(inc):
    compiled = compile_tm(inc)
    cmd = compiled.source.program().command("machine")
    for word in lsb_words(4):
        run = run_sequential(Store.of(input=word), cmd)
        assert run.finished
        assert run.store.lookup(compiled.output_var) == simulate_tm(inc, word).tape
        # the tier-1 clock variable is read, never consumed
        assert run.store.lookup(compiled.input_var) == word
        assert run.store.lookup("Left") == ""


def test_compiled_identity_copies_input_through():
    compiled = compile_tm(parse_tm(fixture_text("identity.tm")))
    cmd = compiled.source.program().command("machine")
    for word in ("", "0", "0110"):
        run = run_sequential(Store.of(input=word), cmd)
        assert run.store.lookup("Right") == word


def test_compiled_busy_machine_exhausts_its_clock():
    # the non-halting machine writes one letter per funded step, so the
    # tape length counts exactly the cascades the clock paid for
    busy = parse_tm(fixture_text("busy.tm"))
    compiled = compile_tm(busy)
    cmd = compiled.source.program().command("machine")
    for n in (0, 1, 3, 5):
        run = run_sequential(Store.of(input="0" * n), cmd, fuel=10_000_000)
        assert run.finished
        tape = run.store.lookup("Right")
        assert len(tape) == compiled.sim_cascades(n)
        assert set(tape) <= {"1"}
