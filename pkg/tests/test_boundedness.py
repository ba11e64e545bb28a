from fractions import Fraction

import pytest
from helpers import DATA, oracle_bounded, random_copyless_cra, rng_for

from crakit.automata import cra_eval, stateless_cra, trim, wa_eval, words_upto
from crakit.boundedness import (
    decide_boundedness,
    detect_pattern_i,
    detect_pattern_ii,
    faithful_slawa_word,
    faithful_word,
    restrict_useful,
    translate_cra_to_slawa,
    unboundedness_witness_family,
    useful_states,
)
from crakit.automata import Const, Mul, Reg
from crakit.formats import load
from crakit.semiring import QPLUS, UsageError


@pytest.mark.parametrize("name,bounded,kind", [
    ("ex21.cra", True, None),
    ("ex22.cra", False, "II"),
    ("swap.cra", False, "I"),
    ("decay.cra", False, "I"),
    ("floor.cra", False, "I"),
    ("states.cra", True, None),
])
def test_corpus_verdicts(name, bounded, kind):
    v = decide_boundedness(load(DATA / name))
    assert v.bounded is bounded
    assert (v.witness.kind if v.witness else None) == kind


def test_swap_cycle_doubles():
    B = load(DATA / "swap.cra")
    v = decide_boundedness(B)
    S = v.slawa
    assert v.witness.value == 2
    vals = [wa_eval(S.wa, unboundedness_witness_family(S, v.witness, n)) for n in (1, 2, 3)]
    assert vals == [2, 4, 8]


@pytest.mark.parametrize("i", range(20))
def test_slawa_translation_preserves_values(i):
    B = random_copyless_cra(rng_for("slawa", i))
    S = translate_cra_to_slawa(B)
    for w in words_upto(B.alphabet, 4):
        assert wa_eval(S.wa, faithful_slawa_word(B, S, w)) == cra_eval(B, w)


@pytest.mark.parametrize("i", range(20))
def test_faithful_words_dominate(i):
    B = trim(random_copyless_cra(rng_for("faithful", i), max_states=2, max_regs=2))
    S = translate_cra_to_slawa(B)
    for w in words_upto(S.wa.alphabet, 3):
        assert cra_eval(B, faithful_word(B, S, w)) >= wa_eval(S.wa, w)


@pytest.mark.parametrize("i", range(20))
def test_restriction_keeps_values(i):
    S = translate_cra_to_slawa(random_copyless_cra(rng_for("restrict", i)))
    R = restrict_useful(S)
    assert R.wa.dim == len(useful_states(S) | {S.pi})
    for w in words_upto(S.wa.alphabet, 3):
        assert wa_eval(R.wa, w) == wa_eval(S.wa, w)


@pytest.mark.parametrize("i", range(60))
def test_decider_matches_graph_oracle(i):
    B = random_copyless_cra(rng_for("decide", i))
    assert decide_boundedness(B).bounded == oracle_bounded(B)


@pytest.mark.parametrize("i", range(40))
def test_witness_families_grow(i):
    B = random_copyless_cra(rng_for("grow", i))
    v = decide_boundedness(B)
    if v.bounded:
        return
    S = v.slawa
    vals = [wa_eval(S.wa, unboundedness_witness_family(S, v.witness, n)) for n in (1, 4, 16)]
    assert vals[0] < vals[1] < vals[2]


def test_pattern_two_needs_pattern_one_absent():
    S = translate_cra_to_slawa(load(DATA / "swap.cra"))
    assert detect_pattern_i(S) is not None
    with pytest.raises(UsageError):
        detect_pattern_ii(S)


def test_useless_cycles_are_ignored():
    # y doubles forever but never reaches the output
    one = Fraction(1)
    B = stateless_cra(QPLUS, ("a",), ("x", "y"), {"x": one, "y": one},
                      {"x": one}, {"a": {"x": Reg("x"), "y": Mul((Const(Fraction(2)), Reg("y")))}})
    S = translate_cra_to_slawa(B)
    assert detect_pattern_i(S) is None
    assert detect_pattern_i(S, only_useful=False) is not None
    assert decide_boundedness(B).bounded


def test_rejects_bad_inputs():
    with pytest.raises(UsageError):
        decide_boundedness(load(DATA / "trop.cra"))
    one = Fraction(1)
    dup = stateless_cra(QPLUS, ("a",), ("x", "y"), {"x": one, "y": one},
                        {"x": one}, {"a": {"x": Reg("x"), "y": Reg("x")}})
    with pytest.raises(UsageError):
        decide_boundedness(dup)
