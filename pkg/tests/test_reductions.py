import itertools
from fractions import Fraction

import pytest
from helpers import DATA, random_copyless_cra, random_independent_qplus, random_normal_form_trop, rng_for

from crakit.automata import cra_eval, cra_to_wa, enumerate_accepting_runs, stateless_cra, words_upto
from crakit.formats import load, parse_cra
from crakit.reductions import (
    BLOCK,
    RESET,
    STATEMENTS,
    check_isolation_statements,
    compute_constants,
    duality_holds,
    is_normal_form,
    max_times,
    neg_log_cra,
    normal_form,
    pump,
    pump_zero_witness,
    threshold_to_zero_iso,
    trop_within,
)
from crakit.semiring import INF, QPLUS, UsageError, neg_log_payload

one = Fraction(1)


def affine_cra(init, final, upd, alphabet=("a",)):
    """A one-state CRA built from plain dicts; updates are parsed from text."""
    lines = ["cra qplus", "alphabet " + " ".join(alphabet), "registers " + " ".join(init),
             "I " + " ".join(f"{x}={v}" for x, v in init.items()),
             "F " + " ".join(f"{x}={v}" for x, v in final.items())]
    lines += [f"on {a} : {u}" for a, u in upd.items()]
    return parse_cra("\n".join(lines) + "\n")


def test_neg_log_constants():
    A = affine_cra({"x": 1, "y": 0}, {"x": 1}, {"a": "x := x ; y := y"})
    L = neg_log_cra(A)
    assert L.init["x"] == 1  # log of 1 is 0, payload 1
    assert L.init["y"] is INF
    with pytest.raises(UsageError):
        neg_log_cra(L)


@pytest.mark.parametrize("i", range(20))
def test_neg_log_is_dual_to_max_times(i):
    A = random_independent_qplus(rng_for("duallog", i))
    L = neg_log_cra(A)
    runs_of = cra_to_wa(A)
    for w in words_upto(A.alphabet, 4):
        best = max((r.val for r in enumerate_accepting_runs(runs_of, w)), default=Fraction(0))
        assert cra_eval(max_times(A), w) == best
        assert cra_eval(L, w) == neg_log_payload(best)


def test_constants_examples():
    A = affine_cra({"x": 1}, {"x": 1}, {"a": "x := 1/2 . x | 1"})
    k = compute_constants(A)
    assert (k.R, k.S) == (2, 1)
    B = affine_cra({"x": 1}, {"x": 1}, {"a": "x := x | 1"})
    assert (compute_constants(B).R, compute_constants(B).S) == (1, 1)
    C = affine_cra({"x": Fraction(1, 3)}, {"x": 1}, {"a": "x := x"})
    assert compute_constants(C).S == 3


@pytest.mark.parametrize("i", range(20))
def test_constant_invariants_and_sandwich(i):
    A = random_independent_qplus(rng_for("sandwich", i))
    k = compute_constants(A)
    assert k.R >= 1 and k.S >= 1
    for c, d in itertools.product(k.consts, repeat=2):
        assert c * k.R >= d and c * k.R >= 1
    for w in words_upto(A.alphabet, 4):
        for r in enumerate_accepting_runs(cra_to_wa(A), w):
            assert r.val / k.S <= r.val_between <= k.S * r.val


@pytest.mark.parametrize("i", range(12))
def test_pumped_runs_are_sandwiched(i):
    A = random_independent_qplus(rng_for("pumpsand", i), max_regs=2)
    k = compute_constants(A)
    W = cra_to_wa(A)
    for w in words_upto(A.alphabet, 3):
        if not w:
            continue
        base = enumerate_accepting_runs(W, w)
        for n in (1, 2, 3):
            for g in enumerate_accepting_runs(W, pump(w, n)):
                assert any(g.val <= (r.val_between * k.R) ** n * k.S for r in base)


def test_pumping_words():
    assert pump(("a", "b"), 3) == ("a",) * 3 + ("b",) * 3
    assert pump(("a", "b"), 1) == ("a", "b")
    A = load(DATA / "decay.cra")
    with pytest.raises(UsageError):
        pump_zero_witness(A, ("b",), 2)
    with pytest.raises(UsageError):
        pump_zero_witness(A, ("a", "a", "a"), 0)


def test_decay_is_not_isolated():
    A = load(DATA / "decay.cra")
    rep = check_isolation_statements(A, 4, pump_to=6)
    assert rep.verdict == "NOT_ISOLATED"
    assert set(rep.statements) == set(STATEMENTS)
    vals = [cra_eval(A, pump_zero_witness(A, rep.witness, n)) for n in range(1, 7)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert rep.tau < 1


def test_floor_is_isolated():
    rep = check_isolation_statements(load(DATA / "floor.cra"), 5)
    assert rep.verdict == "ISOLATED" and rep.witness is None


def test_no_certificate_means_unknown():
    # each letter halves one register and keeps the other, so the max never drops,
    # yet no single register has all coefficients >= 1
    A = affine_cra({"x": 1, "y": 1}, {"x": 1, "y": 1},
                   {"a": "x := 1/2 . x ; y := y", "b": "x := x ; y := 1/2 . y"}, ("a", "b"))
    rep = check_isolation_statements(A, 1)
    assert rep.verdict == "UNKNOWN"


def test_empty_alphabet_report():
    A = stateless_cra(QPLUS, (), ("x",), {"x": one}, {"x": one}, {})
    rep = check_isolation_statements(A, 3)
    assert rep.verdict == "ISOLATED"


def test_duality_samples():
    rng = rng_for("duality-unit")
    for _ in range(500):
        cs = [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(rng.randint(0, 4))]
        C1, C2 = sorted((Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(2)), reverse=True)
        assert duality_holds(C1, C2, cs)


def test_normal_form_of_tropical_example():
    A = load(DATA / "trop.cra")
    N = normal_form(A)
    assert (N.b, N.d, N.f) == (3, 5, 2)
    assert is_normal_form(N.cra) and not is_normal_form(A)
    assert N.cra.alphabet == ("a", "b", RESET)
    sr = A.sr
    for w in words_upto(A.alphabet, 5):
        assert cra_eval(N.cra, w) <= sr.mul(cra_eval(N.cra, (RESET,) + w), N.b)
        for v in words_upto(A.alphabet, 2):
            assert trop_within(sr, cra_eval(N.primed, w), cra_eval(N.cra, v + (RESET,) + w),
                               sr.mul(N.b, N.f))


@pytest.mark.parametrize("i", range(10))
def test_normal_form_is_idempotent_up_to_reset(i):
    A = random_normal_form_trop(rng_for("nfidem", i))
    N = normal_form(A)
    assert N.cra.alphabet == tuple(A.alphabet) + (RESET,)
    for w in words_upto(A.alphabet, 4):
        assert cra_eval(N.cra, w) == cra_eval(A, w)


def test_normal_form_drops_unobserved_registers():
    text = ("cra zminplus\nalphabet a\nregisters x\nI x=0\nF x=inf\non a : x := 1 . x\n")
    N = normal_form(parse_cra(text))
    assert N.cra.registers == ()
    assert all(cra_eval(N.cra, w) is INF for w in words_upto(("a", RESET), 3))


def test_normal_form_rejects_qplus():
    with pytest.raises(UsageError):
        normal_form(load(DATA / "decay.cra"))


def test_threshold_gadget_examples():
    A = load(DATA / "ex22.cra")  # A(a^n) = n
    B = threshold_to_zero_iso(A, 2)
    assert B.is_copyless
    assert cra_eval(B, ("a", "a", "a", BLOCK)) == Fraction(3, 2)
    two = ("a", "a", BLOCK)
    assert all(cra_eval(B, two * n) == 1 for n in range(1, 5))
    assert cra_eval(B, ("a", BLOCK) * 3) == Fraction(1, 8)
    with pytest.raises(UsageError):
        threshold_to_zero_iso(A, 0)


@pytest.mark.parametrize("i", range(15))
def test_threshold_gadget_product(i):
    rng = rng_for("gadget", i)
    A = random_copyless_cra(rng)
    C = Fraction(rng.randint(1, 4), rng.randint(1, 4))
    B = threshold_to_zero_iso(A, C)
    assert B.is_copyless
    words = list(words_upto(A.alphabet, 3))
    for _ in range(30):
        blocks = [rng.choice(words) for _ in range(rng.randint(1, 3))]
        want = Fraction(1)
        for u in blocks:
            want *= cra_eval(A, u) / C
        word = tuple(x for u in blocks for x in u + (BLOCK,))
        assert cra_eval(B, word) == want
