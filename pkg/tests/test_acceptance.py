"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines appear in the verbose log) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import (  # noqa: E402
    DATA,
    all_orthants,
    grid_reach,
    impossible_2d,
    in_closed_orthant,
    max_run_counts,
    oracle_bounded,
    random_copyless_cra,
    random_independent_qplus,
    random_normal_form_trop,
    random_ovas,
    reversed_run_covers,
    rng_for,
)

from crakit.automata import cra_eval, independent_coeffs, trim, wa_eval, words_upto  # noqa: E402
from crakit.boundedness import (  # noqa: E402
    decide_boundedness,
    faithful_slawa_word,
    faithful_word,
    restrict_useful,
    translate_cra_to_slawa,
    unboundedness_witness_family,
)
from crakit.cli import main as cli_main  # noqa: E402
from crakit.coverability import (  # noqa: E402
    Separator3,
    check_separator_static,
    continuous_orthant_reach,
    find_separator,
    replay_certificate,
    ucover_decide_3d,
    ucover_search,
)
from crakit.formats import load  # noqa: E402
from crakit.hardness import (  # noqa: E402
    NINE_TENTHS,
    compose_e2_gadget,
    corr,
    decorr,
    encode_tcm_run,
    escape_vector,
    ovas_reach,
    state_order,
    tcm_halts_bounded,
    tcm_reach,
    tcm_to_cra_zero_iso,
    tcm_to_ovas,
)
from crakit.monoid import (  # noqa: E402
    MONOID_CAP,
    check_assumptions,
    count_runs_above,
    homomorphism_holds,
    saturate_monoid,
    simon_factorize,
    validate_factorization,
)
from crakit.ovas import (  # noqa: E402
    Q,
    const_vec,
    continuous_to_discrete,
    cra_to_ovas,
    dirichlet_approx,
    discrete_search,
    discrete_to_continuous,
    nonneg,
    strictly_negative,
    validate_run,
    vadd,
    vsub,
)
from crakit.reductions import (  # noqa: E402
    check_isolation_statements,
    compute_constants,
    duality_holds,
    is_normal_form,
    log_exceeds,
    pump_zero_witness,
)
from crakit.semiring import INF  # noqa: E402
from crakit.smt import emit_smt, validate_smt  # noqa: E402

from tcm_mutations import decode_is_faithful, mutations  # noqa: E402

TITLES = {
    1: "worked examples via eval",
    2: "boundedness decider vs brute-force oracle",
    3: "CRA to SLAWA translation fidelity",
    4: "abstraction monoid lab",
    5: "zero-isolation reduction chain",
    6: "reversed-run equivalence for normal-form CRA",
    7: "discrete/continuous run converters",
    8: "in-orthant continuous reachability oracle",
    9: "universal coverability and SMT emission",
    10: "two-counter machine compilers",
}
TCMS = ("halt2", "copy", "loop", "move2", "pump")
# exact run-count maxima are computed up to RUN_HORIZON and must be flat from RUN_TAIL on
RUN_HORIZON = 40
RUN_TAIL = 25


def cli_json(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_main(["--json", *argv], out=out, err=err)
    return code, json.loads(out.getvalue()) if out.getvalue() else None


# -- criteria ----------------------------------------------------------------------------

def check_1():
    t0 = time.perf_counter()
    bad = []
    for n in range(0, 21):
        word = "a" * n
        for path, want in ((DATA / "ex21.wa", n % 2), (DATA / "ex21.cra", n % 2),
                           (DATA / "ex22.wa", n), (DATA / "ex22.cra", n)):
            code, rep = cli_json("eval", str(path), word)
            if code != 0 or Fraction(rep["value"]) != want:
                bad.append(f"{path.name} a^{n} -> {rep and rep['value']}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1
    return ok, f"84 evaluations, {len(bad)} mismatches, {elapsed:.3f}s" + (f"; {bad[:3]}" if bad else "")


def check_2():
    t0 = time.perf_counter()
    problems = []
    if not decide_boundedness(load(DATA / "ex21.cra")).bounded:
        problems.append("ex21 not bounded")
    B = load(DATA / "ex22.cra")
    v = decide_boundedness(B)
    values = []
    if v.bounded:
        problems.append("ex22 not unbounded")
    else:
        Bt = trim(B)
        for n in range(1, 11):
            w = faithful_word(Bt, v.slawa, unboundedness_witness_family(v.slawa, v.witness, n))
            values.append(cra_eval(B, w))
        if values != list(range(1, 11)):
            problems.append(f"ex22 family values {values}")
    disagree = 0
    n_bounded = 0
    for i in range(200):
        R = random_copyless_cra(rng_for("bound", i))
        got = decide_boundedness(R).bounded
        n_bounded += got
        if got != oracle_bounded(R):
            disagree += 1
    elapsed = time.perf_counter() - t0
    if disagree:
        problems.append(f"{disagree} oracle disagreements")
    ok = not problems and elapsed < 120
    return ok, (f"ex22 family 1..10 exact; 200 random CRA ({n_bounded} bounded), "
                f"{disagree} disagreements, {elapsed:.1f}s" + (f"; {problems}" if problems else ""))


def check_3():
    mismatches = 0
    dominated_fail = 0
    words_checked = 0
    for i in range(30):
        B = trim(random_copyless_cra(rng_for("fidelity", i)))
        S = translate_cra_to_slawa(B)
        best_cra = Fraction(0)
        for w in words_upto(B.alphabet, 5):
            words_checked += 1
            a = cra_eval(B, w)
            best_cra = max(best_cra, a)
            if a != wa_eval(S.wa, faithful_slawa_word(B, S, w)):
                mismatches += 1
        # every SLAWA word is matched by a CRA word of at least its value
        for s in words_upto(tuple(sorted(S.wa.alphabet)), 3):
            if cra_eval(B, faithful_word(B, S, s)) < wa_eval(S.wa, s):
                dominated_fail += 1
    ok = mismatches == 0 and dominated_fail == 0
    return ok, (f"{words_checked} CRA words, {mismatches} identity mismatches; "
                f"{dominated_fail} SLAWA words (length <= 3) not dominated")


def _bounded_instances(limit=None):
    out = [("states.cra", load(DATA / "states.cra"))]
    for i in range(200):
        B = random_copyless_cra(rng_for("bound", i))
        if decide_boundedness(B).bounded:
            out.append((f"random {i}", B))
    return out if limit is None else out[:limit]


def check_4():
    problems = []
    sizes = []
    trees = 0
    pairs = 0
    literal = 0
    sequences = 0
    grown = []
    instances = _bounded_instances()
    for k, (name, B) in enumerate(instances):
        S = restrict_useful(translate_cra_to_slawa(trim(B)))
        if not check_assumptions(S):
            problems.append(f"{name}: assumptions fail on useful states")
            continue
        m = saturate_monoid(S)
        sizes.append(len(m))
        if len(m) >= MONOID_CAP:
            problems.append(f"{name}: saturation hit the cap")
        rng = rng_for("monoid", k)
        letters = sorted(S.wa.alphabet)
        if k < 12:
            for _ in range(500):
                u = tuple(rng.choice(letters) for _ in range(rng.randint(0, 6)))
                v = tuple(rng.choice(letters) for _ in range(rng.randint(0, 6)))
                pairs += 1
                if not homomorphism_holds(m, S, u, v):
                    problems.append(f"{name}: homomorphism fails on {u} {v}")
        for _ in range(5):
            w = [rng.choice(letters) for _ in range(rng.randint(1, 24))]
            tree = simon_factorize([m.generators[a] for a in w], m)
            trees += 1
            bad = validate_factorization(tree, m)
            if bad:
                problems.append(f"{name}: tree invalid: {bad[0]}")
        for kk in (2, 4, 8):
            seq = max_run_counts(S, Fraction(1, kk), RUN_HORIZON)
            sequences += 1
            literal += len(set(seq[:12])) == 1
            if len(set(seq[RUN_TAIL - 1:])) != 1:
                grown.append((name, kk, seq))
            w = tuple(rng.choice(letters) for _ in range(12))
            for n in range(1, 13):
                if count_runs_above(S, w[:n], Fraction(1, kk)) > seq[n - 1]:
                    problems.append(f"{name}: count_runs_above exceeds the exact maximum")
    # contrast: an unbounded instance must grow
    S22 = translate_cra_to_slawa(load(DATA / "ex22.cra"))
    growth = max_run_counts(S22, Fraction(1, 2), RUN_HORIZON)
    if growth != sorted(growth) or growth[-1] <= growth[0]:
        problems.append(f"unbounded contrast does not grow: {growth}")
    if grown:
        problems.append(f"{len(grown)} run-count sequences still moving after length {RUN_TAIL}: {grown[:2]}")
    ok = not problems
    return ok, (f"{len(sizes)} bounded instances, monoid sizes <= {max(sizes)}; {pairs} pairs; "
                f"{trees} trees valid; exact max run counts constant on lengths {RUN_TAIL}-{RUN_HORIZON} in "
                f"{sequences - len(grown)}/{sequences} (already constant on 1-12 in {literal}); "
                f"ex22 grows {growth[0]}->{growth[-1]}"
                + (f"; {problems[:2]}" if problems else ""))


def check_5():
    found = 0
    problems = []
    products = 0
    i = 0
    while found < 20 and i < 1000:
        A = random_independent_qplus(rng_for("iso", i))
        i += 1
        rep = check_isolation_statements(A, 4, pump_to=10)
        if rep.verdict != "NOT_ISOLATED":
            continue
        found += 1
        k = compute_constants(A)
        words = [pump_zero_witness(A, rep.witness, j, k) for j in range(1, 11)]
        plus = [cra_eval(A, w) for w in words]
        logs = [p[3] for p in rep.pumped]
        if any(b >= a for a, b in zip(plus, plus[1:])):
            problems.append(f"instance {i}: not strictly decreasing")
        if not any(v < Fraction(1, 1000) for v in plus):
            problems.append(f"instance {i}: never below 1e-3")
        if not any(log_exceeds(x, Fraction(2) ** 10) for x in logs):
            problems.append(f"instance {i}: log value never above 10")
        rng = rng_for("duality", i)
        pool = list(k.consts) + [k.R, k.S, 1 / (k.R * k.S)]
        for _ in range(50):
            cs = [rng.choice(pool) for _ in range(rng.randint(0, 6))]
            C1, C2 = sorted((rng.choice(pool), rng.choice(pool)), reverse=True)
            products += 1
            if not duality_holds(C1, C2, cs):
                problems.append(f"duality fails on {cs}")
    ok = found == 20 and not problems
    return ok, (f"{found} instances with depth-4 witnesses (scanned {i}); {products} duality samples"
                + (f"; {problems[:3]}" if problems else ""))


def _letter_vectors(A):
    c, d = independent_coeffs(A)
    return ({a: tuple(c[(a, x)] for x in A.registers) for a in A.alphabet},
            {a: tuple(d[(a, x)] is not INF for x in A.registers) for a in A.alphabet})


def normal_form_instances(count=10):
    """Normal-form instances whose letters have pairwise distinct vectors."""
    out = []
    i = 0
    while len(out) < count:
        A = random_normal_form_trop(rng_for("c4", i))
        i += 1
        vectors, _ = _letter_vectors(A)
        if len(set(vectors.values())) == len(vectors):
            out.append(A)
    return out


def check_6():
    discrepancies = 0
    checked = 0
    positive = 0
    for A in normal_form_instances():
        assert is_normal_form(A)
        V, dropped = cra_to_ovas(A)
        vectors, _ = _letter_vectors(A)
        for w in words_upto(A.alphabet, 6):
            val = cra_eval(A, w)
            for k in range(1, 5):
                lhs = val is INF or val >= k
                checked += 1
                positive += lhs
                if lhs != reversed_run_covers(V, vectors, w, k):
                    discrepancies += 1
    return discrepancies == 0, f"{checked} (word, k) pairs, {positive} with A(w) >= k, {discrepancies} discrepancies"


def check_7():
    problems = []
    n = 0
    i = 0
    dirichlet = 0
    while n < 20 and i < 1000:
        rng = rng_for("conv", i)
        i += 1
        d = rng.choice((2, 3))
        V = random_ovas(rng, d, n_trans=rng.randint(2, 4))
        u = const_vec(Q, d, V.norm)
        v = tuple(Fraction(-rng.randint(1, 3)) for _ in range(d))
        run = discrete_search(V, vsub(Q, v, u), 12)
        if run is None:
            continue
        n += 1
        cont = discrete_to_continuous(V, v, run)
        if not (validate_run(V, cont) and nonneg(cont.end) and cont.mode == "continuous"):
            problems.append(f"instance {i}: continuous output invalid")
            continue
        if not strictly_negative(cont.start):
            problems.append(f"instance {i}: continuous run does not start strictly negative")
            continue
        target = vadd(Q, cont.start, const_vec(Q, d, 1))
        disc = continuous_to_discrete(V, cont, target)
        if not (validate_run(V, disc) and nonneg(disc.end) and disc.start == target):
            problems.append(f"instance {i}: discrete output invalid")
    rng = rng_for("dirichlet")
    for _ in range(300):
        r = [Fraction(rng.randint(-40, 40), rng.randint(1, 12)) for _ in range(rng.randint(1, 3))]
        eps = Fraction(1, rng.randint(2, 20))
        m, z = dirichlet_approx(r, eps)
        dirichlet += 1
        if m < 1 or any(abs(m * x - zi) >= eps for x, zi in zip(r, z)):
            problems.append(f"dirichlet bound missed for {r}, {eps}")
    ok = n == 20 and not problems
    return ok, f"{n} OVAS converted both ways; {dirichlet} dirichlet outputs within eps" + (
        f"; {problems[:3]}" if problems else "")


def reach_corpus(size=30):
    out = []
    i = 0
    while len(out) < size:
        rng = rng_for("reach", i)
        i += 1
        V = random_ovas(rng, 2, n_trans=rng.randint(1, 3))
        A = rng.choice(all_orthants(2))
        vecs = V.available(A)
        if not vecs:
            continue

        def pt():
            return tuple(Fraction(A[k] * rng.choice((0, 0, 1, 2, 3))) for k in range(2))

        u, v = pt(), pt()
        if i % 2:
            v = u
            for _ in range(rng.randint(1, 3)):
                t = rng.choice(vecs)
                w = tuple(x + Fraction(1, 2) * y for x, y in zip(v, t))
                if in_closed_orthant(w, A):
                    v = w
        out.append((V, A, u, v))
    return out


def check_8():
    agree_pos = agree_neg = undecided = 0
    problems = []
    for V, A, u, v in reach_corpus():
        ok, cert = continuous_orthant_reach(V, A, u, v)
        vecs = V.available(A)
        if grid_reach(vecs, A, u, v):
            if ok:
                agree_pos += 1
            else:
                problems.append(f"missed reachable {u}->{v} in {A}")
        elif impossible_2d(vecs, A, u, v):
            if ok:
                problems.append(f"claimed reachable {u}->{v} in {A} against an invariant")
            else:
                agree_neg += 1
        else:
            undecided += 1
        if ok:
            try:
                tr = replay_certificate(V, cert)
                if not (validate_run(V, tr) and tr.start == u and tr.end == v):
                    problems.append(f"replay of {u}->{v} invalid")
            except AssertionError as e:
                problems.append(f"replay of {u}->{v} failed: {e}")
    ok = not problems
    return ok, (f"30 instances: {agree_pos} confirmed by grid search, {agree_neg} by invariants, "
                f"{undecided} outside both oracles; all certificates replayed"
                if ok else f"{problems[:3]}")


def coverability_corpus(size=40):
    out = [load(DATA / "pos111.ovas"), load(DATA / "neg111.ovas"), load(DATA / "mixed.ovas")]
    for i in range(size):
        rng = rng_for("cov", i)
        out.append(random_ovas(rng, 3, n_trans=rng.randint(3, 6)))
    return out


def check_9():
    problems = []
    pos = ucover_decide_3d(load(DATA / "pos111.ovas"))
    if pos.verdict != "POSITIVE":
        problems.append(f"pos111 gave {pos.verdict}")
    neg = ucover_decide_3d(load(DATA / "neg111.ovas"))
    empty = Separator3.empty()
    if neg.verdict != "NEGATIVE" or neg.separator != empty:
        problems.append(f"neg111 gave {neg.verdict}")
    if not check_separator_static(empty).ok:
        problems.append("empty separator fails static checks")
    both = runs = seps = 0
    corpus = coverability_corpus()
    for V in corpus:
        run = ucover_search(V)
        S, _ = find_separator(V, per_orthant=20)
        runs += run is not None
        seps += S is not None
        if run is not None and S is not None:
            both += 1
    if both:
        problems.append(f"{both} OVAS with both a covering run and a separator")
    z3_parsed = 0
    try:
        import z3
    except ImportError:  # pragma: no cover - optional oracle
        z3 = None
    for V in corpus[:20]:
        text = emit_smt(V)
        try:
            validate_smt(text)
        except ValueError as e:
            problems.append(f"SMT grammar: {e}")
        if z3 is not None:
            try:
                z3.parse_smt2_string(text)
                z3_parsed += 1
            except z3.Z3Exception as e:
                problems.append(f"z3 rejects SMT: {e}")
    ok = not problems
    return ok, (f"pos111 POSITIVE, neg111 NEGATIVE with the empty separator; {len(corpus)} OVAS "
                f"({runs} runs, {seps} separators, {both} both); 20 SMT scripts pass the grammar check"
                f" ({z3_parsed} also parsed by z3)" + (f"; {problems[:3]}" if problems else ""))


def check_10():
    problems = []
    mut_count = 0
    for name in TCMS:
        M = load(DATA / f"{name}.tcm")
        V, vI = tcm_to_ovas(M)
        n = len(state_order(M))
        want = tcm_reach(M, 200, max_counter=5)

        def small(v):
            return -v[n + 2] <= 5 and -v[n + 3] <= 5

        got = ovas_reach(V, vI, 200, keep=small, skip=[escape_vector(M)])
        confs = {decorr(M, v) for v in got}
        if None in confs:
            problems.append(f"{name}: OVAS reaches a vector outside the image of corr")
        if confs - {None} != want or any(corr(M, c) not in got for c in want):
            problems.append(f"{name}: reach sets differ")
        res = tcm_halts_bounded(M, 200)
        if not res.halts:
            continue
        B = tcm_to_cra_zero_iso(M)
        w = encode_tcm_run(M, res.trace)
        if cra_eval(B, w) != NINE_TENTHS:
            problems.append(f"{name}: faithful encoding gives {cra_eval(B, w)}")
        for label, mw in mutations(M, res.trace):
            mut_count += 1
            val = cra_eval(B, mw)
            if decode_is_faithful(M, mw):
                if val != NINE_TENTHS:
                    problems.append(f"{name}: faithful mutant {label} gives {val}")
            elif val < Fraction(9, 8):
                problems.append(f"{name}: mutant {label} gives {val}")
    M = load(DATA / "copy.tcm")
    G = compose_e2_gadget(M)
    block = encode_tcm_run(M, tcm_halts_bounded(M, 200).trace) + ("#",)
    powers = [cra_eval(G, block * k) for k in range(1, 6)]
    if powers != [NINE_TENTHS ** k for k in range(1, 6)]:
        problems.append(f"composed gadget gives {powers}")
    ok = not problems
    return ok, (f"reach sets equal on {len(TCMS)} TCMs; 9/10 on faithful encodings; {mut_count} "
                f"mutants >= 9/8; composed gadget (9/10)^k for k=1..5" if ok else f"{problems[:3]}")


CHECKS = {n: globals()[f"check_{n}"] for n in TITLES}


def run_one(n):
    t0 = time.perf_counter()
    ok, detail = CHECKS[n]()
    line = f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {TITLES[n]}: {detail} ({time.perf_counter() - t0:.1f}s)"
    return ok, line


@pytest.mark.parametrize("n", sorted(TITLES))
def test_criterion(n, capsys):
    ok, line = run_one(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_one(n) for n in sorted(TITLES)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
