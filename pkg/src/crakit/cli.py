"""Command-line front end.

Exit codes: 0 conclusive answer, 1 UNKNOWN (or a search budget ran out),
2 parse error, 3 invariant violation, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import formats
from .automata import WeightedAutomaton, cra_eval, cra_to_wa, trim, wa_eval
from .boundedness import (
    decide_boundedness,
    faithful_slawa_word,
    faithful_word,
    restrict_useful,
    translate_cra_to_slawa,
    unboundedness_witness_family,
)
from .coverability import (
    check_separator_condition3,
    check_separator_static,
    first_entry_through_wall,
    ucover_decide_3d,
    ucover_search,
)
from .hardness import (
    compose_e2_gadget,
    tcm_halts_bounded,
    tcm_to_cra_zero_iso,
    tcm_to_ovas,
)
from .monoid import (
    format_tree,
    homomorphism_holds,
    saturate_monoid,
    simon_factorize,
    validate_factorization,
)
from .ovas import Q, continuous_to_discrete, cra_to_ovas, discrete_search, ovas_to_cra, validate_run
from .reductions import STATEMENTS, check_isolation_statements, compute_constants, neg_log_cra, normal_form
from .semiring import InvariantError, ParseError, ResourceError, UsageError
from .smt import emit_smt

EXIT_OK, EXIT_UNKNOWN, EXIT_PARSE, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2, 3, 64
SEED_ENV = "CRAKIT_SEED"
DEFAULT_DEPTH, DEFAULT_SCALE, DEFAULT_LEN = 8, 6, 40


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise _Usage(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _vec(v, kind=Q):
    return "(" + ", ".join(formats.format_scalar(x, kind) for x in v) + ")"


class Report:
    def __init__(self, command):
        self.fields = {"command": command}
        self.text = []
        self.code = EXIT_OK

    def put(self, key, value, show=True):
        self.fields[key] = value
        if show:
            if isinstance(value, list):
                value = ", ".join(str(v) for v in value) if value else "-"
            self.text.append(f"{key}: {value}")

    def line(self, s):
        self.text.append(s)

    def emit(self, as_json, out):
        if as_json:
            out.write(json.dumps(self.fields, sort_keys=True, ensure_ascii=False) + "\n")
        elif self.text:
            out.write("\n".join(self.text) + "\n")


def _load(path, expect):
    if not os.path.isfile(path):
        raise _Usage(f"cannot read {path}")
    return formats.load(path, expect)


def _word(text, alphabet):
    try:
        return formats.parse_word(text, alphabet)
    except UsageError as e:
        raise _Usage(str(e)) from None


def _cra(path):
    return _load(path, "cra")


# -- subcommands ------------------------------------------------------------------------

def cmd_eval(a, rep):
    A = _load(a.file, ("wa", "cra"))
    w = _word(a.word, A.alphabet)
    val = wa_eval(A, w) if isinstance(A, WeightedAutomaton) else cra_eval(A, w)
    rep.put("word", formats.format_word(w))
    rep.put("value", A.sr.format(val))


def cmd_bound(a, rep):
    B = _cra(a.file)
    v = decide_boundedness(B)
    rep.put("verdict", v.label)
    if v.witness is None:
        return
    w = v.witness
    S = v.slawa
    Bt = trim(B)
    rep.put("pattern", w.kind)
    rep.put("state", str(w.q))
    rep.put("cycle", " ".join(w.u))
    words, values = [], []
    for n in range(1, a.samples + 1):
        sw = unboundedness_witness_family(S, w, n)
        cw = faithful_word(Bt, S, sw)
        words.append(formats.format_word(cw))
        values.append(B.sr.format(cra_eval(B, cw)))
    rep.put("witness_words", words)
    rep.put("sample_values", values)


def cmd_zero_iso(a, rep):
    A = _cra(a.file)
    r = check_isolation_statements(A, a.depth)
    rep.put("verdict", r.verdict)
    rep.put("depth", a.depth)
    rep.put("R", str(r.consts.R))
    rep.put("S", str(r.consts.S))
    if r.witness is not None:
        rep.put("witness", formats.format_word(r.witness))
        rep.put("tau", str(r.tau))
        rep.put("pumped_values", [str(p[1]) for p in r.pumped])
    for k in STATEMENTS:
        if k in r.statements:
            rep.put(k, r.statements[k])
    if r.note:
        rep.put("note", r.note)
    if r.verdict == "UNKNOWN":
        rep.code = EXIT_UNKNOWN


def _emit_text(rep, key, text):
    rep.fields[key] = text
    rep.text.append(text.rstrip("\n"))


def cmd_to_wa(a, rep):
    _emit_text(rep, "wa", formats.write_wa(cra_to_wa(_cra(a.file))))


def cmd_to_logcra(a, rep):
    _emit_text(rep, "cra", formats.write_cra(neg_log_cra(_cra(a.file))))


def cmd_normal_form(a, rep):
    res = normal_form(_cra(a.file))
    sr = res.cra.sr
    rep.fields.update({"b": sr.format(res.b), "d": sr.format(res.d), "f": sr.format(res.f)})
    rep.line(f"# b={sr.format(res.b)} d={sr.format(res.d)} f={sr.format(res.f)}")
    _emit_text(rep, "cra", formats.write_cra(res.cra))


def cmd_constants(a, rep):
    k = compute_constants(_cra(a.file))
    rep.put("R", str(k.R))
    rep.put("S", str(k.S))
    rep.put("pool", [str(c) for c in k.consts])


def cmd_to_ovas(a, rep):
    V, dropped = cra_to_ovas(_cra(a.file))
    if dropped:
        sys.stderr.write("dropped letters usable only in the nonnegative orthant: "
                         + " ".join(dropped) + "\n")
    rep.fields["dropped"] = list(dropped)
    _emit_text(rep, "ovas", formats.write_ovas(V))


def cmd_to_cra(a, rep):
    _emit_text(rep, "cra", formats.write_cra(ovas_to_cra(_load(a.file, "ovas"))))


def _run(path, kind):
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return formats.parse_run(text, kind)


def cmd_run_check(a, rep):
    V = _load(a.ovas, "ovas")
    tr = _run(a.run, V.kind)
    if a.mode and a.mode != tr.mode:
        tr = type(tr)(tr.points, a.mode, tr.deltas if a.mode == "continuous" else None,
                      tr.orthants if a.mode == "continuous" else None)
    res = validate_run(V, tr)
    rep.put("mode", tr.mode)
    rep.put("steps", len(tr))
    rep.put("verdict", "VALID" if res else "INVALID")
    if not res:
        rep.put("failed_step", res.index)
        rep.put("reason", res.reason)
        rep.code = EXIT_INVARIANT


def cmd_c2d(a, rep):
    V = _load(a.ovas, "ovas")
    tr = _run(a.run, V.kind)
    tr = type(tr)(tr.points, "continuous", tr.deltas, tr.orthants)
    if a.target:
        v = formats.parse_vector(a.target)
    else:
        v = tuple(x + 1 for x in tr.start)
    out = continuous_to_discrete(V, tr, v)
    rep.fields["m"] = out.notes["m"]
    rep.fields["counts"] = out.notes["n"]
    _emit_text(rep, "run", formats.write_run(out, V.kind))


def _trace_fields(run, kind):
    return [_vec(p, kind) for p in run.points]


def cmd_ucover(a, rep):
    V = _load(a.file, "ovas")
    rep.put("scale", a.scale)
    rep.put("length", a.len)
    rep.put("seed", a.seed)
    if V.dim == 3 and V.kind is Q:
        r = ucover_decide_3d(V, a.scale, a.len, seed=a.seed, per_orthant=a.samples)
        rep.put("verdict", r.verdict)
        if r.run is not None:
            rep.put("start_scale", r.run.notes.get("k"))
            rep.put("run", _trace_fields(r.run, V.kind))
            rep.put("enters_through_wall", first_entry_through_wall(r.run))
            if r.continuous is not None:
                rep.put("continuous_steps", len(r.continuous))
        if r.separator is not None:
            rep.put("certificate", r.certificate)
            rep.put("separator", r.separator.text().strip().splitlines())
        if r.notes:
            rep.put("notes", r.notes)
        if r.verdict == "UNKNOWN":
            rep.code = EXIT_UNKNOWN
        return
    run = ucover_search(V, a.scale, a.len)
    if run is not None:
        rep.put("verdict", "POSITIVE")
        rep.put("start_scale", run.notes.get("k"))
        rep.put("run", _trace_fields(run, V.kind))
    else:
        rep.put("verdict", "UNKNOWN")
        rep.put("notes", ["separator certificates exist only for dimension 3 over q"])
        rep.code = EXIT_UNKNOWN


def cmd_cover(a, rep):
    V = _load(a.file, "ovas")
    start = formats.parse_vector(a.start, V.kind)
    if len(start) != V.dim:
        raise _Usage(f"--from needs {V.dim} coordinates")
    run = discrete_search(V, start, a.depth)
    rep.put("depth", a.depth)
    if run is None:
        rep.put("verdict", "UNKNOWN")
        rep.put("note", "coverability is undecidable in general; only covering runs are conclusive")
        rep.code = EXIT_UNKNOWN
    else:
        rep.put("verdict", "YES")
        rep.put("run", _trace_fields(run, V.kind))


def cmd_check_separator(a, rep):
    V = _load(a.ovas, "ovas")
    S = _load(a.sep, "quarter")
    st = check_separator_static(S)
    rep.put("static", "PASS" if st.ok else "FAIL")
    if st.problems:
        rep.put("problems", st.problems)
    c3 = check_separator_condition3(S, V, seed=a.seed, per_orthant=a.samples)
    rep.put("closure", "VIOLATED" if c3.violated else "NO_VIOLATION_ON_SAMPLES")
    rep.put("seed", a.seed)
    if c3.violated:
        rep.put("from", _vec(c3.u))
        rep.put("to", _vec(c3.v))
        rep.put("orthant", str(c3.orthant))
    ok = st.ok and not c3.violated
    rep.put("verdict", "SEPARATOR (sampled)" if ok else "NOT_A_SEPARATOR")


def cmd_emit_smt(a, rep):
    V = _load(a.file, "ovas")
    if V.kind is not Q:
        sys.stderr.write("warning: logq coordinates are emitted as uninterpreted log2 atoms\n")
    _emit_text(rep, "smt", emit_smt(V))


def cmd_compile_tcm(a, rep):
    M = _load(a.file, "tcm")
    if a.target == "ovas":
        V, vI = tcm_to_ovas(M)
        rep.fields["initial"] = _vec(vI)
        rep.line(f"# initial vector {_vec(vI)}")
        _emit_text(rep, "ovas", formats.write_ovas(V))
    elif a.target == "cra":
        _emit_text(rep, "cra", formats.write_cra(tcm_to_cra_zero_iso(M)))
    else:
        _emit_text(rep, "cra", formats.write_cra(compose_e2_gadget(M)))


def cmd_simulate_tcm(a, rep):
    M = _load(a.file, "tcm")
    r = tcm_halts_bounded(M, a.steps)
    rep.put("verdict", r.label)
    rep.put("steps", a.steps)
    rep.put("explored", r.explored)
    if r.halts:
        rep.put("trace", [f"{t} => {c}" for t, c in r.trace])
    else:
        rep.code = EXIT_UNKNOWN


def _monoid_of(path):
    B = _cra(path)
    Bt = trim(B)
    # states on no accepting run carry no weight and may break the cycle assumptions
    S = restrict_useful(translate_cra_to_slawa(Bt))
    return Bt, S, saturate_monoid(S)


def cmd_monoid(a, rep):
    B, S, m = _monoid_of(a.file)
    rep.put("size", len(m))
    rep.put("idempotents", len(m.idempotents()))
    rng = random.Random(a.seed)
    letters = sorted(S.wa.alphabet)
    bad = 0
    for _ in range(a.pairs):
        u = tuple(rng.choice(letters) for _ in range(rng.randint(0, 6)))
        v = tuple(rng.choice(letters) for _ in range(rng.randint(0, 6)))
        if not homomorphism_holds(m, S, u, v):
            bad += 1
    rep.put("seed", a.seed)
    rep.put("homomorphism_pairs", a.pairs)
    rep.put("homomorphism_failures", bad)
    if a.report:
        c = m.consts
        rep.put("s", [f"{S.wa.states[q]}={c.s[q]}" for q in sorted(c.s)])
        rep.put("e", [f"{S.wa.states[q]}={c.e[q]}" for q in sorted(c.e)])
        rep.put("a", str(c.a))
        rep.put("generators", [f"{g}->{i}" for g, i in sorted(m.generators.items())])


def cmd_factorize(a, rep):
    B, S, m = _monoid_of(a.file)
    w = _word(a.word, B.alphabet)
    if not w:
        raise _Usage("factorize needs a non-empty word")
    sw = faithful_slawa_word(B, S, w)
    seq = [m.generators[s] for s in sw]
    tree = simon_factorize(seq, m)
    problems = validate_factorization(tree, m)
    rep.put("monoid_size", len(m))
    rep.put("height", tree.height)
    rep.put("valid", not problems)
    if problems:
        rep.put("problems", problems)
        rep.code = EXIT_INVARIANT
    rep.fields["tree"] = format_tree(tree, m)
    rep.line(format_tree(tree, m))


# -- parser -----------------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    # suppressed default so a flag given before the command survives the subparser
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable report on stdout")
    p = _Parser(prog="crakit", parents=[common],
                description="Boundedness of cost-register automata and OVAS coverability tools.",
                epilog=f"Exit codes: 0 conclusive, 1 UNKNOWN, 2 parse error, 3 invariant violation, "
                       f"64 usage. Default seed comes from ${SEED_ENV} (else 0).")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    sp = add("eval", cmd_eval, "evaluate a WA or CRA on a word")
    sp.add_argument("file")
    sp.add_argument("word", help="word; letters separated by spaces/commas, or run together")
    sp = add("bound", cmd_bound, "decide boundedness of a copyless linear CRA over qplus")
    sp.add_argument("file")
    sp.add_argument("--samples", type=int, default=5, help="members of the witness family to print")
    sp = add("zero-iso", cmd_zero_iso, "bounded-depth zero-isolation check for an Independent CRA")
    sp.add_argument("file")
    sp.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    sp = add("to-wa", cmd_to_wa, "matrix form of a linear CRA")
    sp.add_argument("file")
    sp = add("to-logcra", cmd_to_logcra, "replace each constant c by -log2 c")
    sp.add_argument("file")
    sp = add("normal-form", cmd_normal_form, "normal form of a tropical Independent CRA")
    sp.add_argument("file")
    sp = add("constants", cmd_constants, "the constants R and S of an Independent CRA")
    sp.add_argument("file")
    sp = add("to-ovas", cmd_to_ovas, "OVAS of a normal-form tropical Independent CRA")
    sp.add_argument("file")
    sp = add("to-cra", cmd_to_cra, "tropical Independent CRA of an OVAS")
    sp.add_argument("file")
    sp = add("run-check", cmd_run_check, "validate a run file against an OVAS")
    sp.add_argument("ovas")
    sp.add_argument("run")
    sp.add_argument("--mode", choices=("discrete", "continuous"))
    sp = add("continuous-to-discrete", cmd_c2d, "turn a continuous covering run into a discrete one")
    sp.add_argument("ovas")
    sp.add_argument("run")
    sp.add_argument("--target", help="start vector of the discrete run (default: v0 + 1)")
    sp = add("ucover", cmd_ucover, "universal coverability: witness search and separators")
    sp.add_argument("file")
    sp.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    sp.add_argument("--len", type=int, default=DEFAULT_LEN)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--samples", type=int, default=50, help="random wall points per orthant")
    sp = add("cover", cmd_cover,
             "fixed-start coverability; undecidable in general, so only YES answers are conclusive")
    sp.add_argument("file")
    sp.add_argument("--from", dest="start", required=True,
                    help="start vector; write --from=-1,-2,0 when it begins with a minus sign")
    sp.add_argument("--depth", type=int, default=DEFAULT_LEN)
    sp = add("check-separator", cmd_check_separator, "check a separator file against an OVAS")
    sp.add_argument("ovas")
    sp.add_argument("sep")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--samples", type=int, default=50)
    sp = add("emit-smt", cmd_emit_smt, "SMT-LIB2 separator-existence query for a 3-OVAS")
    sp.add_argument("file")
    sp = add("compile-tcm", cmd_compile_tcm, "compile a two-counter machine")
    sp.add_argument("file")
    sp.add_argument("--target", choices=("ovas", "cra", "zeroiso"), default="ovas")
    sp = add("simulate-tcm", cmd_simulate_tcm, "bounded halting search for a two-counter machine")
    sp.add_argument("file")
    sp.add_argument("--steps", type=int, default=200)
    sp = add("monoid", cmd_monoid, "saturate the abstraction monoid of a bounded CRA")
    sp.add_argument("file")
    sp.add_argument("--report", action="store_true", help="also print boundary constants")
    sp.add_argument("--pairs", type=int, default=500)
    sp.add_argument("--seed", type=int, default=None)
    sp = add("factorize", cmd_factorize, "factorization tree of a word in the abstraction monoid")
    sp.add_argument("file")
    sp.add_argument("word")
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    old_err = sys.stderr
    sys.stderr = err
    try:
        try:
            a = parser.parse_args(argv)
        except SystemExit as e:
            return e.code if isinstance(e.code, int) else EXIT_USAGE
        if not getattr(a, "fn", None):
            parser.print_usage(err)
            err.write("crakit: error: a command is required\n")
            return EXIT_USAGE
        rep = Report(a.command)
        try:
            if hasattr(a, "seed") and a.seed is None:
                a.seed = _default_seed()
            a.fn(a, rep)
        except _Usage as e:
            err.write(f"crakit: error: {e}\n")
            return EXIT_USAGE
        except ParseError as e:
            err.write(f"parse error: {e}\n")
            return EXIT_PARSE
        except (InvariantError, UsageError) as e:
            err.write(f"invariant violation: {e}\n")
            return EXIT_INVARIANT
        except ResourceError as e:
            err.write(f"budget exceeded: {e}\n")
            return EXIT_UNKNOWN
        rep.emit(getattr(a, "json", False), out)
        return rep.code
    finally:
        sys.stderr = old_err


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
