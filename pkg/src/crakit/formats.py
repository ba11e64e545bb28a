"""Text formats for automata, OVAS, runs, separators and two-counter machines.

Every parser reports problems as ``ParseError`` with a line and column; a
well-formed file describing an object that breaks a model invariant raises
``InvariantError`` instead.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .automata import Add, AffineExpr, Const, Cra, Mul, Reg, WeightedAutomaton, freeze
from .coverability import QuarterDesc, Separator3, quarter_keys
from .hardness import TcmTransition, TwoCounterMachine
from .ovas import KINDS, Q, Orthant, Ovas, RunTrace
from .semiring import (
    INF,
    InvariantError,
    ParseError,
    SemiringTag,
    UsageError,
    format_rational,
    parse_literal,
    parse_rational,
    semiring,
)

RESERVED = ("$", "#")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_KEYWORDS = {"inf", "log2"}


class _Line:
    __slots__ = ("no", "text", "tokens")

    def __init__(self, no, text, tokens):
        self.no = no
        self.text = text
        self.tokens = tokens  # (column, token) pairs, columns 1-based

    def col(self, k):
        return self.tokens[k][0] if k < len(self.tokens) else len(self.text) + 1

    def words(self):
        return [t for _, t in self.tokens]

    def error(self, msg, k=None):
        return ParseError(msg, self.no, None if k is None else self.col(k))


def _split(text, inline_comments):
    toks = []
    for m in re.finditer(r"\S+", text):
        if inline_comments and m.group().startswith("#"):
            break
        toks.append((m.start() + 1, m.group()))
    return toks


def _lines(text, inline_comments=False):
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        if raw.lstrip().startswith("#"):
            continue
        toks = _split(raw, inline_comments)
        if toks:
            out.append(_Line(no, raw, toks))
    return out


def _literal(line, k, sr):
    try:
        return sr.check(parse_literal(line.tokens[k][1], sr.tag))
    except (ParseError, InvariantError) as e:
        raise line.error(str(e), k) from None
    except IndexError:
        raise line.error("missing value", k) from None


def _header(lines, kind):
    if not lines:
        raise ParseError(f"empty {kind} file", 1, 1)
    first = lines[0]
    if first.tokens[0][1] != kind:
        raise first.error(f"expected header '{kind}'", 0)
    return first


def _sr_of(line, k):
    try:
        return semiring(line.tokens[k][1])
    except UsageError as e:
        raise line.error(str(e), k) from None
    except IndexError:
        raise line.error("missing semiring name", k) from None


def _check_letters(line, letters, allow_reserved):
    for k, a in enumerate(letters, start=1):
        if a in RESERVED and not allow_reserved:
            raise line.error(f"{a!r} is a reserved letter", k)
    if len(set(letters)) != len(letters):
        raise line.error("duplicate alphabet symbol")


# -- weighted automata ------------------------------------------------------------

def parse_wa(text):
    lines = _lines(text, inline_comments=True)
    head = _header(lines, "wa")
    sr = _sr_of(head, 1)
    alphabet = states = dim = init = fin = None
    mats = {}
    i = 1
    while i < len(lines):
        ln = lines[i]
        key, rest = ln.words()[0], ln.words()[1:]
        if key == "alphabet":
            alphabet = rest
            _check_letters(ln, rest, allow_reserved=True)
        elif key == "states":
            states = rest
        elif key == "dim":
            if len(rest) != 1 or not rest[0].isdigit():
                raise ln.error("dim expects one nonnegative integer", 1)
            dim = int(rest[0])
        elif key in ("I", "F"):
            if dim is None:
                raise ln.error("dim must come before I and F", 0)
            if len(rest) != dim:
                raise ln.error(f"{key} needs {dim} values, got {len(rest)}", 1)
            vec = tuple(_literal(ln, k, sr) for k in range(1, dim + 1))
            if key == "I":
                init = vec
            else:
                fin = vec
        elif key == "matrix":
            if dim is None or alphabet is None:
                raise ln.error("alphabet and dim must come before matrices", 0)
            if len(rest) != 1 or rest[0] not in alphabet:
                raise ln.error("matrix expects one alphabet symbol", 1)
            if rest[0] in mats:
                raise ln.error(f"second matrix for {rest[0]!r}", 1)
            rows = []
            for _ in range(dim):
                i += 1
                if i >= len(lines):
                    raise ParseError(f"matrix {rest[0]} is missing rows", ln.no)
                row = lines[i]
                if len(row.tokens) != dim:
                    raise row.error(f"row needs {dim} entries, got {len(row.tokens)}", 0)
                rows.append([_literal(row, k, sr) for k in range(dim)])
            mats[rest[0]] = freeze(rows)
        else:
            raise ln.error(f"unknown keyword {key!r}", 0)
        i += 1
    for name, val in (("alphabet", alphabet), ("dim", dim), ("I", init), ("F", fin)):
        if val is None:
            raise ParseError(f"missing '{name}' line", head.no)
    if states is None:
        states = [f"q{k + 1}" for k in range(dim)]
    if len(states) != dim:
        raise ParseError(f"states lists {len(states)} names for dim {dim}", head.no)
    missing = [a for a in alphabet if a not in mats]
    if missing:
        raise ParseError(f"no matrix for symbol {missing[0]!r}", head.no)
    return WeightedAutomaton(sr, tuple(alphabet), tuple(states), init, fin, mats)


def write_wa(A):
    tag = A.sr.tag.value
    for a in A.alphabet:
        if a.startswith("#"):
            raise UsageError(f"symbol {a!r} cannot be written: '#' starts a comment in WA files")
    fmt = A.sr.format
    out = [f"wa {tag}", "alphabet " + " ".join(A.alphabet), "states " + " ".join(map(str, A.states)),
           f"dim {A.dim}", "I " + " ".join(fmt(x) for x in A.initial),
           "F " + " ".join(fmt(x) for x in A.final)]
    for a in A.alphabet:
        out.append(f"matrix {a}")
        for row in A.matrices[a]:
            out.append(" ".join(fmt(x) for x in row))
    return "\n".join(out) + "\n"


# -- register expressions -----------------------------------------------------------

_TOKEN = re.compile(r"\s*(log2\([^)]*\)|inf\b|[+-]?\d+(?:/\d+)?|[A-Za-z_][A-Za-z0-9_']*|[().|])")


class _ExprParser:
    def __init__(self, text, line, offset, sr, registers):
        self.text, self.line, self.offset = text, line, offset
        self.sr, self.registers = sr, registers
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}",
                                 line, offset + len(text[:pos]) + len(text[pos:]) - len(text[pos:].lstrip()))
            self.toks.append((offset + m.start(1), m.group(1)))
            pos = m.end()
        self.k = 0

    def _peek(self):
        return self.toks[self.k][1] if self.k < len(self.toks) else None

    def _err(self, msg):
        col = self.toks[self.k][0] if self.k < len(self.toks) else self.offset + len(self.text)
        return ParseError(msg, self.line, col)

    def parse(self):
        if not self.toks:
            raise self._err("empty expression")
        e = self._sum()
        if self.k != len(self.toks):
            raise self._err(f"unexpected {self._peek()!r}")
        return e

    def _sum(self):
        terms = [self._prod()]
        while self._peek() == "|":
            self.k += 1
            terms.append(self._prod())
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def _prod(self):
        facs = [self._atom()]
        while self._peek() == ".":
            self.k += 1
            facs.append(self._atom())
        return facs[0] if len(facs) == 1 else Mul(tuple(facs))

    def _atom(self):
        tok = self._peek()
        if tok is None:
            raise self._err("expression ends early")
        if tok in (".", "|", ")"):
            raise self._err(f"expected a value or register, found {tok!r}")
        if tok == "(":
            self.k += 1
            e = self._sum()
            if self._peek() != ")":
                raise self._err("missing ')'")
            self.k += 1
            return e
        if _IDENT.match(tok) and tok not in _KEYWORDS:
            if tok not in self.registers:
                raise self._err(f"unknown register {tok!r}")
            self.k += 1
            return Reg(tok)
        try:
            v = self.sr.check(parse_literal(tok, self.sr.tag))
        except (ParseError, InvariantError) as e:
            raise self._err(str(e)) from None
        self.k += 1
        return Const(v)


def format_expr(e, sr, nested=False):
    if isinstance(e, AffineExpr):
        parts = [Reg(r) if c == sr.one else Mul((Const(c), Reg(r))) for r, c in e.terms]
        if e.constant != sr.zero or not parts:
            parts.append(Const(e.constant))
        e = parts[0] if len(parts) == 1 else Add(tuple(parts))
    if isinstance(e, Const):
        return sr.format(e.value)
    if isinstance(e, Reg):
        return e.name
    if isinstance(e, Mul):
        return " . ".join(format_expr(f, sr, True) for f in e.factors)
    if isinstance(e, Add):
        body = " | ".join(format_expr(t, sr) for t in e.terms)
        return f"({body})" if nested else body
    raise TypeError(f"cannot format {e!r}")


# -- cost register automata ---------------------------------------------------------

def _assignments(line, sr, registers):
    """``x := e ; y := e`` after the colon of a transition line."""
    text = line.text
    colon = text.index(":", line.tokens[0][0] - 1)
    body_start = colon + 1
    upd = {}
    pos = body_start
    for chunk in text[body_start:].split(";"):
        start = pos
        pos += len(chunk) + 1
        if not chunk.strip():
            continue
        if ":=" not in chunk:
            raise ParseError("assignment needs ':='", line.no, start + 1 + len(chunk) - len(chunk.lstrip()))
        lhs, rhs = chunk.split(":=", 1)
        name = lhs.strip()
        col = start + 1 + len(lhs) - len(lhs.lstrip())
        if name not in registers:
            raise ParseError(f"unknown register {name!r}", line.no, col)
        if name in upd:
            raise ParseError(f"register {name!r} assigned twice", line.no, col)
        rhs_off = start + len(lhs) + 2 + 1
        upd[name] = _ExprParser(rhs, line.no, rhs_off, sr, registers).parse()
    return upd


def _assign_pairs(line, k0, sr, registers):
    out = {}
    for k in range(k0, len(line.tokens)):
        tok = line.tokens[k][1]
        name, eq, val = tok.partition("=")
        if not eq:
            raise line.error("expected register=value", k)
        if name not in registers:
            raise line.error(f"unknown register {name!r}", k)
        try:
            out[name] = sr.check(parse_literal(val, sr.tag))
        except (ParseError, InvariantError) as e:
            raise line.error(str(e), k) from None
    return out


def parse_cra(text):
    lines = _lines(text)
    head = _header(lines, "cra")
    sr = _sr_of(head, 1)
    flags = head.words()[2:]
    for k, f in enumerate(flags, start=2):
        if f != "gadget":
            raise head.error(f"unknown header flag {f!r}", k)
    gadget = "gadget" in flags
    alphabet = states = init_state = registers = None
    init = {}
    final = {}
    trans = []
    for ln in lines[1:]:
        key = ln.words()[0]
        rest = ln.words()[1:]
        if key == "alphabet":
            _check_letters(ln, rest, gadget)
            alphabet = rest
        elif key == "states":
            states = rest
        elif key == "init":
            if len(rest) != 1:
                raise ln.error("init expects one state", 1)
            init_state = rest[0]
        elif key == "registers":
            for k, x in enumerate(rest, start=1):
                if not _IDENT.match(x) or x in _KEYWORDS:
                    raise ln.error(f"bad register name {x!r}", k)
            if len(set(rest)) != len(rest):
                raise ln.error("duplicate register")
            registers = rest
        elif key in ("I", "F", "on"):
            trans.append(ln)
        else:
            raise ln.error(f"unknown keyword {key!r}", 0)
    for name, val in (("alphabet", alphabet), ("registers", registers)):
        if val is None:
            raise ParseError(f"missing '{name}' line", head.no)
    stateless = states is None
    if stateless:
        states, init_state = ["q0"], "q0"
    elif init_state is None:
        init_state = states[0]
    delta = {}
    for ln in trans:
        key = ln.words()[0]
        if key == "I":
            init.update(_assign_pairs(ln, 1, sr, registers))
        elif key == "F":
            if ln.words()[1].endswith(":"):
                q = ln.words()[1][:-1]
                if q not in states:
                    raise ln.error(f"unknown state {q!r}", 1)
                final.setdefault(q, {}).update(_assign_pairs(ln, 2, sr, registers))
            elif stateless:
                final.setdefault("q0", {}).update(_assign_pairs(ln, 1, sr, registers))
            else:
                raise ln.error("stateful CRA needs 'F q: x=v ...'", 1)
        else:
            w = ln.words()
            if len(w) >= 5 and w[3] == "->" and w[4].rstrip(":") != "":
                q, a, a_idx = w[1], w[2], 2
                q2 = w[4][:-1] if w[4].endswith(":") else w[4]
                if not w[4].endswith(":") and (len(w) < 6 or not w[5].startswith(":")):
                    raise ln.error("expected ':' after the target state", 5)
            elif len(w) >= 2 and stateless and (w[2:3] == [":"] or w[1].endswith(":")):
                q = q2 = "q0"
                a_idx = 1
                a = w[1].rstrip(":") if w[1].endswith(":") and len(w[1]) > 1 else w[1]
            else:
                raise ln.error("transition must read 'on q s -> q2 : updates'", 0)
            for k, s in ((1, q), (4, q2)):
                if s not in states:
                    raise ln.error(f"unknown state {s!r}", k)
            if a not in alphabet:
                raise ln.error(f"unknown symbol {a!r}", a_idx)
            if (q, a) in delta:
                raise ln.error(f"second transition for ({q}, {a})", 0)
            delta[(q, a)] = (q2, _assignments(ln, sr, registers))
    for x in registers:
        init.setdefault(x, sr.zero)
    if stateless:
        for a in alphabet:
            delta.setdefault(("q0", a), ("q0", {}))
    return Cra(sr, tuple(alphabet), tuple(states), init_state, tuple(registers), init, final, delta)


def write_cra(B):
    sr = B.sr
    fmt = sr.format
    gadget = any(a in RESERVED for a in B.alphabet)
    stateless = B.states == ("q0",)
    for x in B.registers:
        if not _IDENT.match(x) or x in _KEYWORDS:
            raise UsageError(f"register name {x!r} cannot be written")
    for a in B.alphabet:
        if any(ch.isspace() for ch in a) or a in ("->",) or a.endswith(":"):
            raise UsageError(f"symbol {a!r} cannot be written")
    out = [f"cra {sr.tag.value}" + (" gadget" if gadget else ""),
           "alphabet " + " ".join(B.alphabet)]
    if not stateless:
        out += ["states " + " ".join(map(str, B.states)), f"init {B.init_state}"]
    out.append("registers " + " ".join(B.registers))
    out.append("I " + " ".join(f"{x}={fmt(B.init[x])}" for x in B.registers))
    for q in B.states:
        row = B.final.get(q, {})
        items = " ".join(f"{x}={fmt(row[x])}" for x in B.registers if x in row and row[x] != sr.zero)
        if stateless:
            if items:
                out.append(f"F {items}")
        elif items:
            out.append(f"F {q}: {items}")
    for q in B.states:
        for a in B.alphabet:
            q2, upd = B.delta[(q, a)]
            body = " ; ".join(f"{x} := {format_expr(e, sr)}" for x, e in upd.items())
            out.append(f"on {q} {a} -> {q2} : {body}".rstrip())
    return "\n".join(out) + "\n"


# -- OVAS and runs ---------------------------------------------------------------------

def _scalar(line, k, kind):
    tok = line.tokens[k][1] if k < len(line.tokens) else None
    if tok is None:
        raise line.error("missing coordinate", k)
    try:
        if kind is Q:
            return parse_rational(tok)
        v = parse_literal(tok, SemiringTag.TROPLOGQ)
        if v is INF:
            raise ParseError("inf is not a coordinate")
        return v
    except ParseError as e:
        raise line.error(str(e).split(": ", 1)[-1], k) from None


def format_scalar(x, kind):
    if kind is Q:
        return format_rational(x)
    return f"log2({format_rational(x)})"


def parse_ovas(text):
    lines = _lines(text, inline_comments=True)
    head = _header(lines, "ovas")
    w = head.words()
    if len(w) != 3 or not w[1].isdigit() or w[2] not in KINDS:
        raise head.error("header must read 'ovas <d> <q|logq>'", 1)
    d, kind = int(w[1]), KINDS[w[2]]
    merged = {}
    order = []
    for ln in lines[1:]:
        ws = ln.words()
        if ws[0] != "t":
            raise ln.error(f"unknown keyword {ws[0]!r}", 0)
        if len(ws) != d + 3 or ws[d + 1] != "@":
            raise ln.error(f"expected 't e1 .. e{d} @ s1,s2,...'", min(len(ws), d + 1))
        vec = tuple(_scalar(ln, k, kind) for k in range(1, d + 1))
        mins = set()
        for s in ws[d + 2].split(","):
            if len(s) != d or any(ch not in "+-" for ch in s):
                raise ln.error(f"bad sign string {s!r}", d + 2)
            mins.add(Orthant.parse(s))
        if vec not in merged:
            merged[vec] = set()
            order.append(vec)
        merged[vec] |= mins
    return Ovas(d, kind, tuple((v, frozenset(merged[v])) for v in order))


def write_ovas(V):
    out = [f"ovas {V.dim} {V.kind.name}"]
    for t, mins in V.transitions:
        coords = " ".join(format_scalar(x, V.kind) for x in t)
        out.append(f"t {coords} @ " + ",".join(sorted(str(a) for a in mins)))
    return "\n".join(out) + "\n"


def parse_run(text, kind=Q):
    """Run files: optional ``run discrete|continuous`` header, then one point per line.

    A point line may end with ``delta r @ signs`` describing the step into it.
    """
    lines = _lines(text, inline_comments=True)
    mode = "discrete"
    if lines and lines[0].words()[0] == "run":
        w = lines[0].words()
        if len(w) != 2 or w[1] not in ("discrete", "continuous"):
            raise lines[0].error("header must read 'run discrete|continuous'", 1)
        mode = w[1]
        lines = lines[1:]
    pts, deltas, orths = [], [], []
    for i, ln in enumerate(lines):
        ws = ln.words()
        cut = ws.index("delta") if "delta" in ws else len(ws)
        pts.append(tuple(_scalar(ln, k, kind) for k in range(cut)))
        if cut < len(ws):
            if i == 0:
                raise ln.error("the first point has no incoming step", cut)
            if len(ws) != cut + 4 or ws[cut + 2] != "@":
                raise ln.error("annotation must read 'delta r @ signs'", cut)
            try:
                dv = parse_rational(ws[cut + 1])
                orth = Orthant.parse(ws[cut + 3])
            except (ParseError, ValueError, InvariantError) as e:
                raise ln.error(str(e), cut + 1) from None
            if dv <= 0:
                raise ln.error("delta must be positive", cut + 1)
            deltas.append(dv)
            orths.append(orth)
        elif i > 0:
            deltas.append(None)
            orths.append(None)
    if not pts:
        raise ParseError("run file has no points", 1)
    d = len(pts[0])
    for ln, p in zip(lines, pts):
        if len(p) != d:
            raise ln.error(f"point has {len(p)} coordinates, expected {d}", 0)
    if any(x is None for x in deltas):
        if any(x is not None for x in deltas):
            raise ParseError("either every step or no step carries a delta annotation", lines[0].no)
        return RunTrace(tuple(pts), mode)
    if mode == "discrete" and deltas:
        raise ParseError("delta annotations need 'run continuous'", lines[0].no)
    return RunTrace(tuple(pts), mode, tuple(deltas), tuple(orths))


def write_run(trace, kind=Q):
    out = [f"run {trace.mode}"]
    for i, p in enumerate(trace.points):
        line = " ".join(format_scalar(x, kind) for x in p)
        if i > 0 and trace.deltas:
            line += f" delta {format_rational(Fraction(trace.deltas[i - 1]))} @ {trace.orthants[i - 1]}"
        out.append(line)
    return "\n".join(out) + "\n"


# -- separators --------------------------------------------------------------------------

def parse_separator(text):
    lines = _lines(text, inline_comments=True)
    seen = {}
    for ln in lines:
        w = ln.words()
        if w[0] != "quarter" or len(w) < 6 or w[3] != ":":
            raise ln.error("expected 'quarter <axis> <s1><s2> : ...'", 0)
        if w[1] not in ("1", "2", "3"):
            raise ln.error("axis must be 1, 2 or 3", 1)
        if len(w[2]) != 2 or any(ch not in "+-" for ch in w[2]):
            raise ln.error("signs must be two characters over {+,-}", 2)
        axis = int(w[1]) - 1
        signs = tuple(1 if ch == "+" else -1 for ch in w[2])
        if (axis, signs) in seen:
            raise ln.error("quarter listed twice", 1)
        if w[4] == "bit":
            if len(w) != 6 or w[5] not in ("0", "1"):
                raise ln.error("bit must be 0 or 1", 5)
            if signs[0] != signs[1]:
                raise ln.error("mixed quarters need 'below c strict|nonstrict'", 4)
            seen[(axis, signs)] = QuarterDesc(axis, signs, bit=int(w[5]))
        elif w[4] == "below":
            if len(w) != 7 or w[6] not in ("strict", "nonstrict"):
                raise ln.error("expected 'below <c|inf> <strict|nonstrict>'", 4)
            if signs[0] == signs[1]:
                raise ln.error("aligned quarters need 'bit 0|1'", 4)
            if w[5] == "inf":
                c = INF
            else:
                try:
                    c = parse_rational(w[5])
                except ParseError as e:
                    raise ln.error(str(e), 5) from None
                if c < 0:
                    raise ln.error("threshold must be nonnegative", 5)
            seen[(axis, signs)] = QuarterDesc(axis, signs, c=c, strict=w[6] == "strict")
        else:
            raise ln.error(f"unknown quarter content {w[4]!r}", 4)
    missing = [k for k in quarter_keys() if k not in seen]
    if missing:
        axis, sg = missing[0]
        txt = "".join("+" if s > 0 else "-" for s in sg)
        raise ParseError(f"quarter {axis + 1} {txt} is missing", lines[-1].no if lines else 1)
    return Separator3(tuple(seen[k] for k in quarter_keys()))


def write_separator(S):
    return S.text()


# -- two-counter machines --------------------------------------------------------------

def parse_tcm(text):
    lines = _lines(text, inline_comments=True)
    head = _header(lines, "tcm")
    if len(head.tokens) != 1:
        raise head.error("header takes no arguments", 1)
    states = init = halt = None
    trans = []
    for ln in lines[1:]:
        w = ln.words()
        if w[0] == "states":
            states = w[1:]
        elif w[0] in ("init", "halt"):
            if len(w) != 2:
                raise ln.error(f"{w[0]} expects one state", 1)
            if w[0] == "init":
                init = w[1]
            else:
                halt = w[1]
        elif w[0] in ("inc", "dec", "zero"):
            if len(w) != 4 or w[1] not in ("c1", "c2"):
                raise ln.error("expected 'inc|dec|zero c1|c2 qfrom qto'", 1)
            for k in (2, 3):
                if states is None or w[k] not in states:
                    raise ln.error(f"unknown state {w[k]!r}", k)
            trans.append(TcmTransition(w[0], int(w[1][1]), w[2], w[3]))
        else:
            raise ln.error(f"unknown keyword {w[0]!r}", 0)
    for name, val in (("states", states), ("init", init), ("halt", halt)):
        if val is None:
            raise ParseError(f"missing '{name}' line", head.no)
    return TwoCounterMachine(tuple(states), init, halt, tuple(trans))


def write_tcm(M):
    out = ["tcm", "states " + " ".join(M.states), f"init {M.init}", f"halt {M.halt}"]
    out += [str(t) for t in M.transitions]
    return "\n".join(out) + "\n"


# -- dispatch ------------------------------------------------------------------------------

PARSERS = {
    "wa": parse_wa,
    "cra": parse_cra,
    "ovas": parse_ovas,
    "tcm": parse_tcm,
    "quarter": parse_separator,
    "run": parse_run,
}


def sniff(text):
    for ln in _lines(text):
        return ln.words()[0]
    return None


def parse_text(text, expect=None):
    kind = sniff(text)
    if expect is not None:
        allowed = (expect,) if isinstance(expect, str) else tuple(expect)
        if kind not in allowed:
            raise ParseError(f"expected a {' or '.join(allowed)} file, found {kind!r}", 1, 1)
    if kind not in PARSERS:
        raise ParseError(f"unrecognised file type {kind!r}", 1, 1)
    return PARSERS[kind](text)


def load(path, expect=None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return parse_text(text, expect)


def parse_word(text, alphabet):
    """Split a word argument: whitespace or commas if present, else greedy longest match."""
    text = text.strip()
    if text in ("", "ε", "eps"):
        return ()
    if any(ch.isspace() for ch in text) or "," in text:
        toks = [t for t in re.split(r"[\s,]+", text) if t]
        for t in toks:
            if t not in alphabet:
                raise UsageError(f"unknown symbol {t!r}")
        return tuple(toks)
    syms = sorted(alphabet, key=len, reverse=True)
    out, pos = [], 0
    while pos < len(text):
        for s in syms:
            if text.startswith(s, pos):
                out.append(s)
                pos += len(s)
                break
        else:
            raise UsageError(f"cannot split {text!r} at position {pos + 1}")
    return tuple(out)


def format_word(w):
    if not w:
        return "ε"
    if all(len(a) == 1 for a in w):
        return "".join(w)
    return " ".join(w)


def parse_vector(text, kind=Q):
    toks = [t for t in re.split(r"[\s,]+", text.strip().strip("()")) if t]
    ln = _Line(1, text, [(k + 1, t) for k, t in enumerate(toks)])
    return tuple(_scalar(ln, k, kind) for k in range(len(toks)))
