"""Two-counter machines and the compilers to OVAS and copyless-CRA instances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .automata import Add, Const, Cra, Mul, Reg
from .ovas import Q, Ovas, Orthant, max_orthant, vadd
from .reductions import threshold_to_zero_iso
from .semiring import QPLUS, InvariantError, ResourceError, UsageError

KINDS = ("inc", "dec", "zero")
START, END = "⊢", "⊣"
NINE_TENTHS = Fraction(9, 10)
FIVE_FOURTHS = Fraction(5, 4)
DFA_CAP = 20000


@dataclass(frozen=True)
class TcmTransition:
    kind: str  # inc, dec or zero
    counter: int  # 1 or 2
    src: str
    dst: str

    def __post_init__(self):
        if self.kind not in KINDS or self.counter not in (1, 2):
            raise InvariantError(f"bad transition {self.kind} c{self.counter}")

    @property
    def delta(self):
        v = {"inc": 1, "dec": -1, "zero": 0}[self.kind]
        return (v, 0) if self.counter == 1 else (0, v)

    def __str__(self):
        return f"{self.kind} c{self.counter} {self.src} {self.dst}"


@dataclass(frozen=True)
class TwoCounterMachine:
    states: tuple
    init: str
    halt: str
    transitions: tuple

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise InvariantError("duplicate TCM states")
        for q in (self.init, self.halt):
            if q not in self.states:
                raise InvariantError(f"unknown state {q}")
        for t in self.transitions:
            if t.src not in self.states or t.dst not in self.states:
                raise InvariantError(f"transition {t} mentions an unknown state")

    @property
    def deterministic(self):
        """At most one applicable transition in every configuration shape (c1>0?, c2>0?)."""
        for q in self.states:
            out = [t for t in self.transitions if t.src == q]
            for z1 in (True, False):
                for z2 in (True, False):
                    n = sum(1 for t in out if _enabled(t, 0 if z1 else 1, 0 if z2 else 1))
                    if n > 1:
                        return False
        return True

    def letter(self, t):
        return f"#t{self.transitions.index(t) + 1}"


@dataclass(frozen=True)
class TcmConfiguration:
    state: str
    c1: int
    c2: int

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise InvariantError("counters must be nonnegative")

    def __str__(self):
        return f"{self.state}({self.c1},{self.c2})"


def _enabled(t, c1, c2):
    c = c1 if t.counter == 1 else c2
    if t.kind == "dec":
        return c >= 1
    if t.kind == "zero":
        return c == 0
    return True


def tcm_step(M, conf):
    out = []
    for t in M.transitions:
        if t.src == conf.state and _enabled(t, conf.c1, conf.c2):
            d1, d2 = t.delta
            out.append((t, TcmConfiguration(t.dst, conf.c1 + d1, conf.c2 + d2)))
    return out


@dataclass(frozen=True)
class TcmResult:
    halts: bool
    trace: tuple = ()  # ((transition, configuration), ...) after the initial configuration
    explored: int = 0

    @property
    def label(self):
        return "HALTS" if self.halts else "NOT_WITHIN_BOUND"


def initial_configuration(M):
    return TcmConfiguration(M.init, 0, 0)


def tcm_halts_bounded(M, steps):
    """BFS over configurations up to ``steps`` transitions; a halting run is shortest."""
    start = initial_configuration(M)
    prev = {start: None}
    frontier = [start]
    for depth in range(steps + 1):
        for conf in frontier:
            if conf.state == M.halt:
                trace = []
                while prev[conf] is not None:
                    t, before = prev[conf]
                    trace.append((t, conf))
                    conf = before
                return TcmResult(True, tuple(reversed(trace)), len(prev))
        if depth == steps:
            break
        nxt = []
        for conf in frontier:
            for t, c2 in tcm_step(M, conf):
                if c2 not in prev:
                    prev[c2] = (t, conf)
                    nxt.append(c2)
        frontier = nxt
        if not frontier:
            break
    return TcmResult(False, (), len(prev))


def tcm_reach(M, steps, max_counter=None):
    """Configurations reachable within ``steps`` transitions, optionally capping counters."""
    start = initial_configuration(M)
    seen = {start}
    frontier = [start]
    for _ in range(steps):
        nxt = []
        for conf in frontier:
            for _, c2 in tcm_step(M, conf):
                if max_counter is not None and max(c2.c1, c2.c2) > max_counter:
                    continue
                if c2 not in seen:
                    seen.add(c2)
                    nxt.append(c2)
        if not nxt:
            break
        frontier = nxt
    return seen


def check_trace(M, trace):
    conf = initial_configuration(M)
    for t, nxt in trace:
        if (t, nxt) not in tcm_step(M, conf):
            raise UsageError(f"invalid trace step {conf} --{t}--> {nxt}")
        conf = nxt
    return conf


# -- TCM to OVAS -----------------------------------------------------------------

def state_order(M):
    """Coordinates 1..n: the initial state first, the halting state last."""
    rest = [q for q in M.states if q not in (M.init, M.halt)]
    order = [M.init] + rest
    if M.halt != M.init:
        order.append(M.halt)
    return order


def corr(M, conf):
    order = state_order(M)
    n = len(order)
    i = order.index(conf.state)
    v = [Fraction(-1)] * n + [Fraction(0)] * 4
    v[i] += 2
    v[n] = Fraction(conf.c1 - 1)
    v[n + 1] = Fraction(conf.c2 - 1)
    v[n + 2] = Fraction(-conf.c1)
    v[n + 3] = Fraction(-conf.c2)
    return tuple(v)


def decorr(M, v):
    """Inverse of corr on its image, or None."""
    order = state_order(M)
    n = len(order)
    pos = [i for i in range(n) if v[i] >= 0]
    if len(pos) != 1:
        return None
    c1, c2 = -v[n + 2], -v[n + 3]
    if c1 < 0 or c2 < 0 or c1.denominator != 1 or c2.denominator != 1:
        return None
    conf = TcmConfiguration(order[pos[0]], int(c1), int(c2))
    return conf if corr(M, conf) == tuple(v) else None


def transition_vector(M, t):
    order = state_order(M)
    n = len(order)
    i, j = order.index(t.src), order.index(t.dst)
    v1, v2 = t.delta
    u = [Fraction(0)] * (n + 4)
    u[j] += 2
    u[i] -= 2
    u[n] += v1
    u[n + 2] -= v1
    u[n + 1] += v2
    u[n + 3] -= v2
    return tuple(u)


def transition_orthant(M, t):
    order = state_order(M)
    n = len(order)
    pos = {order.index(t.src)}
    if t.kind == "zero":
        pos.add(n + t.counter + 1)  # coordinate n+l+2, 0-based
    elif t.kind == "dec":
        pos.add(n + t.counter - 1)  # coordinate n+l, 0-based
    return Orthant(1 if k in pos else -1 for k in range(n + 4))


def escape_vector(M):
    return tuple(Fraction(1) for _ in range(len(state_order(M)) + 4))


def escape_orthant(M):
    n = len(state_order(M))
    return Orthant(1 if k == n - 1 else -1 for k in range(n + 4))


def tcm_to_ovas(M):
    n = len(state_order(M))
    items = [(transition_vector(M, t), [transition_orthant(M, t)]) for t in M.transitions]
    items.append((escape_vector(M), [escape_orthant(M)]))
    V = Ovas.build(n + 4, Q, items)
    return V, corr(M, initial_configuration(M))


def ovas_reach(V, start, steps, keep=None, skip=()):
    """Vectors reachable by discrete runs of at most ``steps`` steps (without ``skip`` vectors)."""
    skip = set(skip)
    seen = {tuple(start)}
    frontier = [tuple(start)]
    for _ in range(steps):
        nxt = []
        for v in frontier:
            for t in V.available(max_orthant(v)):
                if t in skip:
                    continue
                w = vadd(Q, v, t)
                if keep is not None and not keep(w):
                    continue
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return seen


# -- TCM to copyless CRA (threshold instance) ---------------------------------------

@dataclass
class Nfa:
    states: set
    initial: set
    accepting: set
    sticky: set  # accepting states that loop on every letter
    delta: dict  # (state, letter) -> set of states


def _pattern_nfa(tag, sigma, steps, prefix_loop=True):
    """Sigma* . L(steps) . Sigma* where steps is a list of (letters-into, letters-loop)."""
    delta = {}
    s0 = (tag, 0)
    states = {s0}
    if prefix_loop:
        for a in sigma:
            delta.setdefault((s0, a), set()).add(s0)
    cur = s0
    for k, (into, loop) in enumerate(steps, start=1):
        nxt = (tag, k)
        states.add(nxt)
        for a in into:
            delta.setdefault((cur, a), set()).add(nxt)
        for a in loop:
            delta.setdefault((nxt, a), set()).add(nxt)
        cur = nxt
    for a in sigma:
        delta.setdefault((cur, a), set()).add(cur)
    return Nfa(states, {s0}, {cur}, {cur}, delta)


def _format_complement(sigma, hashes):
    """Deterministic automaton for the complement of START (#t a* b*)* END."""
    tag = "fmt"
    S = {k: (tag, k) for k in range(6)}
    table = {
        0: {START: 1},
        1: {END: 4, **{h: 2 for h in hashes}},
        2: {"a": 2, "b": 3, END: 4, **{h: 2 for h in hashes}},
        3: {"b": 3, END: 4, **{h: 2 for h in hashes}},
        4: {},
        5: {},
    }
    delta = {}
    for k, row in table.items():
        for a in sigma:
            delta[(S[k], a)] = {S[row.get(a, 5)]}
    acc = {S[k] for k in (0, 1, 2, 3, 5)}
    return Nfa(set(S.values()), {S[0]}, acc, set(), delta)


def violation_nfas(M):
    hashes = [M.letter(t) for t in M.transitions]
    sigma = [START, END, "a", "b"] + hashes
    by = {M.letter(t): t for t in M.transitions}
    nfas = [_format_complement(sigma, hashes)]
    # consecutive transitions that do not chain
    for t in M.transitions:
        bad = [h for h in hashes if by[h].src != t.dst]
        if bad:
            nfas.append(_pattern_nfa(("succ", M.letter(t)), sigma,
                                     [([M.letter(t)], ["a", "b"]), (bad, [])]))
    # last transition does not reach the halting state
    ends = [M.letter(t) for t in M.transitions if t.dst != M.halt]
    if ends:
        nfas.append(_pattern_nfa("end", sigma, [(ends, ["a", "b"]), ([END], [])]))
    if M.init != M.halt:
        nfas.append(_pattern_nfa("empty", sigma, [([START], []), ([END], [])]))
    # first transition must leave the initial state
    first = [M.letter(t) for t in M.transitions if t.src != M.init]
    if first:
        nfas.append(_pattern_nfa("first", sigma, [([START], []), (first, [])]))
    zero1 = [M.letter(t) for t in M.transitions if t.kind == "zero" and t.counter == 1]
    zero2 = [M.letter(t) for t in M.transitions if t.kind == "zero" and t.counter == 2]
    dec1 = [M.letter(t) for t in M.transitions if t.kind == "dec" and t.counter == 1]
    dec2 = [M.letter(t) for t in M.transitions if t.kind == "dec" and t.counter == 2]
    non_ab = [a for a in sigma if a not in ("a", "b")]
    if zero1:  # an a in the block before the zero test
        nfas.append(_pattern_nfa("zero1", sigma, [(["a"], ["b"]), (zero1, [])]))
    if zero2:
        nfas.append(_pattern_nfa("zero2", sigma, [(["b"], []), (zero2, [])]))
    if dec1:  # no a in the block before the decrement
        nfas.append(_pattern_nfa("dec1", sigma, [(non_ab, ["b"]), (dec1, [])]))
    if dec2:
        nfas.append(_pattern_nfa("dec2", sigma, [(non_ab + ["a"], []), (dec2, [])]))
    return sigma, nfas


def determinize(sigma, nfas, cap=DFA_CAP):
    """Subset construction of the union; returns (subsets, delta index table, violating set)."""
    delta = {}
    accepting = set()
    sticky = set()
    for A in nfas:
        delta.update(A.delta)
        accepting |= A.accepting
        sticky |= A.sticky
    sink = frozenset({"violated"})
    start = frozenset(s for A in nfas for s in A.initial)
    index = {start: 0}
    subsets = [start]
    table = {}
    todo = deque([start])
    while todo:
        S = todo.popleft()
        for a in sigma:
            if S == sink:
                T = sink
            else:
                T = frozenset(x for s in S for x in delta.get((s, a), ()))
                if T & sticky:
                    # a sticky violation is final whatever follows
                    T = sink
            if T not in index:
                if len(subsets) >= cap:
                    raise ResourceError(f"violation DFA exceeded {cap} states")
                index[T] = len(subsets)
                subsets.append(T)
                todo.append(T)
            table[(index[S], a)] = index[T]
    bad = {i for i, S in enumerate(subsets) if S == sink or S & accepting}
    return subsets, table, bad


def _names(k):
    return [f"r{i}" for i in range(1, 5)], [f"r{i}'" for i in range(1, 5)]


def _hash_update(kind, counter):
    """Register updates on a transition letter: fold the pending check, then stage the next."""
    r, rp = _names(4)
    half, two = Fraction(1, 2), Fraction(2)
    fold = Mul((Reg("x"),
                Mul((Const(half), Add((Reg(rp[0]), Reg(rp[1]))))),
                Mul((Const(half), Add((Reg(rp[2]), Reg(rp[3])))))))
    upd = {"x": fold}
    shift = {1: (Fraction(1), Fraction(1)), 2: (Fraction(1), Fraction(1))}
    if kind == "inc":
        shift[counter] = (two, half)
    elif kind == "dec":
        shift[counter] = (half, two)
    for blk, (k1, k2) in shift.items():
        i = 2 * (blk - 1)
        upd[rp[i]] = Mul((Const(k1), Reg(r[i])))
        upd[rp[i + 1]] = Mul((Const(k2), Reg(r[i + 1])))
    for x in r:
        upd[x] = Const(Fraction(1))
    return upd


def tcm_to_cra_zero_iso(M, cap=DFA_CAP):
    """Copyless CRA printing 9/10 on faithful halting encodings and at least 9/8 otherwise."""
    sigma, nfas = violation_nfas(M)
    subsets, table, bad = determinize(sigma, nfas, cap)
    names = [f"B{i}" for i in range(len(subsets))]
    r, rp = _names(4)
    regs = ("x", "y") + tuple(r) + tuple(rp)
    init = {x: Fraction(1) for x in regs}
    init["y"] = FIVE_FOURTHS
    half, two = Fraction(1, 2), Fraction(2)
    per_letter = {
        START: {x: Const(Fraction(1)) for x in r},
        "a": {r[0]: Mul((Const(two), Reg(r[0]))), r[1]: Mul((Const(half), Reg(r[1]))),
              rp[0]: Mul((Const(half), Reg(rp[0]))), rp[1]: Mul((Const(two), Reg(rp[1])))},
        "b": {r[2]: Mul((Const(two), Reg(r[2]))), r[3]: Mul((Const(half), Reg(r[3]))),
              rp[2]: Mul((Const(half), Reg(rp[2]))), rp[3]: Mul((Const(two), Reg(rp[3])))},
    }
    end = _hash_update("zero", 1)
    for x in rp:
        end[x] = Const(Fraction(1))
    per_letter[END] = end
    for t in M.transitions:
        per_letter[M.letter(t)] = _hash_update(t.kind, t.counter)
    delta = {}
    for i, q in enumerate(names):
        for a in sigma:
            delta[(q, a)] = (names[table[(i, a)]], dict(per_letter[a]))
    final = {}
    for i, q in enumerate(names):
        final[q] = {"y": Fraction(1)} if i in bad else {"x": NINE_TENTHS}
    B = Cra(QPLUS, tuple(sigma), tuple(names), names[0], regs, init, final, delta)
    if not B.is_copyless:
        raise AssertionError("threshold gadget is not copyless")
    return B


def encode_tcm_run(M, trace):
    check_trace(M, trace)
    word = [START]
    for t, conf in trace:
        word.append(M.letter(t))
        word.extend(["a"] * conf.c1 + ["b"] * conf.c2)
    word.append(END)
    return tuple(word)


def compose_e2_gadget(M):
    """Zero-isolation instance: values (A(w1)/1)...(A(wn)/1) over blocks w1#...wn#."""
    return threshold_to_zero_iso(tcm_to_cra_zero_iso(M), Fraction(1))
