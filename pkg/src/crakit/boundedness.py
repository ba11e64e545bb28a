"""Polynomial-time boundedness for copyless linear CRA over Q>=0(+,.)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .automata import (
    WeightedAutomaton,
    access_words,
    freeze,
    simple_at,
    trim,
)
from .semiring import QPLUS, SemiringTag, UsageError

P_STATE = "p"


@dataclass(frozen=True)
class SimpleLinAmbWa:
    wa: WeightedAutomaton
    p: object
    triples: dict | None = None  # SLAWA letter -> (a, q, q') when built from a CRA

    def __post_init__(self):
        if self.wa.sr.tag is not SemiringTag.QPLUS:
            raise UsageError("simple linear ambiguity is defined over qplus")
        if self.p not in self.wa.states or not simple_at(self.wa, self.wa.index(self.p)):
            raise UsageError("automaton is not simple linearly-ambiguous with the given p")

    @property
    def pi(self):
        return self.wa.index(self.p)


@dataclass(frozen=True)
class PatternWitness:
    kind: str  # "I" or "II"
    q: object
    u: tuple
    value: Fraction  # cycle product (I) or M_u[p,q] (II)
    prefix: tuple = ()
    suffix: tuple = ()


@dataclass(frozen=True)
class BoundednessVerdict:
    bounded: bool
    witness: PatternWitness | None = None
    slawa: SimpleLinAmbWa | None = None

    @property
    def label(self):
        return "BOUNDED" if self.bounded else "UNBOUNDED"


def _check_input(B):
    if B.sr.tag is not SemiringTag.QPLUS:
        raise UsageError("boundedness decider works over qplus")
    if not B.is_linear:
        raise UsageError("CRA is not linear")
    if not B.is_copyless:
        raise UsageError("CRA is not copyless")


def state_name(x, q, stateless):
    return x if stateless else f"{x}@{q}"


def letter_name(a, q, q2, stateless):
    return a if stateless else f"{a}[{q}>{q2}]"


def translate_cra_to_slawa(B):
    """States (X x Q) + {p}; letters (a, q, q'); one-step weights from the affine updates."""
    _check_input(B)
    stateless = B.stateless
    states = [P_STATE] + [(x, q) for q in B.states for x in B.registers]
    names = [P_STATE if s == P_STATE else state_name(s[0], s[1], stateless) for s in states]
    if P_STATE in names[1:]:
        names[0] = P_STATE + "'"
        while names[0] in names[1:]:
            names[0] += "'"
    idx = {s: i for i, s in enumerate(states)}
    d = len(states)
    letters = []
    mats = {}
    triples = {}
    for q in B.states:
        for a in B.alphabet:
            q2, upd = B.affine_update(q, a)
            name = letter_name(a, q, q2, stateless)
            letters.append(name)
            triples[name] = (a, q, q2)
            m = [[Fraction(0)] * d for _ in range(d)]
            m[0][0] = Fraction(1)
            for x, e in upd.items():
                col = idx[(x, q2)]
                m[0][col] = e.constant
                for y, c in e.terms:
                    m[idx[(y, q)]][col] = c
            mats[name] = freeze(m)
    init = [Fraction(0)] * d
    init[0] = Fraction(1)
    fin = [Fraction(0)] * d
    for x in B.registers:
        init[idx[(x, B.init_state)]] = B.init[x]
        for q in B.states:
            fin[idx[(x, q)]] = B.final_coeff(q, x)
    wa = WeightedAutomaton(QPLUS, tuple(letters), tuple(names), tuple(init), tuple(fin), mats)
    return SimpleLinAmbWa(wa, names[0], triples)


def faithful_word(B, S, word):
    """Map a SLAWA word to a CRA word whose value is at least as large.

    Letters are triples (a, q, q'); the word is cut at the last position whose
    source state does not follow on from its predecessor, and the prefix is
    replaced by an access word of that state.
    """
    triples = S.triples
    if triples is None:
        raise UsageError("SLAWA was not built from a CRA")
    tri = [triples[s] for s in word]
    cut = None
    for i, (a, q, q2) in enumerate(tri):
        expected = B.init_state if i == 0 else tri[i - 1][2]
        if q != expected:
            cut = i
    if cut is None:
        return tuple(a for a, _, _ in tri)
    acc = access_words(B)
    q = tri[cut][1]
    if q not in acc:
        raise UsageError("untrimmed CRA: state unreachable")
    return tuple(acc[q]) + tuple(a for a, _, _ in tri[cut:])


def faithful_slawa_word(B, S, w):
    """The SLAWA word (w1,q0,q1)(w2,q1,q2)... of a CRA word."""
    q = B.init_state
    out = []
    for a in w:
        q2 = B.delta[(q, a)][0]
        out.append(letter_name(a, q, q2, B.stateless))
        q = q2
    return tuple(out)


# -- graph helpers ---------------------------------------------------------------

def _edges(S):
    """(src, dst, letter, weight) for every positive entry, letters in alphabet order."""
    wa = S.wa
    out = []
    for s in sorted(wa.alphabet):
        m = wa.matrices[s]
        for i in range(wa.dim):
            for j in range(wa.dim):
                if m[i][j] != 0:
                    out.append((i, j, s, m[i][j]))
    return out


def useful_states(S):
    """States on some positive accepting run (reachable from I>0, co-reachable to F>0)."""
    wa = S.wa
    edges = _edges(S)
    fwd = {i for i in range(wa.dim) if wa.initial[i] != 0}
    todo = deque(fwd)
    while todo:
        i = todo.popleft()
        for a, b, _, _ in edges:
            if a == i and b not in fwd:
                fwd.add(b)
                todo.append(b)
    bwd = {i for i in range(wa.dim) if wa.final[i] != 0}
    todo = deque(bwd)
    while todo:
        j = todo.popleft()
        for a, b, _, _ in edges:
            if b == j and a not in bwd:
                bwd.add(a)
                todo.append(a)
    return fwd & bwd


def restrict_useful(S):
    """The same SLAWA on p plus its useful states; every word keeps its value."""
    wa = S.wa
    keep = sorted(useful_states(S) | {S.pi})
    if len(keep) == wa.dim:
        return S
    mats = {s: freeze([[m[i][j] for j in keep] for i in keep]) for s, m in wa.matrices.items()}
    sub = WeightedAutomaton(wa.sr, wa.alphabet, tuple(wa.states[i] for i in keep),
                            tuple(wa.initial[i] for i in keep), tuple(wa.final[i] for i in keep), mats)
    return SimpleLinAmbWa(sub, S.p, S.triples)


def _bfs_word(edges, sources, targets):
    """Shortest word from any source to any target over the given edge list."""
    prev = {s: None for s in sources}
    todo = deque(sorted(sources))
    while todo:
        i = todo.popleft()
        if i in targets:
            word = []
            while prev[i] is not None:
                i, s = prev[i]
                word.append(s)
            return tuple(reversed(word))
        for a, b, s, _ in edges:
            if a == i and b not in prev:
                prev[b] = (i, s)
                todo.append(b)
    return None


def access_prefix(S, q):
    edges = _edges(S)
    wa = S.wa
    starts = {i for i in range(wa.dim) if wa.initial[i] != 0}
    return _bfs_word(edges, starts, {q})


def access_suffix(S, q):
    rev = [(b, a, s, w) for a, b, s, w in _edges(S)]
    wa = S.wa
    finals = {i for i in range(wa.dim) if wa.final[i] != 0}
    word = _bfs_word(rev, finals, {q})
    return None if word is None else tuple(reversed(word))


# -- pattern detection --------------------------------------------------------------

def detect_pattern_i(S, only_useful=True):
    """A cycle of product > 1 among non-p states, by multiplicative Bellman-Ford.

    With ``only_useful`` the search ignores states that lie on no accepting
    run; such cycles cannot make the output grow.
    """
    pi = S.pi
    useful = (useful_states(S) if only_useful else set(range(S.wa.dim))) - {pi}
    edges = [e for e in _edges(S) if e[0] in useful and e[1] in useful]
    nodes = sorted(useful)
    best = {v: Fraction(1) for v in nodes}
    pred = {v: None for v in nodes}
    hit = None
    for rnd in range(len(nodes) + 1):
        hit = None
        for a, b, s, w in edges:
            cand = best[a] * w
            if cand > best[b]:
                best[b] = cand
                pred[b] = (a, s)
                hit = b
        if hit is None:
            return None
    # walk back |V| steps to land on the cycle, then read it off
    v = hit
    for _ in range(len(nodes)):
        v = pred[v][0]
    cycle_states = [v]
    letters = []
    x = v
    while True:
        a, s = pred[x]
        letters.append(s)
        x = a
        if x == v:
            break
        cycle_states.append(x)
    u = tuple(reversed(letters))
    prod = S.wa.matrix_of(u)[v][v]
    if prod <= 1:
        raise AssertionError("Bellman-Ford cycle extraction failed")
    q = S.wa.states[v]
    if not only_useful:
        return PatternWitness("I", q, u, prod, None, None)
    return PatternWitness("I", q, u, prod, access_prefix(S, v), access_suffix(S, v))


def detect_pattern_ii(S, only_useful=True):
    """A word u with M_u[q,q] = 1 and M_u[p,q] > 0 for some q != p."""
    if detect_pattern_i(S, only_useful) is not None:
        raise UsageError("pattern II search requires that pattern I is absent")
    pi = S.pi
    useful = useful_states(S) if only_useful else set(range(S.wa.dim))
    edges = _edges(S)
    sub = [e for e in edges if e[0] in useful and e[1] in useful and e[0] != pi and e[1] != pi]
    by_letter_c = {}
    for a, b, s, _ in edges:
        if a in useful and b in useful:
            by_letter_c.setdefault(s, []).append((a, b))
    by_letter_b = {}
    for a, b, s, w in sub:
        by_letter_b.setdefault(s, []).append((a, b, w))
    for q in sorted(useful - {pi}):
        res = _product_search(by_letter_c, by_letter_b, pi, q)
        if res is not None:
            u = res
            m = S.wa.matrix_of(u)
            if m[q][q] == 1 and m[pi][q] > 0:
                suffix = access_suffix(S, q) if only_useful else None
                return PatternWitness("II", S.wa.states[q], u, m[pi][q], (), suffix)
            raise AssertionError("pattern II reconstruction inconsistent")
    return None


def _product_search(c_edges, b_edges, pi, q):
    """Max-product path (p,q) -> (q,q) in C x B; returns the word if its product is 1."""
    letters = sorted(set(c_edges) & set(b_edges))
    prod_edges = []
    nodes = set()
    for s in letters:
        for a1, b1 in c_edges[s]:
            for a2, b2, w in b_edges[s]:
                prod_edges.append(((a1, a2), (b1, b2), s, w))
                nodes.update([(a1, a2), (b1, b2)])
    src, dst = (pi, q), (q, q)
    if src not in nodes or dst not in nodes:
        return None
    best = {src: Fraction(1)}
    for _ in range(len(nodes)):
        changed = False
        for a, b, _, w in prod_edges:
            if a in best:
                cand = best[a] * w
                if b not in best or cand > best[b]:
                    best[b] = cand
                    changed = True
        if not changed:
            break
    if best.get(dst) != 1:
        return None
    # shortest path through tight edges, ties by letter order
    tight = [(a, b, s) for a, b, s, w in prod_edges
             if a in best and b in best and best[a] * w == best[b]]
    prev = {src: None}
    todo = deque([src])
    while todo:
        x = todo.popleft()
        if x == dst:
            break
        for a, b, s in tight:
            if a == x and b not in prev:
                prev[b] = (a, s)
                todo.append(b)
    word = []
    x = dst
    while prev[x] is not None:
        x, s = prev[x]
        word.append(s)
    return tuple(reversed(word))


def decide_boundedness(B):
    _check_input(B)
    S = translate_cra_to_slawa(trim(B))
    w = detect_pattern_i(S)
    if w is None:
        w = detect_pattern_ii(S)
    return BoundednessVerdict(w is None, w, S)


def unboundedness_witness_family(S, w, n):
    if w is None or w.kind not in ("I", "II"):
        raise UsageError("not a pattern witness")
    if w.prefix is None or w.suffix is None:
        raise UsageError("witness has no accepting completion")
    if w.q not in S.wa.states or w.q == S.p:
        raise UsageError("witness state does not belong to this automaton")
    qi = S.wa.index(w.q)
    m = S.wa.matrix_of(w.u)
    if w.kind == "I":
        if m[qi][qi] <= 1:
            raise UsageError("witness cycle product is not > 1")
        return tuple(w.prefix) + tuple(w.u) * n + tuple(w.suffix)
    if m[qi][qi] != 1 or m[S.pi][qi] == 0:
        raise UsageError("witness does not realise pattern II")
    return tuple(w.prefix) + tuple(w.u) * n + tuple(w.suffix)
