"""Random instance generators and brute-force oracles shared by the test modules.

The oracles here deliberately avoid the library's own translations: they work
on the register/state graph of a CRA or on plain integer vectors.
"""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction
from pathlib import Path

import networkx as nx

from crakit.automata import AffineExpr, Cra, stateless_cra
from crakit.ovas import Orthant, Ovas, Q
from crakit.semiring import INF, QPLUS, TROPZ

DATA = Path(__file__).parent / "data"
HALF = Fraction(1, 2)
WEIGHTS = (Fraction(0), HALF, Fraction(1), Fraction(2))


def rng_for(name, seed=0):
    return random.Random(f"{name}:{seed}")


# -- random copyless linear CRA over Q(+,.) ---------------------------------------

def random_copyless_cra(rng, max_states=3, max_regs=3, alphabet=("a", "b"), weights=WEIGHTS,
                        const_zero=0.5):
    n = rng.randint(1, max_states)
    m = rng.randint(1, max_regs)
    states = tuple(f"q{i}" for i in range(n))
    regs = tuple(f"x{i}" for i in range(m))
    nonzero = [w for w in weights if w != 0]
    delta = {}
    for q in states:
        for a in alphabet:
            q2 = rng.choice(states)
            targets = {x: [] for x in regs}
            for y in regs:
                x = rng.choice(regs + (None,))
                if x is not None:
                    w = rng.choice(weights)
                    if w != 0:
                        targets[x].append((y, w))
            upd = {}
            for x in regs:
                c = Fraction(0) if rng.random() < const_zero else rng.choice(nonzero)
                upd[x] = AffineExpr(c, tuple(sorted(targets[x])))
            delta[(q, a)] = (q2, upd)
    init = {x: rng.choice(weights) for x in regs}
    final = {}
    for q in states:
        row = {x: rng.choice(weights) for x in regs}
        final[q] = {x: v for x, v in row.items() if v != 0}
    return Cra(QPLUS, tuple(alphabet), states, states[0], regs, init, final, delta)


def random_independent_qplus(rng, max_regs=2, alphabet=("a", "b"),
                             coeffs=(HALF, Fraction(1), Fraction(2)),
                             consts=(Fraction(0), HALF, Fraction(1))):
    m = rng.randint(1, max_regs)
    regs = tuple(f"x{i}" for i in range(m))
    updates = {}
    for a in alphabet:
        updates[a] = {x: AffineExpr(rng.choice(consts), ((x, rng.choice(coeffs)),)) for x in regs}
    init = {x: rng.choice((HALF, Fraction(1), Fraction(2))) for x in regs}
    final = {x: rng.choice((HALF, Fraction(1), Fraction(2))) for x in regs}
    return stateless_cra(QPLUS, alphabet, regs, init, final, updates)


def random_normal_form_trop(rng, max_regs=2, alphabet=("a", "b", "c"), lo=-1, hi=2):
    """Independent Z(min,+) CRA with d in {0, inf}, finite c, I = F = 0."""
    m = rng.randint(1, max_regs)
    regs = tuple(f"x{i}" for i in range(m))
    updates = {}
    for a in alphabet:
        upd = {}
        for x in regs:
            d = rng.choice((Fraction(0), INF))
            upd[x] = AffineExpr(d, ((x, Fraction(rng.randint(lo, hi))),))
        updates[a] = upd
    zero = {x: Fraction(0) for x in regs}
    return stateless_cra(TROPZ, alphabet, regs, dict(zero), dict(zero), updates)


# -- random OVAS ----------------------------------------------------------------------

def all_orthants(d):
    out = [()]
    for _ in range(d):
        out = [o + (s,) for o in out for s in (1, -1)]
    return [Orthant(o) for o in out]


def random_ovas(rng, d, n_trans=3, span=2):
    orths = all_orthants(d)
    items = []
    for _ in range(n_trans):
        vec = [rng.randint(-span, span) for _ in range(d)]
        if not any(vec):
            vec[rng.randrange(d)] = 1
        items.append((vec, [rng.choice(orths)]))
    return Ovas.build(d, Q, items)


# -- brute-force boundedness oracle ------------------------------------------------

def _reachable_states(B):
    seen = {B.init_state}
    todo = deque([B.init_state])
    while todo:
        q = todo.popleft()
        for a in B.alphabet:
            q2 = B.delta[(q, a)][0]
            if q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    return seen


def register_graph(B):
    """Edges (src, dst, letter, weight) of the register graph plus the source node 'p'."""
    live = _reachable_states(B)
    edges = []
    for q in live:
        for a in B.alphabet:
            q2, upd = B.affine_update(q, a)
            letter = (a, q, q2)
            for x, e in upd.items():
                if e.constant != 0:
                    edges.append(("p", (q2, x), letter, e.constant))
                for y, c in e.terms:
                    edges.append(((q, y), (q2, x), letter, c))
    return live, edges


def _closure(starts, adj):
    seen = set(starts)
    todo = list(starts)
    while todo:
        u = todo.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


def useful_nodes(B, live, edges):
    fwd_adj, bwd_adj = {}, {}
    for u, v, _, _ in edges:
        fwd_adj.setdefault(u, set()).add(v)
        bwd_adj.setdefault(v, set()).add(u)
    starts = {"p"} | {(B.init_state, x) for x in B.registers if B.init[x] != 0}
    ends = {(q, x) for q in live for x in B.registers if B.final_coeff(q, x) != 0}
    return _closure(starts, fwd_adj) & _closure(ends, bwd_adj)


def oracle_pattern_i(B):
    live, edges = register_graph(B)
    good = useful_nodes(B, live, edges)
    best = {}
    for u, v, _, w in edges:
        if u != "p" and u in good and v in good:
            best[(u, v)] = max(best.get((u, v), 0), w)
    g = nx.DiGraph()
    g.add_edges_from(best)
    for cyc in nx.simple_cycles(g):
        prod = Fraction(1)
        for i, u in enumerate(cyc):
            prod *= best[(u, cyc[(i + 1) % len(cyc)])]
        if prod > 1:
            return cyc
    return None


def _max_return(good, inner, target):
    """Best product of a path from each node to target; assumes no cycle above 1."""
    best = {target: Fraction(1)}
    for _ in range(len(good) + 1):
        changed = False
        for u, v, _, w in inner:
            if v in best and best[v] * w > best.get(u, 0):
                best[u] = best[v] * w
                changed = True
        if not changed:
            break
    return best


def oracle_pattern_ii(B):
    """Exhaustive product search for a unit-weight loop at n that p can also reach on the same word."""
    live, edges = register_graph(B)
    good = useful_nodes(B, live, edges)
    inner = [e for e in edges if e[0] != "p" and e[0] in good and e[1] in good]
    jumps = [e for e in edges if e[0] == "p" and e[1] in good]
    by_src = {}
    for u, v, a, w in inner + jumps:
        by_src.setdefault(u, []).append((a, v, w))
    letters = {(a, q, B.delta[(q, a)][0]) for q in live for a in B.alphabet}
    for n in sorted(x for x in good if x != "p"):
        ret = _max_return(good, inner, n)
        start = ("p", n, Fraction(1))
        seen = {start}
        todo = deque([start])
        while todo:
            t1, t2, prod = todo.popleft()
            for a, v2, w2 in by_src.get(t2, ()):
                p2 = prod * w2
                if v2 not in ret or p2 * ret[v2] < 1:
                    continue
                moves = [(a2, v1) for a2, v1, _ in by_src.get(t1, ()) if a2 == a]
                if t1 == "p" and a in letters:
                    moves.append((a, "p"))
                for _, v1 in moves:
                    if v1 == n and v2 == n and p2 == 1:
                        return n
                    st = (v1, v2, p2)
                    if st not in seen:
                        seen.add(st)
                        todo.append(st)
    return None


def oracle_bounded(B):
    if oracle_pattern_i(B) is not None:
        return False
    return oracle_pattern_ii(B) is None


# -- discrete reachability helpers ----------------------------------------------------

def in_closed_orthant(v, A):
    return all(s * x >= 0 for s, x in zip(A, v))


def cone_contains_2d(vecs, b):
    """Whether b is a nonnegative combination of 2-d vectors (Caratheodory: two suffice)."""
    b = tuple(Fraction(x) for x in b)
    if not any(b):
        return True
    vecs = [tuple(Fraction(x) for x in t) for t in vecs if any(t)]
    for t in vecs:
        # b = lam * t
        if t[0] * b[1] == t[1] * b[0] and (t[0] * b[0] + t[1] * b[1]) > 0:
            return True
    for i, s in enumerate(vecs):
        for t in vecs[i + 1:]:
            det = s[0] * t[1] - s[1] * t[0]
            if det == 0:
                continue
            a1 = (b[0] * t[1] - b[1] * t[0]) / det
            a2 = (s[0] * b[1] - s[1] * b[0]) / det
            if a1 >= 0 and a2 >= 0:
                return True
    return False


def grid_reach(vecs, A, u, v, step=Fraction(1, 2), max_len=12, bound=6):
    """BFS over points u + step * (integer combination); every point stays in A."""
    u = tuple(Fraction(x) for x in u)
    v = tuple(Fraction(x) for x in v)
    seen = {u}
    frontier = [u]
    for _ in range(max_len):
        nxt = []
        for p in frontier:
            for t in vecs:
                q = tuple(x + step * y for x, y in zip(p, t))
                if q in seen or not in_closed_orthant(q, A) or any(abs(x) > bound for x in q):
                    continue
                if q == v:
                    return True
                seen.add(q)
                nxt.append(q)
        frontier = nxt
    return u == v


def forward_fireable(vecs, A, u):
    """Vectors that can ever fire from u inside A (a coordinate at 0 blocks decrements)."""
    marked = {i for i, x in enumerate(u) if A[i] * x > 0}
    fire = []
    left = list(vecs)
    changed = True
    while changed:
        changed = False
        for t in list(left):
            if all(A[i] * x >= 0 or i in marked for i, x in enumerate(t)):
                fire.append(t)
                left.remove(t)
                marked |= {i for i, x in enumerate(t) if A[i] * x > 0}
                changed = True
    return fire


def impossible_2d(vecs, A, u, v):
    """Sound linear-invariant refutation of u ->* v inside A."""
    b = tuple(Fraction(y) - Fraction(x) for x, y in zip(u, v))
    if not cone_contains_2d(vecs, b):
        return "cone"
    if not cone_contains_2d(forward_fireable(vecs, A, u), b):
        return "trap"
    back = forward_fireable([tuple(-x for x in t) for t in vecs], A, v)
    if not cone_contains_2d([tuple(-x for x in t) for t in back], b):
        return "siphon"
    return None


def reversed_run_covers(V, vectors, w, k):
    """Fire the letters of w from last to first starting at (-k, ..., -k); end >= 0?"""
    from crakit.ovas import max_orthant

    v = tuple(Fraction(-k) for _ in range(V.dim))
    for a in reversed(w):
        t = vectors[a]
        if not V.is_available(t, max_orthant(v)):
            return False
        v = tuple(x + y for x, y in zip(v, t))
    return all(x >= 0 for x in v)


# -- exact maximum of the run count over all words of each length ---------------------

def max_run_counts(S, r, n_max):
    """Exact max over |w| = n of the number of runs with weight product > r, for n = 1..n_max.

    Runs are tracked as (state, product) tails from every start state; tails
    that can never climb above r again are dropped, and equal multisets of
    tails are merged, so every word of each length is covered.
    """
    wa = S.wa
    d = wa.dim
    r = Fraction(r)
    succ = {}
    for a in wa.alphabet:
        m = wa.matrices[a]
        for i in range(d):
            succ[(i, a)] = [(j, m[i][j]) for j in range(d) if m[i][j] != 0]
    best = [Fraction(1)] * d  # best product of any path leaving each state
    for _ in range(d + 1):
        for (i, _a), outs in succ.items():
            for j, w in outs:
                if best[j] * w > best[i]:
                    best[i] = best[j] * w
    level = {tuple(sorted((i, Fraction(1)) for i in range(d)))}
    out = []
    for _ in range(n_max):
        nxt = set()
        for conf in level:
            for a in wa.alphabet:
                tails = []
                for i, prod in conf:
                    for j, w in succ[(i, a)]:
                        p2 = prod * w
                        if p2 * best[j] > r:
                            tails.append((j, p2))
                nxt.add(tuple(sorted(tails)))
        level = nxt
        out.append(max(sum(1 for _, p in conf if p > r) for conf in level))
    return out
