"""The epsilon-abstraction of a simple linearly-ambiguous WA and its finite monoid.

This is a laboratory for the run-counting argument behind the boundedness
decider: boundary constants s_q and e_q, abstract matrices, saturation of the
abstraction monoid, factorization forests and run counting.  None of it is
on the decision path.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .automata import enumerate_runs
from .boundedness import detect_pattern_i, detect_pattern_ii
from .semiring import ResourceError, UsageError

MONOID_CAP = 10**5


class _Eps:
    """The symbolic entry: positive, below every positive rational, absorbing under +."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "eps"

    def __reduce__(self):
        return (_Eps, ())


EPS = _Eps()


def e_mul(a, b):
    if a == 0 or b == 0:
        return Fraction(0)
    if a is EPS or b is EPS:
        return EPS
    return a * b


def e_add(a, b):
    if a is EPS or b is EPS:
        return EPS
    return a + b


def fmt_entry(x):
    if x is EPS:
        return "eps"
    return str(x)


@dataclass(frozen=True)
class BoundaryConstants:
    p: int
    s: dict  # state index -> Fraction
    e: dict
    a: Fraction

    def threshold(self, q, q2):
        return self.e[q] * self.s[q2]


def check_assumptions(S):
    """Both run-counting assumptions, over every non-p state (not only useful ones)."""
    if detect_pattern_i(S, only_useful=False) is not None:
        return False
    return detect_pattern_ii(S, only_useful=False) is None


def compute_boundary_constants(S):
    """s_q and e_q from the best runs of length at most |Q|; a from their reciprocals."""
    if not check_assumptions(S):
        raise UsageError("automaton violates the cycle assumptions; constants undefined")
    wa = S.wa
    d = wa.dim
    pi = S.pi
    mats = [wa.matrices[a] for a in sorted(wa.alphabet)]
    others = [q for q in range(d) if q != pi]
    s, e = {}, {}
    for q in others:
        # forward: best value of a run of length k starting in q
        cur = {q: Fraction(1)}
        best = Fraction(1)
        for _ in range(d):
            nxt = {}
            for i, v in cur.items():
                for m in mats:
                    for j in range(d):
                        if m[i][j] != 0:
                            c = v * m[i][j]
                            if c > nxt.get(j, 0):
                                nxt[j] = c
            cur = nxt
            if cur:
                best = max(best, max(cur.values()))
        s[q] = 1 / best
        # backward: best value of a run of length k ending in q (may start in p)
        cur = {q: Fraction(1)}
        best = Fraction(1)
        for _ in range(d):
            nxt = {}
            for j, v in cur.items():
                for m in mats:
                    for i in range(d):
                        if m[i][j] != 0:
                            c = v * m[i][j]
                            if c > nxt.get(i, 0):
                                nxt[i] = c
            cur = nxt
            if cur:
                best = max(best, max(cur.values()))
        e[q] = 1 / best
    a = Fraction(1)
    for q in others:
        for q2 in others:
            a = max(a, 1 / (e[q] * s[q2]))
    return BoundaryConstants(pi, s, e, a)


def _threshold(x, q, q2, c):
    if x == 0:
        return Fraction(0)
    if x is EPS or q == c.p or q2 == c.p:
        return EPS
    return EPS if x < c.threshold(q, q2) else x


def abstract_matrix(M, c):
    d = len(M)
    return tuple(tuple(_threshold(M[i][j], i, j, c) for j in range(d)) for i in range(d))


def otimes(M, N, c):
    d = len(M)
    if len(N) != d:
        raise UsageError("dimension mismatch")
    out = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = Fraction(0)
            for k in range(d):
                acc = e_add(acc, e_mul(M[i][k], N[k][j]))
            row.append(_threshold(acc, i, j, c))
        out.append(tuple(row))
    return tuple(out)


def format_abstract(M):
    return "\n".join(" ".join(fmt_entry(x) for x in row) for row in M)


@dataclass
class AbstractMonoid:
    consts: BoundaryConstants
    elements: list  # abstract matrices; index 0 is the identity
    words: list  # a word realising each element
    generators: dict  # symbol -> element index
    _index: dict
    _table: dict

    def __len__(self):
        return len(self.elements)

    def index(self, M):
        try:
            return self._index[M]
        except KeyError:
            raise UsageError("matrix is not an element of the monoid") from None

    def mul(self, i, j):
        key = (i, j)
        if key not in self._table:
            prod = otimes(self.elements[i], self.elements[j], self.consts)
            self._table[key] = self.index(prod)
        return self._table[key]

    def table(self):
        n = len(self)
        return [[self.mul(i, j) for j in range(n)] for i in range(n)]

    def is_idempotent(self, i):
        return self.mul(i, i) == i

    def idempotents(self):
        return [i for i in range(len(self)) if self.is_idempotent(i)]

    def image(self, word):
        i = 0
        for a in word:
            i = self.mul(i, self.generators[a])
        return i


def saturate_monoid(S, c=None, cap=MONOID_CAP):
    if c is None:
        c = compute_boundary_constants(S)
    wa = S.wa
    d = wa.dim
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    one = abstract_matrix(ident, c)
    elements, words, index, table = [one], [()], {one: 0}, {}
    gens = {}
    for a in sorted(wa.alphabet):
        g = abstract_matrix(wa.matrices[a], c)
        if g not in index:
            index[g] = len(elements)
            elements.append(g)
            words.append((a,))
        gens[a] = index[g]
    todo = deque(range(len(elements)))
    while todo:
        i = todo.popleft()
        for a in sorted(gens):
            j = gens[a]
            prod = otimes(elements[i], elements[j], c)
            if prod not in index:
                if len(elements) >= cap:
                    raise ResourceError(
                        f"monoid exceeded {cap} elements; the cycle assumptions probably fail")
                index[prod] = len(elements)
                elements.append(prod)
                words.append(words[i] + (a,))
                todo.append(index[prod])
            table[(i, j)] = index[prod]
    return AbstractMonoid(c, elements, words, gens, index, table)


def homomorphism_holds(m, S, u, v):
    """Abstraction of the concrete product M_uv equals the abstract product of M_u and M_v."""
    wa = S.wa
    c = m.consts
    whole = abstract_matrix(wa.matrix_of(tuple(u) + tuple(v)), c)
    return whole == otimes(abstract_matrix(wa.matrix_of(u), c), abstract_matrix(wa.matrix_of(v), c), c)


# -- factorization forests --------------------------------------------------------

@dataclass(frozen=True)
class FactorNode:
    i: int
    j: int
    label: int
    children: tuple = ()

    @property
    def height(self):
        return 0 if not self.children else 1 + max(ch.height for ch in self.children)


@dataclass(frozen=True)
class FactorizationTree:
    root: FactorNode
    seq: tuple

    @property
    def height(self):
        return self.root.height


def simon_factorize(seq, m):
    """Minimum-height factorization tree by dynamic programming over intervals.

    Any tree meeting the forest invariants is acceptable; the optimal one is
    never higher than the classical bound, so validation against 9|M| holds.
    """
    seq = tuple(seq)
    n = len(seq)
    if n == 0:
        raise UsageError("empty sequence")
    for x in seq:
        if not 0 <= x < len(m):
            raise UsageError(f"element {x} is not in the monoid")
    prod = [[None] * n for _ in range(n)]
    for i in range(n):
        prod[i][i] = seq[i]
        for j in range(i + 1, n):
            prod[i][j] = m.mul(prod[i][j - 1], seq[j])
    idem = {}

    def is_idem(x):
        if x not in idem:
            idem[x] = m.is_idempotent(x)
        return idem[x]

    INFH = n + 1
    h = [[INFH] * n for _ in range(n)]
    how = [[None] * n for _ in range(n)]
    # g[i][j]: best max-block height partitioning [i,j] into blocks labelled prod[i][j]
    g = [[INFH] * n for _ in range(n)]
    gcut = [[None] * n for _ in range(n)]
    for i in range(n):
        h[i][i] = 0
        if is_idem(seq[i]):
            g[i][i] = 0
    for length in range(2, n + 1):
        for i in range(0, n - length + 1):
            j = i + length - 1
            best, choice = INFH, None
            for k in range(i, j):
                v = 1 + max(h[i][k], h[k + 1][j])
                if v < best:
                    best, choice = v, ("bin", k)
            E = prod[i][j]
            gbest, gchoice = INFH, None
            if is_idem(E):
                multi, mcut = INFH, None
                for k in range(i, j):
                    if prod[i][k] == E and prod[k + 1][j] == E:
                        v = max(g[i][k], h[k + 1][j])
                        if v < multi:
                            multi, mcut = v, k
                if mcut is not None and 1 + multi < best:
                    best, choice = 1 + multi, ("idem", mcut)
                gbest, gchoice = min(best, multi), (None if best <= multi else mcut)
            h[i][j], how[i][j] = best, choice
            g[i][j], gcut[i][j] = gbest, gchoice

    def blocks(i, j):
        # blocks of the e-partition realising g[i][j]
        out = []
        while True:
            k = gcut[i][j]
            if k is None:
                out.append((i, j))
                break
            out.append((k + 1, j))
            j = k
        return list(reversed(out))

    def build(i, j):
        if i == j:
            return FactorNode(i, j, seq[i])
        kind, k = how[i][j]
        if kind == "bin":
            kids = (build(i, k), build(k + 1, j))
        else:
            kids = tuple(build(a, b) for a, b in blocks(i, k) + [(k + 1, j)])
        return FactorNode(i, j, prod[i][j], kids)

    return FactorizationTree(build(0, n - 1), seq)


def validate_factorization(tree, m):
    """Returns a list of problems (empty when the tree is a valid forest)."""
    problems = []
    seq = tree.seq
    root = tree.root
    if (root.i, root.j) != (0, len(seq) - 1):
        problems.append("root does not span the sequence")
    stack = [root]
    while stack:
        node = stack.pop()
        if not node.children:
            if node.i != node.j:
                problems.append(f"leaf ({node.i},{node.j}) is not a singleton")
            elif node.label != seq[node.i]:
                problems.append(f"leaf {node.i} mislabelled")
            continue
        kids = node.children
        if kids[0].i != node.i or kids[-1].j != node.j or any(
                a.j + 1 != b.i for a, b in zip(kids, kids[1:])):
            problems.append(f"children of ({node.i},{node.j}) do not partition it")
        lab = kids[0].label
        for ch in kids[1:]:
            lab = m.mul(lab, ch.label)
        if lab != node.label:
            problems.append(f"label of ({node.i},{node.j}) is not the product of its children")
        if len(kids) != 2:
            e = kids[0].label
            if len(kids) < 2 or any(ch.label != e for ch in kids) or not m.is_idempotent(e):
                problems.append(f"node ({node.i},{node.j}) breaks the idempotent rule")
        stack.extend(kids)
    if tree.height > 9 * len(m):
        problems.append(f"height {tree.height} exceeds 9*{len(m)}")
    return problems


def format_tree(tree, m, words=None):
    lines = []

    def rec(node, depth):
        tag = " idem" if m.is_idempotent(node.label) else ""
        lines.append(f"{'  ' * depth}({node.i + 1},{node.j + 1}) label={node.label}{tag}")
        for ch in node.children:
            rec(ch, depth + 1)

    rec(tree.root, 0)
    return "\n".join(lines)


# -- runs ---------------------------------------------------------------------------

def count_runs_above(S, w, r, budget=10**6):
    """|{runs rho over w from any state : val(rho) > r}|, ignoring initial/final weights."""
    r = Fraction(r)
    runs = enumerate_runs(S.wa, tuple(w), budget)
    return sum(1 for rho in runs if rho.val_between > r)
