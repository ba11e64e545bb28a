"""Weighted automata in matrix form and cost-register automata."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .semiring import (
    InvariantError,
    ResourceError,
    SemiringTag,
    UsageError,
    semiring,
)

RUN_BUDGET = 10**6


# -- matrices ---------------------------------------------------------------

def mat_identity(sr, n):
    return [[sr.one if i == j else sr.zero for j in range(n)] for i in range(n)]


def mat_mul(sr, a, b):
    n, m = len(a), len(b[0]) if b else 0
    k = len(b)
    add, mul, zero = sr.add, sr.mul, sr.zero
    out = []
    for i in range(n):
        row_a = a[i]
        row = [zero] * m
        for l in range(k):
            x = row_a[l]
            if x == zero:
                continue
            row_b = b[l]
            for j in range(m):
                y = row_b[j]
                if y != zero:
                    row[j] = add(row[j], mul(x, y))
        out.append(row)
    return out


def vec_mat(sr, v, a):
    return mat_mul(sr, [v], a)[0]


def dot(sr, u, v):
    return sr.sum(sr.mul(x, y) for x, y in zip(u, v))


def freeze(m):
    return tuple(tuple(r) for r in m)


@dataclass(frozen=True)
class WeightedAutomaton:
    sr: object
    alphabet: tuple
    states: tuple
    initial: tuple
    final: tuple
    matrices: dict

    def __post_init__(self):
        d = len(self.states)
        if len(set(self.states)) != d:
            raise InvariantError("duplicate state names")
        if len(self.initial) != d or len(self.final) != d:
            raise InvariantError("initial/final vector length differs from dim")
        if set(self.matrices) != set(self.alphabet):
            raise InvariantError("every alphabet symbol needs exactly one matrix")
        for s, m in self.matrices.items():
            if len(m) != d or any(len(r) != d for r in m):
                raise InvariantError(f"matrix {s} is not {d}x{d}")
            for r in m:
                for x in r:
                    self.sr.check(x)
        for x in self.initial + self.final:
            self.sr.check(x)

    @property
    def dim(self):
        return len(self.states)

    def index(self, q):
        return self.states.index(q)

    def matrix_of(self, word):
        m = mat_identity(self.sr, self.dim)
        for s in word:
            m = mat_mul(self.sr, m, self.matrix(s))
        return m

    def matrix(self, s):
        try:
            return self.matrices[s]
        except KeyError:
            raise UsageError(f"unknown symbol {s!r}") from None


def wa_eval(A, w):
    sr = A.sr
    v = list(A.initial)
    for s in w:
        v = vec_mat(sr, v, A.matrix(s))
    return dot(sr, v, A.final)


@dataclass(frozen=True)
class Run:
    sr: object
    states: tuple
    weights: tuple
    start_weight: object
    end_weight: object

    @property
    def val_between(self):
        return self.sr.prod(self.weights)

    @property
    def val_start(self):
        return self.sr.mul(self.start_weight, self.val_between)

    @property
    def val(self):
        return self.sr.mul(self.val_start, self.end_weight)


def enumerate_runs(A, w, budget=RUN_BUDGET, starts=None, require_final=False):
    """All positive-weight state paths over ``w`` (optionally from given starts)."""
    sr = A.sr
    d = A.dim
    mats = [A.matrix(s) for s in w]
    if starts is None:
        starts = range(d)
    out = []
    count = 0
    stack = [(i, (i,), ()) for i in reversed(list(starts))]
    while stack:
        q, path, ws = stack.pop()
        k = len(ws)
        if k == len(mats):
            if require_final and A.final[q] == sr.zero:
                continue
            count += 1
            if count > budget:
                raise ResourceError(f"run enumeration exceeded budget {budget}")
            out.append(Run(sr, tuple(A.states[i] for i in path), ws,
                           A.initial[path[0]], A.final[q]))
            continue
        row = mats[k][q]
        for j in range(d - 1, -1, -1):
            x = row[j]
            if x != sr.zero:
                stack.append((j, path + (j,), ws + (x,)))
    return out


def enumerate_accepting_runs(A, w, budget=RUN_BUDGET):
    sr = A.sr
    starts = [i for i in range(A.dim) if A.initial[i] != sr.zero]
    runs = enumerate_runs(A, w, budget, starts=starts, require_final=True)
    return [r for r in runs if r.val != sr.zero]


def simple_at(A, p):
    """Whether A is simple linearly-ambiguous with distinguished state index p."""
    d = A.dim
    for s in A.alphabet:
        m = A.matrices[s]
        if m[p][p] != 1 or any(m[q][p] != 0 for q in range(d) if q != p):
            return False
        for q in range(d):
            if q != p and sum(1 for j in range(d) if j != p and m[q][j] != 0) > 1:
                return False
    return True


def check_simple_lin_ambiguous(A):
    """Return the distinguished state p of a simple linearly-ambiguous WA, or None."""
    if A.sr.tag is not SemiringTag.QPLUS:
        raise UsageError("simple linear ambiguity is defined over qplus")
    for p in range(A.dim):
        if simple_at(A, p):
            return A.states[p]
    return None


# -- register expressions ---------------------------------------------------

class Expr:
    """Update expression tree: constants, registers, sums and products."""

    def registers(self):
        out = []
        self._collect(out)
        return out


@dataclass(frozen=True)
class Const(Expr):
    value: object

    def eval(self, sr, env):
        return self.value

    def _collect(self, out):
        pass

    def map_consts(self, f):
        return Const(f(self.value))


@dataclass(frozen=True)
class Reg(Expr):
    name: str

    def eval(self, sr, env):
        return env[self.name]

    def _collect(self, out):
        out.append(self.name)

    def map_consts(self, f):
        return self


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def eval(self, sr, env):
        return sr.sum(t.eval(sr, env) for t in self.terms)

    def _collect(self, out):
        for t in self.terms:
            t._collect(out)

    def map_consts(self, f):
        return Add(tuple(t.map_consts(f) for t in self.terms))


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def eval(self, sr, env):
        return sr.prod(t.eval(sr, env) for t in self.factors)

    def _collect(self, out):
        for t in self.factors:
            t._collect(out)

    def map_consts(self, f):
        return Mul(tuple(t.map_consts(f) for t in self.factors))


@dataclass(frozen=True)
class AffineExpr:
    constant: object
    terms: tuple  # sorted (register, coefficient) pairs, coefficients non-zero

    def coeff(self, x, sr):
        for r, c in self.terms:
            if r == x:
                return c
        return sr.zero

    def eval(self, sr, env):
        acc = self.constant
        for r, c in self.terms:
            acc = sr.add(acc, sr.mul(c, env[r]))
        return acc

    def registers(self):
        return [r for r, _ in self.terms]

    def map_consts(self, f):
        return AffineExpr(f(self.constant), tuple((r, f(c)) for r, c in self.terms))

    def to_expr(self):
        parts = [Mul((Const(c), Reg(r))) for r, c in self.terms]
        parts.append(Const(self.constant))
        return Add(tuple(parts))


def affine(sr, constant=None, **terms):
    constant = sr.zero if constant is None else constant
    return AffineExpr(constant, tuple(sorted((r, c) for r, c in terms.items() if c != sr.zero)))


def as_affine(expr, sr):
    """Normalise ``expr`` to ``c + sum s_x x`` or return None when it is not affine."""
    if isinstance(expr, AffineExpr):
        return expr
    res = _affine(expr, sr)
    if res is None:
        return None
    c, t = res
    return AffineExpr(c, tuple(sorted((r, v) for r, v in t.items() if v != sr.zero)))


def _affine(e, sr):
    if isinstance(e, AffineExpr):
        return e.constant, dict(e.terms)
    if isinstance(e, Const):
        return e.value, {}
    if isinstance(e, Reg):
        return sr.zero, {e.name: sr.one}
    if isinstance(e, Add):
        c, t = sr.zero, {}
        for sub in e.terms:
            r = _affine(sub, sr)
            if r is None:
                return None
            c = sr.add(c, r[0])
            for x, v in r[1].items():
                t[x] = sr.add(t.get(x, sr.zero), v)
        return c, t
    if isinstance(e, Mul):
        c, t = sr.one, {}
        for sub in e.factors:
            r = _affine(sub, sr)
            if r is None:
                return None
            c2, t2 = r
            live = {x: v for x, v in t.items() if v != sr.zero}
            live2 = {x: v for x, v in t2.items() if v != sr.zero}
            if live and live2:
                return None
            t = {x: sr.mul(v, c2) for x, v in live.items()}
            t.update({x: sr.mul(c, v) for x, v in live2.items()})
            c = sr.mul(c, c2)
        return c, t
    raise TypeError(f"not an expression: {e!r}")


def as_expr(e):
    return e


# -- cost register automata --------------------------------------------------

@dataclass(frozen=True)
class Cra:
    sr: object
    alphabet: tuple
    states: tuple
    init_state: object
    registers: tuple
    init: dict
    final: dict  # state -> {register: coefficient}; missing entries are zero
    delta: dict  # (state, symbol) -> (state', {register: Expr|AffineExpr})
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.init_state not in self.states:
            raise InvariantError("initial state not among states")
        for x in self.registers:
            if x not in self.init:
                raise InvariantError(f"register {x} has no initial value")
        for (q, s), (q2, upd) in self.delta.items():
            if q not in self.states or q2 not in self.states or s not in self.alphabet:
                raise InvariantError(f"transition ({q},{s}) mentions unknown names")
            for x, e in upd.items():
                if x not in self.registers:
                    raise InvariantError(f"update of unknown register {x}")
                for r in as_expr(e).registers():
                    if r not in self.registers:
                        raise InvariantError(f"expression uses unknown register {r}")
        for q in self.states:
            for s in self.alphabet:
                if (q, s) not in self.delta:
                    raise InvariantError(f"transition function not total: ({q}, {s}) missing")

    def final_coeff(self, q, x):
        return self.final.get(q, {}).get(x, self.sr.zero)

    def update(self, q, s):
        """Full update map of (q, s), registers absent from the file keep their value."""
        key = ("upd", q, s)
        if key not in self._cache:
            q2, upd = self.delta[(q, s)]
            full = {x: upd.get(x, Reg(x)) for x in self.registers}
            self._cache[key] = (q2, full)
        return self._cache[key]

    @property
    def stateless(self):
        return len(self.states) == 1

    @property
    def is_linear(self):
        if "linear" not in self._cache:
            self._cache["linear"] = all(
                as_affine(as_expr(e), self.sr) is not None
                for q, s in self.delta
                for e in self.update(q, s)[1].values()
            )
        return self._cache["linear"]

    def affine_update(self, q, s):
        q2, full = self.update(q, s)
        out = {}
        for x, e in full.items():
            a = as_affine(as_expr(e), self.sr)
            if a is None:
                raise UsageError(f"non-linear update of {x} on ({q},{s})")
            out[x] = a
        return q2, out

    @property
    def is_copyless(self):
        if "copyless" not in self._cache:
            self._cache["copyless"] = all(_copyless(self, q, s) for q, s in self.delta)
        return self._cache["copyless"]

    @property
    def is_independent(self):
        if not self.stateless:
            return False
        for (q, s) in self.delta:
            _, full = self.update(q, s)
            for x, e in full.items():
                a = as_affine(as_expr(e), self.sr)
                if a is None or any(r != x for r, _ in a.terms):
                    return False
        return True


def register_occurrences(B, q, s):
    """How many target expressions of (q, s) use each register."""
    _, full = B.update(q, s)
    counts = {}
    for x, e in full.items():
        a = as_affine(as_expr(e), B.sr)
        if a is not None:
            used = [r for r, _ in a.terms]
        else:
            used = as_expr(e).registers()
        for r in used:
            counts[r] = counts.get(r, 0) + 1
    return counts


def _copyless(B, q, s):
    return all(v <= 1 for v in register_occurrences(B, q, s).values())


def cra_eval(B, w):
    sr = B.sr
    q = B.init_state
    env = dict(B.init)
    for s in w:
        if s not in B.alphabet:
            raise UsageError(f"unknown symbol {s!r}")
        q, full = B.update(q, s)
        env = {x: as_expr(e).eval(sr, env) for x, e in full.items()}
    return sr.sum(sr.mul(B.final_coeff(q, x), env[x]) for x in B.registers)


def cra_state_after(B, w):
    q = B.init_state
    for s in w:
        q = B.delta[(q, s)][0]
    return q


def _fresh(name, taken):
    while name in taken:
        name += "'"
    return name


def cra_to_wa(B):
    """Matrix form of a linear CRA.

    Coordinates are (state, register) pairs plus one constant coordinate per
    state carrying the current-state indicator; for a stateless CRA this is
    the register set plus a single fresh coordinate listed first.
    """
    if not B.is_linear:
        raise UsageError("cra_to_wa needs a linear CRA")
    sr = B.sr
    if B.stateless:
        (q0,) = B.states
        one = _fresh("y", set(B.registers))
        names = {(q0, None): one}
        names.update({(q0, x): x for x in B.registers})
    else:
        names = {}
        for q in B.states:
            names[(q, None)] = f"{q}.1"
            for x in B.registers:
                names[(q, x)] = f"{q}.{x}"
    keys = list(names)
    idx = {k: i for i, k in enumerate(keys)}
    d = len(keys)
    init = [sr.zero] * d
    fin = [sr.zero] * d
    init[idx[(B.init_state, None)]] = sr.one
    for x in B.registers:
        init[idx[(B.init_state, x)]] = B.init[x]
    for q in B.states:
        for x in B.registers:
            fin[idx[(q, x)]] = B.final_coeff(q, x)
    mats = {}
    for s in B.alphabet:
        m = [[sr.zero] * d for _ in range(d)]
        for q in B.states:
            q2, upd = B.affine_update(q, s)
            m[idx[(q, None)]][idx[(q2, None)]] = sr.one
            for x, a in upd.items():
                col = idx[(q2, x)]
                m[idx[(q, None)]][col] = sr.add(m[idx[(q, None)]][col], a.constant)
                for y, c in a.terms:
                    row = idx[(q, y)]
                    m[row][col] = sr.add(m[row][col], c)
        mats[s] = freeze(m)
    return WeightedAutomaton(sr, tuple(B.alphabet), tuple(names[k] for k in keys),
                             tuple(init), tuple(fin), mats)


def independent_coeffs(B):
    """(c, d) maps keyed by (symbol, register) for an Independent CRA."""
    if not B.is_independent:
        raise UsageError("CRA is not Independent")
    (q0,) = B.states
    c, d = {}, {}
    for s in B.alphabet:
        _, upd = B.affine_update(q0, s)
        for x in B.registers:
            a = upd[x]
            c[(s, x)] = a.coeff(x, B.sr)
            d[(s, x)] = a.constant
    return c, d


def independent_eval_closed_form(B, w):
    sr = B.sr
    c, d = independent_coeffs(B)
    (q0,) = B.states
    n = len(w)
    total = sr.zero
    for x in B.registers:
        bx = sr.zero
        for i in range(1, n + 2):
            dv = B.init[x] if i == 1 else d[(w[i - 2], x)]
            term = dv
            for j in range(i, n + 1):
                term = sr.mul(term, c[(w[j - 1], x)])
            bx = sr.add(bx, term)
        total = sr.add(total, sr.mul(B.final_coeff(q0, x), bx))
    return total


def trim(B):
    """Restrict B to the states reachable from its initial state."""
    seen = {B.init_state}
    todo = deque([B.init_state])
    while todo:
        q = todo.popleft()
        for s in B.alphabet:
            q2 = B.delta[(q, s)][0]
            if q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    states = tuple(q for q in B.states if q in seen)
    delta = {k: v for k, v in B.delta.items() if k[0] in seen}
    final = {q: v for q, v in B.final.items() if q in seen}
    return Cra(B.sr, B.alphabet, states, B.init_state, B.registers, dict(B.init), final, delta)


def access_words(B):
    """Shortest word reaching each reachable state (ties by alphabet order)."""
    words = {B.init_state: ()}
    todo = deque([B.init_state])
    while todo:
        q = todo.popleft()
        for s in B.alphabet:
            q2 = B.delta[(q, s)][0]
            if q2 not in words:
                words[q2] = words[q] + (s,)
                todo.append(q2)
    return words


def qplus_to(B, tag):
    """Reinterpret a QPlus CRA's constants in another nonnegative semiring (e.g. max-times)."""
    sr = semiring(tag)
    return Cra(sr, B.alphabet, B.states, B.init_state, B.registers, dict(B.init),
               {q: dict(v) for q, v in B.final.items()},
               {k: (q2, {x: as_expr(e) for x, e in upd.items()}) for k, (q2, upd) in B.delta.items()})


def stateless_cra(sr, alphabet, registers, init, final, updates):
    """Convenience constructor; ``updates`` maps symbol -> {register: expr}."""
    q0 = "q0"
    delta = {(q0, s): (q0, dict(updates.get(s, {}))) for s in alphabet}
    return Cra(sr, tuple(alphabet), (q0,), q0, tuple(registers), dict(init), {q0: dict(final)}, delta)


def words_upto(alphabet, n):
    out = [()]
    frontier = [()]
    for _ in range(n):
        frontier = [w + (a,) for w in frontier for a in alphabet]
        out.extend(frontier)
    return out

