"""Orthant vector addition systems: orthants, runs and the discrete/continuous bridge."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .semiring import INF, InvariantError, UsageError


class Orthant(tuple):
    """Sign vector with entries in {-1, +1}."""

    def __new__(cls, signs):
        signs = tuple(int(s) for s in signs)
        if any(s not in (-1, 1) for s in signs):
            raise InvariantError(f"orthant signs must be +-1: {signs}")
        return super().__new__(cls, signs)

    @classmethod
    def parse(cls, text):
        if any(ch not in "+-" for ch in text):
            raise ValueError(f"bad sign string {text!r}")
        return cls(1 if ch == "+" else -1 for ch in text)

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self)

    __repr__ = __str__

    def le(self, other):
        return all(a <= b for a, b in zip(self, other))

    def pos(self):
        return frozenset(i for i, s in enumerate(self) if s > 0)

    def meet(self, other):
        return Orthant(min(a, b) for a, b in zip(self, other))

    def join(self, other):
        return Orthant(max(a, b) for a, b in zip(self, other))


class NumberKind:
    """Coordinate arithmetic; logq payloads add by multiplication."""

    def __init__(self, name, zero, add, neg, sign, scale, absval):
        self.name = name
        self.zero = zero
        self.add = add
        self.neg = neg
        self.sign = sign
        self.scale = scale
        self.absval = absval

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def __repr__(self):
        return f"NumberKind({self.name})"


def _sgn(x):
    return (x > 0) - (x < 0)


def _log_scale(a, lam):
    lam = Fraction(lam)
    if lam.denominator != 1:
        raise UsageError("non-integer scaling of logq coordinates is not exact")
    return a ** int(lam)


Q = NumberKind("q", Fraction(0), lambda a, b: a + b, lambda a: -a, _sgn,
               lambda a, lam: a * lam, abs)
LOGQ = NumberKind("logq", Fraction(1), lambda a, b: a * b, lambda a: 1 / a,
                  lambda a: _sgn(a - 1), _log_scale, lambda a: max(a, 1 / a))
KINDS = {"q": Q, "logq": LOGQ}


def vadd(kind, u, v):
    return tuple(kind.add(a, b) for a, b in zip(u, v))


def vsub(kind, u, v):
    return tuple(kind.sub(a, b) for a, b in zip(u, v))


def vscale(kind, u, lam):
    return tuple(kind.scale(a, lam) for a in u)


def vle(kind, u, v):
    return all(a <= b for a, b in zip(u, v))


def const_vec(kind, d, value):
    """The vector (value, ..., value) given as a plain rational log-value."""
    if kind is Q:
        return tuple(Fraction(value) for _ in range(d))
    return tuple(Fraction(2) ** int(value) for _ in range(d))


def max_orthant(v, kind=Q):
    return Orthant(1 if kind.sign(x) >= 0 else -1 for x in v)


def min_orthant(v, kind=Q):
    return Orthant(-1 if kind.sign(x) <= 0 else 1 for x in v)


def in_orthant(v, A, kind=Q):
    return all(s * kind.sign(x) >= 0 for s, x in zip(A, v))


def nonneg(v, kind=Q):
    return all(kind.sign(x) >= 0 for x in v)


def strictly_negative(v, kind=Q):
    return all(kind.sign(x) < 0 for x in v)


def minimal_elements(orthants):
    orthants = set(orthants)
    return frozenset(a for a in orthants if not any(b != a and b.le(a) for b in orthants))


@dataclass(frozen=True)
class Ovas:
    dim: int
    kind: NumberKind
    transitions: tuple  # ((vector, frozenset(Orthant)), ...)

    def __post_init__(self):
        for t, mins in self.transitions:
            if len(t) != self.dim or any(len(a) != self.dim for a in mins):
                raise InvariantError("transition or orthant of wrong dimension")
            if not mins:
                raise InvariantError("transition without a minimal orthant")
            for a in mins:
                for b in mins:
                    if a != b and a.le(b):
                        raise InvariantError(f"minimal orthants {a} and {b} are comparable")

    @classmethod
    def build(cls, dim, kind, items):
        """Merge duplicate vectors and keep only minimal orthants."""
        merged = {}
        for t, mins in items:
            t = tuple(Fraction(x) for x in t)
            merged.setdefault(t, set()).update(Orthant(a) for a in mins)
        trans = tuple((t, minimal_elements(m)) for t, m in merged.items())
        return cls(dim, kind, trans)

    @property
    def vectors(self):
        return [t for t, _ in self.transitions]

    def available(self, A):
        return [t for t, mins in self.transitions if any(b.le(A) for b in mins)]

    def is_available(self, t, A):
        return any(t == s and any(b.le(A) for b in mins) for s, mins in self.transitions)

    @property
    def norm(self):
        best = self.kind.zero
        for t, _ in self.transitions:
            for x in t:
                best = max(best, self.kind.absval(x))
        return best

    def canonical(self):
        return sorted((tuple(t), tuple(sorted(str(a) for a in m))) for t, m in self.transitions)


@dataclass(frozen=True)
class RunTrace:
    points: tuple
    mode: str = "discrete"
    deltas: tuple | None = None
    orthants: tuple | None = None
    notes: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.points) - 1

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]


@dataclass(frozen=True)
class Validation:
    ok: bool
    index: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _parallel_factor(a, t):
    """delta > 0 with delta * a == t, or None."""
    delta = None
    for x, y in zip(a, t):
        if x == 0:
            if y != 0:
                return None
            continue
        r = Fraction(y) / x
        if r <= 0 or (delta is not None and r != delta):
            return None
        delta = r
    if delta is None:
        return Fraction(1) if all(y == 0 for y in t) else None
    return delta


def find_step_witness(V, u, v):
    """A witnessing (orthant, delta) for a continuous step u -> v, or None."""
    if V.kind is not Q:
        raise UsageError("continuous semantics is only supported over q")
    A = max_orthant(u).meet(max_orthant(v))
    a = vsub(Q, v, u)
    for t in V.available(A):
        delta = _parallel_factor(a, t)
        if delta is not None:
            return A, delta
    return None


def validate_run(V, trace):
    pts = trace.points
    kind = V.kind
    for i, p in enumerate(pts):
        if len(p) != V.dim:
            raise UsageError(f"point {i} has dimension {len(p)}, expected {V.dim}")
    for i in range(len(pts) - 1):
        u, v = pts[i], pts[i + 1]
        if trace.mode == "discrete":
            t = vsub(kind, v, u)
            if not V.is_available(t, max_orthant(u, kind)):
                return Validation(False, i, f"step {t} not available at {max_orthant(u, kind)}")
            continue
        if kind is not Q:
            raise UsageError("continuous semantics is only supported over q")
        given_a = trace.orthants[i] if trace.orthants else None
        given_d = trace.deltas[i] if trace.deltas else None
        if given_a is not None and given_d is not None:
            A = Orthant(given_a)
            t = vscale(Q, vsub(Q, v, u), given_d)
            if given_d <= 0 or not in_orthant(u, A) or not in_orthant(v, A) or not V.is_available(t, A):
                return Validation(False, i, "supplied orthant/delta do not witness the step")
            continue
        w = find_step_witness(V, u, v)
        if w is None:
            return Validation(False, i, "no orthant and scaling witness the step")
        if given_d is not None and given_d != w[1]:
            return Validation(False, i, f"supplied delta {given_d} differs from {w[1]}")
    return Validation(True)


def _continuous(points, V):
    """Build a continuous trace with witnesses filled in; raise if a step is invalid."""
    orthants, deltas = [], []
    for i in range(len(points) - 1):
        w = find_step_witness(V, points[i], points[i + 1])
        if w is None:
            raise UsageError(f"no witness for step {i}: {points[i]} -> {points[i + 1]}")
        orthants.append(w[0])
        deltas.append(w[1])
    return RunTrace(tuple(points), "continuous", tuple(deltas), tuple(orthants))


def wall_crossings(v, w):
    """Parameters in (0,1) where the segment v->w meets a coordinate hyperplane."""
    lams = set()
    for a, b in zip(v, w):
        if a != b:
            lam = Fraction(a) / (a - b)
            if 0 < lam < 1:
                lams.add(lam)
    return sorted(lams)


def segment_points(v, w):
    pts = [tuple(Fraction(x) for x in v)]
    for lam in wall_crossings(v, w):
        pts.append(tuple(a + lam * (b - a) for a, b in zip(v, w)))
    if tuple(w) != pts[0]:
        pts.append(tuple(Fraction(x) for x in w))
    return pts


def segment_run(V, v, w):
    pts = segment_points(v, w)
    orthants, deltas = [], []
    for i in range(len(pts) - 1):
        wit = find_step_witness(V, pts[i], pts[i + 1])
        if wit is None:
            A = max_orthant(pts[i]).meet(max_orthant(pts[i + 1]))
            raise UsageError(f"segment precondition fails in orthant {A}")
        orthants.append(wit[0])
        deltas.append(wit[1])
    return RunTrace(tuple(pts), "continuous", tuple(deltas), tuple(orthants))


def concat(traces):
    pts = list(traces[0].points)
    ds, os_ = list(traces[0].deltas or ()), list(traces[0].orthants or ())
    for t in traces[1:]:
        if t.points[0] != pts[-1]:
            raise UsageError("traces do not connect")
        pts.extend(t.points[1:])
        ds.extend(t.deltas or ())
        os_.extend(t.orthants or ())
    mode = traces[0].mode
    return RunTrace(tuple(pts), mode, tuple(ds) if mode == "continuous" else None,
                    tuple(os_) if mode == "continuous" else None)


def _require_valid(V, trace, what):
    res = validate_run(V, trace)
    if not res:
        raise UsageError(f"{what}: invalid at step {res.index} ({res.reason})")
    return trace


def scale_run(V, trace, lam):
    lam = Fraction(lam)
    if lam <= 0:
        raise UsageError("scaling factor must be positive")
    _require_valid(V, trace, "scale_run input")
    pts = tuple(vscale(Q, p, lam) for p in trace.points)
    deltas = None
    if trace.deltas is not None:
        deltas = tuple(d / lam for d in trace.deltas)
    out = RunTrace(pts, "continuous", deltas, trace.orthants)
    return _require_valid(V, out, "scale_run output")


def shift_run(V, trace, delta):
    """Shift by a nonnegative vector, re-pausing at walls on each shifted step."""
    delta = tuple(Fraction(x) for x in delta)
    if any(x < 0 for x in delta):
        raise UsageError("shift vector must be nonnegative")
    _require_valid(V, trace, "shift_run input")
    if len(trace) == 0:
        return RunTrace((vadd(Q, trace.start, delta),), "continuous", (), ())
    pieces = [segment_run(V, vadd(Q, u, delta), vadd(Q, v, delta))
              for u, v in zip(trace.points, trace.points[1:])]
    return _require_valid(V, concat(pieces), "shift_run output")


def stretch_run(V, trace, m):
    m = int(m)
    if m < 1:
        raise UsageError("stretch factor must be >= 1")
    v0 = trace.start
    if not strictly_negative(v0):
        raise UsageError("stretch_run needs a strictly negative start")
    _require_valid(V, trace, "stretch_run input")
    delta = vsub(Q, v0, vscale(Q, v0, m))
    out = []
    for i in range(len(trace)):
        u, v = trace.points[i], trace.points[i + 1]
        step = _continuous([u, v], V)
        out.append(shift_run(V, scale_run(V, step, m), delta))
    return out


def dirichlet_approx(r, eps, m_cap=None):
    """Least m >= 1 with |m*r_i - z_i| < eps for all i, scanning upwards."""
    eps = Fraction(eps)
    if eps <= 0:
        raise UsageError("eps must be positive")
    r = [Fraction(x) for x in r]
    bound = lcm(*[x.denominator for x in r]) if r else 1
    if m_cap is not None:
        bound = min(bound, m_cap)
    for m in range(1, bound + 1):
        z = [round(m * x) for x in r]
        if all(abs(m * x - zi) < eps for x, zi in zip(r, z)):
            return m, z
    raise UsageError(f"no m <= {bound} meets eps {eps}")


def discrete_search(V, start, max_len, goal=None, max_nodes=200000):
    """Breadth-first discrete run from ``start`` to the nonnegative orthant.

    Visited vectors dominated by an earlier visited vector are pruned, which
    is sound because a larger vector enables at least the same transitions.
    """
    kind = V.kind
    goal = goal or (lambda p: nonneg(p, kind))
    start = tuple(start)
    if goal(start):
        return RunTrace((start,), "discrete")
    parent = {start: None}
    frontier = [start]
    kept = [start]
    vecs_by_orthant = {}
    for _ in range(max_len):
        nxt = []
        for p in frontier:
            A = max_orthant(p, kind)
            if A not in vecs_by_orthant:
                vecs_by_orthant[A] = sorted(V.available(A))
            for t in vecs_by_orthant[A]:
                q = vadd(kind, p, t)
                if q in parent:
                    continue
                if any(vle(kind, q, k) for k in kept):
                    continue
                parent[q] = p
                if goal(q):
                    path = [q]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return RunTrace(tuple(reversed(path)), "discrete")
                kept = [k for k in kept if not vle(kind, k, q)]
                kept.append(q)
                nxt.append(q)
                if len(parent) > max_nodes:
                    return None
        if not nxt:
            return None
        frontier = nxt
    return None


def discrete_to_continuous(V, v, run=None, max_len=40):
    if V.kind is not Q:
        raise UsageError("continuous semantics is only supported over q")
    v = tuple(Fraction(x) for x in v)
    u = const_vec(Q, V.dim, V.norm)
    base = vsub(Q, v, u)
    if run is None:
        run = discrete_search(V, base, max_len)
        if run is None:
            return None
    if run.start != base:
        raise UsageError("supplied discrete run does not start at v - u")
    _require_valid(V, run, "discrete run")
    if not nonneg(run.end):
        raise UsageError("discrete run does not reach the nonnegative orthant")
    pieces = [segment_run(V, vadd(Q, a, u), vadd(Q, b, u)) for a, b in zip(run.points, run.points[1:])]
    if not pieces:
        return RunTrace((v,), "continuous", (), ())
    return _require_valid(V, concat(pieces), "discrete_to_continuous output")


def continuous_to_discrete(V, trace, v):
    """Turn a continuous covering run from v0 < 0 into a discrete one from v >= v0 + 1."""
    v = tuple(Fraction(x) for x in v)
    v0 = trace.start
    if not strictly_negative(v0):
        raise UsageError("continuous run must start strictly negative")
    if not vle(Q, vadd(Q, v0, const_vec(Q, V.dim, 1)), v):
        raise UsageError("target start must dominate v0 + 1")
    if not nonneg(trace.end):
        raise UsageError("continuous run does not reach the nonnegative orthant")
    _require_valid(V, trace, "continuous_to_discrete input")
    n = len(trace)
    if n == 0:
        return RunTrace((v,), "discrete")
    deltas = []
    bs = []
    for i in range(n):
        w = find_step_witness(V, trace.points[i], trace.points[i + 1])
        A, delta = (trace.orthants[i], trace.deltas[i]) if trace.deltas else w
        deltas.append(Fraction(delta))
        bs.append(vscale(Q, vsub(Q, trace.points[i + 1], trace.points[i]), delta))
    eps = 1 / (n * V.norm) if V.norm else Fraction(1)
    m, ns = dirichlet_approx([1 / d for d in deltas], eps)
    shift = vsub(Q, v0, vscale(Q, v0, m))
    vpp = v
    pts = [v]
    for i in range(n):
        for _ in range(ns[i]):
            vpp = vadd(Q, vpp, bs[i])
            pts.append(vpp)
        vprime = vadd(Q, vscale(Q, trace.points[i + 1], m), shift)
        if not vle(Q, vprime, vpp):
            raise InvariantError(f"chain inequality v''_{i + 1} >= v'_{i + 1} fails")
    out = RunTrace(tuple(pts), "discrete", notes={"m": m, "n": list(ns)})
    res = validate_run(V, out)
    if not res or not nonneg(out.end):
        raise InvariantError(f"constructed discrete run invalid at step {res.index}")
    return out


# -- compilers ----------------------------------------------------------------

def cra_to_ovas(A):
    """Vector per letter with minimal orthant x<=0 where d=+inf, x>=0 otherwise.

    Letters with an infinite c coordinate have no rational vector; they are
    dropped when usable only inside the nonnegative orthant (they cannot help
    a run that has not covered yet) and rejected otherwise.
    """
    from .automata import independent_coeffs
    from .semiring import SemiringTag

    if A.sr.tag not in (SemiringTag.TROPZ, SemiringTag.TROPLOGQ):
        raise UsageError("cra_to_ovas expects a tropical Independent CRA")
    c, d = independent_coeffs(A)
    one = A.sr.one
    for key, val in d.items():
        if val is not INF and val != one:
            raise UsageError(f"not in normal form: d{key} = {val}")
    kind = Q if A.sr.tag is SemiringTag.TROPZ else LOGQ
    regs = A.registers
    items = []
    dropped = []
    for a in A.alphabet:
        orth = Orthant(-1 if d[(a, x)] is INF else 1 for x in regs)
        vec = [c[(a, x)] for x in regs]
        if any(x is INF for x in vec):
            if all(s > 0 for s in orth):
                dropped.append(a)
                continue
            raise UsageError(f"letter {a} has an infinite coefficient outside the positive orthant")
        items.append((vec, [orth]))
    V = Ovas.build(len(regs), kind, items)
    return V, dropped


def letter_name(t, A):
    return "v" + "_".join(str(x) for x in t) + "@" + str(A)


def ovas_to_cra(V):
    """One letter per (vector, minimal orthant) pair; I = F = 1-bar."""
    from .automata import AffineExpr, stateless_cra
    from .semiring import TROPLOGQ, TROPZ

    sr = TROPZ if V.kind is Q else TROPLOGQ
    regs = tuple(f"x{i + 1}" for i in range(V.dim))
    alphabet = []
    updates = {}
    for t, mins in V.transitions:
        for A in sorted(mins):
            name = letter_name(t, A)
            alphabet.append(name)
            upd = {}
            for i, x in enumerate(regs):
                dval = INF if A[i] < 0 else sr.one
                upd[x] = AffineExpr(dval, ((x, t[i]),))
            updates[name] = upd
    if V.kind is Q:
        for t, _ in V.transitions:
            if any(x.denominator != 1 for x in t):
                raise UsageError("zminplus CRA needs integer vectors")
    return stateless_cra(sr, alphabet, regs, {x: sr.one for x in regs},
                         {x: sr.one for x in regs}, updates)
