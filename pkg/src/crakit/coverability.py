"""Universal coverability for OVAS: reachability oracle, separators and witness search."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import linear
from .ovas import (
    Q,
    Orthant,
    RunTrace,
    const_vec,
    discrete_search,
    discrete_to_continuous,
    in_orthant,
    max_orthant,
    nonneg,
    segment_run,
    strictly_negative,
    validate_run,
    concat,
)
from .semiring import INF, UsageError


# -- continuous reachability inside one orthant -------------------------------

@dataclass(frozen=True)
class ReachCertificate:
    orthant: Orthant
    source: tuple
    target: tuple
    flow: tuple  # ((vector, alpha), ...) in original coordinates
    forward: tuple  # support vectors in forward-firing order
    backward: tuple  # support vectors in backward-firing order


def _flip(A, v):
    return tuple(s * x for s, x in zip(A, v))


def _fireable(marked, vecs, backward=False):
    marked = set(marked)
    order = []
    left = list(vecs)
    changed = True
    while changed:
        changed = False
        for t in list(left):
            need = {i for i, x in enumerate(t) if (x > 0 if backward else x < 0)}
            if need <= marked:
                order.append(t)
                left.remove(t)
                marked |= {i for i, x in enumerate(t) if (x < 0 if backward else x > 0)}
                changed = True
    return order


def _max_support_flow(vecs, b, interior_start=False):
    """alpha >= 0 with maximal support and sum alpha_t t == b (or b - sum > 0 componentwise)."""
    d = len(b)
    names = [f"a{i}" for i in range(len(vecs))]

    def base():
        cons = [({n: -1}, "<=", 0) for n in names]
        for k in range(d):
            coeffs = {n: t[k] for n, t in zip(names, vecs) if t[k] != 0}
            if interior_start:
                # start = b - sum alpha t must be strictly positive
                cons.append((coeffs, "<", b[k]))
            else:
                cons.append((coeffs, "==", b[k]))
        return cons

    sol = linear.solve(base(), names)
    if sol is None:
        return None
    sols = [sol]
    support = {n for n in names if sol[n] > 0}
    for n in names:
        if n in support:
            continue
        s = linear.solve(base() + [({n: -1}, "<", 0)], names)
        if s is not None:
            sols.append(s)
            support |= {m for m in names if s[m] > 0}
    avg = {n: sum(s[n] for s in sols) / len(sols) for n in names}
    return {vecs[i]: avg[n] for i, n in enumerate(names) if avg[n] > 0}


def continuous_orthant_reach(V, A, u, v):
    """Decide u ->*_{c,A} v; returns (bool, certificate or None)."""
    A = Orthant(A)
    u = tuple(Fraction(x) for x in u)
    v = tuple(Fraction(x) for x in v)
    if not in_orthant(u, A) or not in_orthant(v, A):
        raise UsageError("source and target must lie in the orthant")
    if u == v:
        return True, ReachCertificate(A, u, v, (), (), ())
    fu, fv = _flip(A, u), _flip(A, v)
    vecs = sorted({_flip(A, t) for t in V.available(A)})
    b = tuple(y - x for x, y in zip(fu, fv))
    live = list(vecs)
    while live:
        flow = _max_support_flow(live, b)
        if flow is None:
            return False, None
        supp = sorted(flow)
        fwd = _fireable({i for i, x in enumerate(fu) if x > 0}, supp)
        bwd = _fireable({i for i, x in enumerate(fv) if x > 0}, supp, backward=True)
        keep = sorted(set(fwd) & set(bwd))
        if keep == supp:
            cert = ReachCertificate(
                A, u, v,
                tuple((_flip(A, t), flow[t]) for t in supp),
                tuple(_flip(A, t) for t in fwd),
                tuple(_flip(A, t) for t in bwd),
            )
            return True, cert
        live = keep
    return False, None


def reach_from_interior(V, A, v):
    """Is v reachable inside A from some point of A's interior?  Returns (bool, start)."""
    A = Orthant(A)
    v = tuple(Fraction(x) for x in v)
    fv = _flip(A, v)
    live = sorted({_flip(A, t) for t in V.available(A)})
    if all(x > 0 for x in fv):
        return True, v
    while live:
        flow = _max_support_flow(live, fv, interior_start=True)
        if flow is None:
            return False, None
        supp = sorted(flow)
        bwd = _fireable({i for i, x in enumerate(fv) if x > 0}, supp, backward=True)
        keep = sorted(set(bwd))
        if keep == supp:
            start = list(fv)
            for t, a in flow.items():
                for k in range(len(start)):
                    start[k] -= a * t[k]
            return True, _flip(A, tuple(start))
        live = keep
    return False, None


def replay_certificate(V, cert, attempts=12):
    """Fine-grained continuous run realising a certificate; raises if none found.

    Small forward and backward firings put every touched coordinate strictly
    inside the orthant; the remaining flow then follows the straight segment
    between those two points in ever finer rounds.
    """
    A = cert.orthant
    if not cert.flow:
        return RunTrace((cert.source,), "continuous", (), ())
    flow = dict(cert.flow)
    biggest = max(abs(x) for t in flow for x in t) or 1
    amount = min(flow.values()) / 4
    ratio = Fraction(1, 2 * int(biggest) * len(flow) + 2)

    def fire(p, t, a):
        return tuple(x + a * y for x, y in zip(p, t))

    def attempt(amount, rounds):
        fwd = [(t, amount * ratio ** k) for k, t in enumerate(cert.forward)]
        bwd = [(t, amount * ratio ** k) for k, t in enumerate(cert.backward)]
        rest = dict(flow)
        for t, a in fwd + bwd:
            rest[t] -= a
        if any(x < 0 for x in rest.values()):
            return None
        p = cert.source
        pts, steps = [p], []
        for t, a in fwd:
            p = fire(p, t, a)
            pts.append(p)
            steps.append(a)
        for _ in range(rounds):
            for t in sorted(rest):
                if rest[t] > 0:
                    a = rest[t] / rounds
                    p = fire(p, t, a)
                    pts.append(p)
                    steps.append(a)
        qs = [cert.target]
        for t, a in bwd:
            qs.append(fire(qs[-1], t, -a))
        if p != qs[-1]:
            raise AssertionError("certificate flow does not connect source and target")
        for k in range(len(bwd) - 1, -1, -1):
            pts.append(qs[k])
            steps.append(bwd[k][1])
        trace = RunTrace(tuple(pts), "continuous", tuple(1 / a for a in steps),
                         tuple(A for _ in steps))
        return trace if validate_run(V, trace) else None

    for _ in range(attempts):
        for rounds in (4, 16, 64, 256):
            trace = attempt(amount, rounds)
            if trace is not None:
                return trace
        amount /= 2
    raise AssertionError("could not replay reachability certificate")


# -- separators for 3-dimensional OVAS ----------------------------------------

@dataclass(frozen=True)
class QuarterDesc:
    axis: int  # coordinate that is zero
    signs: tuple  # signs of the two free coordinates, in increasing index order
    bit: int | None = None
    c: object = None  # Fraction or INF for mixed quarters
    strict: bool = True

    @property
    def free(self):
        return tuple(i for i in range(3) if i != self.axis)

    @property
    def aligned(self):
        return self.signs[0] == self.signs[1]

    def contains_point(self, x):
        if x[self.axis] != 0:
            return False
        return all(s * x[i] >= 0 for s, i in zip(self.signs, self.free))

    def member(self, x):
        if self.aligned:
            return bool(self.bit)
        p = self.free[self.signs.index(1)]
        n = self.free[self.signs.index(-1)]
        x1, x2 = x[p], -x[n]
        if self.c is INF:
            return True if not self.strict else x2 > 0
        return x1 < self.c * x2 if self.strict else x1 <= self.c * x2

    def empty(self):
        if self.aligned:
            return not self.bit
        return self.c == 0 and self.strict

    def text(self):
        sg = "".join("+" if s > 0 else "-" for s in self.signs)
        head = f"quarter {self.axis + 1} {sg} :"
        if self.aligned:
            return f"{head} bit {self.bit}"
        c = "inf" if self.c is INF else str(self.c)
        return f"{head} below {c} {'strict' if self.strict else 'nonstrict'}"


def quarter_keys():
    return [(axis, (s1, s2)) for axis in range(3) for s1 in (1, -1) for s2 in (1, -1)]


@dataclass(frozen=True)
class Separator3:
    quarters: tuple  # 12 QuarterDesc in quarter_keys() order

    @classmethod
    def empty(cls):
        qs = []
        for axis, sg in quarter_keys():
            if sg[0] == sg[1]:
                qs.append(QuarterDesc(axis, sg, bit=0))
            else:
                qs.append(QuarterDesc(axis, sg, c=Fraction(0), strict=True))
        return cls(tuple(qs))

    def get(self, axis, signs):
        for q in self.quarters:
            if q.axis == axis and q.signs == tuple(signs):
                return q
        raise KeyError((axis, signs))

    def replace(self, new):
        return Separator3(tuple(new if (q.axis, q.signs) == (new.axis, new.signs) else q
                                for q in self.quarters))

    def quarters_of(self, x):
        return [q for q in self.quarters if q.contains_point(x)]

    def member(self, x):
        x = tuple(Fraction(c) for c in x)
        if all(c == 0 for c in x):
            return False
        return any(q.member(x) for q in self.quarters_of(x))

    def text(self):
        return "\n".join(q.text() for q in self.quarters) + "\n"


def axis_ray(k, sign):
    return tuple(Fraction(sign) if i == k else Fraction(0) for i in range(3))


@dataclass
class StaticReport:
    ok: bool
    problems: list = field(default_factory=list)


def check_separator_static(S):
    problems = []
    for k in range(3):
        for sign in (1, -1):
            ray = axis_ray(k, sign)
            vals = {q.member(ray) for q in S.quarters_of(ray)}
            if len(vals) > 1:
                problems.append(f"ray {'+' if sign > 0 else '-'}e{k + 1} has inconsistent membership")
    for q in S.quarters:
        if q.aligned and q.signs == (1, 1) and q.bit:
            problems.append(f"positive quarter in plane x{q.axis + 1}=0 is non-empty")
    for k in range(3):
        if any(q.member(axis_ray(k, 1)) for q in S.quarters_of(axis_ray(k, 1))):
            problems.append(f"positive ray e{k + 1} is a member")
    for q, need in _downward_requirements(S):
        if not S.get(*need).bit:
            problems.append(f"downward closure: {q} forces the negative quarter in plane x{need[0] + 1}=0")
    return StaticReport(not problems, problems)


def _downward_requirements(S):
    """Aligned negative quarters that must be full for S to be downward closed in W.

    A non-empty mixed quarter (zero axis i, positive axis a, negative axis b)
    contains points with x_b < 0; everything below such a point in W fills
    the negative quarters of planes x_i = 0 and x_a = 0.  A member ray -e_k
    likewise fills the negative quarters of the two planes containing it.
    """
    out = []
    for q in S.quarters:
        if q.aligned or q.empty():
            continue
        a = q.free[q.signs.index(1)]
        out.append((f"mixed quarter [{q.text()}]", (q.axis, (-1, -1))))
        out.append((f"mixed quarter [{q.text()}]", (a, (-1, -1))))
    for k in range(3):
        ray = axis_ray(k, -1)
        if any(q.member(ray) for q in S.quarters_of(ray)):
            for j in range(3):
                if j != k:
                    out.append((f"negative ray -e{k + 1}", (j, (-1, -1))))
    return out


def close_static(S):
    """Smallest static-consistent extension of S, or None when condition 4 breaks."""
    for _ in range(50):
        changed = False
        for _, need in _downward_requirements(S):
            q = S.get(*need)
            if not q.bit:
                S = S.replace(QuarterDesc(q.axis, q.signs, bit=1))
                changed = True
        for k in range(3):
            ray = axis_ray(k, -1)
            qs = S.quarters_of(ray)
            if any(q.member(ray) for q in qs):
                for q in qs:
                    if not q.member(ray):
                        if q.aligned:
                            S = S.replace(QuarterDesc(q.axis, q.signs, bit=1))
                        else:
                            S = S.replace(QuarterDesc(q.axis, q.signs, c=Fraction(0), strict=False))
                        changed = True
        if not changed:
            break
    if not check_separator_static(S).ok:
        return None
    return S


# -- sampling and the closure condition ----------------------------------------

ORTHANTS3 = [Orthant(s) for s in product((1, -1), repeat=3)]


def _wall_points_in(A, rng, count):
    pts = []
    mags = [Fraction(n, d) for n in range(1, 9) for d in (1, 2, 3, 4)]
    for _ in range(count):
        zero = rng.randrange(3)
        p = []
        for i in range(3):
            if i == zero:
                p.append(Fraction(0))
            elif rng.random() < 0.15:
                p.append(Fraction(0))
            else:
                p.append(A[i] * rng.choice(mags))
        pts.append(tuple(p))
    return pts


def sample_points(V, S, seed=0, per_orthant=50):
    rng = random.Random(seed)
    base = {tuple(Fraction(0) for _ in range(3))}
    for k in range(3):
        for sign in (1, -1):
            base.add(axis_ray(k, sign))
    for t in V.vectors:
        for v in (t, tuple(-x for x in t)):
            for k in range(3):
                p = tuple(Fraction(0) if i == k else Fraction(x) for i, x in enumerate(v))
                if any(p):
                    base.add(p)
    for q in S.quarters:
        if q.aligned or q.c is INF:
            continue
        a = q.free[q.signs.index(1)]
        b = q.free[q.signs.index(-1)]
        for r in (q.c, q.c * Fraction(9, 8) + Fraction(1, 8), q.c / 2):
            p = [Fraction(0)] * 3
            p[a] = r
            p[b] = Fraction(-1)
            base.add(tuple(p))
    out = {}
    for A in ORTHANTS3:
        pts = {p for p in base if in_orthant(p, A)}
        pts.update(_wall_points_in(A, rng, per_orthant))
        out[A] = sorted(pts)
    return out


@dataclass(frozen=True)
class Cond3Verdict:
    violated: bool
    u: tuple | None = None
    v: tuple | None = None
    orthant: Orthant | None = None

    def __bool__(self):
        return not self.violated


def check_separator_condition3(S, V, samples=None, seed=0, per_orthant=50, cache=None):
    """Sampled check of closure under in-orthant continuous reachability.

    Starting points are the sampled members of S and, in the all-negative
    orthant, the orthant's interior.
    """
    if samples is None:
        samples = sample_points(V, S, seed, per_orthant)
    cache = {} if cache is None else cache
    for A in ORTHANTS3:
        pts = samples[A] if isinstance(samples, dict) else [p for p in samples if in_orthant(p, A)]
        members = [p for p in pts if S.member(p)]
        outside = [p for p in pts if not S.member(p)]
        for v in outside:
            if all(s < 0 for s in A):
                key = ("int", A, v)
                if key not in cache:
                    cache[key] = reach_from_interior(V, A, v)
                ok, start = cache[key]
                if ok:
                    return Cond3Verdict(True, start, v, A)
            for u in members:
                key = (A, u, v)
                if key not in cache:
                    cache[key] = continuous_orthant_reach(V, A, u, v)[0]
                if cache[key]:
                    return Cond3Verdict(True, u, v, A)
    return Cond3Verdict(False)


def threshold_grid(V, mesh=(Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4))):
    vals = {Fraction(0)} | set(mesh)
    for t in V.vectors:
        for x in t:
            for y in t:
                if x != 0 and y != 0:
                    vals.add(abs(Fraction(x)) / abs(Fraction(y)))
    return sorted(vals)


def _include(S, v, grid):
    """Grow S so that wall point v becomes a member; None if impossible."""
    v = tuple(Fraction(x) for x in v)
    if all(x == 0 for x in v) or nonneg(v):
        return None
    for q in S.quarters_of(v):
        if q.aligned:
            if q.signs == (1, 1):
                continue
            return S.replace(QuarterDesc(q.axis, q.signs, bit=1))
        a = q.free[q.signs.index(1)]
        b = q.free[q.signs.index(-1)]
        x1, x2 = v[a], -v[b]
        if x2 == 0:
            continue
        r = x1 / x2
        bigger = [g for g in grid if g >= r]
        if bigger:
            return S.replace(QuarterDesc(q.axis, q.signs, c=bigger[0], strict=False))
        return S.replace(QuarterDesc(q.axis, q.signs, c=INF, strict=True))
    return None


def find_separator(V, seed=0, per_orthant=50, max_iter=60):
    """Least-fixpoint search for a separator on the threshold grid (closure condition checked on samples)."""
    if V.dim != 3:
        raise UsageError("separators are only implemented for dimension 3")
    grid = threshold_grid(V)
    S = Separator3.empty()
    cache = {}
    history = []
    for _ in range(max_iter):
        S = close_static(S)
        if S is None:
            return None, history
        verdict = check_separator_condition3(S, V, seed=seed, per_orthant=per_orthant, cache=cache)
        if not verdict.violated:
            return S, history
        history.append((verdict.u, verdict.v, str(verdict.orthant)))
        S = _include(S, verdict.v, grid)
        if S is None:
            return None, history
    return None, history


# -- witness search ----------------------------------------------------------------

def ucover_search(V, scale=6, length=40):
    for k in range(1, scale + 1):
        start = const_vec(V.kind, V.dim, -k)
        run = discrete_search(V, start, length)
        if run is not None:
            run.notes["k"] = k
            return run
    return None


def continuous_witness(V, run):
    """A continuous covering run derived from a discrete one, if one can be built."""
    if V.kind is not Q:
        return None
    try:
        pieces = [segment_run(V, a, b) for a, b in zip(run.points, run.points[1:])]
        if pieces:
            tr = concat(pieces)
            if validate_run(V, tr):
                return tr
    except UsageError:
        pass
    u = const_vec(Q, V.dim, V.norm)
    shifted = tuple(x + y for x, y in zip(run.start, u))
    if not strictly_negative(shifted):
        return None
    try:
        return discrete_to_continuous(V, shifted, run)
    except UsageError:
        return None


def first_entry_through_wall(trace):
    """The first point in R>=0 follows a point sharing an orthant and lies in W."""
    pts = trace.points
    for i, p in enumerate(pts):
        if nonneg(p):
            if i == 0:
                return True
            prev = pts[i - 1]
            shared = max_orthant(prev).meet(max_orthant(p))
            return in_orthant(prev, shared) and in_orthant(p, shared) and any(x == 0 for x in p)
    return False


@dataclass
class CoverReport:
    verdict: str
    run: RunTrace | None = None
    continuous: RunTrace | None = None
    separator: Separator3 | None = None
    certificate: str = ""
    notes: list = field(default_factory=list)


def ucover_decide_3d(V, scale=6, length=40, seed=0, per_orthant=50):
    if V.dim != 3:
        raise UsageError("ucover_decide_3d needs a 3-dimensional OVAS")
    run = ucover_search(V, scale, length)
    if run is not None:
        return CoverReport("POSITIVE", run=run, continuous=continuous_witness(V, run))
    S, history = find_separator(V, seed=seed, per_orthant=per_orthant)
    if S is not None:
        return CoverReport("NEGATIVE", separator=S, certificate="certificate (sampled)",
                           notes=[f"closure condition verified on samples (seed {seed}, {per_orthant} per orthant)"])
    notes = [f"no covering run from -k*1 for k <= {scale}, length <= {length}"]
    if history:
        notes.append(f"separator search stopped after {len(history)} refinements")
    return CoverReport("UNKNOWN", notes=notes)
