"""Reductions between zero isolation, min-plus boundedness and thresholds."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .automata import (
    AffineExpr,
    Const,
    Cra,
    Mul,
    Reg,
    Add,
    cra_eval,
    cra_to_wa,
    enumerate_accepting_runs,
    independent_coeffs,
    qplus_to,
    words_upto,
)
from .semiring import (
    INF,
    TROPLOGQ,
    SemiringTag,
    UsageError,
    neg_log_payload,
)

RESET = "$"
BLOCK = "#"


def _map_cra(B, sr, f):
    delta = {}
    for key, (q2, upd) in B.delta.items():
        delta[key] = (q2, {x: e.map_consts(f) for x, e in upd.items()})
    final = {q: {x: f(v) for x, v in row.items()} for q, row in B.final.items()}
    return Cra(sr, B.alphabet, B.states, B.init_state, B.registers,
               {x: f(v) for x, v in B.init.items()}, final, delta)


def neg_log_cra(A):
    """Replace every constant c by -log2 c (stored exponentiated as 1/c; 0 becomes +inf)."""
    if A.sr.tag is not SemiringTag.QPLUS:
        raise UsageError("neg_log_cra expects a qplus CRA")
    return _map_cra(A, TROPLOGQ, neg_log_payload)


def max_times(A):
    return qplus_to(A, SemiringTag.QMAXTIMES)


@dataclass(frozen=True)
class RatioConstants:
    R: Fraction
    S: Fraction
    consts: tuple = ()


def compute_constants(A):
    if A.sr.tag is not SemiringTag.QPLUS:
        raise UsageError("compute_constants expects a qplus CRA")
    c, d = independent_coeffs(A)
    pool = {Fraction(1)} | {v for v in list(c.values()) + list(d.values()) if v != 0}
    R = max(pool) / min(pool)
    (q0,) = A.states
    prods = []
    for x in A.registers:
        for y in A.registers:
            v = A.init[x] * A.final_coeff(q0, y)
            if v != 0:
                prods.extend([v, 1 / v])
    # runs that start on a constant d carry initial weight 1, so F alone must fit too
    if any(v != 0 for v in d.values()):
        for y in A.registers:
            v = A.final_coeff(q0, y)
            if v != 0:
                prods.extend([v, 1 / v])
    # with no non-zero pair the automaton is constantly 0 and S plays no role
    S = max(prods) if prods else Fraction(1)
    return RatioConstants(R, S, tuple(sorted(pool)))


def pump(w, i):
    return tuple(a for a in w for _ in range(i))


def pump_zero_witness(A, w, i, consts=None):
    """w_i = a1^i ... am^i for a word w with A_(max,.)(w) < 1/(RS)."""
    if i < 1:
        raise UsageError("pumping exponent must be at least 1")
    k = consts or compute_constants(A)
    if not cra_eval(max_times(A), tuple(w)) < 1 / (k.R * k.S):
        raise UsageError("word is not a small-value witness: A_max(w) >= 1/(RS)")
    return pump(w, i)


def tau_candidate(A, w, consts=None):
    """c = max{val_between(rho) * R : rho accepting on w}; below 1 for a small-value witness."""
    k = consts or compute_constants(A)
    runs = enumerate_accepting_runs(cra_to_wa(max_times(A)), tuple(w))
    if not runs:
        return Fraction(0)
    return max(r.val_between for r in runs) * k.R


def log_exceeds(payload, bound):
    """Whether a logq payload (value log2 payload) is > log2(bound), both exponentiated."""
    return payload is INF or payload > bound


def duality_holds(C1, C2, cs):
    """Log duality: C1 > prod >= C2 iff -log C1 < sum -log c <= -log C2, exponentiated."""
    prod = Fraction(1)
    for x in cs:
        prod *= x
    lhs = C1 > prod >= C2
    # exponentiated: -log v is stored as 1/v and + becomes *
    s = Fraction(1)
    for x in cs:
        s *= neg_log_payload(x)
    rhs = neg_log_payload(C1) < s <= neg_log_payload(C2)
    return lhs == rhs


# the five equivalent characterisations of non-isolation, in a fixed report order
STATEMENTS = ("decreasing_family", "small_max_word", "geometric_decay", "large_log_word", "unbounded_log")


@dataclass
class IsolationReport:
    depth: int
    consts: RatioConstants
    verdict: str  # NOT_ISOLATED, ISOLATED or UNKNOWN
    witness: tuple | None = None
    statements: dict = field(default_factory=dict)  # STATEMENTS key -> status string
    pumped: list = field(default_factory=list)  # (i, A_plus, A_max, A_log payload)
    tau: Fraction | None = None
    note: str = ""


def isolation_certificate(A):
    """A register x with I(x)F(x) > 0 and every c_{a,x} >= 1 keeps the output >= I(x)F(x)."""
    c, _ = independent_coeffs(A)
    (q0,) = A.states
    for x in A.registers:
        v = A.init[x] * A.final_coeff(q0, x)
        if v > 0 and all(c[(a, x)] >= 1 for a in A.alphabet):
            return x, v
    return None


def check_isolation_statements(A, depth, pump_to=10):
    """Bounded-depth search for the five equivalent statements; three-valued answer."""
    k = compute_constants(A)
    Amax = max_times(A)
    Alog = neg_log_cra(A)
    bound = 1 / (k.R * k.S)
    rep = IsolationReport(depth, k, "UNKNOWN")
    witness = None
    for w in words_upto(tuple(sorted(A.alphabet)), depth):
        if cra_eval(Amax, w) < bound:
            witness = w
            break
    if witness is None:
        cert = isolation_certificate(A)
        for s in STATEMENTS:
            rep.statements[s] = f"no witness up to depth {depth}"
        if cert is not None:
            rep.verdict = "ISOLATED"
            rep.note = f"register {cert[0]} keeps every output >= {cert[1]}"
        else:
            rep.note = "no small-value witness found; zero isolation not refuted at this depth"
        return rep
    rep.witness = witness
    rep.verdict = "NOT_ISOLATED"
    rep.statements["small_max_word"] = "witness"
    # the log-side witness comes from duality on the same word
    lv = cra_eval(Alog, witness)
    if not log_exceeds(lv, k.R * k.S):
        raise AssertionError("duality failed on the small-value witness")
    rep.statements["large_log_word"] = "witness (dual of small_max_word)"
    tau = tau_candidate(A, witness, k)
    rep.tau = tau
    prev = None
    ok_i = ok_iii = True
    reached_v = False
    for i in range(1, pump_to + 1):
        wi = pump(witness, i)
        vp = cra_eval(A, wi)
        vm = cra_eval(Amax, wi)
        vl = cra_eval(Alog, wi)
        rep.pumped.append((i, vp, vm, vl))
        if prev is not None and not vp < prev:
            ok_i = False
        if not vm <= tau ** i * k.S:
            ok_iii = False
        if log_exceeds(vl, Fraction(2) ** i):
            reached_v = True
        prev = vp
    rep.statements["decreasing_family"] = ("pumped family strictly decreasing" if ok_i
                           else "pumped family not monotone on the tested range")
    rep.statements["geometric_decay"] = (f"A_max(w_i) <= tau^i S with tau = {tau}" if ok_iii
                             else "tau bound failed on the tested range")
    rep.statements["unbounded_log"] = ("A_log(w_i) > i reached on the pumped family" if reached_v
                           else "implied by geometric_decay; not reached on the tested range")
    return rep


# -- normal form ------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFormResult:
    cra: Cra
    primed: Cra  # A' (finite d replaced by 1-bar)
    b: object  # max |I(x)| over kept registers, in payload form
    d: object  # max |d_{a,x}| over finite d
    f: object  # max |F(x)| over kept registers


def trop_abs(sr, v):
    """|v| in payload form: |n| for zminplus, 2^|log2 q| (i.e. max(q, 1/q)) for logq."""
    if sr.tag is SemiringTag.TROPZ:
        return abs(v)
    return max(v, 1 / v)


def trop_within(sr, a, b, slack):
    """a and b differ by at most ``slack`` (payload form) in value order."""
    if a is INF or b is INF:
        return a is b
    return a <= sr.mul(b, slack) and b <= sr.mul(a, slack)


def normal_form(A):
    sr = A.sr
    if sr.tag not in (SemiringTag.TROPZ, SemiringTag.TROPLOGQ):
        raise UsageError("normal_form expects a zminplus or logqminplus CRA")
    if RESET in A.alphabet:
        raise UsageError(f"alphabet already uses the reserved letter {RESET}")
    c, dd = independent_coeffs(A)
    (q0,) = A.states
    one = sr.one
    finite_d = [v for v in dd.values() if v is not INF]
    dmax = max((trop_abs(sr, v) for v in finite_d), default=one)
    # A': finite constants become 1-bar
    delta1 = {}
    for a in A.alphabet:
        upd = {}
        for x in A.registers:
            dv = dd[(a, x)]
            terms = () if c[(a, x)] is INF else ((x, c[(a, x)]),)
            upd[x] = AffineExpr(INF if dv is INF else one, terms)
        delta1[(q0, a)] = (q0, upd)
    primed = Cra(sr, A.alphabet, A.states, q0, A.registers, dict(A.init),
                 {q0: dict(A.final.get(q0, {}))}, delta1)
    keep = tuple(x for x in A.registers if A.final_coeff(q0, x) is not INF)
    init = {x: (INF if A.init[x] is INF else one) for x in keep}
    alphabet = tuple(A.alphabet) + (RESET,)
    delta = {}
    for a in A.alphabet:
        delta[(q0, a)] = (q0, {x: delta1[(q0, a)][1][x] for x in keep})
    delta[(q0, RESET)] = (q0, {x: AffineExpr(init[x], ()) for x in keep})
    B = Cra(sr, alphabet, (q0,), q0, keep, init, {q0: {x: one for x in keep}}, delta)
    finite_i = [A.init[x] for x in keep if A.init[x] is not INF]
    b = max((trop_abs(sr, v) for v in finite_i), default=one)
    f = max((trop_abs(sr, A.final_coeff(q0, x)) for x in keep), default=one)
    return NormalFormResult(B, primed, b, dmax, f)


def is_normal_form(A):
    sr = A.sr
    try:
        _, d = independent_coeffs(A)
    except UsageError:
        return False
    (q0,) = A.states
    ok_d = all(v is INF or v == sr.one for v in d.values())
    ok_if = all(A.init[x] in (sr.one, INF) and A.final_coeff(q0, x) == sr.one for x in A.registers)
    return ok_d and ok_if


# -- threshold gadget -----------------------------------------------------------

def _fresh(name, taken):
    while name in taken:
        name += "'"
    return name


def threshold_to_zero_iso(A, C):
    """B(w1 # ... wn #) = prod A(wi)/C, built copylessly with one extra register z."""
    C = Fraction(C)
    if C <= 0:
        raise UsageError("threshold must be positive")
    if A.sr.tag is not SemiringTag.QPLUS:
        raise UsageError("threshold_to_zero_iso expects a qplus CRA")
    if not A.is_copyless:
        raise UsageError("CRA is not copyless")
    if BLOCK in A.alphabet:
        raise UsageError(f"alphabet already uses the reserved letter {BLOCK}")
    z = _fresh("z", set(A.registers))
    regs = tuple(A.registers) + (z,)
    init = dict(A.init)
    init[z] = Fraction(1)
    delta = {}
    for (q, a), (q2, upd) in A.delta.items():
        delta[(q, a)] = (q2, dict(upd))
    q1 = A.init_state
    for q in A.states:
        parts = [Mul((Const(A.final_coeff(q, x)), Reg(x)))
                 for x in A.registers if A.final_coeff(q, x) != 0]
        total = Add(tuple(parts)) if parts else Const(Fraction(0))
        upd = {z: Mul((Const(1 / C), Reg(z), total))}
        for x in A.registers:
            upd[x] = Const(A.init[x])
        delta[(q, BLOCK)] = (q1, upd)
    final = {q: {z: Fraction(1)} for q in A.states}
    return Cra(A.sr, tuple(A.alphabet) + (BLOCK,), A.states, q1, regs, init, final, delta)
