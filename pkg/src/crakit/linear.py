"""Exact linear feasibility by Gaussian substitution plus Fourier-Motzkin elimination.

A constraint is ``(coeffs, op, rhs)`` with ``coeffs`` a dict var -> Fraction
and ``op`` one of ``"<="``, ``"<"``, ``"=="``.  ``solve`` returns a satisfying
assignment (dict) or None.
"""

from __future__ import annotations

from fractions import Fraction


def _norm(coeffs):
    return {k: Fraction(v) for k, v in coeffs.items() if v != 0}


def _substitute(cons, var, expr):
    """Replace var by expr = (coeffs, const) in every constraint."""
    ecoef, econst = expr
    out = []
    for coeffs, op, rhs in cons:
        a = coeffs.get(var, 0)
        if a == 0:
            out.append((coeffs, op, rhs))
            continue
        new = dict(coeffs)
        del new[var]
        for k, v in ecoef.items():
            new[k] = new.get(k, 0) + a * v
        out.append((_norm(new), op, rhs - a * econst))
    return out


def _key(coeffs, op, rhs):
    # scale so the first coefficient has magnitude 1, for deduplication
    if coeffs:
        first = coeffs[min(coeffs)]
        s = abs(first)
        coeffs = {k: v / s for k, v in coeffs.items()}
        rhs = rhs / s
    return (tuple(sorted(coeffs.items())), op, rhs)


def _dedupe(cons):
    seen = {}
    for c in cons:
        k = _key(*c)
        if k not in seen:
            seen[k] = (dict(k[0]), k[1], k[2])
    return list(seen.values())


def _trivially_ok(op, rhs):
    return rhs >= 0 if op == "<=" else (rhs > 0 if op == "<" else rhs == 0)


def solve(constraints, variables=None):
    cons = [(_norm(c), op, Fraction(r)) for c, op, r in constraints]
    if variables is None:
        variables = sorted({v for c, _, _ in cons for v in c})
    variables = list(variables)
    # Gaussian phase: eliminate equalities.
    subs = []  # (var, (coeffs, const)) in elimination order
    while True:
        eq = next((c for c in cons if c[1] == "==" and c[0]), None)
        if eq is None:
            break
        coeffs, _, rhs = eq
        var = min(coeffs)
        a = coeffs[var]
        expr = ({k: -v / a for k, v in coeffs.items() if k != var}, rhs / a)
        cons = [c for c in cons if c is not eq]
        cons = _substitute(cons, var, expr)
        subs.append((var, expr))
    for c, op, r in cons:
        if not c and not _trivially_ok(op, r):
            return None
    cons = [c for c in cons if c[0]]
    eliminated = {v for v, _ in subs}
    free = [v for v in variables if v not in eliminated]
    # Fourier-Motzkin phase.
    stages = []
    order = []
    cons = _dedupe(cons)
    remaining = [v for v in free if any(v in c for c, _, _ in cons)]
    while remaining:
        # pick the variable minimising the number of generated constraints
        def cost(v):
            pos = sum(1 for c, _, _ in cons if c.get(v, 0) > 0)
            neg = sum(1 for c, _, _ in cons if c.get(v, 0) < 0)
            return pos * neg - pos - neg
        var = min(remaining, key=lambda v: (cost(v), str(v)))
        remaining.remove(var)
        stages.append(cons)
        order.append(var)
        lower, upper, rest = [], [], []
        for c in cons:
            a = c[0].get(var, 0)
            (upper if a > 0 else lower if a < 0 else rest).append(c)
        new = list(rest)
        for cu, opu, ru in upper:
            au = cu[var]
            for cl, opl, rl in lower:
                al = -cl[var]
                comb = {}
                for k, v in cu.items():
                    comb[k] = comb.get(k, 0) + v / au
                for k, v in cl.items():
                    comb[k] = comb.get(k, 0) + v / al
                comb.pop(var, None)
                op = "<" if "<" in (opu, opl) else "<="
                new.append((_norm(comb), op, ru / au + rl / al))
        for c, op, r in new:
            if not c and not _trivially_ok(op, r):
                return None
        cons = _dedupe([c for c in new if c[0]])
        remaining = [v for v in remaining if any(v in c for c, _, _ in cons)]
    # Back-substitution.
    val = {v: Fraction(0) for v in free if v not in order}
    for var, stage in zip(reversed(order), reversed(stages)):
        lo, lo_strict, hi, hi_strict = None, False, None, False
        for coeffs, op, rhs in stage:
            a = coeffs.get(var, 0)
            if a == 0:
                continue
            rest = sum(v * val[k] for k, v in coeffs.items() if k != var)
            bound = (rhs - rest) / a
            strict = op == "<"
            if a > 0:
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
            else:
                if lo is None or bound > lo or (bound == lo and strict):
                    lo, lo_strict = bound, strict
        val[var] = _pick(lo, lo_strict, hi, hi_strict)
    for var, (coeffs, const) in reversed(subs):
        val[var] = const + sum(v * val.get(k, Fraction(0)) for k, v in coeffs.items())
    for v in variables:
        val.setdefault(v, Fraction(0))
    if not check(constraints, val):
        raise AssertionError("Fourier-Motzkin produced a non-solution")
    return val


def _pick(lo, lo_strict, hi, hi_strict):
    def ok(x):
        above = lo is None or x > lo or (x == lo and not lo_strict)
        below = hi is None or x < hi or (x == hi and not hi_strict)
        return above and below

    if ok(Fraction(0)):
        return Fraction(0)
    if lo is not None and hi is not None:
        return lo if lo == hi else (lo + hi) / 2
    if lo is not None:
        return lo + 1 if lo_strict else lo
    return hi - 1 if hi_strict else hi


def check(constraints, val):
    for coeffs, op, rhs in constraints:
        lhs = sum(Fraction(v) * val.get(k, Fraction(0)) for k, v in coeffs.items())
        rhs = Fraction(rhs)
        if op == "<=" and not lhs <= rhs:
            return False
        if op == "<" and not lhs < rhs:
            return False
        if op == "==" and lhs != rhs:
            return False
    return True


def feasible(constraints, variables=None):
    return solve(constraints, variables) is not None
