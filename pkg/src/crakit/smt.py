"""SMT-LIB2 emission of the separator-existence query for 3-dimensional OVAS.

The script declares one Boolean per aligned quarter and a threshold triple
(c, strict, full) per mixed quarter, states the static separator
constraints, and encodes closure under in-orthant continuous reachability
with the flow formula of the reachability oracle.  A small s-expression
reader checks the output against the SMT-LIB2 command grammar and can
evaluate quantifier-free terms, which the tests use to compare the emitted
predicates with the Python checker.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations, product

from .coverability import _fireable, quarter_keys
from .ovas import LOGQ, Orthant
from .semiring import INF, UsageError

ORTHANTS = [Orthant(s) for s in product((1, -1), repeat=3)]
MAX_SUBSET_TRANSITIONS = 10


def _num(x):
    x = Fraction(x)
    if x < 0:
        return f"(- {_num(-x)})"
    if x.denominator == 1:
        return f"{x.numerator}.0"
    return f"(/ {x.numerator}.0 {x.denominator}.0)"


def _coord(x, kind):
    if kind is LOGQ:
        # log-space coordinates are log2 of the payload; no standard theory has log
        return f"(log2 {_num(x)})"
    return _num(x)


def _and(parts):
    parts = [p for p in parts if p != "true"]
    if not parts:
        return "true"
    return parts[0] if len(parts) == 1 else "(and " + " ".join(parts) + ")"


def _or(parts):
    parts = [p for p in parts if p != "false"]
    if not parts:
        return "false"
    return parts[0] if len(parts) == 1 else "(or " + " ".join(parts) + ")"


def _qname(axis, signs):
    return f"{axis + 1}{''.join('p' if s > 0 else 'm' for s in signs)}"


def separator_vars():
    """Names of the separator unknowns in quarter order."""
    out = []
    for axis, sg in quarter_keys():
        n = _qname(axis, sg)
        if sg[0] == sg[1]:
            out.append((f"bit_{n}", "Bool"))
        else:
            out += [(f"c_{n}", "Real"), (f"strict_{n}", "Bool"), (f"full_{n}", "Bool")]
    return out


def _quarter_member(axis, sg, x):
    """Membership in the quarter's content for a point already in the quarter."""
    n = _qname(axis, sg)
    if sg[0] == sg[1]:
        return f"bit_{n}"
    free = [i for i in range(3) if i != axis]
    a = free[sg.index(1)]
    b = free[sg.index(-1)]
    x1, x2 = x[a], f"(- {x[b]})"
    lt = f"(< {x1} (* c_{n} {x2}))"
    le = f"(<= {x1} (* c_{n} {x2}))"
    finite = f"(ite strict_{n} {lt} {le})"
    full = f"(ite strict_{n} (> {x2} 0.0) true)"
    return f"(ite full_{n} {full} {finite})"


def _in_quarter(axis, sg, x):
    free = [i for i in range(3) if i != axis]
    parts = [f"(= {x[axis]} 0.0)"]
    for s, i in zip(sg, free):
        parts.append(f"(>= {x[i]} 0.0)" if s > 0 else f"(<= {x[i]} 0.0)")
    return _and(parts)


def member_body(x=("x1", "x2", "x3")):
    """Body of the separator membership predicate over three real terms."""
    origin = f"(and (= {x[0]} 0.0) (= {x[1]} 0.0) (= {x[2]} 0.0))"
    alts = [f"(and {_in_quarter(a, sg, x)} {_quarter_member(a, sg, x)})" for a, sg in quarter_keys()]
    return f"(and (not {origin}) {_or(alts)})"


def _in_orthant(A, x):
    return _and([f"(>= {xi} 0.0)" if s > 0 else f"(<= {xi} 0.0)" for s, xi in zip(A, x)])


def _in_wall(x):
    return _or([f"(= {xi} 0.0)" for xi in x])


def _marking(A, x, M):
    """Flipped coordinates of x are positive exactly on M."""
    out = []
    for i in range(3):
        fx = x[i] if A[i] > 0 else f"(- {x[i]})"
        out.append(f"(> {fx} 0.0)" if i in M else f"(= {fx} 0.0)")
    return _and(out)


def _reach_formula(V, A, u, v, alpha_prefix):
    """Exists-free body: some support subset carries a fireable flow from u to v."""
    vecs = sorted(V.available(A))
    if len(vecs) > MAX_SUBSET_TRANSITIONS:
        raise UsageError(f"more than {MAX_SUBSET_TRANSITIONS} transitions available in orthant {A}")
    names = [f"{alpha_prefix}{k}" for k in range(len(vecs))]
    flip = [tuple(s * x for s, x in zip(A, t)) for t in vecs]
    flow = []
    for i in range(3):
        terms = [f"(* {n} {_coord(t[i], V.kind)})" for n, t in zip(names, vecs) if t[i] != V.kind.zero]
        rhs = "(+ " + u[i] + " " + " ".join(terms) + ")" if terms else u[i]
        flow.append(f"(= {v[i]} {rhs})")
    marks = [set(m) for r in range(4) for m in combinations(range(3), r)]
    alts = []
    for r in range(len(vecs) + 1):
        for sub in combinations(range(len(vecs)), r):
            supp = [flip[k] for k in sub]
            sign = [f"(> {names[k]} 0.0)" if k in sub else f"(= {names[k]} 0.0)"
                    for k in range(len(vecs))]
            fwd = [_marking(A, u, M) for M in marks if len(_fireable(M, supp)) == len(supp)]
            bwd = [_marking(A, v, M) for M in marks
                   if len(_fireable(M, supp, backward=True)) == len(supp)]
            alts.append(_and(sign + [_or(fwd), _or(bwd)]))
    body = _and(flow + [_or(alts)])
    return names, body


def emit_smt(V):
    if V.dim != 3:
        raise UsageError("SMT emission is defined for 3-dimensional OVAS")
    lines = [
        "; separator existence for a 3-dimensional OVAS",
        "; sat means some threshold separator satisfies every condition below",
        "(set-logic NRA)",
    ]
    if V.kind is LOGQ:
        lines += [
            "; WARNING: logq coordinates appear as (log2 q) atoms; log2 is declared",
            "; uninterpreted and is not supported by standard SMT theories",
            "(declare-fun log2 (Real) Real)",
        ]
    for name, sort in separator_vars():
        lines.append(f"(declare-fun {name} () {sort})")
    for axis, sg in quarter_keys():
        if sg[0] != sg[1]:
            lines.append(f"(assert (>= c_{_qname(axis, sg)} 0.0))")
    lines.append("(define-fun inS ((x1 Real) (x2 Real) (x3 Real)) Bool")
    lines.append("  " + member_body() + ")")
    # condition 4: positive quarters empty, positive rays excluded
    for axis in range(3):
        lines.append(f"(assert (not bit_{_qname(axis, (1, 1))}))")
    for k in range(3):
        ray = ["1.0" if i == k else "0.0" for i in range(3)]
        lines.append(f"(assert (not (inS {' '.join(ray)})))")
    # consistency on axis rays
    for k in range(3):
        for sign in (1, -1):
            ray = tuple(("1.0" if sign > 0 else "(- 1.0)") if i == k else "0.0" for i in range(3))
            members = [_quarter_member(a, sg, ray) for a, sg in quarter_keys()
                       if a != k and sg[[i for i in range(3) if i != a].index(k)] == sign]
            for m1, m2 in zip(members, members[1:]):
                lines.append(f"(assert (= {m1} {m2}))")
    # downward closure inside the walls
    for axis, sg in quarter_keys():
        if sg[0] == sg[1]:
            continue
        n = _qname(axis, sg)
        free = [i for i in range(3) if i != axis]
        a = free[sg.index(1)]
        nonempty = f"(or full_{n} (not strict_{n}) (> c_{n} 0.0))"
        for plane in (axis, a):
            lines.append(f"(assert (=> {nonempty} bit_{_qname(plane, (-1, -1))}))")
    for k in range(3):
        ray = tuple("(- 1.0)" if i == k else "0.0" for i in range(3))
        for j in range(3):
            if j != k:
                lines.append(f"(assert (=> (inS {' '.join(ray)}) bit_{_qname(j, (-1, -1))}))")
    # closure under continuous reachability inside each orthant
    u = ("u1", "u2", "u3")
    v = ("v1", "v2", "v3")
    decl = "(u1 Real) (u2 Real) (u3 Real) (v1 Real) (v2 Real) (v3 Real)"
    for A in ORTHANTS:
        names, reach = _reach_formula(V, A, u, v, "a")
        ex = reach if not names else (
            "(exists (" + " ".join(f"({n} Real)" for n in names) + ") " + reach + ")")
        pre = _and([_in_orthant(A, u), _in_orthant(A, v), _in_wall(v)])
        lines.append(f"; orthant {A}")
        if all(s < 0 for s in A):
            start = _and([f"(< {x} 0.0)" for x in u])
            lines.append(f"(assert (forall ({decl}) (=> (and {pre} (or (inS u1 u2 u3) {start}) {ex}) "
                         f"(inS v1 v2 v3))))")
        else:
            lines.append(f"(assert (forall ({decl}) (=> (and {pre} (inS u1 u2 u3) {ex}) "
                         f"(inS v1 v2 v3))))")
    lines += ["(check-sat)", "(get-model)"]
    return "\n".join(lines) + "\n"


def separator_assignment(S):
    """Values of the separator unknowns encoding a Separator3."""
    env = {}
    for q in S.quarters:
        n = _qname(q.axis, q.signs)
        if q.aligned:
            env[f"bit_{n}"] = bool(q.bit)
        else:
            env[f"full_{n}"] = q.c is INF
            env[f"c_{n}"] = Fraction(0) if q.c is INF else Fraction(q.c)
            env[f"strict_{n}"] = q.strict
    return env


# -- reading SMT-LIB2 -------------------------------------------------------------------

class SmtSyntaxError(ValueError):
    pass


_TOK = re.compile(r"""\s*(?:(;[^\n]*)|(\()|(\))|("(?:[^"]|"")*")|(\|[^|\\]*\|)|([^\s()";|]+))""")
_NUMERAL = re.compile(r"(0|[1-9][0-9]*)\Z")
_DECIMAL = re.compile(r"(0|[1-9][0-9]*)\.[0-9]+\Z")
_SIMPLE = re.compile(r"[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*\Z")
_KEYWORD = re.compile(r":[A-Za-z0-9~!@$%^&*_\-+=<>.?/]+\Z")


def read_sexprs(text):
    stack = [[]]
    pos = 0
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SmtSyntaxError(f"bad token at offset {pos}")
        pos = m.end()
        comment, lp, rp, string, quoted, atom = m.groups()
        if comment is not None:
            continue
        if lp:
            stack.append([])
        elif rp:
            if len(stack) == 1:
                raise SmtSyntaxError(f"unbalanced ')' at offset {pos}")
            done = stack.pop()
            stack[-1].append(done)
        elif string is not None or quoted is not None:
            stack[-1].append(string or quoted)
        elif atom is not None:
            if not (_NUMERAL.match(atom) or _DECIMAL.match(atom) or _SIMPLE.match(atom)
                    or _KEYWORD.match(atom)):
                raise SmtSyntaxError(f"bad atom {atom!r}")
            stack[-1].append(atom)
    if len(stack) != 1:
        raise SmtSyntaxError("unbalanced '('")
    return stack[0]


BUILTINS = {"true", "false", "and", "or", "not", "=>", "=", "<", "<=", ">", ">=", "+", "-", "*",
            "/", "ite", "distinct", "xor"}
SORTS = {"Bool", "Real", "Int"}


def _is_symbol(x):
    return isinstance(x, str) and (_SIMPLE.match(x) is not None or x.startswith("|"))


def _check_term(t, scope, where):
    if isinstance(t, str):
        if _NUMERAL.match(t) or _DECIMAL.match(t):
            return
        if t in BUILTINS or t in scope:
            return
        raise SmtSyntaxError(f"{where}: undeclared symbol {t!r}")
    if not t:
        raise SmtSyntaxError(f"{where}: empty application")
    head = t[0]
    if head in ("forall", "exists"):
        if len(t) != 3 or not isinstance(t[1], list) or not t[1]:
            raise SmtSyntaxError(f"{where}: malformed {head}")
        inner = set(scope)
        for b in t[1]:
            if not (isinstance(b, list) and len(b) == 2 and _is_symbol(b[0]) and b[1] in SORTS):
                raise SmtSyntaxError(f"{where}: bad binder {b!r}")
            inner.add(b[0])
        _check_term(t[2], inner, where)
        return
    if head == "let":
        if len(t) != 3 or not isinstance(t[1], list):
            raise SmtSyntaxError(f"{where}: malformed let")
        inner = set(scope)
        for b in t[1]:
            if not (isinstance(b, list) and len(b) == 2 and _is_symbol(b[0])):
                raise SmtSyntaxError(f"{where}: bad let binding")
            _check_term(b[1], scope, where)
            inner.add(b[0])
        _check_term(t[2], inner, where)
        return
    if not isinstance(head, str) or (head not in BUILTINS and head not in scope):
        raise SmtSyntaxError(f"{where}: unknown function {head!r}")
    if len(t) < 2:
        raise SmtSyntaxError(f"{where}: {head} applied to nothing")
    for arg in t[1:]:
        _check_term(arg, scope, where)


def validate_smt(text):
    """Check the script against the SMT-LIB2 command grammar; returns the command list."""
    cmds = read_sexprs(text)
    scope = set()
    for k, c in enumerate(cmds, start=1):
        where = f"command {k}"
        if not isinstance(c, list) or not c or not isinstance(c[0], str):
            raise SmtSyntaxError(f"{where}: not a command")
        op = c[0]
        if op == "set-logic":
            if len(c) != 2 or not _is_symbol(c[1]):
                raise SmtSyntaxError(f"{where}: set-logic takes one symbol")
        elif op in ("set-info", "set-option"):
            if len(c) not in (2, 3) or not _KEYWORD.match(c[1]):
                raise SmtSyntaxError(f"{where}: {op} needs a keyword")
        elif op == "declare-fun":
            if len(c) != 4 or not _is_symbol(c[1]) or not isinstance(c[2], list) or c[3] not in SORTS:
                raise SmtSyntaxError(f"{where}: malformed declare-fun")
            if any(s not in SORTS for s in c[2]):
                raise SmtSyntaxError(f"{where}: unknown sort")
            scope.add(c[1])
        elif op == "declare-const":
            if len(c) != 3 or not _is_symbol(c[1]) or c[2] not in SORTS:
                raise SmtSyntaxError(f"{where}: malformed declare-const")
            scope.add(c[1])
        elif op == "define-fun":
            if len(c) != 5 or not _is_symbol(c[1]) or not isinstance(c[2], list) or c[3] not in SORTS:
                raise SmtSyntaxError(f"{where}: malformed define-fun")
            params = set()
            for b in c[2]:
                if not (isinstance(b, list) and len(b) == 2 and _is_symbol(b[0]) and b[1] in SORTS):
                    raise SmtSyntaxError(f"{where}: bad parameter {b!r}")
                params.add(b[0])
            _check_term(c[4], scope | params, where)
            scope.add(c[1])
        elif op == "assert":
            if len(c) != 2:
                raise SmtSyntaxError(f"{where}: assert takes one term")
            _check_term(c[1], scope, where)
        elif op in ("check-sat", "get-model", "exit", "push", "pop"):
            if len(c) > (2 if op in ("push", "pop") else 1):
                raise SmtSyntaxError(f"{where}: {op} takes no arguments")
        else:
            raise SmtSyntaxError(f"{where}: unknown command {op!r}")
    return cmds


def _value(atom):
    if _NUMERAL.match(atom) or _DECIMAL.match(atom):
        return Fraction(atom)
    return None


def eval_term(t, env, funs=None):
    """Evaluate a quantifier-free term over exact rationals and Booleans."""
    funs = funs or {}
    if isinstance(t, str):
        if t == "true":
            return True
        if t == "false":
            return False
        v = _value(t)
        if v is not None:
            return v
        return env[t]
    head, args = t[0], t[1:]
    if head == "ite":
        return eval_term(args[1] if eval_term(args[0], env, funs) else args[2], env, funs)
    if head == "and":
        return all(eval_term(a, env, funs) for a in args)
    if head == "or":
        return any(eval_term(a, env, funs) for a in args)
    vals = [eval_term(a, env, funs) for a in args]
    if head == "not":
        return not vals[0]
    if head == "=>":
        return (not vals[0]) or vals[1]
    if head == "=":
        return all(x == vals[0] for x in vals[1:])
    cmp = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
           ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}
    if head in cmp:
        return all(cmp[head](a, b) for a, b in zip(vals, vals[1:]))
    if head == "+":
        return sum(vals, Fraction(0))
    if head == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:], Fraction(0))
    if head == "*":
        out = Fraction(1)
        for x in vals:
            out *= x
        return out
    if head == "/":
        out = vals[0]
        for x in vals[1:]:
            out /= x
        return out
    if head in funs:
        params, body = funs[head]
        return eval_term(body, {**env, **dict(zip(params, vals))}, funs)
    raise SmtSyntaxError(f"cannot evaluate {head!r}")


def defined_functions(cmds):
    return {c[1]: ([p[0] for p in c[2]], c[4]) for c in cmds if c[0] == "define-fun"}


def ground_assertions(cmds):
    """Assertions without quantifiers (the static part of the query)."""
    def has_q(t):
        if isinstance(t, str):
            return False
        return t[0] in ("forall", "exists") or any(has_q(x) for x in t)
    return [c[1] for c in cmds if c[0] == "assert" and not has_q(c[1])]
