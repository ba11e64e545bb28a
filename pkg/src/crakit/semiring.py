"""Exact scalars and the four semirings used throughout the toolkit.

Rationals are ``fractions.Fraction``.  Plus infinity is the singleton ``INF``,
an explicit marker that orders above every rational.  Values of the
log-rational semiring are stored exponentiated: the payload ``q`` stands for
``log2(q)``, so min stays min and log-space addition becomes multiplication.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce, total_ordering


class UsageError(ValueError):
    """Raised when an operation is called outside its contract."""


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "") + ": "
        super().__init__(where + msg)
        self.line = line
        self.col = col


class InvariantError(ValueError):
    """A structurally valid input breaks a model invariant."""


class ResourceError(RuntimeError):
    """A configured enumeration budget was exceeded."""


@total_ordering
class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "inf"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("crakit-inf")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(x):
    return x is INF


class SemiringTag(enum.Enum):
    QPLUS = "qplus"
    QMAXTIMES = "qmaxtimes"
    TROPZ = "zminplus"
    TROPLOGQ = "logqminplus"


class Semiring:
    """Operations on raw payloads for one tag.

    Automata store raw payloads (``Fraction`` or ``INF``) together with their
    semiring; ``SemiringValue`` is the tagged wrapper for standalone use.
    """

    def __init__(self, tag, zero, one, add, mul, name):
        self.tag = tag
        self.zero = zero
        self.one = one
        self._add = add
        self._mul = mul
        self.name = name

    def __repr__(self):
        return f"Semiring({self.tag.value})"

    def add(self, a, b):
        return self._add(a, b)

    def mul(self, a, b):
        return self._mul(a, b)

    def sum(self, xs):
        return reduce(self._add, xs, self.zero)

    def prod(self, xs):
        return reduce(self._mul, xs, self.one)

    @property
    def tropical(self):
        return self.tag in (SemiringTag.TROPZ, SemiringTag.TROPLOGQ)

    def is_zero(self, x):
        return x == self.zero

    def check(self, x):
        tag = self.tag
        if tag in (SemiringTag.QPLUS, SemiringTag.QMAXTIMES):
            ok = isinstance(x, Fraction) and x >= 0
        elif tag is SemiringTag.TROPZ:
            ok = x is INF or (isinstance(x, Fraction) and x.denominator == 1)
        else:
            ok = x is INF or (isinstance(x, Fraction) and x > 0)
        if not ok:
            raise InvariantError(f"{x!r} is outside the domain of {tag.value}")
        return x

    def better(self, a, b):
        """True when ``a`` is strictly larger in the value order (log order for logq)."""
        return a > b

    def parse(self, text):
        return self.check(parse_literal(text, self.tag))

    def format(self, x):
        return format_literal(x, self.tag)


def _plus(a, b):
    return a + b


def _times(a, b):
    return a * b


def _min(a, b):
    return a if a <= b else b


def _max(a, b):
    return a if a >= b else b


def _trop_z_mul(a, b):
    if a is INF or b is INF:
        return INF
    return a + b


def _trop_log_mul(a, b):
    if a is INF or b is INF:
        return INF
    return a * b


QPLUS = Semiring(SemiringTag.QPLUS, Fraction(0), Fraction(1), _plus, _times, "Q(+,.)")
QMAXTIMES = Semiring(SemiringTag.QMAXTIMES, Fraction(0), Fraction(1), _max, _times, "Q(max,.)")
TROPZ = Semiring(SemiringTag.TROPZ, INF, Fraction(0), _min, _trop_z_mul, "Z(min,+)")
TROPLOGQ = Semiring(SemiringTag.TROPLOGQ, INF, Fraction(1), _min, _trop_log_mul, "LogQ(min,+)")

_BY_TAG = {s.tag: s for s in (QPLUS, QMAXTIMES, TROPZ, TROPLOGQ)}


def semiring(tag):
    if isinstance(tag, Semiring):
        return tag
    if isinstance(tag, str):
        try:
            tag = SemiringTag(tag)
        except ValueError:
            raise UsageError(f"unknown semiring {tag!r}") from None
    return _BY_TAG[tag]


_RAT = re.compile(r"^[+-]?\d+(/\d+)?$")
_LOG = re.compile(r"^log2\((.+)\)$")


def parse_rational(text):
    text = text.strip()
    if not _RAT.match(text):
        raise ParseError(f"malformed rational {text!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def parse_literal(text, tag):
    """Parse one scalar literal for the given semiring tag.

    Accepted forms: ``p/q`` or an integer, ``inf`` for the tropical zero, and
    ``log2(p/q)`` for log-rational values.  A bare integer ``n`` in the
    log-rational semiring means log2(2**n).
    """
    tag = semiring(tag).tag
    text = text.strip()
    if text in ("inf", "+inf"):
        if tag in (SemiringTag.TROPZ, SemiringTag.TROPLOGQ):
            return INF
        raise ParseError(f"inf is not a value of {tag.value}")
    m = _LOG.match(text)
    if m:
        if tag is not SemiringTag.TROPLOGQ:
            raise ParseError(f"log2 literal outside logqminplus: {text!r}")
        q = parse_rational(m.group(1))
        if q <= 0:
            raise ParseError(f"log2 of a non-positive rational: {text!r}")
        return q
    q = parse_rational(text)
    if tag is SemiringTag.TROPLOGQ:
        if q.denominator != 1:
            raise ParseError(f"use log2(p/q) for non-integer log values: {text!r}")
        return Fraction(2) ** int(q)
    if tag is SemiringTag.TROPZ and q.denominator != 1:
        raise ParseError(f"non-integer value {text!r} in zminplus")
    if tag in (SemiringTag.QPLUS, SemiringTag.QMAXTIMES) and q < 0:
        raise ParseError(f"negative value {text!r} in {tag.value}")
    return q


def format_rational(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_literal(x, tag):
    if x is INF:
        return "inf"
    if semiring(tag).tag is SemiringTag.TROPLOGQ:
        return f"log2({format_rational(x)})"
    return format_rational(x)


@dataclass(frozen=True)
class SemiringValue:
    tag: SemiringTag
    payload: object

    def __post_init__(self):
        semiring(self.tag).check(self.payload)

    def __str__(self):
        return format_literal(self.payload, self.tag)


def _same_tag(a, b):
    if a.tag is not b.tag:
        raise UsageError(f"semiring mismatch: {a.tag.value} vs {b.tag.value}")
    return semiring(a.tag)


def sr_add(a, b):
    sr = _same_tag(a, b)
    return SemiringValue(a.tag, sr.add(a.payload, b.payload))


def sr_mul(a, b):
    sr = _same_tag(a, b)
    return SemiringValue(a.tag, sr.mul(a.payload, b.payload))


def neg_log_payload(c):
    """-log2(c) in exponentiated form: 0 maps to INF, otherwise 1/c."""
    if c == 0:
        return INF
    return 1 / Fraction(c)


def sr_neg_log(c):
    if c.tag is not SemiringTag.QPLUS:
        raise UsageError("sr_neg_log expects a qplus value")
    return SemiringValue(SemiringTag.TROPLOGQ, neg_log_payload(c.payload))


def to_fraction(x):
    if x is INF or isinstance(x, Fraction):
        return x
    return Fraction(x)
