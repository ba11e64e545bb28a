"""crakit: cost-register automata, boundedness, zero isolation and orthant VAS tools.

Scalars are exact ``fractions.Fraction`` values throughout; ``INF`` is the
tropical zero.  Submodules:

* ``semiring``: the four semirings and literal parsing
* ``automata``: weighted automata and cost-register automata
* ``boundedness``: the polynomial-time boundedness decider
* ``monoid``: the epsilon-abstraction monoid and factorization forests
* ``reductions``: zero isolation, log-space and normal-form reductions
* ``ovas``: orthant vector addition systems and their run semantics
* ``coverability``: reachability oracle, separators, witness search
* ``smt``: SMT-LIB2 emission for separator existence
* ``hardness``: two-counter machines and their compilers
* ``formats`` and ``cli``: file formats and the command line
"""

from .automata import Cra, WeightedAutomaton, cra_eval, wa_eval
from .boundedness import decide_boundedness
from .semiring import (
    INF,
    QMAXTIMES,
    QPLUS,
    TROPLOGQ,
    TROPZ,
    InvariantError,
    ParseError,
    ResourceError,
    UsageError,
)

__version__ = "0.1.0"

__all__ = [
    "Cra",
    "WeightedAutomaton",
    "cra_eval",
    "wa_eval",
    "decide_boundedness",
    "INF",
    "QPLUS",
    "QMAXTIMES",
    "TROPZ",
    "TROPLOGQ",
    "InvariantError",
    "ParseError",
    "ResourceError",
    "UsageError",
]
