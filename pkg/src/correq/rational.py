"""Exact rational arithmetic shared by every module.

All correctness-relevant computation in this package runs on
arbitrary-precision rationals; floating point never enters a verdict.
gmpy2's ``mpq`` is used when available (roughly an order of magnitude
faster than ``fractions.Fraction`` on elimination- and simplex-heavy
workloads), with ``fractions.Fraction`` as a drop-in fallback.  Both
types keep values reduced to lowest terms with a positive denominator.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

try:
    from gmpy2 import mpq as _mpq

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _mpq = Fraction
    _HAVE_GMPY2 = False

#: Concrete rational class in use (gmpy2.mpq or fractions.Fraction).
Rat = type(_mpq(0))

#: Anything `rat` accepts.
RatLike = Union[int, str, Fraction, Rat]

ZERO: Rat = _mpq(0)
ONE: Rat = _mpq(1)


def rat(value: RatLike, den: RatLike = None) -> Rat:
    """Coerce to an exact rational.

    Accepts ints, exact rational values, and strings like ``"3/4"`` or
    ``"-7"``.  Floats are rejected: payoffs, probabilities, and
    coefficients must be supplied exactly.
    """
    if den is not None:
        return rat(value) / rat(den)
    if isinstance(value, float):
        raise TypeError("floating-point input is not accepted; pass an int, Fraction, or 'p/q' string")
    if isinstance(value, str):
        return _mpq(Fraction(value))
    return _mpq(value)


def rat_str(value: RatLike) -> str:
    """Render as ``"p"`` or ``"p/q"`` in lowest terms, ``q > 0``."""
    q = rat(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rat_json(value: RatLike):
    """JSON form: a plain int when integral, else a ``"p/q"`` string."""
    q = rat(value)
    if q.denominator == 1:
        return int(q.numerator)
    return f"{q.numerator}/{q.denominator}"
