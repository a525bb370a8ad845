"""Extended-real scalars in the two arithmetic modes.

Float mode stores ``float`` with ``math.inf``; exact mode stores
``fractions.Fraction`` with ``math.inf`` as the only non-Fraction value.
``Fraction`` compares and adds correctly against ``math.inf``, so saturating
arithmetic needs no special casing.
"""

import math
from fractions import Fraction

INF = math.inf
TOL = 1e-9


def to_exact(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        v = v.strip()
        if v.lower() in ("inf", "+inf", "infinity"):
            return INF
        return Fraction(v)
    if isinstance(v, float) and math.isinf(v):
        if v < 0:
            raise ValueError("negative infinity is not an extended distance")
        return INF
    if isinstance(v, float) and math.isnan(v):
        raise ValueError("NaN is not an extended distance")
    return Fraction(v)


def to_float(v):
    return float(v)


def leq(a, b, exact):
    """``a <= b`` with absolute tolerance in float mode."""
    if exact:
        return a <= b
    return a <= b + TOL


def within(a, s, exact):
    """``a`` is a finite distance and ``a <= s``; infinite distances never count as edges."""
    return not math.isinf(a) and leq(a, s, exact)


def lt(a, b, exact):
    """``a < b`` beyond tolerance in float mode."""
    if exact:
        return a < b
    return a < b - TOL


def close(a, b, exact):
    if exact:
        return a == b
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= TOL


def dedup_sorted(values, exact):
    """Collapse a sorted list into cluster anchors (the least member of each run)."""
    out = []
    for v in values:
        if out and (v == out[-1] if exact else v <= out[-1] + TOL):
            continue
        out.append(v)
    return out


def serialize(v, exact):
    """JSON-ready form: 12 significant digits in float mode, ``p/q`` strings in exact mode."""
    if v is None:
        return None
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if exact:
        v = to_exact(v)
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return float(f"{float(v):.12g}")
