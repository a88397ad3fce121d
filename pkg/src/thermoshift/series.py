"""Certified enclosures of sum_{j>=0} q^j (j + a)^(-t) for 0 < q <= 1, t >= 0.

The summand f(x) = q^x (x + a)^(-t) is completely monotone (a product of
e^(-sx) and (x + a)^(-t)), so the Euler-Maclaurin remainder after each
correction term has the sign of, and is bounded by, the next term:

    I + f/2 - f'/12 + f'''/720  <=  sum_{j>=C} f(j)  <=  I + f/2 - f'/12

with I the integral of f over [C, inf) and derivatives taken at the cutoff
C.  The integral is an incomplete gamma function evaluated by mpmath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import Divergent

DEFAULT_CUTOFF = 64
_REL_SLACK = 1e-14


def _tail_integral(log_q: float, t: float, lower: float, a: float) -> float:
    """int_lower^inf q^x (x + a)^(-t) dx."""
    with mpmath.workdps(30):
        s = mpmath.mpf(-log_q)
        y0 = mpmath.mpf(lower) + a
        if s == 0:
            return float(y0 ** (1 - t) / (t - 1))
        # substitute y = x + a
        return float(mpmath.exp(s * a) * s ** (t - 1) * mpmath.gammainc(1 - t, s * y0))


def lerch_enclosure(q: float, t: float, a: float, cutoff: int = DEFAULT_CUTOFF):
    """Return (lo, hi) bracketing sum_{j>=0} q^j (j + a)^(-t)."""
    if q < 0:
        raise ValueError("q must be >= 0")
    if a <= 0:
        raise ValueError("shift a must be positive")
    if q == 0:
        return a ** -t, a ** -t
    if q > 1 or (q == 1 and t <= 1):
        raise Divergent(f"series with q={q}, t={t} diverges")
    log_q = math.log(q)
    j = np.arange(cutoff, dtype=float)
    head = math.fsum(np.exp(j * log_q - t * np.log(j + a)))
    y = cutoff + a
    f = math.exp(cutoff * log_q - t * math.log(y))
    g1, g2, g3 = log_q - t / y, t / y ** 2, -2 * t / y ** 3
    d1 = f * g1
    d3 = f * (g1 ** 3 + 3 * g1 * g2 + g3)
    upper_tail = _tail_integral(log_q, t, cutoff, a) + f / 2 - d1 / 12
    lower_tail = upper_tail + d3 / 720
    slack = _REL_SLACK * cutoff
    return (head + lower_tail) * (1 - slack), (head + upper_tail) * (1 + slack)


@dataclass(frozen=True)
class ZetaTail:
    """Enclosure of sum_{n >= start} n^(-t)."""

    t: float
    start: int
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def zeta_tail(t: float, start: int = 1, cutoff: int = DEFAULT_CUTOFF) -> ZetaTail:
    if t <= 1:
        raise Divergent(f"sum n^-t diverges for t={t} <= 1")
    if start < 1:
        raise ValueError("start must be >= 1")
    lo, hi = lerch_enclosure(1.0, t, float(start), cutoff)
    return ZetaTail(t, start, lo, hi)
