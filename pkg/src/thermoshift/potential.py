"""The distance potential and its Birkhoff sums along return words.

phi(x) = -log(1 + 1/delta(x)) when delta(x) >= N (excursion region) and
phi(x) = -A when delta(x) < N (free region); phi vanishes on X itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from . import kernels
from .errors import CensoredDelta, NotAReturnWord, ValidationError
from .sft import CylinderSpec, DeltaValue, SftSpec, as_word, mixing_index


@dataclass(frozen=True)
class PotentialParams:
    A: float
    N: int

    def __post_init__(self):
        if not self.A > 0:
            raise ValidationError(f"A must be positive, got {self.A}")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not self.C > 0:
            raise ValidationError(f"C(A,N) = N*A - log N = {self.C} must be positive")

    @property
    def C(self) -> float:
        """Convergence constant N*A - log N."""
        return self.N * self.A - math.log(self.N)


def check_params(spec: SftSpec, params: PotentialParams) -> None:
    """Strict on N >= mixing index, advisory on N being well above it."""
    nx = mixing_index(spec)
    if params.N < nx:
        raise ValidationError(f"N={params.N} is below the mixing index {nx}")
    if params.N < 2 * nx:
        warnings.warn(f"N={params.N} is not well above the mixing index {nx}", stacklevel=2)


def phi(params: PotentialParams, depth: float) -> float:
    """phi at a point of exact depth ``depth`` (``math.inf`` for points of X)."""
    if depth >= params.N:
        return 0.0 if math.isinf(depth) else -math.log1p(1.0 / depth)
    return -params.A


def phi_of_delta(params: PotentialParams, value: DeltaValue, interval: bool = False):
    """phi from a DeltaValue; censored depths give an enclosure in interval mode."""
    if value.is_exact:
        v = phi(params, value.k)
        return (v, v) if interval else v
    if value.k < params.N:
        raise CensoredDelta(f"depth only known to be >= {value.k} < N={params.N}")
    if not interval:
        raise CensoredDelta(f"censored depth {value}; request interval mode")
    return (-math.log1p(1.0 / value.k), 0.0)


def run_sum(params: PotentialParams, top: int, bottom: int = 1) -> float:
    """sum of phi(d) for d = bottom..top along a stretch where delta drops by one."""
    if top < bottom:
        return 0.0
    N = params.N
    free = max(0, min(top, N - 1) - bottom + 1)
    low = max(N, bottom)
    exc = math.log(low) - math.log(top + 1) if top >= low else 0.0
    return -params.A * free + exc


def return_profile(spec: SftSpec, cylinder: CylinderSpec, u) -> list[int]:
    """delta(sigma^i(u x)) for i in [0, |u|), evaluated on the finite word u w_J."""
    w = as_word(u, spec.alphabet_size)
    full = list(w) + list(cylinder.word)
    prof = kernels.delta_profile(spec.allowed.astype("uint8"), spec.essential_mask.astype("uint8"), full)
    return list(prof[: len(w)])


def birkhoff_sum(spec: SftSpec, cylinder: CylinderSpec, params: PotentialParams, u,
                 check: bool = True) -> float:
    """S_{|u|} phi(u x), the same for every x in the cylinder.

    Because alpha beta is outside L(X) every depth along u w_J is capped
    before the end of that finite word, so no value is censored.
    """
    if check:
        from .induced import is_return_word
        if not is_return_word(spec, cylinder, u):
            raise NotAReturnWord(f"{u!r} is not a return word to [{cylinder}]")
    return math.fsum(phi(params, d) for d in return_profile(spec, cylinder, u))
