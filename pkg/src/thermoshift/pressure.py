"""The induced series lambda_{t,z}, the transition point and the pressure curve.

lambda_{t,z} is the sum over return words u to J = [alpha beta] of
exp(t S_|u| phi(ux) - |u| z).  Three evaluators are provided:

* ``lambda_direct``   enumerates return words up to ``max_len`` and adds a
  certified tail;
* ``lambda_grouped``  uses the closed form available when alpha beta is the
  only forbidden block (multiplicities r_n = (T^(n-1))_{beta alpha});
* ``lambda_value``    sums the series exactly through its block structure.

The block structure: u w_J splits at forbidden adjacencies into maximal
L(X)-blocks b_1 ... b_k (after the leading alpha).  A block of length M
contributes run_sum(M) = sum_{d=1..M} phi(d) and e^(-Mz), the first block
starts with beta, the last ends with alpha, and inner joins are forbidden
pairs other than alpha beta.  With K the matrix of block weights and G the
0/1 join matrix this gives lambda = [(I - K G)^(-1) K]_{beta alpha}.  Only
the scalar tail of K (blocks longer than the cutoff) is infinite, and it is
enclosed with Perron ratio bounds and a Lerch-type series enclosure.
Every entry is nonnegative, so enclosing K enclosed lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Divergent, NoBracket, NotSingleForbiddenBlock, NumericError, BoundViolated, \
    DepthTooSmall, ViolationFound
from .induced import transfer_counts
from .potential import PotentialParams, phi, run_sum
from .problem import Problem
from .series import lerch_enclosure, zeta_tail
from .sft import SftSpec
from .spectral import MarkovMeasure, markov_entropy, perron_constants

DEFAULT_CUTOFF = 64
MAX_CUTOFF = 4096
_HEAD_SLACK = 1e-14


@dataclass(frozen=True)
class LambdaValue:
    lower: float
    upper: float
    truncation_len: int
    tail_bound: float
    converged: bool = True

    def __post_init__(self):
        for name in ("lower", "upper", "tail_bound"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def compare(self, level: float = 1.0) -> int:
        """+1 if certainly above ``level``, -1 if certainly below, 0 if undecided."""
        if self.lower > level:
            return 1
        if self.upper < level:
            return -1
        return 0

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def intersects(self, other: "LambdaValue") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper


DIVERGED = LambdaValue(math.inf, math.inf, 0, math.inf, converged=False)


def _run_sums(params: PotentialParams, lengths: np.ndarray) -> np.ndarray:
    """Vectorized run_sum(M, 1)."""
    N = params.N
    free = np.minimum(lengths, N - 1)
    exc = np.where(lengths >= N, math.log(N) - np.log(lengths + 1.0), 0.0)
    return -params.A * free + exc


def _is_at_critical(problem: Problem, z: float) -> bool:
    return abs(z - problem.xi) <= 4e-16 * max(1.0, abs(problem.xi))


def _ratio(problem: Problem, z: float) -> float:
    """q = eta e^(-z), snapped to 1 at z = xi."""
    return 1.0 if _is_at_critical(problem, z) else math.exp(math.log(problem.eta) - z)


def _divergent(problem: Problem, t: float, z: float) -> bool:
    q = _ratio(problem, z)
    return q > 1.0 or (q == 1.0 and t <= 1.0)


def _excursion_tail(problem: Problem, t: float, z: float, first: int):
    """Enclose sum_{M >= first} eta^(M-1) e^(-Mz) e^(t run_sum(M)), first >= N."""
    p = problem.params
    log_eta = math.log(problem.eta)
    q = _ratio(problem, z)
    scale = t * (-(p.N - 1) * p.A + math.log(p.N)) + (first - 1) * log_eta - first * z
    lo, hi = lerch_enclosure(q, t, float(first + 1))
    return math.exp(scale) * lo, math.exp(scale) * hi


def _block_matrices(problem: Problem, t: float, z: float, cutoff: int):
    """Ambient m x m block-weight matrices (head, lower, upper)."""
    p = problem.params
    m = problem.m
    cutoff = max(cutoff, p.N)
    powers = problem.powers(cutoff - 1)
    M = np.arange(1, cutoff + 1, dtype=float)
    w = np.exp((M - 1) * math.log(problem.eta) - M * z + t * _run_sums(p, M))
    head_core = np.tensordot(w, powers, axes=1)
    tail_lo, tail_hi = _excursion_tail(problem, t, z, cutoff + 1)
    cmin, cmax = problem.ratio_bounds(cutoff)
    u = problem.perron.right
    v = problem.perron.vertices
    slack = _HEAD_SLACK * (cutoff + m)
    head = np.zeros((m, m))
    head[np.ix_(v, v)] = head_core
    lo, hi = head * (1 - slack), head * (1 + slack)
    lo[np.ix_(v, v)] += tail_lo * np.outer(u, cmin)
    hi[np.ix_(v, v)] += tail_hi * np.outer(u, cmax)
    dead = np.flatnonzero(~problem.spec.essential_mask)
    single = math.exp(t * phi(p, 0) - z)
    for d in dead:
        head[d, d] = single
        lo[d, d] = single * (1 - 1e-15)
        hi[d, d] = single * (1 + 1e-15)
    return head, lo, hi, cutoff


def join_matrix(problem: Problem) -> np.ndarray:
    """1 where a block ending in b may be followed by a block starting in c."""
    g = (~problem.spec.allowed).astype(float)
    a, b = problem.cylinder.word
    g[a, b] = 0.0
    return g


def _relevant_states(support: np.ndarray, join: np.ndarray, alpha: int, beta: int) -> np.ndarray:
    """States on some chain from beta to a block ending in alpha."""
    step = ((support @ join) > 0)
    m = step.shape[0]
    fwd = np.zeros(m, dtype=bool)
    fwd[beta] = True
    while True:
        new = fwd | step[fwd].any(axis=0)
        if np.array_equal(new, fwd):
            break
        fwd = new
    back = support[:, alpha] > 0
    while True:
        new = back | step[:, back].any(axis=1)
        if np.array_equal(new, back):
            break
        back = new
    return fwd & back


def _resolve(K: np.ndarray, join: np.ndarray, alpha: int, beta: int, states: np.ndarray,
             rounding: int) -> float:
    """[(I - K G)^(-1) K]_{beta alpha} restricted to relevant states; inf if divergent."""
    if not states[beta]:
        return 0.0
    idx = np.flatnonzero(states)
    B = (K @ join)[np.ix_(idx, idx)]
    if not B.any():
        return float(K[beta, alpha])
    rho = float(np.max(np.abs(np.linalg.eigvals(B))))
    if rho >= 1 - 1e-12:
        return math.inf
    x = np.linalg.solve(np.eye(len(idx)) - B, K[idx, alpha])
    value = float(x[np.searchsorted(idx, beta)])
    return value * (1 + rounding * 1e-13 / (1 - rho))


def lambda_value(problem: Problem, t: float, z: float, cutoff: int = DEFAULT_CUTOFF,
                 width_tol: float | None = None) -> LambdaValue:
    """Enclosure of lambda_{t,z} through the block transfer identity.

    Divergence (z below the entropy, t <= 1 at z = xi, or a resolvent with
    spectral radius >= 1) is reported as ``converged=False`` with infinite
    bounds, which root finders read as "lambda > 1".
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if _divergent(problem, t, z):
        return DIVERGED
    alpha, beta = problem.cylinder.word
    join = join_matrix(problem)
    while True:
        head, lo, hi, used = _block_matrices(problem, t, z, cutoff)
        states = _relevant_states(hi > 0, join, alpha, beta)
        lower = _resolve(lo, join, alpha, beta, states, -1)
        upper = _resolve(hi, join, alpha, beta, states, +1)
        head_only = _resolve(head * (1 - _HEAD_SLACK * used), join, alpha, beta, states, -1)
        if math.isinf(lower):
            return LambdaValue(math.inf, math.inf, used, math.inf, converged=False)
        value = LambdaValue(lower, upper, used, upper - head_only, True)
        if (width_tol is None or value.width <= width_tol or math.isinf(upper)
                or used >= MAX_CUTOFF):
            return value
        cutoff = 2 * used


def _check_series(problem: Problem, t: float, z: float):
    if _divergent(problem, t, z):
        raise Divergent(f"lambda_(t={t}, z={z}) diverges (entropy {problem.xi:.12g})")


def _single_block_tail(problem: Problem, t: float, z: float, max_len: int):
    """Enclose sum_{n > max_len} r_n e^(t run_sum(n) - nz) via Perron ratio bounds."""
    p = problem.params
    alpha, beta = problem.cylinder.word
    verts = list(problem.perron.vertices)
    ia, ib = verts.index(alpha), verts.index(beta)
    cmin, cmax = problem.ratio_bounds(max_len)
    u_b = problem.perron.right[ib]
    log_eta = math.log(problem.eta)
    first = max(max_len + 1, p.N)
    free = [math.exp((n - 1) * log_eta - n * z + t * run_sum(p, n)) for n in range(max_len + 1, first)]
    s = math.fsum(free)
    lo, hi = _excursion_tail(problem, t, z, first)
    return u_b * cmin[ia] * (s + lo), u_b * cmax[ia] * (s + hi)


def block_partial_sums(problem: Problem, t: float, z: float, max_len: int) -> np.ndarray:
    """Per-length contributions lambda_n, n = 1..max_len, from the block recursion."""
    p = problem.params
    m = problem.m
    alpha, beta = problem.cylinder.word
    join = join_matrix(problem)
    powers = problem.powers(max(max_len - 1, 0))
    v = problem.perron.vertices
    M = np.arange(1, max_len + 1, dtype=float)
    w = np.exp((M - 1) * math.log(problem.eta) - M * z + t * _run_sums(p, M))
    blocks = np.zeros((max_len + 1, m, m))
    for i in range(max_len):
        blocks[i + 1][np.ix_(v, v)] = powers[i] * w[i]
    for d in np.flatnonzero(~problem.spec.essential_mask):
        blocks[1][d, d] = math.exp(t * phi(p, 0) - z)
    h = np.zeros((max_len + 1, m))
    g = np.zeros((max_len + 1, m))
    g[0, beta] = 1.0
    for n in range(1, max_len + 1):
        h[n] = sum(g[n - k] @ blocks[k] for k in range(1, n + 1))
        g[n] = h[n] @ join
    return h[1:, alpha]


def lambda_direct(problem: Problem, t: float, z: float, max_len: int = 30,
                  budget: int | None = None) -> LambdaValue:
    """Sum over enumerated return words with |u| <= max_len plus a certified tail.

    The tail uses Perron bounds on r_n when alpha beta is the only forbidden
    block, and the block identity minus its length-truncated recursion
    otherwise.
    """
    _check_series(problem, t, z)
    n, free, exc, counts = problem.return_histogram(max_len, budget)
    expo = t * (-problem.params.A * free + exc) - n * z
    partial = math.fsum(counts * np.exp(expo))
    part_lo, part_hi = partial * (1 - 1e-13), partial * (1 + 1e-13)
    if problem.single_block:
        tail_lo, tail_hi = _single_block_tail(problem, t, z, max_len)
    else:
        total = lambda_value(problem, t, z, cutoff=max(DEFAULT_CUTOFF, 2 * max_len))
        if not total.converged:
            raise Divergent(f"lambda_(t={t}, z={z}) diverges")
        head = math.fsum(block_partial_sums(problem, t, z, max_len))
        tail_lo = max(0.0, total.lower - head * (1 + 1e-12))
        tail_hi = total.upper - head * (1 - 1e-12)
    return LambdaValue(part_lo + tail_lo, part_hi + tail_hi, max_len, tail_hi)


def lambda_grouped(problem: Problem, t: float, z: float, max_len: int = 30) -> LambdaValue:
    """Closed form for a single forbidden block:

    sum_{n<N} c_n e^(-tAn - nz) + e^(-t((N-1)A - log N)) sum_{n>=N} r_n (n+1)^(-t) e^(-nz)
    """
    if not problem.single_block:
        raise NotSingleForbiddenBlock("grouped evaluation needs exactly one forbidden 2-block")
    _check_series(problem, t, z)
    p = problem.params
    r = transfer_counts(problem.spec, problem.cylinder, max_len)
    free = math.fsum(r[n] * math.exp(-t * p.A * n - n * z) for n in range(1, min(p.N, max_len + 1)))
    prefactor = math.exp(-t * ((p.N - 1) * p.A - math.log(p.N)))
    exc = prefactor * math.fsum(
        r[n] * math.exp(-t * math.log(n + 1) - n * z) for n in range(p.N, max_len + 1))
    partial = free + exc
    tail_lo, tail_hi = _single_block_tail(problem, t, z, max_len)
    return LambdaValue(partial * (1 - 1e-13) + tail_lo, partial * (1 + 1e-13) + tail_hi,
                       max_len, tail_hi)


@dataclass(frozen=True)
class TransitionPoint:
    t_c: float
    bracket: tuple[float, float]
    value: LambdaValue

    @property
    def residual(self) -> float:
        """Certified bound on |lambda_{t_c, xi} - 1|."""
        return max(abs(self.value.lower - 1), abs(self.value.upper - 1))


def _decide(problem: Problem, t: float, z: float, cutoff: int):
    """Evaluate and compare lambda to 1, doubling the cutoff while undecided."""
    value = lambda_value(problem, t, z, cutoff)
    while value.compare() == 0 and value.truncation_len < MAX_CUTOFF and value.converged \
            and not math.isinf(value.upper):
        value = lambda_value(problem, t, z, 2 * value.truncation_len)
    return (1 if not value.converged else value.compare()), value


def find_t_c(problem: Problem, tol: float = 1e-8, cutoff: int = DEFAULT_CUTOFF,
             eps: float = 1e-6) -> TransitionPoint:
    """Root of t -> lambda_{t, xi} = 1 on t > 1 by certified bisection.

    lambda_{t, xi} is strictly decreasing in t and infinite for t <= 1.
    Bisection runs until the bracket can no longer be split or an enclosure
    straddles 1; the result carries the enclosure at the returned t_c.
    """
    xi = problem.xi
    sign, _ = _decide(problem, 1.0 + eps, xi, cutoff)
    if sign < 0:
        raise NoBracket(f"lambda_(t, xi) < 1 already at t = 1 + {eps}")
    lo, hi = 1.0, 2.0
    while True:
        sign, _ = _decide(problem, hi, xi, cutoff)
        if sign < 0:
            break
        lo, hi = hi, 2 * hi
        if hi > 2.0 ** 20:
            raise NoBracket("lambda_(t, xi) stays >= 1 up to t = 2^20")
    while hi - lo > 4e-16 * hi:
        mid = 0.5 * (lo + hi)
        sign, value = _decide(problem, mid, xi, cutoff)
        if sign > 0:
            lo = mid
        elif sign < 0:
            hi = mid
        else:
            break
    t_c = 0.5 * (lo + hi)
    value = lambda_value(problem, t_c, xi, cutoff)
    tp = TransitionPoint(t_c, (lo, hi), value)
    if tp.residual > tol and hi - lo > 1e-12 * hi:
        raise NumericError(f"t_c residual {tp.residual:.3e} above tolerance {tol:.1e}")
    return tp


@dataclass(frozen=True)
class PressurePoint:
    t: float
    pressure: float
    phase: str
    residual: float
    value: LambdaValue


def pressure_point(problem: Problem, t: float, t_c: float, tol: float = 1e-12,
                   cutoff: int = DEFAULT_CUTOFF) -> PressurePoint:
    xi = problem.xi
    if t >= t_c:
        value = lambda_value(problem, t, xi, cutoff) if t > 1 else DIVERGED
        return PressurePoint(t, xi, "frozen", 0.0, value)
    lo = xi
    hi = math.log(problem.m) + 1.0
    while _decide(problem, t, hi, cutoff)[0] >= 0:
        hi += 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        sign, _ = _decide(problem, t, mid, cutoff)
        if sign > 0:
            lo = mid
        elif sign < 0:
            hi = mid
        else:
            break
    z = 0.5 * (lo + hi)
    value = lambda_value(problem, t, z, cutoff)
    residual = max(abs(value.lower - 1), abs(value.upper - 1))
    return PressurePoint(t, z, "analytic", residual, value)


def pressure_at(problem: Problem, t: float, t_c: float | None = None, tol: float = 1e-12,
                cutoff: int = DEFAULT_CUTOFF) -> float:
    """P(t): xi in the frozen phase, else the root z > xi of lambda_{t,z} = 1."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t_c is None:
        t_c = find_t_c(problem, cutoff=cutoff).t_c
    return pressure_point(problem, t, t_c, tol, cutoff).pressure


@dataclass
class PressureCurve:
    xi: float
    t_c: float
    t_c_bracket: tuple[float, float]
    points: list[PressurePoint] = field(default_factory=list)

    def check(self, slack: float = 1e-9) -> list[str]:
        """Curve invariants; returns the list of violations (empty when sound)."""
        bad = []
        ts = [p.t for p in self.points]
        ps = [p.pressure for p in self.points]
        for p in self.points:
            if p.pressure < self.xi - 1e-15:
                bad.append(f"P({p.t}) < xi")
            if (p.phase == "frozen") != (p.t >= self.t_c):
                bad.append(f"phase label wrong at t={p.t}")
            if p.phase == "frozen" and p.pressure != self.xi:
                bad.append(f"frozen point t={p.t} not at xi")
        for a, b in zip(ps, ps[1:]):
            if b > a + 1e-12:
                bad.append("P increases along the grid")
                break
        for i in range(1, len(ps) - 1):
            h1, h2 = ts[i] - ts[i - 1], ts[i + 1] - ts[i]
            second = ((ps[i + 1] - ps[i]) / h2 - (ps[i] - ps[i - 1]) / h1) * 0.5 * (h1 + h2)
            scaled = second * min(h1, h2)
            if scaled < -slack:
                bad.append(f"convexity fails at t={ts[i]} ({scaled:.3e})")
        return bad


def pressure_curve(problem: Problem, t_grid, tol: float = 1e-12,
                   cutoff: int = DEFAULT_CUTOFF, transition: TransitionPoint | None = None) -> PressureCurve:
    ts = [float(t) for t in t_grid]
    if any(b < a for a, b in zip(ts, ts[1:])) or any(t < 0 for t in ts):
        raise ValueError("t grid must be sorted and nonnegative")
    tp = transition or find_t_c(problem, cutoff=cutoff)
    curve = PressureCurve(problem.xi, tp.t_c, tp.bracket)
    curve.points = [pressure_point(problem, t, tp.t_c, tol, cutoff) for t in ts]
    problems = curve.check()
    if problems:
        raise NumericError("pressure curve invariants violated: " + "; ".join(problems))
    return curve


@dataclass(frozen=True)
class Sandwich:
    lower: float
    value: LambdaValue
    upper: float
    c_min: float
    c_max: float


def sandwich_check(problem: Problem, t: float, burn: int = 32) -> Sandwich:
    """Check C_min e^(-tC) zeta(t) <= lambda_{t,xi} <= m/(eta e^(tA) - 2m) sum_n (C_max e^(-tC) zeta(t))^n."""
    if t <= 1:
        raise Divergent("sandwich bounds need t > 1")
    p = problem.params
    m = problem.m
    c_min, c_max = perron_constants(problem.spec, p.N, p.N + burn, problem.perron)
    zeta = zeta_tail(t, 1)
    decay = math.exp(-t * p.C)
    lower = c_min * decay * zeta.lo
    ratio = c_max * decay * zeta.hi
    denom = problem.eta * math.exp(t * p.A) - 2 * m
    upper = m / denom / (1 - ratio) if denom > 0 and ratio < 1 else math.inf
    value = lambda_value(problem, t, problem.xi, width_tol=1e-10)
    if value.upper < lower:
        raise BoundViolated(f"lambda upper {value.upper:.6e} below sandwich lower {lower:.6e}")
    if value.lower > upper:
        raise BoundViolated(f"lambda lower {value.lower:.6e} above sandwich upper {upper:.6e}")
    return Sandwich(lower, value, upper, c_min, c_max)


def exit_distribution(spec: SftSpec, measure: MarkovMeasure, depth: int):
    """Mass of {delta = k} for k < depth and of {delta >= depth} under a Markov measure."""
    allowed = spec.allowed.astype(float)
    P = measure.stochastic
    ess = spec.essential_mask
    exits = np.zeros(depth)
    exits[0] = measure.stationary[~ess].sum()
    mass = np.where(ess, measure.stationary, 0.0)
    stay = (P * allowed).sum(axis=1)
    for k in range(1, depth):
        exits[k] = mass @ (1 - stay)
        mass = mass @ (P * allowed)
    return exits, float(mass.sum())


def integral_phi(spec: SftSpec, params: PotentialParams, measure: MarkovMeasure, depth: int):
    """Enclosure (lo, hi) of the integral of phi against a stationary Markov measure.

    Depth cylinders whose word exits L(X) fix phi exactly; the others are
    censored at delta >= depth and contribute [-log(1 + 1/depth), 0].
    """
    if depth < params.N:
        raise DepthTooSmall(f"depth {depth} < N={params.N}")
    exits, censored = exit_distribution(spec, measure, depth)
    exact = math.fsum(exits[k] * phi(params, k) for k in range(depth))
    return exact - censored * math.log1p(1.0 / depth), exact


@dataclass(frozen=True)
class ProbeResult:
    entropy: float
    integral: tuple[float, float]
    value: float
    pressure: float

    @property
    def gap(self) -> float:
        return self.pressure - self.value


def variational_probe(problem: Problem, t: float, measures, pressure: float | None = None,
                      depth: int | None = None, tol: float = 1e-6, t_c: float | None = None):
    """h_mu + t * int(phi) <= P(t) for each measure, using the upper end of the enclosure."""
    if pressure is None:
        pressure = pressure_at(problem, t, t_c)
    depth = depth or max(problem.params.N, 40)
    results = []
    for mu in measures:
        h = markov_entropy(mu)
        lo, hi = integral_phi(problem.spec, problem.params, mu, depth)
        value = h + t * hi
        results.append(ProbeResult(h, (lo, hi), value, pressure))
        if value > pressure + tol:
            raise ViolationFound(f"h + t*int(phi) = {value:.12g} exceeds P({t}) = {pressure:.12g}", mu)
    return results
