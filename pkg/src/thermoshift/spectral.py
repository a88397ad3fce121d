"""Perron-Frobenius data, entropy and the Parry measure of a mixing SFT."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, ValidationError
from .sft import SftSpec, as_word, mixing_index


@dataclass(frozen=True, eq=False)
class PerronData:
    """Dominant eigendata of the essential core of T.

    ``right`` and ``left`` are indexed by ``vertices`` (the essential symbols);
    ``right`` has unit Euclidean norm and ``<right, left> = 1``.
    """

    eta: float
    right: np.ndarray
    left: np.ndarray
    vertices: np.ndarray
    residual: float
    iterations: int

    def embed(self, vec: np.ndarray, m: int) -> np.ndarray:
        """Spread a core-indexed vector over the ambient alphabet (zeros elsewhere)."""
        out = np.zeros(m)
        out[self.vertices] = vec
        return out


def _power_iteration(mat: np.ndarray, tol: float, max_iter: int):
    x = np.ones(mat.shape[0])
    x /= np.linalg.norm(x)
    for it in range(1, max_iter + 1):
        y = mat @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        x = y / np.linalg.norm(y)
        if hi - lo <= tol * max(1.0, hi):
            return x, it
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps")


def perron_data(spec: SftSpec, tol: float = 1e-13, max_iter: int = 100_000) -> PerronData:
    mixing_index(spec)
    core = spec.core.astype(float)
    u, it_r = _power_iteration(core, tol, max_iter)
    v, it_l = _power_iteration(core.T, tol, max_iter)
    # two-sided Rayleigh quotient: error quadratic in the vector errors
    eta = float(v @ core @ u / (v @ u))
    u = u / np.linalg.norm(u)
    v = v / (u @ v)
    residual = max(np.abs(core @ u - eta * u).max(), np.abs(v @ core - eta * v).max())
    if residual > tol * max(1.0, eta) * 10:
        raise NoConvergence(f"Perron residual {residual:.3e} above tolerance")
    return PerronData(eta, u, v, spec.vertices, float(residual), max(it_r, it_l))


def entropy(spec: SftSpec) -> float:
    """Topological entropy log(eta) of the subshift."""
    return math.log(perron_data(spec).eta)


def normalized_powers(spec: SftSpec, n_max: int, pd: PerronData | None = None) -> np.ndarray:
    """Stack of core^n / eta^n for n = 0..n_max (float, overflow-free)."""
    pd = pd or perron_data(spec)
    scaled = spec.core.astype(float) / pd.eta
    k = scaled.shape[0]
    out = np.empty((n_max + 1, k, k))
    out[0] = np.eye(k)
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] @ scaled
    return out


def ratio_bounds(spec: SftSpec, n0: int, pd: PerronData | None = None):
    """Column-wise constants valid for every n >= n0.

    Returns ``(cmin, cmax)`` indexed by the column vertex b with
    ``cmin[b] * u_a * eta^n <= (core^n)_{ab} <= cmax[b] * u_a * eta^n``.
    The ratios (core^n e_b)_a / (eta^n u_a) have a nonincreasing maximum and a
    nondecreasing minimum in n because core u = eta u, so the window at n0
    bounds the whole tail.
    """
    pd = pd or perron_data(spec)
    col = normalized_powers(spec, n0, pd)[n0]
    ratios = col / pd.right[:, None]
    # float slack on n0 matrix products and on eta itself
    slack = 1e-13 * (n0 + 1) * col.shape[0]
    return ratios.min(axis=0) * (1 - slack), ratios.max(axis=0) * (1 + slack)


def perron_constants(spec: SftSpec, n_lo: int, n_hi: int, pd: PerronData | None = None):
    """Min and max entry of core^n / eta^n over n in [n_lo, n_hi]."""
    powers = normalized_powers(spec, n_hi, pd)[n_lo:]
    return float(powers.min()), float(powers.max())


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Stationary Markov measure on the ambient full shift."""

    stochastic: np.ndarray
    stationary: np.ndarray

    @property
    def size(self) -> int:
        return self.stochastic.shape[0]

    def validate(self, tol: float = 1e-12, transition: np.ndarray | None = None):
        p, pi = self.stochastic, self.stationary
        if (p < 0).any() or (pi < -tol).any():
            raise ValidationError("negative probabilities")
        if np.abs(p.sum(axis=1) - 1).max() > tol:
            raise ValidationError("rows of the stochastic matrix must sum to 1")
        if abs(pi.sum() - 1) > tol or np.abs(pi @ p - pi).max() > tol:
            raise ValidationError("stationary vector is not invariant")
        if transition is not None:
            charged = pi > 0
            if ((p[charged] > 0) & (transition[charged] == 0)).any():
                raise ValidationError("measure charges a forbidden transition")


def stationary_distribution(stochastic: np.ndarray) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 by least squares."""
    p = np.asarray(stochastic, dtype=float)
    m = p.shape[0]
    system = np.vstack([p.T - np.eye(m), np.ones(m)])
    rhs = np.zeros(m + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_measure(stochastic, stationary=None) -> MarkovMeasure:
    p = np.array(stochastic, dtype=float)
    pi = stationary_distribution(p) if stationary is None else np.array(stationary, dtype=float)
    return MarkovMeasure(p, pi)


def bernoulli(weights) -> MarkovMeasure:
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    return MarkovMeasure(np.tile(w, (len(w), 1)), w.copy())


def random_markov_measure(m: int, rng: np.random.Generator, sparsity: float = 0.0) -> MarkovMeasure:
    """Random positive-stationary Markov measure; ``sparsity`` zeroes some transitions."""
    p = rng.dirichlet(np.ones(m), size=m)
    if sparsity > 0:
        keep = rng.random((m, m)) >= sparsity
        keep[np.arange(m), rng.integers(0, m, size=m)] = True
        p = p * keep
        p /= p.sum(axis=1, keepdims=True)
    return markov_measure(p)


def parry_measure(spec: SftSpec) -> MarkovMeasure:
    """Maximal-entropy Markov measure of X, lifted to the ambient alphabet.

    Rows of dead (non-essential) symbols carry zero stationary mass and are
    filled uniformly so the matrix stays row-stochastic.
    """
    pd = perron_data(spec)
    m = spec.alphabet_size
    u = pd.embed(pd.right, m)
    v = pd.embed(pd.left, m)
    t = spec.essential_matrix.astype(float)
    p = np.full((m, m), 1.0 / m)
    for i in pd.vertices:
        p[i] = t[i] * u / (pd.eta * u[i])
    pi = u * v
    return MarkovMeasure(p, pi / pi.sum())


def markov_entropy(measure: MarkovMeasure) -> float:
    p = measure.stochastic
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    return float(-(measure.stationary @ plogp.sum(axis=1)))


def cylinder_measure(measure: MarkovMeasure, word) -> float:
    w = as_word(word, measure.size)
    if not w:
        return 1.0
    value = measure.stationary[w[0]]
    for a, b in zip(w, w[1:]):
        value *= measure.stochastic[a, b]
    return float(value)
