"""Vertex subshifts of finite type inside the one-sided full shift.

The ambient shift is the full shift over ``{0, ..., m-1}``.  A subshift X is
given by a 0/1 transition matrix; after essentialization (repeated removal of
vertices without an outgoing edge) a finite word lies in the language L(X)
exactly when it is a path through essential vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BadEntry, CountOverflow, EmptySubshift, NotMixing, ValidationError

Word = tuple[int, ...]


def as_word(word: str | Iterable[int], alphabet_size: int | None = None) -> Word:
    """Normalize ``"0110"`` or ``[0, 1, 1, 0]`` to a tuple of ints."""
    if isinstance(word, str):
        try:
            symbols = tuple(int(ch) for ch in word)
        except ValueError:
            raise ValidationError(f"word {word!r} must consist of decimal digits") from None
    else:
        symbols = tuple(int(s) for s in word)
    if alphabet_size is not None:
        for s in symbols:
            if not 0 <= s < alphabet_size:
                raise ValidationError(f"symbol {s} outside alphabet of size {alphabet_size}")
    return symbols


def word_str(word: Sequence[int]) -> str:
    if all(s < 10 for s in word):
        return "".join(str(s) for s in word)
    return ".".join(str(s) for s in word)


def essentialize(transition: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Return the mask of vertices that survive repeated dead-end removal."""
    t = np.asarray(transition, dtype=bool)
    alive = np.ones(t.shape[0], dtype=bool) if mask is None else np.array(mask, dtype=bool)
    while True:
        has_out = (t[:, alive].any(axis=1)) & alive
        if np.array_equal(has_out, alive):
            return alive
        alive = has_out


@dataclass(frozen=True, eq=False)
class SftSpec:
    alphabet_size: int
    transition: np.ndarray
    essential_mask: np.ndarray
    # derived, cached at construction
    allowed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=np.int64)
        mask = np.asarray(self.essential_mask, dtype=bool)
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "essential_mask", mask)
        ess = t * np.outer(mask, mask)
        object.__setattr__(self, "allowed", ess.astype(bool))

    @property
    def vertices(self) -> np.ndarray:
        """Indices of essential vertices."""
        return np.flatnonzero(self.essential_mask)

    @property
    def core(self) -> np.ndarray:
        """Transition matrix restricted to essential vertices."""
        v = self.vertices
        return self.transition[np.ix_(v, v)]

    @property
    def essential_matrix(self) -> np.ndarray:
        """m x m matrix with non-essential rows and columns zeroed."""
        return self.allowed.astype(np.int64)

    def forbidden_blocks(self) -> list[Word]:
        """All two-letter words outside L(X), including those with dead letters."""
        m = self.alphabet_size
        return [(a, b) for a in range(m) for b in range(m) if not self.allowed[a, b]]

    @property
    def single_forbidden_block(self) -> bool:
        return len(self.forbidden_blocks()) == 1

    def __repr__(self):
        rows = ",".join("".join(str(int(x)) for x in row) for row in self.transition)
        ess = "".join(str(int(x)) for x in self.essential_mask)
        return f"SftSpec(m={self.alphabet_size}, T=[{rows}], essential={ess})"


def build_sft(alphabet_size: int, transition=None, forbidden_blocks=None) -> SftSpec:
    """Build an essentialized SFT from a 0/1 matrix or a list of forbidden 2-blocks.

    When both encodings are given the matrix wins, but they must agree.
    """
    m = int(alphabet_size)
    if m < 1:
        raise ValidationError("alphabet_size must be positive")
    from_blocks = None
    if forbidden_blocks is not None:
        from_blocks = np.ones((m, m), dtype=np.int64)
        for block in forbidden_blocks:
            w = as_word(block, m)
            if len(w) != 2:
                raise ValidationError(f"forbidden block {block!r} must have length 2")
            from_blocks[w[0], w[1]] = 0
    if transition is not None:
        arr = np.array(transition, dtype=object)
        if arr.shape != (m, m):
            raise ValidationError(f"transition matrix must be {m}x{m}, got shape {arr.shape}")
        for value in arr.flat:
            if isinstance(value, bool) or value not in (0, 1):
                raise BadEntry(f"transition entry {value!r} is not 0 or 1")
        t = arr.astype(np.int64)
        if from_blocks is not None and not np.array_equal(t, from_blocks):
            raise ValidationError("transition matrix and forbidden_blocks disagree")
    elif from_blocks is not None:
        t = from_blocks
    else:
        raise ValidationError("need a transition matrix or forbidden blocks")
    mask = essentialize(t)
    if not mask.any():
        raise EmptySubshift("essentialization removed every vertex")
    return SftSpec(m, t, mask)


def is_in_language(spec: SftSpec, word) -> bool:
    w = as_word(word, spec.alphabet_size)
    if not w:
        return True
    if not spec.essential_mask[w[0]]:
        return False
    allowed = spec.allowed
    return all(allowed[a, b] for a, b in zip(w, w[1:]))


def count_words(spec: SftSpec, n: int, max_bits: int | None = None) -> int:
    """Exact number of length-n words of L(X): the sum of the entries of T^(n-1).

    Python integers never wrap; ``max_bits`` turns large counts into a
    ``CountOverflow`` for callers that need a bounded width.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    core = [[int(x) for x in row] for row in spec.core]
    vec = [1] * len(core)
    for _ in range(n - 1):
        vec = [sum(c * x for c, x in zip(row, vec) if c) for row in core]
    total = sum(vec)
    if max_bits is not None and total.bit_length() > max_bits:
        raise CountOverflow(f"count for n={n} needs {total.bit_length()} bits > {max_bits}")
    return total


def log_count_words(spec: SftSpec, n: int) -> float:
    """Natural log of ``count_words`` computed in floating point (no big integers)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    core = spec.core.astype(float)
    vec = np.ones(core.shape[0])
    log_scale = 0.0
    for _ in range(n - 1):
        vec = core @ vec
        s = vec.sum()
        log_scale += math.log(s)
        vec /= s
    return log_scale + math.log(vec.sum())


def mixing_index(spec: SftSpec, cap: int | None = None) -> int:
    """Smallest n <= cap with (essential T)^n > 0 entrywise."""
    core = spec.core.astype(bool)
    k = core.shape[0]
    if cap is None:
        cap = spec.alphabet_size ** 2 + 1
    power = core.copy()
    for n in range(1, cap + 1):
        if power.all():
            return n
        power = (power.astype(np.int64) @ core.astype(np.int64)) > 0
    raise NotMixing(f"no strictly positive power of the {k}x{k} core up to n={cap}")


@dataclass(frozen=True)
class DeltaValue:
    """Depth of a word: length of its longest prefix inside L(X).

    ``kind`` is ``"exact"`` when the exit from L(X) is witnessed inside the
    inspected word and ``"at_least"`` when the whole word lies in L(X).
    ``k = math.inf`` with kind exact stands for points of X.
    """

    kind: str
    k: float

    @classmethod
    def exact(cls, k):
        return cls("exact", k)

    @classmethod
    def at_least(cls, k):
        return cls("at_least", k)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def __str__(self):
        return f"{'Exact' if self.is_exact else 'AtLeast'}({self.k})"


INFINITE_DELTA = DeltaValue.exact(math.inf)


def delta(spec: SftSpec, word) -> DeltaValue:
    w = as_word(word, spec.alphabet_size)
    if not w:
        return DeltaValue.at_least(0)
    if not spec.essential_mask[w[0]]:
        return DeltaValue.exact(0)
    allowed = spec.allowed
    for i in range(1, len(w)):
        if not allowed[w[i - 1], w[i]]:
            return DeltaValue.exact(i)
    return DeltaValue.at_least(len(w))


@dataclass(frozen=True)
class CylinderSpec:
    word: Word

    @property
    def alpha(self) -> int:
        return self.word[0]

    @property
    def beta(self) -> int:
        return self.word[1]

    def __str__(self):
        return word_str(self.word)


def make_cylinder(spec: SftSpec, word) -> CylinderSpec:
    """Cylinder [alpha beta] over a forbidden 2-block of X."""
    w = as_word(word, spec.alphabet_size)
    if len(w) != 2:
        raise ValidationError(f"cylinder word must have length 2, got {word_str(w)!r}")
    if is_in_language(spec, w):
        raise ValidationError(f"cylinder word {word_str(w)!r} lies in L(X)")
    return CylinderSpec(w)
