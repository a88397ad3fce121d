"""Return words to a two-letter cylinder: enumeration, accidents, types, decomposition."""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field

from . import kernels
from .errors import BudgetExceeded, DecompositionMismatch, NotAReturnWord, ValidationError
from .potential import PotentialParams, return_profile
from .sft import CylinderSpec, SftSpec, Word, as_word, is_in_language, word_str

DEFAULT_BUDGET = 10_000_000


def enumeration_budget(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    return int(os.environ.get("THERMOSHIFT_BUDGET", DEFAULT_BUDGET))


@dataclass(frozen=True)
class ReturnWord:
    word: Word
    delta_profile: tuple[int, ...]
    accidents: tuple[int, ...]
    word_type: str | None = None
    segments: tuple[tuple[str, Word], ...] = field(default=(), repr=False)

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return word_str(self.word)


def _occurrences(s: Word, pattern: Word) -> list[int]:
    k = len(pattern)
    return [i for i in range(len(s) - k + 1) if s[i:i + k] == pattern]


def is_return_word(spec: SftSpec, cylinder: CylinderSpec, u) -> bool:
    """Prefix, no inner occurrence, and first return exactly at |u| on u w_J."""
    w = as_word(u, spec.alphabet_size)
    if not w:
        return False
    s = w + cylinder.word
    if s[:2] != cylinder.word:
        return False
    return all(p == 0 or p == len(w) for p in _occurrences(s, cylinder.word))


def accidents_from_profile(profile) -> list[int]:
    return [i for i in range(1, len(profile)) if profile[i] > profile[i - 1] - 1]


def accidents(spec: SftSpec, cylinder: CylinderSpec, u) -> list[int]:
    if not is_return_word(spec, cylinder, u):
        raise NotAReturnWord(f"{u!r} is not a return word to [{cylinder}]")
    return accidents_from_profile(return_profile(spec, cylinder, u))


def excursion_runs(profile, N: int) -> list[tuple[int, int]]:
    """Maximal index ranges [start, end) with delta >= N."""
    runs, start = [], None
    for i, d in enumerate(profile):
        if d >= N and start is None:
            start = i
        elif d < N and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(profile)))
    return runs


def classify(return_word: ReturnWord, params: PotentialParams) -> str:
    runs = len(excursion_runs(return_word.delta_profile, params.N))
    return "T1" if runs == 0 else "T2" if runs == 1 else "T3"


def _breaks(spec: SftSpec, s: Word) -> list[int]:
    return [p for p in range(len(s) - 1) if not spec.allowed[s[p], s[p + 1]]]


def decompose(spec: SftSpec, cylinder: CylinderSpec, u) -> tuple[tuple[str, Word], ...]:
    """Split u w_J into forbidden pairs and the L(X)-blocks between them.

    Segments are ("pair", ab) for a forbidden adjacency, ("w", ...) for the
    interior of an L(X)-block, and ("overlap", ...) when consecutive forbidden
    pairs share a letter (one-letter blocks, e.g. u = alpha when alpha = beta).
    """
    w = as_word(u, spec.alphabet_size)
    s = w + cylinder.word
    breaks = _breaks(spec, s)
    if not breaks or breaks[0] != 0 or breaks[-1] != len(w):
        raise DecompositionMismatch(f"u w_J = {word_str(s)} does not start and end on the cylinder pair")
    # chains of breaks whose pairs overlap
    chains = [[breaks[0]]]
    for p in breaks[1:]:
        if p == chains[-1][-1] + 1:
            chains[-1].append(p)
        else:
            chains.append([p])
    segments = []
    for idx, chain in enumerate(chains):
        lo, hi = chain[0], chain[-1] + 2
        if idx > 0:
            prev_end = chains[idx - 1][-1] + 2
            block = s[prev_end - 1:lo + 1]
            if not is_in_language(spec, block):
                raise DecompositionMismatch(f"block {word_str(block)} is not in L(X)")
            segments.append(("w", s[prev_end:lo]))
        segments.append(("pair" if len(chain) == 1 else "overlap", s[lo:hi]))
    for p in breaks:
        if is_in_language(spec, s[p:p + 2]):
            raise DecompositionMismatch(f"pair at {p} lies in L(X)")
    rebuilt = tuple(x for _, seg in segments for x in seg)
    if rebuilt != s:
        raise DecompositionMismatch(f"segments rebuild {word_str(rebuilt)} != {word_str(s)}")
    return tuple(segments)


def make_return_word(spec: SftSpec, cylinder: CylinderSpec, u,
                     params: PotentialParams | None = None) -> ReturnWord:
    w = as_word(u, spec.alphabet_size)
    if not is_return_word(spec, cylinder, w):
        raise NotAReturnWord(f"{word_str(w)} is not a return word to [{cylinder}]")
    profile = tuple(return_profile(spec, cylinder, w))
    rw = ReturnWord(w, profile, tuple(accidents_from_profile(profile)), None,
                    decompose(spec, cylinder, w))
    if params is not None:
        rw = ReturnWord(rw.word, rw.delta_profile, rw.accidents, classify(rw, params), rw.segments)
    return rw


def iter_return_words(spec: SftSpec, cylinder: CylinderSpec, max_len: int):
    """Yield return words of length <= max_len in lexicographic order.

    Depth-first over prefixes; a prefix dies as soon as alpha beta occurs at
    an inner position.
    """
    alpha, beta = cylinder.word
    m = spec.alphabet_size
    if max_len < 1:
        return
    stack = [(alpha,)]
    while stack:
        w = stack.pop()
        n = len(w)
        last = w[-1]
        if n == 1:
            if alpha == beta:
                yield w
        elif not (last == alpha and alpha == beta):
            yield w
        if n >= max_len:
            continue
        nxt = (beta,) if n == 1 else tuple(c for c in range(m) if not (last == alpha and c == beta))
        for c in reversed(nxt):
            stack.append(w + (c,))


def enumerate_return_words(spec: SftSpec, cylinder: CylinderSpec, max_len: int,
                           params: PotentialParams | None = None,
                           budget: int | None = None) -> list[ReturnWord]:
    if max_len < 1:
        raise ValidationError("max_len must be >= 1")
    cap = enumeration_budget(budget)
    out = []
    for w in iter_return_words(spec, cylinder, max_len):
        out.append(make_return_word(spec, cylinder, w, params))
        if len(out) > cap:
            raise BudgetExceeded(f"more than {cap} return words up to length {max_len}")
    return out


@dataclass
class Multiplicities:
    c: dict[int, int]
    d: dict[int, int]
    r: dict[int, int]
    types: dict[int, Counter]
    transfer: dict[int, int] | None = None

    @property
    def transfer_agrees(self) -> bool | None:
        if self.transfer is None:
            return None
        return all(self.transfer[n] == self.r.get(n, 0) for n in self.transfer)


def transfer_counts(spec: SftSpec, cylinder: CylinderSpec, max_len: int) -> dict[int, int]:
    """(T^(n-1))_{beta alpha} as exact integers, n = 1..max_len."""
    t = [[int(x) for x in row] for row in spec.essential_matrix]
    m = spec.alphabet_size
    alpha, beta = cylinder.word
    row = [1 if j == beta else 0 for j in range(m)]  # e_beta^T T^0
    out = {}
    for n in range(1, max_len + 1):
        out[n] = row[alpha]
        row = [sum(row[i] * t[i][j] for i in range(m)) for j in range(m)]
    return out


def multiplicities(spec: SftSpec, cylinder: CylinderSpec, params: PotentialParams,
                   max_len: int, budget: int | None = None) -> Multiplicities:
    words = enumerate_return_words(spec, cylinder, max_len, params, budget)
    r = {n: 0 for n in range(1, max_len + 1)}
    c, d = {}, {}
    types = {n: Counter() for n in range(1, max_len + 1)}
    for rw in words:
        n = len(rw)
        r[n] += 1
        types[n][rw.word_type] += 1
        if rw.word_type == "T1":
            c[n] = c.get(n, 0) + 1
        if n >= params.N:
            d[n] = d.get(n, 0) + 1
    transfer = transfer_counts(spec, cylinder, max_len) if spec.single_forbidden_block else None
    return Multiplicities(c, d, r, types, transfer)


def return_statistics(spec: SftSpec, cylinder: CylinderSpec, params: PotentialParams,
                      max_len: int, budget: int | None = None):
    """Per-word (length, free-step count, excursion log-sum) from the fast kernel."""
    return kernels.enumerate_returns(
        spec.allowed.astype("uint8"), spec.essential_mask.astype("uint8"),
        cylinder.alpha, cylinder.beta, params.N, max_len, enumeration_budget(budget))
