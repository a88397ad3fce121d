"""Pure-Python kernels; same contract as the compiled ``_kernels`` module.

``allowed`` is the m x m 0/1 matrix of essential transitions (dead symbols
have zero rows and columns) and ``essential`` the 0/1 vertex mask.
"""

import math
import sys

import numpy as np

IMPLEMENTATION = "python"


def delta_profile(allowed, essential, word):
    """delta at every position of ``word`` (values of the trailing run are censored)."""
    n = len(word)
    out = [0] * n
    run = 0
    for i in range(n - 1, -1, -1):
        a = word[i]
        if not essential[a]:
            run = 0
        elif i + 1 < n and run > 0 and allowed[a][word[i + 1]]:
            run += 1
        else:
            run = 1
        out[i] = run
    return out


def enumerate_returns(allowed, essential, alpha, beta, threshold, max_len, budget):
    """Walk every return word to [alpha beta] of length <= max_len.

    Returns ``(lengths, free, exc)``: for each word its length, the number of
    positions with delta < threshold and the sum of -log(1 + 1/delta) over the
    other positions, in lexicographic word order.
    """
    allowed = [[bool(x) for x in row] for row in np.asarray(allowed)]
    essential = [bool(x) for x in np.asarray(essential)]
    m = len(essential)
    N = int(threshold)
    log_n = math.log(N)
    lengths, frees, excs = [], [], []
    word = [0] * max(max_len, 1)

    def close(length):
        # free count and log sum of an interior block with delta = length..1
        free = min(length, N - 1)
        exc = log_n - math.log(length + 1) if length >= N else 0.0
        return free, exc

    def close_last(length):
        # final block ending on the re-entry letter: delta = length..2
        low = max(N, 2)
        free = max(0, min(length, N - 1) - 1)
        exc = math.log(low) - math.log(length + 1) if length >= low else 0.0
        return free, exc

    def emit(p, start, free, exc):
        n = p + 1
        last = word[p]
        if n == 1:
            if alpha != beta:
                return
        elif last == alpha and alpha == beta:
            return
        if essential[last] and allowed[last][alpha]:
            f, e = close_last(n + 1 - start)
        else:
            f, e = close(n - start) if essential[last] else (1, 0.0)
        lengths.append(n)
        frees.append(free + f)
        excs.append(exc + e)
        if len(lengths) > budget:
            raise _budget_error(budget)

    def visit(p, start, free, exc):
        emit(p, start, free, exc)
        if p + 1 >= max_len:
            return
        prev = word[p]
        choices = (beta,) if p == 0 else range(m)
        for c in choices:
            if p >= 1 and prev == alpha and c == beta:
                continue
            word[p + 1] = c
            if essential[prev] and allowed[prev][c]:
                visit(p + 1, start, free, exc)
            else:
                f, e = close(p + 1 - start) if essential[prev] else (1, 0.0)
                visit(p + 1, p + 1, free + f, exc + e)

    if max_len >= 1:
        word[0] = alpha
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 4 * max_len + 100))
        try:
            visit(0, 0, 0, 0.0)
        finally:
            sys.setrecursionlimit(limit)
    return (np.array(lengths, dtype=np.int64), np.array(frees, dtype=np.int64),
            np.array(excs, dtype=np.float64))


def _budget_error(budget):
    from .errors import BudgetExceeded
    return BudgetExceeded(f"return-word enumeration exceeded budget of {budget} words")
