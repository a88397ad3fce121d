# distutils: language = c++
"""Compiled kernels; same contract as ``_kernels_py``."""

from libc.math cimport log
from libcpp.vector cimport vector

import numpy as np
cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "cython"


def delta_profile(allowed, essential, word):
    cdef cnp.uint8_t[:, ::1] A = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef cnp.uint8_t[::1] E = np.ascontiguousarray(essential, dtype=np.uint8)
    cdef cnp.int64_t[::1] w = np.ascontiguousarray(word, dtype=np.int64)
    cdef Py_ssize_t n = w.shape[0], i
    cdef long run = 0
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    for i in range(n - 1, -1, -1):
        if not E[w[i]]:
            run = 0
        elif i + 1 < n and run > 0 and A[w[i], w[i + 1]]:
            run += 1
        else:
            run = 1
        o[i] = run
    return out.tolist()


cdef struct Walk:
    const cnp.uint8_t* allowed
    const cnp.uint8_t* essential
    long m
    long alpha
    long beta
    long N
    double log_n
    long max_len
    long budget
    long* word
    vector[long]* lengths
    vector[long]* frees
    vector[double]* excs
    bint over_budget


cdef inline void close_block(Walk* w, long length, long* free, double* exc) noexcept nogil:
    free[0] = length if length < w.N - 1 else w.N - 1
    exc[0] = w.log_n - log(<double>(length + 1)) if length >= w.N else 0.0


cdef inline void close_last(Walk* w, long length, long* free, double* exc) noexcept nogil:
    cdef long low = w.N if w.N > 2 else 2
    cdef long f = (length if length < w.N - 1 else w.N - 1) - 1
    free[0] = f if f > 0 else 0
    exc[0] = log(<double>low) - log(<double>(length + 1)) if length >= low else 0.0


cdef void emit(Walk* w, long p, long start, long free, double exc) noexcept nogil:
    cdef long n = p + 1
    cdef long last = w.word[p]
    cdef long f
    cdef double e
    if n == 1:
        if w.alpha != w.beta:
            return
    elif last == w.alpha and w.alpha == w.beta:
        return
    if w.essential[last] and w.allowed[last * w.m + w.alpha]:
        close_last(w, n + 1 - start, &f, &e)
    elif w.essential[last]:
        close_block(w, n - start, &f, &e)
    else:
        f = 1
        e = 0.0
    w.lengths.push_back(n)
    w.frees.push_back(free + f)
    w.excs.push_back(exc + e)
    if <long>w.lengths.size() > w.budget:
        w.over_budget = True


cdef void visit(Walk* w, long p, long start, long free, double exc) noexcept nogil:
    cdef long prev, c, lo, hi, f
    cdef double e
    emit(w, p, start, free, exc)
    if w.over_budget or p + 1 >= w.max_len:
        return
    prev = w.word[p]
    if p == 0:
        lo = w.beta
        hi = w.beta + 1
    else:
        lo = 0
        hi = w.m
    for c in range(lo, hi):
        if p >= 1 and prev == w.alpha and c == w.beta:
            continue
        w.word[p + 1] = c
        if w.essential[prev] and w.allowed[prev * w.m + c]:
            visit(w, p + 1, start, free, exc)
        else:
            if w.essential[prev]:
                close_block(w, p + 1 - start, &f, &e)
            else:
                f = 1
                e = 0.0
            visit(w, p + 1, p + 1, free + f, exc + e)
        if w.over_budget:
            return


def enumerate_returns(allowed, essential, long alpha, long beta, long threshold,
                      long max_len, long budget):
    cdef cnp.uint8_t[:, ::1] A = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef cnp.uint8_t[::1] E = np.ascontiguousarray(essential, dtype=np.uint8)
    cdef vector[long] lengths, frees
    cdef vector[double] excs
    cdef vector[long] word
    cdef Walk w
    word.resize(max_len if max_len > 1 else 1)
    w.allowed = &A[0, 0]
    w.essential = &E[0]
    w.m = E.shape[0]
    w.alpha = alpha
    w.beta = beta
    w.N = threshold
    w.log_n = log(<double>threshold)
    w.max_len = max_len
    w.budget = budget
    w.word = word.data()
    w.lengths = &lengths
    w.frees = &frees
    w.excs = &excs
    w.over_budget = False
    if max_len >= 1:
        w.word[0] = alpha
        with nogil:
            visit(&w, 0, 0, 0, 0.0)
    if w.over_budget:
        from .errors import BudgetExceeded
        raise BudgetExceeded(f"return-word enumeration exceeded budget of {budget} words")
    cdef Py_ssize_t k, total = lengths.size()
    out_n = np.empty(total, dtype=np.int64)
    out_f = np.empty(total, dtype=np.int64)
    out_e = np.empty(total, dtype=np.float64)
    cdef cnp.int64_t[::1] on = out_n
    cdef cnp.int64_t[::1] of = out_f
    cdef double[::1] oe = out_e
    for k in range(total):
        on[k] = lengths[k]
        of[k] = frees[k]
        oe[k] = excs[k]
    return out_n, out_f, out_e
