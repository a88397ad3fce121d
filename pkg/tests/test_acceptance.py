"""Acceptance suite: one PASS/FAIL line per criterion, printed in the terminal summary."""

import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import (ACCEPTANCE_LINES, CORPUS_SFTS, brute_delta, brute_words, degenerate,
                      golden_mean, three_symbol)
from thermoshift import pressure as pr
from thermoshift.induced import (decompose, iter_return_words, make_return_word,
                                 transfer_counts)
from thermoshift.potential import phi
from thermoshift.sft import build_sft, count_words
from thermoshift.spectral import (bernoulli, cylinder_measure, entropy, markov_entropy,
                                  parry_measure, random_markov_measure)


def report(k, ok, detail, started):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail} ({time.perf_counter() - started:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_c01_entropy():
    t0 = time.perf_counter()
    errs = [abs(entropy(build_sft(m, np.ones((m, m), dtype=int))) - math.log(m)) for m in (2, 3, 4)]
    golden = abs(entropy(CORPUS_SFTS["golden"]()) - math.log((1 + math.sqrt(5)) / 2))
    ok = max(errs) < 1e-10 and golden < 1e-8
    report(1, ok, f"full shifts max err {max(errs):.1e}, golden mean err {golden:.1e}", t0)


def test_c02_language_counting():
    t0 = time.perf_counter()
    bad = []
    names = ["full2", "full3", "golden", "three", "one", "dead"]
    for name in names:
        spec = CORPUS_SFTS[name]()
        for n in range(1, 13):
            if count_words(spec, n) != sum(1 for _ in brute_words(spec, n)):
                bad.append((name, n))
    report(2, not bad, f"n <= 12 on {', '.join(names)}; mismatches {bad}", t0)


def test_c03_parry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_h = worst_pi = worst_cyl = 0.0
    for name in ("golden", "three", "four"):
        spec = CORPUS_SFTS[name]()
        mu = parry_measure(spec)
        m = spec.alphabet_size
        worst_h = max(worst_h, abs(markov_entropy(mu) - entropy(spec)))
        worst_pi = max(worst_pi, float(np.abs(mu.stationary @ mu.stochastic - mu.stationary).max()))
        for _ in range(100):
            w = tuple(int(x) for x in rng.integers(0, m, size=rng.integers(1, 10)))
            split = sum(cylinder_measure(mu, w + (c,)) for c in range(m))
            left = sum(cylinder_measure(mu, (c,) + w) for c in range(m))
            worst_cyl = max(worst_cyl, abs(cylinder_measure(mu, w) - split),
                            abs(cylinder_measure(mu, w) - left))
    ok = worst_h < 1e-8 and worst_pi < 1e-10 and worst_cyl < 1e-12
    report(3, ok, f"entropy gap {worst_h:.1e}, stationarity {worst_pi:.1e}, "
                  f"cylinder consistency {worst_cyl:.1e}", t0)


def test_c04_return_words():
    t0 = time.perf_counter()
    problem = golden_mean()
    spec, cyl, params = problem.spec, problem.cylinder, problem.params
    L = 20
    words = [make_return_word(spec, cyl, w, params) for w in iter_return_words(spec, cyl, L)]
    counts = {n: 0 for n in range(1, L + 1)}
    for rw in words:
        counts[len(rw)] += 1
    t = np.array([[1, 1], [1, 0]], dtype=object)
    power, ref = np.identity(2, dtype=object), {}
    for n in range(1, L + 1):
        ref[n] = power[1, 1]
        power = power.dot(t)
    a = counts == ref and counts == transfer_counts(spec, cyl, L)
    b = True
    for rw in words:
        prof = rw.delta_profile
        for k in rw.accidents:
            b &= all(prof[k + i] == prof[k] - i for i in range(1, prof[k]) if k + i < len(prof))
    c = not any(rw.word_type == "T3" for rw in words)
    d = all(tuple(x for _, s in decompose(spec, cyl, rw.word) for x in s) == rw.word + cyl.word
            for rw in words)
    report(4, a and b and c and d, f"{len(words)} words to length {L}: counts {a}, "
                                   f"decrement {b}, no T3 {c}, decomposition {d}", t0)


def _sample_return_words(problem, n, k, rng):
    """k uniform samples among return words of length n (cylinder alpha alpha)."""
    m = problem.m
    a, b = problem.cylinder.word
    # ways[k][c]: completions of k more letters after letter c
    ways = [[0 if (c == a and a == b) else 1 for c in range(m)]]
    for _ in range(n - 2):
        prev = ways[-1]
        ways.append([sum(prev[d] for d in range(m) if not (c == a and d == b)) for c in range(m)])
    out = []
    for _ in range(k):
        w = [a, b]
        for left in range(n - 2, 0, -1):
            opts = [d for d in range(m) if not (w[-1] == a and d == b)]
            weights = np.array([ways[left - 1][d] for d in opts], dtype=float)
            w.append(opts[rng.choice(len(opts), p=weights / weights.sum())])
        out.append(tuple(w))
    return out


def test_c05_birkhoff_closed_form():
    t0 = time.perf_counter()
    problem = golden_mean()
    spec, cyl, p = problem.spec, problem.cylinder, problem.params
    exhaustive = 22
    rng = np.random.default_rng(5)
    words = list(iter_return_words(spec, cyl, exhaustive))
    for n in range(exhaustive + 1, 41):
        words += _sample_return_words(problem, n, 150, rng)
    worst, bad_t1, checked = 0.0, 0, 0
    for w in words:
        rw = make_return_word(spec, cyl, w, p)
        n = len(w)
        stepwise = math.fsum(phi(p, d) for d in rw.delta_profile)
        if rw.word_type == "T2":
            closed = -(p.N - 1) * p.A + math.log(p.N) - math.log(n + 1)
            worst = max(worst, abs(stepwise - closed))
        elif rw.word_type == "T1":
            bad_t1 += stepwise != -n * p.A
        checked += 1
    # brute-force depths on a subset of short words as an independent oracle
    s = tuple(cyl.word)
    oracle = max(abs(math.fsum(phi(p, brute_delta(spec, w[i:] + s)) for i in range(len(w)))
                     - math.fsum(phi(p, d) for d in make_return_word(spec, cyl, w).delta_profile))
                 for w in words[:400])
    ok = worst < 1e-12 and bad_t1 == 0 and oracle < 1e-12
    report(5, ok, f"{checked} words (all to length {exhaustive}, 150 uniform samples per length "
                  f"to 40): type-2 err {worst:.1e}, type-1 mismatches {bad_t1}", t0)


def test_c06_series_consistency():
    t0 = time.perf_counter()
    problem = golden_mean()
    xi = problem.xi
    worst, apart = 0.0, []
    for t in (1.5, 2.0, 3.0, 5.0):
        for z in (xi, xi + 0.1, xi + 1.0):
            a = pr.lambda_direct(problem, t, z, 30)
            b = pr.lambda_grouped(problem, t, z, 30)
            worst = max(worst, a.width, b.width)
            if not a.intersects(b):
                apart.append((t, z))
    ok = not apart and worst < 1e-6
    report(6, ok, f"12 grid points, disjoint {apart}, max width {worst:.1e}", t0)


def test_c07_renewal():
    t0 = time.perf_counter()
    problem = golden_mean()
    r = transfer_counts(problem.spec, problem.cylinder, 30)
    partial = sum(Fraction(r[n], 2 ** n) for n in range(1, 31))
    in_window = Fraction(1) - Fraction(1, 10 ** 4) < partial <= 1
    root = pr.pressure_at(problem, 0.0)
    root_ok = abs(root - math.log(2)) < 1e-6
    report(7, in_window and root_ok,
           f"sum_(n<=30) r_n 2^-n = {float(partial):.9f} (needs > 0.9999), "
           f"root of lambda_(0,z)=1 off log 2 by {abs(root - math.log(2)):.1e}", t0)


def test_c08_transition():
    t0 = time.perf_counter()
    problem = golden_mean()
    tp = pr.find_t_c(problem)
    lo, hi = tp.bracket
    ts = np.linspace(lo - 1e-3, hi + 1e-3, 9)
    vals = [pr.lambda_value(problem, t, problem.xi) for t in ts]
    decreasing = all(a.lower > b.upper for a, b in zip(vals, vals[1:]))
    tp2 = pr.find_t_c(golden_mean(), cutoff=2 * pr.DEFAULT_CUTOFF)
    shift = abs(tp2.t_c - tp.t_c)
    ok = tp.t_c > 1 and tp.residual < 1e-8 and decreasing and shift < 1e-6
    report(8, ok, f"t_c = {tp.t_c:.10f}, residual {tp.residual:.1e}, decreasing {decreasing}, "
                  f"shift under doubled truncation {shift:.1e}", t0)


def _curve_ok(problem):
    grid = [round(0.05 * i, 12) for i in range(101)]
    curve = pr.pressure_curve(problem, grid)
    xi, tc = problem.xi, curve.t_c
    ps = np.array([p.pressure for p in curve.points])
    ts = np.array(grid)
    above = all(p > xi for p, t in zip(ps, ts) if t < tc)
    plateau = all(p == xi for p, t in zip(ps, ts) if t >= tc)
    nonincreasing = bool((np.diff(ps) <= 1e-12).all())
    second = float((ps[2:] - 2 * ps[1:-1] + ps[:-2]).min())
    p0 = abs(ps[0] - math.log(problem.m))
    left = ps[ts < tc][-1] - xi
    ok = above and plateau and nonincreasing and second >= -1e-9 and p0 < 1e-6 and left < 1e-4
    return ok, (f"t_c {tc:.6f} above {above} plateau {plateau} monotone {nonincreasing} "
                f"min second diff {second:.1e} |P(0)-log m| {p0:.1e} left gap {left:.1e}")


def test_c09_freezing_picture():
    t0 = time.perf_counter()
    results = {name: _curve_ok(make()) for name, make in
               (("golden", golden_mean), ("three", three_symbol), ("degenerate", degenerate))}
    ok = all(r[0] for r in results.values())
    report(9, ok, "; ".join(f"{k}: {v[1]}" for k, v in results.items()), t0)


def test_c10_sandwich():
    t0 = time.perf_counter()
    rows = []
    for name, make in (("golden", golden_mean), ("three", three_symbol)):
        problem = make()
        for t in (2.0, 3.0, 5.0):
            s = pr.sandwich_check(problem, t)
            ok = s.lower <= s.value.upper and (math.isinf(s.upper) or s.value.lower <= s.upper)
            rows.append((name, t, ok, math.isinf(s.upper)))
    ok = all(r[2] for r in rows)
    infinite = [(r[0], r[1]) for r in rows if r[3]]
    report(10, ok, f"{len(rows)} cases hold; upper side infinite at {infinite}", t0)


def test_c11_variational():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    problem = golden_mean()
    tp = pr.find_t_c(problem)
    measures = [random_markov_measure(2, rng) for _ in range(20)]
    worst = -math.inf
    for t in (0.5, tp.t_c, 2 * tp.t_c):
        res = pr.variational_probe(problem, t, measures, t_c=tp.t_c)
        worst = max(worst, max(r.value - r.pressure for r in res))
    parry = parry_measure(problem.spec)
    eq_parry = max(abs(pr.variational_probe(problem, t, [parry], t_c=tp.t_c)[0].gap)
                   for t in (tp.t_c, 2 * tp.t_c))
    eq_bern = abs(pr.variational_probe(problem, 0.0, [bernoulli(np.ones(2))], t_c=tp.t_c)[0].gap)
    ok = worst <= 1e-6 and eq_parry < 1e-6 and eq_bern < 1e-6
    report(11, ok, f"max h + t int(phi) - P over 60 cases {worst:.3e}; Parry gap {eq_parry:.1e}, "
                   f"Bernoulli gap at t=0 {eq_bern:.1e}", t0)


def test_c12_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    spec = tmp_path / "golden.json"
    spec.write_text('{"alphabet_size":2,"forbidden_blocks":["11"],"cylinder":"11",'
                    '"potential":{"A":1.0,"N":4}}')
    outs = []
    for k in range(2):
        out = tmp_path / f"curve{k}.csv"
        subprocess.run([sys.executable, "-m", "thermoshift.cli", "pressure-curve", "--spec", str(spec),
                        "--t-min", "0", "--t-max", "5", "--t-step", "0.1", "--out", str(out)],
                       check=True, capture_output=True, env=os.environ.copy())
        outs.append(out.read_bytes())
    rows = outs[0].count(b"\n") - 1
    ok = outs[0] == outs[1] and rows == 51
    report(12, ok, f"two runs byte-identical {outs[0] == outs[1]}, {rows} rows", t0)
