import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_delta, degenerate, golden_mean, quiet_problem, three_symbol
from thermoshift import pressure as pr
from thermoshift.induced import transfer_counts
from thermoshift.errors import DepthTooSmall, Divergent, NoBracket, NotSingleForbiddenBlock, \
    ViolationFound
from thermoshift.spectral import bernoulli, cylinder_measure, markov_measure, parry_measure

PROBLEMS = {"golden": golden_mean, "three": three_symbol, "degenerate": degenerate,
            "four": lambda: quiet_problem(4, "13", 1.0, 5, forbidden_blocks=["00", "13", "32", "21"])}


def _per_length_from_words(problem, t, z, L):
    n, free, exc, counts = problem.return_histogram(L)
    out = np.zeros(L)
    np.add.at(out, n.astype(int) - 1, counts * np.exp(t * (-problem.params.A * free + exc) - n * z))
    return out


@pytest.mark.parametrize("name", sorted(PROBLEMS))
@pytest.mark.parametrize("t,dz", [(0.0, 0.7), (1.5, 0.0), (3.0, 0.2)])
def test_block_recursion_matches_enumeration_per_length(name, t, dz):
    problem = PROBLEMS[name]()
    L = 12 if name != "four" else 8
    z = problem.xi + dz
    a = pr.block_partial_sums(problem, t, z, L)
    b = _per_length_from_words(problem, t, z, L)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


@pytest.mark.parametrize("name", sorted(PROBLEMS))
def test_renewal_identity(name):
    problem = PROBLEMS[name]()
    v = pr.lambda_value(problem, 0.0, math.log(problem.m))
    assert v.lower <= 1.0 <= v.upper and v.width < 1e-9


@pytest.mark.parametrize("name", sorted(PROBLEMS))
@pytest.mark.parametrize("t,dz", [(1.5, 0.0), (2.0, 0.05), (4.0, 0.0), (0.5, 0.3)])
def test_evaluators_intersect(name, t, dz):
    problem = PROBLEMS[name]()
    z = problem.xi + dz
    exact = pr.lambda_value(problem, t, z)
    direct = pr.lambda_direct(problem, t, z, 14 if name != "four" else 9)
    assert exact.intersects(direct)
    assert exact.width <= direct.width + 1e-15
    if problem.single_block:
        assert exact.intersects(pr.lambda_grouped(problem, t, z, 30))


def test_grouped_needs_single_block(three):
    with pytest.raises(NotSingleForbiddenBlock):
        pr.lambda_grouped(three, 2.0, three.xi)


def test_divergence(gm):
    assert not pr.lambda_value(gm, 2.0, gm.xi - 0.01).converged
    assert not pr.lambda_value(gm, 1.0, gm.xi).converged
    with pytest.raises(Divergent):
        pr.lambda_direct(gm, 0.9, gm.xi)
    with pytest.raises(Divergent):
        pr.lambda_grouped(gm, 2.0, gm.xi - 0.1)


def test_lambda_monotone(gm):
    ts = [1.2, 1.5, 2.0, 3.0]
    vals = [pr.lambda_value(gm, t, gm.xi) for t in ts]
    assert all(a.lower > b.upper for a, b in zip(vals, vals[1:]))
    zs = [gm.xi, gm.xi + 0.1, gm.xi + 1.0]
    vals = [pr.lambda_value(gm, 2.0, z) for z in zs]
    assert all(a.lower > b.upper for a, b in zip(vals, vals[1:]))


def test_adaptive_cutoff_tightens(gm):
    coarse = pr.lambda_value(gm, 1.1, gm.xi, cutoff=8)
    fine = pr.lambda_value(gm, 1.1, gm.xi, cutoff=8, width_tol=1e-10)
    assert fine.width < coarse.width and fine.intersects(coarse)


@pytest.mark.parametrize("name", ["golden", "three", "degenerate"])
def test_transition_point(name):
    problem = PROBLEMS[name]()
    tp = pr.find_t_c(problem)
    assert tp.t_c > 1 and tp.residual < 1e-8
    assert pr.lambda_value(problem, tp.bracket[0] - 1e-6, problem.xi).lower > 1
    assert pr.lambda_value(problem, tp.bracket[1] + 1e-6, problem.xi).upper < 1


def test_no_bracket_for_heavy_penalty():
    problem = quiet_problem(2, "11", 20.0, 4, forbidden_blocks=["11"])
    with pytest.raises(NoBracket):
        pr.find_t_c(problem)


@pytest.mark.parametrize("name", ["golden", "three", "degenerate"])
def test_pressure_curve_shape(name):
    problem = PROBLEMS[name]()
    curve = pr.pressure_curve(problem, np.arange(0, 3.01, 0.1))
    assert curve.check() == []
    assert abs(curve.points[0].pressure - math.log(problem.m)) < 1e-9
    assert all(p.phase == "analytic" for p in curve.points if p.t < curve.t_c)


def test_pressure_at_matches_root(gm):
    t = 0.5
    p = pr.pressure_at(gm, t)
    assert pr.lambda_value(gm, t, p - 1e-9).lower > 1 > pr.lambda_value(gm, t, p + 1e-9).upper
    assert pr.pressure_at(gm, 2.0) == gm.xi


def test_sandwich(gm, three):
    for problem in (gm, three):
        for t in (2.0, 3.0, 5.0):
            s = pr.sandwich_check(problem, t)
            assert s.lower <= s.value.upper
            assert s.value.lower <= s.upper


def _brute_integral(problem, mu, depth):
    spec, params = problem.spec, problem.params
    exact, censored = [], 0.0
    for w in itertools.product(range(problem.m), repeat=depth):
        mass = cylinder_measure(mu, w)
        d = brute_delta(spec, w)
        if d < depth:
            exact.append(mass * (-params.A if d < params.N else -math.log1p(1 / d)))
        else:
            censored += mass
    s = math.fsum(exact)
    return s - censored * math.log1p(1 / depth), s


@pytest.mark.parametrize("name", ["golden", "three", "degenerate"])
def test_integral_phi_matches_cylinder_sum(name):
    problem = PROBLEMS[name]()
    rng = np.random.default_rng(3)
    mu = markov_measure(rng.dirichlet(np.ones(problem.m), size=problem.m))
    for depth in (4, 7):
        lo, hi = pr.integral_phi(problem.spec, problem.params, mu, depth)
        blo, bhi = _brute_integral(problem, mu, depth)
        assert abs(lo - blo) < 1e-12 and abs(hi - bhi) < 1e-12
    with pytest.raises(DepthTooSmall):
        pr.integral_phi(problem.spec, problem.params, mu, 2)


def test_variational_equality_cases(gm):
    tp = pr.find_t_c(gm)
    res = pr.variational_probe(gm, 2 * tp.t_c, [parry_measure(gm.spec)], t_c=tp.t_c)
    assert abs(res[0].gap) < 1e-10
    res = pr.variational_probe(gm, 0.0, [bernoulli(np.ones(2))], t_c=tp.t_c)
    assert abs(res[0].gap) < 1e-10


def test_variational_violation_detected(gm):
    with pytest.raises(ViolationFound):
        pr.variational_probe(gm, 0.1, [bernoulli(np.ones(2))], pressure=0.0)


def test_large_t_and_far_z(gm):
    assert pr.lambda_direct(gm, 50.0, gm.xi, 20).upper < 1e-20
    assert pr.lambda_grouped(gm, 2.0, gm.xi + 5, 25).width < 1e-12


def test_single_letter_term():
    # only u = "1" has length one: its weight is e^(-tA - z)
    problem = quiet_problem(2, "11", 1.0, 4, forbidden_blocks=["11"])
    n, free, exc, counts = problem.return_histogram(1)
    assert list(n) == [1] and counts[0] == 1
    t, z = 1.0, 0.0
    assert abs(math.exp(t * (-problem.params.A * free[0] + exc[0]) - z) - math.exp(-1)) < 1e-15


def test_width_within_tail_bound(gm, three):
    for problem in (gm, three):
        for t, dz in [(1.5, 0.0), (0.3, 0.2), (4.0, 0.01)]:
            v = pr.lambda_value(problem, t, problem.xi + dz)
            assert v.lower <= v.upper <= v.lower + 2 * v.tail_bound + 1e-12


def test_renewal_partial_sums_stay_below_one(gm):
    r = transfer_counts(gm.spec, gm.cylinder, 80)
    total = prev = Fraction(0)
    for n in range(1, 81):
        total += Fraction(r[n], 2 ** n)
        assert prev <= total <= 1
        prev = total
    assert float(total) > 1 - 1e-6


def test_empty_grid(gm):
    curve = pr.pressure_curve(gm, [])
    assert curve.points == [] and curve.xi == gm.xi and curve.t_c > 1


def test_integral_phi_exact_cases(gm):
    lo, hi = pr.integral_phi(gm.spec, gm.params, parry_measure(gm.spec), 40)
    assert abs(hi) < 1e-14 and lo >= -math.log1p(1 / 40) - 1e-15
    fixed = markov_measure([[1.0, 0.0], [0.0, 1.0]], [0.0, 1.0])
    lo, hi = pr.integral_phi(gm.spec, gm.params, fixed, 12)
    assert lo == hi == -gm.params.A
