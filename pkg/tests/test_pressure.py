import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaoscope.lattice import Alphabet, ForbiddenSet, Pattern, PeriodicPoint
from chaoscope.pressure import (MarkovGibbs, block_energies, block_pressure, boundary_term, certify_ball_empty,
                                convex_eval_interval, energy_counts, energy_counts_bruteforce,
                                equidistribution_check, gibbs_block_weights, gibbs_sample_torus,
                                ground_probability_threshold, log2_partition, pressure_oracle, pressure_series,
                                pressure_upper_from_templates, template_entropy_bound, transfer_matrix_pressure,
                                uniform_energy_per_site, variational_value)

LOG2_PHI = math.log2((1 + math.sqrt(5)) / 2)

# golden-mean energy histograms on n sites, counted by hand for n <= 4
GOLDEN_HIST = {1: {0: 2}, 2: {0: 3, 1: 1}, 3: {0: 5, 1: 2, 2: 1}, 4: {0: 8, 1: 5, 2: 2, 3: 1}}


@pytest.mark.parametrize("n", sorted(GOLDEN_HIST))
def test_golden_energy_histogram(golden, n):
    assert energy_counts(n, golden) == GOLDEN_HIST[n]


forbidden_words = st.lists(st.text("01", min_size=1, max_size=3), min_size=1, max_size=3, unique=True)


@given(forbidden_words, st.integers(1, 9))
def test_counts_match_bruteforce(words, n):
    F = ForbiddenSet.from_strings(words)
    c = energy_counts(n, F)
    assert c == energy_counts_bruteforce(n, F)
    assert sum(c.values()) == 2 ** n


def test_2d_counts_match_bruteforce():
    A = Alphabet(("0", "1"))
    F = ForbiddenSet(A, [Pattern.from_rows([["1", "1"]], A), Pattern.from_rows([["1"], ["1"]], A)])
    for n in (1, 2, 3):
        assert energy_counts(n, F) == energy_counts_bruteforce(n, F)
    assert energy_counts(3, F)[0] == 63


def test_beta_zero_upper_is_one(golden):
    s = block_pressure(12, 0, golden)
    assert s.upper == 1


def test_boundary_term(golden):
    assert boundary_term(12, 1, golden, 1) == Fraction(1, 6)
    s = block_pressure(12, 1, golden)
    assert s.upper - s.lower == Fraction(2, 12) or abs(float(s.upper - s.lower) - 1 / 6) < 1e-40


def test_sandwich_contains_transfer_oracle(golden):
    s = block_pressure(12, 1, golden)
    oracle = transfer_matrix_pressure(1, golden)
    assert abs(oracle - 0.83251) < 1e-4
    assert s.contains(oracle)


def test_high_beta_upper_is_ground_count(golden):
    s = block_pressure(5, 60, golden)
    # 13 ground words on 5 sites; other energies are suppressed below 160-bit resolution
    assert abs(float(s.upper) - math.log2(13) / 5) < 1e-15


@given(st.fractions(min_value=0, max_value=8, max_denominator=8), st.integers(2, 14))
def test_oracle_always_inside(beta, n):
    F = ForbiddenSet.from_strings(["11"])
    s = block_pressure(n, beta, F)
    assert s.lower <= transfer_matrix_pressure(beta, F) + 1e-12
    assert transfer_matrix_pressure(beta, F) <= s.upper + 1e-12


def test_upper_decreases_with_n(golden):
    ups = [float(block_pressure(n, 5, golden).upper) for n in (5, 10, 15, 20)]
    assert ups == sorted(ups, reverse=True)
    assert ups[-1] - LOG2_PHI < 0.06


def test_upper_nonincreasing_in_beta(golden):
    rows = pressure_series([Fraction(b, 2) for b in range(0, 12)], 8, golden,
                           lambda b: transfer_matrix_pressure(b, golden))
    ups = [r["upper"] for r in rows]
    assert all(a >= b for a, b in zip(ups, ups[1:]))
    assert all(r["lower"] <= r["oracle"] + 1e-12 <= r["upper"] + 2e-12 for r in rows)


def test_log2_partition_exact_for_powers_of_two():
    assert log2_partition({0: 4}, 3, 2) == 1
    assert log2_partition({0: 2, 1: 2}, 0, 2) == 1


def test_gibbs_block_maximises_variational_value(golden):
    words, E = block_energies(6, golden)
    beta = 2
    w = gibbs_block_weights(E, beta)
    best = variational_value(w, E, beta)
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.dirichlet(np.ones(len(E)))
        assert variational_value(v, E, beta) <= best + 1e-9
    # the maximum is log2 Z
    z = math.log2(sum(2.0 ** (-beta * e) for e in E))
    assert abs(best - z) < 1e-9


# bound evaluators

def test_ground_threshold_examples():
    assert ground_probability_threshold(4, Fraction(1, 10), 2) == 40
    assert ground_probability_threshold(2, Fraction(1, 5), 2) == 10
    assert abs(float(ground_probability_threshold(1, 1, 3)) - math.log2(3)) < 1e-12
    with pytest.raises(ValueError):
        ground_probability_threshold(4, 0, 2)


def test_template_entropy_example():
    v = template_entropy_bound(10 ** 6, 2, Fraction(1, 4), 0)
    assert abs(float(v) - 1.3113) < 1e-4
    with pytest.raises(ValueError):
        template_entropy_bound(4, 2, Fraction(1, 2), 0)


@given(st.lists(st.tuples(st.integers(1, 1000), st.integers(0, 20), st.integers(1, 50)), min_size=1, max_size=5),
       st.integers(0, 5))
def test_template_upper_is_minimum(series, beta):
    R, E, I = zip(*series)
    v = pressure_upper_from_templates(R, E, I, beta)
    assert all(v <= (math.log2(r) - beta * e) / i + 1e-12 for r, e, i in series)


def test_equidistribution_report():
    rep = equidistribution_check(kappa=Fraction(1, 10), eps=Fraction(1, 100), tau=Fraction(1, 2), alpha=1, ell=2,
                                 d=1, alphabet_size=2, Q_size=2, log2_ground_count=50, n=100, r=1, phi_norm=1,
                                 beta=2000)
    assert rep.J_side == 4
    assert rep.entropy_criterion
    lo, hi = rep.temperature_window
    assert abs(float(lo) - 2 * 4 / 0.01) < 1e-9
    assert rep.beta_in_window is False
    with pytest.raises(ValueError):
        equidistribution_check(kappa=Fraction(1, 10), eps=Fraction(1, 100), tau=Fraction(1, 3), alpha=1, ell=2, d=1,
                               alphabet_size=2, Q_size=2, log2_ground_count=50, n=100, r=1, phi_norm=1)


# sampler

def test_sampler_is_reproducible(golden):
    a = gibbs_sample_torus(64, 3, golden, 5, seed=11)
    b = gibbs_sample_torus(64, 3, golden, 5, seed=11)
    assert np.array_equal(a.final, b.final)
    assert a.energy_per_site == b.energy_per_site


def test_sampler_infinite_temperature(golden):
    run = gibbs_sample_torus(2048 // 4, 0, golden, 40, seed=3)
    tail = run.energy_per_site[10:]
    assert abs(sum(tail) / len(tail) - float(uniform_energy_per_site(golden))) < 0.02


def test_sampler_site_cap(golden):
    with pytest.raises(ValueError):
        gibbs_sample_torus(257, 1, ForbiddenSet(Alphabet(("0", "1")),
                                                [Pattern.from_rows([["1", "1"]], Alphabet(("0", "1")))]), 1, 0)


# certifier

def test_certify_small_ball_is_empty(golden):
    c = certify_ball_empty(PeriodicPoint(Pattern.from_string("1")), Fraction(1, 1000), (10, 12), 4, 1000, golden)
    assert c.verdict == "Empty"


def test_certify_large_ball_is_unknown(golden):
    c = certify_ball_empty(PeriodicPoint(Pattern.from_string("1")), 1, (10, 12), 4, 1000, golden)
    assert c.verdict == "Unknown"


def test_certify_zero_budget(golden):
    c = certify_ball_empty(PeriodicPoint(Pattern.from_string("1")), Fraction(1, 1000), (10, 12), 4, 0, golden)
    assert (c.verdict, c.reason) == ("Unknown", "budget exhausted")


def _dstar_float(mu, nu, depth):
    tot = 0.0
    for n in range(1, depth + 1):
        a, b = mu.cylinders(n), nu.cylinders(n)
        tot += sum(abs(float(a.get(k, 0)) - float(b.get(k, 0))) for k in set(a) | set(b)) / 2 ** (n + 1)
    return tot


@pytest.mark.parametrize("word,radius,beta", [
    ("0", "1/100", "1"), ("01", "1/50", "2"), ("001", "1/20", "1/2"), ("1", "1/200", "3"),
    ("0011", "1/30", "1"), ("00", "1/64", "4"), ("010", "1/40", "0"),
])
def test_certifier_never_excludes_the_gibbs_measure(golden, word, radius, beta):
    # fuzz: whenever the true equilibrium lies in the ball, the verdict must not be Empty
    beta = Fraction(beta)
    g = MarkovGibbs(beta, golden)
    center = PeriodicPoint(Pattern.from_string(word))
    depth = 10
    dist = _dstar_float(g, center, depth) + 2.0 ** -depth
    c = certify_ball_empty(center, Fraction(radius), (beta, beta + 1), 4, 2000, golden)
    if dist <= float(Fraction(radius)):
        assert c.verdict != "Empty"
    # a ball that surely contains the Gibbs measure
    c2 = certify_ball_empty(center, Fraction(dist).limit_denominator(10 ** 9) + Fraction(1, 10 ** 6),
                            (beta, beta), 4, 2000, golden)
    assert c2.verdict != "Empty"


# convex evaluation

@given(st.fractions(-2, 2, max_denominator=16), st.fractions(Fraction(1, 16), 2, max_denominator=16))
def test_convex_enclosure_contains_the_range(s, w):
    t = s + w
    g = lambda x, eps: x * x
    m, M = convex_eval_interval(g, s, t)
    lo = 0 if s <= 0 <= t else min(s * s, t * t)
    assert m <= lo and max(s * s, t * t) <= M


def test_convex_example():
    assert convex_eval_interval(lambda x, e: x * x, 0, 1) == (Fraction(-7, 4), Fraction(3, 2))


def test_convex_on_pressure(golden):
    g = pressure_oracle(8, golden)
    m, M = convex_eval_interval(g, 1, 2, Fraction(1, 1000))
    for b in (1, Fraction(3, 2), 2):
        v = g(b, 0)
        assert m <= v <= M


def test_markov_gibbs_cylinders(golden):
    g = MarkovGibbs(1, golden)
    cyl = g.cylinders(3)
    assert abs(sum(cyl.values()) - 1) < 1e-12
    # consistency between levels
    two = g.cylinders(2)
    for w, p in two.items():
        assert abs(sum(cyl.get(w + (a,), 0) for a in "01") - p) < 1e-12
