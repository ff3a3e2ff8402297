import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chaoscope.lattice import (Alphabet, BlockMeasure, ForbiddenSet, MarkerSetSpec, Pattern, PeriodicPoint, Window,
                               count_fault_energy, enumerate_ground_patterns, validate_marker_set,
                               weak_star_distance)

# number of golden-mean words of length n (no "11"), counted by hand: Fibonacci F(n+2)
GOLDEN_COUNTS = {1: 2, 2: 3, 3: 5, 4: 8, 5: 13, 6: 21, 7: 34, 8: 55}


def brute_energy(word: str, forbidden: list[str]) -> int:
    return sum(word[i:i + len(f)] == f for f in forbidden for i in range(len(word) - len(f) + 1))


@pytest.mark.parametrize("n", sorted(GOLDEN_COUNTS))
def test_ground_count_golden(golden, n):
    res = enumerate_ground_patterns(Window((n,)), golden)
    assert res.complete and res.count == GOLDEN_COUNTS[n]


def test_ground_budget_flags_incomplete(golden):
    res = enumerate_ground_patterns(Window((12,)), golden, budget=10)
    assert res.status == "INCOMPLETE"


@given(st.text("01", min_size=1, max_size=14),
       st.lists(st.text("01", min_size=1, max_size=3), min_size=1, max_size=4, unique=True))
def test_fault_energy_matches_substring_count(word, forbidden):
    F = ForbiddenSet.from_strings(forbidden)
    assert count_fault_energy(Pattern.from_string(word), F) == brute_energy(word, forbidden)


def test_range_and_norm():
    F = ForbiddenSet.from_strings(["11", "101", "000"])
    assert F.range == 2
    assert F.potential_norm == 2
    assert len(F) == 3


def test_pattern_rejects_foreign_symbol():
    with pytest.raises(ValueError):
        Pattern.from_string("012")


def test_2d_ground_count():
    # 2x2 windows on {0,1} with no horizontal or vertical 11: hard-square count 7
    A = Alphabet(("0", "1"))
    F = ForbiddenSet(A, [Pattern.from_rows([["1", "1"]], A), Pattern.from_rows([["1"], ["1"]], A)])
    assert enumerate_ground_patterns(Window((2, 2)), F).count == 7
    assert enumerate_ground_patterns(Window((3, 3)), F).count == 63


words = st.text("01", min_size=1, max_size=6)


@given(words, words, words, st.integers(1, 5))
def test_weak_star_is_a_pseudometric(a, b, c, depth):
    x, y, z = (PeriodicPoint(Pattern.from_string(w)) for w in (a, b, c))
    dxy = weak_star_distance(x, y, depth).value
    assert dxy == weak_star_distance(y, x, depth).value
    assert weak_star_distance(x, x, depth).value == 0
    assert dxy <= weak_star_distance(x, z, depth).value + weak_star_distance(z, y, depth).value
    assert 0 <= dxy <= 1


@given(words, st.integers(1, 6))
def test_periodic_cylinders_are_probabilities(w, n):
    cyl = PeriodicPoint(Pattern.from_string(w)).cylinders(n)
    assert sum(cyl.values()) == 1
    assert all(len(k) == n for k in cyl)


def test_dirac_distance_oracle():
    # all-0 vs all-1: every level is disjoint, d_n = 2
    x, y = PeriodicPoint(Pattern.from_string("0")), PeriodicPoint(Pattern.from_string("1"))
    d = weak_star_distance(x, y, 4)
    assert d.value == Fraction(15, 16)
    assert d.tail_bound == Fraction(1, 16)


@pytest.mark.parametrize("N", [2, 5, 9])
def test_alternating_vs_zero(N):
    # d_1 = 1 and d_n = 2 afterwards
    x, y = PeriodicPoint(Pattern.from_string("01")), PeriodicPoint(Pattern.from_string("0"))
    assert weak_star_distance(x, y, N).value == Fraction(3, 4) - Fraction(1, 2 ** N)


def test_block_measure_marginals():
    A = Alphabet(("0", "1"))
    pats = [Pattern.from_string(w) for w in ("00", "01", "10")]
    mu = BlockMeasure.uniform(pats)
    assert mu.cylinders(1) == {("0",): Fraction(2, 3), ("1",): Fraction(1, 3)}
    F = ForbiddenSet.from_strings(["01"], A)
    assert mu.energy(F) == Fraction(1, 3)


def test_marker_set_golden():
    # markers "010"/"100"... are not needed; a trivial one-symbol set covers and never overlaps
    F = ForbiddenSet.from_strings(["11"])
    spec = MarkerSetSpec(1, 3, (Pattern.from_string("0"), Pattern.from_string("1")))
    rep = validate_marker_set(spec, F)
    assert rep.covering == "Proved"
    assert rep.margin_factor == Fraction(4, 1) - 2


def test_window_cube():
    w = Window.cube(3, 2)
    assert w.size == 9 and w.dimension == 2
    assert len(list(itertools.islice(w.cells(), 100))) == 9
