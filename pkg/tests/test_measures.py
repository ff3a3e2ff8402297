import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chaoscope.measures import (DyadicWordMeasure, acc_estimate, dstar_brute, dstar_words, dyadic_elements,
                                dyadic_grid_instance, gamma_encode, gamma_inverse, hausdorff, index_word,
                                pi2_accumulation_path, segment_samples, word_index)


@st.composite
def measures(draw, max_k=4, max_len=3):
    k = draw(st.integers(0, max_k))
    L = draw(st.integers(0, max_len))
    cuts = sorted(draw(st.lists(st.integers(0, 2 ** k), min_size=2 ** L - 1, max_size=2 ** L - 1)))
    w = [b - a for a, b in zip([0] + cuts, cuts + [2 ** k])]
    return DyadicWordMeasure(k, tuple(w), L)


@given(st.text("+-", max_size=8))
def test_word_index_round_trip(w):
    assert index_word(word_index(w), len(w)) == w


@given(measures(), measures(), st.integers(1, 8))
def test_dstar_matches_bruteforce(mu, nu, depth):
    assert dstar_words(mu, nu, depth).value == dstar_brute(mu, nu, depth)


@given(measures(), st.integers(0, 3), st.integers(0, 2))
def test_lift_preserves_the_measure(mu, dk, dl):
    up = mu.lift(mu.k + dk, mu.length + dl)
    assert up.same_measure(mu)
    assert dstar_words(up, mu, 6).value == 0


@given(measures(), measures(), st.integers(0, 3).flatmap(lambda e: st.integers(0, 2 ** e).map(
    lambda a: Fraction(a, 2 ** e))))
def test_mix_cylinders_are_affine(mu, nu, t):
    m = mu.mix(nu, t)
    for n in (1, 3):
        a, b, c = mu.cylinders(n), nu.cylinders(n), m.cylinders(n)
        for key in set(a) | set(b) | set(c):
            assert c.get(key, 0) == t * a.get(key, 0) + (1 - t) * b.get(key, 0)


@given(measures(max_k=6))
def test_projection_is_close(mu):
    if mu.k >= 2:
        p = mu.project(mu.k - 1, mu.length)
        assert p.k == mu.k - 1
        assert dstar_words(p, mu, 4).value <= Fraction(2 ** mu.length, 2 ** (mu.k - 1))


def test_dyadic_elements_count():
    # compositions of 2^k into 2^L parts
    assert len(dyadic_elements(1, 1)) == 3
    assert len(dyadic_elements(2, 1)) == 5
    assert len(dyadic_elements(2, 2)) == 35


def test_parse_errors():
    with pytest.raises(ValueError):
        DyadicWordMeasure(1, (1, 2), 1)
    with pytest.raises(ValueError):
        DyadicWordMeasure.from_probs({"+": Fraction(1, 3), "-": Fraction(2, 3)})


def test_json_round_trip():
    mu = DyadicWordMeasure.from_probs({"++": Fraction(1, 4), "-+": Fraction(3, 4)})
    assert DyadicWordMeasure.from_json(mu.to_json()) == mu


@pytest.mark.parametrize("mu", dyadic_elements(1, 1), ids=str)
def test_gamma_inverse_undoes_gamma(mu):
    back = gamma_inverse(gamma_encode(mu), Fraction(1, 2), 1, depth=2)
    assert back.same_measure(mu)


def test_gamma_is_affine():
    mu = DyadicWordMeasure.from_probs({"+": Fraction(1)})
    nu = DyadicWordMeasure.from_probs({"-": Fraction(1)})
    t = Fraction(1, 4)
    lhs = gamma_encode(mu.mix(nu, t)).cylinders(4)
    a, b = gamma_encode(mu).cylinders(4), gamma_encode(nu).cylinders(4)
    for key in set(lhs) | set(a) | set(b):
        assert lhs.get(key, 0) == t * a.get(key, 0) + (1 - t) * b.get(key, 0)


def test_gamma_rejects_unsupported_lengths():
    with pytest.raises(ValueError):
        gamma_encode(DyadicWordMeasure.from_probs({"++": Fraction(1)}))


def test_accumulation_path_on_grid():
    space, pred, dK = dyadic_grid_instance(6, Fraction(1, 4), Fraction(3, 4))
    space.check_axioms()
    path = pi2_accumulation_path(space, pred, 12)
    assert path.certificates_ok()
    visits = path.visits()
    net = [i for i in space.net(8) if dK(space.points[i]) == 0]
    assert net and all(visits.get(i, 0) >= 3 for i in net)


def test_segment_and_hausdorff():
    seg = segment_samples(16, 4)
    assert len(seg) == 17
    assert hausdorff(seg, seg) == 0
    assert hausdorff(seg[:1], seg[-1:], 4) == Fraction(15, 16)


def test_acc_estimate_finds_two_clusters():
    a = DyadicWordMeasure.dirac("+")
    b = DyadicWordMeasure.dirac("-")
    seq = [a, b] * 20
    est = acc_estimate(seq, Fraction(1, 64))
    assert {m.weights for m in est} == {a.weights, b.weights}
    with pytest.raises(ValueError):
        acc_estimate(seq[:5], Fraction(1, 64))
