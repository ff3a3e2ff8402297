from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from chaoscope.hierarchy import (all_words, b_read, ceil_log2, equidistribution_inputs, floor_log2,
                                 frozen_frequency, frozen_frequency_closed, marker_log_counts, mass_identity,
                                 overlap_ratio, scale_table, signal_distribution, t_k, tube_bounds,
                                 u_series_bound)

# rows worked out by hand from the scale definitions
TABLE = [
    dict(k=0, N_k=1, n_k=3, l_nk=7, per_k=24, t_k=0, b_total=0, b_read=0, rho=1),
    dict(k=1, N_k=3, n_k=7, l_nk=127, per_k=504, t_k=0, b_total=2, b_read=0, rho=3),
    dict(k=2, N_k=9, n_k=19, l_nk=2 ** 19 - 1, per_k=4 * (2 ** 19 - 2), t_k=0, b_total=8, b_read=1, rho=9),
    dict(k=3, N_k=27, n_k=55, l_nk=2 ** 55 - 1, per_k=4 * (2 ** 55 - 2), t_k=1, b_total=26, b_read=1, rho=28),
]

T_K = {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 3, 8: 3, 9: 3, 16: 3, 17: 7, 256: 7, 257: 15}


def test_scale_table_rows():
    rows = [r.as_dict() for r in scale_table(3)]
    for got, want in zip(rows, TABLE):
        assert {k: got[k] for k in want} == want


@pytest.mark.parametrize("k,t", sorted(T_K.items()))
def test_t_k_values(k, t):
    assert t_k(k) == t


@given(st.integers(1, 10 ** 12))
def test_logs(n):
    assert 2 ** floor_log2(n) <= n < 2 ** (floor_log2(n) + 1)
    assert 2 ** ceil_log2(n) >= n and (n == 1 or 2 ** (ceil_log2(n) - 1) < n)


def test_recurrence_equals_closed_form():
    for k in range(2, 31):
        for l in range(1, k):
            assert frozen_frequency(l, k) == frozen_frequency_closed(l, k)


def test_border_phase_frequency():
    h = frozen_frequency(1, 6, "H")
    assert frozen_frequency(1, 6, "B") == Fraction(1, 4) + Fraction(3, 4) * h


@given(st.integers(2, 12), st.integers(1, 8))
def test_mass_identity_along_the_recurrence(l, extra):
    k = l + extra
    L = b_read(l)
    words = all_words(L)
    machines = [[Fraction(1 if i == j % len(words) else 0) for i in range(len(words))] for j in range(l, k)]
    st_ = signal_distribution(l, k, machines, words)
    assert st_.mass == mass_identity(l, k)
    assert st_.trash() == 1 - mass_identity(l, k)


def test_signal_distribution_rejects_wrong_length():
    with pytest.raises(ValueError):
        signal_distribution(2, 5, [[Fraction(1), Fraction(0)]] * 2)


def test_marker_counts():
    mc = marker_log_counts(25)
    assert mc.u_exact[1] == Fraction(1, 16)
    assert all(mc.C[k].b <= 2 for k in mc.k)
    # the printed lower bound 2^(4^-k) fails at k = 1 and k = 2
    assert mc.lower_bound_violations()[:2] == [1, 2]
    assert float(mc.u[25].b) <= float(u_series_bound()) + 1e-30


def test_exact_and_interval_counts_agree():
    from chaoscope.pressure import mpf_to_fraction
    mc = marker_log_counts(5)
    with mpmath.workprec(mc.prec):
        for k, u in mc.u_exact.items():
            lo, hi = (mpf_to_fraction(mpmath.mpf(x)) for x in (mc.u[k].a, mc.u[k].b))
            assert lo <= u <= hi


def test_overlap_ratio_values():
    r1, r2 = overlap_ratio(1, 2 ** 10), overlap_ratio(2, 2 ** 10)
    assert abs(float(r1["ratio"]) - 0.100393) < 1e-6
    assert abs(float(r2["ratio"]) - 409.6) < 1e-2
    assert not r1["overlap"] and r2["overlap"]


def test_equidistribution_inputs_shape():
    e = equidistribution_inputs(3, 2 ** 10)
    assert 0 < e.kappa < 1
    assert 0 < e.eps < 1 and e.eps_prime > e.eps
    assert e.log2_T_lo < e.log2_T_hi
    with pytest.raises(ValueError):
        equidistribution_inputs(2, 4)


def test_tube_bounds():
    out = tube_bounds(1, 1, 1, (Fraction(1, 8), Fraction(1, 8)))
    assert out["grid_distance"] == Fraction(1, 2)
    assert out["conditional_agreement"] == Fraction(1, 2)
    with pytest.raises(ValueError):
        tube_bounds(1, 0, 1)
