"""Scale arithmetic and the exact counting recurrences of the marker hierarchy.

Doubly exponential quantities are kept as big integers when that is cheap and as
base-2 logarithms (mpmath, 256 bits by default) otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

PREC = 256


def _mp(prec: int = PREC):
    ctx = mpmath.mp.clone()
    ctx.prec = prec
    return ctx


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError("floor_log2 needs n >= 1")
    return n.bit_length() - 1


def ceil_log2(n: int) -> int:
    if n < 1:
        raise ValueError("ceil_log2 needs n >= 1")
    return (n - 1).bit_length()


def b_read(k: int) -> int:
    """Number of signal bits a k-scale machine must output; 0 at k = 0."""
    return 0 if k <= 0 else floor_log2(k)


def b_total(k: int) -> int:
    return 3 ** k - 1


def rho(k: int) -> int:
    if k == 0:
        return 1
    return k + b_total(k) - b_read(k)


def N(k: int) -> int:
    return 3 ** k


def n_of(k: int) -> int:
    return 2 * 3 ** k + 1


def macro_side(n: int) -> int:
    """Side of a Robinson n-macro-tile."""
    return 2 ** n - 1


def l_nk(k: int) -> int:
    return macro_side(n_of(k))


def per(k: int) -> int:
    return 4 * (l_nk(k) - 1)


def t_k(k: int, rounding: str = "ceil") -> int:
    """Odometer period parameter; t_0 = t_1 = t_2 = 0 by convention."""
    if k <= 2:
        return 0
    if rounding == "ceil":
        return 2 ** ceil_log2(ceil_log2(k)) - 1
    if rounding == "floor":
        return 2 ** floor_log2(floor_log2(k)) - 1
    raise ValueError("rounding must be 'ceil' or 'floor'")


def log2_l_nk(k: int, ctx=None):
    """log2(2^n - 1) with n = n_k, without materializing the integer."""
    ctx = ctx or _mp()
    n = n_of(k)
    return ctx.mpf(n) + ctx.log1p(-ctx.mpf(2) ** (-n)) / ctx.ln2


@dataclass(frozen=True)
class ScaleRow:
    k: int
    N_k: int
    n_k: int
    l_nk: int
    per_k: int
    t_k: int
    b_total: int
    b_read: int
    rho: int
    grid_ok: bool

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def grid_compatible(k: int, rounding: str = "ceil") -> bool:
    """t_k + 1 must be a power of two dividing the side (in k-markers) of a (k+1)-marker."""
    p = t_k(k, rounding) + 1
    side_log = 4 * 3 ** k  # a (k+1)-marker is a 16^{3^k} grid of k-markers
    return p & (p - 1) == 0 and p.bit_length() - 1 <= side_log


def scale_table(k_max: int, alphabet_size: int = 2, rounding: str = "ceil",
                big_limit: int = 12) -> list[ScaleRow]:
    """Rows k = 0..k_max. l_nk and per_k are exact up to ``big_limit``; beyond that they are 0
    (use ``log2_l_nk``) to avoid million-digit integers."""
    if k_max > 64:
        raise ValueError("k_max must be at most 64")
    if alphabet_size < 2:
        raise ValueError("alphabet_size must be at least 2")
    rows = []
    for k in range(k_max + 1):
        exact = k <= big_limit
        l = l_nk(k) if exact else 0
        rows.append(ScaleRow(k, N(k), n_of(k), l, 4 * (l - 1) if exact else 0, t_k(k, rounding),
                             b_total(k), b_read(k), rho(k), grid_compatible(k, rounding)))
    return rows


# frozen frequencies

def frozen_frequency(l: int, k: int, phase: str = "H", rounding: str = "ceil") -> Fraction:
    """Proportion of frozen l-markers in a k-marker of the given phase, by the coupled recurrence."""
    if l >= k:
        raise ValueError("need l < k")
    if phase not in ("H", "B"):
        raise ValueError("phase must be H or B")
    h = Fraction(0)  # value at ambient scale l + 1
    for j in range(l + 1, k):
        b = Fraction(1, 4) + Fraction(3, 4) * h
        t = t_k(j, rounding)
        h = b / (t + 1) + Fraction(t, t + 1) * h
    if phase == "H":
        return h
    return Fraction(1, 4) + Fraction(3, 4) * h


def frozen_frequency_closed(l: int, k: int, rounding: str = "ceil") -> Fraction:
    prod = Fraction(1)
    for i in range(1, k - l):
        prod *= 1 - Fraction(1, 4 * (t_k(l + i, rounding) + 1))
    return 1 - prod


# marker counts

@dataclass
class MarkerCounts:
    k: list[int]
    u: list  # mpmath intervals
    u_exact: dict[int, Fraction]
    log2_h: list  # log2 of h_k (h_k itself is u_k * 16^{3^k})
    log2_b_excess: list  # log2(b_k - (3/4) h_k) = log2 rho(k)
    C: list
    printed_lower: list  # 2^{4^{-k}}
    prec: int

    def C_float(self, k: int) -> float:
        return float(self.C[k].b)

    def lower_bound_violations(self) -> list[int]:
        return [k for k in self.k if k >= 1 and self.C[k].b < self.printed_lower[k].a]

    def rows(self) -> list[dict]:
        out = []
        for i in self.k:
            out.append({"k": i, "u_lo": _num(self.u[i].a, 30), "u_hi": _num(self.u[i].b, 30),
                        "C_hi": _num(self.C[i].b, 20), "printed_lower": _num(self.printed_lower[i].a, 20),
                        "log2_h": mpmath.nstr(self.log2_h[i], 20) if self.log2_h[i] is not None else "-inf"})
        return out


def _num(x, digits: int) -> str:
    with mpmath.workprec(PREC):
        return mpmath.nstr(mpmath.mpf(x), digits)


def _u_step_exact(u: Fraction, k: int, rounding: str) -> Fraction:
    t = t_k(k, rounding)
    return u * (1 - Fraction(1, 4 * (t + 1))) + Fraction(rho(k), (t + 1) * 16 ** (3 ** k))


def marker_log_counts(k_max: int, prec: int = PREC, rounding: str = "ceil", exact_upto: int = 5) -> MarkerCounts:
    """u_k by the normalized recurrence with interval tracking; u_0 = 0."""
    if k_max > 64:
        raise ValueError("k_max must be at most 64")
    iv = mpmath.iv
    old = iv.prec
    iv.prec = prec
    try:
        u = [iv.mpf(0)]
        exact = {0: Fraction(0)}
        for k in range(k_max):
            t = t_k(k, rounding)
            step = u[-1] * (1 - iv.mpf(1) / (4 * (t + 1))) + iv.mpf(rho(k)) / ((t + 1) * iv.mpf(16) ** (3 ** k))
            u.append(step)
            if k + 1 <= exact_upto:
                exact[k + 1] = _u_step_exact(exact[k], k, rounding)
        C = [iv.mpf(2) ** x for x in u]
        lower = [iv.mpf(2) ** (iv.mpf(4) ** (-k)) for k in range(k_max + 1)]
        ctx = _mp(prec)
        log2_h = []
        for k, x in enumerate(u):
            mid = ctx.mpf(x.mid)
            log2_h.append(None if mid == 0 else ctx.log(mid, 2) + 4 * 3 ** k)
        log2_b = [ctx.log(rho(k), 2) for k in range(k_max + 1)]
    finally:
        iv.prec = old
    return MarkerCounts(list(range(k_max + 1)), u, exact, log2_h, log2_b, C, lower, prec)


def u_series_bound(terms: int = 30, rounding: str = "ceil", prec: int = PREC):
    ctx = _mp(prec)
    return ctx.fsum(ctx.mpf(rho(n)) / ((t_k(n, rounding) + 1) * ctx.mpf(16) ** (3 ** n)) for n in range(terms))


# equidistribution inputs

@dataclass
class EquidistributionInputs:
    k: int
    alphabet_size: int
    log2_eps: object
    eps: object
    tau: object
    eps_prime: object
    log2_T_lo: object
    log2_T_hi: object
    log2_one_minus_pH: object  # upper bound on log2(1 - p_k^H)
    log2_one_minus_pH_terms: tuple
    kappa: object
    kappa_factors: dict
    kappa_asymptotic: object

    def as_dict(self) -> dict:
        s = lambda x: mpmath.nstr(x, 25)
        return {"k": self.k, "alphabet_size": self.alphabet_size, "eps": s(self.eps), "log2_eps": s(self.log2_eps),
                "tau": s(self.tau), "eps_prime": s(self.eps_prime), "log2_T_lo": s(self.log2_T_lo),
                "log2_T_hi": s(self.log2_T_hi), "log2_one_minus_pH": s(self.log2_one_minus_pH),
                "log2_one_minus_pH_terms": [s(x) for x in self.log2_one_minus_pH_terms],
                "kappa": s(self.kappa), "kappa_factors": {k: s(v) for k, v in self.kappa_factors.items()},
                "kappa_asymptotic": s(self.kappa_asymptotic)}


def _log2_add(ctx, a, b):
    m = max(a, b)
    return m + ctx.log(ctx.mpf(2) ** (a - m) + ctx.mpf(2) ** (b - m), 2)


def log2_C(alphabet_size: int, ctx=None):
    ctx = ctx or _mp()
    return ctx.log(2 * ctx.log(alphabet_size, 2), 2)


def log2_T(k: int, alphabet_size: int, ctx=None):
    """log2 of the endpoints of the temperature interval at scale k."""
    ctx = ctx or _mp()
    le = -log2_l_nk(k, ctx) / 2
    lo = log2_C(alphabet_size, ctx) + 2 * log2_l_nk(k, ctx) - le
    hi = le + log2_l_nk(k + 2, ctx) - 3
    return lo, hi


def overlap_ratio(k: int, alphabet_size: int, prec: int = PREC) -> dict:
    """max T_k / min T_{k+1}, from the endpoints and from the closed formula, plus the asymptote."""
    ctx = _mp(prec)
    _, hi = log2_T(k, alphabet_size, ctx)
    lo1, _ = log2_T(k + 1, alphabet_size, ctx)
    direct = hi - lo1
    le_k, le_k1 = -log2_l_nk(k, ctx) / 2, -log2_l_nk(k + 1, ctx) / 2
    formula = -3 - log2_C(alphabet_size, ctx) + le_k + le_k1 + log2_l_nk(k + 2, ctx) - 2 * log2_l_nk(k + 1, ctx)
    asym = 2 * 3 ** k - 5 - log2_C(alphabet_size, ctx)
    return {"k": k, "log2_ratio": direct, "log2_formula": formula, "log2_asymptote": asym,
            "ratio": ctx.mpf(2) ** direct, "asymptote": ctx.mpf(2) ** asym,
            "overlap": direct >= 0}


def equidistribution_inputs(k: int, alphabet_size: int, rounding: str = "ceil", prec: int = PREC,
                            counts: MarkerCounts | None = None) -> EquidistributionInputs:
    if k < 3:
        raise ValueError("k must be at least 3 so that t_k > 0")
    if alphabet_size < 2:
        raise ValueError("alphabet_size must be at least 2")
    ctx = _mp(prec)
    counts = counts if counts is not None and len(counts.u) > k else marker_log_counts(k, prec, rounding)
    la = ctx.log(alphabet_size, 2)
    ll = log2_l_nk(k, ctx)
    log2_eps = -ll / 2
    eps = ctx.mpf(2) ** log2_eps
    tau = 6 * ctx.mpf(2) ** (-ll)
    eps_p = 1 - (1 - eps) / (1 + tau) ** 2
    T_lo, T_hi = log2_T(k, alphabet_size, ctx)

    # |Q^H| >= 2^{h_k}; both numerator terms in log2
    log2_h = counts.log2_h[k]
    h = ctx.mpf(2) ** log2_h
    l_val = ctx.mpf(2) ** ll
    term_B = l_val * la + ctx.mpf(3) / 4 * h + rho(k) - h
    term_F = 4 * l_val * la - h
    log2_q = _log2_add(ctx, term_B, term_F)

    t = t_k(k, rounding)
    one_minus_p = ctx.mpf(2) ** log2_q
    p = 1 - one_minus_p
    dropped = one_minus_p / (ctx.ln2 * p) if p > 0 else ctx.inf
    per_k = 4 * (l_val - 1)
    f1 = (1 - ctx.mpf(1) / (t + 1)) ** 2
    f2 = 1 - (per_k * la + dropped) / h
    f3 = (1 - 1 / (2 * ctx.mpf(4) ** (3 ** k))) ** 2
    kappa = 1 - f1 * f2 * f3
    return EquidistributionInputs(k, alphabet_size, log2_eps, eps, tau, eps_p, T_lo, T_hi, log2_q,
                                  (term_B, term_F), kappa,
                                  {"window_phase": f1, "perimeter": f2, "window_ratio": f3, "dropped_o1": dropped},
                                  2 / ctx.log(k, 2))


# signal distributions

@dataclass
class SignalDistributionState:
    l: int
    k: int
    words: list[str]
    w: list[Fraction]
    history: list[list[Fraction]] = field(default_factory=list)

    @property
    def mass(self) -> Fraction:
        return sum(self.w, Fraction(0))

    def trash(self) -> Fraction:
        return 1 - self.mass


def mass_identity(l: int, k: int, rounding: str = "ceil") -> Fraction:
    prod = Fraction(1)
    for i in range(l, k):
        t = t_k(i, rounding)
        prod *= Fraction(4 * t + 3, 4 * (t + 1))
    return 1 - prod


def signal_distribution(l: int, k: int, machines: Sequence[Sequence[Fraction]], words: Sequence[str] | None = None,
                        rounding: str = "ceil") -> SignalDistributionState:
    """Run the empirical signal recurrence from w_{l,l} = 0 using m_l .. m_{k-1}.

    Each entry of ``machines`` is a probability vector over the 2^{b_read(l)} words.
    """
    if l < 2:
        raise ValueError("need l >= 2")
    if len(machines) != k - l:
        raise ValueError(f"expected {k - l} machine measures, got {len(machines)}")
    dim = 2 ** b_read(l)
    if words is None:
        words = all_words(b_read(l))
    w = [Fraction(0)] * dim
    hist = [list(w)]
    for j, m in zip(range(l, k), machines):
        if len(m) != dim:
            raise ValueError("dimension mismatch between machine measure and read scale")
        t = t_k(j, rounding)
        a, b = Fraction(1, 4 * (t + 1)), Fraction(4 * t + 3, 4 * (t + 1))
        w = [a * Fraction(x) + b * y for x, y in zip(m, w)]
        if sum(w, Fraction(0)) != mass_identity(l, j + 1, rounding):
            raise AssertionError("mass identity violated")
        hist.append(list(w))
    return SignalDistributionState(l, k, list(words), w, hist)


def all_words(length: int) -> list[str]:
    """Words over {+,-} in lexicographic order with + first."""
    import itertools
    return ["".join(p) for p in itertools.product("+-", repeat=length)]


# tube bounds

def tube_bounds(k: int, i: int, coverage_prob, complements=(0, 0), l: int | None = None) -> dict:
    """Distance bound to the grid measure, and the conditional-agreement bound 2(a + b)."""
    L = l if l is not None else l_nk(k)
    if not 1 <= i <= L:
        raise ValueError("need 1 <= i <= l_{n_k}")
    cov = Fraction(coverage_prob)
    a, b = (Fraction(x) for x in complements)
    for x in (cov, a, b):
        if not 0 <= x <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
    grid = Fraction(1, 2 ** i) + 4 * (1 - Fraction(L - i + 1, L) ** 2 * cov)
    return {"grid_distance": grid, "conditional_agreement": 2 * (a + b)}
