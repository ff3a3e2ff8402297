"""Finite-window pressure bounds for fault potentials, plus the bound evaluators built on them.

The pressure of a non-negative finite-range fault interaction is squeezed between

    upper = log2 Z_n(beta) / |I_n|
    lower = upper - beta * (|I_n| - |I_{n-2r}|) / |I_n| * ||phi||

where Z_n sums 2^(-beta E) over all patterns on the cube I_n. The upper side uses
submultiplicativity of Z_n (valid because the interaction is non-negative); the lower side
tiles the lattice with independent Gibbs blocks and charges every site near a block border
the full potential norm.

Other tools here: ground-probability thresholds, template entropy bounds, the equidistribution
criteria checker, a heat-bath sampler, a sound ball-emptiness certifier and a convex-function
interval evaluator.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numba
import numpy as np

from .lattice import Alphabet, ForbiddenSet, Window

PREC = 160
ROW_SPACE_LIMIT = 2 ** 24


class IntractableWindow(ValueError):
    pass


def _mp():
    ctx = mpmath.mp.clone()
    ctx.prec = PREC
    return ctx


def _to_mpf(ctx, x):
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    return ctx.mpf(x)


def _log2_exact(x: Fraction):
    """log2 of a positive rational; exact Fraction when x is a power of two, else None."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of non-positive number")
    p, q = x.numerator, x.denominator
    if p & (p - 1) == 0 and q & (q - 1) == 0:
        return Fraction(p.bit_length() - q.bit_length())
    return None


def log2_number(x):
    """log2 as an exact Fraction when possible, otherwise a high-precision mpf."""
    if isinstance(x, (int, Fraction)):
        e = _log2_exact(Fraction(x))
        if e is not None:
            return e
    ctx = _mp()
    return ctx.log(_to_mpf(ctx, x), 2)


def binary_entropy(x):
    """H(x) in bits, computed in high precision."""
    ctx = _mp()
    x = _to_mpf(ctx, x)
    if x < 0 or x > 1:
        raise ValueError("binary entropy needs 0 <= x <= 1")
    if x == 0 or x == 1:
        return ctx.mpf(0)
    return -x * ctx.log(x, 2) - (1 - x) * ctx.log(1 - x, 2)


# energy polynomials

def _dimension(F: ForbiddenSet, d: int | None) -> int:
    dims = {len(s) for s in F.shapes}
    if d is None:
        if not dims:
            raise ValueError("empty forbidden set: pass the dimension explicitly")
        return dims.pop()
    if dims and dims != {d}:
        raise ValueError("forbidden set dimension does not match")
    return d


def _coded_shapes(F: ForbiddenSet):
    a = F.alphabet
    return {shape: {tuple(a.index(c) for c in cells) for cells in pats} for shape, pats in F.shapes.items()}


def energy_counts(n: int, F: ForbiddenSet, d: int | None = None) -> dict[int, int]:
    """Number of patterns on I_n for each value of the window energy E_{I_n}.

    1D uses a transfer over the last L-1 symbols; 2D uses a row transfer over the last
    H-1 rows, refused when that row space exceeds ``ROW_SPACE_LIMIT`` states.
    """
    d = _dimension(F, d)
    if n < 1:
        raise ValueError("n must be positive")
    q = F.alphabet.size
    shapes = _coded_shapes(F)
    if d == 1:
        L = max((s[0] for s in shapes), default=1)
        if q ** max(L - 1, 0) > ROW_SPACE_LIMIT:
            raise IntractableWindow("state space too large")
        layers: dict[tuple, dict[int, int]] = {(): {0: 1}}
        for i in range(n):
            nxt: dict[tuple, dict[int, int]] = {}
            for state, poly in layers.items():
                for a in range(q):
                    word = state + (a,)
                    e = sum(1 for (s,), pats in shapes.items() if s <= len(word) and word[-s:] in pats)
                    key = word[-(L - 1):] if L > 1 else ()
                    tgt = nxt.setdefault(key, {})
                    for k, c in poly.items():
                        tgt[k + e] = tgt.get(k + e, 0) + c
            layers = nxt
        return _sum_polys(layers.values())

    H = max((s[0] for s in shapes), default=1)
    if q ** (n * max(H - 1, 0)) > ROW_SPACE_LIMIT or q ** n > ROW_SPACE_LIMIT:
        raise IntractableWindow(f"row space {q}^{n * max(H - 1, 1)} exceeds the limit")
    rows = list(itertools.product(range(q), repeat=n))

    def new_energy(prev: tuple, row: tuple) -> int:
        stack = prev + (row,)
        e = 0
        for (h, w), pats in shapes.items():
            if h > len(stack) or w > n:
                continue
            block_rows = stack[-h:]
            for j in range(n - w + 1):
                if tuple(c for r in block_rows for c in r[j:j + w]) in pats:
                    e += 1
        return e

    layers = {(): {0: 1}}
    for i in range(n):
        nxt = {}
        for state, poly in layers.items():
            for row in rows:
                e = new_energy(state, row)
                key = (state + (row,))[-(H - 1):] if H > 1 else ()
                tgt = nxt.setdefault(key, {})
                for k, c in poly.items():
                    tgt[k + e] = tgt.get(k + e, 0) + c
        layers = nxt
    return _sum_polys(layers.values())


def _sum_polys(polys) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in polys:
        for k, c in p.items():
            out[k] = out.get(k, 0) + c
    return dict(sorted(out.items()))


def energy_counts_bruteforce(n: int, F: ForbiddenSet, d: int | None = None) -> dict[int, int]:
    """Reference enumeration of every pattern on I_n (small windows only)."""
    from .lattice import Pattern, count_fault_energy
    d = _dimension(F, d)
    win = Window.cube(n, d)
    if F.alphabet.size ** win.size > ROW_SPACE_LIMIT:
        raise IntractableWindow("too many patterns to enumerate")
    out: dict[int, int] = {}
    for cells in itertools.product(F.alphabet.symbols, repeat=win.size):
        e = count_fault_energy(Pattern(win, cells, F.alphabet), F)
        out[e] = out.get(e, 0) + 1
    return dict(sorted(out.items()))


def log2_partition(counts: dict[int, int], beta, size: int):
    """(1/size) log2 sum_e c_e 2^(-beta e); exact Fraction when the sum is a power of two."""
    beta = Fraction(beta)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta.denominator == 1:
        b = beta.numerator
        Z = sum(Fraction(c, 2 ** (b * e)) for e, c in counts.items())
        ex = _log2_exact(Z)
        if ex is not None:
            return ex / size
    ctx = _mp()
    bb = _to_mpf(ctx, beta)
    Z = ctx.fsum(c * ctx.power(2, -bb * e) for e, c in counts.items())
    return ctx.log(Z, 2) / size


@dataclass(frozen=True)
class PressureSandwich:
    n: int
    beta: Fraction
    lower: object
    upper: object
    boundary_term: Fraction
    window_size: int
    energy_counts: dict = field(repr=False, compare=False, default_factory=dict)

    def contains(self, value) -> bool:
        return self.lower <= value <= self.upper

    def as_dict(self) -> dict:
        return {"n": self.n, "beta": str(self.beta), "lower": _s(self.lower), "upper": _s(self.upper),
                "boundary_term": str(self.boundary_term), "window_size": self.window_size}


def _s(x) -> str:
    return str(x) if isinstance(x, Fraction) else mpmath.nstr(x, 30)


def boundary_term(n: int, beta, F: ForbiddenSet, d: int) -> Fraction:
    r = F.range
    inner = max(n - 2 * r, 0) ** d
    return Fraction(beta) * Fraction(n ** d - inner, n ** d) * F.potential_norm


def block_pressure(n: int, beta, F: ForbiddenSet, d: int | None = None) -> PressureSandwich:
    d = _dimension(F, d)
    beta = Fraction(beta)
    counts = energy_counts(n, F, d)
    size = n ** d
    up = log2_partition(counts, beta, size)
    term = boundary_term(n, beta, F, d)
    if isinstance(up, Fraction):
        low = up - term
    else:
        low = up - _to_mpf(_mp(), term)
    return PressureSandwich(n, beta, low, up, term, size, counts)


def pressure_series(betas: Sequence, n: int, F: ForbiddenSet, oracle: Callable | None = None) -> list[dict]:
    """Rows (beta, lower, upper, oracle) for plotting."""
    counts = None
    d = _dimension(F, None)
    rows = []
    for b in betas:
        b = Fraction(b)
        if counts is None:
            counts = energy_counts(n, F, d)
        up = log2_partition(counts, b, n ** d)
        term = boundary_term(n, b, F, d)
        rows.append({"beta": float(b), "lower": float(up - (term if isinstance(up, Fraction) else float(term))),
                     "upper": float(up), "oracle": float(oracle(b)) if oracle else None})
    return rows


# one-dimensional transfer-matrix oracle

def _transfer_matrix(beta, F: ForbiddenSet):
    shapes = _coded_shapes(F)
    if any(len(s) != 1 for s in shapes):
        raise ValueError("transfer-matrix oracle is one-dimensional")
    q = F.alphabet.size
    L = max((s[0] for s in shapes), default=1)
    k = max(L - 1, 1)
    states = list(itertools.product(range(q), repeat=k))
    index = {s: i for i, s in enumerate(states)}
    M = np.zeros((len(states), len(states)))
    b = float(beta)
    for s in states:
        for a in range(q):
            word = s + (a,)
            e = sum(1 for (ln,), pats in shapes.items() if word[-ln:] in pats)
            M[index[s], index[word[1:]]] = 2.0 ** (-b * e)
    return states, M


def transfer_matrix_pressure(beta, F: ForbiddenSet) -> float:
    """log2 of the spectral radius of the weighted transfer matrix (float oracle)."""
    _, M = _transfer_matrix(beta, F)
    return float(np.log2(max(abs(np.linalg.eigvals(M)))))


class MarkovGibbs:
    """The equilibrium Markov measure of a 1D fault potential (float cylinders).

    Used as an independent stand-in for the Gibbs measure in soundness checks.
    """

    def __init__(self, beta, F: ForbiddenSet):
        states, M = _transfer_matrix(beta, F)
        w, V = np.linalg.eig(M)
        i = int(np.argmax(abs(w)))
        lam = w[i].real
        v = abs(V[:, i].real)
        wl, U = np.linalg.eig(M.T)
        u = abs(U[:, int(np.argmax(abs(wl)))].real)
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.P = M * v[None, :] / (lam * v[:, None])
        pi = u * v
        self.pi = pi / pi.sum()
        self.alphabet = F.alphabet
        self.k = len(states[0])
        self.dimension = 1

    def word_prob(self, word: tuple[int, ...]) -> float:
        k = self.k
        if len(word) < k:
            return sum(self.pi[self.index[word + tail]]
                       for tail in itertools.product(range(self.alphabet.size), repeat=k - len(word)))
        s = self.index[word[:k]]
        p = self.pi[s]
        for a in word[k:]:
            t = self.index[self.states[s][1:] + (a,)]
            p *= self.P[s, t]
            s = t
        return float(p)

    def cylinders(self, n: int) -> dict[tuple[str, ...], float]:
        sym = self.alphabet.symbols
        out = {}
        for w in itertools.product(range(self.alphabet.size), repeat=n):
            p = self.word_prob(w)
            if p > 0:
                out[tuple(sym[a] for a in w)] = p
        return out


# Gibbs block measure and the variational functional

def block_energies(n: int, F: ForbiddenSet, d: int | None = None) -> tuple[list[tuple[str, ...]], np.ndarray]:
    from .lattice import Pattern, count_fault_energy
    d = _dimension(F, d)
    win = Window.cube(n, d)
    if F.alphabet.size ** win.size > 2 ** 16:
        raise IntractableWindow("block too large to list")
    words = list(itertools.product(F.alphabet.symbols, repeat=win.size))
    E = np.array([count_fault_energy(Pattern(win, w, F.alphabet), F) for w in words], dtype=float)
    return words, E


def gibbs_block_weights(energies: np.ndarray, beta) -> np.ndarray:
    w = np.exp2(-float(beta) * (energies - energies.min()))
    return w / w.sum()


def variational_value(weights: np.ndarray, energies: np.ndarray, beta) -> float:
    """H(nu) - beta <E> in bits for a probability vector on the block."""
    p = weights[weights > 0]
    return float(-(p * np.log2(p)).sum() - float(beta) * (weights * energies).sum())


# bound evaluators

def _window_size(window) -> int:
    return window.size if isinstance(window, Window) else int(window)


def ground_probability_threshold(window, eps, alphabet_size: int, alpha=1):
    """beta_0 = log2|A| |I| / (alpha eps); exact Fraction when log2|A| is rational."""
    eps, alpha = Fraction(eps), Fraction(alpha)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if alphabet_size < 1:
        raise ValueError("alphabet size must be positive")
    size = _window_size(window)
    la = log2_number(alphabet_size)
    if isinstance(la, Fraction):
        return la * size / (alpha * eps)
    ctx = _mp()
    return la * size / _to_mpf(ctx, alpha * eps)


def template_correction(ell: int, n: int, Q_size: int, d: int = 1):
    """|Q| (log2(|I_n| + |I_l|) - log2|I_l|) / |I_n|, the finite-n term."""
    ctx = _mp()
    In, Il = ctx.mpf(n) ** d, ctx.mpf(ell) ** d
    return Q_size * (ctx.log(In + Il, 2) - ctx.log(Il, 2)) / In


def template_entropy_bound(ell: int, alphabet_size: int, eps, H_star, d: int = 1,
                           finite: tuple[int, int] | None = None):
    """Per-site entropy bound for marker templates.

    With ``finite=(n, |Q|)`` the eps*1 term is replaced by the exact finite-n correction.
    """
    ctx = _mp()
    e = _to_mpf(ctx, Fraction(eps) if isinstance(eps, (int, Fraction)) else eps)
    if not 0 < e < ctx.mpf(1) / 2:
        raise ValueError("eps must lie in (0, 1/2)")
    hs = _to_mpf(ctx, H_star)
    if hs < 0:
        raise ValueError("H_star must be non-negative")
    la = ctx.log(alphabet_size, 2)
    base = e * la + binary_entropy(e) + hs / ctx.mpf(ell) ** d
    if finite is None:
        return base + e
    n, Q = finite
    return base + template_correction(ell, n, Q, d)


def pressure_upper_from_templates(template_sizes: Sequence[int], energies: Sequence, window_sizes: Sequence[int],
                                  beta):
    if not template_sizes:
        raise ValueError("empty template series")
    if not len(template_sizes) == len(energies) == len(window_sizes):
        raise ValueError("series lengths differ")
    ctx = _mp()
    b = _to_mpf(ctx, Fraction(beta) if not isinstance(beta, float) else beta)
    vals = []
    for R, E, I in zip(template_sizes, energies, window_sizes):
        if R < 1 or I < 1:
            raise ValueError("template sizes and windows must be positive")
        vals.append((ctx.log(R, 2) - b * _to_mpf(ctx, Fraction(E))) / I)
    return min(vals)


@dataclass(frozen=True)
class EquidistributionReport:
    entropy_criterion: bool
    entropy_lhs: object
    entropy_rhs: object
    temperature_window: tuple
    beta_in_window: bool | None
    eps_prime: object
    covering_bound: object
    uniformity_bound: object
    J_side: int

    def as_dict(self) -> dict:
        s = lambda x: _s(x) if x is not None else None
        return {"entropy_criterion": self.entropy_criterion, "entropy_lhs": s(self.entropy_lhs),
                "entropy_rhs": s(self.entropy_rhs),
                "temperature_window": [s(self.temperature_window[0]), s(self.temperature_window[1])],
                "beta_in_window": self.beta_in_window, "eps_prime": s(self.eps_prime),
                "covering_bound": s(self.covering_bound), "uniformity_bound": s(self.uniformity_bound),
                "J_side": self.J_side}


def equidistribution_check(*, kappa, eps, tau, alpha, ell: int, d: int, alphabet_size: int, Q_size: int,
                           log2_ground_count, n: int, r: int, phi_norm, beta=None,
                           eps_prime=None) -> EquidistributionReport:
    """Evaluate both criteria and both conclusions as literal formulas.

    ``eps_prime`` defaults to 1 - (1 - eps)/(1 + tau)^alpha.
    """
    ctx = _mp()
    f = lambda x: _to_mpf(ctx, x) if isinstance(x, (int, Fraction)) else ctx.mpf(x)
    kappa_, eps_, tau_, alpha_ = f(kappa), f(eps), f(tau), f(alpha)
    if eps_prime is None:
        eps_prime = 1 - (1 - eps_) / (1 + tau_) ** alpha_
    ep = f(eps_prime)
    if not (0 < kappa_ < 0.5 and 0 <= ep < 0.5):
        raise ValueError("kappa and eps' must lie below 1/2")
    if eps_ <= 0 or alpha_ <= 0 or tau_ < 0:
        raise ValueError("eps and alpha must be positive, tau non-negative")
    if n < 2 * r:
        raise ValueError("n must be at least 2r")
    m = (2 + Fraction(tau)) * ell - 1 if isinstance(tau, (int, Fraction)) else None
    if m is None or m.denominator != 1:
        raise ValueError("(2 + tau) * ell - 1 must be an integer")
    m = int(m)
    I = ctx.mpf(ell) ** d
    J = ctx.mpf(m) ** d
    In = ctx.mpf(n) ** d
    Inr = ctx.mpf(max(n - 2 * r, 0)) ** d
    la = ctx.log(alphabet_size, 2)
    lq = ctx.log(Q_size, 2)
    lhs = f(log2_ground_count) / In
    rhs = (1 - kappa_) * lq / I
    lo = 2 * la * J / (alpha_ * eps_)
    hi = eps_ / f(phi_norm) * In / (In - Inr) if In > Inr else ctx.inf
    inside = None if beta is None else bool(lo <= f(beta) <= hi)
    unif = (1 - 2 * kappa_) * lq - (eps_ + ep * (1 + la) + binary_entropy(ep)) * I - binary_entropy(kappa_)
    return EquidistributionReport(bool(lhs >= rhs), lhs, rhs, (lo, hi), inside, ep, 1 - ep, unif, m)


# heat-bath sampler

@numba.njit(cache=True)
def _local_energy(x, i, j, sh, sw, off, tbl, q):
    R, C = x.shape
    e = 0
    for k in range(sh.shape[0]):
        h, w = sh[k], sw[k]
        for a in range(h):
            for b in range(w):
                ai, aj = i - a, j - b
                code = 0
                for u in range(h):
                    for v in range(w):
                        code = code * q + x[(ai + u) % R, (aj + v) % C]
                if tbl[off[k] + code]:
                    e += 1
    return e


@numba.njit(cache=True)
def _sweep(x, uni, beta, sh, sw, off, tbl, q):
    R, C = x.shape
    w = np.empty(q)
    es = np.empty(q)
    t = 0
    for i in range(R):
        for j in range(C):
            tot = 0.0
            for a in range(q):
                x[i, j] = a
                es[a] = _local_energy(x, i, j, sh, sw, off, tbl, q)
            m = es.min()
            for a in range(q):
                w[a] = 2.0 ** (-beta * (es[a] - m))
                tot += w[a]
            r = uni[t] * tot
            t += 1
            acc = 0.0
            pick = q - 1
            for a in range(q):
                acc += w[a]
                if r < acc:
                    pick = a
                    break
            x[i, j] = pick


@numba.njit(cache=True)
def _fault_map(x, sh, sw, off, tbl, q):
    """Per-anchor count of forbidden occurrences on the torus."""
    R, C = x.shape
    out = np.zeros((R, C), dtype=np.int64)
    for k in range(sh.shape[0]):
        h, w = sh[k], sw[k]
        for i in range(R):
            for j in range(C):
                code = 0
                for u in range(h):
                    for v in range(w):
                        code = code * q + x[(i + u) % R, (j + v) % C]
                if tbl[off[k] + code]:
                    out[i, j] += 1
    return out


def _tables(F: ForbiddenSet):
    q = F.alphabet.size
    shapes = _coded_shapes(F)
    sh, sw, off, parts = [], [], [], []
    pos = 0
    for shape, pats in sorted(shapes.items()):
        h, w = (1, shape[0]) if len(shape) == 1 else shape
        size = q ** (h * w)
        if size > ROW_SPACE_LIMIT:
            raise IntractableWindow("forbidden shape too large for a lookup table")
        t = np.zeros(size, dtype=np.bool_)
        for cells in pats:
            code = 0
            for c in cells:
                code = code * q + c
            t[code] = True
        sh.append(h), sw.append(w), off.append(pos), parts.append(t)
        pos += size
    tbl = np.concatenate(parts) if parts else np.zeros(1, dtype=np.bool_)
    return (np.array(sh, dtype=np.int64), np.array(sw, dtype=np.int64), np.array(off, dtype=np.int64), tbl)


def _window_clean(faults: list, sh, sw, n: int, d: int) -> np.ndarray:
    """Boolean map: the I_n window anchored here contains no forbidden occurrence fully inside."""
    R, C = faults[0].shape
    bad = np.zeros((R, C), dtype=bool)
    # occurrence at anchor p lies inside the window at a iff 0 <= p - a <= n - shape
    nr = n if d == 2 else 1
    for k in range(len(sh)):
        h, w = int(sh[k]), int(sw[k])
        if h > nr or w > n:
            continue
        occ = faults[k]
        for a in range(nr - h + 1):
            for b in range(n - w + 1):
                bad |= np.roll(np.roll(occ, -a, axis=0), -b, axis=1)
    return ~bad


def uniform_energy_per_site(F: ForbiddenSet):
    """Expected energy per site under the uniform Bernoulli measure (exact)."""
    q = F.alphabet.size
    tot = Fraction(0)
    for shape, pats in F.shapes.items():
        size = 1
        for e in shape:
            size *= e
        tot += Fraction(len(pats), q ** size)
    return tot


@dataclass
class SamplerRun:
    side: int
    beta: Fraction
    seed: int
    final: np.ndarray
    energy_per_site: list[float]
    ground_fraction: list[float]
    marker_coverage: list[float]
    marker_frequencies: list[dict]

    def as_dict(self) -> dict:
        return {"side": self.side, "beta": str(self.beta), "seed": self.seed,
                "energy_per_site": self.energy_per_site, "ground_fraction": self.ground_fraction,
                "marker_coverage": self.marker_coverage,
                "marker_frequencies": [{"".join(k): v for k, v in f.items()} for f in self.marker_frequencies]}


MAX_SITES = 2 ** 16


def gibbs_sample_torus(side: int, beta, F: ForbiddenSet, sweeps: int, seed: int, ground_n: int = 2,
                       markers: Sequence[tuple[str, ...]] | None = None, marker_ell: int | None = None,
                       d: int | None = None) -> SamplerRun:
    """Heat-bath single-site dynamics on the torus of the given side, raster-scan order.

    Statistics are recorded after every sweep. Markers are patterns on I_ell given as flat
    tuples of symbols; coverage is the fraction of sites covered by some marker occurrence.
    """
    d = _dimension(F, d)
    R, C = (1, side) if d == 1 else (side, side)
    if R * C > MAX_SITES:
        raise ValueError(f"torus has more than {MAX_SITES} sites")
    q = F.alphabet.size
    sh, sw, off, tbl = _tables(F)
    rng = np.random.default_rng(seed)
    x = rng.integers(0, q, size=(R, C)).astype(np.int64)
    b = float(beta)
    mset = None
    if markers:
        ell = marker_ell or int(round(len(markers[0]) ** (1 / d)))
        idx = F.alphabet.index
        mset = {tuple(idx(c) for c in m): m for m in markers}
    es, gf, cov, freqs = [], [], [], []
    for _ in range(sweeps):
        _sweep(x, rng.random(R * C), b, sh, sw, off, tbl, q)
        per_shape = []
        for k in range(len(sh)):
            one = (sh[k:k + 1], sw[k:k + 1], np.zeros(1, dtype=np.int64), tbl[off[k]:off[k] + q ** int(sh[k] * sw[k])])
            per_shape.append(_fault_map(x, *one, q) > 0)
        total = sum(int(m.sum()) for m in per_shape)
        es.append(total / (R * C))
        clean = _window_clean(per_shape, sh, sw, ground_n, d)
        gf.append(float(clean.mean()))
        if mset is not None:
            c, f = _marker_stats(x, mset, ell, d)
            cov.append(c)
            freqs.append(f)
    return SamplerRun(side, Fraction(beta), seed, x if d == 2 else x[0].copy(), es, gf, cov, freqs)


def _marker_stats(x: np.ndarray, mset: dict, ell: int, d: int):
    R, C = x.shape
    covered = np.zeros((R, C), dtype=bool)
    counts: dict = {}
    rows = range(R) if d == 2 else range(1)
    h = ell if d == 2 else 1
    for i in rows:
        for j in range(C):
            key = tuple(int(x[(i + u) % R, (j + v) % C]) for u in range(h) for v in range(ell))
            if key in mset:
                counts[mset[key]] = counts.get(mset[key], 0) + 1
                for u in range(h):
                    for v in range(ell):
                        covered[(i + u) % R, (j + v) % C] = True
    tot = sum(counts.values())
    return float(covered.mean()), {k: v / tot for k, v in counts.items()} if tot else {}


# ball-emptiness certifier

@dataclass(frozen=True)
class Certificate:
    verdict: str
    n: int | None = None
    margins: tuple = ()
    reason: str = ""
    work: int = 0

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "n": self.n, "reason": self.reason, "work": self.work,
                "margins": [{"beta_lo": str(a), "beta_hi": str(b), "gap": float(g)} for a, b, g in self.margins]}


def _audenaert_slack(tv: float, K: int) -> float:
    """Largest entropy gain (bits) within total-variation distance tv on K outcomes."""
    if tv <= 0:
        return 0.0
    if tv >= 1 - 1 / K:
        return math.log2(K)
    return tv * math.log2(K - 1) + float(binary_entropy(Fraction(tv).limit_denominator(10 ** 12)))


def certify_ball_empty(center, radius, beta_range, n_max: int, budget: int, F: ForbiddenSet,
                       pressure_n: int | None = None, max_splits: int = 8) -> Certificate:
    """Try to certify that no equilibrium measure for beta in ``beta_range`` lies in the closed d*-ball.

    For a shift-invariant mu in the ball, the I_n marginal is within L1 distance 2^(n+1) r
    of the centre's, so its block entropy and energy move by explicit amounts: the entropy by
    the continuity bound in total variation, the energy by ||phi|| times the total variation.
    The verdict is Empty when h_n(mu) - beta mu(phi) stays below the certified lower pressure
    bound on every piece of a subdivision of the beta range. The pressure is non-increasing in
    beta, which lets each piece be checked with its two endpoints.
    """
    if budget <= 0:
        return Certificate("Unknown", reason="budget exhausted")
    radius = Fraction(radius)
    b_lo, b_hi = (Fraction(b) for b in beta_range)
    if b_lo > b_hi or b_lo < 0:
        raise ValueError("bad beta range")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    d = _dimension(F, None)
    q = F.alphabet.size
    L = max((max(s) for s in F.shapes), default=1)
    pn = pressure_n or max(2 * F.range + 2, 8)
    work = 0
    counts = energy_counts(pn, F, d)
    cache: dict = {}

    def p_lower(beta: Fraction) -> float:
        if beta not in cache:
            up = log2_partition(counts, beta, pn ** d)
            cache[beta] = float(up) - float(boundary_term(pn, beta, F, d)) - 1e-12
        return cache[beta]

    for n in range(max(L, 1), n_max + 1):
        cyl = center.cylinders(n)
        K = q ** (n ** d)
        tv = min(1.0, float(radius * 2 ** (n + 1) / 2))
        probs = [float(v) for v in cyl.values() if v > 0]
        H = -sum(p * math.log2(p) for p in probs)
        h_up = min(H + _audenaert_slack(tv, K), math.log2(K)) / n ** d + 1e-12
        e_c = float(_energy_at_origin(cyl, F, n, d))
        e_min = max(0.0, e_c - F.potential_norm * tv) - 1e-12
        if e_min <= 0 and h_up >= math.log2(q):
            continue  # the ball reaches the maximal-entropy measure at this level
        pieces = [(b_lo, b_hi)]
        margins = []
        ok = True
        splits = 0
        while pieces:
            work += 1
            if work > budget:
                return Certificate("Unknown", reason="budget exhausted", work=work)
            a, b = pieces.pop()
            gap = p_lower(b) - (h_up - float(a) * e_min)
            if gap > 0:
                margins.append((a, b, gap))
                continue
            if b - a == 0 or splits >= 2 ** max_splits:
                ok = False
                break
            mid = (a + b) / 2
            pieces += [(a, mid), (mid, b)]
            splits += 1
        if ok:
            return Certificate("Empty", n, tuple(sorted(margins)), "gap certified", work)
    return Certificate("Unknown", reason="no level certified", work=work)


def _energy_at_origin(cyl: dict, F: ForbiddenSet, n: int, d: int) -> Fraction:
    """Expected number of forbidden occurrences anchored at the origin, from I_n marginals."""
    tot = Fraction(0) if all(isinstance(v, Fraction) for v in cyl.values()) else 0.0
    for shape, pats in F.shapes.items():
        for cells, p in cyl.items():
            if d == 1:
                block = tuple(cells[:shape[0]])
            else:
                h, w = shape
                block = tuple(cells[r * n + c] for r in range(h) for c in range(w))
            if block in pats:
                tot += p
    return tot


# convex interval evaluator

def convex_eval_interval(g: Callable, s, t, precision=None) -> tuple[Fraction, Fraction]:
    """Enclosure [m, M] of psi([s, t]) for convex psi, from an oracle g(x, eps) with |g - psi| < eps.

    Three chords are used: a raised chord through s and t bounds psi from above, and two
    lowered outer chords through r = s - rho, s and t, u = t + rho bound it from below.
    """
    s, t = Fraction(s), Fraction(t)
    if not s < t:
        raise ValueError("need s < t")
    rho = (t - s) / 2
    eps = Fraction(precision) if precision is not None else rho
    r, u = s - rho, t + rho
    try:
        gr, gs, gt, gu = (Fraction(g(x, eps)) for x in (r, s, t, u))
    except Exception as exc:
        raise RuntimeError(f"oracle failure: {exc}") from exc
    M = max(gs, gt) + eps
    # lower chords: through (r, gr + eps), (s, gs - eps) and through (t, gt - eps), (u, gu + eps)
    k1 = (gs - eps - (gr + eps)) / rho
    k2 = (gu + eps - (gt - eps)) / rho
    line1 = lambda x: gs - eps + k1 * (x - s)
    line2 = lambda x: gt - eps + k2 * (x - t)
    cands = [max(line1(s), line2(s)), max(line1(t), line2(t))]
    if k1 != k2:
        x = (gt - eps - k2 * t - gs + eps + k1 * s) / (k1 - k2)
        if s <= x <= t:
            cands.append(line1(x))
    return min(cands), M


def mpf_to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


def pressure_oracle(n: int, F: ForbiddenSet) -> Callable:
    """g(beta, eps) returning the upper block pressure at fixed n as a rational (error far below eps)."""
    d = _dimension(F, None)
    counts = energy_counts(n, F, d)

    def g(beta, eps):
        return mpf_to_fraction(log2_partition(counts, Fraction(beta), n ** d))
    return g
