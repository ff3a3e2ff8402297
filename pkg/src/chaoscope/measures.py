"""Dyadic measures on {+,-} words, their weak-* distance, and accumulation paths in finite metric spaces.

A :class:`DyadicWordMeasure` of depth k puts mass ``weights[i] / 2**k`` on the Dirac measure of the
infinite word ``w_i`` followed by ``+`` forever, where ``w_i`` is the i-th word of length ``length``
in lexicographic order with ``+`` first.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

from .hierarchy import all_words, b_read
from .lattice import DStar, weak_star_distance


def word_index(word: str) -> int:
    idx = 0
    for c in word:
        if c not in "+-":
            raise ValueError(f"bad letter {c!r}")
        idx = 2 * idx + (c == "-")
    return idx


def index_word(i: int, length: int) -> str:
    return "".join("-" if (i >> (length - 1 - p)) & 1 else "+" for p in range(length))


@dataclass(frozen=True)
class DyadicWordMeasure:
    k: int
    weights: tuple[int, ...]
    length: int | None = None

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("depth must be nonnegative")
        L = b_read(self.k) if self.length is None else int(self.length)
        w = tuple(int(x) for x in self.weights)
        if L < 0 or len(w) != 2 ** L:
            raise ValueError(f"need {2 ** max(L, 0)} weights for word length {L}, got {len(w)}")
        if any(x < 0 for x in w) or sum(w) != 2 ** self.k:
            raise ValueError(f"weights must be nonnegative and sum to 2^{self.k}")
        object.__setattr__(self, "length", L)
        object.__setattr__(self, "weights", w)

    # constructors

    @classmethod
    def dirac(cls, word: str, k: int = 0) -> "DyadicWordMeasure":
        w = [0] * 2 ** len(word)
        w[word_index(word)] = 2 ** k
        return cls(k, tuple(w), len(word))

    @classmethod
    def uniform(cls, k: int, length: int | None = None) -> "DyadicWordMeasure":
        L = b_read(k) if length is None else length
        if L > k:
            raise ValueError("uniform weights are not dyadic at this depth")
        return cls(k, (2 ** (k - L),) * 2 ** L, L)

    @classmethod
    def from_probs(cls, probs: dict[str, Fraction], k: int | None = None) -> "DyadicWordMeasure":
        """From a {word: probability} map with dyadic probabilities; ``k`` defaults to the smallest that works."""
        L = {len(w) for w in probs}
        if len(L) != 1:
            raise ValueError("words of mixed length")
        (L,) = L
        den = max((Fraction(p).denominator for p in probs.values()), default=1)
        kk = den.bit_length() - 1
        if den != 2 ** kk:
            raise ValueError("probabilities are not dyadic")
        k = kk if k is None else k
        w = [0] * 2 ** L
        for word, p in probs.items():
            x = Fraction(p) * 2 ** k
            if x.denominator != 1:
                raise ValueError("depth too small for these probabilities")
            w[word_index(word)] += int(x)
        return cls(k, tuple(w), L)

    # views

    def words(self) -> list[tuple[str, Fraction]]:
        return [(index_word(i, self.length), Fraction(x, 2 ** self.k)) for i, x in enumerate(self.weights) if x]

    def prob(self, word: str) -> Fraction:
        if len(word) != self.length:
            raise ValueError("word length mismatch")
        return Fraction(self.weights[word_index(word)], 2 ** self.k)

    @property
    def dimension(self) -> int:
        return 1

    def cylinders(self, n: int) -> dict[tuple[str, ...], Fraction]:
        out: dict[tuple[str, ...], Fraction] = {}
        for word, p in self.words():
            key = tuple((word + "+" * n)[:n])
            out[key] = out.get(key, Fraction(0)) + p
        return out

    # depth changes

    def lift(self, k2: int, length: int | None = None) -> "DyadicWordMeasure":
        """Same measure at depth ``k2`` >= k with words padded by + to ``length``."""
        L2 = max(self.length, b_read(k2)) if length is None else length
        if k2 < self.k or L2 < self.length:
            raise ValueError("lift goes to a larger depth and word length")
        pad = L2 - self.length
        w = [0] * 2 ** L2
        for i, x in enumerate(self.weights):
            w[i << pad] = x << (k2 - self.k)
        return DyadicWordMeasure(k2, tuple(w), L2)

    def project(self, k2: int, length: int | None = None) -> "DyadicWordMeasure":
        """Nearest measure at depth ``k2`` <= k: prefix marginal, then largest-remainder rounding."""
        L2 = min(self.length, b_read(k2)) if length is None else length
        if k2 > self.k or L2 > self.length:
            raise ValueError("project goes to a smaller depth and word length")
        cut = self.length - L2
        marg = [0] * 2 ** L2
        for i, x in enumerate(self.weights):
            marg[i >> cut] += x
        q = 2 ** (self.k - k2)
        base = [x // q for x in marg]
        short = 2 ** k2 - sum(base)
        order = sorted(range(len(marg)), key=lambda i: (-(marg[i] % q), i))
        for i in order[:short]:
            base[i] += 1
        return DyadicWordMeasure(k2, tuple(base), L2)

    def mix(self, other: "DyadicWordMeasure", t: Fraction) -> "DyadicWordMeasure":
        """t * self + (1 - t) * other for dyadic t in [0, 1]."""
        t = Fraction(t)
        if not 0 <= t <= 1:
            raise ValueError("t must lie in [0, 1]")
        e = t.denominator.bit_length() - 1
        if t.denominator != 2 ** e:
            raise ValueError("t must be dyadic")
        L = max(self.length, other.length)
        k = max(self.k, other.k)
        a, b = self.lift(k, L), other.lift(k, L)
        num = t.numerator
        w = tuple(num * x + (2 ** e - num) * y for x, y in zip(a.weights, b.weights))
        return DyadicWordMeasure(k + e, w, L)

    def same_measure(self, other: "DyadicWordMeasure") -> bool:
        return dict(self.words_padded()) == dict(other.words_padded())

    def words_padded(self) -> list[tuple[str, Fraction]]:
        """Words with trailing + stripped, so equal measures give equal lists."""
        acc: dict[str, Fraction] = {}
        for w, p in self.words():
            key = w.rstrip("+")
            acc[key] = acc.get(key, Fraction(0)) + p
        return sorted(acc.items())

    def to_json(self) -> dict:
        return {"k": self.k, "length": self.length, "weights": list(self.weights)}

    @classmethod
    def from_json(cls, obj) -> "DyadicWordMeasure":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["k"]), tuple(obj["weights"]), obj.get("length"))


def dyadic_elements(k: int, length: int | None = None) -> list[DyadicWordMeasure]:
    """Every depth-k measure on words of the given length (default b_read(k))."""
    L = b_read(k) if length is None else length
    m = 2 ** L
    total = 2 ** k
    out = []
    # compositions of total into m parts
    for bars in itertools.combinations(range(total + m - 1), m - 1):
        prev = -1
        w = []
        for b in bars:
            w.append(b - prev - 1)
            prev = b
        w.append(total + m - 2 - prev)
        out.append(DyadicWordMeasure(k, tuple(w), L))
    return out


def dstar_words(mu: DyadicWordMeasure, nu: DyadicWordMeasure, depth: int) -> DStar:
    return weak_star_distance(mu, nu, depth)


def dstar_brute(mu: DyadicWordMeasure, nu: DyadicWordMeasure, depth: int) -> Fraction:
    """Reference computation summing over all 2^n cylinders at each level."""
    total = Fraction(0)
    for n in range(1, depth + 1):
        dn = Fraction(0)
        for cyl in itertools.product("+-", repeat=n):
            pm = sum((p for w, p in mu.words() if (w + "+" * n)[:n] == "".join(cyl)), Fraction(0))
            pn = sum((p for w, p in nu.words() if (w + "+" * n)[:n] == "".join(cyl)), Fraction(0))
            dn += abs(pm - pn)
        total += dn / 2 ** (n + 1)
    return total


# finite metric spaces

class FiniteMetricSpace:
    """Explicit points with rational distances and nested nets; checked on construction.

    ``nets(i)`` gives the indices of the scale-i net (every point within 1/i of it). Scales beyond
    ``max_scale`` use the whole space.
    """

    def __init__(self, points: Sequence[Hashable], dist: Callable[[object, object], Fraction] | Sequence[Sequence],
                 nets: Callable[[int], Iterable[int]] | None = None, max_scale: int = 64, check: bool = True):
        self.points = list(points)
        n = len(self.points)
        if callable(dist):
            self.d = [[Fraction(dist(a, b)) for b in self.points] for a in self.points]
        else:
            self.d = [[Fraction(x) for x in row] for row in dist]
        self.max_scale = max_scale
        self._net_fn = nets
        self._nets: dict[int, tuple[int, ...]] = {}
        if check:
            self.check_axioms()
            self.check_nets(max_scale)
        self.n = n

    def net(self, i: int) -> tuple[int, ...]:
        if i not in self._nets:
            if self._net_fn is None or i > self.max_scale:
                self._nets[i] = tuple(range(len(self.points)))
            else:
                self._nets[i] = tuple(sorted(set(self._net_fn(i))))
        return self._nets[i]

    def check_axioms(self):
        d = self.d
        n = len(d)
        for a in range(n):
            if d[a][a] != 0:
                raise ValueError("d(x, x) != 0")
            for b in range(n):
                if d[a][b] != d[b][a]:
                    raise ValueError("distance not symmetric")
                if a != b and d[a][b] <= 0:
                    raise ValueError("distinct points at distance 0")
        for a in range(n):
            da = d[a]
            for b in range(n):
                dab = da[b]
                db = d[b]
                for c in range(n):
                    if da[c] > dab + db[c]:
                        raise ValueError("triangle inequality fails")

    def check_nets(self, upto: int):
        prev: set[int] = set()
        for i in range(1, upto + 1):
            cur = set(self.net(i))
            if not prev <= cur:
                raise ValueError(f"net {i - 1} not contained in net {i}")
            r = Fraction(1, i)
            for a in range(len(self.points)):
                if not any(self.d[a][b] <= r for b in cur):
                    raise ValueError(f"net {i} does not cover point {self.points[a]!r} within 1/{i}")
            prev = cur


class Pi2Predicate:
    """Oracle f(x, k, n, t) in {0, 1}; x within 1/k of K iff for all n some t gives 1."""

    def __init__(self, f: Callable[[object, int, int, int], int], name: str = "predicate"):
        self.f = f
        self.name = name

    def __call__(self, x, k, n, t) -> int:
        return 1 if self.f(x, k, n, t) else 0


def dyadic_grid_instance(m: int = 6, lo: Fraction = Fraction(1, 4), hi: Fraction = Fraction(3, 4)):
    """Points j/2^m of [0, 1], nets of spacing 2^-e with 2^-e < 2/i, and K = [lo, hi]."""
    pts = [Fraction(j, 2 ** m) for j in range(2 ** m + 1)]

    def net(i):
        e = 0
        while Fraction(1, 2 ** e) >= Fraction(2, i):
            e += 1
        e = min(e, m)
        step = 2 ** (m - e)
        return range(0, len(pts), step)

    space = FiniteMetricSpace(pts, lambda a, b: abs(a - b), net, max_scale=2 ** (m + 1))

    def dK(x):
        return max(Fraction(0), lo - x, x - hi)

    pred = Pi2Predicate(lambda x, k, n, t: t >= n and dK(x) < Fraction(1, k) + Fraction(1, n),
                        name=f"grid[{lo},{hi}]")
    return space, pred, dK


@dataclass
class LinkEvent:
    T: int
    scale: int | None
    j: int | None
    bound: Fraction | None
    max_step: Fraction
    targets: list[int]
    emitted: list[int]

    def as_dict(self) -> dict:
        return {"T": self.T, "scale": self.scale, "j": self.j,
                "bound": None if self.bound is None else str(self.bound),
                "max_step": str(self.max_step), "targets": self.targets, "emitted": self.emitted}


@dataclass
class AccumulationPath:
    points: list[int]
    events: list[LinkEvent]
    stationary: dict[int, int]
    W: dict[int, tuple[int, ...]]
    diagnostics: list[str] = field(default_factory=list)

    def visits(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for p in self.points:
            out[p] = out.get(p, 0) + 1
        return out

    def certificates_ok(self) -> bool:
        """Every linking event respects its 2/scale bound; bounds shrink as scales grow."""
        linked = [e for e in self.events if e.scale is not None]
        for e in linked:
            if e.bound != Fraction(2, e.scale) or not e.max_step < e.bound:
                return False
        by_scale = sorted({(e.scale, e.bound) for e in linked})
        return all(a[1] >= b[1] for a, b in zip(by_scale, by_scale[1:]))

    def to_json(self, space: FiniteMetricSpace | None = None) -> str:
        pts = self.points if space is None else [str(space.points[i]) for i in self.points]
        return json.dumps({"points": pts, "events": [e.as_dict() for e in self.events],
                           "stationary": self.stationary,
                           "W": {str(k): list(v) for k, v in self.W.items()},
                           "diagnostics": self.diagnostics})


class _PathState:
    """Tuple sets V_k^T as constraint problems: x_i in the scale-i net, pairwise d < 2/min(i, j),
    and each x_i passing the first k rows of the predicate by time T."""

    def __init__(self, space: FiniteMetricSpace, pred: Pi2Predicate, horizon: int):
        self.space = space
        self.pred = pred
        self.H = horizon
        n = len(space.points)
        self._masks: dict[int, list[int]] = {}
        self._pass: dict[tuple[int, int, int], int | None] = {}
        self.diagnostics: list[str] = []
        self._nets = {i: space.net(i) for i in range(1, horizon + 2)}
        self._netmask = {i: sum(1 << a for a in v) for i, v in self._nets.items()}
        self._n = n
        self._proj_cache: dict[tuple, list[int]] = {}

    def mask(self, s: int) -> list[int]:
        """mask(s)[a]: points within (strictly) 2/s of a."""
        if s not in self._masks:
            r = Fraction(2, s)
            d = self.space.d
            self._masks[s] = [sum(1 << b for b in range(self._n) if d[a][b] < r) for a in range(self._n)]
        return self._masks[s]

    def pass_time(self, a: int, i: int, n: int) -> int | None:
        key = (a, i, n)
        if key not in self._pass:
            x = self.space.points[a]
            first = None
            for t in range(self.H + 1):
                v = self.pred(x, i, n, t)
                if v and first is None:
                    first = t
                elif not v and first is not None:
                    self.diagnostics.append(f"not monotone in t at x={x}, k={i}, n={n}, t={t}")
                    break
            self._pass[key] = first
        return self._pass[key]

    def ready(self, a: int, i: int, k: int) -> int | None:
        """Earliest T with x_a passing rows n = 1..k at scale i."""
        worst = 0
        for n in range(1, k + 1):
            p = self.pass_time(a, i, n)
            if p is None:
                return None
            worst = max(worst, p)
        return worst

    def domain(self, i: int, k: int, T: int) -> int:
        m = 0
        for a in self._nets[i]:
            r = self.ready(a, i, k)
            if r is not None and r <= T:
                m |= 1 << a
        return m

    def project(self, doms: list[int]) -> list[int]:
        """Supported values per position of the constraint problem with these domains."""
        key = tuple(doms)
        if key in self._proj_cache:
            return self._proj_cache[key]
        k = len(doms)
        doms = list(doms)
        if not self._ac3(doms):
            res = [0] * k
            self._proj_cache[key] = res
            return res
        support = [0] * k
        for p in range(k):
            rest = doms[p] & ~support[p]
            while rest:
                a = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                trial = list(doms)
                trial[p] = 1 << a
                sol = self._solve(trial)
                if sol is None:
                    continue
                for q, v in enumerate(sol):
                    support[q] |= 1 << v
                rest &= ~support[p]
        self._proj_cache[key] = support
        return support

    def _ac3(self, doms: list[int]) -> bool:
        k = len(doms)
        changed = True
        while changed:
            changed = False
            for i in range(k):
                di = doms[i]
                new = 0
                bits = di
                while bits:
                    a = (bits & -bits).bit_length() - 1
                    bits &= bits - 1
                    ok = True
                    for j in range(k):
                        if j != i and not (self.mask(min(i, j) + 1)[a] & doms[j]):
                            ok = False
                            break
                    if ok:
                        new |= 1 << a
                if new != di:
                    doms[i] = new
                    changed = True
                    if not new:
                        return False
        return True

    def _solve(self, doms: list[int]) -> list[int] | None:
        k = len(doms)
        order = sorted(range(k), key=lambda i: bin(doms[i]).count("1"))
        vals = [0] * k

        def rec(pos, cur):
            if pos == k:
                return True
            i = order[pos]
            bits = cur[i]
            while bits:
                a = (bits & -bits).bit_length() - 1
                bits &= bits - 1
                nxt = list(cur)
                nxt[i] = 1 << a
                ok = True
                for q in order[pos + 1:]:
                    nxt[q] &= self.mask(min(i, q) + 1)[a]
                    if not nxt[q]:
                        ok = False
                        break
                if ok:
                    vals[i] = a
                    if rec(pos + 1, nxt):
                        return True
            return False

        return vals if rec(0, list(doms)) else None


def _bits(m: int) -> list[int]:
    out = []
    while m:
        a = (m & -m).bit_length() - 1
        out.append(a)
        m &= m - 1
    return out


def pi2_accumulation_path(space: FiniteMetricSpace, pred: Pi2Predicate, horizon: int) -> AccumulationPath:
    """Sequence of point indices whose accumulation set is the set described by ``pred``.

    For T = 1..horizon: collect U_T, the last coordinates of tuples that became valid at time T,
    then walk through them. The walk uses the largest scale i for which some projection
    pi_i(V_j^T), j in [i, T], together with U_T and the current point is connected under steps
    shorter than 2/i; consecutive targets are joined by shortest paths in that graph.
    """
    st = _PathState(space, pred, horizon)
    d = space.d
    out: list[int] = []
    events: list[LinkEvent] = []
    last_change: dict[int, int] = {}
    prev_dom: dict[int, list[int]] = {}

    for T in range(1, horizon + 1):
        U: list[int] = []
        for k in range(1, T + 1):
            doms = [st.domain(i, k, T) for i in range(1, k + 1)]
            old = prev_dom.get(k, [0] * k)
            prev_dom[k] = doms
            new = [a & ~b for a, b in zip(doms, old)]
            if not any(new):
                continue
            got = 0
            for i in range(k):
                if not new[i]:
                    continue
                trial = list(doms)
                trial[i] = new[i]
                got |= st.project(trial)[k - 1]
            if got:
                last_change[k] = T
                U.extend(_bits(got))
        if not U:
            continue
        start = out[-1] if out else None
        chosen = None
        for i in range(T, 0, -1):
            for j in range(i, T + 1):
                doms = [st.domain(q, j, T) for q in range(1, j + 1)]
                nodes = set(_bits(st.project(doms)[i - 1])) | set(U)
                if start is not None:
                    nodes.add(start)
                if _connected(nodes, d, Fraction(2, i)):
                    chosen = (i, j, nodes)
                    break
            if chosen:
                break
        emitted: list[int] = []
        if chosen is None:
            emitted = list(U)
            ev = LinkEvent(T, None, None, None, Fraction(0), list(U), emitted)
        else:
            i, j, nodes = chosen
            bound = Fraction(2, i)
            cur = start
            for u in U:
                if cur is None:
                    emitted.append(u)
                else:
                    emitted.extend(_shortest(cur, u, nodes, d, bound))
                cur = u
            ev = LinkEvent(T, i, j, bound, Fraction(0), list(U), emitted)
        seq = ([start] if start is not None else []) + emitted
        ev.max_step = max((d[a][b] for a, b in zip(seq, seq[1:])), default=Fraction(0))
        if ev.scale is not None and not ev.max_step < ev.bound:
            st.diagnostics.append(f"step bound violated at T={T}")
        events.append(ev)
        out.extend(emitted)

    W = {}
    for k in range(1, horizon + 1):
        doms = [st.domain(i, k, horizon) for i in range(1, k + 1)]
        W[k] = tuple(_bits(st.project(doms)[k - 1]))
    # the horizon-limited test at scale k should imply the one at scale k - 1
    for k in range(2, horizon + 1):
        for a in space.net(k):
            r = st.ready(a, k, horizon)
            if r is not None and st.ready(a, k - 1, horizon) is None:
                st.diagnostics.append(f"scale {k} accepts {space.points[a]} but scale {k - 1} rejects it")
    return AccumulationPath(out, events, last_change, W, st.diagnostics)


def _connected(nodes: set[int], d, bound: Fraction) -> bool:
    if not nodes:
        return True
    todo = [next(iter(nodes))]
    seen = {todo[0]}
    while todo:
        a = todo.pop()
        for b in nodes:
            if b not in seen and d[a][b] < bound:
                seen.add(b)
                todo.append(b)
    return len(seen) == len(nodes)


def _shortest(a: int, b: int, nodes: set[int], d, bound: Fraction) -> list[int]:
    """Hop-shortest path from a to b (excluding a, including b)."""
    if a == b:
        return [b]
    prev = {a: None}
    q = deque([a])
    order = sorted(nodes)
    while q:
        x = q.popleft()
        if x == b:
            break
        for y in order:
            if y not in prev and d[x][y] < bound:
                prev[y] = x
                q.append(y)
    path = []
    x = b
    while x != a:
        path.append(x)
        x = prev[x]
    return path[::-1]


# accumulation estimates

def hausdorff(A: Sequence, B: Sequence, depth: int = 4) -> Fraction:
    def dd(x, y):
        return weak_star_distance(x, y, depth).value
    ab = max((min(dd(a, b) for b in B) for a in A), default=Fraction(0))
    ba = max((min(dd(a, b) for a in A) for b in B), default=Fraction(0))
    return max(ab, ba)


def acc_estimate(prefix: Sequence, tolerance: Fraction, depth: int = 4, burn_in: Fraction = Fraction(1, 2),
                 min_count: int = 2) -> list:
    """Estimate of the accumulation set from a finite prefix (not the true set).

    The first ``burn_in`` fraction is dropped; the rest is clustered greedily within ``tolerance``
    in truncated d*, and representatives of clusters with at least ``min_count`` members are kept.
    """
    if len(prefix) < 10:
        raise ValueError("need a prefix of length at least 10")
    tail = list(prefix[int(len(prefix) * Fraction(burn_in)):])
    tol = Fraction(tolerance)
    reps: list = []
    counts: list[int] = []
    memo: dict = {}

    def dd(x, y):
        key = (id(x), id(y))
        if key not in memo:
            memo[key] = weak_star_distance(x, y, depth).value
        return memo[key]

    for x in tail:
        for r_i, r in enumerate(reps):
            if dd(x, r) <= tol:
                counts[r_i] += 1
                break
        else:
            reps.append(x)
            counts.append(1)
    return [r for r, c in zip(reps, counts) if c >= min_count]


def segment_samples(steps: int = 16, length: int = 4) -> list[DyadicWordMeasure]:
    """t * delta_{-...} + (1 - t) * delta_{+...} for t = i/steps (steps a power of two)."""
    k = steps.bit_length() - 1
    out = []
    for i in range(steps + 1):
        w = [0] * 2 ** length
        w[0] = steps - i
        w[-1] += i
        out.append(DyadicWordMeasure(k, tuple(w), length))
    return out


# encoding measures as mixtures of periodic tilings

@dataclass(frozen=True)
class MixturePoint:
    """Finite convex combination of periodic points; cylinders are the weighted sums."""

    components: tuple[tuple[Fraction, object], ...]

    @property
    def dimension(self) -> int:
        return self.components[0][1].dimension

    def cylinders(self, n: int) -> dict[tuple[str, ...], Fraction]:
        out: dict[tuple[str, ...], Fraction] = {}
        for w, p in self.components:
            for k, v in _cyl(p, n).items():
                out[k] = out.get(k, Fraction(0)) + w * v
        return out


_CYL_CACHE: dict[tuple[int, int], dict] = {}


def _cyl(p, n: int) -> dict:
    key = (id(p), n)
    if key not in _CYL_CACHE:
        _CYL_CACHE[key] = (p, p.cylinders(n))
    return _CYL_CACHE[key][1]


GAMMA_LENGTHS = (1, 3)


def gamma_encode(mu: DyadicWordMeasure) -> MixturePoint:
    """Each word w of the measure goes to the periodic all-F tiling whose Red lines carry w."""
    from .robinson import signal_periodic_point
    if mu.length not in GAMMA_LENGTHS:
        raise ValueError(f"word length must be one of {GAMMA_LENGTHS} (macro side at most 127)")
    return MixturePoint(tuple((p, signal_periodic_point(w)) for w, p in mu.words()))


def gamma_inverse(point, precision: Fraction = Fraction(1, 2), length: int = 1, depth: int = 2,
                  max_candidates: int = 50_000) -> DyadicWordMeasure:
    """Approximate d*-minimiser of ``point`` over the depth-k measures, 2^-k <= precision."""
    precision = Fraction(precision)
    if precision < Fraction(1, 256):
        raise ValueError("precision must be at least 2^-8")
    k = 0
    while Fraction(1, 2 ** k) > precision:
        k += 1
    from math import comb
    if comb(2 ** k + 2 ** length - 1, 2 ** length - 1) > max_candidates:
        raise ValueError("candidate net too large for this precision and word length")
    best = None
    for cand in dyadic_elements(k, length):
        d = weak_star_distance(point, gamma_encode(cand), depth).value
        if best is None or d < best[0]:
            best = (d, cand)
    return best[1]
