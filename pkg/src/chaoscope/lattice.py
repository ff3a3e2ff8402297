"""Patterns, fault interactions, ground patterns, marker sets and the weak-* metric.

Everything here is exact: probabilities and distances are ``Fraction`` values.
Only dimensions 1 and 2 are supported.
"""
from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence


class BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in alphabet")
        if not self.symbols:
            raise ValueError("empty alphabet")
        object.__setattr__(self, "_pos", {c: i for i, c in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, s: str) -> int:
        return self._pos[s]  # type: ignore[attr-defined]

    def __contains__(self, s) -> bool:
        return s in self._pos  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.symbols)


def binary() -> Alphabet:
    return Alphabet(("0", "1"))


@dataclass(frozen=True)
class Window:
    """Rectangular window anchored at the origin; ``extents`` is (n,) or (rows, cols)."""

    extents: tuple[int, ...]

    def __post_init__(self):
        ext = tuple(int(e) for e in self.extents)
        if len(ext) not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if any(e <= 0 for e in ext):
            raise ValueError("window extents must be positive")
        object.__setattr__(self, "extents", ext)

    @classmethod
    def cube(cls, n: int, d: int = 1) -> "Window":
        return cls((n,) * d)

    @property
    def dimension(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        s = 1
        for e in self.extents:
            s *= e
        return s

    @property
    def diameter(self) -> int:
        return max(self.extents) - 1

    def cells(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(e) for e in self.extents))

    def offsets_inside(self, inner: "Window") -> Iterator[tuple[int, ...]]:
        """Translations k with k + inner contained in self."""
        if inner.dimension != self.dimension:
            return iter(())
        return itertools.product(*(range(a - b + 1) for a, b in zip(self.extents, inner.extents)))


@dataclass(frozen=True)
class Pattern:
    window: Window
    cells: tuple[str, ...]
    alphabet: Alphabet

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(str(c) for c in self.cells))
        if len(self.cells) != self.window.size:
            raise ValueError("cell count does not match window size")
        for c in self.cells:
            if c not in self.alphabet:
                raise ValueError(f"symbol {c!r} not in alphabet")

    @classmethod
    def from_string(cls, s: str, alphabet: Alphabet | None = None) -> "Pattern":
        """1D pattern from a string of single-character symbols."""
        alphabet = alphabet or binary()
        return cls(Window((len(s),)), tuple(s), alphabet)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[str]], alphabet: Alphabet) -> "Pattern":
        h, w = len(rows), len(rows[0])
        if any(len(r) != w for r in rows):
            raise ValueError("ragged rows")
        return cls(Window((h, w)), tuple(c for r in rows for c in r), alphabet)

    @property
    def dimension(self) -> int:
        return self.window.dimension

    def at(self, pos: tuple[int, ...]) -> str:
        return self.cells[self._flat(pos)]

    def _flat(self, pos: tuple[int, ...]) -> int:
        if self.dimension == 1:
            return pos[0]
        return pos[0] * self.window.extents[1] + pos[1]

    def sub(self, offset: tuple[int, ...], win: Window) -> "Pattern":
        """Restriction to offset + win, re-anchored at the origin."""
        if self.dimension == 1:
            o = offset[0]
            cells = self.cells[o:o + win.extents[0]]
        else:
            r0, c0 = offset
            W = self.window.extents[1]
            h, w = win.extents
            cells = tuple(c for r in range(r0, r0 + h) for c in self.cells[r * W + c0:r * W + c0 + w])
        return Pattern(win, cells, self.alphabet)

    def rows(self) -> list[tuple[str, ...]]:
        if self.dimension == 1:
            return [self.cells]
        h, w = self.window.extents
        return [self.cells[r * w:(r + 1) * w] for r in range(h)]

    def __str__(self) -> str:
        sep = "" if all(len(s) == 1 for s in self.alphabet.symbols) else " "
        return "\n".join(sep.join(r) for r in self.rows())

    def to_text(self) -> str:
        head = f"pattern {self.dimension} {' '.join(map(str, self.window.extents))}"
        alpha = "alphabet " + " ".join(self.alphabet.symbols)
        body = "\n".join(" ".join(r) for r in self.rows())
        return f"{head}\n{alpha}\n{body}\n"

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "pattern":
            raise ValueError("missing pattern header")
        d = int(head[1])
        ext = tuple(int(x) for x in head[2:2 + d])
        alpha = Alphabet(tuple(lines[1].split()[1:]))
        cells = tuple(c for ln in lines[2:] for c in ln.split())
        return cls(Window(ext), cells, alpha)

    def to_json(self) -> dict:
        return {"extents": list(self.window.extents), "alphabet": list(self.alphabet.symbols),
                "rows": [list(r) for r in self.rows()]}

    @classmethod
    def from_json(cls, obj: dict) -> "Pattern":
        alpha = Alphabet(tuple(obj["alphabet"]))
        cells = tuple(c for r in obj["rows"] for c in r)
        return cls(Window(tuple(obj["extents"])), cells, alpha)


class ForbiddenSet:
    """Finite set of forbidden patterns, stored per window shape as sets of cell tuples.

    Large sets built with :meth:`from_blocks` never materialize ``Pattern`` objects unless
    ``patterns`` is read.
    """

    def __init__(self, alphabet: Alphabet, patterns: Iterable[Pattern] = ()):
        pats = tuple(patterns)
        for p in pats:
            if p.alphabet != alphabet:
                raise ValueError("forbidden pattern over a different alphabet")
        by_shape: dict[tuple[int, ...], set[tuple[str, ...]]] = {}
        for p in pats:
            by_shape.setdefault(p.window.extents, set()).add(p.cells)
        self._init(alphabet, by_shape)
        self._patterns: tuple[Pattern, ...] | None = pats

    def _init(self, alphabet, by_shape):
        if len({len(k) for k in by_shape}) > 1:
            raise ValueError("mixed dimensions in forbidden set")
        self.alphabet = alphabet
        self._by_shape = {k: frozenset(v) for k, v in by_shape.items() if v}

    @classmethod
    def from_blocks(cls, alphabet: Alphabet, blocks: dict) -> "ForbiddenSet":
        self = cls.__new__(cls)
        for shape, cells in blocks.items():
            size = 1
            for e in shape:
                size *= e
            for c in cells:
                if len(c) != size or any(x not in alphabet for x in c):
                    raise ValueError(f"bad forbidden block {c!r} for shape {shape}")
        self._init(alphabet, {tuple(k): set(map(tuple, v)) for k, v in blocks.items()})
        self._patterns = None
        return self

    @classmethod
    def from_strings(cls, words: Iterable[str], alphabet: Alphabet | None = None) -> "ForbiddenSet":
        alphabet = alphabet or binary()
        return cls(alphabet, tuple(Pattern.from_string(w, alphabet) for w in words))

    @property
    def patterns(self) -> tuple[Pattern, ...]:
        if self._patterns is None:
            self._patterns = tuple(Pattern(Window(shape), cells, self.alphabet)
                                   for shape in sorted(self._by_shape) for cells in sorted(self._by_shape[shape]))
        return self._patterns

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_shape.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, ForbiddenSet) and self.alphabet == other.alphabet and self._by_shape == other._by_shape

    def __hash__(self):
        return hash((self.alphabet, frozenset(self._by_shape.items())))

    @property
    def shapes(self) -> dict[tuple[int, ...], frozenset]:
        return self._by_shape

    @property
    def range(self) -> int:
        """Largest diameter of a forbidden pattern (the interaction range r)."""
        return max((max(s) - 1 for s in self._by_shape), default=0)

    @property
    def potential_norm(self) -> int:
        # at one anchor, at most one pattern per shape can occur
        return len(self._by_shape)

    @property
    def alpha(self) -> int:
        return 1

    def is_forbidden(self, p: Pattern) -> bool:
        return p.cells in self._by_shape.get(p.window.extents, ())


def _check_alphabet(p: Pattern, F: ForbiddenSet):
    if p.alphabet != F.alphabet:
        raise ValueError("alphabet mismatch between pattern and forbidden set")


def count_fault_energy(p: Pattern, F: ForbiddenSet) -> int:
    """Number of forbidden occurrences lying fully inside the window of ``p``."""
    _check_alphabet(p, F)
    total = 0
    for shape, pats in F.shapes.items():
        if len(shape) != p.dimension:
            continue
        for k in p.window.offsets_inside(Window(shape)):
            if _block(p.cells, p.window, shape, k) in pats:
                total += 1
    return total


def _completed_checks(win: Window, F: ForbiddenSet):
    """For each flat cell index, the (shape, offset) occurrences whose last cell it is."""
    checks: list[list[tuple[tuple[int, ...], tuple[int, ...], frozenset]]] = [[] for _ in range(win.size)]
    for shape, pats in F.shapes.items():
        if len(shape) != win.dimension:
            continue
        for k in win.offsets_inside(Window(shape)):
            last = tuple(a + b - 1 for a, b in zip(k, shape))
            idx = last[0] if win.dimension == 1 else last[0] * win.extents[1] + last[1]
            checks[idx].append((shape, k, pats))
    return checks


def _block(cells: list, win: Window, shape, k) -> tuple:
    if win.dimension == 1:
        return tuple(cells[k[0]:k[0] + shape[0]])
    W = win.extents[1]
    return tuple(c for r in range(k[0], k[0] + shape[0]) for c in cells[r * W + k[1]:r * W + k[1] + shape[1]])


@dataclass
class GroundResult:
    patterns: list[Pattern]
    count: int
    complete: bool
    nodes: int

    @property
    def status(self) -> str:
        return "COMPLETE" if self.complete else "INCOMPLETE"


def _backtrack(win: Window, alphabet: Alphabet, checks, budget: int | None, accept=None):
    """Depth-first cell filling in row-major order. Yields complete cell lists.

    ``accept(idx, cells)`` may veto a partial assignment in addition to the forbidden checks.
    Raises BudgetExhausted when more than ``budget`` nodes are expanded.
    """
    n = win.size
    cells: list[str | None] = [None] * n
    syms = alphabet.symbols
    nodes = [0]

    def ok(i):
        for shape, k, pats in checks[i]:
            if _block(cells, win, shape, k) in pats:
                return False
        return accept is None or accept(i, cells)

    def rec(i):
        if i == n:
            yield list(cells)
            return
        for s in syms:
            nodes[0] += 1
            if budget is not None and nodes[0] > budget:
                raise BudgetExhausted(nodes[0])
            cells[i] = s
            if ok(i):
                yield from rec(i + 1)
        cells[i] = None

    return rec(0), nodes


def enumerate_ground_patterns(win: Window, F: ForbiddenSet, budget: int | None = 10**7,
                              keep: bool = True) -> GroundResult:
    """All zero-energy patterns on ``win``; partial and flagged INCOMPLETE when the budget runs out."""
    checks = _completed_checks(win, F)
    gen, nodes = _backtrack(win, F.alphabet, checks, budget)
    found: list[Pattern] = []
    count = 0
    complete = True
    try:
        for cells in gen:
            count += 1
            if keep:
                found.append(Pattern(win, tuple(cells), F.alphabet))
    except BudgetExhausted:
        complete = False
    return GroundResult(found, count, complete, nodes[0])


def iter_ground_patterns(win: Window, F: ForbiddenSet, budget: int | None = None) -> Iterator[Pattern]:
    checks = _completed_checks(win, F)
    gen, _ = _backtrack(win, F.alphabet, checks, budget)
    for cells in gen:
        yield Pattern(win, tuple(cells), F.alphabet)


# marker sets

@dataclass(frozen=True)
class MarkerSetSpec:
    ell: int
    m: int
    patterns: tuple[Pattern, ...]
    dimension: int = 1

    @property
    def margin_factor(self) -> Fraction:
        return Fraction(self.m + 1, self.ell) - 2


@dataclass
class MarkerReport:
    non_overlapping: bool
    overlap_witness: tuple[Pattern, Pattern, tuple[int, ...]] | None
    covering: str  # Proved | Counterexample | Exhausted
    counterexample: Pattern | None
    margin_factor: Fraction
    nodes: int
    members_ground: bool = True


def overlap_witness(Q: Sequence[Pattern], ell: int, d: int):
    """First (u, v, k), k != 0, with u(p) = v(p + k) on the whole overlap."""
    rng = sorted(range(-(ell - 1), ell), key=lambda x: (abs(x), x < 0))
    for u in Q:
        for v in Q:
            for k in itertools.product(rng, repeat=d):
                if all(x == 0 for x in k):
                    continue
                agree = True
                for pos in Window((ell,) * d).cells():
                    q = tuple(a + b for a, b in zip(pos, k))
                    if all(0 <= x < ell for x in q) and u.at(pos) != v.at(q):
                        agree = False
                        break
                if agree:
                    return u, v, k
    return None


def validate_marker_set(spec: MarkerSetSpec, F: ForbiddenSet, budget: int | None = 10**7) -> MarkerReport:
    if spec.ell > spec.m:
        raise ValueError("marker side must not exceed covering side")
    d = spec.dimension
    lwin = Window((spec.ell,) * d)
    Q = list(spec.patterns)
    members_ground = all(p.window == lwin and count_fault_energy(p, F) == 0 for p in Q)
    wit = overlap_witness(Q, spec.ell, d)

    mwin = Window((spec.m,) * d)
    qset = frozenset(p.cells for p in Q)
    # a completed l-block found in Q means this branch is covered, so prune it
    qchecks = _completed_checks(mwin, ForbiddenSet(F.alphabet, tuple(Q))) if Q else [[] for _ in range(mwin.size)]

    def accept(i, cells):
        for shape, k, _ in qchecks[i]:
            if _block(cells, mwin, shape, k) in qset:
                return False
        return True

    gen, nodes = _backtrack(mwin, F.alphabet, _completed_checks(mwin, F), budget, accept)
    try:
        cex = next(gen, None)
    except BudgetExhausted:
        return MarkerReport(wit is None, wit, "Exhausted", None, spec.margin_factor, nodes[0], members_ground)
    if cex is None:
        return MarkerReport(wit is None, wit, "Proved", None, spec.margin_factor, nodes[0], members_ground)
    return MarkerReport(wit is None, wit, "Counterexample", Pattern(mwin, tuple(cex), F.alphabet),
                        spec.margin_factor, nodes[0], members_ground)


# measures and the weak-* distance

@dataclass(frozen=True)
class PeriodicPoint:
    """Orbit average of the periodic configuration generated by ``base``."""

    base: Pattern

    @property
    def period(self) -> tuple[int, ...]:
        return self.base.window.extents

    @property
    def dimension(self) -> int:
        return self.base.dimension

    @property
    def alphabet(self) -> Alphabet:
        return self.base.alphabet

    def symbol(self, pos: tuple[int, ...]) -> str:
        return self.base.at(tuple(x % p for x, p in zip(pos, self.period)))

    def cylinders(self, n: int) -> dict[tuple[str, ...], Fraction]:
        """Exact probabilities of the I_n patterns."""
        counts: Counter = Counter()
        if self.dimension == 1:
            (P,) = self.period
            ext = self.base.cells * (n // P + 2)
            for i in range(P):
                counts[ext[i:i + n]] += 1
        else:
            P, Q = self.period
            rows = [r * (n // Q + 2) for r in self.base.rows()]
            rows = rows * (n // P + 2)
            for i in range(P):
                for j in range(Q):
                    counts[tuple(c for r in rows[i:i + n] for c in r[j:j + n])] += 1
        tot = self.base.window.size
        return {k: Fraction(v, tot) for k, v in counts.items()}


@dataclass(frozen=True)
class BlockMeasure:
    """Probability vector over patterns of a fixed window; marginals are taken at the origin."""

    window: Window
    alphabet: Alphabet
    weights: tuple[tuple[tuple[str, ...], Fraction], ...]

    def __post_init__(self):
        w = tuple((tuple(k), Fraction(v)) for k, v in self.weights)
        if sum(v for _, v in w) != 1 or any(v < 0 for _, v in w):
            raise ValueError("weights must form a probability vector")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_dict(cls, window: Window, alphabet: Alphabet, probs: dict) -> "BlockMeasure":
        return cls(window, alphabet, tuple(sorted(probs.items())))

    @classmethod
    def uniform(cls, patterns: Sequence[Pattern]) -> "BlockMeasure":
        p0 = patterns[0]
        n = len(patterns)
        c = Counter(p.cells for p in patterns)
        return cls(p0.window, p0.alphabet, tuple(sorted((k, Fraction(v, n)) for k, v in c.items())))

    @property
    def dimension(self) -> int:
        return self.window.dimension

    def cylinders(self, n: int) -> dict[tuple[str, ...], Fraction]:
        if any(e < n for e in self.window.extents):
            raise ValueError("depth exceeds the block window")
        sub = Window((n,) * self.dimension)
        out: dict[tuple[str, ...], Fraction] = {}
        for cells, w in self.weights:
            key = Pattern(self.window, cells, self.alphabet).sub((0,) * self.dimension, sub).cells
            out[key] = out.get(key, Fraction(0)) + w
        return out

    def entropy(self) -> float:
        import math
        return -sum(float(w) * math.log2(w) for _, w in self.weights if w > 0)

    def energy(self, F: ForbiddenSet) -> Fraction:
        return sum((w * count_fault_energy(Pattern(self.window, c, self.alphabet), F)
                    for c, w in self.weights), Fraction(0))


def level_distance(mu, nu, n: int) -> Fraction:
    a, b = mu.cylinders(n), nu.cylinders(n)
    return sum((abs(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b)), Fraction(0))


@dataclass(frozen=True)
class DStar:
    value: Fraction
    tail_bound: Fraction

    @property
    def upper(self) -> Fraction:
        return self.value + self.tail_bound


def weak_star_distance(mu, nu, depth: int) -> DStar:
    """Truncated d*; the true distance lies in [value, value + tail_bound]."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if mu.dimension != nu.dimension:
        raise ValueError("dimension mismatch")
    val = sum((level_distance(mu, nu, n) / 2 ** (n + 1) for n in range(1, depth + 1)), Fraction(0))
    return DStar(val, Fraction(1, 2 ** depth))


def frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def dumps_fraction_json(obj) -> str:
    def conv(o):
        if isinstance(o, Fraction):
            return frac_str(o)
        raise TypeError(type(o))
    return json.dumps(obj, default=conv, sort_keys=True)
