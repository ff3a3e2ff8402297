"""End-to-end oscillator pipeline: machine, slowdown, induced word measures, accumulation estimate.

The slowed-down machine repeats the machine measure m_j on the whole block of scales
[2^(2^j), 2^(2^(j+1))). The induced measures follow the linear recurrence

    W[k+1] = a_k m'_k + (1 - a_k) W[k],   a_k = 1 / (4 (t_k + 1)),

so within a block, where m'_k = m_j and t_k is constant, W moves along the chord towards m_j
and W[s + i] = (1 - b^i) m_j + b^i W[s]. Blocks with j >= 3 are far too long to iterate, so we
evaluate that closed form at the indices where the progress 1 - b^i crosses a fixed grid.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .hierarchy import b_read, floor_log2, t_k
from .machines import (SeedMachine, oscillator_machine, seed_distribution, slowdown_transform)
from .measures import acc_estimate, hausdorff, segment_samples

TRASH = "?"


@dataclass(frozen=True)
class WordLaw:
    """Finite measure on words padded with + to a common length, plus a trash mass."""

    probs: tuple[tuple[str, float], ...]
    trash: float = 0.0
    label: str = ""

    @property
    def dimension(self) -> int:
        return 1

    def cylinders(self, n: int) -> dict[tuple[str, ...], float]:
        out: dict[tuple[str, ...], float] = {}
        for w, p in self.probs:
            if p:
                key = tuple((w + "+" * n)[:n])
                out[key] = out.get(key, 0.0) + p
        if self.trash:
            out[(TRASH,) * n] = self.trash
        return out


def block_start(j: int) -> int:
    return 2 ** (2 ** j)


def machine_law(machine: SeedMachine, j: int, exhaustive_upto: int = 12, samples: int = 64,
                seed: int = 0) -> tuple[dict[str, Fraction], str]:
    """Output law of ``machine`` over uniform seeds of length j.

    Exhaustive for j <= ``exhaustive_upto``; beyond that a fixed random sample of seeds must all
    give the same output and the law is taken to be that Dirac mass (marked "sampled").
    """
    if j <= exhaustive_upto:
        return seed_distribution(machine, j), "exhaustive"
    rng = random.Random(seed * 1000 + j)
    outs = {machine.run_seed("".join(rng.choice("01") for _ in range(j))).output for _ in range(samples)}
    if len(outs) != 1:
        raise ValueError(f"machine output depends on the seed at length {j}; cannot sample")
    return {outs.pop(): Fraction(1)}, "sampled"


def _pad(law: dict, L: int) -> dict[str, object]:
    out: dict[str, object] = {}
    for w, p in law.items():
        key = (w + "+" * L)[:L]
        out[key] = out.get(key, 0) + p
    return out


@dataclass
class PipelineResult:
    j_max: int
    length: int
    laws: list[dict]
    law_modes: list[str]
    slowdown_checked: dict[int, bool]
    samples: list[WordLaw]
    sample_index: list[tuple[int, str]]
    estimate: list[WordLaw]
    segment: list
    hausdorff: float
    index_tail_hausdorff: float
    trash_end: object
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"j_max": self.j_max, "length": self.length,
                "laws": [{w: str(p) for w, p in law.items()} for law in self.laws],
                "law_modes": self.law_modes,
                "slowdown_checked": {str(k): v for k, v in self.slowdown_checked.items()},
                "n_samples": len(self.samples), "n_estimate": len(self.estimate),
                "estimate": [{"label": e.label, "probs": dict(e.probs), "trash": e.trash} for e in self.estimate],
                "hausdorff": self.hausdorff, "index_tail_hausdorff": self.index_tail_hausdorff,
                "trash_end": mpmath.nstr(self.trash_end, 10), "diagnostics": self.diagnostics}


def oscillator_pipeline(j_max: int = 20, grid: int = 16, depth: int = 4, tolerance=Fraction(1, 64),
                        burn_in=Fraction(1, 2), check_slowdown_upto: int = 10, machine: SeedMachine | None = None,
                        exhaustive_upto: int = 12) -> PipelineResult:
    """Run the whole chain and compare the accumulation estimate with the segment [delta_+, delta_-].

    Every block j = 0..j_max contributes the same number of samples: the states where the
    progress towards m_j reaches c = 1/grid, 2/grid, ..., (grid-1)/grid, and the block's last state.
    """
    base = machine or oscillator_machine()
    slow = slowdown_transform(base)
    L = max(b_read(j_max), 1)
    laws, modes = [], []
    for j in range(j_max + 1):
        law, mode = machine_law(base, j, exhaustive_upto)
        laws.append(law)
        modes.append(mode)

    checked = {}
    for k in range(2, check_slowdown_upto + 1):
        j = floor_log2(floor_log2(k))
        want = _pad(laws[j], b_read(k))
        checked[k] = seed_distribution(slow, k) == want

    ctx = mpmath.mp.clone()
    ctx.prec = 128
    words = ["".join(p) for p in itertools.product("+-", repeat=L)]
    W = {w: ctx.mpf(0) for w in words}
    samples: list[WordLaw] = []
    index: list[tuple[int, str]] = []

    def snapshot(state, label):
        probs = tuple((w, float(v)) for w, v in state.items())
        mass = ctx.fsum(state.values())
        samples.append(WordLaw(probs, float(1 - mass), label))

    def step(state, m, t):
        a = ctx.mpf(1) / (4 * (t + 1))
        return {w: a * m.get(w, 0) + (1 - a) * v for w, v in state.items()}

    for j in range(j_max + 1):
        m = {w: ctx.mpf(p.numerator) / p.denominator for w, p in _pad(laws[j], L).items()}
        s, e = block_start(j), block_start(j + 1)
        if j == 0:
            s = 2
        if e - s <= 4 * grid:
            # short block: iterate exactly and keep a progress grid of the visited states
            states = []
            for k in range(s, e):
                W = step(W, m, t_k(k))
                states.append((k, W))
            picks = sorted({min(len(states) - 1, (len(states) * c) // grid) for c in range(1, grid + 1)})
            for p in picks:
                snapshot(states[p][1], f"j={j},k={states[p][0] + 1}")
                index.append((j, f"k={states[p][0] + 1}"))
            continue
        W = step(W, m, t_k(s))
        t = t_k(s + 1)
        logb = ctx.log1p(-ctx.mpf(1) / (4 * (t + 1)))
        n = ctx.mpf(e - s - 1) if e - s < 2 ** 64 else ctx.ldexp(1, 2 ** (j + 1)) - ctx.ldexp(1, 2 ** j) - 1
        start = dict(W)
        for c in range(1, grid):
            i = ctx.ceil(ctx.log1p(-ctx.mpf(c) / grid) / logb)
            f = ctx.exp(i * logb)
            cur = {w: (1 - f) * m.get(w, 0) + f * v for w, v in start.items()}
            snapshot(cur, f"j={j},progress={c}/{grid}")
            index.append((j, f"progress={c}/{grid}"))
        f = ctx.exp(n * logb)
        W = {w: (1 - f) * m.get(w, 0) + f * v for w, v in start.items()}
        snapshot(W, f"j={j},end")
        index.append((j, "end"))

    trash_end = 1 - ctx.fsum(W.values())
    est = acc_estimate(samples, tolerance, depth=depth, burn_in=burn_in)
    seg = segment_samples(16, L)
    hd = float(hausdorff(est, seg, depth))
    # the index-faithful tail: almost every index of the last block sits at its end state
    tail = [samples[-1]] * 10
    idx_est = acc_estimate(tail, tolerance, depth=depth, burn_in=burn_in)
    idx_hd = float(hausdorff(idx_est, seg, depth))
    diag = {"blocks": j_max + 1, "samples_per_block": grid, "tolerance": str(Fraction(tolerance)),
            "depth": depth, "burn_in": str(Fraction(burn_in))}
    return PipelineResult(j_max, L, laws, modes, checked, samples, index, est, seg, hd, idx_hd, trash_end, diag)
