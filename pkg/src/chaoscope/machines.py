"""Synchronous multi-tape Turing machines with exact step counting, unary arithmetic machines,
the sequential halving automaton, the Toeplitz codec and the seed-to-signal machine transforms.

Tape model: every tape is semi-infinite, cell 0 holds the left-end marker ``>`` and the input
starts at cell 1, where the shared head starts. One transition is one step.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .hierarchy import b_read, floor_log2

BLANK = "_"
LEFT = ">"
WILD = "*"
MOVES = {"L": -1, "R": 1, "S": 0}
MOVE_NAMES = {v: k for k, v in MOVES.items()}


class UndefinedTransition(RuntimeError):
    def __init__(self, state, read):
        super().__init__(f"undefined transition for state {state!r} reading {read!r}")
        self.state = state
        self.read = read


@dataclass
class MachineSpec:
    name: str
    tapes: int
    start: str
    halting: dict[str, str]
    transitions: dict[tuple[str, str], tuple[str, str, int]]
    read_only: tuple[bool, ...] = ()
    output_tape: int | None = None

    def __post_init__(self):
        if not self.read_only:
            self.read_only = (False,) * self.tapes
        if len(self.read_only) != self.tapes:
            raise ValueError("read_only must have one flag per tape")
        for (st, rd), (nx, wr, mv) in self.transitions.items():
            if len(rd) != self.tapes or len(wr) != self.tapes:
                raise ValueError(f"key {(st, rd)} does not match tape count {self.tapes}")
            if mv not in (-1, 0, 1):
                raise ValueError(f"bad move {mv}")
            if st in self.halting:
                raise ValueError(f"halting state {st!r} has outgoing transitions")
            for t in range(self.tapes):
                if self.read_only[t] and wr[t] != WILD and wr[t] != rd[t]:
                    raise ValueError(f"write on read-only tape {t} in {(st, rd)}")
        self._cache: dict = {}

    @property
    def states(self) -> list[str]:
        seen = {self.start: None}
        for (st, _), (nx, _, _) in self.transitions.items():
            seen.setdefault(st, None)
            seen.setdefault(nx, None)
        for h in self.halting:
            seen.setdefault(h, None)
        return list(seen)

    def symbols(self, extra: Iterable[str] = ()) -> list[str]:
        syms = {BLANK, LEFT, *extra}
        for (_, rd), (_, wr, _) in self.transitions.items():
            syms.update(c for c in rd + wr if c != WILD)
        return sorted(syms)

    def resolve(self, state: str, read: str):
        """Most specific matching rule; ties with different actions are an error."""
        key = (state, read)
        if key in self._cache:
            return self._cache[key]
        hit = self.transitions.get(key)
        if hit is None:
            best, best_stars = None, None
            for mask in itertools.product((False, True), repeat=self.tapes):
                if not any(mask):
                    continue
                pat = "".join(WILD if m else c for m, c in zip(mask, read))
                cand = self.transitions.get((state, pat))
                if cand is None:
                    continue
                stars = sum(mask)
                if best is None or stars < best_stars:
                    best, best_stars = cand, stars
                elif stars == best_stars and cand != best:
                    raise ValueError(f"ambiguous wildcard rules for {key}")
            hit = best
        if hit is not None:
            nx, wr, mv = hit
            hit = (nx, "".join(r if w == WILD else w for w, r in zip(wr, read)), mv)
        self._cache[key] = hit
        return hit

    # text format

    def to_text(self) -> str:
        lines = ["tmspec 1", f"name {self.name}", f"tapes {self.tapes}",
                 "readonly " + " ".join("1" if r else "0" for r in self.read_only),
                 f"start {self.start}"]
        if self.output_tape is not None:
            lines.append(f"output {self.output_tape}")
        for st, verdict in sorted(self.halting.items()):
            lines.append(f"halt {st} {verdict}")
        for (st, rd), (nx, wr, mv) in sorted(self.transitions.items()):
            lines.append(f"{st} {rd} -> {nx} {wr} {MOVE_NAMES[mv]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MachineSpec":
        name, tapes, start, ro, out = "machine", None, None, (), None
        halting: dict[str, str] = {}
        trans: dict = {}
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
        if not lines or lines[0][1] != "tmspec 1":
            raise ValueError("line 1: expected header 'tmspec 1'")
        for no, ln in lines[1:]:
            tok = ln.split()
            head = tok[0]
            if head == "name":
                name = tok[1]
            elif head == "tapes":
                tapes = int(tok[1])
            elif head == "readonly":
                ro = tuple(t == "1" for t in tok[1:])
            elif head == "start":
                start = tok[1]
            elif head == "output":
                out = int(tok[1])
            elif head == "halt":
                halting[tok[1]] = tok[2]
            elif len(tok) == 6 and tok[2] == "->":
                if tok[5] not in MOVES:
                    raise ValueError(f"line {no}: move must be L, R or S")
                key = (tok[0], tok[1])
                if key in trans:
                    raise ValueError(f"line {no}: duplicate transition {key}")
                trans[key] = (tok[3], tok[4], MOVES[tok[5]])
            else:
                raise ValueError(f"line {no}: cannot parse {ln!r}")
        if tapes is None or start is None:
            raise ValueError("missing 'tapes' or 'start'")
        return cls(name, tapes, start, halting, trans, ro, out)


@dataclass
class RunResult:
    verdict: str | None
    steps: int
    budget: int | None
    truncated: bool
    tapes: list[str]
    head: int
    state: str
    output: str = ""
    trace: list | None = None

    def unary(self, tape: int = 0) -> int:
        return self.tapes[tape].count("1")

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "steps": self.steps, "budget": self.budget,
                "truncated": self.truncated, "output": self.output, "state": self.state, "head": self.head}


def _initial_tapes(spec: MachineSpec, inputs: Sequence[str]) -> list[list[str]]:
    if len(inputs) > spec.tapes:
        raise ValueError("more inputs than tapes")
    ins = list(inputs) + [""] * (spec.tapes - len(inputs))
    return [[LEFT] + list(s) for s in ins]


def _finish(spec, tapes, head, state, steps, budget, truncated, trace=None) -> RunResult:
    text = ["".join(t[1:]).rstrip(BLANK) for t in tapes]
    out = text[spec.output_tape] if spec.output_tape is not None else ""
    verdict = None if truncated else spec.halting.get(state)
    return RunResult(verdict, steps, budget, truncated, text, head, state, out, trace)


def _run_python(spec: MachineSpec, inputs, budget, trace: bool) -> RunResult:
    tapes = _initial_tapes(spec, inputs)
    state, head, steps = spec.start, 1, 0
    log = [] if trace else None
    while state not in spec.halting:
        if budget is not None and steps >= budget:
            return _finish(spec, tapes, head, state, steps, budget, True, log)
        for t in tapes:
            if head >= len(t):
                t.extend(BLANK * (head + 1 - len(t)))
        read = "".join(t[head] for t in tapes)
        hit = spec.resolve(state, read)
        if hit is None:
            raise UndefinedTransition(state, read)
        if log is not None:
            log.append((steps, state, head, read))
        nx, wr, mv = hit
        for t, c in zip(tapes, wr):
            t[head] = c
        state = nx
        head += mv
        steps += 1
        if head < 0:
            raise RuntimeError("head moved past the left end")
    return _finish(spec, tapes, head, state, steps, budget, False, log)


# compiled engine

@dataclass
class _Compiled:
    states: list[str]
    symbols: list[str]
    nxt: np.ndarray
    wr: np.ndarray
    mv: np.ndarray
    halting: np.ndarray
    lut: np.ndarray
    sym_arr: np.ndarray
    start: int


def compile_machine(spec: MachineSpec, extra_symbols: Iterable[str] = ()) -> _Compiled:
    key = frozenset(extra_symbols)
    cache = spec.__dict__.setdefault("_compiled", {})
    if key in cache:
        return cache[key]
    states = spec.states
    syms = spec.symbols(key)
    S, T = len(syms), spec.tapes
    sidx = {s: i for i, s in enumerate(states)}
    size = len(states) * S ** T
    nxt = np.full(size, -1, dtype=np.int64)
    wr = np.zeros((size, T), dtype=np.int64)
    mv = np.zeros(size, dtype=np.int64)
    cidx = {c: i for i, c in enumerate(syms)}
    for st in states:
        if st in spec.halting:
            continue
        for combo in itertools.product(range(S), repeat=T):
            read = "".join(syms[c] for c in combo)
            hit = spec.resolve(st, read)
            if hit is None:
                continue
            k = sidx[st]
            for c in combo:
                k = k * S + c
            nxt[k] = sidx[hit[0]]
            wr[k] = [cidx[c] for c in hit[1]]
            mv[k] = hit[2]
    halting = np.array([s in spec.halting for s in states], dtype=np.bool_)
    lut = np.full(0x110000 if any(ord(c) > 255 for c in syms) else 256, -1, dtype=np.int64)
    for c, i in cidx.items():
        lut[ord(c)] = i
    comp = _Compiled(states, syms, nxt, np.ascontiguousarray(wr.T), mv, halting, lut, np.array(syms), sidx[spec.start])
    cache[key] = comp
    return comp


def _encode(comp: _Compiled, s: str) -> np.ndarray:
    codes = comp.lut[np.array([ord(c) for c in s], dtype=np.int64)] if s else np.zeros(0, dtype=np.int64)
    if (codes < 0).any():
        raise ValueError("input symbol outside the machine alphabet")
    return codes


def _run_compiled(spec: MachineSpec, inputs, budget) -> RunResult:
    extra = set("".join(inputs)) - set(spec.symbols())
    comp = compile_machine(spec, extra)
    blank = comp.lut[ord(BLANK)]
    left = comp.lut[ord(LEFT)]
    ins = list(inputs) + [""] * (spec.tapes - len(inputs))
    if len(ins) > spec.tapes:
        raise ValueError("more inputs than tapes")
    width = max(len(x) for x in ins) + 66
    tape = np.full((spec.tapes, width), blank, dtype=np.int64)
    for t, x in enumerate(ins):
        tape[t, 0] = left
        tape[t, 1:1 + len(x)] = _encode(comp, x)
    from ._engine import grow, run_core
    head, state, steps = 1, comp.start, 0
    lim = (1 << 62) if budget is None else budget
    while True:
        code, head, state, steps = run_core(tape, head, state, steps, lim, comp.nxt, comp.wr, comp.mv,
                                            comp.halting, len(comp.symbols))
        if code != 3:
            break
        tape = grow(tape, blank)
    st = comp.states[state]
    if code == 2:
        read = "".join(comp.symbols[tape[t, head]] for t in range(spec.tapes))
        raise UndefinedTransition(st, read)
    if code == 4:
        raise RuntimeError("head moved past the left end")
    text = []
    for row in tape:
        nz = np.flatnonzero(row[1:] != blank)
        end = nz[-1] + 2 if len(nz) else 1
        text.append("".join(comp.sym_arr[row[1:end]]))
    out = text[spec.output_tape] if spec.output_tape is not None else ""
    truncated = code == 1
    return RunResult(None if truncated else spec.halting.get(st), steps, budget, truncated, text, head, st, out)


def run_machine(spec: MachineSpec, inputs: Sequence[str] = (), budget: int | None = None,
                engine: str = "auto", trace: bool = False) -> RunResult:
    """Run ``spec`` on the given tape contents; ``budget`` caps the number of steps."""
    if budget is not None and budget < 0:
        raise ValueError("budget must be nonnegative")
    if engine == "python" or trace:
        return _run_python(spec, inputs, budget, trace)
    if engine not in ("auto", "compiled"):
        raise ValueError(f"unknown engine {engine!r}")
    try:
        return _run_compiled(spec, inputs, budget)
    except ImportError:
        if engine == "compiled":
            raise
        return _run_python(spec, inputs, budget, trace)


@dataclass
class UnaryRun:
    inputs: tuple[int, ...]
    verdict: str | None
    steps: int
    head: int
    truncated: bool
    counts: tuple[int, ...]


def run_unary_batch(spec: MachineSpec, inputs: Sequence[Sequence[int]], budget: int | None = None) -> list[UnaryRun]:
    """Run ``spec`` on many unary inputs inside one compiled loop; returns stick counts per tape."""
    comp = compile_machine(spec, "1")
    lengths = np.zeros((len(inputs), spec.tapes), dtype=np.int64)
    for r, tup in enumerate(inputs):
        if len(tup) > spec.tapes or any(x < 0 for x in tup):
            raise ValueError(f"bad unary input {tup!r}")
        lengths[r, :len(tup)] = tup
    from ._engine import run_batch
    lut = comp.lut
    res = run_batch(lengths, lut[ord("1")], lut[ord(BLANK)], lut[ord(LEFT)], comp.start,
                    (1 << 62) if budget is None else budget, comp.nxt, comp.wr, comp.mv, comp.halting,
                    len(comp.symbols))
    codes, steps, heads, states, counts = res[:, 0], res[:, 1], res[:, 2], res[:, 3], res[:, 4:]
    out = []
    for r, tup in enumerate(inputs):
        st = comp.states[states[r]]
        if codes[r] == 2:
            raise UndefinedTransition(st, f"(input {tuple(tup)})")
        if codes[r] == 4:
            raise RuntimeError("head moved past the left end")
        trunc = bool(codes[r] == 1)
        out.append(UnaryRun(tuple(tup), None if trunc else spec.halting.get(st), int(steps[r]), int(heads[r]),
                            trunc, tuple(int(c) for c in counts[r])))
    return out


def format_trace(result: RunResult) -> str:
    return "\n".join(f"{s}\t{st}\t{h}\t{rd}" for s, st, h, rd in (result.trace or []))


# small machines

def accept_machine() -> MachineSpec:
    return MachineSpec("accept", 1, "q", {"acc": "accept"}, {("q", WILD): ("acc", WILD, 0)})


def walker_machine(length: int) -> MachineSpec:
    """Moves right ``length`` times and accepts; takes exactly ``length`` steps."""
    trans = {(f"q{i}", WILD): (f"q{i + 1}", WILD, 1) for i in range(length - 1)}
    trans[(f"q{length - 1}", WILD)] = ("acc", WILD, 1)
    return MachineSpec(f"walk{length}", 1, "q0", {"acc": "accept"}, trans)


def compare_machine() -> MachineSpec:
    """Three-way comparison of two unary integers in exactly min(i, j) + 1 steps."""
    trans = {("q", "11"): ("q", "11", 1), ("q", "_1"): ("lt", "_1", 0),
             ("q", "1_"): ("gt", "1_", 0), ("q", "__"): ("eq", "__", 0)}
    return MachineSpec("compare", 2, "q", {"lt": "<", "gt": ">", "eq": "="}, trans, (True, True))


def _check_base(b: int):
    if b < 2:
        raise ValueError("base must be at least 2")


def power_check_machine(b: int) -> MachineSpec:
    """Decides whether n is a power of b by alternating passes that keep every b-th stick."""
    _check_base(b)
    trans = {}
    for d, mv, end, back in (("R", 1, BLANK, "L"), ("L", -1, LEFT, "R")):
        for c in range(b):
            for s in range(3):
                st = f"{d}{c}.{s}"
                trans[(st, "1")] = (f"{d}{(c + 1) % b}.{min(s + 1, 2)}", "x" if c < b - 1 else "1", mv)
                trans[(st, "x")] = (st, "x", mv)
                if s == 1:
                    res = ("acc", end, 0)
                elif s == 0 or c != 0:
                    res = ("rej", end, 0)
                else:
                    res = (f"{back}0.0", end, -mv)
                trans[(st, end)] = res
    return MachineSpec(f"power_check{b}", 1, "R0.0", {"acc": "accept", "rej": "reject"}, trans)


def floor_log_machine(b: int) -> MachineSpec:
    """Writes floor(log_b n) in unary on tape 1; the input on tape 0 is consumed.

    Each round is a rightward dividing pass followed by a return sweep. A pass that keeps at
    least one stick owes one output stick, written at the first free output cell next pass.
    """
    _check_base(b)
    trans = {}
    for c in range(b):
        for kept in (0, 1):
            for owe in (0, 1):
                for seen in (0, 1):
                    st = f"P{c}{kept}{owe}{seen}"
                    for t0 in "1x":
                        for t1 in "1_":
                            w1, o2 = t1, owe
                            if owe and t1 == BLANK:
                                w1, o2 = "1", 0
                            if t0 == "1":
                                keep = c == b - 1
                                nx = f"P{(c + 1) % b}{int(kept or keep)}{o2}1"
                                w0 = "1" if keep else "x"
                            else:
                                nx, w0 = f"P{c}{kept}{o2}{seen}", "x"
                            trans[(st, t0 + t1)] = (nx, w0 + w1, 1)
                    if not seen:
                        trans[(st, BLANK + WILD)] = ("rej", WILD * 2, 0)
                    elif not owe:
                        trans[(st, BLANK + WILD)] = ("B1" if kept else "C", WILD * 2, -1)
    for owe in (0, 1):
        trans[(f"B{owe}", WILD * 2)] = (f"B{owe}", WILD * 2, -1)
        trans[(f"B{owe}", LEFT * 2)] = (f"P00{owe}0", LEFT * 2, 1)
    trans[("C", WILD * 2)] = ("C", BLANK + WILD, -1)
    trans[("C", LEFT * 2)] = ("done", LEFT * 2, 1)
    return MachineSpec(f"floor_log{b}", 2, "P0000", {"done": "halt", "rej": "reject"}, trans, output_tape=1)


def nearest_power_machine(b: int) -> MachineSpec:
    """Leaves b^floor(log_b n) sticks on tape 0.

    Each rightward pass keeps the first stick of every group of b and marks the rest 'x'; a
    trailing partial group is erased together with its block. When fewer than b live sticks
    remain, the first block is restored and everything after it is erased.
    """
    _check_base(b)
    trans = {}
    for c in range(b):
        for s in range(b + 1):
            st = f"R{c}.{s}"
            trans[(st, "1")] = (f"R{(c + 1) % b}.{min(s + 1, b)}", "1" if c == 0 else "x", 1)
            trans[(st, "$")] = (st, "$", 1)
            if s == 0:
                res = ("rej", BLANK, 0)
            elif s < b:
                res = ("Bk", BLANK, -1)
            elif c != 0:
                res = ("E", BLANK, -1)
            else:
                res = ("B", BLANK, -1)
            trans[(st, BLANK)] = res
    for c in "x$":
        trans[("E", c)] = ("E", BLANK, -1)
    trans[("E", "1")] = ("B", BLANK, -1)
    trans[("B", "1")] = ("B", "1", -1)
    trans[("B", "$")] = ("B", "$", -1)
    trans[("B", "x")] = ("B", "$", -1)
    trans[("B", LEFT)] = ("R0.0", LEFT, 1)
    for c in "1$x":
        trans[("Bk", c)] = ("Bk", c, -1)
    trans[("Bk", LEFT)] = ("K0", LEFT, 1)
    trans[("K0", "1")] = ("K", "1", 1)
    trans[("K", "$")] = ("K", "1", 1)
    trans[("K", "x")] = ("Z", BLANK, 1)
    trans[("K", BLANK)] = ("H", BLANK, -1)
    for c in "$x":
        trans[("Z", c)] = ("Z", BLANK, 1)
    trans[("Z", BLANK)] = ("H", BLANK, -1)
    trans[("H", "1")] = ("H", "1", -1)
    trans[("H", BLANK)] = ("H", BLANK, -1)
    trans[("H", LEFT)] = ("done", LEFT, 1)
    return MachineSpec(f"nearest_power{b}", 1, "R0.0", {"done": "halt", "rej": "reject"}, trans, output_tape=0)


BUILTINS = {
    "compare": lambda b=None: compare_machine(),
    "power_check": power_check_machine,
    "floor_log": floor_log_machine,
    "nearest_power": nearest_power_machine,
}


def builtin_unary(name: str, inputs: Sequence[int], b: int = 2, budget: int | None = None,
                  engine: str = "auto") -> RunResult:
    if name not in BUILTINS:
        raise ValueError(f"unknown builtin {name!r}")
    if name != "compare" and b not in (2, 3):
        raise ValueError("base must be 2 or 3")
    spec = BUILTINS[name](b)
    if any(n < 0 for n in inputs):
        raise ValueError("unary inputs must be nonnegative")
    return run_machine(spec, ["1" * n for n in inputs], budget, engine)


# exception-table speedup

class SpeedupMachine:
    """Hardcodes a finite exception set read by an n-step automaton pass, then defers.

    Non-exceptional inputs cost 2n + f(n): the automaton pass, the walk back, then the base run.
    """

    def __init__(self, spec: MachineSpec, g: Callable[[int], int], exceptions: dict[int, object] | None = None,
                 kind: str = "decision", verify_upto: int | None = None):
        if kind not in ("decision", "function"):
            raise ValueError("kind must be 'decision' or 'function'")
        self.spec, self.g, self.kind = spec, g, kind
        if exceptions is None:
            exceptions = {}
            if verify_upto is not None:
                for n in range(verify_upto + 1):
                    r = self._base(n)
                    if r.steps + 2 * n > g(n):
                        exceptions[n] = self._answer(r)
        for n, ans in exceptions.items():
            need = n if kind == "decision" else 2 * max(n, int(ans))
            if g(n) < need:
                raise ValueError(f"exception at n={n} needs {need} steps but g(n)={g(n)}")
        self.exceptions = dict(exceptions)

    def _base(self, n: int) -> RunResult:
        return run_machine(self.spec, ["1" * n])

    def _answer(self, r: RunResult):
        return r.verdict if self.kind == "decision" else r.unary(self.spec.output_tape or 0)

    def run(self, n: int) -> RunResult:
        if n in self.exceptions:
            ans = self.exceptions[n]
            if self.kind == "decision":
                return RunResult(str(ans), n, None, False, ["1" * n], n + 1, "table")
            out = int(ans)
            return RunResult("halt", 2 * max(n, out), None, False, ["1" * out], 1, "table", "1" * out)
        r = self._base(n)
        r.steps += 2 * n
        return r

    def violations(self, upto: int) -> list[tuple[int, int, int]]:
        bad = []
        for n in range(upto + 1):
            s = self.run(n).steps
            if s > self.g(n):
                bad.append((n, s, self.g(n)))
        return bad


def speedup_wrap(spec: MachineSpec, g: Callable[[int], int], exceptions: dict | None = None,
                 kind: str = "decision", verify_upto: int | None = None) -> SpeedupMachine:
    return SpeedupMachine(spec, g, exceptions, kind, verify_upto)


# sequential halving automaton

WALL, YELLOW, GREEN = "W", "Y", "G"


@dataclass
class CaDiagram:
    width: int
    rows: list[str]
    flips: list[list[int]]  # per row, per wall-bounded segment

    @property
    def totals(self) -> list[int]:
        return [sum(f) for f in self.flips]

    def rightmost(self) -> str:
        """Column of the last non-wall cell, one symbol per row."""
        col = max(i for i, c in enumerate(self.rows[0]) if c != WALL)
        return "".join(r[col] for r in self.rows)

    def decoded_N(self) -> int:
        col = self.rightmost()
        n = 0
        while n < len(col) and col[n] == GREEN:
            n += 1
        return n

    def halving_holds(self) -> bool:
        return all(b == a // 2 for f0, f1 in zip(self.flips, self.flips[1:]) for a, b in zip(f0, f1))

    def to_text(self) -> str:
        return "\n".join(self.rows) + "\n"


def _segments(row: str) -> list[str]:
    return [s for s in row.split(WALL)[1:-1]]


def segment_flips(row: str) -> list[int]:
    return [sum(1 for a, b in zip(s, s[1:]) if a != b) for s in _segments(row)]


def ca_step(row: str) -> str:
    new = [row[0]]
    for k in range(1, len(row)):
        if row[k] == WALL:
            new.append(WALL)
        elif row[k - 1] == WALL:
            new.append(YELLOW)
        elif row[k - 1] == GREEN and row[k] == YELLOW:
            new.append(GREEN if new[k - 1] == YELLOW else YELLOW)
        else:
            new.append(new[k - 1])
    return "".join(new)


def initial_row(f0_blocks: Sequence[int] | str) -> str:
    """Wall-bounded row; an int f gives a segment of f + 1 alternating cells starting yellow."""
    if isinstance(f0_blocks, str):
        row = f0_blocks.replace("|", WALL).replace(" ", "")
    else:
        parts = []
        for f in f0_blocks:
            if f < 0:
                raise ValueError("flip counts must be nonnegative")
            parts.append("".join(YELLOW if i % 2 == 0 else GREEN for i in range(f + 1)))
        row = WALL + WALL.join(parts) + WALL
    if not row or row[0] != WALL or row[-1] != WALL:
        raise ValueError("unbounded segment: row must start and end with a wall")
    if set(row) - {WALL, YELLOW, GREEN}:
        raise ValueError("row symbols must be W, Y or G")
    for s in _segments(row):
        if s and s[0] != YELLOW:
            raise ValueError("each segment must start yellow")
    return row


def run_halving_ca(f0_blocks: Sequence[int] | str, steps: int | None = None) -> CaDiagram:
    row = initial_row(f0_blocks)
    if steps is None:
        steps = max(segment_flips(row) + [0]).bit_length() + 1
    rows = [row]
    for _ in range(steps):
        rows.append(ca_step(rows[-1]))
    return CaDiagram(len(row), rows, [segment_flips(r) for r in rows])


# Toeplitz codec

def _v2(p: int) -> int:
    return (p & -p).bit_length() - 1


def toeplitz_encode(word: Sequence[str] | str, length: int | None = None) -> list:
    """Position p (from 1) carries word[v2(p)]; each letter recurs with twice the previous period."""
    n = len(word)
    cap = 2 ** n - 1
    length = cap if length is None else length
    if length > cap:
        raise ValueError(f"at most {cap} symbols are determined by a word of length {n}")
    return [word[_v2(p)] for p in range(1, length + 1)]


def toeplitz_decode(stream: Sequence, count: int) -> list:
    if 2 ** count - 1 > len(stream):
        raise ValueError("stream too short for the requested prefix")
    return [stream[2 ** j - 1] for j in range(count)]


# seed-to-signal machines

class SeedMachine:
    """A machine mapping a binary seed to a signal over {+,-}."""

    name = "seed-machine"

    def run_seed(self, seed: str, budget: int | None = None) -> RunResult:
        raise NotImplementedError


class TableSeedMachine(SeedMachine):
    """Table machine with the seed on tape 0 and b_read(|s|) output placeholders on tape 1."""

    def __init__(self, spec: MachineSpec):
        self.spec = spec
        self.name = spec.name

    def run_seed(self, seed: str, budget: int | None = None) -> RunResult:
        r = run_machine(self.spec, [seed, "." * b_read(len(seed))], budget)
        r.output = r.tapes[1] if not r.truncated else ""
        return r


def oscillator_spec() -> MachineSpec:
    """Sweeps the seed counting parity, then writes the parity sign into every placeholder."""
    trans = {}
    for p, q in (("E", "O"), ("O", "E")):
        for c in "01":
            trans[(p, c + WILD)] = (q, WILD * 2, 1)
        trans[(p, BLANK + WILD)] = ("W" + p, WILD * 2, -1)
        sign = "+" if p == "E" else "-"
        trans[("W" + p, WILD + ".")] = ("W" + p, WILD + sign, -1)
        trans[("W" + p, WILD * 2)] = ("W" + p, WILD * 2, -1)
        trans[("W" + p, LEFT * 2)] = ("done", LEFT * 2, 1)
    return MachineSpec("oscillator", 2, "E", {"done": "halt"}, trans, (True, False), output_tape=1)


def oscillator_machine() -> TableSeedMachine:
    return TableSeedMachine(oscillator_spec())


def oscillator_word(k: int) -> str:
    return ("+" if k % 2 == 0 else "-") * b_read(k)


def well_behaved_cap(k: int) -> int:
    return 2 ** (3 ** k)


def enforce_well_behaved(machine: SeedMachine | MachineSpec, seed: str, cap: int | None = None,
                         table: dict[str, str] | None = None, k0: int = 0) -> RunResult:
    """Run under the hard cap 2^{3^{|s|}} and check the output length b_read(|s|)."""
    if isinstance(machine, MachineSpec):
        machine = TableSeedMachine(machine)
    k = len(seed)
    if cap is None:
        if k > 3:
            raise ValueError("seeds longer than 3 need an explicit cap")
        cap = well_behaved_cap(k)
    if table is not None and k < k0 and seed in table:
        out = table[seed]
        r = RunResult("halt", k, cap, False, [seed, out], 1, "table", out)
    else:
        r = machine.run_seed(seed, cap)
    ok = not r.truncated and len(r.output) == b_read(k) and set(r.output) <= {"+", "-"}
    if not ok:
        r.verdict = "rejected"
    return r


class SlowdownMachine(SeedMachine):
    """M'(s) = M(s[:j]) padded with + to b_read(|s|), where j = floor(log2(floor(log2 |s|))).

    Cost: the seed is copied to a unary work area (|s| steps), the two logarithms are run on the
    unary floor_log machine, M runs on the prefix, and the padding pass costs b_read(|s|) + 1.
    """

    def __init__(self, base: SeedMachine | MachineSpec):
        self.base = TableSeedMachine(base) if isinstance(base, MachineSpec) else base
        self.name = f"slowdown({self.base.name})"
        self._log = floor_log_machine(2)

    @staticmethod
    def j_of(k: int) -> int | None:
        if k < 2:
            return None
        return floor_log2(floor_log2(k))

    def run_seed(self, seed: str, budget: int | None = None) -> RunResult:
        k = len(seed)
        target = b_read(k)
        steps = 0

        def left():
            return None if budget is None else max(budget - steps, 0)

        def cut(r):
            return RunResult(None, budget, budget, True, [seed, ""], 0, "truncated")

        if k < 2:
            steps = k + 1
            if budget is not None and steps > budget:
                return cut(None)
            return RunResult("halt", steps, budget, False, [seed, "+" * target], 1, "pad", "+" * target)
        steps += k
        r1 = run_machine(self._log, ["1" * k], left())
        steps += r1.steps
        if r1.truncated:
            return cut(r1)
        r2 = run_machine(self._log, ["1" * r1.unary(1)], left())
        steps += r2.steps
        if r2.truncated:
            return cut(r2)
        j = r2.unary(1)
        r3 = self.base.run_seed(seed[:j], left())
        steps += r3.steps
        if r3.truncated:
            return cut(r3)
        out = r3.output + "+" * (target - len(r3.output))
        steps += target + 1
        if budget is not None and steps > budget:
            return cut(None)
        return RunResult("halt", steps, budget, False, [seed, out], 1, "pad", out)


def slowdown_transform(base: SeedMachine | MachineSpec) -> SlowdownMachine:
    return SlowdownMachine(base)


def seed_distribution(machine: SeedMachine, k: int, budget: int | None = None) -> dict[str, Fraction]:
    """Exact law of the output under uniformly distributed seeds of length k."""
    out: dict[str, Fraction] = {}
    for bits in itertools.product("01", repeat=k):
        r = machine.run_seed("".join(bits), budget)
        out[r.output] = out.get(r.output, Fraction(0)) + Fraction(1, 2 ** k)
    return out


# machines driven by dyadic measure programs

class DyadicEnumerator:
    """A step-counted program j -> weight table of a measure in depth j.

    ``table(j)`` returns (weights, word_length); ``cost(j)`` the number of steps it takes.
    """

    def __init__(self, table: Callable[[int], tuple[Sequence[int], int]], cost: Callable[[int], int] | None = None,
                 name: str = "program"):
        self.table = table
        self.cost = cost or (lambda j: j + 1)
        self.name = name

    def compute(self, j: int, budget: int):
        c = self.cost(j)
        if c > budget:
            return None, budget
        return self.table(j), c

    @classmethod
    def constant(cls, weights: Sequence[int], k: int, length: int | None = None) -> "DyadicEnumerator":
        from .measures import DyadicWordMeasure
        base = DyadicWordMeasure(k, tuple(weights), length)

        def table(j):
            if j <= k:
                return tuple(base.weights), base.length
            m = base.lift(j, base.length)
            return tuple(m.weights), m.length
        return cls(table, name="constant")

    @classmethod
    def oscillator(cls) -> "DyadicEnumerator":
        def table(j):
            L = b_read(j)
            w = [0] * 2 ** L
            w[0 if j % 2 == 0 else 2 ** L - 1] = 2 ** j
            return tuple(w), L
        return cls(table, cost=lambda j: 3 * j + 2, name="oscillator")


class DyadicProgramMachine(SeedMachine):
    """Repeats entries of T until the next one can be simulated within k steps, then maps the
    seed to a word by inverting partial sums of the weight table lifted to depth |s|."""

    def __init__(self, T: DyadicEnumerator):
        self.T = T
        self.name = f"dyadic({T.name})"
        self._seq: list[tuple[tuple[int, ...], int, int, int]] = [((1,), 0, 0, 0)]

    def t_prime(self, k: int):
        """(weights, word_length, j, cumulative simulation steps) for T'(k)."""
        while len(self._seq) <= k:
            kk = len(self._seq) - 1
            w, L, j, acc = self._seq[-1]
            res, used = self.T.compute(j + 1, kk)
            if res is not None:
                w, L = res
                j += 1
            self._seq.append((tuple(w), L, j, acc + used))
        return self._seq[k]

    def run_seed(self, seed: str, budget: int | None = None) -> RunResult:
        k = len(seed)
        w, L, j, sim = self.t_prime(k)
        Lk = b_read(k)
        steps = sim + k
        if sum(w) != 2 ** j or len(w) != 2 ** L or any(x < 0 for x in w) or L > Lk:
            return RunResult("reject", steps, budget, False, [seed, ""], 1, "malformed")
        scale = 2 ** (k - j)
        pad = Lk - L
        lifted = [0] * 2 ** Lk
        for i, x in enumerate(w):
            lifted[i << pad] = x * scale  # + padding keeps the prefix and appends zeros in index
        steps += len(lifted) * (k + 1)
        if budget is not None and steps > budget:
            return RunResult(None, budget, budget, True, [seed, ""], 0, "truncated")
        x = int(seed, 2) if seed else 0
        acc = 0
        for i, wt in enumerate(lifted):
            acc += wt
            if x < acc:
                break
        word = "".join("+" if (i >> (Lk - 1 - p)) & 1 == 0 else "-" for p in range(Lk))
        return RunResult("halt", steps, budget, False, [seed, word], 1, "done", word)


def dyadic_program_machine(T: DyadicEnumerator) -> DyadicProgramMachine:
    return DyadicProgramMachine(T)


# reduction sequence for the cofinality problem

def triple_enumeration(i_max: int) -> list[tuple[int, int, int]]:
    """Bijection N -> N^3 by increasing coordinate sum, then lexicographically; coordinates of f(i) are <= i."""
    out: list[tuple[int, int, int]] = []
    s = 0
    while len(out) <= i_max:
        for a in range(s + 1):
            for b in range(s - a + 1):
                out.append((a, b, s - a - b))
        s += 1
    return out[:i_max + 1]


@dataclass
class CofinalityEntry:
    i: int
    triple: tuple[int, int, int]
    condition: bool
    halts: dict[int, int | None]
    measure: object


def cofinality_sequence(machine: MachineSpec | Callable[[int], int | None], i_max: int, budget: int = 10_000,
                        minus_string: bool = False, refine: bool = True):
    """The literal reduction sequence m_i and its refinement into small steps of weight 2^{-i}.

    ``machine`` is a unary machine (input n as n sticks) or a callable giving the halting time or None.
    With ``minus_string`` the marked word is all minus; otherwise its sign is (-1)^i.
    """
    from .measures import DyadicWordMeasure

    tau_cache: dict[int, int | None] = {}

    def tau(n):
        if n not in tau_cache:
            if callable(machine) and not isinstance(machine, MachineSpec):
                tau_cache[n] = machine(n)
            else:
                r = run_machine(machine, ["1" * n], budget)
                tau_cache[n] = None if r.truncated else r.steps
        return tau_cache[n]

    entries = []
    for i, (k, l, t) in enumerate(triple_enumeration(i_max)):
        halts = {n: tau(n) for n in range(k, k + l + 1)}
        cond = all(v is not None for v in halts.values()) and max(halts.values()) == t
        L = b_read(i)
        plus = "+" * L
        if minus_string:
            word = "-" * L
        else:
            word = ("+" if i % 2 == 0 else "-") * L
        weights = [0] * 2 ** L
        if cond and word != plus:
            weights[_word_index(word)] = 2 ** (i - k)
            weights[0] = 2 ** i - 2 ** (i - k)
        else:
            weights[0] = 2 ** i
        entries.append(CofinalityEntry(i, (k, l, t), cond, halts, DyadicWordMeasure(i, tuple(weights), L)))
    if not refine:
        return entries, []
    path = []
    for e in entries:
        path.extend(_refine(e.measure))
    return entries, path


def _word_index(word: str) -> int:
    idx = 0
    for c in word:
        idx = 2 * idx + (c == "-")
    return idx


def _refine(target) -> list:
    """Path from the all-plus Dirac to ``target`` and back, moving one unit 2^{-i} per step."""
    from .measures import DyadicWordMeasure
    i, L = target.k, target.length
    moved = [(idx, w) for idx, w in enumerate(target.weights) if idx != 0 and w]
    cur = [0] * 2 ** L
    cur[0] = 2 ** i
    out = [DyadicWordMeasure(i, tuple(cur), L)]
    up = []
    for idx, w in moved:
        for _ in range(w):
            cur[0] -= 1
            cur[idx] += 1
            up.append(DyadicWordMeasure(i, tuple(cur), L))
    out.extend(up)
    out.extend(reversed(out[:-1]))
    return out


# step-count fits

@dataclass
class StepFit:
    """Constants for steps ~ c n log_b n on two ranges of n.

    ``c_fit`` is the least-squares constant for the worst-case time T(n) = max steps over
    inputs m <= n; ``c_bound`` is the smallest c with steps(n) <= c n log_b n on the range.
    """
    name: str
    b: int
    lo: tuple[int, int]
    hi: tuple[int, int]
    c_fit: tuple[float, float]
    c_bound: tuple[float, float]

    @property
    def drift(self) -> float:
        return abs(self.c_fit[0] - self.c_fit[1]) / self.c_fit[1]

    @property
    def bound_drift(self) -> float:
        return abs(self.c_bound[0] - self.c_bound[1]) / self.c_bound[1]

    def as_dict(self) -> dict:
        return {"name": self.name, "b": self.b, "lo": list(self.lo), "hi": list(self.hi),
                "c_fit": list(self.c_fit), "c_bound": list(self.c_bound),
                "drift": self.drift, "bound_drift": self.bound_drift}


def step_counts(name: str, b: int, n_max: int) -> list[int]:
    """steps(n) for n = 0..n_max on a builtin unary machine."""
    runs = run_unary_batch(BUILTINS[name](b), [(n,) for n in range(n_max + 1)])
    return [r.steps for r in runs]


def fit_step_constant(name: str, b: int, lo: tuple[int, int] = (500, 1000), hi: tuple[int, int] = (2500, 5000),
                      steps: Sequence[int] | None = None) -> StepFit:
    if name not in ("power_check", "floor_log", "nearest_power"):
        raise ValueError("fits are defined for the logarithmic machines")
    if not (2 <= lo[0] <= lo[1] and 2 <= hi[0] <= hi[1]):
        raise ValueError("ranges must start at n >= 2")
    top = max(lo[1], hi[1])
    steps = list(steps) if steps is not None else step_counts(name, b, top)
    worst, m = [], 0
    for s in steps[:top + 1]:
        m = max(m, s)
        worst.append(m)

    def ls(a, z):
        xs = [n * math.log(n, b) for n in range(a, z + 1)]
        return sum(x * worst[n] for x, n in zip(xs, range(a, z + 1))) / sum(x * x for x in xs)

    def bound(a, z):
        return max(steps[n] / (n * math.log(n, b)) for n in range(a, z + 1))
    return StepFit(name, b, lo, hi, (ls(*lo), ls(*hi)), (bound(*lo), bound(*hi)))
