"""A Robinson-type aperiodic tileset with Red/Black square parity, macro-tiles, and search tools.

Tiles are read off the ideal hierarchical picture. Coordinate x has level ``v2(x + 1) + 1``;
level-m crosses sit where row and column both have level m and point towards the centre of the
square of side 2^(m+1) containing them. Every other cell carries one vertical and one horizontal
line. A half line leaving a cross in one of its two corner directions is a square side ('B' odd
level, 'R' even level) and remembers which side the square lies on; the other two half lines are
free arms ('d' odd, 'o' even). Flows point away from the nearest cross and meet ('m') on the
row/column of a higher level. Level-1 crosses are the bumpy-corner tiles and each 2x2 square
contains exactly one of them.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .lattice import Alphabet, ForbiddenSet, Pattern, PeriodicPoint, Window, count_fault_energy, overlap_witness
from .tiledsl import EdgeTables, TilesetSpec, Tile, compile_tileset, format_tileset, load_corpus, parse_tileset, _bits

ORIENTATIONS = ("NE", "NW", "SE", "SW")
MAX_MACRO = 8
MAX_SIGNAL = 7


def level(x: int) -> int:
    y = x + 1
    return (y & -y).bit_length()


def _cross_orient(r: int, c: int, m: int, top: int | None, o: str) -> str:
    if m == top:
        return o
    q = (1 << (m - 1)) - 1
    v = "S" if r % (1 << (m + 1)) == q else "N"
    h = "E" if c % (1 << (m + 1)) == q else "W"
    return v + h


def _style(m: int, square: bool) -> str:
    if square:
        return "B" if m % 2 else "R"
    return "d" if m % 2 else "o"


def _line_part(along: int, across: int, top: int | None, o: str, vertical: bool) -> str:
    """Label part for the line through a cell; ``across`` is the coordinate fixing the line's level."""
    m = level(across)
    q = (1 << (m - 1)) - 1
    size = 1 << m
    j, s = divmod(along, size)
    pos = j * size + q
    if vertical:
        orient = _cross_orient(pos, across, m, top, o)
        fwd, back, other = "S", "N", orient[1]
    else:
        orient = _cross_orient(across, pos, m, top, o)
        fwd, back, other = "E", "W", orient[0]
    if s == size - 1:
        flow, d = "m", fwd
    elif s < q:
        flow, d = ("n" if vertical else "w"), back
    else:
        flow, d = ("s" if vertical else "e"), fwd
    sq = d in orient
    return _style(m, sq) + flow + (other.lower() if sq else "")


def cell_symbol(r: int, c: int, top: int | None = None, o: str = "SE") -> str:
    """Symbol at (r, c) of the ideal picture; crosses of level ``top`` take orientation ``o``."""
    a, b = level(r), level(c)
    if a == b:
        kind = "1" if a == 1 else ("B" if a % 2 else "R")
        return "X" + kind + _cross_orient(r, c, a, top, o)
    return _line_part(r, c, top, o, True) + "_" + _line_part(c, r, top, o, False)


# symbols and edges

def is_cross(sym: str) -> bool:
    return sym.startswith("X")


def parse_part(part: str) -> tuple[str, str, str]:
    return part[0], part[1], part[2:]


def _vertical_labels(style, flow, inside):
    top = "S" if flow in "sm" else "N"
    bot = "N" if flow in "nm" else "S"
    return style + top + inside, style + bot + inside


def _horizontal_labels(style, flow, inside):
    left = "E" if flow in "em" else "W"
    right = "W" if flow in "wm" else "E"
    return style + left + inside, style + right + inside


def edges_of(sym: str) -> tuple[str, str, str, str]:
    """(n, e, s, w) edge labels."""
    if is_cross(sym):
        kind, o = sym[1], sym[2:]
        odd = kind in "1B"

        def lab(d):
            sq = d in o
            st = ("B" if odd else "R") if sq else ("d" if odd else "o")
            if not sq:
                return st + d
            inside = (o[1] if d in "NS" else o[0]).lower()
            return st + d + inside
        return lab("N"), lab("E"), lab("S"), lab("W")
    v, h = sym.split("_")
    top, bot = _vertical_labels(*parse_part(v))
    left, right = _horizontal_labels(*parse_part(h))
    return top, right, bot, left


def is_bumpy(sym: str) -> bool:
    return sym.startswith("X1")


def is_red(sym: str) -> bool:
    """Carries a Red square line or is a Red corner."""
    if is_cross(sym):
        return sym[1] == "R"
    v, h = sym.split("_")
    return v[0] == "R" or h[0] == "R"


def even_parts(sym: str) -> list[str]:
    """Which lines of the cell sit on an even level: subset of ['v', 'h'], or ['x'] for a Red cross."""
    if is_cross(sym):
        return ["x"] if sym[1] == "R" else []
    v, h = sym.split("_")
    return [k for k, p in (("v", v), ("h", h)) if p[0] in "Ro"]


# macro-tiles

@dataclass(frozen=True)
class MacroTile:
    n: int
    orientation: str
    pattern: Pattern

    @property
    def side(self) -> int:
        return (1 << self.n) - 1


@lru_cache(maxsize=None)
def robinson_alphabet() -> Alphabet:
    return Alphabet(tuple(sorted(_ideal_symbols(7))))


def _ideal_symbols(n: int) -> set[str]:
    out: set[str] = set()
    side = (1 << n) - 1
    for o in ORIENTATIONS:
        for r in range(side):
            for c in range(side):
                out.add(cell_symbol(r, c, n, o))
    return out


def _check_orientation(o: str):
    if o not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")


def macro_rows(n: int, o: str = "SE") -> list[list[str]]:
    side = (1 << n) - 1
    return [[cell_symbol(r, c, n, o) for c in range(side)] for r in range(side)]


def build_macro_tile(n: int, orientation: str = "SE") -> MacroTile:
    if not 1 <= n <= MAX_MACRO:
        raise ValueError(f"macro-tile scale must lie in 1..{MAX_MACRO}")
    _check_orientation(orientation)
    return MacroTile(n, orientation, Pattern.from_rows(macro_rows(n, orientation), robinson_alphabet()))


def _part_of(sym: str, vertical: bool) -> str | None:
    if is_cross(sym):
        return None
    return sym.split("_")[0 if vertical else 1]


def assemble(quadrants: Sequence[MacroTile], orientation: str) -> MacroTile:
    """Glue four n-macro-tiles (NW, NE, SW, SE quadrants) around a new centre cross.

    The centre row and column are filled cell by cell with the unique symbol matching the
    neighbouring quadrant edges and carrying the new level's line; ambiguity raises.
    """
    _check_orientation(orientation)
    if len(quadrants) != 4 or len({q.n for q in quadrants}) != 1:
        raise ValueError("need four macro-tiles of the same scale")
    n = quadrants[0].n
    want = ("SE", "SW", "NE", "NW")
    for q, w in zip(quadrants, want):
        if q.orientation != w:
            raise ValueError(f"quadrant orientations must point to the centre {want}")
    s = (1 << n) - 1
    side = 2 * s + 1
    grid: list[list[str | None]] = [[None] * side for _ in range(side)]
    for q, (r0, c0) in zip(quadrants, ((0, 0), (0, s + 1), (s + 1, 0), (s + 1, s + 1))):
        for r, row in enumerate(q.pattern.rows()):
            grid[r0 + r][c0:c0 + s] = row
    alphabet = robinson_alphabet()
    m = n + 1
    centre = cell_symbol(s, s, m, orientation)
    grid[s][s] = centre
    cn, ce, cs, cw = edges_of(centre)
    for k in range(side):
        for r, c in ((s, k), (k, s)):
            if (r, c) == (s, s):
                continue
            vertical_new = c == s
            # the new line's label continues from the centre cross outward
            if vertical_new:
                lab = cn if r < s else cs
            else:
                lab = cw if c < s else ce
            style, inside = lab[0], lab[2:]
            flow = ("n" if r < s else "s") if vertical_new else ("w" if c < s else "e")
            new_part = style + flow + inside
            cands = []
            for sym in alphabet.symbols:
                if _part_of(sym, vertical_new) != new_part:
                    continue
                e = edges_of(sym)
                ok = True
                for (dr, dc, mine, theirs) in ((-1, 0, 0, 2), (1, 0, 2, 0), (0, -1, 3, 1), (0, 1, 1, 3)):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < side and 0 <= cc < side and grid[rr][cc] is not None and not (
                            rr == s or cc == s):
                        if edges_of(grid[rr][cc])[theirs] != e[mine]:
                            ok = False
                            break
                if ok:
                    cands.append(sym)
            if len(cands) != 1:
                raise ValueError(f"cross fill at {(r, c)} not forced: {cands}")
            grid[r][c] = cands[0]
    return MacroTile(m, orientation, Pattern.from_rows(grid, alphabet))


def quadrant_tiles(n: int) -> list[MacroTile]:
    return [build_macro_tile(n, o) for o in ("SE", "SW", "NE", "NW")]


# tileset generation and corpus

def robinson_tileset_spec() -> TilesetSpec:
    syms = robinson_alphabet().symbols
    tiles = tuple(Tile(s, (("robinson", s),), edges_of(s)) for s in syms)
    bumpy = tuple(s for s in syms if is_bumpy(s))
    return TilesetSpec("robinson-variant", (("robinson", syms),), tiles,
                       (("horizontal", "equal"), ("vertical", "equal")), (), (("bumpy", bumpy),), ("bumpy",), ())


def signal_symbol(sym: str, bits: dict[str, str]) -> str:
    parts = even_parts(sym)
    return f"{sym}|F|{''.join(bits[p] for p in parts)}"


def _signal_edges(sym: str, bits: dict[str, str]) -> tuple[str, ...]:
    e = list(edges_of(sym))
    if is_cross(sym):
        if "x" in bits:
            e = [x + bits["x"] for x in e]
        return tuple(e)
    if "v" in bits:
        e[0] += bits["v"]
        e[2] += bits["v"]
    if "h" in bits:
        e[1] += bits["h"]
        e[3] += bits["h"]
    return tuple(e)


def signal_tileset_spec() -> TilesetSpec:
    tiles = []
    layer_r, layer_b = set(), set()
    for s in robinson_alphabet().symbols:
        parts = even_parts(s)
        for combo in itertools.product("+-", repeat=len(parts)):
            bits = dict(zip(parts, combo))
            sid = signal_symbol(s, bits)
            b = "".join(combo) or "."
            layer_r.add(s)
            layer_b.add(b)
            tiles.append(Tile(sid, (("phase", "F"), ("robinson", s), ("signal", b)), _signal_edges(s, bits)))
    bumpy = tuple(t.id for t in tiles if is_bumpy(t.id))
    return TilesetSpec("a0-signal", (("phase", ("F", "B", "H")), ("robinson", tuple(sorted(layer_r))),
                                      ("signal", tuple(sorted(layer_b)))),
                       tuple(tiles), (("horizontal", "equal"), ("vertical", "equal")), (), (("bumpy", bumpy),),
                       ("bumpy",), ())


def write_corpus(directory) -> None:
    import pathlib
    d = pathlib.Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "robinson-variant.tiledsl").write_text(_corpus_header("Robinson-type tileset with square parity")
                                                + format_tileset(robinson_tileset_spec()))
    (d / "a0-signal.tiledsl").write_text(_corpus_header("all-F tiles with one bit per even-level line")
                                         + format_tileset(signal_tileset_spec()))


def _corpus_header(what: str) -> str:
    return f"# {what}; generated by chaoscope.robinson.write_corpus\n"


@lru_cache(maxsize=None)
def robinson_spec() -> TilesetSpec:
    return load_corpus("robinson-variant")


@lru_cache(maxsize=None)
def robinson_forbidden() -> ForbiddenSet:
    return compile_tileset(robinson_spec())


@lru_cache(maxsize=None)
def signal_spec() -> TilesetSpec:
    return load_corpus("a0-signal")


@lru_cache(maxsize=None)
def signal_forbidden() -> ForbiddenSet:
    return compile_tileset(signal_spec())


def macro_energy(mt: MacroTile) -> int:
    return count_fault_energy(mt.pattern, robinson_forbidden())


# constraint search on windows and tori

@dataclass
class SearchResult:
    status: str  # Proved | Counterexample | Exhausted   (covering)   /   NONE | FOUND | Exhausted  (torus)
    witness: Pattern | None
    nodes: int
    seconds: float
    frontier: dict | None = None


class _Grid:
    """Bitmask domains on an h x w grid (optionally a torus) with edge, 2x2 and exclusion propagation."""

    def __init__(self, tables: EdgeTables, h: int, w: int, torus: bool = False,
                 excluded: Sequence[Sequence[Sequence[str]]] = ()):
        self.E = tables
        self.h, self.w, self.torus = h, w, torus
        self.N = h * w
        n = len(tables.ids)
        self.full = (1 << n) - 1
        self._sup: list[dict[int, int]] = [{}, {}, {}, {}]
        self._tabs = [tables.up, tables.right, tables.down, tables.left]  # neighbour N, E, S, W
        self.nbrs: list[list[tuple[int, int]]] = []
        for r in range(h):
            for c in range(w):
                lst = []
                for d, (dr, dc) in enumerate(((-1, 0), (0, 1), (1, 0), (0, -1))):
                    rr, cc = r + dr, c + dc
                    if torus:
                        rr, cc = rr % h, cc % w
                    elif not (0 <= rr < h and 0 <= cc < w):
                        continue
                    lst.append((d, rr * w + cc))
                self.nbrs.append(lst)
        # 2x2 windows
        self.blocks: list[tuple[int, int, int, int]] = []
        rr = range(h) if torus else range(h - 1)
        cr = range(w) if torus else range(w - 1)
        for r in rr:
            for c in cr:
                cells = [((r + a) % h) * w + (c + b) % w for a in (0, 1) for b in (0, 1)]
                self.blocks.append(tuple(cells))
        self.cell_blocks: list[list[int]] = [[] for _ in range(self.N)]
        for bi, b in enumerate(self.blocks):
            for x in set(b):
                self.cell_blocks[x].append(bi)
        # excluded sub-patterns (as lists of (cell, tile index))
        idx = tables.index
        self.excl: list[list[tuple[int, int]]] = []
        for pat in excluded:
            ph, pw = len(pat), len(pat[0])
            for r in range(h - ph + 1):
                for c in range(w - pw + 1):
                    self.excl.append([((r + a) * w + c + b, idx[pat[a][b]]) for a in range(ph) for b in range(pw)])
        self.cell_excl: list[list[int]] = [[] for _ in range(self.N)]
        for ei, e in enumerate(self.excl):
            for x, _ in e:
                self.cell_excl[x].append(ei)

    def support(self, d: int, D: int) -> int:
        memo = self._sup[d]
        s = memo.get(D)
        if s is None:
            s = 0
            tab = self._tabs[d]
            for i in _bits(D):
                s |= tab[i]
            memo[D] = s
        return s

    def propagate(self, doms: list[int], queue: list[int]) -> bool:
        onecls = self.E.exactly_one
        inq = set(queue)
        while queue:
            x = queue.pop()
            inq.discard(x)
            D = doms[x]
            for d, y in self.nbrs[x]:
                nd = doms[y] & self.support(d, D)
                if nd != doms[y]:
                    if not nd:
                        return False
                    doms[y] = nd
                    if y not in inq:
                        queue.append(y)
                        inq.add(y)
            for cm in onecls:
                for bi in self.cell_blocks[x]:
                    cells = self.blocks[bi]
                    definite = [y for y in cells if doms[y] & ~cm == 0]
                    possible = [y for y in cells if doms[y] & cm]
                    if len(definite) > 1 or not possible:
                        return False
                    if len(definite) == 1:
                        for y in cells:
                            if y != definite[0] and doms[y] & cm:
                                doms[y] &= ~cm
                                if not doms[y]:
                                    return False
                                if y not in inq:
                                    queue.append(y)
                                    inq.add(y)
                    elif len(possible) == 1:
                        y = possible[0]
                        if doms[y] & ~cm:
                            doms[y] &= cm
                            if y not in inq:
                                queue.append(y)
                                inq.add(y)
            for ei in self.cell_excl[x]:
                open_cell = None
                dead = False
                nopen = 0
                for y, t in self.excl[ei]:
                    bit = 1 << t
                    if not doms[y] & bit:
                        dead = True
                        break
                    if doms[y] != bit:
                        nopen += 1
                        open_cell = (y, bit)
                if dead:
                    continue
                if nopen == 0:
                    return False
                if nopen == 1:
                    y, bit = open_cell
                    doms[y] &= ~bit
                    if y not in inq:
                        queue.append(y)
                        inq.add(y)
        return True

    def spiral(self) -> list[int]:
        cr, cc = (self.h - 1) / 2, (self.w - 1) / 2
        return sorted(range(self.N), key=lambda x: (max(abs(x // self.w - cr), abs(x % self.w - cc)),
                                                    abs(x // self.w - cr) + abs(x % self.w - cc), x))

    def search(self, budget: int | None, doms: list[int] | None = None):
        """First complete assignment, None if none exists; raises _Budget when out of nodes."""
        doms = list(doms) if doms is not None else [self.full] * self.N
        rank = {x: i for i, x in enumerate(self.spiral())}
        nodes = [0]
        self.frontier = {"max_depth": 0}
        if not self.propagate(doms, list(range(self.N))):
            return None, nodes[0]

        def rec(doms, depth):
            best, bx = None, None
            for x in range(self.N):
                k = bin(doms[x]).count("1")
                if k > 1 and (best is None or (k, rank[x]) < best):
                    best, bx = (k, rank[x]), x
            if bx is None:
                return doms
            self.frontier["max_depth"] = max(self.frontier["max_depth"], depth)
            for t in _bits(doms[bx]):
                nodes[0] += 1
                if budget is not None and nodes[0] > budget:
                    raise _Budget(nodes[0])
                nd = list(doms)
                nd[bx] = 1 << t
                if self.propagate(nd, [bx]):
                    got = rec(nd, depth + 1)
                    if got is not None:
                        return got
            return None

        return rec(doms, 0), nodes[0]

    def to_pattern(self, doms: list[int], alphabet: Alphabet) -> Pattern:
        ids = self.E.ids
        rows = [[ids[_bits(doms[r * self.w + c])[0]] for c in range(self.w)] for r in range(self.h)]
        return Pattern.from_rows(rows, alphabet)


class _Budget(Exception):
    pass


def covering_window(n: int) -> int:
    return 2 * ((1 << n) - 1) + 5


def verify_covering(n: int, budget: int | None = 10**9, spec: TilesetSpec | None = None,
                    window: int | None = None) -> SearchResult:
    """Search for a locally admissible square window containing no n-macro-tile (any orientation).

    Proved: none exists. Counterexample: one was found. Exhausted: budget ran out first.
    """
    if n not in (1, 2) and window is None:
        raise ValueError("covering is checked for n in {1, 2}")
    spec = spec or robinson_spec()
    E = EdgeTables(spec)
    side = window or covering_window(n)
    excluded = [macro_rows(n, o) for o in ORIENTATIONS]
    g = _Grid(E, side, side, excluded=excluded)
    t0 = time.perf_counter()
    try:
        sol, nodes = g.search(budget)
    except _Budget as exc:
        return SearchResult("Exhausted", None, exc.args[0], time.perf_counter() - t0, dict(g.frontier))
    dt = time.perf_counter() - t0
    if sol is None:
        return SearchResult("Proved", None, nodes, dt, dict(g.frontier))
    return SearchResult("Counterexample", g.to_pattern(sol, Alphabet(tuple(E.ids))), nodes, dt, dict(g.frontier))


def check_no_torus_tiling(p_max: int, spec: TilesetSpec | None = None, budget: int | None = 10**8) -> dict[int, SearchResult]:
    """For each period p <= p_max, look for a p x p toroidal tiling. Expected verdict: NONE."""
    if p_max > 8:
        raise ValueError("p_max must be at most 8")
    spec = spec or robinson_spec()
    E = EdgeTables(spec)
    out = {}
    for p in range(1, p_max + 1):
        g = _Grid(E, p, p, torus=True)
        t0 = time.perf_counter()
        try:
            sol, nodes = g.search(budget)
        except _Budget as exc:
            out[p] = SearchResult("Exhausted", None, exc.args[0], time.perf_counter() - t0)
            continue
        dt = time.perf_counter() - t0
        out[p] = (SearchResult("NONE", None, nodes, dt) if sol is None else
                  SearchResult("FOUND", g.to_pattern(sol, Alphabet(tuple(E.ids))), nodes, dt))
    return out


def solve_window(spec: TilesetSpec, h: int, w: int | None = None, torus: bool = False,
                 budget: int | None = 10**7) -> SearchResult:
    """Find one locally admissible h x w tiling (FOUND), prove there is none (NONE) or run out (Exhausted)."""
    w = w or h
    if h < 1 or w < 1:
        raise ValueError("window sides must be positive")
    E = EdgeTables(spec)
    g = _Grid(E, h, w, torus=torus)
    t0 = time.perf_counter()
    try:
        sol, nodes = g.search(budget)
    except _Budget as exc:
        return SearchResult("Exhausted", None, exc.args[0], time.perf_counter() - t0, dict(g.frontier))
    dt = time.perf_counter() - t0
    if sol is None:
        return SearchResult("NONE", None, nodes, dt)
    return SearchResult("FOUND", g.to_pattern(sol, Alphabet(tuple(E.ids))), nodes, dt)


def macro_overlap_witness(n: int):
    """Offset at which two n-macro-tiles (any orientations) agree on their overlap, or None."""
    Q = [build_macro_tile(n, o).pattern for o in ORIENTATIONS]
    return overlap_witness(Q, (1 << n) - 1, 2)


# phase layer: F (frozen), B (border), H (hot)

PHASES = ("F", "B", "H")


@lru_cache(maxsize=None)
def phase_alphabet() -> Alphabet:
    out = []
    for s in robinson_alphabet().symbols:
        for p in PHASES:
            if p != "B" or is_red(s):
                out.append(f"{s}|{p}")
    return Alphabet(tuple(out))


def _straight_red(sym: str) -> tuple[str, str] | None:
    """('v' or 'h', inside side) when the cell carries a straight Red square line."""
    if is_cross(sym):
        return None
    v, h = sym.split("_")
    if v[0] == "R":
        return "v", v[2]
    if h[0] == "R":
        return "h", h[2]
    return None


_TRIPLES_OK = {("F", "F", "F"), ("H", "H", "H"), ("H", "B", "F")}


@lru_cache(maxsize=None)
def phase_forbidden() -> ForbiddenSet:
    """Phase violations among Robinson-compatible pairs and triples (Robinson mismatches excluded)."""
    E = EdgeTables(robinson_spec())
    ids = E.ids
    alpha = phase_alphabet()
    ph = {s: [p for p in PHASES if f"{s}|{p}" in alpha] for s in ids}
    pairs_h, pairs_v = set(), set()
    for i, a in enumerate(ids):
        for d, tab, store, side in ((0, E.right, pairs_h, 1), (1, E.down, pairs_v, 2)):
            for j in _bits(tab[i]):
                b = ids[j]
                red_edge = edges_of(a)[side].startswith("R")
                constrained = red_edge or (not is_red(a) and not is_red(b))
                if not constrained:
                    continue
                for pa in ph[a]:
                    for pb in ph[b]:
                        if pa != pb:
                            store.add((f"{a}|{pa}", f"{b}|{pb}"))
    trip_h, trip_v = set(), set()
    for j, mid in enumerate(ids):
        sr = _straight_red(mid)
        if sr is None:
            continue
        kind, inside = sr
        if kind == "v":
            before, after, store = E.left[j], E.right[j], trip_h
            first_is_inside = inside == "w"
        else:
            before, after, store = E.up[j], E.down[j], trip_v
            first_is_inside = inside == "n"
        for i in _bits(before):
            for k in _bits(after):
                a, b = ids[i], ids[k]
                for pa in ph[a]:
                    for pm in ph[mid]:
                        for pb in ph[b]:
                            out_in = (pb, pm, pa) if first_is_inside else (pa, pm, pb)
                            if out_in not in _TRIPLES_OK:
                                store.add((f"{a}|{pa}", f"{mid}|{pm}", f"{b}|{pb}"))
    return ForbiddenSet.from_blocks(alpha, {(1, 2): pairs_h, (2, 1): pairs_v, (1, 3): trip_h, (3, 1): trip_v})


@dataclass(frozen=True)
class PhasePattern:
    base: Pattern
    phase: tuple[str, ...]

    def __post_init__(self):
        if len(self.phase) != len(self.base.cells):
            raise ValueError("one phase per cell")
        for s, p in zip(self.base.cells, self.phase):
            if p not in PHASES:
                raise ValueError(f"bad phase {p!r}")
            if p == "B" and not is_red(s):
                raise ValueError(f"phase B on a cell without a Red line ({s})")

    @property
    def pattern(self) -> Pattern:
        return Pattern(self.base.window, tuple(f"{s}|{p}" for s, p in zip(self.base.cells, self.phase)),
                       phase_alphabet())

    def energy(self) -> int:
        return count_fault_energy(self.base, robinson_forbidden()) + count_fault_energy(self.pattern, phase_forbidden())


def uniform_phase(base: Pattern, p: str = "F") -> PhasePattern:
    return PhasePattern(base, (p,) * len(base.cells))


def bordered_phase(mt: MacroTile, inside: str = "F", border: str = "B", outside: str = "H") -> PhasePattern:
    """Mark the central Red square of an odd-scale macro-tile: its lines ``border``, interior ``inside``."""
    n = mt.n
    if n % 2 == 0 or n < 3:
        raise ValueError("the central Red square exists for odd n >= 3")
    a, b = (1 << (n - 2)) - 1, 3 * (1 << (n - 2)) - 1
    side = mt.side
    ph = []
    for r in range(side):
        for c in range(side):
            on = (r in (a, b) and a <= c <= b) or (c in (a, b) and a <= r <= b)
            if on:
                ph.append(border)
            elif a < r < b and a < c < b:
                ph.append(inside)
            else:
                ph.append(outside)
    return PhasePattern(mt.pattern, tuple(ph))


# signal layer: all-F tiles, one bit per even-level line

def parse_signal_word(word: str) -> str:
    """Accepts '+1-1' or '+-'; returns the compact form."""
    w = word.replace("+1", "+").replace("-1", "-")
    if not w or any(ch not in "+-" for ch in w):
        raise ValueError(f"bad signal word {word!r}")
    return w


def _signal_cell(r: int, c: int, top: int, o: str, bit_of_level) -> str:
    s = cell_symbol(r, c, top, o)
    bits = {}
    for p in even_parts(s):
        L = level(c) if p == "v" else level(r)
        bits[p] = bit_of_level(L)
    return signal_symbol(s, bits)


def _bit_fn(word: str):
    def bit(L):
        j = L // 2 - 1
        return word[j] if j < len(word) else "+"
    return bit


@dataclass(frozen=True)
class SignalPattern:
    word: str
    n: int
    base: MacroTile
    pattern: Pattern

    def energy(self) -> int:
        return count_fault_energy(self.pattern, signal_forbidden())

    def periodic_point(self) -> PeriodicPoint:
        return signal_periodic_point(self.word)


@lru_cache(maxsize=None)
def signal_alphabet() -> Alphabet:
    return Alphabet(tuple(sorted(signal_spec().ids)))


def encode_signal_configuration(word: str, n: int | None = None) -> SignalPattern:
    w = parse_signal_word(word)
    need = 2 * len(w) + 1
    if n is None:
        n = need
    if n != need:
        raise ValueError(f"scale must be 2|w|+1 = {need}, got {n}")
    if n > MAX_SIGNAL:
        raise ValueError(f"scale {n} exceeds the guard {MAX_SIGNAL}")
    side = (1 << n) - 1
    bit = _bit_fn(w)
    rows = [[_signal_cell(r, c, n, "SE", bit) for c in range(side)] for r in range(side)]
    return SignalPattern(w, n, build_macro_tile(n, "SE"), Pattern.from_rows(rows, signal_alphabet()))


@lru_cache(maxsize=None)
def signal_periodic_point(word: str) -> PeriodicPoint:
    """Period 2^(n+1) block cut from the top-left of an ideal (n+2)-tile carrying the word."""
    w = parse_signal_word(word)
    n = 2 * len(w) + 1
    if n > MAX_SIGNAL:
        raise ValueError(f"scale {n} exceeds the guard {MAX_SIGNAL}")
    per = 1 << (n + 1)
    bit = _bit_fn(w)
    rows = [[_signal_cell(r, c, n + 2, "SE", bit) for c in range(per)] for r in range(per)]
    return PeriodicPoint(Pattern.from_rows(rows, signal_alphabet()))


def signal_pair(word_a: str, word_b: str) -> Pattern:
    """Two signal macro-tiles side by side in their common parent, with the parent's column between."""
    a, b = parse_signal_word(word_a), parse_signal_word(word_b)
    if len(a) != len(b):
        raise ValueError("words of equal length needed")
    n = 2 * len(a) + 1
    s = (1 << n) - 1
    ba, bb = _bit_fn(a), _bit_fn(b)
    rows = []
    for r in range(s):
        row = []
        for c in range(2 * s + 1):
            row.append(_signal_cell(r, c, n + 1, "SE", ba if c <= s else bb))
        rows.append(row)
    return Pattern.from_rows(rows, signal_alphabet())


def q_marker_set(k: int) -> list[MacroTile]:
    """Marker patterns: the n_k-macro-tiles in all orientations (k = 0: n = 3; k = 1: n = 7)."""
    if k not in (0, 1):
        raise ValueError("only k = 0 and k = 1 are materialized")
    n = 3 if k == 0 else 7
    return [build_macro_tile(n, o) for o in ORIENTATIONS]


# schematic SVG

_COLOURS = {"X1": "#333333", "XB": "#000000", "XR": "#c0392b", "B": "#555555", "R": "#e74c3c",
            "d": "#bbbbbb", "o": "#f5b7b1"}


def pattern_svg(p: Pattern, cell: int = 12) -> str:
    """Symbol-coloured grid: crosses filled, line styles drawn as strokes."""
    rows = p.rows()
    h, w = len(rows), len(rows[0])
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" height="{h * cell}" '
           f'viewBox="0 0 {w * cell} {h * cell}">', f'<rect width="100%" height="100%" fill="white"/>']
    half = cell / 2
    for r, row in enumerate(rows):
        for c, full in enumerate(row):
            sym = full.split("|")[0]
            x, y = c * cell, r * cell
            if sym in robinson_alphabet():
                if is_cross(sym):
                    out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_COLOURS[sym[:2]]}"/>')
                else:
                    v, hz = sym.split("_")
                    out.append(f'<line x1="{x + half}" y1="{y}" x2="{x + half}" y2="{y + cell}" '
                               f'stroke="{_COLOURS[v[0]]}" stroke-width="2"/>')
                    out.append(f'<line x1="{x}" y1="{y + half}" x2="{x + cell}" y2="{y + half}" '
                               f'stroke="{_COLOURS[hz[0]]}" stroke-width="2"/>')
            else:
                out.append(f'<text x="{x + 2}" y="{y + cell - 2}" font-size="{cell - 2}">{sym}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
