"""A small line-oriented language for layered Wang tilesets, compiled to forbidden patterns.

Format::

    tiledsl 1
    name <id>
    LAYERS
      <layer> : <sym> <sym> ...
    TILES
      tile <id> <layer>=<sym> ... n=<label> e=<label> s=<label> w=<label> [ne= se= sw= nw=]
    RULES
      match horizontal|vertical|corners equal|flip
      flip <label> <label>
      class <name> : <id> <id> ...
      exactly-one 2x2 <class>
    FORBID
      pattern <rows>x<cols> <id> ...

Blank lines and ``#`` comments are ignored. Sections appear in this order; each may be empty.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .lattice import Alphabet, ForbiddenSet

HEADER = "tiledsl 1"
SECTIONS = ("LAYERS", "TILES", "RULES", "FORBID")
SIDES = ("n", "e", "s", "w")
CORNERS = ("ne", "se", "sw", "nw")
_TOKEN = re.compile(r"[A-Za-z0-9_|+\-.]+")


class TilesetError(ValueError):
    def __init__(self, line: int, col: int, message: str, expected: tuple[str, ...] = ()):
        self.line, self.col, self.expected = line, col, expected
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


@dataclass(frozen=True)
class Tile:
    id: str
    symbols: tuple[tuple[str, str], ...]  # (layer, symbol)
    edges: tuple[str, str, str, str]  # n e s w
    corners: tuple[str, str, str, str] | None = None  # ne se sw nw
    line: int = field(default=0, compare=False)

    def edge(self, side: str) -> str:
        return self.edges[SIDES.index(side)]


@dataclass(frozen=True)
class TilesetSpec:
    name: str
    layers: tuple[tuple[str, tuple[str, ...]], ...]
    tiles: tuple[Tile, ...]
    matches: tuple[tuple[str, str], ...]  # (direction, mode)
    flips: tuple[tuple[str, str], ...]
    classes: tuple[tuple[str, tuple[str, ...]], ...]
    exactly_one: tuple[str, ...]
    forbid: tuple[tuple[tuple[int, int], tuple[str, ...]], ...]

    def tile(self, tid: str) -> Tile:
        for t in self.tiles:
            if t.id == tid:
                return t
        raise KeyError(tid)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tiles]

    def class_members(self, name: str) -> tuple[str, ...]:
        return dict(self.classes)[name]

    def flip_map(self) -> dict[str, str]:
        m: dict[str, str] = {}
        for a, b in self.flips:
            m[a], m[b] = b, a
        return m

    def without(self, *, match: str | None = None, exactly_one: str | None = None) -> "TilesetSpec":
        """Copy with one matching rule or one 2x2 directive dropped (for weakened fixtures)."""
        ms = tuple(m for m in self.matches if m[0] != match)
        eo = tuple(c for c in self.exactly_one if c != exactly_one)
        return TilesetSpec(self.name + "-weakened", self.layers, self.tiles, ms, self.flips, self.classes, eo,
                           self.forbid)

    def canonical(self) -> "TilesetSpec":
        """Structural normal form: declaration order and layout do not matter."""
        return TilesetSpec(self.name, tuple(sorted(self.layers)),
                           tuple(sorted((Tile(t.id, t.symbols, t.edges, t.corners) for t in self.tiles),
                                        key=lambda t: t.id)),
                           tuple(sorted(set(self.matches))), tuple(sorted(tuple(sorted(f)) for f in set(self.flips))),
                           tuple(sorted((c, tuple(sorted(m))) for c, m in self.classes)),
                           tuple(sorted(set(self.exactly_one))), tuple(sorted(set(self.forbid))))


# parsing

class _Lines:
    def __init__(self, text: str):
        self.items: list[tuple[int, list[tuple[int, str]]]] = []
        for no, raw in enumerate(text.splitlines(), 1):
            body = raw.split("#", 1)[0]
            toks = []
            pos = 0
            while pos < len(body):
                if body[pos].isspace():
                    pos += 1
                    continue
                if body[pos] in ":=":
                    toks.append((pos + 1, body[pos]))
                    pos += 1
                    continue
                m = _TOKEN.match(body, pos)
                if not m:
                    raise TilesetError(no, pos + 1, f"unexpected character {body[pos]!r}")
                toks.append((pos + 1, m.group()))
                pos = m.end()
            if toks:
                self.items.append((no, toks))
        self.i = 0

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else None

    def next(self):
        it = self.peek()
        self.i += 1
        return it


def _expect_len(no, toks, n, what):
    if len(toks) < n:
        last = toks[-1]
        raise TilesetError(no, last[0] + len(last[1]), f"incomplete {what}", (what,))


def parse_tileset(text: str | bytes) -> TilesetSpec:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    L = _Lines(text)
    first = L.next()
    if first is None:
        raise TilesetError(1, 1, "empty input", (HEADER,))
    no, toks = first
    if [t for _, t in toks] != ["tiledsl", "1"]:
        raise TilesetError(no, toks[0][0], "bad header", (HEADER,))
    name = "unnamed"
    it = L.peek()
    if it and it[1][0][1] == "name":
        no, toks = L.next()
        if len(toks) != 2:
            raise TilesetError(no, toks[0][0], "name takes one identifier", ("identifier",))
        name = toks[1][1]

    layers: list[tuple[str, tuple[str, ...]]] = []
    tiles: list[Tile] = []
    matches: list[tuple[str, str]] = []
    flips: list[tuple[str, str]] = []
    classes: list[tuple[str, tuple[str, ...]]] = []
    exactly: list[str] = []
    forbid: list[tuple[tuple[int, int], tuple[str, ...]]] = []
    positions: dict[str, tuple[int, int]] = {}
    seen_ids: dict[str, int] = {}
    class_lines: dict[str, int] = {}
    rule_pos: dict[str, list] = {"flip": [], "exactly-one": [], "match": []}

    section = None
    order = list(SECTIONS)
    while (it := L.next()) is not None:
        no, toks = it
        head = toks[0][1]
        if head in SECTIONS:
            if len(toks) != 1:
                raise TilesetError(no, toks[1][0], "section header stands alone", ("newline",))
            if head not in order:
                raise TilesetError(no, toks[0][0], f"section {head} out of order or repeated", tuple(order))
            order = order[order.index(head) + 1:]
            section = head
            continue
        if section is None:
            raise TilesetError(no, toks[0][0], f"unexpected {head!r}", SECTIONS)
        if section == "LAYERS":
            _expect_len(no, toks, 2, "':'")
            if toks[1][1] != ":":
                raise TilesetError(no, toks[1][0], "expected ':' after layer name", ("':'",))
            if any(l == head for l, _ in layers):
                raise TilesetError(no, toks[0][0], f"duplicate layer {head!r}")
            syms = tuple(t for _, t in toks[2:])
            if len(set(syms)) != len(syms):
                raise TilesetError(no, toks[0][0], f"duplicate symbol in layer {head!r}")
            layers.append((head, syms))
        elif section == "TILES":
            tiles.append(_parse_tile(no, toks, dict(layers), seen_ids))
            positions[tiles[-1].id] = (no, toks[1][0])
        elif section == "RULES":
            _parse_rule(no, toks, matches, flips, classes, exactly, class_lines)
            if toks[0][1] in rule_pos:
                rule_pos[toks[0][1]].append((no, [c for c, _ in toks[1:]][-2:] if toks[0][1] == "flip"
                                             else [toks[-1][0]]))
        else:
            if head != "pattern":
                raise TilesetError(no, toks[0][0], f"unexpected {head!r}", ("pattern",))
            _expect_len(no, toks, 2, "shape")
            m = re.fullmatch(r"([12])x([12])", toks[1][1])
            if not m:
                raise TilesetError(no, toks[1][0], "bad pattern shape", ("1x2", "2x1", "2x2"))
            shape = (int(m.group(1)), int(m.group(2)))
            cells = tuple(t for _, t in toks[2:])
            if len(cells) != shape[0] * shape[1]:
                raise TilesetError(no, toks[1][0], f"shape {toks[1][1]} needs {shape[0] * shape[1]} tile ids")
            for (col, t) in toks[2:]:
                if t not in seen_ids:
                    raise TilesetError(no, col, f"undefined tile {t!r}")
            forbid.append((shape, cells))

    # cross references
    labels = {lab for t in tiles for lab in t.edges + (t.corners or ())}
    for (a, b), (fno, fcols) in zip(flips, rule_pos["flip"]):
        for lab, col in zip((a, b), fcols):
            if lab not in labels:
                raise TilesetError(fno, col, f"flip references undefined label {lab!r}")
    for cname, members in classes:
        for mbr in members:
            if mbr not in seen_ids:
                line = class_lines[cname]
                raise TilesetError(line, 1, f"class {cname} references undefined tile {mbr!r}")
    cnames = {c for c, _ in classes}
    for c, (eno, ecols) in zip(exactly, rule_pos["exactly-one"]):
        if c not in cnames:
            raise TilesetError(eno, ecols[0], f"exactly-one references undefined class {c!r}")
    for (d, _), (mno, mcols) in zip(matches, rule_pos["match"]):
        if d == "corners":
            for t in tiles:
                if t.corners is None:
                    raise TilesetError(t.line, 1, f"corner matching (line {mno}) needs corner labels on tile {t.id}")
    return TilesetSpec(name, tuple(layers), tuple(tiles), tuple(matches), tuple(flips), tuple(classes),
                       tuple(exactly), tuple(forbid))


def _parse_tile(no, toks, layers, seen_ids) -> Tile:
    if toks[0][1] != "tile":
        raise TilesetError(no, toks[0][0], f"unexpected {toks[0][1]!r}", ("tile",))
    _expect_len(no, toks, 2, "tile id")
    tid = toks[1][1]
    if tid in seen_ids:
        raise TilesetError(no, toks[1][0], f"duplicate tile id {tid!r} (lines {seen_ids[tid]} and {no})")
    seen_ids[tid] = no
    kv: dict[str, str] = {}
    rest = toks[2:]
    if len(rest) % 3:
        raise TilesetError(no, rest[-1][0], "expected key=value", ("key=value",))
    for i in range(0, len(rest), 3):
        (kc, k), (ec, eq), (vc, v) = rest[i:i + 3]
        if eq != "=":
            raise TilesetError(no, ec, "expected '='", ("'='",))
        if k in kv:
            raise TilesetError(no, kc, f"repeated key {k!r}")
        if k not in SIDES and k not in CORNERS and k not in layers:
            raise TilesetError(no, kc, f"unknown key {k!r}", SIDES + CORNERS + tuple(layers))
        if k in layers and v not in layers[k]:
            raise TilesetError(no, vc, f"undefined symbol {v!r} for layer {k!r}")
        kv[k] = v
    for s in SIDES:
        if s not in kv:
            raise TilesetError(no, toks[-1][0], f"tile {tid} lacks edge {s}", (f"{s}=",))
    got_c = [c for c in CORNERS if c in kv]
    if got_c and len(got_c) != 4:
        raise TilesetError(no, toks[-1][0], "corner labels come as a group of four", CORNERS)
    syms = tuple((l, kv[l]) for l in layers if l in kv)
    return Tile(tid, syms, tuple(kv[s] for s in SIDES), tuple(kv[c] for c in CORNERS) if got_c else None, no)


def _parse_rule(no, toks, matches, flips, classes, exactly, class_lines):
    head = toks[0][1]
    if head == "match":
        _expect_len(no, toks, 3, "mode")
        d, mode = toks[1][1], toks[2][1]
        if d not in ("horizontal", "vertical", "corners"):
            raise TilesetError(no, toks[1][0], "bad direction", ("horizontal", "vertical", "corners"))
        if mode not in ("equal", "flip"):
            raise TilesetError(no, toks[2][0], "bad mode", ("equal", "flip"))
        if any(m[0] == d for m in matches):
            raise TilesetError(no, toks[1][0], f"duplicate match rule for {d}")
        matches.append((d, mode))
    elif head == "flip":
        if len(toks) != 3:
            raise TilesetError(no, toks[0][0], "flip takes two labels", ("label label",))
        flips.append((toks[1][1], toks[2][1]))
    elif head == "class":
        _expect_len(no, toks, 3, "':'")
        if toks[2][1] != ":":
            raise TilesetError(no, toks[2][0], "expected ':'", ("':'",))
        cname = toks[1][1]
        if cname in class_lines:
            raise TilesetError(no, toks[1][0], f"duplicate class {cname!r} (lines {class_lines[cname]} and {no})")
        class_lines[cname] = no
        classes.append((cname, tuple(t for _, t in toks[3:])))
    elif head == "exactly-one":
        if len(toks) != 3 or toks[1][1] != "2x2":
            raise TilesetError(no, toks[0][0], "expected 'exactly-one 2x2 <class>'", ("2x2",))
        exactly.append(toks[2][1])
    else:
        raise TilesetError(no, toks[0][0], f"unknown rule {head!r}", ("match", "flip", "class", "exactly-one"))


# formatting

def format_tileset(spec: TilesetSpec) -> str:
    s = spec.canonical()
    out = [HEADER, f"name {s.name}", "LAYERS"]
    for l, syms in s.layers:
        out.append(f"  {l} : {' '.join(syms)}")
    out.append("TILES")
    for t in s.tiles:
        parts = [f"tile {t.id}"] + [f"{l}={v}" for l, v in t.symbols] + [f"{k}={v}" for k, v in zip(SIDES, t.edges)]
        if t.corners:
            parts += [f"{k}={v}" for k, v in zip(CORNERS, t.corners)]
        out.append("  " + " ".join(parts))
    out.append("RULES")
    out += [f"  match {d} {m}" for d, m in s.matches]
    out += [f"  flip {a} {b}" for a, b in s.flips]
    out += [f"  class {c} : {' '.join(m)}" for c, m in s.classes]
    out += [f"  exactly-one 2x2 {c}" for c in s.exactly_one]
    out.append("FORBID")
    out += [f"  pattern {r}x{c} {' '.join(cells)}" for (r, c), cells in s.forbid]
    return "\n".join(out) + "\n"


# compilation

class EdgeTables:
    """Per-direction compatibility of tile indices derived from the matching rules."""

    def __init__(self, spec: TilesetSpec):
        self.ids = sorted(spec.ids)
        self.index = {t: i for i, t in enumerate(self.ids)}
        tiles = [spec.tile(t) for t in self.ids]
        modes = dict(spec.matches)
        fm = spec.flip_map()

        def ok(mode, a, b):
            if mode is None:
                return True
            return a == b if mode == "equal" else fm.get(a, a) == b

        n = len(tiles)
        hm, vm = modes.get("horizontal"), modes.get("vertical")
        # right[i]: tiles allowed right of i; down[i]: tiles allowed below i
        by_w: dict[str, list[int]] = {}
        by_n: dict[str, list[int]] = {}
        for j, t in enumerate(tiles):
            by_w.setdefault(t.edges[3], []).append(j)
            by_n.setdefault(t.edges[0], []).append(j)
        self.right: list[int] = []
        self.down: list[int] = []
        full = (1 << n) - 1
        for t in tiles:
            if hm is None:
                self.right.append(full)
            else:
                want = t.edges[1] if hm == "equal" else fm.get(t.edges[1], t.edges[1])
                self.right.append(sum(1 << j for j in by_w.get(want, ())))
            if vm is None:
                self.down.append(full)
            else:
                want = t.edges[2] if vm == "equal" else fm.get(t.edges[2], t.edges[2])
                self.down.append(sum(1 << j for j in by_n.get(want, ())))
        self.left = [0] * n
        self.up = [0] * n
        for i in range(n):
            for j in _bits(self.right[i]):
                self.left[j] |= 1 << i
            for j in _bits(self.down[i]):
                self.up[j] |= 1 << i
        self.corner_mode = modes.get("corners")
        self.tiles = tiles
        self.classes = {c: sum(1 << self.index[m] for m in mem) for c, mem in spec.classes}
        self.exactly_one = [self.classes[c] for c in spec.exactly_one]
        self._ok = ok

    def corners_ok(self, a, b, c, d) -> bool:
        if self.corner_mode is None:
            return True
        t = self.tiles
        labs = (t[a].corners[1], t[b].corners[2], t[c].corners[0], t[d].corners[3])
        if self.corner_mode == "equal":
            return len(set(labs)) == 1
        return all(self._ok("flip", labs[0], x) or labs[0] == x for x in labs[1:])

    def consistent_blocks(self):
        """All edge-consistent 2x2 blocks (a b / c d) as index tuples."""
        n = len(self.ids)
        for a in range(n):
            for b in _bits(self.right[a]):
                for c in _bits(self.down[a]):
                    for d in _bits(self.right[c] & self.down[b]):
                        yield a, b, c, d


def _bits(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def compile_tileset(spec: TilesetSpec) -> ForbiddenSet:
    """Forbidden set: mismatching adjacent pairs, 2x2 rule violations among consistent squares, FORBID list."""
    E = EdgeTables(spec)
    ids = E.ids
    n = len(ids)
    full = (1 << n) - 1
    horiz = set()
    vert = set()
    for i in range(n):
        for j in _bits(full & ~E.right[i]):
            horiz.add((ids[i], ids[j]))
        for j in _bits(full & ~E.down[i]):
            vert.add((ids[i], ids[j]))
    square = set()
    if E.exactly_one or E.corner_mode:
        for a, b, c, d in E.consistent_blocks():
            bad = not E.corners_ok(a, b, c, d)
            for cm in E.exactly_one:
                cnt = ((cm >> a) & 1) + ((cm >> b) & 1) + ((cm >> c) & 1) + ((cm >> d) & 1)
                if cnt != 1:
                    bad = True
            if bad:
                square.add((ids[a], ids[b], ids[c], ids[d]))
    blocks: dict[tuple[int, int], set] = {(1, 2): horiz, (2, 1): vert, (2, 2): square}
    for shape, cells in spec.forbid:
        blocks.setdefault(shape, set()).add(cells)
    return ForbiddenSet.from_blocks(Alphabet(tuple(ids)), blocks)


def forbidden_to_json(F: ForbiddenSet) -> str:
    return json.dumps({"alphabet": list(F.alphabet.symbols),
                       "patterns": [{"shape": list(shape), "cells": list(c)}
                                    for shape in sorted(F.shapes) for c in sorted(F.shapes[shape])]},
                      sort_keys=True)


def load_corpus(name: str) -> TilesetSpec:
    """Parse a tileset shipped with the package (e.g. ``robinson-variant``)."""
    from importlib import resources
    text = resources.files("chaoscope").joinpath("corpus", f"{name}.tiledsl").read_text("utf-8")
    return parse_tileset(text)
