import random

import pytest
from hypothesis import given, strategies as st

from chaoscope.tiledsl import (TilesetError, compile_tileset, forbidden_to_json, format_tileset, load_corpus,
                               parse_tileset)

ONE = """tiledsl 1
name one
TILES
  tile a n=x e=y s=x w=y
RULES
  match horizontal equal
  match vertical equal
"""

TWO_VERTICAL = """tiledsl 1
name two
TILES
  tile a n=p e=q s=r w=q
  tile b n=s e=q s=t w=q
RULES
  match vertical equal
"""

MESSY = """# comment line
tiledsl   1
name   one

TILES
      tile a   n=x e=y  s=x w=y   # trailing comment
RULES
  match vertical equal
  match horizontal equal
"""


def forbidden_sets(F):
    return {shape: set(cells) for shape, cells in F.shapes.items()}


def test_single_tile_has_no_forbidden_patterns():
    spec = parse_tileset(ONE)
    assert len(spec.tiles) == 1
    assert len(compile_tileset(spec)) == 0


def test_incompatible_vertical_edges():
    # a above b needs a.s == b.n; every ordered pair fails, so all four are forbidden
    F = compile_tileset(parse_tileset(TWO_VERTICAL))
    assert set(F.shapes) == {(2, 1)}
    assert F.shapes[(2, 1)] == {("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")}


def test_formatting_normalises_whitespace_and_keeps_semantics():
    a, b = parse_tileset(MESSY), parse_tileset(ONE)
    assert format_tileset(a) == format_tileset(b)
    assert compile_tileset(a) == compile_tileset(b)


def test_canonical_is_fixpoint():
    text = format_tileset(parse_tileset(ONE))
    assert format_tileset(parse_tileset(text)) == text


def test_duplicate_id_names_both_lines():
    bad = ONE.replace("RULES", "  tile a n=x e=y s=x w=y\nRULES")
    with pytest.raises(TilesetError) as exc:
        parse_tileset(bad)
    assert "'a'" in str(exc.value) and "lines 4 and 5" in str(exc.value)
    assert exc.value.line == 5


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("tiledsl 2\n", 1),
    ("tiledsl 1\nTILES\n  tile a n=x e=y s=x\n", 3),
    ("tiledsl 1\nTILES\n  tile a n=x e=y s=x w=y q=1\n", 3),
    ("tiledsl 1\nRULES\n  match diagonal equal\n", 3),
    ("tiledsl 1\nRULES\nTILES\n", 3),
    ("tiledsl 1\nTILES\n  tile a n=x e=y s=x w=y\nFORBID\n  pattern 1x2 a b\n", 5),
    ("tiledsl 1\nTILES\n  tile a n=x e=y s=x w=y\nFORBID\n  pattern 3x3 a\n", 5),
])
def test_errors_carry_positions(text, line):
    with pytest.raises(TilesetError) as exc:
        parse_tileset(text)
    assert exc.value.line == line and exc.value.col >= 1


@given(st.text(alphabet="tiledsx1 =\n#:abnews", max_size=80))
def test_no_failure_without_diagnostic(text):
    try:
        parse_tileset(text)
    except TilesetError as exc:
        assert exc.line >= 1 and exc.col >= 1


@pytest.mark.parametrize("name", ["robinson-variant", "a0-signal"])
def test_corpus_round_trip(name):
    spec = load_corpus(name)
    text = format_tileset(spec)
    again = parse_tileset(text)
    assert again.canonical() == spec.canonical()
    assert format_tileset(again) == text


def test_corpus_has_four_bumpy_orientations():
    spec = load_corpus("robinson-variant")
    bumpy = dict(spec.classes)["bumpy"]
    assert len(bumpy) == 4


def test_corpus_files_match_generator(tmp_path):
    from importlib import resources
    from chaoscope.robinson import write_corpus
    write_corpus(tmp_path)
    for name in ("robinson-variant", "a0-signal"):
        shipped = resources.files("chaoscope").joinpath("corpus", f"{name}.tiledsl").read_text()
        assert (tmp_path / f"{name}.tiledsl").read_text() == shipped


@given(st.randoms(use_true_random=False))
def test_compile_ignores_declaration_order(rnd):
    lines = TWO_VERTICAL.splitlines()
    tiles = lines[3:5]
    rnd.shuffle(tiles)
    text = "\n".join(lines[:3] + tiles + lines[5:]) + "\n"
    assert compile_tileset(parse_tileset(text)) == compile_tileset(parse_tileset(TWO_VERTICAL))


def test_robinson_compile_permutation():
    text = format_tileset(load_corpus("robinson-variant")).splitlines()
    i, j = text.index("TILES"), text.index("RULES")
    body = text[i + 1:j]
    random.Random(7).shuffle(body)
    shuffled = "\n".join(text[:i + 1] + body + text[j:]) + "\n"
    a = compile_tileset(parse_tileset(shuffled))
    b = compile_tileset(load_corpus("robinson-variant"))
    assert forbidden_sets(a) == forbidden_sets(b)
    assert forbidden_to_json(a) == forbidden_to_json(b)
