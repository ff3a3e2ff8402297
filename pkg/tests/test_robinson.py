from itertools import product

import pytest

from chaoscope.lattice import Window, count_fault_energy
from chaoscope.robinson import (ORIENTATIONS, assemble, bordered_phase, build_macro_tile, check_no_torus_tiling,
                                encode_signal_configuration, macro_energy, macro_overlap_witness, pattern_svg,
                                q_marker_set, quadrant_tiles, robinson_forbidden, robinson_spec, signal_forbidden,
                                signal_pair, signal_periodic_point, solve_window, uniform_phase, verify_covering)


@pytest.mark.parametrize("n,o", list(product(range(1, 6), ORIENTATIONS)))
def test_macro_tiles_have_zero_energy(n, o):
    mt = build_macro_tile(n, o)
    assert mt.side == 2 ** n - 1
    assert macro_energy(mt) == 0


@pytest.mark.parametrize("n,o", list(product(range(1, 5), ORIENTATIONS)))
def test_four_quadrants_and_a_cross_give_the_next_scale(n, o):
    big = assemble(quadrant_tiles(n), o)
    assert big.pattern == build_macro_tile(n + 1, o).pattern
    assert macro_energy(big) == 0


def test_macro_tiles_match_compiled_corpus():
    # the shipped tileset admits the constructed macro-tiles
    from chaoscope.tiledsl import compile_tileset, load_corpus
    F = compile_tileset(load_corpus("robinson-variant"))
    assert count_fault_energy(build_macro_tile(4).pattern, F) == 0


def test_assemble_rejects_wrong_orientations():
    with pytest.raises(ValueError):
        assemble([build_macro_tile(2, "SE")] * 4, "SE")


def test_macro_scale_guard():
    with pytest.raises(ValueError):
        build_macro_tile(9)


@pytest.mark.parametrize("n", [2, 3])
def test_macro_tiles_never_overlap(n):
    assert macro_overlap_witness(n) is None


def test_covering_scale_one():
    assert verify_covering(1).status == "Proved"


def test_covering_weakened_tileset_gives_counterexample():
    from dataclasses import replace

    from chaoscope.tiledsl import compile_tileset
    weak = replace(robinson_spec(), exactly_one=())
    res = verify_covering(1, spec=weak)
    assert res.status == "Counterexample"
    assert count_fault_energy(res.witness, compile_tileset(weak)) == 0
    assert count_fault_energy(res.witness, robinson_forbidden()) > 0


def test_covering_budget_reports_frontier():
    res = verify_covering(2, budget=50)
    assert res.status == "Exhausted"
    assert res.frontier is not None


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_no_small_torus(p):
    assert check_no_torus_tiling(p)[p].status == "NONE"


def test_solve_window_finds_admissible_patch():
    res = solve_window(robinson_spec(), 6)
    assert res.status == "FOUND"
    assert count_fault_energy(res.witness, robinson_forbidden()) == 0


def test_phase_layer():
    mt = build_macro_tile(3)
    assert bordered_phase(mt).energy() == 0
    assert uniform_phase(mt.pattern, "F").energy() == 0
    assert uniform_phase(mt.pattern, "H").energy() == 0
    # hot inside a frozen outside crosses the border the wrong way
    assert bordered_phase(mt, "H", "B", "F").energy() > 0
    with pytest.raises(ValueError):
        bordered_phase(build_macro_tile(2))


@pytest.mark.parametrize("word", ["+", "-", "+-", "--", "-+"])
def test_signal_configurations_are_ground(word):
    sp = encode_signal_configuration(word)
    assert sp.n == 2 * len(word) + 1
    assert sp.energy() == 0


def test_signal_pairs_agree_only_on_equal_words():
    F = signal_forbidden()
    assert count_fault_energy(signal_pair("+-", "+-"), F) == 0
    assert count_fault_energy(signal_pair("+", "-"), F) > 0


def test_signal_periodic_point():
    p = signal_periodic_point("+-")
    assert p.period == (64, 64)
    assert count_fault_energy(p.base, signal_forbidden()) == 0
    assert sum(p.cylinders(2).values()) == 1


def test_marker_set_size():
    assert [m.n for m in q_marker_set(0)] == [3] * 4


def test_svg_is_well_formed():
    import xml.etree.ElementTree as ET
    root = ET.fromstring(pattern_svg(build_macro_tile(2).pattern, 5))
    assert root.tag.endswith("svg")
    assert root.get("width") == "15"
