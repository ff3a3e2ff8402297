"""One test per acceptance criterion; each prints a single PASS/FAIL line (run with -s to see them)."""
import math
import random
import time
from fractions import Fraction

import mpmath
import pytest


def verdict(n: int, ok: bool, detail: str, seconds: float, limit: float | None):
    timed = limit is None or seconds < limit
    tag = "PASS" if ok and timed else "FAIL"
    budget = f" / limit {limit:g}s" if limit else ""
    print(f"\n[criterion {n}] {tag}: {detail} ({seconds:.2f}s{budget})")
    assert ok, detail
    assert timed, f"took {seconds:.2f}s, limit {limit}s"


# rows of the diagram for a single block with 15 flips, written out cell by cell
FIFTEEN = ["WYGYGYGYGYGYGYGYGW",
           "WYYGGYYGGYYGGYYGGW",
           "WYYYYGGGGYYYYGGGGW",
           "WYYYYYYYYGGGGGGGGW",
           "WYYYYYYYYYYYYYYYYW",
           "WYYYYYYYYYYYYYYYYW"]


def test_criterion_01_ca_halving():
    from chaoscope.machines import run_halving_ca
    t = time.perf_counter()
    ok_steps = ok_halving = True
    for N in range(1, 13):
        dia = run_halving_ca([2 ** N - 1])
        col = dia.rightmost()
        ok_steps &= col[:N] == "G" * N and set(col[N:]) == {"Y"}
        ok_halving &= dia.halving_holds()
    exact = run_halving_ca([15]).rows == FIFTEEN
    dt = time.perf_counter() - t
    verdict(1, ok_steps and ok_halving and exact,
            f"transition at step N for N=1..12: {ok_steps}; halving on every row: {ok_halving}; f0=15 diagram exact: {exact}",
            dt, 1.0)


def test_criterion_02_unary_machines():
    from chaoscope.machines import BUILTINS, compare_machine, fit_step_constant, run_unary_batch
    t = time.perf_counter()
    runs = run_unary_batch(compare_machine(), [(i, j) for i in range(501) for j in range(501)])
    cmp_ok = all(r.steps == min(r.inputs) + 1 and
                 r.verdict == ("<" if r.inputs[0] < r.inputs[1] else ">" if r.inputs[0] > r.inputs[1] else "=")
                 for r in runs)
    oracle_ok = True
    drifts = {}
    for b in (2, 3):
        ns = list(range(0, 5001))
        pc = run_unary_batch(BUILTINS["power_check"](b), [(n,) for n in ns])
        fl = run_unary_batch(BUILTINS["floor_log"](b), [(n,) for n in ns])
        npw = run_unary_batch(BUILTINS["nearest_power"](b), [(n,) for n in ns])
        for n in ns[1:]:
            k = 0
            while b ** (k + 1) <= n:
                k += 1
            oracle_ok &= (pc[n].verdict == "accept") == (b ** k == n)
            oracle_ok &= fl[n].counts[1] == k and npw[n].counts[0] == b ** k
        for name, runs_ in (("power_check", pc), ("floor_log", fl), ("nearest_power", npw)):
            fit = fit_step_constant(name, b, steps=[r.steps for r in runs_])
            drifts[f"{name}/{b}"] = fit.drift
    worst = max(drifts.values())
    dt = time.perf_counter() - t
    verdict(2, cmp_ok and oracle_ok and worst <= 0.10,
            f"compare exact: {cmp_ok}; arithmetic oracles n<=5000: {oracle_ok}; worst c drift {worst:.3f} "
            f"({max(drifts, key=drifts.get)})", dt, 30.0)


def test_criterion_03_robinson_gates():
    from chaoscope.robinson import (ORIENTATIONS, assemble, build_macro_tile, check_no_torus_tiling, macro_energy,
                                    quadrant_tiles, verify_covering)
    t = time.perf_counter()
    c1 = verify_covering(1)
    t1 = time.perf_counter() - t
    c2 = verify_covering(2, window=11)
    if c2.status == "Exhausted":
        print(f"\nfrontier at exhaustion: {c2.frontier}")
    tor = check_no_torus_tiling(6)
    comp = all(assemble(quadrant_tiles(n), o).pattern == build_macro_tile(n + 1, o).pattern
               and macro_energy(build_macro_tile(n + 1, o)) == 0
               for n in range(1, 5) for o in ORIENTATIONS) and macro_energy(build_macro_tile(1)) == 0
    dt = time.perf_counter() - t
    ok = (c1.status == "Proved" and t1 < 60 and c2.status == "Proved"
          and all(r.status == "NONE" for r in tor.values()) and comp)
    verdict(3, ok, f"covering n=1 {c1.status} in {t1:.2f}s; n=2 (11x11) {c2.status} in {c2.nodes} nodes; "
                   f"torus p<=6 {sorted({r.status for r in tor.values()})}; composability n<=5 {comp}", dt, None)


def test_criterion_04_pressure_sandwich():
    from chaoscope.lattice import ForbiddenSet
    from chaoscope.pressure import block_pressure, transfer_matrix_pressure
    t = time.perf_counter()
    F = ForbiddenSet.from_strings(["11"])
    zero = block_pressure(12, 0, F).upper == 1
    s = block_pressure(12, 1, F)
    oracle = transfer_matrix_pressure(1, F)
    inside = s.lower <= oracle <= s.upper
    # the boundary term is held exactly; the float gap matches it up to 160-bit rounding
    with mpmath.workprec(160):
        gap_err = abs(s.upper - s.lower - mpmath.mpf(2) / 12)
    gap_ok = s.boundary_term == Fraction(2, 12) and gap_err < mpmath.mpf(2) ** -150
    ups = [block_pressure(n, 5, F).upper for n in (5, 10, 15, 20)]
    dec = all(a > b for a, b in zip(ups, ups[1:]))
    lim = math.log2((1 + 5 ** 0.5) / 2)
    close = 0 <= float(ups[-1]) - lim < 0.06 and transfer_matrix_pressure(5, F) <= float(ups[-1])
    dt = time.perf_counter() - t
    verdict(4, zero and inside and gap_ok and dec and close,
            f"upper(beta=0)=1: {zero}; oracle {oracle:.5f} in [{float(s.lower):.5f}, {float(s.upper):.5f}]: {inside}; "
            f"gap = 2/12: {gap_ok}; upper(n) at beta=5 decreasing {dec}, n=20 excess {float(ups[-1]) - lim:.4f}",
            dt, 10.0)


def test_criterion_05_hierarchy():
    from chaoscope.hierarchy import (all_words, b_read, frozen_frequency, frozen_frequency_closed,
                                     marker_log_counts, mass_identity, signal_distribution)
    t = time.perf_counter()
    rec = all(frozen_frequency(l, k) == frozen_frequency_closed(l, k) for k in range(2, 31) for l in range(1, k))
    # signal_distribution asserts the mass identity after every step
    words = all_words(b_read(2))
    mass = True
    for k in range(3, 31):
        st = signal_distribution(2, k, [[Fraction(1, len(words))] * len(words)] * (k - 2), words)
        mass &= st.mass == mass_identity(2, k)
    mc = marker_log_counts(25)
    c_ok = all(mc.C[k].b <= 2 for k in mc.k)
    u1 = mc.u_exact[1] == Fraction(1, 16)
    viol = mc.lower_bound_violations()
    dt = time.perf_counter() - t
    verdict(5, rec and mass and c_ok and u1 and 1 in viol,
            f"recurrence = closed form for l<k<=30: {rec}; mass identity: {mass}; C_k<=2 for k<=25: {c_ok}; "
            f"u_1 = 1/16: {u1}; printed lower bound fails at k={viol} (reported discrepancy)", dt, 5.0)


def test_criterion_06_interval_overlap():
    from chaoscope.hierarchy import overlap_ratio
    t = time.perf_counter()
    full = asym = True
    ratios = {}
    for k in range(1, 9):
        o = overlap_ratio(k, 2 ** 10)
        full &= abs(o["log2_ratio"] - o["log2_formula"]) < mpmath.mpf(2) ** -200
        q = o["ratio"] / o["asymptote"]
        asym &= 1 / 1.2 <= q <= 1.2
        ratios[k] = o["ratio"]
    overlap = all(ratios[k] >= 1 for k in range(2, 9))
    vals = abs(float(ratios[1]) - 0.100) < 5e-4 and abs(float(ratios[2]) - 409.6) < 0.05
    dt = time.perf_counter() - t
    verdict(6, full and asym and overlap and vals,
            f"formula to full precision: {full}; asymptote within 1.2: {asym}; ratio>=1 for k>=2: {overlap}; "
            f"k=1 {float(ratios[1]):.6f}, k=2 {float(ratios[2]):.4f}", dt, 5.0)


def test_criterion_07_word_measures():
    from chaoscope.measures import (DyadicWordMeasure, dstar_brute, dstar_words, dyadic_elements,
                                    dyadic_grid_instance, gamma_encode, gamma_inverse, pi2_accumulation_path)
    t = time.perf_counter()
    rng = random.Random(2024)

    def rand_measure():
        k, L = rng.randint(0, 5), rng.randint(0, 3)
        cuts = sorted(rng.randint(0, 2 ** k) for _ in range(2 ** L - 1))
        return DyadicWordMeasure(k, tuple(b - a for a, b in zip([0] + cuts, cuts + [2 ** k])), L)

    dstar_ok = all(dstar_words(mu, nu, d).value == dstar_brute(mu, nu, d)
                   for mu, nu, d in ((rand_measure(), rand_measure(), rng.randint(1, 8)) for _ in range(1000)))
    inv_ok = all(gamma_inverse(gamma_encode(mu), Fraction(1, 2), 1, 2).same_measure(mu)
                 for mu in dyadic_elements(1, 1))
    aff_ok = True
    base = dyadic_elements(1, 1)
    for mu in base:
        for nu in base:
            for tt in (Fraction(1, 4), Fraction(1, 2)):
                lhs = gamma_encode(mu.mix(nu, tt)).cylinders(4)
                a, b = gamma_encode(mu).cylinders(4), gamma_encode(nu).cylinders(4)
                aff_ok &= all(lhs.get(key, 0) == tt * a.get(key, 0) + (1 - tt) * b.get(key, 0)
                              for key in set(lhs) | set(a) | set(b))
    space, pred, dK = dyadic_grid_instance(6, Fraction(1, 4), Fraction(3, 4))
    path = pi2_accumulation_path(space, pred, 12)
    visits = path.visits()
    net = [i for i in space.net(8) if dK(space.points[i]) == 0]
    path_ok = path.certificates_ok() and all(visits.get(i, 0) >= 3 for i in net)
    dt = time.perf_counter() - t
    verdict(7, dstar_ok and inv_ok and aff_ok and path_ok,
            f"d* = brute force on 1000 pairs: {dstar_ok}; inverse after encoding on the depth-1 basis: {inv_ok}; "
            f"affinity at depth 4: {aff_ok}; path visits {len(net)} K-net points >= 3 times with certified steps: "
            f"{path_ok}", dt, 60.0)


def test_criterion_08_oscillator_pipeline():
    from chaoscope.pipeline import oscillator_pipeline
    t = time.perf_counter()
    res = oscillator_pipeline(j_max=20, depth=4)
    dt = time.perf_counter() - t
    slow = all(res.slowdown_checked.values())
    verdict(8, res.hausdorff <= 0.1 and slow,
            f"Hausdorff distance to the segment {res.hausdorff:.4f} (tolerance 0.1); slowdown law checked: {slow}; "
            f"{len(res.samples)} samples, {len(res.estimate)} clusters", dt, 120.0)


def test_criterion_09_sampler():
    from chaoscope.lattice import ForbiddenSet
    from chaoscope.pressure import gibbs_sample_torus, ground_probability_threshold
    t = time.perf_counter()
    F = ForbiddenSet.from_strings(["11"])
    beta0 = ground_probability_threshold(2, Fraction(1, 5), 2)
    good = 0
    worst = 1.0
    for seed in range(40):
        run = gibbs_sample_torus(512, 10, F, 20, seed, ground_n=2)
        tail = run.ground_fraction[10:]
        p = sum(tail) / len(tail)
        worst = min(worst, p)
        good += p >= 1 - 0.4
    dt = time.perf_counter() - t
    verdict(9, 10 >= beta0 and good >= 38,
            f"beta0 = {beta0}; {good}/40 seeds with ground-window probability >= 0.6 (worst {worst:.4f})", dt, 60.0)


def test_criterion_10_dsl():
    from chaoscope.tiledsl import compile_tileset, format_tileset, load_corpus, parse_tileset
    t = time.perf_counter()
    fix = perm = True
    for name in ("robinson-variant", "a0-signal"):
        spec = load_corpus(name)
        text = format_tileset(spec)
        fix &= format_tileset(parse_tileset(text)) == text and parse_tileset(text).canonical() == spec.canonical()
        lines = text.splitlines()
        i, j = lines.index("TILES"), lines.index("RULES")
        ref = {s: set(c) for s, c in compile_tileset(spec).shapes.items()}
        for seed in range(3):
            body = lines[i + 1:j]
            random.Random(seed).shuffle(body)
            shuffled = parse_tileset("\n".join(lines[:i + 1] + body + lines[j:]) + "\n")
            perm &= {s: set(c) for s, c in compile_tileset(shuffled).shapes.items()} == ref
    dt = time.perf_counter() - t
    verdict(10, fix and perm, f"round-trip fixpoint on the corpus: {fix}; permutation-invariant compile: {perm}",
            dt, None)
