"""Command-line entry point.

Exit codes: 0 success, 1 verification failure (a counterexample or a failed check is a result),
2 usage error, 3 budget exhausted. Reports are JSON envelopes carrying the validated
configuration, its hash and library versions; timings go to a separate sidecar file so that
reports are byte-identical across runs.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

OK, FAIL, USAGE, BUDGET = 0, 1, 2, 3
WORKERS_ENV = "CHAOSCOPE_WORKERS"


class UsageError(Exception):
    pass


def _versions() -> dict:
    import mpmath
    import numba
    import numpy
    from . import __version__
    return {"chaoscope": __version__, "numpy": numpy.__version__, "mpmath": mpmath.__version__,
            "numba": numba.__version__, "python": platform.python_version()}


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, Path):
        return str(x)
    if hasattr(x, "as_dict"):
        return x.as_dict()
    try:
        import mpmath
        if isinstance(x, (mpmath.mpf, mpmath.mpi)):
            return mpmath.nstr(x, 30)
    except ImportError:
        pass
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_jsonable, sort_keys=True, indent=2) + "\n"


def config_hash(config: dict) -> str:
    blob = json.dumps(config, default=_jsonable, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class Emitter:
    """Writes reports and tables either to an output directory or to stdout."""

    def __init__(self, out: str | None, command: str, config: dict):
        self.out = Path(out) if out else None
        self.command = command
        self.config = config
        self.hash = config_hash(config)
        self.t0 = time.perf_counter()
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def envelope(self, kind: str, result) -> dict:
        return {"kind": kind, "command": self.command, "config": self.config, "config_hash": self.hash,
                "versions": _versions(), "result": result}

    def report(self, kind: str, result, name: str | None = None):
        text = dumps(self.envelope(kind, result))
        if self.out:
            stem = name or kind
            (self.out / f"{stem}.json").write_text(text)
            sidecar = {"config_hash": self.hash, "seconds": round(time.perf_counter() - self.t0, 6),
                       "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}
            (self.out / f"{stem}.timing.json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")
        else:
            sys.stdout.write(text)

    def table(self, name: str, rows: list[dict], plot: dict | None = None):
        buf = io.StringIO()
        buf.write(f"# config_hash={self.hash}\n")
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        if self.out:
            (self.out / f"{name}.csv").write_text(buf.getvalue())
            if plot:
                (self.out / f"{name}.gp").write_text(_gnuplot(name, plot))
        else:
            sys.stdout.write(buf.getvalue())

    def text(self, name: str, body: str):
        if self.out:
            (self.out / name).write_text(body)
        else:
            sys.stdout.write(body)


def _gnuplot(name: str, plot: dict) -> str:
    x = plot["x"]
    lines = [f"# gnuplot script for {name}.csv", "set datafile separator ','", "set key top right",
             f"set xlabel '{x}'", f"set ylabel '{plot.get('ylabel', '')}'",
             "set terminal pngcairo size 900,600", f"set output '{name}.png'"]
    cols = plot["cols"]
    parts = [f"'{name}.csv' using '{x}':'{c}' with lines title '{c}'" for c in cols]
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {s!r}") from exc


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from exc
    return 1


def _config(args) -> dict:
    skip = {"func", "out", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# dsl

def _load_spec(args):
    from .tiledsl import load_corpus, parse_tileset
    if getattr(args, "corpus", None):
        try:
            return load_corpus(args.corpus)
        except FileNotFoundError as exc:
            raise UsageError(f"no corpus tileset named {args.corpus!r}") from exc
    if not getattr(args, "file", None):
        from .robinson import robinson_spec
        return robinson_spec()
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    return parse_tileset(text)


def cmd_dsl_check(args, em: Emitter) -> int:
    from .tiledsl import TilesetError, compile_tileset
    try:
        spec = _load_spec(args)
        F = compile_tileset(spec)
    except TilesetError as exc:
        sys.stderr.write(f"{args.file or args.corpus}:{exc}\n")
        em.report("dsl-check", {"ok": False, "error": str(exc), "line": exc.line, "col": exc.col})
        return FAIL
    shapes = {"x".join(map(str, s)): len(v) for s, v in sorted(F.shapes.items())}
    em.report("dsl-check", {"ok": True, "name": spec.name, "tiles": len(spec.tiles), "forbidden": shapes})
    return OK


def cmd_dsl_fmt(args, em: Emitter) -> int:
    from .tiledsl import TilesetError, format_tileset
    try:
        spec = _load_spec(args)
    except TilesetError as exc:
        sys.stderr.write(f"{args.file}:{exc}\n")
        return FAIL
    text = format_tileset(spec)
    if args.write:
        if not args.file:
            raise UsageError("--write needs a file")
        Path(args.file).write_text(text)
    else:
        em.text("formatted.tiledsl", text)
    return OK


# tiles

def _search_dict(res) -> dict:
    return {"status": res.status, "nodes": res.nodes, "frontier": res.frontier,
            "witness": res.witness.to_json() if res.witness is not None else None}


def cmd_tile_solve(args, em: Emitter) -> int:
    from .robinson import pattern_svg, solve_window
    spec = _load_spec(args)
    res = solve_window(spec, args.size, args.width, args.torus, args.budget)
    em.report("tile-solve", _search_dict(res))
    if res.witness is not None and em.out:
        em.text("tile-solve.svg", pattern_svg(res.witness))
    return {"FOUND": OK, "NONE": FAIL, "Exhausted": BUDGET}[res.status]


def cmd_tile_cover(args, em: Emitter) -> int:
    from .robinson import verify_covering
    spec = _load_spec(args) if (args.file or args.corpus) else None
    if args.n not in (1, 2) and args.window is None:
        raise UsageError("--n must be 1 or 2 unless --window is given")
    res = verify_covering(args.n, args.budget, spec, args.window)
    em.report("tile-cover", _search_dict(res))
    return {"Proved": OK, "Counterexample": FAIL, "Exhausted": BUDGET}[res.status]


def cmd_tile_torus(args, em: Emitter) -> int:
    from .robinson import check_no_torus_tiling
    if not 1 <= args.pmax <= 8:
        raise UsageError("--pmax must lie in 1..8")
    spec = _load_spec(args) if (args.file or args.corpus) else None
    res = check_no_torus_tiling(args.pmax, spec, args.budget)
    em.report("tile-torus", {str(p): _search_dict(r) for p, r in res.items()})
    st = {r.status for r in res.values()}
    if "FOUND" in st:
        return FAIL
    return BUDGET if "Exhausted" in st else OK


def cmd_tile_macro(args, em: Emitter) -> int:
    from .robinson import MAX_MACRO, ORIENTATIONS, build_macro_tile, macro_energy, pattern_svg
    if not 1 <= args.n <= MAX_MACRO:
        raise UsageError(f"--n must lie in 1..{MAX_MACRO}")
    if args.orientation not in ORIENTATIONS:
        raise UsageError(f"--orientation must be one of {ORIENTATIONS}")
    mt = build_macro_tile(args.n, args.orientation)
    e = macro_energy(mt)
    em.report("tile-macro", {"n": mt.n, "orientation": mt.orientation, "side": mt.side, "energy": e})
    if em.out:
        em.text(f"macro-{args.n}-{args.orientation}.svg", pattern_svg(mt.pattern, args.cell))
    return OK if e == 0 else FAIL


# cellular automaton and machines

def cmd_ca_run(args, em: Emitter) -> int:
    from .machines import run_halving_ca
    if args.row is None and not args.f0:
        raise UsageError("give --f0 or --row")
    try:
        dia = run_halving_ca(args.row if args.row is not None else args.f0, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ok = dia.halving_holds()
    em.report("ca-run", {"width": dia.width, "rows": dia.rows, "flips": dia.flips, "decoded_N": dia.decoded_N(),
                         "halving_holds": ok})
    return OK if ok else FAIL


def _machine_spec(args):
    from .machines import BUILTINS, MachineSpec, oscillator_spec
    if args.spec:
        try:
            return MachineSpec.from_text(Path(args.spec).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    if args.builtin == "oscillator":
        return oscillator_spec()
    if args.builtin not in BUILTINS:
        raise UsageError(f"unknown builtin {args.builtin!r}")
    if args.builtin != "compare" and args.b not in (2, 3):
        raise UsageError("--b must be 2 or 3")
    return BUILTINS[args.builtin](args.b)


def cmd_tm_run(args, em: Emitter) -> int:
    from .machines import UndefinedTransition, run_machine
    spec = _machine_spec(args)
    inputs = []
    for x in args.input:
        inputs.append("1" * int(x) if (args.unary and x.isdigit()) else x)
    try:
        r = run_machine(spec, inputs, args.budget, trace=args.trace)
    except UndefinedTransition as exc:
        sys.stderr.write(f"{exc}\n")
        return FAIL
    out = r.as_dict()
    out["tapes"] = r.tapes
    if args.trace:
        out["trace"] = [list(t) for t in (r.trace or [])]
    em.report("tm-run", out)
    return BUDGET if r.truncated else OK


def cmd_tm_table(args, em: Emitter) -> int:
    em.text("machine.tmspec", _machine_spec(args).to_text())
    return OK


# hierarchy

def cmd_hier_table(args, em: Emitter) -> int:
    from .hierarchy import scale_table
    if not 0 <= args.kmax <= 64:
        raise UsageError("--kmax must lie in 0..64")
    rows = [r.as_dict() for r in scale_table(args.kmax, args.alphabet_size)]
    em.table("hier-table", rows)
    return OK


def cmd_hier_overlap(args, em: Emitter) -> int:
    import mpmath
    from .hierarchy import overlap_ratio
    rows = []
    for k in range(1, args.kmax + 1):
        o = overlap_ratio(k, args.alphabet_size)
        rows.append({"k": k, "ratio": mpmath.nstr(o["ratio"], 20), "formula_log2": mpmath.nstr(o["log2_formula"], 20),
                     "asymptote": mpmath.nstr(o["asymptote"], 20), "overlap": o["overlap"]})
    em.table("hier-overlap", rows, {"x": "k", "cols": ["ratio", "asymptote"], "ylabel": "ratio"})
    return OK


def cmd_hier_counts(args, em: Emitter) -> int:
    from .hierarchy import marker_log_counts
    if not 1 <= args.kmax <= 64:
        raise UsageError("--kmax must lie in 1..64")
    mc = marker_log_counts(args.kmax)
    em.table("hier-counts", mc.rows())
    bad = mc.lower_bound_violations()
    sys.stderr.write(f"printed lower bound violated at k = {bad}\n" if bad else "")
    return OK


def cmd_hier_signal(args, em: Emitter) -> int:
    from .hierarchy import all_words, b_read, mass_identity, signal_distribution
    from .machines import oscillator_machine, seed_distribution
    if args.l < 2 or args.k <= args.l or args.k > 24:
        raise UsageError("need 2 <= l < k <= 24")
    L = b_read(args.l)
    words = all_words(L)
    base = oscillator_machine()
    machines = []
    for j in range(args.l, args.k):
        law = seed_distribution(base, j) if j <= 12 else {base.run_seed("0" * j).output: Fraction(1)}
        proj: dict = {}
        for w, p in law.items():
            proj[w[:L]] = proj.get(w[:L], Fraction(0)) + p
        machines.append([proj.get(w, Fraction(0)) for w in words])
    st = signal_distribution(args.l, args.k, machines, words)
    em.report("hier-signal", {"l": args.l, "k": args.k, "words": words, "w": [str(x) for x in st.w],
                              "mass": str(st.mass), "mass_identity": str(mass_identity(args.l, args.k))})
    return OK


# pressure

def _forbidden(args):
    from .lattice import Alphabet, ForbiddenSet
    if args.tileset:
        from .tiledsl import compile_tileset, parse_tileset
        return compile_tileset(parse_tileset(Path(args.tileset).read_text()))
    if not args.forbid:
        raise UsageError("give --forbid words or --tileset")
    alpha = Alphabet(tuple(args.alphabet))
    try:
        return ForbiddenSet.from_strings(args.forbid, alpha)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad forbidden word: {exc}") from exc


def cmd_pressure_sandwich(args, em: Emitter) -> int:
    from .pressure import IntractableWindow, block_pressure, pressure_series, transfer_matrix_pressure
    F = _forbidden(args)
    d = len(next(iter(F.shapes)))
    try:
        s = block_pressure(args.n, _frac(args.beta), F)
    except IntractableWindow as exc:
        sys.stderr.write(f"{exc}\n")
        return BUDGET
    res = s.as_dict()
    oracle = (lambda b: transfer_matrix_pressure(b, F)) if d == 1 else None
    ok = True
    if oracle:
        res["oracle"] = oracle(s.beta)
        ok = s.lower <= res["oracle"] <= s.upper + 1e-12
    em.report("pressure-sandwich", res)
    if args.series:
        lo, hi, step = (_frac(x) for x in args.series.split(":"))
        betas, b = [], lo
        while b <= hi:
            betas.append(b)
            b += step
        em.table("pressure-series", pressure_series(betas, args.n, F, oracle),
                 {"x": "beta", "cols": ["lower", "upper"] + (["oracle"] if oracle else []), "ylabel": "pressure"})
    return OK if ok else FAIL


def _sample_one(payload):
    side, beta, words, alphabet, sweeps, seed, ground_n = payload
    from .lattice import Alphabet, ForbiddenSet
    from .pressure import gibbs_sample_torus
    F = ForbiddenSet.from_strings(words, Alphabet(tuple(alphabet)))
    run = gibbs_sample_torus(side, Fraction(beta), F, sweeps, seed, ground_n)
    return run.as_dict()


def cmd_pressure_sample(args, em: Emitter) -> int:
    if args.tileset:
        raise UsageError("the sampler CLI takes 1D --forbid words")
    _forbidden(args)
    jobs = [(args.side, str(_frac(args.beta)), tuple(args.forbid), args.alphabet, args.sweeps, s, args.ground_n)
            for s in range(args.seed, args.seed + args.seeds)]
    w = _workers(args)
    if w > 1:
        with ProcessPoolExecutor(w) as ex:
            runs = list(ex.map(_sample_one, jobs))
    else:
        runs = [_sample_one(j) for j in jobs]
    burn = args.sweeps // 2
    summary = []
    for r in runs:
        gf = r["ground_fraction"][burn:] or r["ground_fraction"]
        es = r["energy_per_site"][burn:] or r["energy_per_site"]
        summary.append({"seed": r["seed"], "ground_fraction": sum(gf) / len(gf), "energy_per_site": sum(es) / len(es)})
    em.report("pressure-sample", {"runs": summary})
    em.table("pressure-sample", summary, {"x": "seed", "cols": ["ground_fraction", "energy_per_site"],
                                          "ylabel": "average over the second half"})
    return OK


def cmd_pressure_certify(args, em: Emitter) -> int:
    from .lattice import Pattern, PeriodicPoint
    from .pressure import certify_ball_empty
    F = _forbidden(args)
    try:
        center = PeriodicPoint(Pattern.from_string(args.center, F.alphabet))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad centre word: {exc}") from exc
    cert = certify_ball_empty(center, _frac(args.radius), (_frac(args.beta_lo), _frac(args.beta_hi)), args.n_max,
                              args.budget, F)
    em.report("pressure-certify", cert.as_dict())
    if cert.verdict == "Unknown" and cert.reason == "budget exhausted":
        return BUDGET
    return OK


# word measures

def parse_measure(text: str):
    """'++:1/2,--:1/2' -> DyadicWordMeasure, or a JSON object with k, weights, length."""
    from .measures import DyadicWordMeasure
    text = text.strip()
    try:
        if text.startswith("{"):
            return DyadicWordMeasure.from_json(text)
        probs = {}
        for part in text.split(","):
            w, p = part.split(":")
            probs[w.strip()] = probs.get(w.strip(), Fraction(0)) + Fraction(p)
        return DyadicWordMeasure.from_probs(probs)
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        raise UsageError(f"bad measure {text!r}: {exc}") from exc


def cmd_measure_dstar(args, em: Emitter) -> int:
    from .measures import dstar_brute, dstar_words
    mu, nu = parse_measure(args.mu), parse_measure(args.nu)
    d = dstar_words(mu, nu, args.depth)
    brute = dstar_brute(mu, nu, args.depth)
    em.report("measure-dstar", {"value": d.value, "tail_bound": d.tail_bound, "upper": d.upper,
                                "brute_force": brute, "agree": brute == d.value})
    return OK if brute == d.value else FAIL


def cmd_measure_path(args, em: Emitter) -> int:
    from .measures import dyadic_grid_instance, pi2_accumulation_path
    space, pred, dK = dyadic_grid_instance(args.m, _frac(args.lo), _frac(args.hi))
    path = pi2_accumulation_path(space, pred, args.horizon)
    body = json.loads(path.to_json(space))
    body["visits"] = {str(space.points[i]): c for i, c in sorted(path.visits().items())}
    body["certificates_ok"] = path.certificates_ok()
    em.report("measure-path", body)
    return OK if path.certificates_ok() else FAIL


def cmd_measure_gamma(args, em: Emitter) -> int:
    from .lattice import weak_star_distance
    from .measures import GAMMA_LENGTHS, gamma_encode, gamma_inverse
    mu = parse_measure(args.mu)
    if mu.length not in GAMMA_LENGTHS:
        raise UsageError(f"word length must be one of {GAMMA_LENGTHS}")
    pt = gamma_encode(mu)
    back = gamma_inverse(pt, Fraction(1, 2 ** mu.k), mu.length, args.depth)
    same = back.same_measure(mu)
    cyl = pt.cylinders(args.cyl_depth)
    em.report("measure-gamma", {"measure": mu.to_json(), "inverse": back.to_json(), "round_trip": same,
                                "cylinders": len(cyl),
                                "distance_to_inverse_image": weak_star_distance(pt, gamma_encode(back), args.depth).value})
    return OK if same else FAIL


# pipeline

def cmd_pipeline(args, em: Emitter) -> int:
    from .machines import (DyadicEnumerator, MachineSpec, TableSeedMachine, dyadic_program_machine,
                           oscillator_machine)
    from .pipeline import oscillator_pipeline
    if args.machine_file:
        try:
            machine = TableSeedMachine(MachineSpec.from_text(Path(args.machine_file).read_text()))
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    elif args.program:
        try:
            obj = json.loads(Path(args.program).read_text())
            machine = dyadic_program_machine(DyadicEnumerator.constant(obj["weights"], obj["k"], obj.get("length")))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(str(exc)) from exc
    elif args.machine == "oscillator":
        machine = oscillator_machine()
    else:
        raise UsageError(f"unknown machine {args.machine!r}")
    if not 2 <= args.kmax <= 30:
        raise UsageError("--kmax must lie in 2..30")
    try:
        res = oscillator_pipeline(args.kmax, args.grid, args.depth, _frac(args.cluster), machine=machine)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    body = res.as_dict()
    tol = _frac(args.tolerance)
    body["tolerance"] = tol
    body["within_tolerance"] = res.hausdorff <= tol
    em.report("pipeline-ground-states", body)
    return OK if res.hausdorff <= tol else FAIL


# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chaoscope", description="Ground-state and pressure toolkit for fault potentials.")
    p.add_argument("--out", help="output directory (default: stdout)")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    top = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def group(name, help_):
        g = top.add_parser(name, help=help_)
        return g.add_subparsers(dest="sub", required=True, parser_class=_Parser)

    def tileset_args(q):
        q.add_argument("file", nargs="?")
        q.add_argument("--corpus", help="name of a shipped tileset")

    dsl = group("dsl", "tileset description language")
    q = dsl.add_parser("check")
    tileset_args(q)
    q.set_defaults(func=cmd_dsl_check)
    q = dsl.add_parser("fmt")
    tileset_args(q)
    q.add_argument("--write", action="store_true")
    q.set_defaults(func=cmd_dsl_fmt)

    tile = group("tile", "tiling searches and macro-tiles")
    q = tile.add_parser("solve")
    tileset_args(q)
    q.add_argument("--size", type=int, required=True)
    q.add_argument("--width", type=int)
    q.add_argument("--torus", action="store_true")
    q.add_argument("--budget", type=int, default=10 ** 7)
    q.set_defaults(func=cmd_tile_solve)
    q = tile.add_parser("cover")
    tileset_args(q)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--window", type=int)
    q.add_argument("--budget", type=int, default=10 ** 9)
    q.set_defaults(func=cmd_tile_cover)
    q = tile.add_parser("torus")
    tileset_args(q)
    q.add_argument("--pmax", type=int, default=6)
    q.add_argument("--budget", type=int, default=10 ** 8)
    q.set_defaults(func=cmd_tile_torus)
    q = tile.add_parser("macro")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--orientation", default="SE")
    q.add_argument("--cell", type=int, default=12)
    q.set_defaults(func=cmd_tile_macro)

    ca = group("ca", "sequential halving automaton")
    q = ca.add_parser("run")
    q.add_argument("--f0", type=int, action="append", default=[])
    q.add_argument("--row")
    q.add_argument("--steps", type=int)
    q.set_defaults(func=cmd_ca_run)

    tm = group("tm", "Turing machines")
    for name, fn in (("run", cmd_tm_run), ("table", cmd_tm_table)):
        q = tm.add_parser(name)
        src = q.add_mutually_exclusive_group(required=True)
        src.add_argument("--builtin", choices=["compare", "power_check", "floor_log", "nearest_power", "oscillator"])
        src.add_argument("--spec", help="tmspec file")
        q.add_argument("--b", type=int, default=2)
        if name == "run":
            q.add_argument("--input", action="append", default=[])
            q.add_argument("--unary", action="store_true", help="read integer inputs as unary sticks")
            q.add_argument("--budget", type=int)
            q.add_argument("--trace", action="store_true")
        q.set_defaults(func=fn)

    hier = group("hier", "scale hierarchy")
    q = hier.add_parser("table")
    q.add_argument("--kmax", type=int, required=True)
    q.add_argument("--alphabet-size", type=int, default=2)
    q.set_defaults(func=cmd_hier_table)
    q = hier.add_parser("overlap")
    q.add_argument("--kmax", type=int, default=8)
    q.add_argument("--alphabet-size", type=int, default=2 ** 10)
    q.set_defaults(func=cmd_hier_overlap)
    q = hier.add_parser("counts")
    q.add_argument("--kmax", type=int, default=25)
    q.set_defaults(func=cmd_hier_counts)
    q = hier.add_parser("signal")
    q.add_argument("--l", type=int, default=2)
    q.add_argument("--k", type=int, default=10)
    q.set_defaults(func=cmd_hier_signal)

    pr = group("pressure", "pressure bounds, sampling and certification")

    def forbid_args(q):
        q.add_argument("--forbid", action="append", default=[], help="forbidden 1D word (repeatable)")
        q.add_argument("--alphabet", default="01")
        q.add_argument("--tileset", help="tiledsl file giving a 2D forbidden set")

    q = pr.add_parser("sandwich")
    forbid_args(q)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--beta", default="1")
    q.add_argument("--series", help="lo:hi:step grid of beta values for a CSV series")
    q.set_defaults(func=cmd_pressure_sandwich)
    q = pr.add_parser("sample")
    forbid_args(q)
    q.add_argument("--side", type=int, default=512)
    q.add_argument("--beta", default="10")
    q.add_argument("--sweeps", type=int, default=40)
    q.add_argument("--seeds", type=int, default=1)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--ground-n", type=int, default=2)
    q.set_defaults(func=cmd_pressure_sample)
    q = pr.add_parser("certify")
    forbid_args(q)
    q.add_argument("--center", required=True, help="period word of the centre configuration")
    q.add_argument("--radius", required=True)
    q.add_argument("--beta-lo", required=True)
    q.add_argument("--beta-hi", required=True)
    q.add_argument("--n-max", type=int, default=4)
    q.add_argument("--budget", type=int, default=1000)
    q.set_defaults(func=cmd_pressure_certify)

    me = group("measure", "measures on sign words")
    q = me.add_parser("dstar")
    q.add_argument("--mu", required=True)
    q.add_argument("--nu", required=True)
    q.add_argument("--depth", type=int, default=4)
    q.set_defaults(func=cmd_measure_dstar)
    q = me.add_parser("path")
    q.add_argument("--m", type=int, default=6)
    q.add_argument("--lo", default="1/4")
    q.add_argument("--hi", default="3/4")
    q.add_argument("--horizon", type=int, default=12)
    q.set_defaults(func=cmd_measure_path)
    q = me.add_parser("gamma")
    q.add_argument("--mu", required=True)
    q.add_argument("--depth", type=int, default=2)
    q.add_argument("--cyl-depth", type=int, default=2)
    q.set_defaults(func=cmd_measure_gamma)

    pl = group("pipeline", "end-to-end runs")
    q = pl.add_parser("ground-states")
    src = q.add_mutually_exclusive_group()
    src.add_argument("--machine", default="oscillator")
    src.add_argument("--machine-file", help="tmspec file of a two-tape seed machine")
    src.add_argument("--program", help="JSON weight table driving a dyadic program machine")
    q.add_argument("--kmax", type=int, default=20)
    q.add_argument("--depth", type=int, default=4)
    q.add_argument("--grid", type=int, default=16)
    q.add_argument("--cluster", default="1/64", help="clustering tolerance of the estimate")
    q.add_argument("--tolerance", default="1/10", help="accepted Hausdorff distance to the segment")
    q.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        cmd = f"{args.group} {args.sub}"
        em = Emitter(args.out, cmd, cfg)
        _workers(args)
        return args.func(args, em)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
