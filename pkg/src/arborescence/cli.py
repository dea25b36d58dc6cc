"""Command-line front end: generators, pipelines, certificate I/O and benchmarks.

Pipelines pass a *bundle* on stdin/stdout: ``#`` header lines followed by
sections, each introduced by a ``%% name`` line (``complex``, ``function``,
``matching``, ``certificate``, ``filtration``, ``cat0``, ``schedule``).
A file without section markers is read as a bare complex.

Exit codes: 0 success (valid / collapsible), 1 negative verdict (impossible,
invalid, not CAT(0), no certificate found), 2 budget exhausted, 3 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
import tracemalloc
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import catzero, collapse, generators, geometry, morse, scheduler
from .certificate import (__version__, CollapseCertificate, read_certificate, verify_certificate,
                          write_certificate)
from .complex import ComplexError, derived_subdivision, read_complex, write_complex

EXIT_OK, EXIT_NEGATIVE, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    """Malformed or missing input (exit code 3)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- bundles -----------------------------------------------------------------------

class Bundle:
    """Ordered named text sections plus header key/values."""

    def __init__(self):
        self.header: dict[str, str] = {}
        self.sections: list[tuple[str, str]] = []

    def get(self, name: str) -> str | None:
        for k, text in self.sections:
            if k == name:
                return text
        return None

    def all(self, name: str) -> list[str]:
        return [text for k, text in self.sections if k == name]

    def put(self, name: str, text: str) -> None:
        """Replace every section called ``name`` by one new section."""
        self.drop(name)
        self.sections.append((name, text))

    def add(self, name: str, text: str) -> None:
        self.sections.append((name, text))

    def drop(self, *names: str) -> None:
        self.sections = [(k, t) for k, t in self.sections if k not in names]

    def render(self) -> str:
        out = [f"# arborescence {__version__}"]
        out += [f"# {k} {v}" for k, v in self.header.items()]
        for name, text in self.sections:
            out.append(f"%% {name}")
            out.append(text.rstrip("\n"))
        return "\n".join(out) + "\n"

    @classmethod
    def parse(cls, text: str) -> Bundle:
        b = cls()
        if not any(line.startswith("%%") for line in text.splitlines()):
            b.sections.append(("complex", text))
            return b
        name, buf = None, []
        for line in text.splitlines():
            if line.startswith("%%"):
                if name is not None:
                    b.sections.append((name, "\n".join(buf) + "\n"))
                parts = line[2:].split()
                if not parts:
                    raise InputError("section marker without a name")
                name, buf = parts[0], []
            elif name is None:
                tok = line.lstrip("#").split(None, 1)
                if line.startswith("#") and len(tok) == 2 and tok[0] != "arborescence":
                    b.header[tok[0]] = tok[1].strip()
            else:
                buf.append(line)
        if name is not None:
            b.sections.append((name, "\n".join(buf) + "\n"))
        return b


def write_function(f: geometry.MetricEvaluator) -> str:
    if isinstance(f, geometry.DistanceFunction):
        return "distance " + " ".join(repr(float(x)) for x in f.basepoint) + "\n"
    if isinstance(f, geometry.VertexFunction):
        return "".join(f"vertex {v} {f.values[v]!r}\n" for v in sorted(f.values))
    raise InputError(f"cannot serialise {type(f).__name__}")


def read_function(text: str, C) -> geometry.MetricEvaluator:
    values = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "distance":
            return geometry.DistanceFunction(C, [float(x) for x in tok[1:]])
        if tok[0] == "vertex" and len(tok) == 3:
            values[int(tok[1])] = float(tok[2])
        else:
            raise InputError(f"unrecognised function record {line!r}")
    if not values:
        raise InputError("empty function section")
    return geometry.VertexFunction(C, values)


# -- shared helpers ----------------------------------------------------------------

def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _load(args) -> tuple[Bundle, object]:
    b = Bundle.parse(_read_input(args.input))
    text = b.get("complex")
    if text is None:
        raise InputError("input has no complex section")
    C = read_complex(text)
    if len(C) == 0:
        raise InputError("input complex is empty")
    return b, C


def _function(b: Bundle, C, args) -> geometry.MetricEvaluator:
    text = b.get("function")
    if text is not None:
        return read_function(text, C)
    if C.embedding is None:
        return geometry.VertexFunction.random(C, args.seed)
    return geometry.generic_distance(C, args.seed)


def _emit(args, b: Bundle, C=None, t0: float | None = None) -> None:
    b.header = {"seed": str(args.seed), "delta": repr(geometry.DELTA),
                "perturb-scale": repr(geometry.PERTURB_SCALE),
                "budget": str(args.budget)}
    if C is not None:
        b.header["complex"] = C.hash
    if not args.deterministic and t0 is not None:
        b.header["elapsed-ms"] = f"{1000 * (time.perf_counter() - t0):.3f}"
    text = b.render()
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands -------------------------------------------------------------------

def _ints(values, n_min, n_max, what):
    if not n_min <= len(values) <= n_max:
        raise InputError(f"{what} takes {n_min}..{n_max} integer arguments")
    try:
        return [int(x) for x in values]
    except ValueError as exc:
        raise InputError(f"{what}: {exc}") from exc


def cmd_generate(args) -> int:
    fam, rest = args.family, args.params
    if fam == "grid":
        C = generators.grid(*_ints(rest, 2, 3, "grid"))
    elif fam == "staircase":
        C = generators.staircase(_ints(rest, 1, 64, "staircase") if rest else [3, 2, 1])
    elif fam == "tree-of-cubes":
        C = generators.tree_of_cubes(*(_ints(rest, 3, 3, "tree-of-cubes") if rest else [1, 1, 1]))
    elif fam == "dunce-hat":
        C = generators.dunce_hat()
    elif fam == "bing-house":
        C = generators.bing_house()
    elif fam == "simplex":
        C = generators.simplex_complex(*_ints(rest, 1, 1, "simplex"))
    elif fam == "boundary-simplex":
        C = generators.boundary_simplex(*_ints(rest, 1, 1, "boundary-simplex"))
    elif fam == "cube-corner":
        C = generators.cube_corner()
    elif fam == "annulus":
        C = generators.cubical_annulus(*(_ints(rest, 1, 1, "annulus") if rest else [3]))
    elif fam == "sd":
        if len(rest) != 1:
            raise InputError("sd takes one input path")
        b = Bundle.parse(_read_input(rest[0]))
        C = derived_subdivision(read_complex(b.get("complex") or ""))
    else:
        raise InputError(f"unknown family {fam!r}")
    b = Bundle()
    b.put("complex", write_complex(C))
    _emit(args, b, C)
    return EXIT_OK


def cmd_check_cat0(args) -> int:
    t0 = time.perf_counter()
    b, C = _load(args)
    rep = catzero.cat0_cube_check(C, args.budget or catzero.TIETZE_BUDGET)
    b.put("cat0", catzero.write_report(rep))
    _emit(args, b, C, t0)
    _note(f"verdict {rep.verdict}")
    if rep.verdict == catzero.CAT0:
        return EXIT_OK
    return EXIT_BUDGET if rep.verdict == catzero.INCONCLUSIVE else EXIT_NEGATIVE


def cmd_morse(args) -> int:
    t0 = time.perf_counter()
    b, C = _load(args)
    if args.from_corner:
        if C.embedding is None:
            raise InputError("--from-corner needs an embedded complex")
        low = min(C.vertices, key=lambda v: tuple(C.embedding[v]))
        f = geometry.DistanceFunction(C, C.embedding[low])
    else:
        f = _function(b, C, args)
    M, rec, acyc = morse.analyse(C, f, args.seed)
    b.drop("certificate", "schedule")
    b.put("function", write_function(M.function or f))
    b.put("matching", f"# critical-counts {' '.join(map(str, M.counts()))}\n" + morse.write_matching(M))
    _emit(args, b, C, t0)
    _note(f"critical {len(M.critical)} counts {' '.join(map(str, M.counts()))} "
          f"acyclic {'yes' if acyc else 'no'}")
    return EXIT_OK if acyc else EXIT_NEGATIVE


def cmd_collapse(args) -> int:
    t0 = time.perf_counter()
    b, C = _load(args)
    budget = args.budget or collapse.DEFAULT_BUDGET
    method = args.method
    cert: CollapseCertificate | None = None
    if method == "greedy":
        g = collapse.greedy_collapse(C)
        if not g.ok:
            _note(f"greedy collapse stuck with {len(g.stuck)} faces left")
            return EXIT_NEGATIVE
        cert = g.certificate
    elif method == "exhaustive":
        res = collapse.exhaustive_collapsibility(C, budget=budget)
        if res.status == collapse.IMPOSSIBLE:
            _note(f"impossible: {res.reason}")
            return EXIT_NEGATIVE
        if res.status == collapse.BUDGET_EXCEEDED:
            _note(f"budget of {budget} search nodes exceeded")
            return EXIT_BUDGET
        cert = res.certificate
    elif method == "gradient":
        text = b.get("matching")
        if text is not None:
            M = morse.read_matching(text, C)
        else:
            M, _, _ = morse.analyse(C, _function(b, C, args), args.seed)
        if len(M.critical) != 1:
            _note(f"matching has {len(M.critical)} critical faces; no collapse to a vertex")
            return EXIT_NEGATIVE
        try:
            cert = morse.matching_to_collapse(M, C)
        except morse.NotAcyclic as exc:
            _note(f"not acyclic: {exc}")
            return EXIT_NEGATIVE
    elif method == "sd-schedule":
        f = _function(b, C, args)
        try:
            cert = scheduler.sd_collapse_schedule(C, f, budget=budget)
        except scheduler.ScheduleError as exc:
            _note(f"schedule failed: {exc}")
            return EXIT_NEGATIVE
        sd = cert.complex
        b = Bundle()
        b.put("complex", write_complex(sd))
        b.put("schedule", scheduler.write_schedule(cert))
        C = sd
    b.drop("certificate")
    b.add("certificate", write_certificate(cert))
    _emit(args, b, C, t0)
    _note(f"certificate {len(cert)} steps")
    return EXIT_OK


def cmd_verify(args) -> int:
    b, C = _load(args)
    texts = b.all("certificate")
    if not texts:
        raise InputError("input has no certificate section")
    bad = 0
    for k, text in enumerate(texts):
        cert = read_certificate(text, C)
        v = verify_certificate(cert, C)
        if v:
            print(f"certificate {k} valid {len(cert)} steps")
        else:
            bad += 1
            print(f"certificate {k} invalid at step {v.step}: {v.reason}")
    return EXIT_OK if bad == 0 else EXIT_NEGATIVE


def _filtration_of(args):
    budget = args.budget or collapse.DEFAULT_BUDGET
    if args.grid is not None:
        return collapse.grid_filtration(args.grid, budget)
    b, C = _load(args)
    f = _function(b, C, args)
    if not isinstance(f, geometry.DistanceFunction):
        raise InputError("sub-level filtrations need a distance function")
    d = np.sqrt([f.vertex_value(v) for v in C.vertices])
    radii = np.linspace(d.min(), d.max(), args.stages + 1)[1:]
    return collapse.sublevel_filtration(C, f, radii, budget=budget)


def cmd_filtration(args) -> int:
    t0 = time.perf_counter()
    try:
        filt = _filtration_of(args)
    except collapse.FiltrationStuck as exc:
        _note(f"filtration stuck: {exc}")
        return EXIT_BUDGET if exc.status == collapse.BUDGET_EXCEEDED else EXIT_NEGATIVE
    C = filt.complex
    lines = []
    for k, S in enumerate(filt.stages):
        lines.append(f"stage {k} " + " ".join(map(str, sorted(S.members))))
    for st in filt.stats:
        lines.append(f"cost {st['stage']} added {st['added']} faces {st['faces']} "
                     f"ops {st['ops']} steps {st['steps']} method {st['method']}")
    b = Bundle()
    b.put("complex", write_complex(C))
    b.put("filtration", "\n".join(lines) + "\n")
    for cert in filt.certificates:
        b.add("certificate", write_certificate(cert))
    _emit(args, b, C, t0)
    _note(f"{len(filt.stages)} stages certified")
    return EXIT_OK


# -- bench -------------------------------------------------------------------------

def _bench_complex(family: str, size: int):
    if family == "grid":
        return generators.grid(size, size)
    if family == "grid3":
        return generators.grid(size, size, 2)
    if family == "staircase":
        return generators.staircase(list(range(size, 0, -1)))
    if family == "tree-of-cubes":
        return generators.tree_of_cubes(size, size, size)
    if family == "simplex":
        return generators.simplex_complex(size)
    raise InputError(f"unknown bench family {family!r}")


def _bench_task(task):
    family, size, op, seed = task
    tracemalloc.start()
    t0 = time.perf_counter()
    if family == "grid-filtration":
        filt = collapse.grid_filtration(size)
        millis = 1000 * (time.perf_counter() - t0)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        return [("grid-filtration", st["stage"], st["added"], "stage-certificate",
                 st["millis"], peak) for st in filt.stats] + \
               [("grid-filtration", size, len(filt.complex), "filtration", millis, peak)]
    C = _bench_complex(family, size)
    if op == "morse":
        f = geometry.generic_distance(C, seed)
        M, _, _ = morse.analyse(C, f, seed)
        morse.matching_to_collapse(M, C)
    elif op == "greedy":
        collapse.greedy_collapse(C)
    elif op == "sd-schedule":
        scheduler.sd_collapse_schedule(C, geometry.generic_distance(C, seed))
    millis = 1000 * (time.perf_counter() - t0)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return [(family, size, len(C), op, millis, peak)]


def bench_tasks(families, max_size: int, seed: int):
    tasks = []
    for fam in families:
        if fam == "grid-filtration":
            tasks.append((fam, max_size, "filtration", seed))
            continue
        sizes = range(1, max_size + 1) if fam != "simplex" else range(1, min(max_size, 6) + 1)
        for n in sizes:
            for op in ("morse", "greedy"):
                tasks.append((fam, n, op, seed))
            if fam in ("grid", "staircase") and n <= 3:
                tasks.append((fam, n, "sd-schedule", seed))
    return tasks


def cmd_bench(args) -> int:
    tasks = bench_tasks(args.families, args.max_size, args.seed)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_task, tasks))
    else:
        results = [_bench_task(t) for t in tasks]
    buf = io.StringIO()
    buf.write(f"# arborescence {__version__}\n# seed {args.seed}\n# delta {geometry.DELTA!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "size", "faces", "op", "millis", "peak_bytes"])
    for rows in results:
        for fam, size, faces, op, millis, peak in rows:
            w.writerow([fam, size, faces, op, f"{millis:.3f}", peak])
    text = buf.getvalue()
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for generic functions")
    common.add_argument("--budget", type=int, default=None,
                        help="search budget (nodes for exhaustive search, moves for Tietze)")
    common.add_argument("--deterministic", action="store_true",
                        help="omit timing headers so identical runs give identical bytes")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (bench)")
    common.add_argument("--delta", type=float, default=None, help="tie tolerance on squared distances")
    common.add_argument("-o", "--output", default=None, help="output path (default stdout)")

    p = _Parser(prog="arborescence", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"arborescence {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="emit a generated complex")
    g.add_argument("family")
    g.add_argument("params", nargs="*")
    g.set_defaults(run=cmd_generate)

    c = sub.add_parser("check-cat0", parents=[common], help="flag links and simple connectivity")
    c.add_argument("input", nargs="?", default="-")
    c.set_defaults(run=cmd_check_cat0)

    m = sub.add_parser("morse", parents=[common], help="gradient matching and critical counts")
    m.add_argument("input", nargs="?", default="-")
    m.add_argument("--from-corner", action="store_true",
                   help="distance from the lexicographically lowest vertex")
    m.set_defaults(run=cmd_morse)

    k = sub.add_parser("collapse", parents=[common], help="produce a collapse certificate")
    k.add_argument("method", choices=["greedy", "exhaustive", "gradient", "sd-schedule"])
    k.add_argument("input", nargs="?", default="-")
    k.set_defaults(run=cmd_collapse)

    v = sub.add_parser("verify", parents=[common], help="replay certificates")
    v.add_argument("input", nargs="?", default="-")
    v.set_defaults(run=cmd_verify)

    f = sub.add_parser("filtration", parents=[common], help="certified arborescence stages")
    f.add_argument("input", nargs="?", default="-")
    f.add_argument("--grid", type=int, default=None, help="growing n x n grid filtration")
    f.add_argument("--stages", type=int, default=5, help="sub-level stages for an input complex")
    f.set_defaults(run=cmd_filtration)

    b = sub.add_parser("bench", parents=[common], help="timing CSV over generator families")
    b.add_argument("--families", nargs="+",
                   default=["grid", "staircase", "tree-of-cubes", "grid-filtration"])
    b.add_argument("--max-size", type=int, default=4)
    b.set_defaults(run=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    saved = geometry.DELTA
    if args.delta is not None:
        geometry.DELTA = args.delta
    try:
        return args.run(args)
    except (InputError, ComplexError, ValueError, KeyError) as exc:
        _note(f"input error: {exc}")
        return EXIT_INPUT
    finally:
        geometry.DELTA = saved


if __name__ == "__main__":
    sys.exit(main())
