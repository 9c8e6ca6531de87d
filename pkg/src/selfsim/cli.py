"""Command-line front end.

    selfsim expand   --presentation adding-machine --generator a --level 2
    selfsim schur    --presentation basilica --field quadratic:2 \\
                     --measure "a=-1/2+1/2*sqrt(2), a^-1=-1/2+1/2*sqrt(2), b=1-1/2*sqrt(2), b^-1=1-1/2*sqrt(2)"
    selfsim entropy  --presentation basilica --measure uniform --N 6
    selfsim growth   --presentation grigorchuk --N 8
    selfsim folner   --presentation adding-machine --sets intervals --N 20
    selfsim walk     --presentation basilica --measure uniform --n 50 --seed 7
    selfsim walk     --presentation basilica --n 6 --samples 100000 --seed 1
    selfsim export   --presentation basilica --out basilica.txt

Every command also accepts ``--config FILE`` with ``key: value`` lines using
the long flag names (``presentation``, ``measure``, ``field``, ``letter``,
``n``, ``N``, ``epsilon``, ``seed``, ``cap``, ``out``, ``format``,
``generator``, ``level``, ``sets``, ``samples``); flags given on the command line win.

Measure specs: ``uniform`` (symmetric generators), ``lazy`` (half at e, half
uniform), ``mA``, ``mB``, ``mA*mB`` (Mother-group families), or a list of
``word=weight`` atoms separated by commas, words being ``*``-products of
generator names and weights ``p/q`` or ``p/q+r/s*sqrt(m)``.

Exit codes: 0 ok, 2 bad configuration, 3 cap exceeded, 4 failed precondition.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
import dataclasses
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .automata import ElementSet, level_permutation
from .catalog import (
    BUILTINS,
    GroupPresentation,
    builtin,
    cycle_notation,
    format_presentation,
    parse_presentation,
)
from .errors import CapExceeded, ConfigError, PreconditionError, SelfSimError
from .lab import (
    RNG_NAME,
    ball,
    boundary,
    entropy_sequence,
    folner_ratio,
    growth_sequence,
    interval,
    sample_endpoints,
    sample_walk,
    translation_ratio,
)
from .measures import SUPPORT_CAP, Measure, convolution_power, convolve, delta, self_similar_decomposition, uniform
from .rwidf import augment, lift_measure, row_projection, schur_trace
from .weights import Weight, parse_weight

CAP_ENV = "SELFSIM_CAP"

FORMATS = ("csv", "json")


def default_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return SUPPORT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {CAP_ENV}={raw!r} is not an integer") from None
    if cap <= 0:
        raise ConfigError(f"{CAP_ENV} must be positive")
    return cap


@dataclass
class ExperimentConfig:
    presentation: str = "basilica"
    measure: str = "uniform"
    field: str = "rational"
    letter: str | None = None
    n: int = 6
    N: int = 8
    epsilon: float | None = None
    seed: int = 0
    cap: int = SUPPORT_CAP
    out: str | None = None
    format: str = "csv"
    generator: str | None = None
    level: int = 2
    sets: str = "balls"
    samples: int = 1
    lines: dict = dataclasses.field(default_factory=dict, repr=False, compare=False)

    def field_m(self) -> int | None:
        if self.field == "rational":
            return None
        return int(self.field.split(":", 1)[1])

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("lines")
        d.pop("out")
        return d


_INT_KEYS = {"n", "N", "seed", "cap", "level", "samples"}


def _coerce(key: str, value: str, line: int | None, column: int | None = None):
    if key in _INT_KEYS:
        try:
            v = int(value)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {value!r}", line, column) from None
        if key in ("cap", "samples") and v <= 0:
            raise ConfigError(f"{key} must be positive", line, column)
        if key in ("n", "N", "level") and v < 0:
            raise ConfigError(f"{key} must be non-negative", line, column)
        return v
    if key == "epsilon":
        try:
            v = float(value)
        except ValueError:
            raise ConfigError(f"epsilon must be a number, got {value!r}", line, column) from None
        if not 0 < v < 1:
            raise ConfigError("epsilon must lie in (0, 1)", line, column)
        return v
    if key == "field":
        if value == "rational":
            return value
        if value.startswith("quadratic:"):
            try:
                m = int(value.split(":", 1)[1])
                Weight(0, 1, m)
            except ValueError:
                raise ConfigError(f"bad quadratic field {value!r}; need quadratic:<square-free m>", line, column) from None
            return value
        raise ConfigError(f"field must be 'rational' or 'quadratic:<m>', got {value!r}", line, column)
    if key == "format" and value not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}", line, column)
    if key == "sets" and value not in ("balls", "intervals"):
        raise ConfigError("sets must be 'balls' or 'intervals'", line, column)
    return value


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key: value`` lines into a config; errors carry line and column."""
    cfg = ExperimentConfig(cap=default_cap())
    known = {f.name for f in fields(ExperimentConfig)} - {"lines"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ConfigError("expected 'key: value'", lineno, 1)
        key = key.strip()
        if key not in known:
            raise ConfigError(f"unknown key {key!r}; known keys: {', '.join(sorted(known))}", lineno, 1)
        after = line.index(":") + 1
        column = after + len(value) - len(value.lstrip()) + 1
        setattr(cfg, key, _coerce(key, value.strip(), lineno, column))
        cfg.lines[key] = lineno
    return cfg


# -- resolving configs -----------------------------------------------------------


def load_presentation(cfg: ExperimentConfig) -> GroupPresentation:
    src = cfg.presentation
    if src in BUILTINS:
        return builtin(src)
    path = Path(src)
    if not path.exists():
        raise ConfigError(
            f"presentation {src!r} is neither a builtin ({', '.join(sorted(BUILTINS))}) nor a file",
            cfg.lines.get("presentation"),
        )
    return parse_presentation(path.read_text())


def parse_measure(spec: str, P: GroupPresentation, field_m: int | None = None, line=None) -> Measure:
    spec = spec.strip()
    sym = [g for _, g in P.symmetric_generators()]
    if spec == "uniform":
        return uniform(sym, P.identity)
    if spec == "lazy":
        half = Weight(1, 0) / 2
        return delta(P.identity).scale(half) + uniform(sym, P.identity).scale(half)
    if spec in ("mA", "mB", "mA*mB"):
        for f in ("A", "B"):
            if f not in P.families:
                raise ConfigError(f"measure {spec!r} needs a generator family {f}", line)
        mA = uniform(P.family("A"), P.identity)
        mB = uniform(P.family("B"), P.identity)
        if spec == "mA":
            return mA
        if spec == "mB":
            return mB
        return convolve(mA, mB)
    atoms: dict = {}
    for item in spec.split(","):
        word, eq, wtext = item.strip().rpartition("=")
        if not eq or not word.strip():
            raise ConfigError(f"measure atom {item.strip()!r} is not 'word=weight'", line)
        try:
            w = parse_weight(wtext, field_m)
        except ValueError as exc:
            raise ConfigError(str(exc), line) from None
        if not w.is_rational and field_m is None:
            raise ConfigError(f"weight {wtext.strip()!r} is irrational but the field is rational", line)
        try:
            g = P.word(word)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), line) from None
        atoms[g] = atoms[g] + w if g in atoms else w
    try:
        mu = Measure(atoms, P.identity)
    except ValueError as exc:
        raise ConfigError(str(exc), line) from None
    if not mu.is_probability():
        raise ConfigError(f"measure weights sum to {mu.mass()}, not 1", line)
    return mu


class Namer:
    """Readable names for group elements: shortest generator words, found lazily by BFS."""

    def __init__(self, P: GroupPresentation, radius: int = 3, budget: int = 20000):
        self.gens = P.symmetric_generators()
        self.names: dict = {P.identity: "e"}
        for n, g in self.gens:
            self.names.setdefault(g, n)
        self.frontier = [(g, self.names[g]) for _, g in self.gens if self.names[g] != "e"]
        self.depth = 1
        self.radius = radius
        self.budget = budget

    def _grow(self) -> bool:
        if self.depth >= self.radius or len(self.names) > self.budget or not self.frontier:
            return False
        nxt = []
        for g, word in self.frontier:
            for n, k in self.gens:
                h = g * k
                if h not in self.names:
                    self.names[h] = f"{word}*{n}"
                    nxt.append((h, self.names[h]))
        self.frontier = nxt
        self.depth += 1
        return True

    def __call__(self, g) -> str:
        while g not in self.names and self._grow():
            pass
        name = self.names.get(g)
        return name if name is not None else "#" + g.code()


# -- output ------------------------------------------------------------------


def fmt(x: float) -> str:
    return f"{x:.17g}"


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def write_output(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict
    header: list[str]
    rows: list[list]
    metadata: dict = dataclasses.field(default_factory=dict)
    seconds: float = 0.0

    def payload(self) -> str:
        """Deterministic part of the JSON report (no timing)."""
        return json.dumps(
            {"results": self.results, "rows": self.rows, "metadata": self.metadata},
            sort_keys=True,
            default=str,
        )

    def render(self, fmt_name: str) -> str:
        if fmt_name == "csv":
            return to_csv(self.header, self.rows)
        doc = {
            "tool": "selfsim",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "timing": {"seconds": round(self.seconds, 6)},
            "columns": self.header,
            "rows": [[fmt(v) if isinstance(v, float) else v for v in r] for r in self.rows],
            "results": self.results,
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


def _letter_index(cfg: ExperimentConfig, P: GroupPresentation) -> int:
    if cfg.letter is None:
        return 0
    try:
        return P.alphabet.index(cfg.letter)
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.lines.get("letter")) from None


# -- commands --------------------------------------------------------------------


def cmd_expand(cfg: ExperimentConfig) -> RunReport:
    P = load_presentation(cfg)
    name = cfg.generator or next(iter(P.generators))
    try:
        g = P.word(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), cfg.lines.get("generator")) from None
    perm = level_permutation(g, cfg.level)
    words = [P.alphabet.format(w) for w in P.alphabet.words(cfg.level)]
    cyc = cycle_notation(list(perm), [f"[{w}]" if len(w) != 1 else w for w in words])
    namer = Namer(P, radius=1)
    d = P.alphabet.size
    matrix = [["0"] * d for _ in range(d)]
    for x, gx in enumerate(g.sections()):
        label = namer(gx)
        matrix[x][g.root[x]] = "1" if label == "e" else label
    rows = [[i, words[i], int(perm[i]), words[perm[i]]] for i in range(len(perm))]
    results = {
        "generator": name,
        "level": cfg.level,
        "permutation": [int(p) for p in perm],
        "cycles": cyc,
        "matrix": matrix,
    }
    return RunReport("expand", cfg.echo(), results, ["index", "word", "image_index", "image_word"], rows)


def _measure_for(cfg: ExperimentConfig, P: GroupPresentation) -> Measure:
    return parse_measure(cfg.measure, P, cfg.field_m(), cfg.lines.get("measure"))


def _atom_rows(m: Measure, namer: Namer) -> list[list]:
    rows = [[namer(g), str(w), float(w)] for g, w in m.items()]
    rows.sort(key=lambda r: (len(r[0]), r[0]))
    return rows


def cmd_schur(cfg: ExperimentConfig) -> RunReport:
    P = load_presentation(cfg)
    mu = _measure_for(cfg, P)
    M = lift_measure(mu)
    namer = Namer(P)
    chain = augment(M)
    results: dict = {
        "quotient_chain": [[str(w) for w in r] for r in chain.p],
        "doubly_stochastic": chain.is_doubly_stochastic(),
    }
    if all(M.row(x) == M.row(0) for x in range(M.size)):
        trace = row_projection(M)
        results["path"] = "row-projection"
        deficit = Weight(0)
        closed = True
        if "A" in P.families and "B" in P.families:
            d = P.alphabet.size
            mA = uniform(P.family("A"), P.identity)
            mB = uniform(P.family("B"), P.identity)
            expected = mA.scale(Weight(d - 1) / d) + mB.scale(Weight(1) / d)
            results["projection_equals_family_mixture"] = trace == expected
            results["family_mixture"] = f"{Weight(d - 1) / d}*mA + {Weight(1) / d}*mB"
    else:
        x = _letter_index(cfg, P)
        res = schur_trace(M, x, epsilon=cfg.epsilon, cap=cfg.cap)
        trace, deficit, closed = res.measure, res.deficit, res.closed_form
        results["path"] = "schur-complement"
        results["letter"] = P.alphabet.letters[x]
        results["terms"] = res.terms
    alpha = self_similar_decomposition(trace, mu) if deficit == 0 else None
    results["self_similar"] = alpha is not None
    results["coefficient"] = None if alpha is None else str(alpha)
    results["coefficient_float"] = None if alpha is None else fmt(float(alpha))
    results["deficit"] = str(deficit)
    results["closed_form"] = closed
    rows = _atom_rows(trace, namer)
    return RunReport("schur", cfg.echo(), results, ["atom", "weight", "weight_float"], rows)


def cmd_entropy(cfg: ExperimentConfig) -> RunReport:
    P = load_presentation(cfg)
    mu = _measure_for(cfg, P)
    rep = entropy_sequence(mu, cfg.N, cap=cfg.cap)
    rows = []
    for n, (h, s) in enumerate(zip(rep.entropies, rep.support_sizes)):
        per = h / n if n else ""
        diff = h - rep.entropies[n - 1] if n else ""
        rows.append([n, s, h, per, diff])
    results = {"status": rep.status, "subadditive": rep.subadditive, "violations": rep.violations}
    return RunReport(
        "entropy", cfg.echo(), results, ["n", "support_size", "entropy", "entropy_per_step", "difference"], rows
    )


def cmd_growth(cfg: ExperimentConfig) -> RunReport:
    P = load_presentation(cfg)
    rep = growth_sequence(P, cfg.N, cap=cfg.cap)
    rows = []
    for n, s in enumerate(rep.sizes):
        ratio = s / rep.sizes[n - 1] if n else ""
        lg = rep.log_growth[n - 1] if n else ""
        rows.append([n, s, ratio, lg])
    return RunReport("growth", cfg.echo(), {"sizes": list(rep.sizes)}, ["n", "ball_size", "ratio", "log_growth"], rows)


def cmd_folner(cfg: ExperimentConfig) -> RunReport:
    P = load_presentation(cfg)
    rows = []
    if cfg.sets == "balls":
        B = ball(P, cfg.N, cap=cfg.cap)
        for n in range(cfg.N + 1):
            A = ElementSet(tuple(g for g, r in zip(B.members, B.radii) if r <= n), P, n)
            r = folner_ratio(A, P)
            rows.append([n, len(A), len(boundary(A, P)), str(r), float(r)])
        header = ["n", "set_size", "boundary_size", "ratio", "ratio_float"]
    else:
        name = cfg.generator or next(iter(P.generators))
        g = P.word(name)
        for n in range(cfg.N + 1):
            A = interval(g, n, P.identity)
            r = folner_ratio(A, P)
            t = translation_ratio(A, g)
            rows.append([n, len(A), len(boundary(A, P)), str(r), float(r), str(t)])
        header = ["n", "set_size", "boundary_size", "ratio", "ratio_float", "translation_ratio"]
    return RunReport("folner", cfg.echo(), {"sets": cfg.sets}, header, rows)


def cmd_walk(cfg: ExperimentConfig) -> RunReport:
    P = load_presentation(cfg)
    mu = _measure_for(cfg, P)
    if cfg.samples > 1:
        return _walk_endpoints(cfg, P, mu)
    sample = sample_walk(mu, cfg.n, cfg.seed)
    namer = Namer(P, radius=8)
    rows = [[0, "", namer(sample.positions[0])]]
    for n, (h, g) in enumerate(zip(sample.increments, sample.positions[1:]), 1):
        rows.append([n, namer(h), namer(g)])
    meta = {"rng": RNG_NAME, "seed": cfg.seed}
    return RunReport("walk", cfg.echo(), {"steps": sample.steps}, ["n", "increment", "position"], rows, meta)


def _walk_endpoints(cfg: ExperimentConfig, P: GroupPresentation, mu: Measure) -> RunReport:
    """Empirical law of g_n over independent walks, next to the exact law when it fits the cap."""
    counts = sample_endpoints(mu, cfg.n, cfg.samples, cfg.seed)
    try:
        exact = convolution_power(mu, cfg.n, cfg.cap)
    except CapExceeded:
        exact = None
    namer = Namer(P, radius=max(3, cfg.n))
    atoms = set(counts) | (exact.support if exact is not None else set())
    rows = []
    worst = 0.0
    for g in atoms:
        c = counts.get(g, 0)
        freq = c / cfg.samples
        if exact is None:
            rows.append([namer(g), c, freq, "", ""])
            continue
        p = float(exact[g])
        sd = math.sqrt(p * (1 - p) / cfg.samples)
        z = (freq - p) / sd if sd > 0 else (0.0 if freq == p else math.inf)
        worst = max(worst, abs(z))
        rows.append([namer(g), c, freq, p, z])
    rows.sort(key=lambda r: (len(r[0]), r[0]))
    results = {
        "samples": cfg.samples,
        "steps": cfg.n,
        "observed_atoms": len(counts),
        "exact_atoms": None if exact is None else len(exact),
        "max_abs_z": None if exact is None else fmt(worst),
    }
    meta = {"rng": RNG_NAME, "seed": cfg.seed}
    header = ["position", "count", "frequency", "exact", "z"]
    return RunReport("walk", cfg.echo(), results, header, rows, meta)


def cmd_export(cfg: ExperimentConfig) -> str:
    return format_presentation(load_presentation(cfg))


COMMANDS = {
    "expand": cmd_expand,
    "schur": cmd_schur,
    "entropy": cmd_entropy,
    "growth": cmd_growth,
    "folner": cmd_folner,
    "walk": cmd_walk,
}


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key: value config file")
    common.add_argument("--presentation", help="builtin name or presentation file")
    common.add_argument("--measure")
    common.add_argument("--field", help="rational | quadratic:<m>")
    common.add_argument("--letter")
    common.add_argument("--n", dest="n")
    common.add_argument("--N", dest="N")
    common.add_argument("--epsilon")
    common.add_argument("--seed")
    common.add_argument("--cap")
    common.add_argument("--out")
    common.add_argument("--format")
    common.add_argument("--generator")
    common.add_argument("--level")
    common.add_argument("--sets")
    common.add_argument("--samples")
    parser = argparse.ArgumentParser(prog="selfsim", description="Self-similar groups and random walks.")
    parser.add_argument("--version", action="version", version=f"selfsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["export"]:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    if ns.config:
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        cfg = parse_config(text)
    else:
        cfg = ExperimentConfig(cap=default_cap())
    for f in fields(ExperimentConfig):
        value = getattr(ns, f.name, None)
        if f.name == "lines" or value is None:
            continue
        setattr(cfg, f.name, _coerce(f.name, value, None) if isinstance(value, str) else value)
        cfg.lines.pop(f.name, None)
    return cfg


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if ns.command == "export":
            write_output(cmd_export(cfg), cfg.out)
            return 0
        start = time.perf_counter()
        report = COMMANDS[ns.command](cfg)
        report.seconds = time.perf_counter() - start
        if ns.command == "expand" and cfg.format == "csv" and cfg.out is None:
            r = report.results
            print(f"level {r['level']} permutation of {r['generator']}: {r['cycles']}")
            print("array:", " ".join(map(str, r["permutation"])))
            print("matrix:", "; ".join(" ".join(row) for row in r["matrix"]))
            return 0
        write_output(report.render(cfg.format), cfg.out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"config error: {exc.args[0]}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 4
    except SelfSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
