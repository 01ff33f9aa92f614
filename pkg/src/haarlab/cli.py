"""Command-line front end.

    haarlab <command> --config <file> [--format csv|json] [--out <file>] [--table NAME]

The config is one JSON document; see README.md for the schema.  Every
command produces a :class:`Report` (named tables plus warnings) that is
serialized deterministically: CSV prints one table, JSON prints all of them
with sorted keys.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import Character, Endo, Group
from .diffusion import (build_example_separating, density_report, example_automaton,
                        ledrappier_matrix, rank_trajectory)
from .errors import ConfigError, GroupMismatchError, HaarlabError, InvalidArgumentError
from .lca import Lca, char_power, crt_split, diffusion_hypothesis, lca_power_coeffs
from .measures import (Bernoulli, MarkovChain, NStepMarkov, cesaro_scan, ehm_lambda,
                       hm_scan, make_measure, measure_fourier, monte_carlo_check)
from .mrf import (GridMrf, Interaction, ising_mrf, lamination_fidelity, row_mrf_check,
                  sandwich_measure, sandwich_rows, uhm_ehm_check, verify_mrf_property)
from .numtheory import lucas_binom

COMMANDS = ("group-info", "lucas", "rank-traj", "diffusion-report", "separating",
            "ledrappier", "fourier", "ehm-lambda", "cesaro", "hm-scan", "mrf-check",
            "simulate")

TOP_KEYS = {"group", "dimension", "lca", "character", "cylinder", "measure", "mrf",
            "analysis"}
ANALYSIS_KEYS = {"Nmax", "thresholds", "window", "seed", "samples", "max_rank",
                 "subsequence", "N", "n", "p", "j", "V_extent", "R", "cross_check",
                 "N_list", "budget", "lambda", "tol", "method", "regions"}
MEASURE_KEYS = {"kind", "weights", "transitions", "initial", "U", "block_probs", "kernel"}
MRF_KEYS = {"W", "H", "boundary", "ising", "U", "potentials"}


# ---------------------------------------------------------------------------
# config

@dataclass
class RunConfig:
    raw: dict
    group: Group | None = None
    dimension: int = 1
    lca: Lca | None = None
    character: Character | None = None
    cylinder: dict | None = None
    measure: Any = None
    mrf: GridMrf | None = None
    analysis: dict = field(default_factory=dict)

    def need(self, name: str):
        value = getattr(self, name)
        if value is None:
            raise ConfigError("required for this command", name)
        return value

    def arg(self, key: str, default=None, required: bool = False):
        if key in self.analysis:
            return self.analysis[key]
        if required:
            raise ConfigError("required for this command", f"analysis.{key}")
        return default


def _check_keys(obj, allowed: set, path: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", path)
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r}", f"{path}.{k}" if path else k)


def _int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {v!r}", path)
    return v


def _site(v, dim: int, path: str) -> tuple[int, ...]:
    if isinstance(v, int) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or len(v) != dim:
        raise ConfigError(f"expected a site of {dim} integers", path)
    return tuple(_int(x, f"{path}[{i}]") for i, x in enumerate(v))


def _parse_group(g) -> Group:
    if not isinstance(g, dict) or len(g) != 1:
        raise ConfigError("expected {cyclic: n} or {vector: {p, r, J}}", "group")
    try:
        if "cyclic" in g:
            return Group.cyclic(_int(g["cyclic"], "group.cyclic"))
        if "vector" in g:
            v = g["vector"]
            _check_keys(v, {"p", "r", "J"}, "group.vector")
            return Group.vector(_int(v.get("p"), "group.vector.p"),
                                _int(v.get("r", 1), "group.vector.r"),
                                _int(v.get("J"), "group.vector.J"))
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc), "group") from None
    raise ConfigError(f"unknown group kind {next(iter(g))!r}", "group")


def _parse_lca(items, group: Group, dim: int) -> Lca:
    if not isinstance(items, list):
        raise ConfigError("expected a list of coefficients", "lca")
    coeffs = []
    for i, it in enumerate(items):
        path = f"lca[{i}]"
        _check_keys(it, {"site", "scalar", "matrix"}, path)
        if "site" not in it:
            raise ConfigError("missing", f"{path}.site")
        site = _site(it["site"], dim, f"{path}.site")
        if ("scalar" in it) == ("matrix" in it):
            raise ConfigError("give exactly one of scalar / matrix", path)
        try:
            if "scalar" in it:
                f = Endo.scalar(group, _int(it["scalar"], f"{path}.scalar"))
            else:
                f = Endo.matrix(group, it["matrix"])
        except GroupMismatchError as exc:
            raise ConfigError(f"type mismatch: {exc}", path) from None
        coeffs.append((site, f))
    return Lca(group, dim, coeffs)


def _parse_assignments(items, group: Group, dim: int, path: str) -> list:
    if not isinstance(items, list):
        raise ConfigError("expected a list", path)
    out = []
    for i, it in enumerate(items):
        p = f"{path}[{i}]"
        _check_keys(it, {"site", "value"}, p)
        for k in ("site", "value"):
            if k not in it:
                raise ConfigError("missing", f"{p}.{k}")
        try:
            out.append((_site(it["site"], dim, f"{p}.site"), group.element(it["value"])))
        except GroupMismatchError as exc:
            raise ConfigError(str(exc), f"{p}.value") from None
    return out


def _parse_measure(m, group: Group):
    _check_keys(m, MEASURE_KEYS, "measure")
    kind = m.get("kind")
    required = {"bernoulli": ["weights"], "markov": ["transitions"], "haar": [],
                "nstep": ["U"]}
    if kind not in required:
        raise ConfigError(f"unknown kind {kind!r}", "measure.kind")
    for k in required[kind]:
        if k not in m:
            raise ConfigError("missing", f"measure.{k}")
    if kind == "nstep" and "block_probs" not in m and "kernel" not in m:
        raise ConfigError("give block_probs or kernel", "measure")
    try:
        return make_measure(dict(m, group=group))
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc), "measure") from None


def _parse_mrf(m, group: Group) -> GridMrf:
    _check_keys(m, MRF_KEYS, "mrf")
    for k in ("W", "H"):
        if k not in m:
            raise ConfigError("missing", f"mrf.{k}")
    W, H = _int(m["W"], "mrf.W"), _int(m["H"], "mrf.H")
    boundary = m.get("boundary", "strip")
    try:
        if "ising" in m:
            _check_keys(m["ising"], {"agree", "disagree"}, "mrf.ising")
            return ising_mrf(W, H, m["ising"].get("agree", 2.0),
                             m["ising"].get("disagree", 1.0), boundary, group)
        if "U" not in m or "potentials" not in m:
            raise ConfigError("give ising or U + potentials", "mrf")
        U = [tuple(_site(u, 2, f"mrf.U[{i}]")) for i, u in enumerate(m["U"])]
        return GridMrf.from_interactions(group, W, H, [Interaction(tuple(U), m["potentials"])],
                                         boundary)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc), "mrf") from None


def load_config(source: str | Path) -> RunConfig:
    """Parse a JSON config from a path or from inline text starting with ``{``."""
    text = str(source)
    if not text.lstrip().startswith("{"):
        try:
            text = Path(text).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON parse error at line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}") from None
    _check_keys(raw, TOP_KEYS, "")
    cfg = RunConfig(raw=raw)
    dim = raw.get("dimension", 1)
    if dim not in (1, 2):
        raise ConfigError("must be 1 or 2", "dimension")
    cfg.dimension = dim
    if "group" in raw:
        cfg.group = _parse_group(raw["group"])
    for key in ("lca", "character", "cylinder", "measure", "mrf"):
        if key in raw and cfg.group is None:
            raise ConfigError("needs a group", key)
    if "lca" in raw:
        cfg.lca = _parse_lca(raw["lca"], cfg.group, dim)
    if "character" in raw:
        cfg.character = Character(cfg.group, _parse_assignments(raw["character"], cfg.group,
                                                                dim, "character"), dim)
    if "cylinder" in raw:
        cfg.cylinder = dict(_parse_assignments(raw["cylinder"], cfg.group, 1, "cylinder"))
    if "measure" in raw:
        cfg.measure = _parse_measure(raw["measure"], cfg.group)
    if "mrf" in raw:
        cfg.mrf = _parse_mrf(raw["mrf"], cfg.group)
    if "analysis" in raw:
        _check_keys(raw["analysis"], ANALYSIS_KEYS, "analysis")
        cfg.analysis = dict(raw["analysis"])
    return cfg


# ---------------------------------------------------------------------------
# reports

@dataclass
class Table:
    columns: list[str]
    rows: list[list]


@dataclass
class Report:
    command: str
    config: dict
    tables: dict[str, Table]
    primary: str
    warnings: list[str] = field(default_factory=list)

    @property
    def digest(self) -> str:
        return hashlib.sha256(_dumps(self.config).encode()).hexdigest()


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def _dumps(obj) -> str:
    """JSON with sorted keys and 17-digit floats; non-finite floats become strings."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _fmt_float(x) if math.isfinite(x) else json.dumps(_fmt_float(x))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_report(report: Report, fmt: str = "csv", table: str | None = None) -> bytes:
    if fmt == "csv":
        name = table or report.primary
        if name not in report.tables:
            raise ConfigError(f"no table {name!r}; have {sorted(report.tables)}", "--table")
        t = report.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(t.columns)
        for row in t.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue().encode()
    if fmt == "json":
        doc = {
            "command": report.command,
            "config": report.config,
            "config_digest": report.digest,
            "primary": report.primary,
            "tables": {k: {"columns": t.columns, "rows": t.rows}
                       for k, t in report.tables.items()},
            "warnings": report.warnings,
        }
        return (_dumps(doc) + "\n").encode()
    raise ConfigError(f"unsupported format {fmt!r}", "--format")


# ---------------------------------------------------------------------------
# commands

def _group_info(cfg: RunConfig) -> Report:
    g = cfg.need("group")
    rows = [[p, r, p**r] for p, r in g.crt_decompose()]
    summary = [[str(g), g.kind, g.exponent, g.dim, g.order]]
    return Report("group-info", cfg.raw, {
        "summary": Table(["group", "kind", "exponent", "dim", "order"], summary),
        "components": Table(["prime", "power", "modulus"], rows)}, "summary")


def _lucas(cfg: RunConfig) -> Report:
    N, n, p = (cfg.arg(k, required=True) for k in ("N", "n", "p"))
    v = lucas_binom(N, n, p)
    return Report("lucas", cfg.raw, {"lucas": Table(["N", "n", "p", "value"],
                                                    [[N, n, p, v]])}, "lucas")


def _rank_traj(cfg: RunConfig) -> Report:
    traj = rank_trajectory(cfg.need("character"), cfg.need("lca"),
                           cfg.arg("Nmax", required=True))
    return Report("rank-traj", cfg.raw, {"ranks": Table(["N", "rank"], traj.rows())}, "ranks",
                  ["ranks are exact at each N; growth beyond Nmax is not implied"])


def _diffusion_report(cfg: RunConfig) -> Report:
    F, chi = cfg.need("lca"), cfg.need("character")
    traj = rank_trajectory(chi, F, cfg.arg("Nmax", required=True))
    thresholds = cfg.arg("thresholds", [1, 2, 4, 8, 16])
    dens = density_report(traj, thresholds)
    tables = {"density": Table(["R", "fraction"], [[R, f] for R, f in dens.items()]),
              "ranks": Table(["N", "rank"], traj.rows())}
    warnings = [f"empirical density at Nmax={traj.Nmax}; not a proof of diffusion"]
    if F.group.is_cyclic:
        hyp = diffusion_hypothesis(F)
        tables["hypothesis"] = Table(["prime", "coprime_coefficients", "satisfied"],
                                     [[p, c, c >= 2] for p, c in hyp.coprime_counts.items()])
        comps = crt_split(F)
        tables["components"] = Table(["modulus", "lca"],
                                     [[c.group.exponent, repr(c)] for c in comps])
        if not hyp.satisfied:
            warnings.append("coefficient hypothesis fails for some prime divisor")
    return Report("diffusion-report", cfg.raw, tables, "density", warnings)


def _separating(cfg: RunConfig) -> Report:
    j, p = cfg.arg("j", required=True), cfg.arg("p", required=True)
    ex = build_example_separating(j, p, cfg.arg("V_extent", required=True),
                                  cfg.arg("R", required=True),
                                  cross_check=bool(cfg.arg("cross_check", False)))
    cert = ex.certificate
    rows = [[w, 2 * w, ex.checks[w]] for w in ex.words]
    summary = [[j, p, 2 * j, ex.i0, " ".join(map(str, ex.i_list)), len(cert.W),
                cert.verified]]
    return Report("separating", cfg.raw, {
        "words": Table(["w", "site", "checks_pass"], rows),
        "summary": Table(["j", "p", "power", "i0", "i_list", "size", "verified"], summary),
    }, "words", list(cert.failures))


def _ledrappier(cfg: RunConfig) -> Report:
    N, p = cfg.arg("N", required=True), cfg.arg("p", required=True)
    direct = lca_power_coeffs(example_automaton(p), N, method="fold")
    rows = []
    for m in range(N + 1):
        f = ledrappier_matrix(N, m, p)
        (a, b), (c, d) = f.entries
        g = direct.get((m,))
        same = (g is None and f.is_zero) or g == f
        rows.append([m, a, b, c, d, same])
    return Report("ledrappier", cfg.raw, {
        "coefficients": Table(["m", "f00", "f01", "f10", "f11", "matches_power"], rows)},
        "coefficients")


def _fourier(cfg: RunConfig) -> Report:
    mu, chi = cfg.need("measure"), cfg.need("character")
    Ns = cfg.arg("N_list", [cfg.arg("N", 0)])
    rows = []
    for N in Ns:
        pulled = chi if N == 0 else char_power(chi, cfg.need("lca"), N)
        rep = measure_fourier(mu, pulled)
        rows.append([N, rep.value.real, rep.value.imag, rep.modulus, rep.rank])
    return Report("fourier", cfg.raw, {
        "fourier": Table(["N", "re", "im", "modulus", "rank"], rows)}, "fourier")


def _measure_lambda(mu, group) -> float | None:
    if isinstance(mu, MarkovChain):
        return ehm_lambda(mu.transitions, group)
    if isinstance(mu, (Bernoulli, NStepMarkov)):
        return mu.ehm_lambda()
    return None


def _ehm(cfg: RunConfig) -> Report:
    mu = cfg.need("measure")
    lam = _measure_lambda(mu, cfg.group)
    return Report("ehm-lambda", cfg.raw, {
        "lambda": Table(["kind", "lambda", "rate"], [[mu.kind, lam, math.exp(-lam)]])},
        "lambda")


def _cesaro(cfg: RunConfig) -> Report:
    mu, F = cfg.need("measure"), cfg.need("lca")
    target = cfg.cylinder if cfg.cylinder is not None else cfg.need("character")
    rep = cesaro_scan(mu, target, F, cfg.arg("Nmax", required=True),
                      cfg.arg("subsequence", "pow2"), cfg.arg("tol", 0.01))
    return Report("cesaro", cfg.raw, {
        "values": Table(["N", "value", "cesaro_mean"],
                        [[N, v, c] for N, v, c in zip(rep.Ns, rep.values, rep.cesaro)]),
        "subsequence": Table(["N", "value"], [list(r) for r in rep.subsequence]),
        "density": Table(["haar_value", "tol", "fraction_within_tol", "cesaro_final",
                          "cesaro_error"],
                         [[rep.haar_value, rep.density["tol"],
                           rep.density["fraction_within_tol"], rep.density["cesaro_final"],
                           rep.density["cesaro_error"]]]),
    }, "values")


def _hm_scan(cfg: RunConfig) -> Report:
    mu = cfg.need("measure")
    window = cfg.arg("window", required=True)
    if window * math.log2(mu.alphabet_size) > 24 and cfg.arg("seed") is None:
        raise ConfigError("sampling scans need a seed", "analysis.seed")
    lam = cfg.arg("lambda")
    if lam is None:
        lam = _measure_lambda(mu, cfg.group)
    rep = hm_scan(mu, cfg.arg("max_rank", required=True), window,
                  cfg.arg("budget", 1000), cfg.arg("seed"), lam)
    return Report("hm-scan", cfg.raw, {
        "hm": Table(["rank", "max_modulus", "envelope"], [list(r) for r in rep.rows])}, "hm",
        [f"{rep.mode} scan over {rep.checked} characters"])


def _mrf_check(cfg: RunConfig) -> Report:
    mu = cfg.need("mrf")
    max_rank = cfg.arg("max_rank", 4)
    regions = cfg.arg("regions")
    if regions is None:
        regions = [[c] for c in mu.cells()]
    ci_rows = []
    for reg in regions:
        reg = [tuple(c) for c in reg]
        res = verify_mrf_property(mu, reg)
        ci_rows.append([" ".join(f"{x}:{y}" for x, y in reg), res.deviation, res.holds])
    worst_row = 0.0
    for k in sandwich_rows(mu):
        for a in range(mu.row_alphabet):
            for c in range(mu.row_alphabet):
                sw = sandwich_measure(mu, k, a, c)
                worst_row = max(worst_row, row_mrf_check(mu, sw.dist).deviation)
    rep = uhm_ehm_check(mu, max_rank)
    summary = [[mu.boundary, rep.lambda_sandwich, rep.uhm_holds, rep.ehm_holds,
                rep.sandwich_min_prob, worst_row, lamination_fidelity(mu),
                rep.triplex_deviation, rep.local_marginals]]
    return Report("mrf-check", cfg.raw, {
        "summary": Table(["boundary", "lambda_sandwich_empirical", "uhm_holds", "ehm_holds",
                          "sandwich_min_prob", "sandwich_ci_deviation",
                          "lamination_deviation", "triplex_deviation", "local_marginals"],
                         summary),
        "regions": Table(["region", "deviation", "holds"], ci_rows),
    }, "summary", rep.notes)


def _simulate(cfg: RunConfig) -> Report:
    mu, F, cyl = cfg.need("measure"), cfg.need("lca"), cfg.need("cylinder")
    seed = cfg.arg("seed", required=True)
    Ns = cfg.arg("N_list", required=True)
    rep = monte_carlo_check(mu, F, Ns, cyl, cfg.arg("samples", required=True), seed,
                            cfg.arg("window"))
    exact = cesaro_scan(mu, cyl, F, max(Ns), subsequence=None) if max(Ns) >= 1 else None
    rows = []
    for N, f, s in rep.rows:
        ex = exact.values[N - 1] if exact is not None and N >= 1 else mu.cylinder(cyl)
        rows.append([N, f, s, ex, abs(f - ex) / s if s > 0 else None])
    return Report("simulate", cfg.raw, {
        "frequencies": Table(["N", "frequency", "sigma", "exact", "z"], rows)}, "frequencies",
        [f"torus window {rep.window}, {rep.samples} samples, seed {seed}"])


_DISPATCH = {
    "group-info": _group_info, "lucas": _lucas, "rank-traj": _rank_traj,
    "diffusion-report": _diffusion_report, "separating": _separating,
    "ledrappier": _ledrappier, "fourier": _fourier, "ehm-lambda": _ehm,
    "cesaro": _cesaro, "hm-scan": _hm_scan, "mrf-check": _mrf_check, "simulate": _simulate,
}


def run_command(name: str, cfg: RunConfig) -> Report:
    if name not in _DISPATCH:
        raise ConfigError(f"unknown command {name!r}", "command")
    return _DISPATCH[name](cfg)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="haarlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("args", nargs="*", type=int,
                    help="positional integers (lucas: N n p)")
    ap.add_argument("--config", help="JSON config file, or inline JSON text")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", help="write here instead of stdout")
    ap.add_argument("--table", help="table to print in CSV mode (default: the primary one)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.config:
            cfg = load_config(ns.config)
        else:
            cfg = RunConfig(raw={})
        if ns.args:
            if ns.command != "lucas" or len(ns.args) != 3:
                raise ConfigError("positional integers are only for 'lucas N n p'", "args")
            cfg.analysis.update(zip(("N", "n", "p"), ns.args))
            cfg.raw = dict(cfg.raw, analysis=dict(cfg.analysis))
        report = run_command(ns.command, cfg)
        data = emit_report(report, ns.format, ns.table)
    except HaarlabError as exc:
        print(f"haarlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if ns.out:
        Path(ns.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
