"""Command line: ``solve``, ``stats``, ``gen`` and ``bench``.

Exit codes: 0 success, 1 bench mismatch, 2 input error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .backend import POLICY_MODES, DecisionPolicy, DeviceSpec, SaParams
from .clique import greedy_clique_heuristic
from .graph import FORMATS, Graph, ParseError, generate_er, read_graph, write_edge_list
from .kcore import core_decompose
from .orchestrator import (
    HybridConfig,
    HybridSolveError,
    LevelStats,
    SolveReport,
    decomposition_stats,
    solve_hybrid,
)

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
DATA_ENV = "HYBRIDCLIQUE_DATA"

log = logging.getLogger("hybridclique")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class GenSpec:
    n: int
    p: float
    seed: int | None  # None: derive from the sample index

    @classmethod
    def parse(cls, text: str) -> "GenSpec":
        parts = text.split(":")
        if len(parts) != 4 or parts[0] != "er":
            raise InputError(f"generator spec must look like er:<n>:<p>:<seed|_>, got {text!r}")
        try:
            n, p = int(parts[1]), float(parts[2])
            seed = None if parts[3] == "_" else int(parts[3])
        except ValueError:
            raise InputError(f"bad number in generator spec {text!r}") from None
        if n < 0 or not 0 <= p <= 1:
            raise InputError(f"generator spec out of range: {text!r}")
        return cls(n, p, seed)

    def graph(self, sample: int = 0) -> Graph:
        return generate_er(self.n, self.p, sample if self.seed is None else self.seed)

    def name(self) -> str:
        return f"ER({self.n},{self.p:g})"


def _guess_format(path: str) -> str:
    p = path[:-3] if path.endswith(".gz") else path
    if p.endswith(".mtx"):
        return "mtx"
    if p.endswith((".dimacs", ".clq", ".col")):
        return "dimacs"
    return "snap"


def _load(args, sample: int = 0) -> tuple[Graph, str]:
    if args.gen:
        spec = GenSpec.parse(args.gen)
        return spec.graph(sample), spec.name()
    path = args.input
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    try:
        return read_graph(path, args.format or _guess_format(path)), Path(path).name
    except (ParseError, UnicodeDecodeError, OSError) as exc:
        raise InputError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# formatting


def format_report(r: SolveReport, g: Graph, name: str = "") -> str:
    lines = []
    if name:
        lines.append(f"graph            {name}  (n={g.n}, m={g.m})")
    lines += [
        f"omega            {r.omega}",
        f"K(G)             {r.k_graph}",
        f"clique           {' '.join(str(x) for x in r.best_clique.labels(g))}",
        f"solved           {r.subproblems_solved} (cpu {r.cpu_solved}, device {r.device_solved})",
        f"device calls     {r.device_calls}",
        f"device vars      {r.device_variables} (with roots {r.device_variables_with_roots})",
    ]
    if not r.optimal:
        lines.append("WARNING          node limit reached; result may not be optimal")
    if r.levels:
        lines.append("")
        lines.append(format_levels(r.levels))
    lines += [
        "",
        f"t_cpu     {r.t_cpu:10.4f} s",
        f"t_comm    {r.t_comm:10.4f} s",
        f"t_noncpu  {r.t_noncpu:10.4f} s",
        f"t_total   {r.t_total:10.4f} s",
    ]
    return "\n".join(lines)


def format_levels(levels: list[LevelStats]) -> str:
    head = f"{'level':>5} {'generated':>10} {'subprobs':>9} {'max':>5} {'min':>5} {'avg':>7}"
    rows = [head]
    for lv in levels:
        rows.append(
            f"{lv.level:>5} {lv.generated:>10} {lv.num_subproblems:>9} {lv.max:>5} {lv.min:>5} {lv.avg:>7.1f}"
        )
    return "\n".join(rows)


def _emit(args, payload: dict, table: str) -> None:
    if args.output == "machine":
        print(json.dumps(payload, indent=2))
    else:
        print(table)


# ---------------------------------------------------------------------------
# commands


def _hybrid_config(args) -> HybridConfig:
    size = 0 if args.cpu_only else args.device_size
    return HybridConfig(
        device=DeviceSpec(size, args.comm_cost),
        policy=DecisionPolicy(args.policy, args.density_min),
        decomposition_level=args.levels,
        use_dsatur_prune=not args.no_dsatur,
        sa=SaParams(args.sweeps, args.restarts, args.beta_initial, args.beta_final, args.seed),
        literal_kcore_stop=args.literal_kcore_stop,
        use_heuristic=not args.no_heuristic,
        heuristic_seed=args.seed,
        encode_roots=args.encode_roots,
        node_limit=args.node_limit,
    )


def cmd_solve(args) -> int:
    try:
        cfg = _hybrid_config(args)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    g, name = _load(args)
    report = solve_hybrid(g, cfg)
    payload = {"graph": name, "n": g.n, "m": g.m, **report.to_dict(g, timing=not args.no_timing)}
    _emit(args, payload, format_report(report, g, name))
    return EXIT_OK


def _mean_levels(per_sample: list[list[LevelStats]]) -> list[dict]:
    out = []
    for lvls in zip(*per_sample):
        out.append(
            {
                "level": lvls[0].level,
                "generated": float(np.mean([lv.generated for lv in lvls])),
                "num_subproblems": float(np.mean([lv.num_subproblems for lv in lvls])),
                "max": float(np.mean([lv.max for lv in lvls])),
                "min": float(np.mean([lv.min for lv in lvls])),
                "avg": float(np.mean([lv.avg for lv in lvls])),
            }
        )
    return out


def cmd_stats(args) -> int:
    samples = max(1, args.samples)
    if args.input and samples > 1:
        raise InputError("--samples needs a generator input")
    if args.levels < 1:
        raise InputError("--levels must be at least 1")
    rows = []
    per_sample = []
    name = ""
    for i in range(samples):
        g, name = _load(args, i)
        k = core_decompose(g).k_graph
        if args.incumbent == "exact":
            incumbent = solve_hybrid(g, HybridConfig(use_dsatur_prune=not args.no_dsatur)).omega
        else:
            incumbent = greedy_clique_heuristic(g, args.seed).size
        levels = decomposition_stats(
            g, args.levels, incumbent, not args.no_dsatur, args.device_size, args.literal_kcore_stop
        )
        per_sample.append(levels)
        rows.append({"sample": i, "n": g.n, "m": g.m, "k_graph": k, "incumbent": incumbent,
                     "levels": [lv.__dict__.copy() for lv in levels]})
    mean = {
        "k_graph": float(np.mean([r["k_graph"] for r in rows])),
        "incumbent": float(np.mean([r["incumbent"] for r in rows])),
        "levels": _mean_levels(per_sample),
    }
    payload = {"graph": name, "samples": samples, "incumbent_source": args.incumbent,
               "mean": mean, "per_sample": rows}
    _emit(args, payload, _stats_table(name, samples, args.incumbent, mean))
    return EXIT_OK


def _stats_table(name: str, samples: int, source: str, mean: dict) -> str:
    lines = [
        f"graph {name}   samples {samples}",
        f"K(G) {mean['k_graph']:.1f}   incumbent ({source}) {mean['incumbent']:.1f}",
        f"{'level':>5} {'generated':>10} {'Num. of Subprobs.':>18} {'max':>7} {'min':>7} {'avg':>7}",
    ]
    for lv in mean["levels"]:
        lines.append(
            f"{lv['level']:>5} {lv['generated']:>10.1f} {lv['num_subproblems']:>18.1f} "
            f"{lv['max']:>7.1f} {lv['min']:>7.1f} {lv['avg']:>7.1f}"
        )
    return "\n".join(lines)


def cmd_gen(args) -> int:
    spec = GenSpec.parse(args.gen)
    g = spec.graph(0)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            write_edge_list(g, fh)
    else:
        write_edge_list(g, sys.stdout)
    return EXIT_OK


def load_manifest(path: str | None = None) -> list[dict]:
    if path:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(resources.files("hybridclique").joinpath("data/table1.json").read_text())


def count_matches(observed: int, expected: int, literal: bool) -> bool:
    """Subproblem counts are exact under the literal stop rule, within 10% otherwise."""
    if literal:
        return observed == expected
    return abs(observed - expected) <= 0.10 * expected


def bench_row(entry: dict, data_dir: str, literal: bool) -> dict | None:
    path = Path(data_dir) / entry["file"]
    if not path.exists():
        return None
    g = read_graph(str(path), entry.get("format", "snap"))
    t0 = time.perf_counter()
    report = solve_hybrid(g, HybridConfig(literal_kcore_stop=literal, use_heuristic=False))
    wall = time.perf_counter() - t0
    row = {
        "name": entry["name"], "n": g.n, "m": g.m, "k_graph": report.k_graph, "omega": report.omega,
        "subproblems": report.subproblems_solved, "seconds": wall,
        "expected": {k: entry[k] for k in ("k_graph", "omega", "subproblems")},
    }
    row["k_ok"] = report.k_graph == entry["k_graph"]
    row["omega_ok"] = report.omega == entry["omega"]
    row["count_ok"] = count_matches(report.subproblems_solved, entry["subproblems"], literal)
    return row


def cmd_bench(args) -> int:
    data_dir = args.data_dir or os.environ.get(DATA_ENV, "data")
    rows = []
    mismatch = False
    for entry in load_manifest(args.manifest):
        if args.only and entry["name"] not in args.only:
            continue
        row = bench_row(entry, data_dir, args.literal_kcore_stop)
        if row is None:
            log.warning("skipping %s: %s not found in %s", entry["name"], entry["file"], data_dir)
            continue
        mismatch |= not (row["k_ok"] and row["omega_ok"] and row["count_ok"])
        rows.append(row)
    lines = [f"{'graph':<22} {'n':>9} {'m':>10} {'K(G)':>6} {'omega':>6} {'subprobs':>9} {'time(s)':>8}  status"]
    for r in rows:
        e = r["expected"]
        bad = [f"{k}!={e[k]}" for k, ok in (("k_graph", r["k_ok"]), ("omega", r["omega_ok"]),
                                              ("subproblems", r["count_ok"])) if not ok]
        lines.append(
            f"{r['name']:<22} {r['n']:>9} {r['m']:>10} {r['k_graph']:>6} {r['omega']:>6} "
            f"{r['subproblems']:>9} {r['seconds']:>8.3f}  {'ok' if not bad else 'MISMATCH ' + ' '.join(bad)}"
        )
    _emit(args, {"rows": rows}, "\n".join(lines))
    return EXIT_MISMATCH if mismatch else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_input(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="graph file (.gz accepted)")
    src.add_argument("--gen", help="random instance er:<n>:<p>:<seed|_>")
    p.add_argument("--format", choices=FORMATS, help="input format (default: from extension, else snap)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", choices=("table", "machine"), default="table")


def _add_pruning(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=1, help="maximum decomposition depth")
    p.add_argument("--no-dsatur", action="store_true", help="disable colouring-bound pruning")
    p.add_argument("--literal-kcore-stop", action="store_true",
                   help="drop roots once best >= K(root) (may miss a clique)")
    p.add_argument("--seed", type=int, default=0)


def build_parser(solve_defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridclique", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="maximum clique with the hybrid solver")
    _add_input(p)
    _add_pruning(p)
    p.add_argument("--config", help="JSON file with defaults for the flags below")
    p.add_argument("--device-size", type=int, default=0)
    p.add_argument("--comm-cost", type=float, default=0.0, help="simulated seconds per device call")
    p.add_argument("--cpu-only", action="store_true", help="never use the device")
    p.add_argument("--policy", choices=POLICY_MODES, default="size_only")
    p.add_argument("--density-min", type=float, default=0.0)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--beta-initial", type=float, default=0.1)
    p.add_argument("--beta-final", type=float, default=10.0)
    p.add_argument("--encode-roots", action="store_true", help="give each root its own QUBO variable")
    p.add_argument("--no-heuristic", action="store_true", help="skip the greedy lower bound")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock fields from machine output")
    _add_output(p)
    p.set_defaults(func=cmd_solve, **(solve_defaults or {}))

    p = sub.add_parser("stats", help="per-level decomposition statistics (no solving)")
    _add_input(p)
    _add_pruning(p)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--incumbent", choices=("heuristic", "exact"), default="heuristic",
                   help="clique size the subproblems are pruned against")
    p.add_argument("--device-size", type=int, default=None,
                   help="stop splitting subproblems that fit this size")
    _add_output(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen", help="write a random instance as an edge list")
    p.add_argument("--gen", required=True, help="er:<n>:<p>:<seed>")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="CPU-only solve over the bundled dataset table")
    p.add_argument("--manifest", help="JSON manifest (default: bundled table)")
    p.add_argument("--data-dir", help=f"dataset directory (default: ${DATA_ENV} or ./data)")
    p.add_argument("--only", nargs="*", help="dataset names to run")
    p.add_argument("--literal-kcore-stop", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_bench)
    return parser


def _config_defaults(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        with open(known.config, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {known.config}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in data.items()}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        defaults = _config_defaults(argv) if argv[:1] == ["solve"] else {}
        args = build_parser(defaults).parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HybridSolveError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
