"""Command-line entry point ``pcslab``.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 statistical-gate
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import analytic, codes, graphs, lab
from .errors import PCSLabError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_STATS = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _overrides(cfg: lab.ExperimentConfig, args) -> lab.ExperimentConfig:
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.shots is not None:
        kw["n_shots"] = args.shots
    if args.engine is not None:
        kw["engine"] = args.engine
    if getattr(args, "workers", None) is not None:
        kw["workers"] = args.workers
    return replace(cfg, **kw) if kw else cfg


def cmd_analytic(args) -> int:
    grid = lab.parse_grid(args.grid)
    schemes = ["pcs_x", "pcs_xz", "bbpssw"] if args.scheme == "all" else [args.scheme]
    rows = []
    for s in schemes:
        for F in grid:
            if s == "pcs_x":
                pt = analytic.pcs_x_point_F(F)
            elif s == "pcs_xz":
                pt = analytic.pcs_xz_point_F(F)
            else:
                pt = analytic.bbpssw_recursive(F, args.rounds)
            rows.append({"scheme": s, "F_in": pt.F_in, "F_out": pt.F_out, "rate": pt.rate, "qubit_cost": pt.qubit_cost})
    _emit(lab.rows_to_csv(rows, ("scheme", "F_in", "F_out", "rate", "qubit_cost")), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _overrides(lab.load_config(args.config), args)
    _emit(lab.run_sweep(cfg).to_csv(), args.out)
    print(f"# {cfg.label()} engine={cfg.engine} seed={cfg.seed} config_hash={cfg.config_hash()}", file=sys.stderr)
    print(f"# {lab.GATE_NOISE_PLACEMENT}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _overrides(lab.load_config(args.config), args)
    engines = args.engines.split(",") if args.engines else None
    cmp = lab.compare_engines(cfg, engines)
    print(cmp.report())
    if args.out:
        _emit(lab.rows_to_csv(cmp.rows), args.out)
    if not cmp.exact_ok:
        return EXIT_VALIDATION
    if not cmp.mc_ok:
        return EXIT_STATS
    return EXIT_OK


def cmd_code_analyze(args) -> int:
    certs = [codes.certify(r) for r in args.r]
    for c in certs:
        d = f"{c.distance}" if c.distance_exact else f">{c.distance - 1}"
        print(f"r={c.r}: [[{c.n},{c.k},{d}]] max generator weight {c.max_generator_weight}; "
              f"CSS under H on {['a%d' % j for j in c.h_pattern]}: {c.css}")
        for g in c.generators:
            print(f"    {g}")
    if 1 in args.r:
        table = codes.syndrome_table(1, 2)
        hits = [str(e) for e in table[(0, 0, 1, 0)]]
        w1 = [e for e in table[(0, 0, 1, 0)] if codes.weight(e) == 1]
        print(f"r=1 syndrome [0010]: weight-1 errors {[str(e) for e in w1]}; all weight<=2: {hits}")
    if args.json:
        _emit(json.dumps([c.as_dict() for c in certs], indent=2) + "\n", args.json)
    ok = all(c.k == 1 and (c.r == 0 or c.distance == 2) for c in certs)
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_graph_demo(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            g = graphs.read_edgelist(fh.read())
    else:
        g = graphs.random_graph(args.n, 0.5, rng)
    print(f"graph: {g.graph.number_of_nodes()} vertices, {g.graph.number_of_edges()} edges")
    worst = 1.0
    for a in g.vertices:
        for basis in "XYZ":
            for outcome in (0, 1):
                nbrs = sorted(g.graph[a], key=graphs._sort_key)
                if basis == "X" and not nbrs and outcome == 1:
                    continue
                b0 = nbrs[0] if (basis == "X" and nbrs) else None
                f = graphs.rule_fidelity(g, a, basis, outcome, b0)
                worst = min(worst, f)
                print(f"  measure {basis} on {a} outcome {outcome}: oracle fidelity {f:.12f}")
    print(f"minimum fidelity {worst:.12f}")
    return EXIT_OK if worst >= 1 - 1e-10 else EXIT_VALIDATION


def cmd_reproduce(args) -> int:
    engine = args.engine or "monte_carlo"
    shots = args.shots if args.shots is not None else 100_000
    fig = lab.reproduce_figure(args.figure, shots, args.seed or 0, engine, args.workers or 1)
    _emit(fig.to_csv(), args.out)
    for note in fig.notes:
        print(f"# {note}", file=sys.stderr)
    if args.strict:
        flags = [r.get("protected_ge_unprotected", r.get("ordered", 1)) for r in fig.rows]
        if not all(flags):
            return EXIT_STATS
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pcslab", description="Pauli check sandwiching laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="key = value experiment file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--shots", type=int)
        sp.add_argument("--out", help="CSV output path (default stdout)")
        sp.add_argument("--engine", choices=lab.ENGINES)
        sp.add_argument("--workers", type=int)

    a = sub.add_parser("analytic", help="closed-form curves over an F grid")
    a.add_argument("--scheme", choices=["pcs_x", "pcs_xz", "bbpssw", "all"], default="all")
    a.add_argument("--grid", default="0.25:1:0.05")
    a.add_argument("--rounds", type=int, default=1)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analytic)

    s = sub.add_parser("sweep", help="run a configured sweep")
    common(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="cross-check engines on a configured sweep")
    common(c)
    c.add_argument("--engines", help="comma list (default: every applicable engine)")
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("code-analyze", help="certify recursive PCS codes")
    k.add_argument("--r", type=int, nargs="+", default=[1, 2, 3])
    k.add_argument("--json")
    k.set_defaults(func=cmd_code_analyze)

    g = sub.add_parser("graph-demo", help="replay graph measurement rules against the dense oracle")
    g.add_argument("--graph", help="edge-list file")
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_graph_demo)

    r = sub.add_parser("reproduce", help="emit the series of a figure")
    r.add_argument("figure", choices=lab.FIGURES)
    common(r, config=False)
    r.add_argument("--strict", action="store_true", help="exit 3 if an ordering check fails")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (PCSLabError, OSError) as exc:
        print(f"pcslab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
