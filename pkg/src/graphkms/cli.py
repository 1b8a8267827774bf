"""Command line front end.

Exit codes: 0 success, 1 engine error (with a stable error code on stderr),
2 usage error.  Output is deterministic for fixed input, flags and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import kms, oracle
from .errors import GraphKMSError
from .kgraph import parse_graph
from .spectral import Query, spectral_radius


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a decimal or rational: {text!r}")


def _parse_query(args, k):
    if getattr(args, "log_r", None) is not None and getattr(args, "r", None) is not None:
        raise UsageExit("give exactly one of --log-r and --r")
    bases = None
    if getattr(args, "log_r", None) is not None:
        bases = tuple(_fraction(x) for x in args.log_r.split(","))
        if any(b <= 0 for b in bases):
            raise UsageExit("--log-r bases must be positive")
        r = tuple(math.log(float(b)) for b in bases)
    elif getattr(args, "r", None) is not None:
        r = tuple(float(x) for x in args.r.split(","))
    else:
        raise UsageExit("one of --log-r or --r is required")
    if len(r) != k:
        raise UsageExit(f"r needs {k} entries for this graph, got {len(r)}")
    beta = float(_fraction(args.beta)) if getattr(args, "beta", None) is not None else None
    return Query(beta if beta is not None else 1.0, r, r_bases=bases), beta


class UsageExit(Exception):
    pass


def _load_graph(path):
    with open(path) as handle:
        return parse_graph(json.load(handle))


def _colors_arg(text, k):
    if text == "all":
        return tuple(range(1, k + 1))
    if text in ("", "none", "{}"):
        return ()
    try:
        colors = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageExit(f"bad color list {text!r}")
    return colors


def _emit_json(payload):
    print(json.dumps(payload, indent=2, sort_keys=False))


def _path_arg(graph, text):
    text = text.strip()
    if text.startswith("@"):
        return graph.vertex_path(text[1:])
    return graph.path_from_edges([x.strip() for x in text.split(",") if x.strip()])


def _fmt_colors(colors):
    return "{" + ",".join(str(c) for c in sorted(colors)) + "}"


def cmd_validate(args):
    graph = _load_graph(args.graph)
    mode = "matrices-only" if graph.matrices_only else f"{len(graph.edges)} edges"
    print(f"OK: k={graph.k}, {graph.n} vertices, {mode}")
    return 0


def cmd_components(args):
    graph = _load_graph(args.graph)
    colors = _colors_arg(args.colors, graph.k)
    part = graph.components(colors)
    print(f"~_{_fmt_colors(colors)} classes ({len(part.classes)}):")
    for cls in part.classes:
        closure = sorted(graph.closure(cls, colors))
        print(f"  {{{','.join(cls)}}}  closure={{{','.join(closure)}}}")
    return 0


def cmd_spectra(args):
    graph = _load_graph(args.graph)
    for i in range(1, graph.k + 1):
        print(f"rho(A_{i}) = {spectral_radius(graph.matrices[i - 1]):.12g}")
    if args.per_component:
        part = graph.components(range(1, graph.k + 1))
        for cls in part.classes:
            closure = tuple(sorted(graph.closure(cls, range(1, graph.k + 1))))
            idx = [graph.vindex[v] for v in cls]
            cidx = [graph.vindex[v] for v in closure]
            for i in range(1, graph.k + 1):
                mat = graph.matrices[i - 1]
                rho_c = spectral_radius(mat[np.ix_(idx, idx)])
                rho_cl = spectral_radius(mat[np.ix_(cidx, cidx)])
                print(
                    f"component {{{','.join(cls)}}} color {i}: "
                    f"rho={rho_c:.12g} rho_closure={rho_cl:.12g}"
                )
    return 0


def cmd_subharmonic(args):
    graph = _load_graph(args.graph)
    query, _ = _parse_query(args, graph.k)
    found = kms.find_subharmonic(graph, query, threads=args.threads)
    print(f"{len(found)} subharmonic component(s) at beta={query.beta:.12g}")
    for sc in found:
        rhos = " ".join(f"rho_{i}={sc.rho_component[i]:.10g}" for i in sorted(sc.colors))
        print(
            f"  I={_fmt_colors(sc.colors)} C={{{','.join(sc.component)}}} "
            f"closure={{{','.join(sc.closure_full)}}} {rhos}".rstrip()
        )
    return 0


def cmd_simplex(args):
    graph = _load_graph(args.graph)
    query, _ = _parse_query(args, graph.k)
    desc = kms.simplex(graph, query, per_bound=args.per_bound, threads=args.threads)
    if args.json:
        _emit_json(desc.to_payload())
        return 0
    print(f"extreme KMS states at beta={query.beta:.12g} ({len(desc.states)}):")
    print(f"vertex order: {','.join(desc.vertices)}")
    for st in desc.states:
        sc = st.component
        y = " ".join(f"{x:.10g}" for x in st.y)
        if st.per is None:
            per = "unknown"
        elif st.per.rank == 0:
            per = "trivial"
        else:
            gens = ";".join(",".join(str(x) for x in g) for g in st.per.generators)
            per = f"rank {st.per.rank} <{gens}>" + ("" if st.per.complete else " (bounded search)")
        ck = "yes" if st.factors_through_ck else "no"
        print(f"  I={_fmt_colors(sc.colors)} C={{{','.join(sc.component)}}} y=[{y}] per={per} ck={ck}")
    return 0


def cmd_beta_table(args):
    graph = _load_graph(args.graph)
    args.beta = None
    query, _ = _parse_query(args, graph.k)
    table = kms.beta_table(graph, query.r, r_bases=query.r_bases)
    if args.json:
        _emit_json(table.to_payload())
        return 0
    print(render_beta_table(table))
    return 0


def render_beta_table(table):
    by_colors = {}
    for row in table.rows:
        by_colors.setdefault(frozenset(row.colors), []).append(row)
    partitions = {key: tuple(r.component for r in rows) for key, rows in by_colors.items()}
    keys = sorted(by_colors, key=lambda s: (len(s), tuple(sorted(s))))
    shared = len(set(partitions.values())) == 1
    lines = []
    if shared:
        classes = partitions[keys[0]]
        header = ["I \\ C"] + ["{" + ",".join(c) + "}" for c in classes]
        grid = [header]
        for key in keys:
            cells = [_fmt_colors(key)]
            for cls in classes:
                row = next(r for r in by_colors[key] if r.component == cls)
                cells.append(row.beta_set.render())
            grid.append(cells)
        widths = [max(len(row[i]) for row in grid) for i in range(len(header))]
        for row in grid:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    else:
        for key in keys:
            for row in by_colors[key]:
                lines.append(
                    f"I={_fmt_colors(key)} C={{{','.join(row.component)}}} "
                    f"beta: {row.beta_set.render()}"
                )
    return "\n".join(lines)


def cmd_decompose(args):
    graph = _load_graph(args.graph)
    query, _ = _parse_query(args, graph.k)
    with open(args.vector) as handle:
        data = json.load(handle)
    psi = np.asarray(data, dtype=float)
    if psi.shape != (graph.n,):
        raise UsageExit(f"vector file must hold {graph.n} numbers in vertex order")
    parts = kms.decompose_kms(graph, psi, query)
    print(f"vertex order: {','.join(graph.vertices)}")
    for sc, weight in parts:
        print(f"  I={_fmt_colors(sc.colors)} C={{{','.join(sc.component)}}} weight={weight:.12g}")
    return 0


def cmd_per(args):
    graph = _load_graph(args.graph)
    component = tuple(args.component.split(","))
    colors = _colors_arg(args.colors, graph.k)
    group = kms.periodicity_group(graph, component, colors, bound=args.bound)
    gens = " ".join("(" + ",".join(str(x) for x in g) + ")" for g in group.generators) or "none"
    print(
        f"Per_{_fmt_colors(colors)}({{{','.join(sorted(component))}}}): rank {group.rank}, "
        f"generators {gens}, bound {group.search_bound}, "
        f"complete={'yes' if group.complete else 'no'}"
    )
    return 0


def cmd_eval(args):
    graph = _load_graph(args.graph)
    query, _ = _parse_query(args, graph.k)
    component = tuple(sorted(args.component.split(",")))
    desc = kms.simplex(graph, query, per_bound=args.per_bound)
    state = next((st for st in desc.states if st.component.component == component), None)
    if state is None:
        raise UsageExit(
            f"{{{','.join(component)}}} is not a subharmonic component at this query"
        )
    if args.theta is not None:
        theta = tuple(float(x) for x in args.theta.split(",")) if args.theta else ()
        state = state.with_character(theta)
    lam = _path_arg(graph, getattr(args, "lambda"))
    mu = _path_arg(graph, args.mu)
    value = kms.state_eval(graph, state, lam, mu, query)
    print(f"{value.real:.12g}{value.imag:+.12g}j")
    return 0


def cmd_check(args):
    graph = _load_graph(args.graph)
    query, _ = _parse_query(args, graph.k)
    report = oracle.check_suite(graph, query, seed=args.seed)
    if args.json:
        _emit_json(report.to_payload())
    else:
        print(report.render())
    return 0 if report.all_passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphkms",
        description="KMS state simplices for Toeplitz algebras of finite k-graphs",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, beta=False, rflags=False, threads=False):
        p.add_argument("graph", help="graph JSON file")
        if beta:
            p.add_argument("--beta", required=True, help="inverse temperature (decimal or p/q)")
        if rflags:
            p.add_argument("--log-r", dest="log_r", help="comma list a_i; r_i = ln(a_i)")
            p.add_argument("--r", dest="r", help="comma list of raw r_i values")
        if threads:
            p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("validate", help="parse and validate a graph file")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("components", help="classes of mutual color-I reachability")
    common(p)
    p.add_argument("--colors", required=True, help="comma list of colors, or 'all'")
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("spectra", help="spectral radii of the vertex matrices")
    common(p)
    p.add_argument("--per-component", action="store_true", dest="per_component")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("subharmonic", help="certified subharmonic components at (beta, r)")
    common(p, beta=True, rflags=True, threads=True)
    p.set_defaults(func=cmd_subharmonic)

    p = sub.add_parser("simplex", help="all extreme KMS states at (beta, r)")
    common(p, beta=True, rflags=True, threads=True)
    p.add_argument("--per-bound", type=int, dest="per_bound")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simplex)

    p = sub.add_parser("beta-table", help="critical temperature sets per (I, class)")
    common(p, rflags=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_beta_table)

    p = sub.add_parser("decompose", help="split a vector into extreme KMS vectors")
    common(p, beta=True, rflags=True)
    p.add_argument("--vector", required=True, help="JSON array in vertex order")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("per", help="periodicity group of a class (bounded search)")
    common(p)
    p.add_argument("--component", required=True, help="comma list of vertices")
    p.add_argument("--colors", required=True, help="comma list of colors")
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_per)

    p = sub.add_parser("eval", help="evaluate a state on a generator S_lam S_mu*")
    common(p, beta=True, rflags=True)
    p.add_argument("--component", required=True)
    p.add_argument("--lambda", required=True, help="edge ids, source last; @v for a vertex path")
    p.add_argument("--mu", required=True, help="edge ids, source last; @v for a vertex path")
    p.add_argument("--theta", help="character angles, one per periodicity generator")
    p.add_argument("--per-bound", type=int, dest="per_bound")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="run the self-check suite at (beta, r)")
    common(p, beta=True, rflags=True, threads=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except GraphKMSError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error [IO]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
