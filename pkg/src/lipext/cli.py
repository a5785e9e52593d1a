"""Command-line entry point.

Exit codes: 0 success, 1 domain error or failed check, 2 capacity exceeded,
64 usage error.  Every command that writes ``--out FILE`` also writes
``FILE.manifest.json``, which ``lipext replay`` re-runs and compares byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import __version__
from . import io as lio
from .errors import CapacityError, LipextError

EXIT_OK, EXIT_DOMAIN, EXIT_CAPACITY, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _number(text: str):
    from ._numeric import parse_number

    try:
        return parse_number(int(text)) if text.lstrip("-").isdigit() else parse_number(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


# ---------------------------------------------------------------------------
# command implementations; each returns (exit code, {path: text}, stdout text, row statuses)


def cmd_metric_validate(a):
    from .metric import validate_metric

    m = lio.metric_from_dict(lio.load_json(a.file))
    rep = validate_metric(m, a.tol, semi=a.semi)
    lines = [f"points: {m.n}", f"triples checked: {'exhaustive' if rep.exhaustive else 'sampled'}"]
    lines.append("status: pass" if rep.ok else f"status: fail ({rep.n_violations} violations)")
    lines += [f"  {v}" for v in rep.violations]
    doc = {"ok": rep.ok, "count": rep.n_violations, "violations": [str(v) for v in rep.violations]}
    return (EXIT_OK if rep.ok else EXIT_DOMAIN), {a.out: lio.dumps(doc)} if a.out else {}, "\n".join(lines), []


def cmd_metric_magnify(a):
    from .metric import magnify

    m = lio.metric_from_dict(lio.load_json(a.file))
    out = magnify(m, a.subset, a.r)
    return (EXIT_OK, *_out_or_print(a, lio.dumps(lio.metric_to_dict(out))))


def cmd_metric_snowflake(a):
    from .metric import snowflake

    m = lio.metric_from_dict(lio.load_json(a.file))
    return (EXIT_OK, *_out_or_print(a, lio.dumps(lio.metric_to_dict(snowflake(m, a.alpha)))))


def cmd_metric_twist(a):
    import warnings

    from .experiments import holder_parameters
    from .metric import twisted_cube_metric

    if a.n > a.max_n:
        raise CapacityError(f"n={a.n} exceeds --max-n {a.max_n}")
    r, s = holder_parameters(a.n, a.alpha)
    r = a.r if a.r is not None else r
    s = a.s if a.s is not None else s
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = twisted_cube_metric(a.n, a.alpha, r, s)
    doc = lio.metric_to_dict(m)
    doc["points"] = [[list(p.word), p.layer] for p in m.points]
    doc["parameters"] = {"n": a.n, "alpha": a.alpha, "r": r, "s": s, "rs_condition_warning": bool(caught)}
    return (EXIT_OK, *_out_or_print(a, lio.dumps(doc)))


def cmd_graphs_gen(a):
    from .graphs import random_regular_graph

    g = random_regular_graph(a.n, a.d, a.seed)
    return (EXIT_OK, *_out_or_print(a, lio.dumps(lio.graph_to_dict(g))))


def cmd_graphs_expansion(a):
    from .graphs import edge_expansion, edge_expansion_exact, edge_expansion_spectral_bound

    g = lio.graph_from_dict(lio.load_json(a.graph))
    fn = {"auto": edge_expansion, "exact": edge_expansion_exact, "spectral": edge_expansion_spectral_bound}[a.method]
    rep = fn(g)
    doc = {"phi": rep.phi, "method": rep.method, "witness_set": list(rep.witness_set), "eigenvalue": rep.eigenvalue}
    text = lio.dumps(doc)
    return EXIT_OK, {a.out: text} if a.out else {}, text.rstrip(), []


def cmd_graphs_menger(a):
    from .graphs import edge_disjoint_paths

    g = lio.graph_from_dict(lio.load_json(a.graph))
    res = edge_disjoint_paths(g, a.a, a.b, a.phi)
    doc = {"m": res.m, "paths": [list(p) for p in res.paths], "cut_edges": [list(e) for e in res.cut_edges]}
    doc.update({"bound": res.bound, "bound_ok": res.bound_ok})
    text = lio.dumps(doc)
    code = EXIT_DOMAIN if res.bound_ok is False else EXIT_OK
    return code, {a.out: text} if a.out else {}, f"edge-disjoint paths: {res.m}", []


def cmd_w1_norm(a):
    from .wasserstein import SignedMeasure, w1_norm

    m = lio.metric_from_dict(lio.load_json(a.metric))
    f = SignedMeasure.on(m, lio.measure_values(lio.load_json(a.f), m))
    res = w1_norm(f, m)
    doc = {"value": res.value, "plan": res.plan.plan, "potential": res.potential.g, "gap": res.gap}
    return EXIT_OK, {a.out: lio.dumps(doc)} if a.out else {}, f"W1 norm: {lio.format_cell(res.value)}", []


def cmd_w1_distance(a):
    from .wasserstein import w1_distance

    m = lio.metric_from_dict(lio.load_json(a.metric))
    mu = lio.measure_values(lio.load_json(a.mu), m)
    nu = lio.measure_values(lio.load_json(a.nu), m)
    value, plan = w1_distance(mu, nu, m)
    doc = {"value": value, "plan": plan.plan}
    return EXIT_OK, {a.out: lio.dumps(doc)} if a.out else {}, f"W1 distance: {lio.format_cell(value)}", []


def cmd_zext_solve(a):
    from .zero_extension import relaxation_chain_check

    inst = lio.zext_instance_from_dict(lio.load_json(a.instance))
    res = relaxation_chain_check(inst, arithmetic=a.arithmetic)
    doc = {
        "MET": res.met,
        "EMD": res.emd,
        "OPT": res.opt,
        "opt_partition": list(res.opt_partition),
        "met_metric": res.met_metric,
        "emd_measures": {str(k): list(v) for k, v in res.emd_measures.items()},
    }
    fc = lio.format_cell
    text = f"(MET, EMD, OPT) = ({fc(res.met)}, {fc(res.emd)}, {fc(res.opt)})"
    return EXIT_OK, {a.out: lio.dumps(doc)} if a.out else {}, text, []


def cmd_ext_solve(a):
    from .extension import solve_extension

    prob = lio.extension_problem_from_dict(lio.load_json(a.problem), a.target)
    kwargs = {"arithmetic": a.arithmetic} if prob.target.polyhedral else {"seed": a.seed, "restarts": a.restarts}
    sol = solve_extension(prob, **kwargs)
    doc = {"constant": sol.constant, "optimal": sol.optimal, "values": sol.values, "trace": sol.trace}
    label = "certified" if sol.optimal else "upper bound"
    return EXIT_OK, {a.out: lio.dumps(doc)} if a.out else {}, f"min L ({label}): {lio.format_cell(sol.constant)}", []


def _report(a, rows, columns):
    if a.format == "json":
        text = lio.dumps({"log_base": "e", "rows": rows})
    else:
        text = lio.rows_to_csv(rows, columns)
    statuses = [r["status"] for r in rows]
    code = EXIT_OK
    if any(s == "capacity" for s in statuses):
        code = EXIT_CAPACITY
    if any(s in ("error", "check_failed") for s in statuses):
        code = EXIT_DOMAIN
    if a.out:
        return code, {a.out: text}, f"{len(rows)} rows written to {a.out}", statuses
    return code, {}, text.rstrip(), statuses


def cmd_expander(a):
    from .experiments import EXPANDER_COLUMNS, report_rows, run_expander_experiment

    rows = report_rows(run_expander_experiment(a.n, a.d, a.seed, s_size=a.s_size, arithmetic=a.arithmetic))
    return _report(a, rows, EXPANDER_COLUMNS)


def cmd_holder(a):
    from .experiments import HOLDER_COLUMNS, report_rows, run_holder_experiment

    rows = report_rows(run_holder_experiment(a.n, a.alpha, seed=a.seed, restarts=a.restarts))
    return _report(a, rows, HOLDER_COLUMNS)


def cmd_replay(a):
    doc = lio.load_json(a.manifest)
    argv = doc["argv"]
    code, files, _, _ = _execute(argv)
    mismatched = []
    for path, digest in doc.get("outputs", {}).items():
        text = files.get(path)
        if text is None or _sha(text) != digest:
            mismatched.append(path)
    if mismatched:
        return EXIT_DOMAIN, {}, "replay differs: " + ", ".join(mismatched), []
    # every digest matched: rewrite the reproduced outputs
    return code, files, "replay reproduced all outputs byte for byte", []


def _out_or_print(a, text):
    if a.out:
        return {a.out: text}, f"written to {a.out}", []
    return {}, text.rstrip(), []


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lipext", description="Lipschitz-extension toolkit on finite metric spaces.")
    p.add_argument("--version", action="version", version=f"lipext {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(sp):
        sp.add_argument("--out", help="output file (written atomically, with a manifest)")

    def arith(sp):
        sp.add_argument("--arithmetic", choices=("auto", "exact", "float"), default="auto")

    mp = sub.add_parser("metric", help="finite metric constructions").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = mp.add_parser("validate", help="check the metric axioms")
    sp.add_argument("--file", required=True)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--semi", action="store_true", help="allow zero distances between distinct points")
    out(sp)
    sp.set_defaults(func=cmd_metric_validate)
    sp = mp.add_parser("magnify", help="r-magnification at a subset")
    sp.add_argument("--file", required=True)
    sp.add_argument("--subset", type=_int_list, required=True)
    sp.add_argument("--r", type=_number, required=True)
    out(sp)
    sp.set_defaults(func=cmd_metric_magnify)
    sp = mp.add_parser("snowflake", help="raise distances to a power in (0, 1]")
    sp.add_argument("--file", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    out(sp)
    sp.set_defaults(func=cmd_metric_snowflake)
    sp = mp.add_parser("twist", help="twisted union of two hypercubes")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--r", type=float, help="defaults to n^(1/(4 alpha^2))")
    sp.add_argument("--s", type=float, help="defaults to n^(-(2 alpha-1)/(4 alpha^2))")
    sp.add_argument("--max-n", type=int, default=8)
    out(sp)
    sp.set_defaults(func=cmd_metric_twist)

    gp = sub.add_parser("graphs", help="regular graphs and expansion").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = gp.add_parser("gen", help="random regular graph")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    out(sp)
    sp.set_defaults(func=cmd_graphs_gen)
    sp = gp.add_parser("expansion", help="edge expansion")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--method", choices=("auto", "exact", "spectral"), default="auto")
    out(sp)
    sp.set_defaults(func=cmd_graphs_expansion)
    sp = gp.add_parser("menger", help="edge-disjoint paths between vertex sets")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--a", type=_int_list, required=True)
    sp.add_argument("--b", type=_int_list, required=True)
    sp.add_argument("--phi", type=_number)
    out(sp)
    sp.set_defaults(func=cmd_graphs_menger)

    wp = sub.add_parser("w1", help="Wasserstein-1 norm and distance").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = wp.add_parser("norm", help="W1 norm of a zero-sum vector")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--f", required=True)
    out(sp)
    sp.set_defaults(func=cmd_w1_norm)
    sp = wp.add_parser("distance", help="W1 distance of two measures")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    out(sp)
    sp.set_defaults(func=cmd_w1_distance)

    zp = sub.add_parser("zext", help="0-Extension").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = zp.add_parser("solve", help="OPT, MET and EMD with the chain audit")
    sp.add_argument("--instance", required=True, help="instance JSON, or @star for the bundled example")
    arith(sp)
    out(sp)
    sp.set_defaults(func=cmd_zext_solve)

    ep = sub.add_parser("ext", help="minimum-constant extension").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = ep.add_parser("solve", help="solve an extension problem")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--target", choices=("w1", "l1", "linf", "l2", "real"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=5)
    arith(sp)
    out(sp)
    sp.set_defaults(func=cmd_ext_solve)

    def report(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        out(sp)

    sp = sub.add_parser("expander", help="expander-construction sweep")
    sp.add_argument("--n", type=_int_list, required=True)
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--s-size", type=int, help="override |S| (default: clamped formula)")
    arith(sp)
    report(sp)
    sp.set_defaults(func=cmd_expander)

    sp = sub.add_parser("holder", help="twisted-cube sweep")
    sp.add_argument("--n", type=_int_list, required=True)
    sp.add_argument("--alpha", type=_float_list, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=5)
    report(sp)
    sp.set_defaults(func=cmd_holder)

    sp = sub.add_parser("replay", help="re-run a manifest and compare outputs")
    sp.add_argument("manifest")
    sp.set_defaults(func=cmd_replay)
    return p


def _execute(argv):
    args = build_parser().parse_args(argv)
    return args.func(args)


def _manifest(argv, args_code, files, statuses) -> str:
    seeds = [argv[i + 1] for i, tok in enumerate(argv[:-1]) if tok == "--seed"]
    arithmetic = [argv[i + 1] for i, tok in enumerate(argv[:-1]) if tok == "--arithmetic"]
    doc = {
        "argv": list(argv),
        "seeds": seeds or ["0"],
        "arithmetic": arithmetic[0] if arithmetic else "auto",
        "log_base": "e",
        "version": __version__,
        "exit_code": args_code,
        "row_status": statuses,
        "outputs": {path: _sha(text) for path, text in sorted(files.items())},
    }
    return lio.dumps(doc)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        code, files, text, statuses = _execute(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except LipextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    for path, body in sorted(files.items()):
        lio.atomic_write(path, body)
    if files and argv and argv[0] != "replay":
        first = sorted(files)[0]
        lio.atomic_write(str(Path(first)) + ".manifest.json", _manifest(argv, code, files, statuses))
    if text:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
