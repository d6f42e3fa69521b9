"""Command-line interface: ``bsp search|tune|simulate|evaluate|netstats|filter``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import __version__, jsonio
from .errors import BSPError
from .matrix import load_dataset, prepare, write_matrix
from .metrics import score_collection, strength
from .network import net_stats
from .pipeline import bimodule_from_record, bimodule_record, discover, representatives
from .search import SearchConfig
from .simulate import GroundTruth, generate_dataset, truth_json_dump
from .tuning import choose_alpha

log = logging.getLogger("bsp")


def default_workers(flag=None) -> int:
    """BSP_WORKERS wins over ``--workers``, which wins over the core count."""
    env = os.environ.get("BSP_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"BSP_WORKERS={env!r} is not an integer") from None
        if n < 1:
            raise ValueError("BSP_WORKERS must be at least 1")
        return n
    if flag is not None:
        return flag
    return os.cpu_count() or 1


def _fraction(text):
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _open_unit(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be a positive integer")
    return v


def _grid(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse grid {text!r}") from None
    if not vals or any(not 0 < v < 1 for v in vals):
        raise argparse.ArgumentTypeError("grid values must lie in (0, 1)")
    return sorted(vals)


def _add_data_args(p, covariates=True):
    p.add_argument("--x", required=True, help="Type-1 matrix (CSV or BSPM binary)")
    p.add_argument("--y", required=True, help="Type-2 matrix (CSV or BSPM binary)")
    if covariates:
        p.add_argument("--covariates", help="covariate matrix to project out")


def _add_search_args(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-fraction-s", type=_fraction, default=1.0)
    p.add_argument("--seed-fraction-t", type=_fraction, default=1.0)
    p.add_argument("--skip-covered", action="store_true",
                   help="skip seeds inside already-found bimodules (forces serial search)")
    p.add_argument("--max-iter", type=_positive_int, default=20)
    p.add_argument("--size-cap", type=float, default=5000.0)
    p.add_argument("--n-perms", type=int, default=2000,
                   help="permutations for the p(A, B) significance filter")
    p.add_argument("--workers", type=_positive_int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bsp", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--summary", help="run-summary path (default: <out>.summary.json, "
                        "or bsp_<command>.summary.json when writing to stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="discover stable bimodules")
    _add_data_args(p)
    p.add_argument("--alpha", type=_open_unit, default=0.05)
    _add_search_args(p)
    p.add_argument("--no-overlap-filter", action="store_true")
    p.add_argument("--traces", help="write per-seed search traces (JSON lines)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("tune", help="choose alpha from half-permuted data")
    _add_data_args(p)
    p.add_argument("--grid", type=_grid, default=_grid("0.01,0.02,0.03,0.04,0.05"))
    p.add_argument("--half-perms", type=_positive_int, default=5)
    p.add_argument("--target", type=_open_unit, default=0.05)
    _add_search_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="generate a planted-bimodule benchmark")
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--q", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--bridge-rate", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "bin"], default="csv")
    p.add_argument("--edge-cap", type=int, default=None,
                   help="omit the population edge list above this many edges")
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("evaluate", help="score found bimodules against a ground truth")
    p.add_argument("--found", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--x", help="Type-1 matrix, to report planted cross-correlation strength")
    p.add_argument("--y", help="Type-2 matrix, to report planted cross-correlation strength")
    p.add_argument("--out", help="report JSON (default: stdout)")
    p.add_argument("--csv", help="per-bimodule rows")

    p = sub.add_parser("netstats", help="connectivity threshold and essential edges")
    _add_data_args(p)
    p.add_argument("--bimodules", required=True)
    p.add_argument("--out", help="default: stdout")

    p = sub.add_parser("filter", help="select representatives of overlapping bimodules")
    p.add_argument("--bimodules", required=True)
    p.add_argument("--out", help="default: stdout")
    return parser


def _search_config(args, alpha) -> SearchConfig:
    workers = default_workers(args.workers)
    return SearchConfig(
        alpha=alpha, max_iterations=args.max_iter, size_cap=args.size_cap,
        seed_fraction_s=args.seed_fraction_s, seed_fraction_t=args.seed_fraction_t,
        skip_covered_seeds=args.skip_covered, rng_seed=args.seed, workers=workers,
        n_perms=args.n_perms,
    )


def _summary(args, started, **extra) -> dict:
    info = {
        "command": args.command,
        "versions": {
            "bsp": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "seed": getattr(args, "seed", None),
        "seconds": time.time() - started,
    }
    info.update(extra)
    return info


def _write_summary(args, out, info):
    path = args.summary or (f"{out}.summary.json" if out else f"bsp_{args.command}.summary.json")
    jsonio.dump(info, path, indent=2)


def _emit(obj, out):
    if out:
        jsonio.dump(obj, out, indent=1)
    else:
        sys.stdout.write(jsonio.dumps(obj, indent=1) + "\n")


def cmd_search(args, started):
    raw = load_dataset(args.x, args.y, args.covariates)
    ds = prepare(raw)
    cfg = _search_config(args, args.alpha)
    res = discover(ds, cfg, filter_overlaps=not args.no_overlap_filter)
    records = [bimodule_record(ds, d.bimodule, d.stats, ident=i)
               for i, d in enumerate(res.discoveries)]
    _emit(records, args.out)
    if args.traces:
        with open(args.traces, "w") as fh:
            for tr in res.traces:
                fh.write(jsonio.dumps({
                    "seed": (ds.s_ids if tr.view.value == "S" else ds.t_ids)[tr.seed],
                    "view": tr.view.value, "iterates": tr.iterates,
                    "termination": tr.termination.value, "iterations": tr.iterations,
                    "seed_contained": tr.seed_contained,
                }) + "\n")
    contained = [t.seed_contained for t in res.traces if t.seed_contained is not None]
    _write_summary(args, args.out, _summary(
        args, started, n=ds.n, n_eff=ds.n_eff, p=ds.p, q=ds.q, alpha=args.alpha,
        workers=cfg.workers, searches=len(res.traces), fixed_points=res.n_raw,
        significant=res.n_significant, bimodules=len(records),
        seed_contained_fraction=(sum(contained) / len(contained)) if contained else None,
    ))


def cmd_tune(args, started):
    raw = load_dataset(args.x, args.y, args.covariates)
    base = _search_config(args, args.grid[0])
    report = choose_alpha(raw, args.grid, args.half_perms, args.target, args.seed, base)
    _emit(report.to_json(), args.out)
    _write_summary(args, args.out, _summary(args, started, n=raw.n,
                                      n_eff=raw.n - (0 if raw.covariates is None
                                                     else raw.covariates.shape[1]),
                                      chosen_alpha=report.chosen_alpha))


def cmd_simulate(args, started):
    raw, truth = generate_dataset(args.p, args.q, args.n, args.k, args.bridge_rate, args.seed)
    ext = "csv" if args.format == "csv" else "bin"
    write_matrix(f"{args.out_prefix}_x.{ext}", raw.x, raw.s_ids, args.format)
    write_matrix(f"{args.out_prefix}_y.{ext}", raw.y, raw.t_ids, args.format)
    truth_json_dump(truth, f"{args.out_prefix}_truth.json", args.edge_cap)
    _write_summary(args, args.out_prefix, _summary(args, started, n=raw.n, n_eff=raw.n_eff,
                                             bridges=len(truth.bridge_edges)))


def _edges_to_index(rec):
    s_pos = dict(zip(rec["A"], rec["A_index"]))
    t_pos = dict(zip(rec["B"], rec["B_index"]))
    return [(s_pos[s], t_pos[t], w) for s, t, w in rec.get("essential_edges", [])]


def cmd_evaluate(args, started):
    found = jsonio.load(args.found)
    truth = GroundTruth.from_json(jsonio.load(args.truth))
    dets = [bimodule_from_record(r) for r in found]
    essential = [_edges_to_index(r) for r in found]
    truths = [(pb.A, pb.B) for pb in truth.planted]
    rep = score_collection(truths, dets, truth.truth_edges(), essential)
    out = rep.to_json()
    if args.x and args.y:
        ds = prepare(load_dataset(args.x, args.y))
        out["strength"] = [strength(ds, a, b) for a, b in truths]
    _emit(out, args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "size_A", "size_B", "edge_error", "overlap_count"])
            for i, (bm, err, ov) in enumerate(zip(dets, rep.edge_errors, rep.overlap_counts)):
                w.writerow([found[i].get("id", i), len(bm.A), len(bm.B),
                            "" if err is None else format(err, ".17g"), ov])
    _write_summary(args, args.out, _summary(args, started, detections=len(dets),
                                      truths=len(truths)))


def cmd_netstats(args, started):
    ds = prepare(load_dataset(args.x, args.y, args.covariates))
    recs = jsonio.load(args.bimodules)
    out = []
    for i, rec in enumerate(recs):
        bm = bimodule_from_record(rec, ds)
        st = net_stats(ds, bm)
        out.append({
            "id": rec.get("id", i), "tau_star": st.tau_star,
            "tree_multiplicity": st.tree_multiplicity,
            "n_essential_edges": len(st.essential_edges),
            "essential_edges": [[ds.s_ids[s], ds.t_ids[t], w] for s, t, w in st.essential_edges],
        })
    _emit(out, args.out)
    _write_summary(args, args.out, _summary(args, started, n=ds.n, n_eff=ds.n_eff))


def cmd_filter(args, started):
    recs = jsonio.load(args.bimodules)
    bms = [bimodule_from_record(r) for r in recs]
    by_key = {}
    for r, bm in zip(recs, bms):
        by_key.setdefault(bm.key, r)
    kept = representatives(bms)
    _emit([by_key[bm.key] for bm in kept], args.out)
    _write_summary(args, args.out, _summary(args, started, input=len(recs), kept=len(kept)))


COMMANDS = {
    "search": cmd_search, "tune": cmd_tune, "simulate": cmd_simulate,
    "evaluate": cmd_evaluate, "netstats": cmd_netstats, "filter": cmd_filter,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    started = time.time()
    try:
        COMMANDS[args.command](args, started)
    except (BSPError, ValueError, KeyError, OSError) as exc:
        print(f"bsp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
