"""Command-line harness for source localization experiments."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataio import Dataset, OutlierMode, load_dataset, write_results
from .errors import InvalidParameterError, SourceLocError
from .experiments import (
    DISTANCE_GRID_COLUMNS,
    K_SWEEP_COLUMNS,
    SNR_GRID_COLUMNS,
    ExperimentGrid,
    localize,
    run_distance_theta_grid,
    run_k_sweep,
    run_snr_theta_grid,
    summarize_records,
)
from .graphs import AUTO
from .solver import SolverConfig
from .synth import generate_planted_dataset, generate_sensor_graph

SUMMARY_KEYS = {"dist": ["h", "theta"], "snr": ["snr_db", "theta"]}


def _parse_int_list(text: str):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v]


def _parse_float_list(text: str):
    return [float(v) for v in text.split(",") if v]


def _parse_sigma2(text: str):
    if text.lower() == AUTO:
        return AUTO
    value = float(text)
    return value


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--gamma", type=float, default=1e-2, help="l1 weight (default 0.01)")
    p.add_argument("--alpha", type=float, default=1.0, help="fidelity weight (default 1)")
    p.add_argument("--epsilon", type=float, default=1e-8,
                   help="outer stopping tolerance on the energy change")
    p.add_argument("--max-outer-iter", type=int, default=50)
    p.add_argument("--fista-max-iter", type=int, default=1000)
    p.add_argument("--fista-tol", type=float, default=1e-8)
    p.add_argument("--mu", type=float, default=None,
                   help="Newton proximal weight (default 0.01*alpha)")
    p.add_argument("--newton-max-iter", type=int, default=20)
    p.add_argument("--theta-min", type=float, default=1e-4)
    p.add_argument("--theta-max", type=float, default=50.0)


def _solver_config(args, fix_theta: bool) -> SolverConfig:
    return SolverConfig(
        gamma=args.gamma, alpha=args.alpha, epsilon=args.epsilon,
        max_outer_iter=args.max_outer_iter, fista_max_iter=args.fista_max_iter,
        fista_tol=args.fista_tol, mu=args.mu, newton_max_iter=args.newton_max_iter,
        theta_min=args.theta_min, theta_max=args.theta_max, fix_theta=fix_theta,
    )


def _add_dataset_flags(p: argparse.ArgumentParser, distances: bool = True):
    p.add_argument("--points", help="points CSV (id,x,y[,z...])")
    p.add_argument("--signal", required=True, help="signal CSV (id,value; NA = invalid)")
    if distances:
        p.add_argument("--distances", help="square distance-matrix CSV")


def _load(args) -> Dataset:
    return load_dataset(points_path=args.points, signal_path=args.signal,
                        distances_path=getattr(args, "distances", None))


def _source_indices(dataset: Dataset, id_list: str):
    labels = list(dataset.node_labels or [])
    indices = []
    for token in id_list.split(","):
        token = token.strip()
        if not token:
            continue
        if token in labels:
            indices.append(labels.index(token))
        else:
            try:
                indices.append(int(token))
            except ValueError:
                raise InvalidParameterError(f"unknown source node id {token!r}")
    if not indices:
        raise InvalidParameterError("no source nodes given")
    return indices


def _outlier_mode(args) -> OutlierMode | None:
    wants = getattr(args, "remove_max", False) or getattr(args, "remove_node", None)
    if not wants and getattr(args, "outlier_mode", "none") in (None, "none"):
        return None
    mode = getattr(args, "outlier_mode", None) or "mask"
    if mode == "none":
        mode = "mask" if wants else "none"
    return OutlierMode(mode)


def _write_with_summary(records, columns, cell_keys, args):
    out = Path(args.out)
    write_results(records, out, format=args.format, columns=columns)
    summary = summarize_records(records, cell_keys)
    summary_cols = cell_keys + ["trials", "n_ok", "n_infinite", "n_failed",
                                "mean_hop_error", "std_hop_error"]
    summary_path = out.with_name(out.stem + "_summary" + out.suffix)
    write_results(summary, summary_path, format=args.format, columns=summary_cols)
    print(f"wrote {len(records)} records to {out} (summary: {summary_path})")


def cmd_grid_distance_theta(args) -> int:
    grid = ExperimentGrid(h_values=tuple(args.h_values), theta_values=tuple(args.theta_values),
                          trials=args.trials, seed=args.seed)
    cfg = _solver_config(args, fix_theta=not args.joint)
    records = run_distance_theta_grid(grid, cfg, n=args.n, graph_k=args.k)
    _write_with_summary(records, DISTANCE_GRID_COLUMNS, SUMMARY_KEYS["dist"], args)
    return 0


def cmd_grid_snr_theta(args) -> int:
    grid = ExperimentGrid(snr_db_values=tuple(args.snr_values),
                          theta_values=tuple(args.theta_values),
                          trials=args.trials, seed=args.seed)
    cfg = _solver_config(args, fix_theta=not args.joint)
    records = run_snr_theta_grid(grid, cfg, n=args.n, graph_k=args.k, h=args.h)
    _write_with_summary(records, SNR_GRID_COLUMNS, SUMMARY_KEYS["snr"], args)
    return 0


def cmd_k_sweep(args) -> int:
    dataset = _load(args)
    cfg = _solver_config(args, fix_theta=True)
    sources = _source_indices(dataset, args.sources)
    records = run_k_sweep(dataset, _parse_int_list(args.k_values), cfg,
                          theta=args.fix_theta, source_nodes=sources,
                          outlier_mode=_outlier_mode(args), sigma2=args.sigma2)
    write_results(records, args.out, format=args.format, columns=K_SWEEP_COLUMNS)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_localize(args) -> int:
    dataset = _load(args)
    if args.fix_theta is not None:
        cfg = _solver_config(args, fix_theta=True)
        theta_init = args.fix_theta
    else:
        cfg = _solver_config(args, fix_theta=False)
        theta_init = args.theta_init
    sources = _source_indices(dataset, args.sources) if args.sources else None
    outlier_nodes = _source_indices(dataset, args.remove_node) if args.remove_node else ()
    res, g, report = localize(dataset, cfg, k=args.k, sigma2=args.sigma2,
                              theta_init=theta_init, source_nodes=sources,
                              outlier_mode=_outlier_mode(args),
                              outlier_nodes=outlier_nodes)

    prefix = Path(args.out)
    labels = dataset.node_labels or tuple(str(i) for i in range(dataset.n))
    ext = "csv" if args.format == "csv" else "json"
    recovered_path = prefix.with_name(prefix.name + f"_recovered.{ext}")
    write_results([{"id": labels[i], "x": float(res.x[i])} for i in range(dataset.n)],
                  recovered_path, format=args.format, columns=["id", "x"])
    solve_path = prefix.with_name(prefix.name + "_solve.json")
    with open(solve_path, "w") as fh:
        json.dump({
            "theta": res.theta,
            "converged": res.converged,
            "outer_iterations": res.outer_iterations,
            "energy_trace": [[k, e] for k, e in res.energy_trace],
        }, fh, indent=2)
        fh.write("\n")
    print(f"theta={res.theta:.9g} converged={res.converged} "
          f"iterations={res.outer_iterations}")
    print(f"wrote {recovered_path} and {solve_path}")
    if report is not None:
        report_path = prefix.with_name(prefix.name + "_hop_report.json")
        with open(report_path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        print(f"hop error {report.total:.9g} (report: {report_path})")
    return 0


def cmd_gen_sensor(args) -> int:
    g = generate_sensor_graph(args.n, args.k, args.seed)
    ids = [f"n{i}" for i in range(g.n)]
    rows = [{"id": ids[i], "x": float(g.coords[i, 0]), "y": float(g.coords[i, 1])}
            for i in range(g.n)]
    write_results(rows, args.out, format="csv", columns=["id", "x", "y"])
    print(f"wrote {g.n} points to {args.out}")
    return 0


def cmd_gen_planted_dataset(args) -> int:
    g, b, sources = generate_planted_dataset(n=args.n, k=args.k, theta=args.theta,
                                             n_sources=args.n_sources, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = [f"n{i}" for i in range(g.n)]
    write_results([{"id": ids[i], "x": float(g.coords[i, 0]), "y": float(g.coords[i, 1])}
                   for i in range(g.n)],
                  out_dir / "points.csv", format="csv", columns=["id", "x", "y"])
    write_results([{"id": ids[i], "value": float(b[i])} for i in range(g.n)],
                  out_dir / "signal.csv", format="csv", columns=["id", "value"])
    meta = {
        "n": g.n, "k": args.k, "theta": args.theta, "seed": args.seed,
        "sources": [ids[s] for s in sources],
        "source_indices": list(sources),
    }
    with open(out_dir / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(f"wrote planted dataset to {out_dir} (sources: {meta['sources']})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srcloc",
        description="Recover sparse diffusion sources on weighted graphs "
                    "from a single observed snapshot.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("localize", help="solve one dataset")
    _add_dataset_flags(p)
    p.add_argument("--k", type=int, default=10, help="k-NN neighbors (default 10)")
    p.add_argument("--sigma2", type=_parse_sigma2, default=AUTO,
                   help="Gaussian kernel scale, or 'auto'")
    _add_solver_flags(p)
    p.add_argument("--fix-theta", type=float, default=None,
                   help="fix the diffusion time at this value")
    p.add_argument("--theta-init", type=float, default=1.0,
                   help="initial diffusion time for joint solves")
    p.add_argument("--sources", help="comma-separated ground-truth node ids for scoring")
    p.add_argument("--remove-max", action="store_true",
                   help="remove the argmax(b) observation before solving")
    p.add_argument("--remove-node", help="comma-separated node ids to remove")
    p.add_argument("--outlier-mode", choices=["none", "mask", "interpolate"], default="none")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("grid-distance-theta",
                       help="hop error vs (source distance, diffusion time)")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--h-values", type=_parse_int_list, default=list(range(1, 11)),
                   help="comma list or lo:hi (default 1:10)")
    p.add_argument("--theta-values", type=_parse_float_list,
                   default=[0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--joint", action="store_true",
                   help="learn theta jointly instead of fixing it per cell")
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_grid_distance_theta)

    p = sub.add_parser("grid-snr-theta", help="hop error vs (SNR, diffusion time)")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--h", type=int, default=6, help="spike hop distance (default 6)")
    p.add_argument("--snr-values", type=_parse_float_list,
                   default=[0.0, 5.0, 10.0, 15.0, 20.0],
                   help="SNR values in dB (energy-ratio definition)")
    p.add_argument("--theta-values", type=_parse_float_list,
                   default=[0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--joint", action="store_true")
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_grid_snr_theta)

    p = sub.add_parser("k-sweep", help="hop error vs k-NN graph density")
    _add_dataset_flags(p)
    p.add_argument("--k-values", default="5:25", help="comma list or lo:hi")
    p.add_argument("--sigma2", type=_parse_sigma2, default=AUTO)
    p.add_argument("--fix-theta", type=float, required=True,
                   help="diffusion time (fixed while sweeping)")
    p.add_argument("--sources", required=True,
                   help="comma-separated ground-truth node ids")
    p.add_argument("--remove-max", action="store_true")
    p.add_argument("--outlier-mode", choices=["none", "mask", "interpolate"], default="none")
    _add_solver_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_k_sweep)

    p = sub.add_parser("gen-sensor", help="generate a random sensor graph")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="points CSV path")
    p.set_defaults(func=cmd_gen_sensor)

    p = sub.add_parser("gen-planted-dataset",
                       help="generate a dataset with known diffusion sources")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--n-sources", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen_planted_dataset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SourceLocError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
