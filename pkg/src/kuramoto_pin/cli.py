"""Command line interface.

Subcommands: sweep (algorithm comparison to CSV plus figures), select
(one graph, one algorithm, JSON result), simulate (fixed-step run to
CSV with a JSON diagnostics sidecar and a figure), check (feasibility
report), audit (exhaustive cycle parity-vs-oracle cross-check), report
(re-render figures and summary from an existing CSV), and generate
(write a random graph file).  Exit codes: 0 on success, 2 on
configuration errors, 3 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    SimConfig,
    SimulationError,
    detect_frequency_sync,
    detect_phase_sync,
    metzler_diagnostic,
    monitor_bounds,
    simulate,
)
from .experiments import (
    ConfigError,
    SweepConfig,
    emit_results,
    load_records,
    run_sweep,
    summarize,
)
from .feasibility import check_feasibility, cycle_audit, sample_initial_phases
from .graph import GRAPH_KINDS, GraphError, generate_ensemble, load_graph, save_graph
from .selection import (
    QEstimatorConfig,
    select_greedy_lambda,
    select_optimal,
    select_random,
    select_submodular,
)
from .spectral import certify, dtw_norm, hetero_threshold, lambda_min, reduce_system

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parse_inputs(raw: str) -> tuple[int, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    try:
        return tuple(int(tok) for tok in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse input set {raw!r}: {exc}") from exc


def _cmd_generate(args: argparse.Namespace) -> int:
    g = generate_ensemble(
        args.kind,
        args.nodes,
        edge_prob=args.edge_prob,
        weight_range=(args.weight_min, args.weight_max),
        neg_fraction=args.neg_fraction,
        rng_seed=args.seed,
    )
    omega = None
    if args.omega_max > 0:
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1]))
        omega = rng.uniform(args.omega_min, args.omega_max, size=g.n)
    save_graph(args.out, g, omega)
    print(f"wrote {args.out} ({g.n} nodes, {g.m} edges)")
    return EXIT_OK


def _resolve_delta(raw: str, g, omega) -> float:
    if raw == "auto":
        return 0.0 if not np.any(omega) else hetero_threshold(g, omega)
    try:
        val = float(raw)
    except ValueError as exc:
        raise ConfigError(f"delta must be 'auto' or a number, got {raw!r}") from exc
    if val < 0:
        raise ConfigError("delta must be nonnegative")
    return val


def _cmd_select(args: argparse.Namespace) -> int:
    g, omega = load_graph(args.graph)
    delta = _resolve_delta(args.delta, g, omega)
    if args.algorithm == "submodular":
        res = select_submodular(
            g, omega, delta, QEstimatorConfig(sample_count=args.samples, rng_seed=args.seed)
        )
    elif args.algorithm == "greedy":
        res = select_greedy_lambda(g, omega, delta)
    elif args.algorithm == "random":
        res = select_random(g, omega, delta, rng_seed=args.seed)
    else:
        res = select_optimal(g, omega, delta)
    payload = res.to_dict()
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    g, omega = load_graph(args.graph)
    S = _parse_inputs(args.inputs)
    cfg = SimConfig(step_h=args.step, horizon_T=args.horizon)
    if args.theta0 == "zero":
        theta0 = np.zeros(g.n)
    elif args.theta0 == "sampled":
        theta0 = sample_initial_phases(g, S, rng_seed=args.seed, margin=args.margin)
        if theta0 is None:
            print("admissible-interval system infeasible; cannot sample theta0", file=sys.stderr)
            return EXIT_RUNTIME
    elif args.theta0.startswith("file:"):
        theta0 = np.array(json.loads(Path(args.theta0[5:]).read_text()), dtype=float)
    else:
        raise ConfigError(f"theta0 must be zero|sampled|file:PATH, got {args.theta0!r}")

    traj = simulate(g, omega, S, theta0, cfg)
    out = Path(args.out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"theta_{i}" for i in range(1, g.n + 1)])
        for k in range(traj.times.size):
            writer.writerow([traj.times[k]] + [v for v in traj.theta[k]])

    rs = traj.rs
    freq = detect_frequency_sync(traj)
    phase = detect_phase_sync(traj)
    bounds = monitor_bounds(traj, g)
    metzler = metzler_diagnostic(traj, g)
    lam = lambda_min(rs.RS)
    diagnostics = {
        "inputs": list(rs.input_nodes),
        "lambda_min": lam if np.isfinite(lam) else "inf",
        "dtw_norm": dtw_norm(rs),
        "hetero_threshold": hetero_threshold(g, omega),
        "homogeneous_certificate": certify(lam, 0.0).satisfied,
        "frequency_sync": {"ok": freq.ok, "residual": freq.residual},
        "phase_sync": {"ok": phase.ok, "residual": phase.residual},
        "bounds": bounds.to_dict(),
        "metzler": metzler.to_dict(),
    }
    sidecar = out.with_suffix(out.suffix + ".diagnostics.json")
    sidecar.write_text(json.dumps(diagnostics, indent=2) + "\n")
    if not args.no_figures:
        from .plots import trajectory_figure

        trajectory_figure(traj, out.with_suffix(".png"))
    print(json.dumps(diagnostics, indent=2))
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    g, _ = load_graph(args.graph)
    report = check_feasibility(g, margin=args.margin)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read sweep config {args.config}: {exc}") from exc
    cfg = SweepConfig.from_dict(raw)
    records, summary = run_sweep(cfg, workers=args.workers)
    out = Path(args.out)
    emit_results(records, out, fmt=args.format)
    summary_path = out.with_suffix(out.suffix + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    if not args.no_figures and records:
        from .plots import sweep_figure

        label = "negative-edge fraction" if cfg.sweep_axis == "neg_fraction" else "WF"
        fig_path = out.with_suffix(".png")
        sweep_figure(records, fig_path, axis_label=label)
        print(f"wrote {out}, {summary_path}, {fig_path}")
    else:
        print(f"wrote {out}, {summary_path}")
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    result = cycle_audit(
        min_len=args.min_len, max_len=args.max_len, margin=args.margin, log_path=args.log
    )
    summary = {
        "patterns": len(result.records),
        "parity_true": sum(1 for r in result.records if r.parity_ok),
        "discrepancies": [r.to_dict() for r in result.discrepancies],
        "conservative": [r.to_dict() for r in result.conservative],
        "log_path": result.log_path,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    records = load_records(args.results)
    if not records:
        raise ConfigError(f"no rows in {args.results}")
    summary = summarize(records)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .plots import sweep_figure

    written = []
    for kind in sorted({r.graph_kind for r in records}):
        subset = [r for r in records if r.graph_kind == kind]
        path = out_dir / f"sweep_{kind}.png"
        sweep_figure(subset, path)
        written.append(str(path))
    summary["figures"] = written
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuramoto-pin",
        description="Control-input selection and synchronization certificates "
        "for signed oscillator networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random graph JSON file")
    p.add_argument("--kind", choices=GRAPH_KINDS, default="undirected-ER")
    p.add_argument("--nodes", type=int, default=10)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--weight-min", type=float, default=1.0)
    p.add_argument("--weight-max", type=float, default=5.0)
    p.add_argument("--neg-fraction", type=float, default=0.0)
    p.add_argument("--omega-min", type=float, default=0.0)
    p.add_argument("--omega-max", type=float, default=0.0, help="0 keeps omega identical")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("select", help="choose control inputs for one graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", default="auto")
    p.add_argument(
        "--algorithm",
        choices=("submodular", "greedy", "random", "optimal"),
        default="submodular",
    )
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("simulate", help="integrate the pinned network")
    p.add_argument("--graph", required=True)
    p.add_argument("--inputs", default="", help="comma-separated 1-based node ids")
    p.add_argument("--theta0", default="zero", help="zero | sampled | file:PATH")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--horizon", type=float, default=200.0)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("check", help="feasibility report for one graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("sweep", help="run a seeded algorithm-comparison sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("audit", help="exhaustive cycle parity-vs-oracle cross-check")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--log", default="discrepancies.jsonl")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("report", help="figures and summary from an existing CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out-dir", default="figures")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
