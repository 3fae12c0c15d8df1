"""Command-line experiment runner.

Verbs:

    dplqg synthesize   --config cfg.json [--seed N] [--out DIR]
    dplqg simulate     --config cfg.json [--steps N] [--seed N] [--out DIR]
    dplqg sweep-epsilon --config cfg.json [--grid LIST] [--seeds N]
                        [--steps N] [--seed N] [--out DIR]
    dplqg bound        --config cfg.json [--out DIR]

Exit codes: 0 success, 2 invalid configuration or arguments, 3 model
assumption failure, 4 Riccati non-convergence, 5 entropy cap inapplicable
(its spectral condition fails). Unexpected internal errors exit 1 with a
traceback.

All outputs are deterministic for a given config and seed: rerunning a verb
with the same inputs rewrites byte-identical files.
"""

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bounds import (
    covariance_bound_condition,
    entropy_bound_report,
    logdet,
    posterior_variance_diag,
    variance_floor,
)
from .config import build_network, load, resolve_costs
from .errors import (
    AssumptionError,
    ConfigError,
    ConvergenceError,
    InapplicableBoundError,
)
from .lqg import synthesize
from .network import assemble_network, run_simulation, write_messages_csv, write_trace_csv
from .privacy import PrivacySpec
from .riccati import dare_residual_control, dare_residual_filter

DEFAULT_SWEEP_GRID = (0.1, 0.3, 0.7, 1.2, 2.0, 3.0)
DEFAULT_SWEEP_SEEDS = 10


def _fmt(value):
    return repr(float(value))


def _write_matrix(M, path):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in M:
            writer.writerow([_fmt(v) for v in row])


def _write_kv(lines, path):
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def _out_dir(cfg, override):
    out = Path(override if override is not None else (cfg.out or "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synthesize(cfg, out=None, seed=None):
    """Solve both Riccati equations and write gains, covariances, residuals."""
    model, _ = build_network(cfg, seed=seed)
    syn = synthesize(model)
    out_dir = _out_dir(cfg, out)
    _write_matrix(syn.K, out_dir / "K.csv")
    _write_matrix(syn.L, out_dir / "L.csv")
    _write_matrix(syn.Sigma, out_dir / "Sigma.csv")
    _write_matrix(syn.SigmaBar, out_dir / "SigmaBar.csv")
    _write_matrix(model.V, out_dir / "V.csv")
    closed = model.A + model.B @ syn.L
    lines = [
        f"control_residual = {_fmt(dare_residual_control(syn.K, model.A, model.B, model.Q, model.R))}",
        f"filter_residual = {_fmt(dare_residual_filter(syn.Sigma, model.A, model.C, model.W, model.V))}",
        f"closed_loop_spectral_radius = {_fmt(np.abs(np.linalg.eigvals(closed)).max())}",
        f"logdet_prediction_cov = {_fmt(logdet(syn.Sigma))}",
    ]
    for i, sigma in enumerate(model.sigmas):
        lines.append(f"sigma_agent{i} = {_fmt(sigma)}")
    _write_kv(lines, out_dir / "synthesis_summary.txt")
    print(f"wrote synthesis results to {out_dir}")
    return 0


def cmd_simulate(cfg, out=None, steps=None, seed=None):
    """Run the closed loop and write the trace, the wire log, and a summary."""
    master_seed = cfg.seed if seed is None else int(seed)
    horizon = cfg.horizon if steps is None else int(steps)
    model, agents = build_network(cfg, seed=master_seed)
    syn = synthesize(model)
    trace = run_simulation(model, agents, horizon, master_seed, synthesis=syn)
    out_dir = _out_dir(cfg, out)
    write_trace_csv(trace, out_dir / "trace.csv")
    write_messages_csv(trace.messages, out_dir / "messages.csv")
    max_norm = (
        float(np.linalg.norm(trace.x, axis=1).max()) if trace.horizon else 0.0
    )
    lines = [
        f"steps = {trace.horizon}",
        f"seed = {master_seed}",
        f"message_count = {len(trace.messages)}",
        f"final_avg_cost = {_fmt(trace.avg_cost[-1]) if trace.horizon else 'none'}",
        f"max_state_norm = {_fmt(max_norm)}",
        f"logdet_prediction_cov = {_fmt(logdet(syn.Sigma))}",
    ]
    _write_kv(lines, out_dir / "simulate_summary.txt")
    print(f"wrote simulation results to {out_dir}")
    return 0


def sweep_epsilon(cfg, grid, n_seeds, steps=None, seed=None):
    """Rerun the pipeline across privacy levels; returns one row per epsilon.

    Every agent's epsilon is replaced by the grid value (deltas and
    adjacency bounds keep their configured values). The cost matrices are
    resolved once, the noise streams do not depend on epsilon, and seeds
    run from the master seed upward, so rows are directly comparable.
    Each row is a dict with keys epsilon, sigma, mean_cost, logdet_cov,
    entropy_bound, condition_margin.
    """
    grid = [float(e) for e in grid]
    if not grid or any(not e > 0.0 for e in grid):
        raise ConfigError("epsilon grid must be non-empty and positive")
    n_seeds = int(n_seeds)
    if n_seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    horizon = cfg.horizon if steps is None else int(steps)
    if horizon < 1:
        raise ConfigError("sweep needs at least one simulation step")
    base_seed = cfg.seed if seed is None else int(seed)
    Q, R = resolve_costs(cfg, seed=base_seed)
    rows = []
    for eps in grid:
        agents = [
            replace(
                ag,
                privacy=PrivacySpec(
                    epsilon=eps,
                    delta=ag.privacy.delta,
                    adjacency_bound=ag.privacy.adjacency_bound,
                ),
            )
            for ag in cfg.agents
        ]
        model = assemble_network(agents, Q, R)
        syn = synthesize(model)
        try:
            report = entropy_bound_report(model.A, model.W, model.C, model.V)
            bound = report.entropy_bound
            margin = report.condition_margin
        except InapplicableBoundError as exc:
            bound = math.nan
            margin = exc.margin
        costs = []
        for j in range(n_seeds):
            trace = run_simulation(
                model, agents, horizon, base_seed + j, synthesis=syn
            )
            costs.append(trace.avg_cost[-1])
        rows.append(
            {
                "epsilon": eps,
                "sigma": model.sigmas[0],
                "mean_cost": float(np.mean(costs)),
                "logdet_cov": logdet(syn.Sigma),
                "entropy_bound": bound,
                "condition_margin": margin,
            }
        )
    return rows


def cmd_sweep_epsilon(cfg, out=None, grid=None, n_seeds=DEFAULT_SWEEP_SEEDS,
                      steps=None, seed=None):
    """Run sweep_epsilon and write sweep.csv."""
    rows = sweep_epsilon(
        cfg,
        DEFAULT_SWEEP_GRID if grid is None else grid,
        n_seeds,
        steps=steps,
        seed=seed,
    )
    out_dir = _out_dir(cfg, out)
    fields = ["epsilon", "sigma", "mean_cost", "logdet_cov",
              "entropy_bound", "condition_margin"]
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[f]) for f in fields])
    print(f"wrote sweep results to {out_dir}")
    return 0


def cmd_bound(cfg, out=None):
    """Evaluate the entropy cap; exit 5 (after writing the verdict) if it
    does not apply to this model."""
    model, _ = build_network(cfg)
    out_dir = _out_dir(cfg, out)
    path = out_dir / "bound_report.txt"
    try:
        report = entropy_bound_report(model.A, model.W, model.C, model.V)
    except InapplicableBoundError:
        holds, margin = covariance_bound_condition(
            model.A, model.W, model.C, model.V
        )
        gamma = posterior_variance_diag(model.W, model.C, model.V)
        floor = variance_floor(model.A, model.W, model.C, model.V)
        lines = [
            "status = inapplicable",
            "condition_holds = false",
            f"condition_margin = {_fmt(margin)}",
            f"variance_floor = {_fmt(floor)}",
            f"posterior_floor_diag = {', '.join(_fmt(g) for g in gamma)}",
        ]
        _write_kv(lines, path)
        print(f"entropy cap not applicable (margin {margin:.6g}); "
              f"verdict written to {path}")
        return 5
    _write_kv(["status = applicable"] + report.kv_lines(), path)
    print(f"wrote entropy bound report to {path}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="dplqg",
        description="Privacy-calibrated cloud LQG: synthesis, simulation, "
                    "privacy sweeps, and entropy bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, steps=False, seed=True, grid=False):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output directory (default: config's "
                                     "'out' or ./results)")
        if steps:
            p.add_argument("--steps", type=int, help="override the horizon")
        if seed:
            p.add_argument("--seed", type=int, help="override the master seed")
        if grid:
            p.add_argument("--grid", help="comma-separated epsilon values "
                                          "(default %s)" % ",".join(
                                              str(e) for e in DEFAULT_SWEEP_GRID))
            p.add_argument("--seeds", type=int, default=DEFAULT_SWEEP_SEEDS,
                           help="number of Monte Carlo seeds per epsilon")

    common(sub.add_parser("synthesize", help="solve the Riccati equations "
                                             "and write gains/covariances"))
    common(sub.add_parser("simulate", help="run the closed loop and write "
                                           "trace + wire log"), steps=True)
    common(sub.add_parser("sweep-epsilon", help="rerun across privacy levels"),
           steps=True, grid=True)
    common(sub.add_parser("bound", help="evaluate the estimation-entropy cap"),
           seed=False)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = load(args.config)
        if args.command == "synthesize":
            return cmd_synthesize(cfg, out=args.out, seed=args.seed)
        if args.command == "simulate":
            return cmd_simulate(cfg, out=args.out, steps=args.steps,
                                seed=args.seed)
        if args.command == "sweep-epsilon":
            grid = None
            if args.grid is not None:
                try:
                    grid = [float(v) for v in args.grid.split(",") if v.strip()]
                except ValueError:
                    raise ConfigError(f"bad --grid value: {args.grid!r}") from None
            return cmd_sweep_epsilon(cfg, out=args.out, grid=grid,
                                     n_seeds=args.seeds, steps=args.steps,
                                     seed=args.seed)
        if args.command == "bound":
            return cmd_bound(cfg, out=args.out)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    except InapplicableBoundError as exc:
        print(f"error: bound not applicable: {exc}", file=sys.stderr)
        return 5
    except AssumptionError as exc:
        print(f"error: model assumption fails: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: Riccati solve failed: {exc}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
