"""Command line interface.

Subcommands: ``certificate`` (verify rate certificates of a saddle problem
file), ``rates`` (closed-form distributed rates for a graph and cost),
``simulate`` (integrate a distributed flow and check its decay envelope),
``game`` (gain analysis and optional simulation of a game file), and
``figure1`` (the random-graph coupling comparison).

Exit codes: 0 on success, 1 on bad input or usage, 2 when a numerical
verification that should hold fails (certificate LMI, decay envelope).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from .flows import (
    DivergenceError,
    QuadraticCost,
    contraction_observed,
    default_timestep,
    distributed_flow_incidence,
    distributed_flow_laplacian,
    integrate,
    rate_incidence,
    rate_laplacian,
    write_trajectory_csv,
)
from .games import (
    equivalence_check,
    gain_best_response,
    gain_best_response_discrete,
    gain_pseudogradient,
    interconnection_rate,
    read_game_file,
    simulate_best_response,
    simulate_pseudogradient,
)
from .graphs import read_edge_list
from .harness import (
    ExperimentConfig,
    aggregate_trials,
    figure1_trials,
    read_saddle_file,
    rows_to_csv,
    trial_to_json,
)
from .saddle import (
    deflated_abscissa,
    quarter_rate_certificate,
    sharp_rate_certificate,
    small_tau_certificate,
    spectral_bounds,
)
from .spectra import CertificateError


class _Parser(argparse.ArgumentParser):
    # Usage problems are input errors: exit 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text):
    parts = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    try:
        return [float(t) for t in parts]
    except ValueError as exc:
        raise ValueError(f"expected a comma-separated float list, got {text!r}") from exc


def _fmt(x):
    return f"{float(x):.6g}"


def _certificate_summary(cert, report):
    extra = "" if cert.epsilon is None else f" epsilon={_fmt(cert.epsilon)}"
    status = "verified" if report.all_ok else "FAILED"
    return (
        f"{cert.variant}: alpha={_fmt(cert.alpha)} rate={_fmt(cert.rate)}"
        f"{extra} {status} (worst LMI eigenvalue {report.lmi_worst_eigenvalue:.3e})"
    )


def _cmd_certificate(args):
    from .saddle import verify_certificate

    problem = read_saddle_file(args.file)
    bounds = spectral_bounds(problem)
    certs = [
        quarter_rate_certificate(problem, tol=args.tol),
        small_tau_certificate(problem, epsilon=args.epsilon, tol=args.tol),
        sharp_rate_certificate(problem, tol=args.tol),
    ]
    abscissa = deflated_abscissa(problem)
    if args.json:
        payload = {
            "n": problem.n,
            "m": problem.m,
            "tau": problem.tau,
            "bounds": {
                "q_min": bounds.q_min,
                "q_max": bounds.q_max,
                "a_min": bounds.a_min,
                "a_max": bounds.a_max,
            },
            "deflated_abscissa": abscissa,
            "certificates": {
                cert.variant: {
                    "alpha": cert.alpha,
                    "rate": cert.rate,
                    "epsilon": cert.epsilon,
                }
                for cert in certs
            },
        }
        print(json.dumps(payload, indent=2))
        return 0
    print(f"problem: n={problem.n} m={problem.m} tau={_fmt(problem.tau)}")
    print(
        f"bounds: q_min={_fmt(bounds.q_min)} q_max={_fmt(bounds.q_max)} "
        f"a_min={_fmt(bounds.a_min)} a_max={_fmt(bounds.a_max)}"
    )
    print(f"deflated abscissa: {_fmt(abscissa)}")
    for cert in certs:
        report = verify_certificate(problem, cert, tol=args.tol)
        print(_certificate_summary(cert, report))
    return 0


def _load_cost(args, node_count):
    weights = _float_list(args.weights)
    if len(weights) == 1 and node_count > 1:
        weights = weights * node_count
    if len(weights) != node_count:
        raise ValueError(
            f"need {node_count} weights (or a single uniform value), "
            f"got {len(weights)}"
        )
    if args.targets is None:
        targets = [0.0] * node_count
    else:
        targets = _float_list(args.targets)
        if len(targets) != node_count:
            raise ValueError(f"need {node_count} targets, got {len(targets)}")
    return QuadraticCost(weights=np.array(weights), targets=np.array(targets))


def _cmd_rates(args):
    from .graphs import spectral_gap

    graph = read_edge_list(args.graph)
    cost = _load_cost(args, graph.node_count)
    lam2, lamn = spectral_gap(graph)
    lap = rate_laplacian(cost, graph, args.tau)
    inc = rate_incidence(cost, graph, args.tau)
    if args.json:
        print(
            json.dumps(
                {
                    "nodes": graph.node_count,
                    "edges": graph.edge_count,
                    "lambda_2": lam2,
                    "lambda_n": lamn,
                    "mu": cost.mu,
                    "lip": cost.lip,
                    "tau": args.tau,
                    "rate_laplacian": lap,
                    "rate_incidence": inc,
                },
                indent=2,
            )
        )
        return 0
    print(f"graph: {graph.node_count} nodes, {graph.edge_count} edges")
    print(f"spectral gap: lambda_2={_fmt(lam2)} lambda_n={_fmt(lamn)}")
    print(f"cost: mu={_fmt(cost.mu)} lip={_fmt(cost.lip)} tau={_fmt(args.tau)}")
    print(f"rate laplacian: {_fmt(lap)}")
    print(f"rate incidence: {_fmt(inc)}")
    return 0


def _cmd_simulate(args):
    graph = read_edge_list(args.graph)
    cost = _load_cost(args, graph.node_count)
    builder = (
        distributed_flow_laplacian
        if args.coupling == "laplacian"
        else distributed_flow_incidence
    )
    flow = builder(cost, graph, args.tau)
    cert = flow.certificate_hint
    dt = args.dt if args.dt is not None else default_timestep(flow)
    rng = np.random.default_rng(args.seed)
    x0 = rng.standard_normal(flow.dim)
    y0 = x0 + rng.standard_normal(flow.dim)
    trajectory = integrate(flow, x0, args.t_end, dt)
    write_trajectory_csv(trajectory, args.out)
    print(f"wrote {args.out} ({trajectory.times.size} samples, dt={_fmt(dt)})")
    report = contraction_observed(
        flow, cert, x0, y0, args.t_end, dt, tol_traj=args.tol_traj
    )
    print(
        f"certified rate: {_fmt(report.rate)}   "
        f"fitted decay rate: {_fmt(report.fitted_rate)}"
    )
    if not args.no_plot:
        from .plots import plot_decay, plot_trajectory

        stem = os.path.splitext(args.out)[0]
        print(f"wrote {plot_trajectory(trajectory, stem + '.png', flow.primal_dim)}")
        print(f"wrote {plot_decay(report, stem + '_decay.png')}")
    if not report.ok:
        print(
            f"envelope check FAILED at t={report.violation_time:.6g}",
            file=sys.stderr,
        )
        return 2
    print("envelope check: ok (distance within certified decay at all samples)")
    return 0


def _matrix_lines(name, M):
    body = np.array2string(np.asarray(M), precision=6, suppress_small=True)
    return f"{name}:\n{body}"


def _cmd_game(args):
    data = read_game_file(args.file)
    spec = data.spec
    pseudo = gain_pseudogradient(spec)
    br = gain_best_response(spec)
    brd = gain_best_response_discrete(spec)
    report = equivalence_check(spec)
    print(f"players: {spec.players}")
    print(_matrix_lines("pseudogradient gain", pseudo))
    print(_matrix_lines("best-response gain", br))
    print(_matrix_lines("discrete best-response gain", brd))
    print(
        "equivalence: "
        f"pseudogradient_hurwitz={str(report.pseudogradient_hurwitz).lower()} "
        f"best_response_hurwitz={str(report.best_response_hurwitz).lower()} "
        f"discrete_schur={str(report.discrete_schur).lower()} "
        f"consistent={str(report.consistent).lower()}"
    )
    if report.pseudogradient_hurwitz:
        print(f"interconnection rate: {_fmt(interconnection_rate(pseudo))}")
    if not args.simulate:
        return 0

    if data.game is None:
        raise ValueError("--simulate needs quadratic data (K) in the game file")
    game = data.game
    rng = np.random.default_rng(args.seed)
    x0 = rng.standard_normal(game.players)
    try:
        equilibrium = game.nash_equilibrium()
        print(f"equilibrium (linear solve): {np.array2string(equilibrium, precision=6)}")
    except ValueError as exc:
        equilibrium = None
        print(f"equilibrium: {exc}")
    for label, simulate in (
        ("pseudogradient", simulate_pseudogradient),
        ("best-response", simulate_best_response),
    ):
        try:
            traj = simulate(game, x0, args.t_end, args.dt)
        except DivergenceError as exc:
            # A non-Hurwitz game diverging is a finding, not a CLI failure.
            print(f"{label} flow diverged at t={exc.time:.6g}")
            continue
        final = traj.final_state
        line = f"{label} final state: {np.array2string(final, precision=6)}"
        if equilibrium is not None:
            line += f" (max error {np.abs(final - equilibrium).max():.3e})"
        print(line)
        if args.out:
            path = f"{args.out}_{label.replace('-', '_')}.csv"
            write_trajectory_csv(traj, path)
            print(f"wrote {path}")
            if not args.no_plot:
                from .plots import plot_trajectory

                png = f"{args.out}_{label.replace('-', '_')}.png"
                print(f"wrote {plot_trajectory(traj, png)}")
    return 0


def _cmd_figure1(args):
    probs = tuple(_float_list(args.probs)) if args.probs else None
    kwargs = {
        "node_count": args.nodes,
        "trials": args.trials,
        "tau": args.tau,
        "seed": args.seed,
    }
    if probs is not None:
        kwargs["edge_probabilities"] = probs
    config = ExperimentConfig(**kwargs)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "figure1.csv")
    log_path = os.path.join(args.out_dir, "figure1_trials.jsonl")
    records = []
    with open(log_path, "w", encoding="utf-8") as log:
        for record in figure1_trials(config):
            records.append(record)
            log.write(trial_to_json(record) + "\n")
    rows = aggregate_trials(records)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))
    print(f"wrote {csv_path}")
    print(f"wrote {log_path}")
    if not args.no_plot:
        from .plots import plot_figure1

        png_path = os.path.join(args.out_dir, "figure1.png")
        print(f"wrote {plot_figure1(rows, png_path)}")
    for row in rows:
        print(
            f"p={row.p:g}: laplacian {row.mean_abscissa_laplacian:.6g} "
            f"± {row.ci_laplacian:.2g}, incidence "
            f"{row.mean_abscissa_incidence:.6g} ± {row.ci_incidence:.2g} "
            f"({row.trials} trials)"
        )
    faster = sum(
        row.mean_abscissa_laplacian <= row.mean_abscissa_incidence for row in rows
    )
    print(
        f"laplacian coupling decays at least as fast on average at "
        f"{faster} of {len(rows)} probabilities"
    )
    return 0


def build_parser():
    parser = _Parser(
        prog="semicontract",
        description="Semicontraction certificates and rate experiments "
        "for saddle-matrix, distributed-optimization, and game dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cert = sub.add_parser(
        "certificate", help="verify rate certificates of a saddle problem file"
    )
    p_cert.add_argument("--file", required=True, help="saddle problem file (n m tau header)")
    p_cert.add_argument("--tol", type=float, default=1e-8, help="LMI residual tolerance")
    p_cert.add_argument(
        "--epsilon", type=float, default=None,
        help="balance parameter in (0, 2) for the small-tau variant",
    )
    p_cert.add_argument("--json", action="store_true", help="machine-readable output")
    p_cert.set_defaults(func=_cmd_certificate)

    p_rates = sub.add_parser(
        "rates", help="closed-form distributed rates for a graph and quadratic cost"
    )
    p_rates.add_argument("--graph", required=True, help="edge list file (N M header)")
    p_rates.add_argument(
        "--weights", required=True,
        help="per-node cost weights, comma-separated (a single value is broadcast)",
    )
    p_rates.add_argument("--targets", default=None, help=argparse.SUPPRESS)
    p_rates.add_argument("--tau", type=float, default=1.0, help="dual time constant")
    p_rates.add_argument("--json", action="store_true", help="machine-readable output")
    p_rates.set_defaults(func=_cmd_rates)

    p_sim = sub.add_parser(
        "simulate", help="integrate a distributed flow and check its decay envelope"
    )
    p_sim.add_argument("--graph", required=True, help="edge list file")
    p_sim.add_argument(
        "--coupling", choices=("laplacian", "incidence"), default="laplacian"
    )
    p_sim.add_argument("--weights", required=True, help="per-node cost weights")
    p_sim.add_argument("--targets", default=None, help="per-node cost targets (default 0)")
    p_sim.add_argument("--tau", type=float, default=1.0)
    p_sim.add_argument("--t-end", type=float, default=10.0)
    p_sim.add_argument("--dt", type=float, default=None, help="fixed step (default auto)")
    p_sim.add_argument("--seed", type=int, default=0, help="seed for the initial pair")
    p_sim.add_argument("--tol-traj", type=float, default=1e-6, help="envelope slack")
    p_sim.add_argument("--out", default="trajectory.csv", help="trajectory CSV path")
    p_sim.add_argument("--no-plot", action="store_true", help="skip PNG rendering")
    p_sim.set_defaults(func=_cmd_simulate)

    p_game = sub.add_parser(
        "game", help="gain analysis and optional simulation of a game file"
    )
    p_game.add_argument("--file", required=True, help="game spec file")
    p_game.add_argument("--simulate", action="store_true", help="integrate both dynamics")
    p_game.add_argument("--t-end", type=float, default=50.0)
    p_game.add_argument("--dt", type=float, default=None)
    p_game.add_argument("--seed", type=int, default=0)
    p_game.add_argument("--out", default=None, help="prefix for trajectory CSVs")
    p_game.add_argument("--no-plot", action="store_true")
    p_game.set_defaults(func=_cmd_game)

    p_fig = sub.add_parser(
        "figure1", help="random-graph comparison of the two couplings"
    )
    p_fig.add_argument("--nodes", type=int, default=40)
    p_fig.add_argument("--trials", type=int, default=50)
    p_fig.add_argument(
        "--probs", default=None,
        help="edge probabilities, comma-separated (default 0.1..0.9)",
    )
    p_fig.add_argument("--tau", type=float, default=1e-3)
    p_fig.add_argument(
        "--seed", type=int, default=None,
        help="master seed (default: SEMICONTRACT_SEED or built-in)",
    )
    p_fig.add_argument("--out-dir", default=".", help="output directory")
    p_fig.add_argument("--no-plot", action="store_true", help="skip PNG rendering")
    p_fig.set_defaults(func=_cmd_figure1)

    return parser


def cli_main(argv=None):
    """Run the CLI; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse handles -h and usage errors by raising SystemExit.
        return int(exc.code or 0)
    try:
        return int(args.func(args) or 0)
    except CertificateError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
