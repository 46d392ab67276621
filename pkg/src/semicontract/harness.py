"""Random-graph rate-comparison experiment and the problem file format.

The flagship experiment compares the spectral decay of the two distributed
couplings over connected Erdos-Renyi graphs: for each edge probability it
draws graphs and quadratic costs, builds the Laplacian-coupled and
incidence-coupled saddle matrices at a stiff dual time constant, and
records the deflated spectral abscissa of each. Means with normal 95%
confidence intervals per probability make up the deliverable table.

Determinism contract: every trial derives its own random streams from
``SeedSequence([seed, p_index, trial])`` (graph) and
``SeedSequence([seed, p_index, trial, 1])`` (cost data), so results are
reproducible per trial, independent of execution order, and stable under
changes to the probability grid tail. The master seed defaults to the
``SEMICONTRACT_SEED`` environment variable when set; explicit config
values always win.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .flows import QuadraticCost
from .graphs import erdos_renyi_connected, incidence, laplacian
from .saddle import SaddleProblem, deflated_abscissa

__all__ = [
    "SEED_ENV_VAR",
    "default_seed",
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentRow",
    "figure1_trials",
    "aggregate_trials",
    "run_figure1",
    "rows_to_csv",
    "trial_to_json",
    "read_saddle_file",
    "write_saddle_file",
]

SEED_ENV_VAR = "SEMICONTRACT_SEED"
_FALLBACK_SEED = 2024

# Two-sided 95% normal quantile for the confidence intervals.
_Z_95 = 1.96

CSV_HEADER = (
    "p,mean_abscissa_laplacian,ci_laplacian,"
    "mean_abscissa_incidence,ci_incidence,trials"
)


def default_seed():
    """Master seed used when the config does not set one.

    Reads ``SEMICONTRACT_SEED`` from the environment; only the default is
    overridable this way, an explicit seed in the config is never touched.
    """
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return _FALLBACK_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(
            f"{SEED_ENV_VAR} must be an integer, got {raw!r}"
        ) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of the rate-comparison experiment.

    Attributes
    ----------
    node_count : int
        Nodes per sampled graph (at least 2).
    edge_probabilities : tuple of float
        Probability grid, each value in (0, 1].
    trials : int
        Graph draws per probability (at least 2, for the CI).
    tau : float
        Dual time constant of both saddle problems.
    value_range : (float, float)
        Cost weights and targets are uniform on ``(low, high]``.
    seed : int or None
        Master seed; None means ``default_seed()`` at run time.
    """

    node_count: int = 40
    edge_probabilities: tuple[float, ...] = (
        0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
    )
    trials: int = 50
    tau: float = 1e-3
    value_range: tuple[float, float] = (0.0, 10.0)
    seed: int | None = None

    def __post_init__(self):
        if int(self.node_count) < 2:
            raise ValueError("node_count must be at least 2")
        probs = tuple(float(p) for p in self.edge_probabilities)
        if not probs or any(not 0.0 < p <= 1.0 for p in probs):
            raise ValueError("edge probabilities must lie in (0, 1]")
        if int(self.trials) < 2:
            raise ValueError("trials must be at least 2")
        if not float(self.tau) > 0:
            raise ValueError("tau must be positive")
        low, high = (float(v) for v in self.value_range)
        if not (math.isfinite(low) and math.isfinite(high) and low < high):
            raise ValueError("value_range must be an increasing finite pair")
        if low < 0:
            raise ValueError("value_range must be nonnegative (weights > 0)")
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "edge_probabilities", probs)
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "value_range", (low, high))

    def resolved_seed(self):
        return default_seed() if self.seed is None else int(self.seed)


@dataclass(frozen=True)
class TrialRecord:
    """One graph draw with the abscissas of both couplings."""

    p: float
    p_index: int
    trial: int
    seed: int
    edge_count: int
    abscissa_laplacian: float
    abscissa_incidence: float


@dataclass(frozen=True)
class ExperimentRow:
    """Aggregated statistics for one edge probability."""

    p: float
    mean_abscissa_laplacian: float
    ci_laplacian: float
    mean_abscissa_incidence: float
    ci_incidence: float
    trials: int


def _sample_open_uniform(rng, low, high, size):
    # uniform on (low, high]: rng.random() covers [0, 1), so flip it.
    return high - (high - low) * rng.random(size)


def figure1_trials(config):
    """Yield the trial records of the experiment in deterministic order."""
    master = config.resolved_seed()
    n = config.node_count
    low, high = config.value_range
    for p_index, p in enumerate(config.edge_probabilities):
        for trial in range(config.trials):
            graph_seed = int(
                np.random.SeedSequence(
                    [master, p_index, trial]
                ).generate_state(1, np.uint64)[0]
            )
            graph = erdos_renyi_connected(n, p, graph_seed)
            data_rng = np.random.default_rng(
                np.random.SeedSequence([master, p_index, trial, 1])
            )
            weights = _sample_open_uniform(data_rng, low, high, n)
            targets = _sample_open_uniform(data_rng, low, high, n)
            cost = QuadraticCost(weights=weights, targets=targets)
            Q = cost.hessian_matrix()
            lap = deflated_abscissa(SaddleProblem(Q, laplacian(graph), config.tau))
            inc = deflated_abscissa(
                SaddleProblem(Q, incidence(graph).T, config.tau)
            )
            yield TrialRecord(
                p=p,
                p_index=p_index,
                trial=trial,
                seed=graph_seed,
                edge_count=graph.edge_count,
                abscissa_laplacian=lap,
                abscissa_incidence=inc,
            )


def aggregate_trials(records):
    """Collapse trial records into per-probability rows, sorted by p."""
    by_p = {}
    for rec in records:
        by_p.setdefault(rec.p, []).append(rec)
    rows = []
    for p in sorted(by_p):
        recs = by_p[p]
        lap = np.array([r.abscissa_laplacian for r in recs])
        inc = np.array([r.abscissa_incidence for r in recs])
        k = len(recs)
        if k < 2:
            raise ValueError(f"need at least 2 trials per probability, got {k}")
        rows.append(
            ExperimentRow(
                p=p,
                mean_abscissa_laplacian=float(lap.mean()),
                ci_laplacian=float(_Z_95 * lap.std(ddof=1) / math.sqrt(k)),
                mean_abscissa_incidence=float(inc.mean()),
                ci_incidence=float(_Z_95 * inc.std(ddof=1) / math.sqrt(k)),
                trials=k,
            )
        )
    return rows


def run_figure1(config):
    """Run the full experiment and return the aggregated rows."""
    return aggregate_trials(figure1_trials(config))


def rows_to_csv(rows):
    """Serialize rows to the delimited schema, byte-stable for a fixed config."""
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    repr(float(row.p)),
                    repr(float(row.mean_abscissa_laplacian)),
                    repr(float(row.ci_laplacian)),
                    repr(float(row.mean_abscissa_incidence)),
                    repr(float(row.ci_incidence)),
                    str(int(row.trials)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def trial_to_json(record):
    """One JSONL line per trial: seed, probability, size, both abscissas."""
    return json.dumps(
        {
            "seed": record.seed,
            "p": record.p,
            "p_index": record.p_index,
            "trial": record.trial,
            "edges": record.edge_count,
            "abscissa_laplacian": record.abscissa_laplacian,
            "abscissa_incidence": record.abscissa_incidence,
        }
    )


def read_saddle_file(path):
    """Read saddle problem data from a text file.

    Format: first non-comment line is ``n m tau``; the next n lines hold
    the rows of Q (n floats each); the following m lines hold the rows of
    A (n floats each). ``#`` comments and blank lines are ignored; tokens
    may wrap lines freely, only their count and order matter.
    """
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if len(tokens) < 3:
        raise ValueError(f"{path}: missing 'n m tau' header")
    try:
        n = int(tokens[0])
        m = int(tokens[1])
        tau = float(tokens[2])
        body = [float(t) for t in tokens[3:]]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed numeric token: {exc}") from exc
    if n < 1 or m < 1:
        raise ValueError(f"{path}: dimensions must be positive, got n={n} m={m}")
    expected = n * n + m * n
    if len(body) != expected:
        raise ValueError(
            f"{path}: expected {expected} matrix entries "
            f"(n*n + m*n for n={n}, m={m}), got {len(body)}"
        )
    Q = np.array(body[: n * n]).reshape(n, n)
    A = np.array(body[n * n:]).reshape(m, n)
    return SaddleProblem(Q=Q, A=A, tau=tau)


def write_saddle_file(problem, path):
    """Write saddle problem data in the ``n m tau`` text format."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{problem.n} {problem.m} {problem.tau!r}\n")
        for row in problem.Q:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        for row in problem.A:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
