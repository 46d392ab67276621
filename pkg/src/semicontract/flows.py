"""Primal-dual and distributed-optimization flows with observed contraction.

Continuous-time dynamics built from the saddle structure::

    x' = -grad f(x) - A.T lam
    lam' = (A x - b) / tau

For separable quadratic costs these are affine systems whose matrix is the
saddle matrix of a ``SaddleProblem``, so the certificates from
``semicontract.saddle`` apply verbatim. Two distributed constructions are
provided for consensus optimization over a connected graph: constraints
through the Laplacian (one multiplier per node) and through the transposed
incidence matrix (one multiplier per edge), together with the closed-form
rate guarantees for each.

Integration is fixed-step classical Runge-Kutta: deterministic sample
grids, divergence detection, and the convenient property that equilibria
of affine fields are exact fixed points of the scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graphs import connectivity, incidence, laplacian, spectral_gap
from .saddle import SaddleProblem, assemble_saddle, quarter_rate_certificate

__all__ = [
    "DivergenceError",
    "QuadraticCost",
    "FlowSystem",
    "Trajectory",
    "DecayReport",
    "primal_dual_flow",
    "distributed_flow_laplacian",
    "distributed_flow_incidence",
    "rate_laplacian",
    "rate_incidence",
    "default_timestep",
    "integrate",
    "contraction_observed",
    "write_trajectory_csv",
    "read_trajectory_csv",
]

# Multiplicative slack for observed-vs-certified decay comparisons.
DEFAULT_TRAJ_TOL = 1e-6


class DivergenceError(RuntimeError):
    """Integration produced a non-finite state.

    Attributes
    ----------
    time : float
        First sample time at which the state was non-finite.
    partial : Trajectory or None
        Samples accumulated before the blow-up.
    """

    def __init__(self, message, time, partial=None):
        super().__init__(message)
        self.time = time
        self.partial = partial


@dataclass(frozen=True)
class QuadraticCost:
    """Separable cost ``f(x) = sum_i q_i * ||x_i - v_i||^2``.

    Parameters
    ----------
    weights : ndarray
        Strictly positive per-agent weights ``q_i``, shape ``(N,)``.
    targets : ndarray
        Per-agent targets ``v_i``, shape ``(N,)`` for scalar agents or
        ``(N, d)`` for d-dimensional ones.

    The gradient is ``2 q_i (x_i - v_i)`` blockwise, the Hessian the
    constant ``2 diag(q)`` (Kronecker-expanded), so the strong monotonicity
    and Lipschitz constants are ``mu = 2 min q`` and ``lip = 2 max q``.
    """

    weights: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.targets, dtype=float)
        if q.ndim != 1 or q.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if not np.all(np.isfinite(q)) or not np.all(q > 0):
            raise ValueError("weights must be finite and strictly positive")
        if v.ndim not in (1, 2) or v.shape[0] != q.size:
            raise ValueError(
                f"targets must have shape ({q.size},) or ({q.size}, d), "
                f"got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("targets must be finite")
        object.__setattr__(self, "weights", q)
        object.__setattr__(self, "targets", v)

    @property
    def agent_count(self):
        return self.weights.size

    @property
    def agent_dim(self):
        return 1 if self.targets.ndim == 1 else self.targets.shape[1]

    @property
    def dim(self):
        return self.agent_count * self.agent_dim

    @property
    def mu(self):
        """Strong monotonicity constant of the gradient."""
        return 2.0 * float(self.weights.min())

    @property
    def lip(self):
        """Lipschitz constant of the gradient."""
        return 2.0 * float(self.weights.max())

    @property
    def stacked_targets(self):
        return self.targets.reshape(-1).copy()

    def gradient(self, x):
        x = np.asarray(x, dtype=float).reshape(self.agent_count, self.agent_dim)
        v = self.targets.reshape(self.agent_count, self.agent_dim)
        return (2.0 * self.weights[:, None] * (x - v)).reshape(-1)

    def hessian_matrix(self):
        return np.diag(np.repeat(2.0 * self.weights, self.agent_dim))

    def hessian(self, x):
        return self.hessian_matrix()


@dataclass(frozen=True)
class FlowSystem:
    """A vector field with its Jacobian and optional certificate.

    Attributes
    ----------
    primal_dim, dual_dim : int
        State layout: the first ``primal_dim`` entries are primal, the
        remaining ``dual_dim`` are multipliers (zero for plain ODEs).
    vector_field : callable
        Maps a state of length ``primal_dim + dual_dim`` to its derivative.
    jacobian : callable
        Maps a state to the ``(dim, dim)`` Jacobian of the field there.
    certificate_hint : ContractionCertificate or None
        A verified certificate for the flow, attached by constructors that
        can produce one (constant-Hessian costs).
    problem : SaddleProblem or None
        The underlying saddle data when the flow is linear-quadratic.
    """

    primal_dim: int
    dual_dim: int
    vector_field: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    certificate_hint: object = None
    problem: object = None

    @property
    def dim(self):
        return self.primal_dim + self.dual_dim


def _affine_saddle_system(problem, forcing, with_certificate=True):
    """FlowSystem for ``z' = S z + u`` with S the saddle matrix."""
    S = assemble_saddle(problem)
    u = np.asarray(forcing, dtype=float)
    hint = None
    if with_certificate:
        hint = quarter_rate_certificate(problem)
    return FlowSystem(
        primal_dim=problem.n,
        dual_dim=problem.m,
        vector_field=lambda z, S=S, u=u: S @ z + u,
        jacobian=lambda z, S=S: S,
        certificate_hint=hint,
        problem=problem,
    )


def primal_dual_flow(grad_f, A, b, tau, hess_f=None, with_certificate=True):
    """Primal-dual flow for ``min f(x) s.t. A x = b``.

    Parameters
    ----------
    grad_f : QuadraticCost or callable
        Either a quadratic cost object (its gradient and Hessian are used
        and a quarter-rate certificate is attached) or a gradient callable,
        in which case ``hess_f`` must supply the Jacobian of the gradient.
    A : ndarray
        Constraint matrix, shape ``(m, n)``.
    b : ndarray
        Constraint right-hand side, shape ``(m,)``. When b has a component
        outside range(A) the constraints are infeasible and the multipliers
        drift linearly in that direction.
    tau : float
        Positive dual time constant.
    hess_f : callable, optional
        ``hess_f(x) -> (n, n)`` Hessian, required for callable gradients.
    with_certificate : bool
        Attach a verified quarter-rate certificate (quadratic costs only).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"A must be a matrix, got shape {A.shape}")
    m, n = A.shape
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != m:
        raise ValueError(f"b must have length {m}, got {b.size}")
    tau = float(tau)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")

    if isinstance(grad_f, QuadraticCost):
        cost = grad_f
        if cost.dim != n:
            raise ValueError(
                f"cost dimension {cost.dim} does not match constraint "
                f"columns {n}"
            )
        problem = SaddleProblem(cost.hessian_matrix(), A, tau)
        # z' = S z + u with u collecting the affine parts of both blocks.
        u = np.concatenate([
            2.0 * np.repeat(cost.weights, cost.agent_dim) * cost.stacked_targets,
            -b / tau,
        ])
        return _affine_saddle_system(problem, u, with_certificate)

    if not callable(grad_f):
        raise ValueError("grad_f must be a QuadraticCost or a callable")
    if not callable(hess_f):
        raise ValueError("hess_f is required when grad_f is a callable")

    def field(z):
        x, lam = z[:n], z[n:]
        return np.concatenate([-grad_f(x) - A.T @ lam, (A @ x - b) / tau])

    def jac(z):
        x = z[:n]
        J = np.zeros((n + m, n + m))
        J[:n, :n] = -hess_f(x)
        J[:n, n:] = -A.T
        J[n:, :n] = A / tau
        return J

    return FlowSystem(primal_dim=n, dual_dim=m, vector_field=field, jacobian=jac)


def _expand_constraint(M, agent_dim):
    return np.kron(M, np.eye(agent_dim)) if agent_dim > 1 else np.asarray(M, dtype=float)


def _check_connected(graph):
    if not connectivity(graph):
        raise ValueError("graph must be connected for a distributed flow")


def distributed_flow_laplacian(cost, graph, tau, with_certificate=True):
    """Consensus optimization flow with Laplacian coupling.

    Minimizes ``sum_i q_i ||x_i - v_i||^2`` subject to consensus, encoding
    the constraint as ``(L kron I) x = 0`` with one multiplier per node.
    The unique primal equilibrium is the weighted mean of the targets.
    """
    if cost.agent_count != graph.node_count:
        raise ValueError(
            f"cost has {cost.agent_count} agents but graph has "
            f"{graph.node_count} nodes"
        )
    _check_connected(graph)
    A = _expand_constraint(laplacian(graph), cost.agent_dim)
    return primal_dual_flow(cost, A, np.zeros(A.shape[0]), tau, with_certificate=with_certificate)


def distributed_flow_incidence(cost, graph, tau, with_certificate=True):
    """Consensus optimization flow with edge-difference coupling.

    Same optimization problem as the Laplacian variant, but the constraint
    is ``(B.T kron I) x = 0`` with one multiplier per edge, which changes
    the dual geometry and the certified rate scaling.
    """
    if cost.agent_count != graph.node_count:
        raise ValueError(
            f"cost has {cost.agent_count} agents but graph has "
            f"{graph.node_count} nodes"
        )
    _check_connected(graph)
    A = _expand_constraint(incidence(graph).T, cost.agent_dim)
    return primal_dual_flow(cost, A, np.zeros(A.shape[0]), tau, with_certificate=with_certificate)


def rate_laplacian(cost, graph, tau):
    """Closed-form certified rate for the Laplacian-coupled flow.

    ``c = min(lam_2**2 / (tau * lip), (lam_2 / lam_n)**2 * mu) / 4`` where
    ``lam_2, lam_n`` are the extreme nonzero Laplacian eigenvalues and
    ``mu, lip`` the strong monotonicity and Lipschitz constants of the
    cost gradient (attributes of ``QuadraticCost``).
    """
    lam2, lamn = spectral_gap(graph)
    mu, lip = float(cost.mu), float(cost.lip)
    tau = float(tau)
    return 0.25 * min(lam2 * lam2 / (tau * lip), (lam2 / lamn) ** 2 * mu)


def rate_incidence(cost, graph, tau):
    """Closed-form certified rate for the incidence-coupled flow.

    ``c = min(lam_2 / (tau * lip), (lam_2 / lam_n) * mu) / 4``. The shift
    from squared to plain eigenvalue ratios is what makes this coupling
    faster on poorly connected graphs.
    """
    lam2, lamn = spectral_gap(graph)
    mu, lip = float(cost.mu), float(cost.lip)
    tau = float(tau)
    return 0.25 * min(lam2 / (tau * lip), (lam2 / lamn) * mu)


@dataclass(frozen=True)
class Trajectory:
    """Fixed-grid samples of an integrated flow."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.states, dtype=float)
        if t.ndim != 1 or x.ndim != 2 or x.shape[0] != t.size:
            raise ValueError(
                f"times {t.shape} and states {x.shape} are inconsistent"
            )
        if t.size >= 2 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)

    @property
    def final_state(self):
        return self.states[-1].copy()

    @property
    def dim(self):
        return self.states.shape[1]


def default_timestep(system, state=None):
    """Step size ``min(1e-2, 0.1 / ||J||)`` from the Jacobian at a state.

    Keeps fixed-step RK4 well inside its stability region for the linear
    flows of this package. Defaults to the Jacobian at the origin.
    """
    if state is None:
        state = np.zeros(system.dim)
    J = system.jacobian(np.asarray(state, dtype=float))
    norm = float(np.linalg.norm(J, 2))
    if norm == 0.0:
        return 1e-2
    return min(1e-2, 0.1 / norm)


def integrate(system, x0, t_end, dt):
    """Integrate a flow with classical fixed-step RK4.

    Samples at ``t = 0, dt, 2 dt, ..., steps * dt`` where ``steps`` rounds
    ``t_end / dt`` to the nearest integer (at least one step).

    Raises
    ------
    ValueError
        On non-positive ``dt``, ``t_end < dt``, or a bad initial state.
    DivergenceError
        When a step produces non-finite entries; the exception carries the
        partial trajectory and the offending time.
    """
    dt = float(dt)
    t_end = float(t_end)
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end must be at least dt, got {t_end} < {dt}")
    x = np.array(x0, dtype=float).reshape(-1)
    if x.size != system.dim:
        raise ValueError(
            f"initial state has length {x.size}, system dimension is {system.dim}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("initial state has non-finite entries")

    steps = max(1, int(round(t_end / dt)))
    f = system.vector_field
    states = np.empty((steps + 1, x.size))
    states[0] = x
    times = np.arange(steps + 1) * dt
    for k in range(steps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = x
        if not np.all(np.isfinite(x)):
            partial = Trajectory(times[: k + 1], states[: k + 1])
            raise DivergenceError(
                f"integration diverged at t={times[k + 1]:.6g}",
                time=float(times[k + 1]),
                partial=partial,
            )
    return Trajectory(times, states)


@dataclass(frozen=True)
class DecayReport:
    """Observed seminorm decay of a trajectory pair against an envelope.

    ``ok`` is true when every sampled distance stays below
    ``d(0) * exp(-rate * t) * (1 + tol)``, up to an absolute floor that
    is pure seminorm-evaluation roundoff (relevant only when the initial
    offset lies in the kernel of the weight and d(0) is numerically zero).
    """

    times: np.ndarray
    distances: np.ndarray
    envelope: np.ndarray
    rate: float
    fitted_rate: float
    ok: bool
    violation_time: float | None
    roundoff_floor: float


def contraction_observed(
    system, certificate, x0, y0, t_end, dt, tol_traj=DEFAULT_TRAJ_TOL
):
    """Integrate a trajectory pair and compare its seminorm decay.

    Parameters
    ----------
    system : FlowSystem
    certificate : ContractionCertificate
        Supplies both the seminorm and the certified rate.
    x0, y0 : ndarray
        Distinct initial states.
    t_end, dt : float
        Integration horizon and fixed step.
    tol_traj : float
        Multiplicative envelope slack.

    Returns
    -------
    DecayReport
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    if x0.shape != y0.shape:
        raise ValueError("initial states must have the same shape")
    if np.array_equal(x0, y0):
        raise ValueError("initial states must differ")
    ta = integrate(system, x0, t_end, dt)
    tb = integrate(system, y0, t_end, dt)
    weight = certificate.weight
    diff = ta.states - tb.states
    distances = np.linalg.norm(diff @ weight.root.T, axis=1)
    rate = float(certificate.rate)
    envelope = distances[0] * np.exp(-rate * ta.times)
    # Roundoff floor of evaluating ||R (x - y)|| in double precision.
    scale = float(np.linalg.norm(weight.root, 2)) * float(
        np.max(np.linalg.norm(diff, axis=1))
    )
    floor = 1e-12 * max(1.0, scale)
    bound = envelope * (1.0 + tol_traj) + floor
    violations = distances > bound
    ok = not bool(violations.any())
    violation_time = None if ok else float(ta.times[int(np.argmax(violations))])
    fit_mask = distances > 10.0 * floor
    if int(fit_mask.sum()) >= 2:
        slope = np.polyfit(ta.times[fit_mask], np.log(distances[fit_mask]), 1)[0]
        fitted = -float(slope)
    else:
        fitted = float("nan")
    return DecayReport(
        times=ta.times,
        distances=distances,
        envelope=envelope,
        rate=rate,
        fitted_rate=fitted,
        ok=ok,
        violation_time=violation_time,
        roundoff_floor=floor,
    )


def write_trajectory_csv(trajectory, path):
    """Write a trajectory as CSV with header ``t,state_0,...,state_{d-1}``."""
    d = trajectory.dim
    header = ",".join(["t"] + [f"state_{k}" for k in range(d)])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for t, row in zip(trajectory.times, trajectory.states):
            cells = [repr(float(t))] + [repr(float(v)) for v in row]
            fh.write(",".join(cells) + "\n")


def read_trajectory_csv(path):
    """Read a trajectory written by ``write_trajectory_csv``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if not cols or cols[0] != "t":
            raise ValueError(f"{path}: missing trajectory header")
        rows = []
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(cols):
        raise ValueError(f"{path}: malformed trajectory body")
    return Trajectory(times=data[:, 0], states=data[:, 1:])
