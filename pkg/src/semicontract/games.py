"""Gain matrices and convergence analysis for continuous game dynamics.

Inputs are worst-case interaction bounds: each player i has a strong
monotonicity constant ``mu_i`` for its own cost curvature and Lipschitz
bounds ``ell_ij`` on how strongly player j's action moves player i's
marginal cost. From these the module builds three gain matrices:

* ``gain_pseudogradient``: Metzler matrix with diagonal ``-mu_i`` and
  off-diagonal ``ell_ij``, governing the pseudogradient flow.
* ``gain_best_response`` / ``gain_best_response_discrete``: the
  continuous and discrete best-response gains, with off-diagonal entries
  ``ell_ij / mu_i``.
* ``gain_aggregative``: the gain of an aggregative game where each player
  reacts to the population average.

Because the pseudogradient gain factors as ``diag(mu)`` times the
best-response gain, Hurwitz stability of either flow and Schur stability
of the discrete best-response iteration are all equivalent; the
``equivalence_check`` report makes that concrete instance by instance.
Hurwitz Metzler gains additionally admit diagonal Lyapunov certificates
(see ``spectra.diagonal_lyapunov_weights``), and ``interconnection_rate``
turns a Hurwitz gain into an exponential rate usable in small-gain
arguments.

Concrete quadratic games (``QuadraticGame``) close the loop: their Nash
equilibrium is a linear solve, and both dynamics can be simulated and
checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flows import FlowSystem, default_timestep, integrate
from .spectra import is_hurwitz, is_metzler, is_schur, spectral_abscissa

__all__ = [
    "GameSpec",
    "QuadraticGame",
    "EquivalenceReport",
    "AggregativeGain",
    "gain_pseudogradient",
    "gain_best_response",
    "gain_best_response_discrete",
    "equivalence_check",
    "gain_aggregative",
    "interconnection_rate",
    "simulate_pseudogradient",
    "simulate_best_response",
    "read_game_file",
    "GameFile",
]


@dataclass(frozen=True)
class GameSpec:
    """Worst-case interaction bounds of an N-player game.

    Parameters
    ----------
    mu : ndarray
        Strictly positive self-curvature constants, shape ``(N,)``.
    ell : ndarray
        Nonnegative cross-interaction bounds, shape ``(N, N)``, zero
        diagonal (a player's own curvature lives in ``mu``).
    """

    mu: np.ndarray
    ell: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        ell = np.asarray(self.ell, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a nonempty 1-d array")
        if not np.all(np.isfinite(mu)) or not np.all(mu > 0):
            raise ValueError("mu must be finite and strictly positive")
        n = mu.size
        if ell.shape != (n, n):
            raise ValueError(f"ell must have shape ({n}, {n}), got {ell.shape}")
        if not np.all(np.isfinite(ell)):
            raise ValueError("ell must be finite")
        off = ell - np.diag(np.diag(ell))
        if np.any(off < 0):
            raise ValueError("ell must be nonnegative off the diagonal")
        if np.any(np.diag(ell) != 0):
            raise ValueError("ell must have zero diagonal")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "ell", ell)

    @property
    def players(self):
        return self.mu.size


@dataclass(frozen=True)
class QuadraticGame:
    """Quadratic game with costs ``J_i = mu_i x_i^2 / 2 + x_i (K[i] @ x + b_i)``.

    ``K`` has zero diagonal, so player i's marginal cost is
    ``mu_i x_i + sum_j K_ij x_j + b_i`` and the Nash equilibrium solves
    ``(diag(mu) + K) x = -b``.
    """

    mu: np.ndarray
    K: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        K = np.asarray(self.K, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a nonempty 1-d array")
        if not np.all(np.isfinite(mu)) or not np.all(mu > 0):
            raise ValueError("mu must be finite and strictly positive")
        n = mu.size
        if K.shape != (n, n) or not np.all(np.isfinite(K)):
            raise ValueError(f"K must be a finite ({n}, {n}) array")
        if np.any(np.diag(K) != 0):
            raise ValueError("K must have zero diagonal")
        if b.shape != (n,) or not np.all(np.isfinite(b)):
            raise ValueError(f"b must be a finite array of length {n}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "b", b)

    @property
    def players(self):
        return self.mu.size

    def spec(self):
        """Interaction bounds implied by the quadratic couplings."""
        return GameSpec(mu=self.mu, ell=np.abs(self.K))

    def nash_equilibrium(self):
        """Solve ``(diag(mu) + K) x = -b``."""
        M = np.diag(self.mu) + self.K
        try:
            return np.linalg.solve(M, -self.b)
        except np.linalg.LinAlgError as exc:
            raise ValueError("game has no unique Nash equilibrium") from exc


def gain_pseudogradient(spec):
    """Metzler gain of the pseudogradient flow: ``-diag(mu) + ell``."""
    return -np.diag(spec.mu) + spec.ell


def gain_best_response_discrete(spec):
    """Gain of the discrete best-response iteration: ``ell_ij / mu_i``."""
    return spec.ell / spec.mu[:, None]


def gain_best_response(spec):
    """Gain of the continuous best-response flow: ``-I + ell_ij / mu_i``."""
    return -np.eye(spec.players) + gain_best_response_discrete(spec)


@dataclass(frozen=True)
class EquivalenceReport:
    """Stability verdicts of the three game dynamics for one spec.

    ``consistent`` is true when all three verdicts agree, which holds in
    exact arithmetic because ``gain_pseudogradient = diag(mu) @
    gain_best_response`` and the gains are Metzler.
    """

    pseudogradient_hurwitz: bool
    best_response_hurwitz: bool
    discrete_schur: bool

    @property
    def consistent(self):
        return (
            self.pseudogradient_hurwitz
            == self.best_response_hurwitz
            == self.discrete_schur
        )


def equivalence_check(spec):
    """Evaluate all three stability predicates for one game spec."""
    return EquivalenceReport(
        pseudogradient_hurwitz=is_hurwitz(gain_pseudogradient(spec)),
        best_response_hurwitz=is_hurwitz(gain_best_response(spec)),
        discrete_schur=is_schur(gain_best_response_discrete(spec)),
    )


@dataclass(frozen=True)
class AggregativeGain:
    """Aggregative-game gain with its stability diagnostics.

    ``row_sums[i] = ell[i] - mu[i]``; negative row sums are a sufficient
    Hurwitz condition for this Metzler matrix, reported separately from
    the exact spectral verdict so the gap between the two is visible.
    """

    matrix: np.ndarray
    hurwitz: bool
    row_sums: np.ndarray
    row_sums_negative: bool


def gain_aggregative(mu, ell):
    """Gain of an aggregative game against the population average.

    Player i tracks the average action with sensitivity ``ell[i]`` and
    self-curvature ``mu[i]``: row i of the gain is the constant
    ``ell_i / N`` with ``-mu_i`` added on the diagonal, so its row sum is
    ``ell_i - mu_i``.

    Parameters
    ----------
    mu : ndarray
        Strictly positive, shape ``(N,)``.
    ell : ndarray
        Nonnegative aggregate sensitivities, shape ``(N,)``.
    """
    mu = np.asarray(mu, dtype=float)
    ell = np.asarray(ell, dtype=float)
    if mu.ndim != 1 or mu.size == 0 or mu.shape != ell.shape:
        raise ValueError("mu and ell must be 1-d arrays of the same length")
    if not np.all(np.isfinite(mu)) or not np.all(mu > 0):
        raise ValueError("mu must be finite and strictly positive")
    if not np.all(np.isfinite(ell)) or np.any(ell < 0):
        raise ValueError("ell must be finite and nonnegative")
    n = mu.size
    G = np.tile((ell / n)[:, None], (1, n))
    G[np.diag_indices(n)] -= mu
    assert is_metzler(G)
    row_sums = ell - mu
    return AggregativeGain(
        matrix=G,
        hurwitz=is_hurwitz(G),
        row_sums=row_sums,
        row_sums_negative=bool(np.all(row_sums < 0)),
    )


def interconnection_rate(gamma, epsilon=None):
    """Exponential rate certified by a Hurwitz gain matrix.

    For a Hurwitz gain with spectral abscissa ``a < 0``, every margin
    ``0 < epsilon < -a`` yields the rate ``|a + epsilon|``; the margin is
    what a small-gain argument trades away to absorb interconnection
    terms. Defaults to ``epsilon = 1e-3 * |a|``.

    Raises
    ------
    ValueError
        If the gain is not Hurwitz or the margin is out of range.
    """
    a = spectral_abscissa(gamma)
    if a >= 0:
        raise ValueError(f"gain is not Hurwitz: spectral abscissa {a:.6g}")
    if epsilon is None:
        epsilon = 1e-3 * abs(a)
    epsilon = float(epsilon)
    if not 0.0 < epsilon < -a:
        raise ValueError(
            f"epsilon must lie in (0, {-a:.6g}), got {epsilon:.6g}"
        )
    return abs(a + epsilon)


def _linear_game_system(M, u):
    M = np.asarray(M, dtype=float)
    u = np.asarray(u, dtype=float)
    return FlowSystem(
        primal_dim=u.size,
        dual_dim=0,
        vector_field=lambda x, M=M, u=u: M @ x + u,
        jacobian=lambda x, M=M: M,
    )


def simulate_pseudogradient(game, x0, t_end, dt=None):
    """Integrate ``x' = -(diag(mu) + K) x - b`` from ``x0``.

    Divergence (a non-Hurwitz game) surfaces as ``DivergenceError`` from
    the integrator, carrying the partial trajectory.
    """
    system = _linear_game_system(-(np.diag(game.mu) + game.K), -game.b)
    if dt is None:
        dt = default_timestep(system)
    return integrate(system, x0, t_end, dt)


def simulate_best_response(game, x0, t_end, dt=None):
    """Integrate ``x' = -x - diag(mu)^{-1} (K x + b)`` from ``x0``."""
    Dinv = 1.0 / game.mu
    M = -(np.eye(game.players) + Dinv[:, None] * game.K)
    system = _linear_game_system(M, -Dinv * game.b)
    if dt is None:
        dt = default_timestep(system)
    return integrate(system, x0, t_end, dt)


@dataclass(frozen=True)
class GameFile:
    """Parsed game file: interaction bounds plus optional quadratic data."""

    spec: GameSpec
    game: QuadraticGame | None


def read_game_file(path):
    """Read a game description from a key-value text file.

    Grammar: one ``key value value ...`` entry per line; ``#`` starts a
    comment; blank lines are skipped; a ``:`` or ``=`` after the key is
    tolerated. Keys (case-insensitive):

    * ``players``: integer N
    * ``mu``: N positive floats
    * ``ell``: N*N nonnegative floats, row-major, zero diagonal
    * ``K`` (optional): N*N floats, row-major, zero diagonal
    * ``b`` (optional): N floats, defaults to zeros when K is present

    Returns a ``GameFile``; ``game`` is None unless ``K`` is given.
    """
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace("=", " ").replace(":", " ").split()
            key = parts[0].lower()
            if key in entries:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            entries[key] = parts[1:]
    for required in ("players", "mu", "ell"):
        if required not in entries:
            raise ValueError(f"{path}: missing required key {required!r}")
    try:
        n = int(entries["players"][0])
        mu = np.array([float(t) for t in entries["mu"]])
        ell_flat = np.array([float(t) for t in entries["ell"]])
        k_flat = (
            np.array([float(t) for t in entries["k"]])
            if "k" in entries else None
        )
        b = (
            np.array([float(t) for t in entries["b"]])
            if "b" in entries else None
        )
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed numeric field: {exc}") from exc
    if mu.size != n:
        raise ValueError(f"{path}: mu must list {n} values, got {mu.size}")
    if ell_flat.size != n * n:
        raise ValueError(
            f"{path}: ell must list {n * n} values, got {ell_flat.size}"
        )
    spec = GameSpec(mu=mu, ell=ell_flat.reshape(n, n))
    game = None
    if k_flat is not None:
        if k_flat.size != n * n:
            raise ValueError(
                f"{path}: K must list {n * n} values, got {k_flat.size}"
            )
        if b is None:
            b = np.zeros(n)
        if b.size != n:
            raise ValueError(f"{path}: b must list {n} values, got {b.size}")
        game = QuadraticGame(mu=mu, K=k_flat.reshape(n, n), b=b)
    elif b is not None:
        raise ValueError(f"{path}: b given without K")
    return GameFile(spec=spec, game=game)
