"""Eigenvalue bounds, weighted seminorms, and matrix stability predicates.

This module holds the shared linear-algebra vocabulary of the package:
extremal eigenvalues of symmetric matrices with a rank cutoff, Euclidean
seminorms induced by positive semidefinite weights, logarithmic norms
(matrix measures) with respect to such seminorms, Linear Matrix Inequality
residual checks, and the Hurwitz / Schur / Metzler predicates used by the
game-theoretic gain analysis.

All tolerances are relative to a scale floored at 1, so well-scaled inputs
behave as with absolute tolerances while badly scaled ones do not produce
spurious failures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "DEFAULT_RANK_TOL",
    "DEFAULT_PSD_TOL",
    "DEFAULT_SYM_TOL",
    "DEFAULT_LMI_TOL",
    "CertificateError",
    "SymBounds",
    "WeightedSeminorm",
    "LmiCheck",
    "sym_eigen_bounds",
    "spectral_abscissa",
    "spectral_radius",
    "log_seminorm_weighted",
    "check_lmi",
    "is_hurwitz",
    "is_schur",
    "is_metzler",
    "diagonal_lyapunov_weights",
]

# Relative cutoff separating numerically zero eigenvalues from the rest.
DEFAULT_RANK_TOL = 1e-10
# Relative slack for positive semidefiniteness checks.
DEFAULT_PSD_TOL = 1e-8
# Relative asymmetry tolerance for inputs that are symmetric in exact arithmetic.
DEFAULT_SYM_TOL = 1e-8
# Relative slack for LMI residual eigenvalues.
DEFAULT_LMI_TOL = 1e-8


class CertificateError(RuntimeError):
    """A numerically constructed guarantee failed its own verification.

    Raised when a certificate or weight that is provably valid in exact
    arithmetic does not pass the residual check at the configured tolerance.
    This signals a numerical breakdown (or a bug), not bad user input.
    """


def _as_square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _check_symmetric(M, sym_tol, name="matrix"):
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    skew = float(np.abs(M - M.T).max()) if M.size else 0.0
    if skew > sym_tol * scale:
        raise ValueError(
            f"{name} is not symmetric: max asymmetry {skew:.3e} exceeds "
            f"{sym_tol:.1e} * {scale:.3e}"
        )
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SymBounds:
    """Extremal eigenvalues of a symmetric matrix.

    Attributes
    ----------
    lambda_min : float
        Smallest eigenvalue.
    lambda_max : float
        Largest eigenvalue.
    lambda_min_nonzero : float
        Smallest eigenvalue strictly above the rank cutoff
        ``rank_tol * max(1, lambda_max)``.
    """

    lambda_min: float
    lambda_max: float
    lambda_min_nonzero: float


def sym_eigen_bounds(M, rank_tol=DEFAULT_RANK_TOL, sym_tol=DEFAULT_SYM_TOL):
    """Extremal eigenvalues of a symmetric matrix with a rank cutoff.

    Parameters
    ----------
    M : array_like
        Square matrix, symmetric to within ``sym_tol`` (relative). The
        symmetrized matrix ``(M + M.T) / 2`` is what gets solved.
    rank_tol : float
        Relative cutoff below which eigenvalues count as zero.
    sym_tol : float
        Relative asymmetry tolerance.

    Returns
    -------
    SymBounds

    Raises
    ------
    ValueError
        If ``M`` is not square, not finite, not symmetric within tolerance,
        or no eigenvalue clears the rank cutoff (as for the zero matrix or a
        negative semidefinite one). The cutoff semantics target PSD-like
        spectra such as Gram matrices and graph Laplacians.
    """
    M = _as_square(M)
    Msym = _check_symmetric(M, sym_tol)
    evals = np.linalg.eigvalsh(Msym)
    lam_min = float(evals[0])
    lam_max = float(evals[-1])
    cutoff = rank_tol * max(1.0, lam_max)
    above = evals[evals > cutoff]
    if above.size == 0:
        raise ValueError(
            f"no eigenvalue above rank cutoff {cutoff:.3e}; "
            "lambda_min_nonzero is undefined for this matrix"
        )
    return SymBounds(lam_min, lam_max, float(above[0]))


def spectral_abscissa(M):
    """Largest real part over the eigenvalues of a square matrix."""
    M = _as_square(M)
    return float(np.max(np.linalg.eigvals(M).real))


def spectral_radius(M):
    """Largest eigenvalue modulus of a square matrix."""
    M = _as_square(M)
    return float(np.max(np.abs(np.linalg.eigvals(M))))


@dataclass(frozen=True)
class WeightedSeminorm:
    """Seminorm ``|v| = sqrt(v.T @ P @ v)`` induced by a PSD weight ``P``.

    Attributes
    ----------
    weight : ndarray
        The symmetrized weight matrix ``P``, shape ``(d, d)``.
    root : ndarray
        Factor ``R`` with ``P = R.T @ R``, shape ``(rank, d)``, built from
        the eigenvectors whose eigenvalues clear the rank cutoff.
    kernel_basis : ndarray
        Orthonormal basis of the numerical kernel of ``P``, shape
        ``(d, d - rank)``. Empty second axis when ``P`` has full rank.
    """

    weight: np.ndarray
    root: np.ndarray
    kernel_basis: np.ndarray

    @classmethod
    def from_weight(
        cls,
        P,
        rank_tol=DEFAULT_RANK_TOL,
        psd_tol=DEFAULT_PSD_TOL,
        sym_tol=DEFAULT_SYM_TOL,
    ):
        """Factor a PSD weight into root and kernel basis.

        Raises
        ------
        ValueError
            If ``P`` is not symmetric within ``sym_tol`` or has an
            eigenvalue below ``-psd_tol * max(1, lambda_max)``.
        """
        P = _as_square(P, name="weight")
        Psym = _check_symmetric(P, sym_tol, name="weight")
        evals, vecs = np.linalg.eigh(Psym)
        lam_max = float(evals[-1])
        scale = max(1.0, lam_max)
        if evals[0] < -psd_tol * scale:
            raise ValueError(
                f"weight is not positive semidefinite: "
                f"min eigenvalue {evals[0]:.3e}"
            )
        keep = evals > rank_tol * scale
        root = np.sqrt(np.clip(evals[keep], 0.0, None))[:, None] * vecs[:, keep].T
        kernel = vecs[:, ~keep]
        return cls(weight=Psym, root=root, kernel_basis=kernel)

    @classmethod
    def euclidean(cls, dim):
        """Standard Euclidean norm on ``R^dim`` (identity weight)."""
        eye = np.eye(int(dim))
        return cls(weight=eye, root=eye.copy(), kernel_basis=np.empty((dim, 0)))

    @property
    def dim(self):
        return self.weight.shape[0]

    @property
    def rank(self):
        return self.root.shape[0]

    @property
    def range_basis(self):
        """Orthonormal basis of range(P), shape ``(d, rank)``."""
        cols = self.root.T
        norms = np.linalg.norm(cols, axis=0)
        return cols / norms

    def seminorm(self, v):
        """Evaluate ``sqrt(v.T @ P @ v)`` as ``||R v||``."""
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(self.root @ v))

    def distance(self, x, y):
        """Seminorm distance between two states."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.seminorm(x - y)


def log_seminorm_weighted(A, seminorm, inv_tol=DEFAULT_LMI_TOL):
    """Logarithmic norm of ``A`` with respect to a weighted seminorm.

    Computed as half the largest eigenvalue of the pencil
    ``(V.T (P A + A.T P) V, V.T P V)`` where ``V`` spans range(P). For a
    positive definite weight this is the classical weighted matrix measure;
    for a semidefinite weight it is the measure of the dynamics restricted
    to range(P), which is well defined only when the kernel of ``P`` is
    invariant under ``A``.

    Parameters
    ----------
    A : array_like
        Square matrix of the same dimension as the seminorm.
    seminorm : WeightedSeminorm
    inv_tol : float
        Relative tolerance for the kernel invariance precondition
        ``||P A v|| <= inv_tol * ||P|| * ||A||`` over unit kernel vectors v.

    Raises
    ------
    ValueError
        If the kernel of the weight is not invariant under ``A``.
    """
    A = _as_square(A)
    if A.shape[0] != seminorm.dim:
        raise ValueError(
            f"dimension mismatch: matrix is {A.shape[0]}, seminorm is {seminorm.dim}"
        )
    P = seminorm.weight
    K = seminorm.kernel_basis
    if K.shape[1] > 0:
        residual = float(np.linalg.norm(P @ (A @ K), ord=2))
        bound = inv_tol * np.linalg.norm(P, 2) * max(1.0, np.linalg.norm(A, 2))
        if residual > bound:
            raise ValueError(
                f"kernel of the weight is not invariant under the matrix: "
                f"residual {residual:.3e} exceeds {bound:.3e}"
            )
    V = seminorm.range_basis
    G = V.T @ (P @ A + A.T @ P) @ V
    H = V.T @ P @ V
    evals = scipy.linalg.eigh(0.5 * (G + G.T), 0.5 * (H + H.T), eigvals_only=True)
    return float(evals[-1]) / 2.0


@dataclass(frozen=True)
class LmiCheck:
    """Result of a Lyapunov LMI residual check.

    ``ok`` is true when the largest eigenvalue of
    ``S.T P + P S + 2 c P`` is at most ``tol * scale`` with
    ``scale = max(1, ||P|| * ||S||)``.
    """

    ok: bool
    worst_eigenvalue: float
    scale: float


def check_lmi(S, seminorm, rate, tol=DEFAULT_LMI_TOL):
    """Check the semicontraction LMI ``S.T P + P S + 2 c P <= 0``.

    The check is monotone in ``rate``: if it passes at some c it passes at
    every smaller c, because lowering c subtracts a PSD multiple of P.

    Parameters
    ----------
    S : array_like
        System matrix.
    seminorm : WeightedSeminorm
        Supplies the weight P.
    rate : float
        Candidate semicontraction rate c (nonnegative for a certificate,
        but any float is accepted).
    tol : float
        Relative residual tolerance.
    """
    S = _as_square(S)
    if S.shape[0] != seminorm.dim:
        raise ValueError(
            f"dimension mismatch: matrix is {S.shape[0]}, seminorm is {seminorm.dim}"
        )
    P = seminorm.weight
    residual = S.T @ P + P @ S + 2.0 * float(rate) * P
    worst = float(np.linalg.eigvalsh(0.5 * (residual + residual.T))[-1])
    scale = max(1.0, float(np.linalg.norm(P, 2) * np.linalg.norm(S, 2)))
    return LmiCheck(ok=worst <= tol * scale, worst_eigenvalue=worst, scale=scale)


def is_hurwitz(M, tol=0.0):
    """True when every eigenvalue has real part strictly below ``-tol``."""
    return spectral_abscissa(M) < -tol


def is_schur(M, tol=0.0):
    """True when every eigenvalue modulus is strictly below ``1 - tol``."""
    return spectral_radius(M) < 1.0 - tol


def is_metzler(M, tol=0.0):
    """True when every off-diagonal entry is at least ``-tol``."""
    M = _as_square(M)
    off = M - np.diag(np.diag(M))
    return bool(np.all(off >= -tol))


def diagonal_lyapunov_weights(M):
    """Diagonal Lyapunov weights for a Hurwitz Metzler matrix.

    For Metzler Hurwitz ``M`` the inverse ``-M^{-1}`` is entrywise
    nonnegative with no zero row, so ``xi = solve(M, -1)`` and
    ``eta = solve(M.T, -1)`` are strictly positive vectors with
    ``M xi < 0`` and ``M.T eta < 0``. The weights ``p = eta / xi`` then
    make ``D = diag(p)`` a Lyapunov certificate:
    ``lambda_max(M.T D + D M) < 0``.

    Parameters
    ----------
    M : array_like
        Square Metzler Hurwitz matrix.

    Returns
    -------
    ndarray
        Strictly positive weight vector ``p``.

    Raises
    ------
    ValueError
        If ``M`` is not Metzler or not Hurwitz.
    CertificateError
        If the constructed weights fail the Lyapunov check numerically.
    """
    M = _as_square(M)
    if not is_metzler(M):
        raise ValueError("matrix is not Metzler (negative off-diagonal entry)")
    if not is_hurwitz(M):
        raise ValueError("matrix is not Hurwitz (spectral abscissa >= 0)")
    ones = np.ones(M.shape[0])
    xi = np.linalg.solve(M, -ones)
    eta = np.linalg.solve(M.T, -ones)
    if not (np.all(xi > 0) and np.all(eta > 0)):
        raise CertificateError(
            "decay vectors came out non-positive; matrix is too close to singular"
        )
    p = eta / xi
    D = np.diag(p)
    residual = M.T @ D + D @ M
    worst = float(np.linalg.eigvalsh(0.5 * (residual + residual.T))[-1])
    if worst >= 0.0:
        raise CertificateError(
            f"diagonal weights failed verification: worst eigenvalue {worst:.3e}"
        )
    return p
