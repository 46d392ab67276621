"""Saddle matrices and semicontraction rate certificates.

A saddle problem couples a strongly monotone primal block ``Q`` with a
constraint matrix ``A`` and a dual time constant ``tau``. Its linearized
dynamics are governed by the saddle matrix::

    S = [ -Q        -A.T ]
        [ A / tau    0   ]

which is semicontracting (contracting modulo the constant directions
``(0, y)`` with ``A.T y = 0``) but in general not contracting. This module
constructs explicit weighted seminorms certifying an exponential rate, all
sharing the weight family::

    P(alpha) = [ I          alpha A.T  ]
               [ alpha A    tau Pi_A   ]

where ``Pi_A`` is the orthogonal projector onto range(A). Three choices of
``alpha`` are provided, each yielding the certified rate
``c = alpha * a_min / (2 tau)``:

* ``quarter_rate_certificate``: a simple closed form whose rate is a quarter
  of the relevant spectral ratio.
* ``small_tau_certificate``: a one-parameter family that approaches the
  best rate of this weight family as ``tau`` goes to zero.
* ``sharp_rate_certificate``: alpha from the stable root of a quadratic,
  the sharpest of the three for moderate ``tau``.

Every constructor verifies its own output (weight PSD, kernel invariant
under the saddle matrix, LMI residual nonpositive) and raises
``CertificateError`` if verification fails, so a returned certificate is
always a checked one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectra import (
    DEFAULT_LMI_TOL,
    DEFAULT_RANK_TOL,
    CertificateError,
    WeightedSeminorm,
    check_lmi,
    spectral_abscissa,
)

__all__ = [
    "SaddleProblem",
    "SpectralBounds",
    "ContractionCertificate",
    "CertificateReport",
    "assemble_saddle",
    "spectral_bounds",
    "quarter_rate_certificate",
    "small_tau_certificate",
    "sharp_rate_certificate",
    "verify_certificate",
    "deflated_abscissa",
]


@dataclass(frozen=True)
class SaddleProblem:
    """Problem data ``(Q, A, tau)`` for a saddle-matrix analysis.

    Parameters
    ----------
    Q : ndarray
        Primal block, shape ``(n, n)``, with positive definite symmetric
        part (strong monotonicity). Need not be symmetric.
    A : ndarray
        Constraint matrix, shape ``(m, n)``, nonzero. May be rank deficient.
    tau : float
        Positive dual time constant.
    """

    Q: np.ndarray
    A: np.ndarray
    tau: float

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        A = np.asarray(self.A, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if A.ndim != 2 or A.shape[1] != Q.shape[0]:
            raise ValueError(
                f"A must have shape (m, {Q.shape[0]}), got {A.shape}"
            )
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(A))):
            raise ValueError("problem data has non-finite entries")
        if not np.any(A):
            raise ValueError("A must be nonzero")
        tau = float(self.tau)
        if not (tau > 0 and math.isfinite(tau)):
            raise ValueError(f"tau must be positive and finite, got {tau}")
        qmin = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
        if qmin <= 0:
            raise ValueError(
                f"Q is not strongly monotone: min eigenvalue of its "
                f"symmetric part is {qmin:.3e}"
            )
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "tau", tau)

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def m(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class SpectralBounds:
    """Spectral quantities of a saddle problem.

    Attributes
    ----------
    q_min : float
        Smallest eigenvalue of the symmetric part of Q.
    q_max : float
        ``sigma_max(Q)**2 / q_min``, the smallest constant with
        ``Q.T Q <= q_max * (Q + Q.T) / 2`` that this bound certifies.
    a_min : float
        Smallest nonzero eigenvalue of ``A A.T``.
    a_max : float
        Largest eigenvalue of ``A A.T``.
    pi_A : ndarray
        Orthogonal projector onto range(A), shape ``(m, m)``.
    """

    q_min: float
    q_max: float
    a_min: float
    a_max: float
    pi_A: np.ndarray


def assemble_saddle(problem):
    """Assemble the full saddle matrix ``[[-Q, -A.T], [A/tau, 0]]``."""
    Q, A, tau = problem.Q, problem.A, problem.tau
    n, m = problem.n, problem.m
    S = np.zeros((n + m, n + m))
    S[:n, :n] = -Q
    S[:n, n:] = -A.T
    S[n:, :n] = A / tau
    return S


def _range_factors(A, rank_tol):
    """SVD-based range data of A.

    Returns ``(V, s2)`` where the columns of ``V`` form an orthonormal
    basis of range(A) and ``s2`` holds the squared singular values kept by
    the rank cutoff (the nonzero eigenvalues of ``A A.T``).
    """
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    s2 = s * s
    cutoff = rank_tol * max(1.0, float(s2[0]))
    keep = s2 > cutoff
    if not np.any(keep):
        raise ValueError("A is numerically zero at the given rank tolerance")
    return U[:, keep], s2[keep]


def spectral_bounds(problem, rank_tol=DEFAULT_RANK_TOL):
    """Spectral bounds of a saddle problem.

    A single SVD of ``A`` supplies ``a_min``, ``a_max``, and the range
    projector; ``q_min`` and ``q_max`` come from the symmetric part and the
    largest singular value of ``Q``.
    """
    Q = problem.Q
    q_min = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
    if q_min <= 0:
        raise ValueError("Q is not strongly monotone")
    sigma_max = float(np.linalg.norm(Q, 2))
    q_max = sigma_max * sigma_max / q_min
    V, s2 = _range_factors(problem.A, rank_tol)
    return SpectralBounds(
        q_min=q_min,
        q_max=q_max,
        a_min=float(s2[-1]),
        a_max=float(s2[0]),
        pi_A=V @ V.T,
    )


@dataclass(frozen=True)
class ContractionCertificate:
    """A verified semicontraction certificate.

    Attributes
    ----------
    weight : WeightedSeminorm
        Seminorm in which the saddle dynamics contract.
    alpha : float
        Coupling parameter of the weight matrix.
    rate : float
        Certified exponential rate ``c = alpha * a_min / (2 tau)``.
    variant : str
        One of ``"quarter-rate"``, ``"small-tau"``, ``"sharp-rate"``.
    epsilon : float or None
        The balance parameter, set for the small-tau variant only.
    """

    weight: WeightedSeminorm
    alpha: float
    rate: float
    variant: str
    epsilon: float | None = None


@dataclass(frozen=True)
class CertificateReport:
    """Verification outcome for a certificate against its problem."""

    lmi_ok: bool
    psd_ok: bool
    kernel_invariant_ok: bool
    lmi_worst_eigenvalue: float
    weight_min_eigenvalue: float
    kernel_residual: float

    @property
    def all_ok(self):
        return self.lmi_ok and self.psd_ok and self.kernel_invariant_ok


def _weight_matrix(problem, alpha, pi_A):
    n, m = problem.n, problem.m
    P = np.zeros((n + m, n + m))
    P[:n, :n] = np.eye(n)
    P[:n, n:] = alpha * problem.A.T
    P[n:, :n] = alpha * problem.A
    P[n:, n:] = problem.tau * pi_A
    return P


def _build_certificate(problem, bounds, alpha, variant, tol, rank_tol, epsilon=None):
    rate = 0.5 * alpha * bounds.a_min / problem.tau
    P = _weight_matrix(problem, alpha, bounds.pi_A)
    weight = WeightedSeminorm.from_weight(P, rank_tol=rank_tol)
    cert = ContractionCertificate(
        weight=weight, alpha=float(alpha), rate=float(rate),
        variant=variant, epsilon=epsilon,
    )
    report = verify_certificate(problem, cert, tol=tol)
    if not report.all_ok:
        raise CertificateError(
            f"{variant} certificate failed verification: "
            f"lmi_ok={report.lmi_ok} (worst {report.lmi_worst_eigenvalue:.3e}), "
            f"psd_ok={report.psd_ok}, kernel_ok={report.kernel_invariant_ok}"
        )
    return cert


def quarter_rate_certificate(problem, tol=DEFAULT_LMI_TOL, rank_tol=DEFAULT_RANK_TOL):
    """Certificate with ``alpha = min(1/q_max, tau q_min / a_max) / 2``.

    The simplest of the three variants. Its rate is a quarter of
    ``min(a_min / (tau q_max), (a_min / a_max) q_min)``.
    """
    bounds = spectral_bounds(problem, rank_tol=rank_tol)
    alpha = 0.5 * min(
        1.0 / bounds.q_max,
        problem.tau * bounds.q_min / bounds.a_max,
    )
    return _build_certificate(
        problem, bounds, alpha, "quarter-rate", tol, rank_tol
    )


def default_small_tau_epsilon(problem, bounds=None, rank_tol=DEFAULT_RANK_TOL):
    """Balance parameter equating the two arguments of the small-tau min.

    ``eps* = 2 tau q_min q_max / (3 a_max + tau q_min q_max)``, always in
    (0, 2), and optimal for the small-tau alpha formula.
    """
    if bounds is None:
        bounds = spectral_bounds(problem, rank_tol=rank_tol)
    t = problem.tau * bounds.q_min * bounds.q_max
    return 2.0 * t / (3.0 * bounds.a_max + t)


def small_tau_certificate(
    problem, epsilon=None, tol=DEFAULT_LMI_TOL, rank_tol=DEFAULT_RANK_TOL
):
    """Certificate with ``alpha = min(eps/q_max, (2-eps)/3 * tau q_min/a_max)``.

    Valid for every ``epsilon`` in the open interval (0, 2). With the
    default balanced epsilon the certified rate approaches
    ``(a_min / a_max) * q_min / 3`` as ``tau`` goes to zero, beating the
    quarter-rate variant in the stiff-dual regime.

    Parameters
    ----------
    epsilon : float, optional
        Balance parameter in (0, 2). Defaults to the equating value from
        ``default_small_tau_epsilon``.
    """
    bounds = spectral_bounds(problem, rank_tol=rank_tol)
    if epsilon is None:
        epsilon = default_small_tau_epsilon(problem, bounds)
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 2.0:
        raise ValueError(f"epsilon must lie in (0, 2), got {epsilon}")
    alpha = min(
        epsilon / bounds.q_max,
        (2.0 - epsilon) / 3.0 * problem.tau * bounds.q_min / bounds.a_max,
    )
    return _build_certificate(
        problem, bounds, alpha, "small-tau", tol, rank_tol, epsilon=epsilon
    )


def sharp_rate_certificate(problem, tol=DEFAULT_LMI_TOL, rank_tol=DEFAULT_RANK_TOL):
    """Certificate with alpha from the stable root of a quadratic.

    ``alpha = min(beta1, tau q_min / a_min)`` where ``beta1`` is the
    smaller positive root of::

        (a_min / tau) b**2 - (q_max + 3 a_max / (tau q_min)) b + 2 = 0

    The root is evaluated in the cancellation-free form
    ``q = (|b| + sqrt(b**2 - 4 a c)) / 2``, ``beta1 = min(q/a, c/q)``.
    The discriminant is provably positive (the linear coefficient dominates
    ``sqrt(8 a_min / tau)`` with margin), so a negative discriminant here
    means numerical breakdown and raises ``CertificateError``.
    """
    bounds = spectral_bounds(problem, rank_tol=rank_tol)
    a_coef = bounds.a_min / problem.tau
    b_coef = -(bounds.q_max + 3.0 * bounds.a_max / (problem.tau * bounds.q_min))
    c_coef = 2.0
    disc = b_coef * b_coef - 4.0 * a_coef * c_coef
    if disc < 0:
        raise CertificateError(
            f"quadratic for the sharp rate has negative discriminant {disc:.3e}"
        )
    q = 0.5 * (abs(b_coef) + math.sqrt(disc))
    beta1 = min(q / a_coef, c_coef / q)
    alpha = min(beta1, problem.tau * bounds.q_min / bounds.a_min)
    return _build_certificate(
        problem, bounds, alpha, "sharp-rate", tol, rank_tol
    )


def verify_certificate(problem, certificate, tol=DEFAULT_LMI_TOL):
    """Re-verify a certificate against its problem.

    Checks three conditions and reports each:

    * the weight is PSD (min eigenvalue above ``-tol * max(1, ||P||)``),
    * the kernel of the weight is invariant under the saddle matrix
      (``||P S K|| <= tol * max(1, ||P|| ||S||)`` for the kernel basis K),
    * the LMI ``S.T P + P S + 2 c P <= 0`` holds at the certified rate
      up to the relative tolerance.
    """
    S = assemble_saddle(problem)
    weight = certificate.weight
    if weight.dim != S.shape[0]:
        raise ValueError(
            f"certificate dimension {weight.dim} does not match problem "
            f"dimension {S.shape[0]}"
        )
    P = weight.weight
    evals = np.linalg.eigvalsh(P)
    min_eig = float(evals[0])
    psd_ok = min_eig >= -tol * max(1.0, float(evals[-1]))

    K = weight.kernel_basis
    if K.shape[1] > 0:
        kernel_residual = float(np.linalg.norm(P @ (S @ K), ord=2))
    else:
        kernel_residual = 0.0
    kernel_scale = max(1.0, float(np.linalg.norm(P, 2) * np.linalg.norm(S, 2)))
    kernel_ok = kernel_residual <= tol * kernel_scale

    lmi = check_lmi(S, weight, certificate.rate, tol=tol)
    return CertificateReport(
        lmi_ok=lmi.ok,
        psd_ok=psd_ok,
        kernel_invariant_ok=kernel_ok,
        lmi_worst_eigenvalue=lmi.worst_eigenvalue,
        weight_min_eigenvalue=min_eig,
        kernel_residual=kernel_residual,
    )


def deflated_abscissa(problem, rank_tol=DEFAULT_RANK_TOL):
    """Spectral abscissa of the saddle matrix restricted to its active part.

    With ``V`` an orthonormal basis of range(A), the matrix::

        S_defl = [ -Q            -A.T V ]
                 [ V.T A / tau    0     ]

    has the same spectrum as the full saddle matrix except for
    ``m - rank(A)`` zero eigenvalues carried by the constant directions
    ``(0, ker A.T)``. Since those directions are exactly the kernel of the
    certificate weights, the deflated abscissa is the decay rate that the
    seminorm distance actually sees, and it never exceeds the negated
    certified rate of any valid certificate.

    For rank-deficient A this is also much cheaper than the full
    eigenproblem: size ``n + rank(A)`` instead of ``n + m``.
    """
    V, _ = _range_factors(problem.A, rank_tol)
    n = problem.n
    r = V.shape[1]
    AV = problem.A.T @ V
    S = np.zeros((n + r, n + r))
    S[:n, :n] = -problem.Q
    S[:n, n:] = -AV
    S[n:, :n] = AV.T / problem.tau
    return spectral_abscissa(S)
