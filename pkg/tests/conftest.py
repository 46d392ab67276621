"""Shared random-instance generators and independent oracles for the tests."""

from __future__ import annotations

import numpy as np

from semicontract import SaddleProblem


def random_saddle_problem(rng, rank_deficient_share=0.4, taus=(0.01, 0.1, 1.0, 10.0)):
    """Random well-posed saddle problem, possibly with rank-deficient A.

    Q is diagonal-plus-skew with symmetric part bounded away from zero, so
    strong monotonicity holds by construction; with the given probability
    A gets duplicated rows to force rank deficiency.
    """
    n = int(rng.integers(2, 13))
    m = int(rng.integers(1, 13))
    diag = rng.uniform(0.1, 3.0, size=n)
    skew = rng.normal(size=(n, n))
    Q = np.diag(diag) + 0.5 * (skew - skew.T)
    A = rng.normal(size=(m, n))
    if m >= 2 and rng.random() < rank_deficient_share:
        # duplicate a block of rows to force rank deficiency
        k = int(rng.integers(1, m))
        src = rng.integers(0, m, size=k)
        dst = rng.integers(0, m, size=k)
        A[dst] = A[src]
    if not np.any(A):
        A[0, 0] = 1.0
    tau = float(rng.choice(taus))
    return SaddleProblem(Q=Q, A=A, tau=tau)


def kkt_primal(hessian, gradient_at_zero, A, b):
    """Primal part of the KKT solution of an equality-constrained QP.

    Solves ``[[H, A.T], [A, 0]] [x; lam] = [-g0; b]`` by least squares
    (the system may be singular in the multipliers; the primal block is
    unique for positive definite H and feasible b).
    """
    H = np.asarray(hessian, dtype=float)
    g0 = np.asarray(gradient_at_zero, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = H.shape[0]
    m = A.shape[0]
    K = np.block([[H, A.T], [A, np.zeros((m, m))]])
    rhs = np.concatenate([-g0, b])
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    return sol[:n]


def random_metzler_hurwitz(rng, size):
    """Random Metzler Hurwitz matrix via diagonally dominant construction."""
    off = rng.uniform(0.0, 1.0, size=(size, size))
    np.fill_diagonal(off, 0.0)
    margin = rng.uniform(0.05, 1.5, size=size)
    M = off.copy()
    np.fill_diagonal(M, -(off.sum(axis=1) + margin))
    return M
