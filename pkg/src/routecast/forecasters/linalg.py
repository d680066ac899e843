"""Ridge least squares for the small dense systems the specialists fit."""

from __future__ import annotations

import numpy as np

from ..errors import SingularSystem

# Reciprocal condition number below which a solve is reported as singular.
_RCOND_FLOOR = 1e3 * np.finfo(float).eps


def ridge_solve(X: np.ndarray, Y: np.ndarray, lam: float, fit_intercept: bool = True):
    """Minimise ``||Y - X W - b||^2 + lam ||W||^2`` (intercept unpenalised).

    Solved as an augmented least-squares problem via SVD, which stays
    accurate when ``X`` is rank deficient and ``lam`` is tiny. Returns
    ``(W, b)``; ``b`` is zero when ``fit_intercept`` is false.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    squeeze = Y.ndim == 1
    if squeeze:
        Y = Y[:, None]
    n, p = X.shape
    if fit_intercept:
        x_mean = X.mean(axis=0)
        y_mean = Y.mean(axis=0)
        Xc, Yc = X - x_mean, Y - y_mean
    else:
        x_mean = np.zeros(p)
        y_mean = np.zeros(Y.shape[1])
        Xc, Yc = X, Y
    A = np.vstack([Xc, np.sqrt(lam) * np.eye(p)])
    B = np.vstack([Yc, np.zeros((p, Y.shape[1]))])
    W, _, rank, sv = np.linalg.lstsq(A, B, rcond=None)
    if rank < p or sv[-1] <= _RCOND_FLOOR * sv[0] or not np.all(np.isfinite(W)):
        raise SingularSystem(
            f"ridge system ill-conditioned (rank {rank}/{p}, "
            f"sigma_min/sigma_max={sv[-1] / sv[0] if sv[0] else 0:.3g})"
        )
    b = y_mean - x_mean @ W
    if squeeze:
        return W[:, 0], float(b[0])
    return W, b
