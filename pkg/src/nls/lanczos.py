"""Thick-restart Lanczos for the lowest eigenpairs of a symmetric operator.

Every new Krylov vector is orthogonalized twice against the whole basis
(full reorthogonalization), so the projected matrix is computed rather than
assumed tridiagonal and restarts need no special bookkeeping.  A restart
keeps the lowest Ritz vectors plus the current residual direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentOutOfDomain, NoConvergence


@dataclass
class LanczosResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    meta: dict = field(default_factory=dict)


def _orthogonalize(basis: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Two passes of classical Gram-Schmidt; returns the combined coefficients."""
    h = basis.T @ w
    w -= basis @ h
    h2 = basis.T @ w
    w -= basis @ h2
    return h + h2


def lanczos_lowest(
    matvec,
    n: int,
    k: int,
    scale: float,
    tol: float = 1e-8,
    max_matvecs: int = 5000,
    basis_size: int | None = None,
    seed: int = 0,
    v0: np.ndarray | None = None,
) -> LanczosResult:
    """The ``k`` smallest eigenpairs of the real symmetric operator ``matvec``.

    Convergence requires every residual ``||A y - theta y||`` (unit ``y``)
    below ``tol * scale``.  ``NoConvergence`` after ``max_matvecs``
    operator applications.
    """
    if not 1 <= k <= n:
        raise ArgumentOutOfDomain(f"need 1 <= k <= n, got k={k}, n={n}")
    m = basis_size or min(n, max(2 * k + 20, 40))
    m = min(m, n)
    keep = min(m - 1, k + max(k, 8) // 2 + 2)
    threshold = tol * scale
    rng = np.random.default_rng(seed)

    V = np.empty((n, m + 1))
    T = np.zeros((m, m))
    v = rng.standard_normal(n) if v0 is None else np.array(v0, dtype=float)
    V[:, 0] = v / np.linalg.norm(v)
    j = 0
    matvecs, restarts = 0, 0
    while True:
        # extend the basis to m vectors
        while j < m:
            w = np.asarray(matvec(V[:, j]), dtype=float).copy()
            matvecs += 1
            h = _orthogonalize(V[:, : j + 1], w)
            T[: j + 1, j] = h
            T[j, : j + 1] = h
            beta = float(np.linalg.norm(w))
            if beta <= 1e-14 * scale and j + 1 >= n:
                beta_next = 0.0
                w[:] = 0.0
            elif beta <= 1e-14 * scale:
                # invariant subspace: continue with a fresh orthogonal direction
                w = rng.standard_normal(n)
                _orthogonalize(V[:, : j + 1], w)
                _orthogonalize(V[:, : j + 1], w)
                beta_next = 0.0
                w /= np.linalg.norm(w)
            else:
                beta_next = beta
                w /= beta
            V[:, j + 1] = w
            if j + 1 < m:
                T[j + 1, j] = T[j, j + 1] = beta_next
            j += 1
            if matvecs >= max_matvecs:
                break
        theta, S = np.linalg.eigh(0.5 * (T[:j, :j] + T[:j, :j].T))
        estimates = np.abs(beta_next * S[j - 1, :])
        if np.all(estimates[:k] < threshold):
            Y = V[:, :j] @ S[:, :k]
            residuals = np.array([
                np.linalg.norm(np.asarray(matvec(Y[:, i])) - theta[i] * Y[:, i]) / np.linalg.norm(Y[:, i])
                for i in range(k)
            ])
            matvecs += k
            if np.all(residuals < threshold):
                return LanczosResult(theta[:k].copy(), Y, residuals, {
                    "solver": "Lanczos", "matvecs": matvecs, "restarts": restarts,
                    "basis_size": m, "tol": tol, "scale": scale, "threshold": threshold,
                })
        if matvecs >= max_matvecs:
            raise NoConvergence(
                f"Lanczos did not converge in {matvecs} operator applications "
                f"(residual estimates {estimates[:k]}, threshold {threshold:.3g})"
            )
        # thick restart: lowest Ritz vectors plus the residual direction
        p = keep
        V[:, :p] = V[:, :j] @ S[:, :p]
        V[:, p] = V[:, j]
        T[:] = 0.0
        T[np.arange(p), np.arange(p)] = theta[:p]
        coupling = beta_next * S[j - 1, :p]
        T[p, :p] = T[:p, p] = coupling
        # the next extension step recomputes column p against the full basis
        j = p
        restarts += 1
