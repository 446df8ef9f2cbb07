"""Graph Laplacian spectra and the spectral-energy stopping size.

The stopping rule keeps k nodes where k is the smallest count whose
cumulative eigenvalue mass reaches a fraction alpha of the total:

    Energy_k = (lambda_1 + ... + lambda_k) / (lambda_1 + ... + lambda_n)

with eigenvalues sorted ascending by default. Post-contraction edge weights
can be negative, so the Laplacian uses absolute weights by default to stay
positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maxcut import MaxCutGraph


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of a symmetric matrix, sorted ascending."""

    eigenvalues: np.ndarray
    total: float

    def __post_init__(self) -> None:
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        s = float(np.sum(self.eigenvalues))
        if abs(s - self.total) > 1e-8 * max(1.0, abs(s)):
            raise ValueError(f"total {self.total} does not match eigenvalue sum {s}")

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def laplacian(graph: MaxCutGraph, weight_mode: str = "absolute") -> np.ndarray:
    """L = diag(A 1) - A where A uses |w| ("absolute", default) or w ("raw")."""
    if weight_mode not in ("absolute", "raw"):
        raise ValueError(f"weight_mode must be 'absolute' or 'raw', got {weight_mode!r}")
    n = graph.n_nodes
    A = np.zeros((n, n))
    for (i, j), w in graph.edges.items():
        v = abs(w) if weight_mode == "absolute" else w
        A[i, j] += v
        A[j, i] += v
    return np.diag(A.sum(axis=1)) - A


def symmetric_eigenvalues(M: np.ndarray, tol: float = 1e-9, max_sweeps: int = 100) -> Spectrum:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every off-diagonal pair in row order until the off-diagonal
    Frobenius norm falls below tol * max(1, ||M||_F). Raises RuntimeError with
    the residual if max_sweeps is exhausted.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if n > 0 and float(np.max(np.abs(M - M.T))) > 1e-10:
        raise ValueError("matrix is not symmetric within 1e-10")
    if n == 0:
        return Spectrum(eigenvalues=np.array([]), total=0.0)

    A = (M + M.T) / 2.0
    threshold = tol * max(1.0, float(np.linalg.norm(A)))

    def off_norm() -> float:
        off = A - np.diag(np.diag(A))
        return float(np.linalg.norm(off))

    residual = off_norm()
    sweeps = 0
    while residual > threshold:
        if sweeps >= max_sweeps:
            raise RuntimeError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
                f"(off-diagonal residual {residual:.3e}, threshold {threshold:.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                A[[p, q], :] = rot.T @ A[[p, q], :]
                A[:, [p, q]] = A[:, [p, q]] @ rot
        # symmetrize rounding drift so the termination test stays honest
        A = (A + A.T) / 2.0
        sweeps += 1
        residual = off_norm()
    eigenvalues = np.sort(np.diag(A))
    return Spectrum(eigenvalues=eigenvalues, total=float(np.sum(eigenvalues)))


def select_target_size(spectrum: Spectrum, alpha: float, order: str = "ascending") -> int:
    """Smallest k whose cumulative eigenvalue fraction reaches alpha.

    ``order`` chooses whether the cumulative sum starts from the smallest
    ("ascending", default) or largest ("descending") eigenvalues. A zero
    (or non-positive) total yields k = n.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if order not in ("ascending", "descending"):
        raise ValueError(f"order must be 'ascending' or 'descending', got {order!r}")
    n = spectrum.n
    if n == 0:
        raise ValueError("spectrum is empty")
    if spectrum.total <= 0.0:
        return n
    values = spectrum.eigenvalues if order == "ascending" else spectrum.eigenvalues[::-1]
    cumulative = np.cumsum(values)
    for k in range(1, n + 1):
        if cumulative[k - 1] / spectrum.total >= alpha:
            return k
    return n
