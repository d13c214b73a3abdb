"""Numerical kernel: unitary DFT ops, circulant eigenvalues, dominant
singular vector, and ridge-regularized least squares.

DFT convention. The unitary matrix F[k, n] = exp(-2j*pi*k*n/P) / sqrt(P)
is used for all forward/inverse transforms, while the eigenvalues of the
circulant data matrix are the UNNORMALIZED DFT of its first column. Under
this pairing the frequency-domain model

    Yf = diag(circulant_eigenvalues(x)) @ F_L @ H_L

holds exactly for noiseless circular propagation, where Yf is the forward
unitary DFT of the received matrix and F_L holds the first L columns of F.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ConvergenceError


@lru_cache(maxsize=None)
def dft_first_columns(P: int, L: int) -> np.ndarray:
    """First L columns of the P-point unitary DFT matrix (read-only cache)."""
    if not 1 <= L <= P:
        raise ValueError(f"need 1 <= L <= P, got L={L}, P={P}")
    k = np.arange(P)[:, None]
    n = np.arange(L)[None, :]
    F = np.exp(-2j * np.pi * k * n / P) / np.sqrt(P)
    F.flags.writeable = False
    return F


class DftOperator:
    """Forward/inverse unitary DFT on length-P vectors and P-row matrices."""

    def __init__(self, P: int):
        if P < 1:
            raise ValueError(f"transform size must be >= 1, got {P}")
        self.P = P
        self._root = np.sqrt(P)

    def forward(self, a: np.ndarray) -> np.ndarray:
        return np.fft.fft(np.asarray(a, dtype=complex), axis=0) / self._root

    def inverse(self, a: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.asarray(a, dtype=complex), axis=0) * self._root

    def first_columns(self, L: int) -> np.ndarray:
        return dft_first_columns(self.P, L)


def circulant_eigenvalues(x: np.ndarray) -> np.ndarray:
    """Eigenvalues of the circulant matrix whose first column is x, ordered
    by DFT bin: the unnormalized DFT of x."""
    return np.fft.fft(np.asarray(x, dtype=complex).ravel())


def top_left_singular_vector(
    Yf: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> np.ndarray:
    """Dominant left singular vector of Yf by power iteration on Yf Yf^H.

    Matrix-free: each step costs O(P * Nr). Starts from the first column of
    Yf (e_1 if that column is zero) and stops when the relative eigen-residual
    ||Yf Yf^H u - rho u|| <= tol * rho holds for rho = ||Yf^H u||^2.

    The returned vector has unit norm and unspecified global phase. Raises
    ConvergenceError (carrying the last iterate as ``estimate``) when the
    residual target is not met within max_iter steps, which signals a
    degenerate or near-tied singular spectrum.
    """
    Yf = np.asarray(Yf, dtype=complex)
    if Yf.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {Yf.shape}")
    norm0 = np.linalg.norm(Yf[:, 0])
    if norm0 > 0:
        u = Yf[:, 0] / norm0
    else:
        if not np.any(Yf):
            raise ValueError("matrix is zero; no dominant singular vector")
        u = np.zeros(Yf.shape[0], dtype=complex)
        u[0] = 1.0
    for _ in range(max_iter):
        v = Yf.conj().T @ u
        w = Yf @ v
        rho = np.linalg.norm(v) ** 2
        if rho == 0.0:
            # u fell in the left null space: restart from a fresh direction
            u = np.roll(u, 1)
            continue
        if np.linalg.norm(w - rho * u) <= tol * rho:
            return u
        u = w / np.linalg.norm(w)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps "
        "(near-tied dominant singular values?)",
        estimate=u,
    )


def regularized_ls(A: np.ndarray, Yf: np.ndarray, mu: float) -> np.ndarray:
    """Minimizer of ||Yf - A H||_F^2 + mu ||H||_F^2 via the L x L normal
    equations (A^H A + mu I) H = A^H Yf.

    With mu = 0 the system is solvable only for full-column-rank A;
    numpy raises LinAlgError on an exactly singular Gram matrix.
    """
    if mu < 0:
        raise ValueError(f"regularization must be >= 0, got {mu}")
    A = np.asarray(A, dtype=complex)
    gram = A.conj().T @ A
    gram[np.diag_indices_from(gram)] += mu
    return np.linalg.solve(gram, A.conj().T @ Yf)
