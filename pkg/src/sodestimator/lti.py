"""Continuous-time LTI plant models and their zero-order-hold discretization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "ContinuousLTI",
    "DiscreteLTI",
    "matrix_exponential",
    "discretize",
]

_SYM_TOL = 1e-12


def _as_matrix(value, shape, name):
    """Promote a scalar to ``value * I`` and check the shape of a matrix."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        if shape[0] != shape[1]:
            raise ValueError(f"{name}: scalar only allowed for square matrices")
        arr = float(arr) * np.eye(shape[0])
    if arr.shape != shape:
        raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite entries")
    return arr


@dataclass(frozen=True)
class ContinuousLTI:
    """Plant ``dx/dt = A x + w``, ``y = C x + v``.

    ``Q`` is the white process-noise intensity and ``R`` the covariance of
    the sampled measurement noise.  Scalars given for ``Q`` or ``R`` are
    expanded to multiples of the identity.
    """

    A: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} columns but A is {n}x{n}")
        p = C.shape[0]
        Q = _as_matrix(self.Q, (n, n), "Q")
        R = _as_matrix(self.R, (p, p), "R")
        if not np.all(np.isfinite(A)) or not np.all(np.isfinite(C)):
            raise ValueError("A and C must be finite")
        if np.max(np.abs(Q - Q.T)) > _SYM_TOL:
            raise ValueError("Q is not symmetric")
        if np.max(np.abs(R - R.T)) > _SYM_TOL:
            raise ValueError("R is not symmetric")
        if np.min(np.linalg.eigvalsh(Q)) < -_SYM_TOL:
            raise ValueError("Q is not positive semidefinite")
        if np.min(np.linalg.eigvalsh(R)) <= 0.0:
            raise ValueError("R is not positive definite")
        for name, arr in (("A", A), ("C", C), ("Q", Q), ("R", R)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class DiscreteLTI:
    """Exact sampled model ``x[k+1] = Ad x[k] + w[k]``, ``w[k] ~ N(0, Qd)``."""

    Ad: np.ndarray
    C: np.ndarray
    Qd: np.ndarray
    R: np.ndarray
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"sampling period must be positive, got {self.T}")
        for name in ("Ad", "C", "Qd", "R"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.Ad.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]


def matrix_exponential(M):
    """Return ``exp(M)`` for a finite square matrix.

    Scaling and squaring with a Pade approximant (``scipy.linalg.expm``).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix_exponential needs a square matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix_exponential: non-finite entries")
    return scipy.linalg.expm(M)


def discretize(model: ContinuousLTI, T: float) -> DiscreteLTI:
    """Zero-order-hold discretization with Van Loan's process-noise integral.

    Parameters
    ----------
    model : ContinuousLTI
        Continuous plant.
    T : float
        Sampling period in seconds.

    Returns
    -------
    DiscreteLTI
        ``Ad = exp(A T)`` and ``Qd = int_0^T exp(A s) Q exp(A' s) ds``.
    """
    if not T > 0:
        raise ValueError(f"sampling period must be positive, got {T}")
    n = model.n
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -model.A
    block[:n, n:] = model.Q
    block[n:, n:] = model.A.T
    F = matrix_exponential(block * T)
    Ad = F[n:, n:].T
    Qd = Ad @ F[:n, n:]
    Qd = 0.5 * (Qd + Qd.T)
    return DiscreteLTI(Ad=Ad, C=model.C, Qd=Qd, R=model.R, T=float(T))
