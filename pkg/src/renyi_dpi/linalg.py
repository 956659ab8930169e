"""Dense complex linear algebra: Hermitian eigendecomposition and the
functional calculus that every divergence formula is assembled from.

Matrices are plain ``numpy.ndarray`` objects (complex128). Tensor products
follow the row-major convention: in ``kron(A, B)`` the first factor is the
most significant index, and ``partial_trace`` uses the same ordering.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    InvalidPError,
    NegativeEigenvalueError,
    NonHermitianError,
    SingularMatrixError,
)

HERMITICITY_TOL = 1e-10
EIG_TOL = 1e-10
POSITIVITY_FLOOR = 1e-12


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.conj().T


def as_matrix(X) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    M = np.asarray(X, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    return M


def as_square(X) -> np.ndarray:
    M = as_matrix(X)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {M.shape}")
    return M


def hermitize(X, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Return ``(X + X^dagger)/2`` after checking X is Hermitian up to ``tol``
    relative to its spectral norm (absolute below norm 1)."""
    M = as_square(X)
    scale = max(1.0, np.linalg.norm(M, 2))
    if np.linalg.norm(M - M.conj().T, 2) > tol * scale:
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    return 0.5 * (M + M.conj().T)


def hermitian_eig(A, tol: float = HERMITICITY_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    H = hermitize(A, tol)
    w, U = np.linalg.eigh(H)
    return EigenDecomposition(w, U)


def _psd_eigs(A, eig_tol: float) -> EigenDecomposition:
    w, U = hermitian_eig(A)
    scale = max(1.0, abs(w[-1]) if w.size else 1.0)
    if w.size and w[0] < -eig_tol * scale:
        raise NegativeEigenvalueError(f"matrix has eigenvalue {w[0]:.3e} < 0")
    return EigenDecomposition(np.clip(w, 0.0, None), U)


def matrix_function(A, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    w, U = hermitian_eig(A)
    return (U * f(w)) @ U.conj().T


def matrix_power(
    A,
    p: float,
    *,
    eig_tol: float = EIG_TOL,
    floor: float = POSITIVITY_FLOOR,
    support_only: bool = False,
) -> np.ndarray:
    """``A**p`` for positive semidefinite A.

    Eigenvalues in ``[-eig_tol*||A||, 0)`` are clipped to zero. Zero
    eigenvalues map to zero for every ``p >= 0`` (powers live on the support,
    so ``A**0`` is the support projector). Negative ``p`` needs
    ``min eig > floor`` unless ``support_only`` is set, in which case the
    power is taken on the support and the kernel maps to zero.
    """
    w, U = _psd_eigs(A, eig_tol)
    on_support = w > (floor if p < 0 else 0.0)
    if p < 0 and not support_only and not np.all(on_support):
        raise SingularMatrixError(
            f"negative power {p} of a matrix with eigenvalue {w[0]:.3e} <= {floor:g}"
        )
    wp = np.zeros_like(w)
    wp[on_support] = w[on_support] ** p
    return (U * wp) @ U.conj().T


def matrix_log(A, *, strict: bool = True, floor: float = POSITIVITY_FLOOR) -> np.ndarray:
    """Natural matrix logarithm.

    With ``strict=False`` the log is restricted to the support of A, i.e. the
    kernel contributes zero (the ``0 log 0 = 0`` convention).
    """
    w, U = _psd_eigs(A, EIG_TOL)
    on_support = w > floor
    if strict and not np.all(on_support):
        raise SingularMatrixError(f"log of a matrix with eigenvalue {w[0]:.3e}")
    lw = np.zeros_like(w)
    lw[on_support] = np.log(w[on_support])
    return (U * lw) @ U.conj().T


def schatten_norm(X, p: float = 2) -> float:
    """Schatten p-norm; ``p=np.inf`` gives the largest singular value."""
    if not p >= 1:
        raise InvalidPError(f"Schatten norm needs p >= 1, got {p}")
    s = np.linalg.svd(as_matrix(X), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s**p) ** (1.0 / p))


def trace_abs_power(X, r: float) -> float:
    """``Tr |X|^r`` from the singular values of X."""
    s = np.linalg.svd(as_matrix(X), compute_uv=False)
    return float(np.sum(s**r))


def op_norm(X) -> float:
    return float(np.linalg.norm(as_matrix(X), 2))


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices (first factor most significant)."""
    out = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        out = np.kron(out, as_matrix(op))
    return out


def hs_inner(X, Y) -> complex:
    """Hilbert-Schmidt inner product ``Tr(X^dagger Y)``."""
    X, Y = as_matrix(X), as_matrix(Y)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"shapes {X.shape} and {Y.shape} differ")
    return complex(np.vdot(X, Y))


def _check_dims(X: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionMismatchError(f"invalid subsystem dimensions {dims}")
    n = int(np.prod(dims))
    if X.shape != (n, n):
        raise DimensionMismatchError(f"matrix shape {X.shape} does not match dims {dims}")
    return dims


def partial_trace(X, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; ``keep`` is a
    collection of subsystem indices, returned in ascending order.
    """
    X = as_square(X)
    dims = _check_dims(X, dims)
    n = len(dims)
    keep = sorted({int(k) for k in keep})
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    T = X.reshape(dims + dims)
    # contract traced pairs from the highest index down so axis numbers stay valid
    for i in sorted(traced, reverse=True):
        m = T.ndim // 2
        T = np.trace(T, axis1=i, axis2=i + m)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return T.reshape(d_keep, d_keep)


def is_hermitian(X, tol: float = HERMITICITY_TOL) -> bool:
    M = as_square(X)
    return bool(np.linalg.norm(M - M.conj().T, 2) <= tol * max(1.0, np.linalg.norm(M, 2)))


def min_eigenvalue(A) -> float:
    return float(np.linalg.eigvalsh(hermitize(A))[0])
