"""Density operators and strictly positive operators: validation, seeded
sampling and the JSON matrix schema.

Random streams come from numpy's Philox-4x64 counter-based generator. A
stream is fully determined by the algorithm name and the 64-bit seed, and
child seeds for campaigns are derived with :func:`derive_seed`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import (
    InvalidEpsilonError,
    InvalidInputError,
    InvalidRankError,
    NotPSDError,
    TraceNotOneError,
)
from .linalg import as_square, hermitize, kron

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
STRICT_FLOOR = 1e-12

RNG_ALGORITHM = "philox4x64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) % 2**64))


def derive_seed(master: int, *indices: int) -> int:
    """Child seed that depends only on the master seed and the index tuple."""
    ss = np.random.SeedSequence(int(master) % 2**64, spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """i.i.d. standard complex Gaussians (real part drawn first, then imaginary)."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def density_from_matrix(M, *, psd_tol: float = PSD_TOL, trace_tol: float = TRACE_TOL) -> np.ndarray:
    """Validate M as a density operator and return its Hermitian part.

    Raises NonHermitianError, NotPSDError or TraceNotOneError.
    """
    rho = hermitize(M)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > trace_tol:
        raise TraceNotOneError(f"trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < -psd_tol:
        raise NotPSDError(f"minimum eigenvalue {lam:.3e} is negative")
    return rho


def positive_from_matrix(M, *, strictly_positive: bool = True, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate M as a positive semidefinite (optionally strictly positive) operator."""
    S = hermitize(M)
    lam = np.linalg.eigvalsh(S)[0]
    if lam < -psd_tol:
        raise NotPSDError(f"minimum eigenvalue {lam:.3e} is negative")
    if strictly_positive and lam <= STRICT_FLOOR:
        raise NotPSDError(f"minimum eigenvalue {lam:.3e} is not strictly positive")
    return S


def is_density(M, tol: float = 1e-9) -> bool:
    try:
        density_from_matrix(M, psd_tol=tol, trace_tol=tol)
    except InvalidInputError:
        return False
    return True


def _normalize_gram(G: np.ndarray) -> np.ndarray:
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_density(dim: int, rank: int | None = None, seed: int = 0) -> np.ndarray:
    """Random state ``G G^dagger / Tr(G G^dagger)`` with G a dim x rank Ginibre matrix."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise InvalidRankError(f"rank must satisfy 1 <= rank <= dim, got rank={rank}, dim={dim}")
    return random_density_from(make_rng(seed), dim, rank)


def random_density_from(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    return _normalize_gram(ginibre(rng, dim, rank))


def random_unitary_from(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary: QR of a Ginibre matrix with the phases of R divided out."""
    q, r = np.linalg.qr(ginibre(rng, dim, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_unitary(dim: int, seed: int = 0) -> np.ndarray:
    return random_unitary_from(make_rng(seed), dim)


def random_pure_from(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = ginibre(rng, dim, 1)[:, 0]
    return v / np.linalg.norm(v)


def maximally_mixed(dim: int) -> np.ndarray:
    if dim < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {dim}")
    return np.eye(dim, dtype=np.complex128) / dim


def regularize(rho, eps: float) -> np.ndarray:
    """Depolarize: ``(1-eps) rho + eps I/d``. Minimum eigenvalue becomes >= eps/d."""
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilonError(f"eps must lie in (0, 1), got {eps}")
    rho = as_square(rho)
    return (1.0 - eps) * rho + eps * maximally_mixed(rho.shape[0])


def separable_sample(dim_a: int, dim_b: int, terms: int, seed: int = 0) -> np.ndarray:
    """Convex mixture of ``terms`` random product pure states, Dirichlet(1,...,1) weights."""
    if terms < 1:
        raise InvalidInputError(f"terms must be >= 1, got {terms}")
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((dim_a * dim_b,) * 2, dtype=np.complex128)
    for w in weights:
        psi = random_pure_from(rng, dim_a)
        phi = random_pure_from(rng, dim_b)
        v = np.kron(psi, phi)
        rho += w * np.outer(v, v.conj())
    return 0.5 * (rho + rho.conj().T)


def product_state(*factors) -> np.ndarray:
    return kron(*factors)


def partial_transpose(X, dims, sub: int) -> np.ndarray:
    """Transpose the indices of subsystem ``sub`` (used for the PPT check)."""
    X = as_square(X)
    dims = tuple(dims)
    n = len(dims)
    T = X.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[sub], axes[sub + n] = axes[sub + n], axes[sub]
    return T.transpose(axes).reshape(X.shape)


# --- JSON matrix schema: {"dim": n, "re": [[...]], "im": [[...]]} ---------------


def matrix_to_json(M) -> dict:
    M = as_square(M)
    return {"dim": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise InvalidInputError(f"matrix JSON entries do not form a {dim}x{dim} matrix")
    return as_square(re + 1j * im)


def load_matrix(path) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read matrix file {path}: {exc}") from exc
    return matrix_from_json(obj)


def save_matrix(path, M) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(M)))
