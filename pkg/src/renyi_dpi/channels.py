"""Quantum channels in Kraus form.

A :class:`KrausChannel` maps ``dim_in x dim_in`` operators to
``dim_out x dim_out`` operators. Choi matrices, Stinespring isometries and
adjoints are computed on demand from the Kraus list.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError, InvalidShapeError
from .linalg import as_matrix, as_square, kron, partial_trace
from .states import ginibre, make_rng, random_unitary_from


@dataclass(frozen=True)
class KrausChannel:
    dim_in: int
    dim_out: int
    kraus: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(K) for K in self.kraus)
        if not ops:
            raise InvalidShapeError("a channel needs at least one Kraus operator")
        for K in ops:
            if K.shape != (self.dim_out, self.dim_in):
                raise DimensionMismatchError(
                    f"Kraus operator of shape {K.shape}, expected {(self.dim_out, self.dim_in)}"
                )
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def from_kraus(cls, kraus: Sequence) -> "KrausChannel":
        ops = [as_matrix(K) for K in kraus]
        return cls(ops[0].shape[1], ops[0].shape[0], tuple(ops))

    def apply(self, X) -> np.ndarray:
        """``sum_i K_i X K_i^dagger``."""
        X = as_square(X)
        if X.shape[0] != self.dim_in:
            raise DimensionMismatchError(f"input has dimension {X.shape[0]}, channel expects {self.dim_in}")
        return sum(K @ X @ K.conj().T for K in self.kraus)

    __call__ = apply

    def adjoint_apply(self, Y) -> np.ndarray:
        """Hilbert-Schmidt adjoint ``sum_i K_i^dagger Y K_i``."""
        Y = as_square(Y)
        if Y.shape[0] != self.dim_out:
            raise DimensionMismatchError(f"input has dimension {Y.shape[0]}, adjoint expects {self.dim_out}")
        return sum(K.conj().T @ Y @ K for K in self.kraus)

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """The channel ``self o first`` (apply ``first``, then ``self``)."""
        if first.dim_out != self.dim_in:
            raise DimensionMismatchError("channel dimensions do not chain")
        return KrausChannel(first.dim_in, self.dim_out, tuple(A @ B for A in self.kraus for B in first.kraus))

    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| (x) Lambda(|i><j|)``."""
        d = self.dim_in
        C = np.zeros((d * self.dim_out,) * 2, dtype=np.complex128)
        for i in range(d):
            for j in range(d):
                E = np.zeros((d, d), dtype=np.complex128)
                E[i, j] = 1.0
                C += np.kron(E, self.apply(E))
        return C

    def to_json(self) -> dict:
        return {
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": [_rect_to_json(K) for K in self.kraus],
        }

    @classmethod
    def from_json(cls, obj) -> "KrausChannel":
        try:
            dim_in, dim_out = int(obj["dim_in"]), int(obj["dim_out"])
            kraus = tuple(_rect_from_json(k) for k in obj["kraus"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed channel JSON: {exc}") from exc
        return cls(dim_in, dim_out, kraus)


def _rect_to_json(K: np.ndarray) -> dict:
    rows, cols = K.shape
    out = {"re": K.real.tolist(), "im": K.imag.tolist()}
    if rows == cols:
        out = {"dim": rows, **out}
    else:
        out = {"rows": rows, "cols": cols, **out}
    return out


def _rect_from_json(obj) -> np.ndarray:
    if "rows" in obj:
        shape = (int(obj["rows"]), int(obj["cols"]))
    else:
        shape = (int(obj["dim"]),) * 2
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != shape or im.shape != shape:
        raise InvalidInputError(f"Kraus entries do not match shape {shape}")
    return re + 1j * im


def load_channel(path) -> KrausChannel:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read channel file {path}: {exc}") from exc
    return KrausChannel.from_json(obj)


def save_channel(path, channel: KrausChannel) -> None:
    Path(path).write_text(json.dumps(channel.to_json()))


class CPTPReport(NamedTuple):
    tp_residual: float
    choi_min_eig: float

    def is_valid(self, tol: float = 1e-9) -> bool:
        return self.tp_residual <= tol and self.choi_min_eig >= -tol


def validate_cptp(channel: KrausChannel) -> CPTPReport:
    """Trace-preservation residual ``||sum K^dagger K - I||_inf`` and the
    smallest Choi eigenvalue. Diagnostic only, never raises."""
    S = sum(K.conj().T @ K for K in channel.kraus)
    tp = float(np.linalg.norm(S - np.eye(channel.dim_in), 2))
    C = channel.choi()
    lam = float(np.linalg.eigvalsh(0.5 * (C + C.conj().T))[0])
    return CPTPReport(tp, lam)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(dim, dim, (np.eye(dim, dtype=np.complex128),))


def unitary_channel(U) -> KrausChannel:
    U = as_square(U)
    return KrausChannel(U.shape[0], U.shape[0], (U,))


def full_trace_channel(dim: int) -> KrausChannel:
    """Tr(.) as a channel into the one-dimensional output space."""
    eye = np.eye(dim, dtype=np.complex128)
    return KrausChannel(dim, 1, tuple(eye[i : i + 1, :] for i in range(dim)))


def partial_trace_channel(dims: Sequence[int], keep) -> KrausChannel:
    """Kraus form ``{I_keep (x) <e_j|}`` of the partial trace over the
    complement of ``keep``; agrees with :func:`linalg.partial_trace`."""
    dims = tuple(int(d) for d in dims)
    keep = sorted({int(k) for k in keep})
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    d_in = int(np.prod(dims))
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    keep_shape = tuple(dims[k] for k in keep)
    kraus = []
    for j in itertools.product(*(range(dims[t]) for t in traced)):
        K = np.zeros((d_keep, d_in), dtype=np.complex128)
        for idx in itertools.product(*(range(d) for d in dims)):
            if tuple(idx[t] for t in traced) != j:
                continue
            row = np.ravel_multi_index(tuple(idx[k] for k in keep), keep_shape) if keep else 0
            col = np.ravel_multi_index(idx, dims)
            K[row, col] = 1.0
        kraus.append(K)
    return KrausChannel(d_in, d_keep, tuple(kraus))


class PauliFamily(NamedTuple):
    dim: int
    ops: tuple


def generalized_pauli(d: int) -> PauliFamily:
    """Heisenberg-Weyl operators ``X^a Z^b`` for ``0 <= a, b < d``."""
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    shift = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)  # X|k> = |k+1 mod d>
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    ops = tuple(
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(d)
        for b in range(d)
    )
    return PauliFamily(d, ops)


def pauli_twirl_b(rho_ab, dims: tuple[int, int]) -> np.ndarray:
    """Uniform twirl of subsystem B by the generalized Paulis; yields ``rho_A (x) I/d_B``."""
    d_a, d_b = dims
    rho = as_square(rho_ab)
    if rho.shape[0] != d_a * d_b:
        raise DimensionMismatchError(f"state dimension {rho.shape[0]} != {d_a}*{d_b}")
    eye_a = np.eye(d_a, dtype=np.complex128)
    out = np.zeros_like(rho)
    for v in generalized_pauli(d_b).ops:
        W = np.kron(eye_a, v)
        out += W @ rho @ W.conj().T
    return out / d_b**2


def random_channel(dim_in: int, dim_out: int, kraus_count: int, seed: int = 0) -> KrausChannel:
    """Kraus operators cut from a column-orthonormalized Gaussian isometry."""
    return random_channel_from(make_rng(seed), dim_in, dim_out, kraus_count)


def random_channel_from(rng, dim_in: int, dim_out: int, kraus_count: int) -> KrausChannel:
    if kraus_count < 1 or dim_out * kraus_count < dim_in:
        raise InvalidShapeError(
            f"need kraus_count >= 1 and dim_out*kraus_count >= dim_in "
            f"(got {dim_out}*{kraus_count} < {dim_in})"
        )
    return channel_from_isometry_seed(ginibre(rng, dim_out * kraus_count, dim_in), dim_out)


def channel_from_isometry_seed(G: np.ndarray, dim_out: int) -> KrausChannel:
    """Orthonormalize the columns of G and split the rows into Kraus blocks."""
    q, r = np.linalg.qr(G)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    k = q.shape[0] // dim_out
    return KrausChannel(G.shape[1], dim_out, tuple(q[i * dim_out : (i + 1) * dim_out] for i in range(k)))


def random_unitary_channel_from(rng, dim: int) -> KrausChannel:
    return unitary_channel(random_unitary_from(rng, dim))


def stinespring_isometry(channel: KrausChannel) -> np.ndarray:
    """``V = sum_i K_i (x) |i>_env``, so that ``Tr_env(V X V^dagger) = Lambda(X)``."""
    k = len(channel.kraus)
    V = np.zeros((channel.dim_out * k, channel.dim_in), dtype=np.complex128)
    for i, K in enumerate(channel.kraus):
        e = np.zeros((k, 1))
        e[i, 0] = 1.0
        V += np.kron(K, e)
    return V


def environment_trace(V: np.ndarray, X, dim_out: int) -> np.ndarray:
    """``Tr_env(V X V^dagger)`` for a Stinespring isometry with output first."""
    k = V.shape[0] // dim_out
    return partial_trace(V @ as_square(X) @ V.conj().T, (dim_out, k), [0])


def tensor_identity(op, dim: int, *, left: bool = False) -> np.ndarray:
    """``op (x) I_dim`` (or ``I_dim (x) op`` with ``left=True``)."""
    eye = np.eye(dim, dtype=np.complex128)
    return kron(eye, op) if left else kron(op, eye)
