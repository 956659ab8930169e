"""Saturation of the data-processing inequality: operator identities that
equality forces, sufficient product-state conditions, Petz recovery and the
quantitative Umegaki recovery bound.

Residuals are dimensionless: operator-norm ratios for Hermitian identities
and Frobenius ratios for the non-Hermitian alpha-RRE identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channels import KrausChannel, partial_trace_channel
from .divergences import _as_params, alpha_z, in_necessary_region, sandwich_operator, umegaki
from .errors import DimensionMismatchError, InvalidParamsError, SingularMatrixError
from .linalg import POSITIVITY_FLOOR, as_square, hermitize, kron, matrix_power, partial_trace, schatten_norm


def petz_recovery(sigma, channel: KrausChannel) -> KrausChannel:
    """Kraus form ``{sigma^(1/2) K_i^dag Lambda(sigma)^(-1/2)}`` of the Petz map."""
    sigma = hermitize(sigma)
    root = matrix_power(sigma, 0.5)
    inv_root = matrix_power(channel.apply(sigma), -0.5)
    kraus = tuple(root @ K.conj().T @ inv_root for K in channel.kraus)
    return KrausChannel(channel.dim_out, channel.dim_in, kraus)


def _relative_gap(lhs: np.ndarray, rhs: np.ndarray, ord=2) -> float:
    denom = np.linalg.norm(lhs, ord)
    diff = np.linalg.norm(lhs - rhs, ord)
    return float(diff / denom) if denom > 0 else float(diff)


def _condition_residual(rho, sigma, channel: KrausChannel, alpha: float, z: float, outer: float) -> float:
    lhs = sandwich_operator(rho, sigma, alpha, z, outer)
    out = sandwich_operator(channel.apply(rho), channel.apply(sigma), alpha, z, outer)
    return _relative_gap(lhs, channel.adjoint_apply(out))


def necessary_residual(rho, sigma, channel: KrausChannel, params) -> float:
    """Relative operator-norm residual of the identity
    ``s^c (s^g rho^(a/z) s^g)^(z-1) s^c = Lambda^*(same in Lambda(rho), Lambda(sigma))``
    with ``c = (1-z)/2z`` and ``g = (1-a)/2z``, which every saturating triple obeys."""
    p = _as_params(params)
    if not in_necessary_region(p.alpha, p.z):
        raise InvalidParamsError(f"(alpha, z) = ({p.alpha}, {p.z}) needs 1 < alpha <= 2 and alpha/2 <= z <= alpha")
    return _condition_residual(rho, sigma, channel, p.alpha, p.z, (1 - p.z) / (2 * p.z))


def sandwiched_residual(rho, sigma, channel: KrausChannel, alpha: float) -> float:
    """Relative residual of ``s^g (s^g rho s^g)^(a-1) s^g = Lambda^*(...)``, ``g = (1-a)/2a``."""
    alpha = float(alpha)
    if not alpha > 0.5 or abs(alpha - 1) < 1e-9:
        raise InvalidParamsError(f"alpha must exceed 1/2 and differ from 1, got {alpha}")

    def side(r, s):
        g = matrix_power(s, (1 - alpha) / (2 * alpha))
        M = g @ hermitize(r) @ g
        out = g @ matrix_power(0.5 * (M + M.conj().T), alpha - 1) @ g
        return 0.5 * (out + out.conj().T)

    lhs = side(rho, sigma)
    rhs = channel.adjoint_apply(side(channel.apply(rho), channel.apply(sigma)))
    return _relative_gap(lhs, rhs)


def alpha_rre_residual(rho, sigma, channel: KrausChannel, t: float) -> float:
    """Relative Frobenius residual of ``Lambda^*(Lambda(s)^-t Lambda(r)^t)`` against ``s^-t r^t``."""
    lhs = channel.adjoint_apply(
        matrix_power(channel.apply(sigma), -t) @ matrix_power(channel.apply(rho), t)
    )
    rhs = matrix_power(sigma, -t) @ matrix_power(rho, t)
    return _relative_gap(rhs, lhs, "fro")


@dataclass
class SaturationReport:
    gap: float
    necessary_residual: float
    condition_exponent_variant: str
    k_rho: float | None = None
    entropy_identity_residual: float | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def num(x):
            if x is None:
                return None
            return x if math.isfinite(x) else str(x)

        return {
            "gap": num(self.gap),
            "necessary_residual": num(self.necessary_residual),
            "condition_exponent_variant": self.condition_exponent_variant,
            "k_rho": num(self.k_rho),
            "entropy_identity_residual": num(self.entropy_identity_residual),
            **self.meta,
        }


def saturation_report(rho, sigma, channel: KrausChannel, params, **meta) -> SaturationReport:
    """DPI gap together with the necessary-condition residual."""
    p = _as_params(params)
    gap = alpha_z(rho, sigma, p) - alpha_z(channel.apply(rho), channel.apply(sigma), p)
    res = necessary_residual(rho, sigma, channel, p)
    return SaturationReport(gap, res, "necessary", meta={"alpha": p.alpha, "z": p.z, **meta})


def _split_dims(X, dims) -> tuple[int, int]:
    d_a, d_b = (int(d) for d in dims)
    if as_square(X).shape[0] != d_a * d_b:
        raise DimensionMismatchError(f"operator dimension {X.shape[0]} != {d_a}*{d_b}")
    return d_a, d_b


def sufficient_condition_check(rho_ab, sigma_ab, dims, params, *, structure: str = "product") -> SaturationReport:
    """Check the product/separable sufficient condition for saturation under Tr_B.

    The report's ``necessary_residual`` carries the hypothesis residual
    ``||S_AB - S_A (x) I_B|| / ||S_AB||`` of the outer-exponent ``(1-a)/2z``
    operator. ``gap`` is ``D(rho_AB||sigma_AB) - D(rho_A||sigma_A)``. For
    ``structure='product'`` the entropy identity includes ``k_rho``; for
    ``'separable'`` it is plain saturation.
    """
    if structure not in ("product", "separable"):
        raise InvalidParamsError(f"structure must be 'product' or 'separable', got {structure!r}")
    p = _as_params(params)
    a, z = p.alpha, p.z
    d_a, d_b = _split_dims(rho_ab, dims)
    _split_dims(sigma_ab, dims)
    rho_ab, sigma_ab = hermitize(rho_ab), hermitize(sigma_ab)
    rho_a = partial_trace(rho_ab, (d_a, d_b), [0])
    sigma_a = partial_trace(sigma_ab, (d_a, d_b), [0])

    outer = (1 - a) / (2 * z)
    S_ab = sandwich_operator(rho_ab, sigma_ab, a, z, outer, support_only=True)
    S_a = sandwich_operator(rho_a, sigma_a, a, z, outer, support_only=True)
    hyp = _relative_gap(S_ab, kron(S_a, np.eye(d_b)))

    d_ab = alpha_z(rho_ab, sigma_ab, p, strict=False)
    d_a_val = alpha_z(rho_a, sigma_a, p, strict=False)
    gap = d_ab - d_a_val
    k_rho = None
    if structure == "product":
        rho_b = partial_trace(rho_ab, (d_a, d_b), [1])
        k_rho = math.log(float(np.trace(matrix_power(rho_b, a / z)).real)) / (a - 1)
        ident = abs(gap - k_rho)
    else:
        ident = abs(gap)
    return SaturationReport(
        gap, hyp, "sufficient", k_rho, ident,
        meta={"alpha": a, "z": z, "dims": [d_a, d_b], "structure": structure},
    )


class ErrorBoundCheck(NamedTuple):
    gap: float
    bound: float
    slack: float


def umegaki_error_bound_check(rho, sigma, dims) -> ErrorBoundCheck:
    """Compare the Umegaki DPI gap under Tr_B with
    ``(pi/8)^4 ||rho^-1||^-2 ||R_rho(sigma_A) - sigma||_1^4``,
    where ``R_rho`` is the Petz map of the partial trace built on rho."""
    d_a, d_b = _split_dims(rho, dims)
    rho, sigma = hermitize(rho), hermitize(sigma)
    ptr = partial_trace_channel((d_a, d_b), [0])
    gap = umegaki(rho, sigma) - umegaki(ptr.apply(rho), ptr.apply(sigma))
    lam_min = float(np.linalg.eigvalsh(rho)[0])
    if lam_min <= POSITIVITY_FLOOR:
        raise SingularMatrixError(f"rho must be invertible (minimum eigenvalue {lam_min:.3e})")
    recovered = petz_recovery(rho, ptr).apply(ptr.apply(sigma))
    dist = schatten_norm(recovered - sigma, 1)
    bound = (math.pi / 8) ** 4 * lam_min**2 * dist**4
    return ErrorBoundCheck(gap, bound, gap - bound)
