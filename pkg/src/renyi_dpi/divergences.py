"""Quantum Renyi-type divergences, the alpha-z trace functional and the
classification of the (alpha, z) plane by data-processing monotonicity.

All logarithms are natural. A divergence evaluates to ``math.inf`` exactly
when the support of rho is not contained in the support of sigma.

By default sigma must be strictly positive whenever the formula needs a
negative power of it (``strict=True``). With ``strict=False`` negative powers
are taken on the support of sigma instead.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel
from .errors import InvalidParamsError, SingularSigmaError
from .linalg import as_square, hermitize, matrix_log, matrix_power

SUPPORT_EIG_CUTOFF = 1e-10
SUPPORT_TOL = 1e-9
STRICT_FLOOR = 1e-12

# test hook: the property-suite self-test flips a sign inside the trace functional
BUG_ENV = "RENYI_DPI_INJECT_BUG"


@dataclass(frozen=True)
class AlphaZParams:
    alpha: float
    z: float

    def __post_init__(self):
        a, z = float(self.alpha), float(self.z)
        if not (math.isfinite(a) and math.isfinite(z)):
            raise InvalidParamsError("alpha and z must be finite")
        if abs(a - 1.0) < 1e-9:
            raise InvalidParamsError("alpha = 1 is the Umegaki case; use umegaki()")
        if z <= 0:
            raise InvalidParamsError(f"z must be positive, got {z}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "z", z)


def _as_params(params) -> AlphaZParams:
    if isinstance(params, AlphaZParams):
        return params
    alpha, z = params
    return AlphaZParams(alpha, z)


class RegionClass(enum.Enum):
    MonotoneCase1 = "MonotoneCase1"
    MonotoneCase2 = "MonotoneCase2"
    MonotoneCase3 = "MonotoneCase3"
    NotMonotone = "NotMonotone"

    @property
    def monotone(self) -> bool:
        return self is not RegionClass.NotMonotone


def classify_region(alpha: float, z: float) -> RegionClass:
    """Which monotonicity case (alpha, z) falls in; boundaries are closed.

    Only ``alpha > 0`` is classified.
    """
    if not alpha > 0 or abs(alpha - 1.0) < 1e-9 or not z > 0:
        raise InvalidParamsError(f"classification needs alpha > 0, alpha != 1, z > 0; got ({alpha}, {z})")
    if alpha < 1:
        if z >= max(alpha, 1 - alpha):
            return RegionClass.MonotoneCase1
    elif alpha <= 2:
        if alpha / 2 <= z <= alpha:
            return RegionClass.MonotoneCase2
    # alpha == 2 is covered by case 2 above whenever case 3 would also apply
    if alpha >= 2 and alpha - 1 <= z <= alpha:
        return RegionClass.MonotoneCase3
    return RegionClass.NotMonotone


def in_necessary_region(alpha: float, z: float) -> bool:
    """``1 < alpha <= 2`` and ``alpha/2 <= z <= alpha``."""
    return 1 < alpha <= 2 and alpha / 2 <= z <= alpha


def _kernel_projector(sigma: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(hermitize(sigma))
    K = U[:, w <= SUPPORT_EIG_CUTOFF]
    return K @ K.conj().T


def support_violated(rho, sigma) -> bool:
    """True iff ``||P_ker(sigma) rho P_ker(sigma)|| > 1e-9``."""
    P = _kernel_projector(sigma)
    if not P.any():
        return False
    return bool(np.linalg.norm(P @ as_square(rho) @ P, 2) > SUPPORT_TOL)


def _sigma_ready(sigma, needs_inverse: bool, strict: bool) -> np.ndarray:
    sigma = hermitize(sigma)
    if needs_inverse and strict:
        lam = np.linalg.eigvalsh(sigma)[0]
        if lam <= STRICT_FLOOR:
            raise SingularSigmaError(f"sigma has eigenvalue {lam:.3e}; strictly positive sigma required")
    return sigma


def umegaki(rho, sigma) -> float:
    """``Tr(rho log rho - rho log sigma)`` with ``0 log 0 = 0``."""
    rho, sigma = hermitize(rho), hermitize(sigma)
    if support_violated(rho, sigma):
        return math.inf
    w = np.linalg.eigvalsh(rho)
    w = w[w > SUPPORT_EIG_CUTOFF]
    ent = float(np.sum(w * np.log(w)))
    cross = float(np.trace(rho @ matrix_log(sigma, strict=False, floor=SUPPORT_EIG_CUTOFF)).real)
    return ent - cross


def _log_over(value: float, alpha: float) -> float:
    if value <= 0.0:
        return math.inf
    return math.log(value) / (alpha - 1.0)


def renyi_alpha(rho, sigma, alpha: float, *, strict: bool = True) -> float:
    """Petz-type Renyi divergence ``log Tr(rho^a sigma^(1-a)) / (a-1)``."""
    alpha = float(alpha)
    if abs(alpha - 1) < 1e-9:
        raise InvalidParamsError("alpha = 1 is the Umegaki case")
    rho = hermitize(rho)
    sigma = _sigma_ready(sigma, alpha > 1, strict)
    if support_violated(rho, sigma):
        return math.inf
    q = float(np.trace(matrix_power(rho, alpha) @ matrix_power(sigma, 1 - alpha, support_only=True)).real)
    return _log_over(q, alpha)


def sandwiched(rho, sigma, alpha: float, *, strict: bool = True) -> float:
    """Sandwiched Renyi divergence
    ``log Tr[(sigma^g rho sigma^g)^alpha] / (alpha-1)`` with ``g = (1-alpha)/(2 alpha)``."""
    alpha = float(alpha)
    if abs(alpha - 1) < 1e-9:
        raise InvalidParamsError("alpha = 1 is the Umegaki case")
    rho = hermitize(rho)
    sigma = _sigma_ready(sigma, (1 - alpha) / alpha < 0, strict)
    if support_violated(rho, sigma):
        return math.inf
    s = matrix_power(sigma, (1 - alpha) / (2 * alpha), support_only=True)
    M = s @ rho @ s
    q = float(np.trace(matrix_power(M, alpha, support_only=True)).real)
    return _log_over(q, alpha)


def psi_functional(rho, sigma, params, *, strict: bool = True) -> float:
    """``Tr[(sigma^((1-a)/2z) rho^(a/z) sigma^((1-a)/2z))^z]``.

    Evaluated as ``sum s_i^(2z)`` over the singular values of
    ``rho^(a/2z) sigma^((1-a)/2z)``, which keeps the result non-negative.
    Returns ``math.inf`` on a support violation.
    """
    p = _as_params(params)
    a, z = p.alpha, p.z
    rho = hermitize(rho)
    sigma = _sigma_ready(sigma, (1 - a) < 0, strict)
    if support_violated(rho, sigma):
        return math.inf
    s_exp = (1 - a) / (2 * z)
    if os.environ.get(BUG_ENV) == "psi-sign":
        s_exp = -s_exp
    X = matrix_power(rho, a / (2 * z)) @ matrix_power(sigma, s_exp, support_only=True)
    sv = np.linalg.svd(X, compute_uv=False)
    return float(np.sum(sv ** (2 * z)))


def alpha_z(rho, sigma, params, *, strict: bool = True) -> float:
    """alpha-z Renyi relative entropy ``log(Psi) / (alpha - 1)``."""
    p = _as_params(params)
    psi = psi_functional(rho, sigma, p, strict=strict)
    if math.isinf(psi):
        return math.inf
    return _log_over(psi, p.alpha)


def dpi_gap(rho, sigma, channel: KrausChannel, params, *, strict: bool = True) -> float:
    """``D(rho||sigma) - D(Lambda rho || Lambda sigma)`` for the alpha-z divergence."""
    p = _as_params(params)
    before = alpha_z(rho, sigma, p, strict=strict)
    after = alpha_z(channel.apply(rho), channel.apply(sigma), p, strict=strict)
    return before - after


def sandwich_operator(
    rho, sigma, alpha: float, z: float, outer: float, *, support_only: bool = False
) -> np.ndarray:
    """``sigma^outer (sigma^g rho^(a/z) sigma^g)^(z-1) sigma^outer`` with ``g = (1-a)/(2z)``.

    With ``outer = (1-z)/(2z)`` this is the maximizer of the variational
    formula and the operator entering the necessary saturation condition;
    with ``outer = (1-a)/(2z)`` it is the sufficient-condition operator.
    Inputs must be strictly positive when any exponent is negative, unless
    ``support_only`` is set (negative powers then act on supports).
    """
    rho, sigma = hermitize(rho), hermitize(sigma)
    g = matrix_power(sigma, (1 - alpha) / (2 * z), support_only=support_only)
    M = g @ matrix_power(rho, alpha / z) @ g
    o = matrix_power(sigma, outer, support_only=support_only)
    out = o @ matrix_power(M, z - 1, support_only=support_only) @ o
    return 0.5 * (out + out.conj().T)
