"""Trace functionals, the variational formula for Psi, two trace inequalities
and randomized convexity probes.

The probes never prove anything. They evaluate a functional at seeded random
pairs and at convex combinations of them and report the worst signed
violation of the claimed convexity (or concavity).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from .divergences import AlphaZParams, RegionClass, _as_params, classify_region, psi_functional, sandwich_operator
from .errors import ExponentMismatchError, InvalidParamsError, InvalidPError, InvalidRegimeError, SingularMatrixError
from .linalg import as_matrix, as_square, hermitize, matrix_power, trace_abs_power
from .states import derive_seed, ginibre, make_rng, random_density_from

PROBE_TOL = 1e-8
SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class TraceFunctionalParams:
    """Exponents and twist for ``(A, B) -> Tr[(B^(q/2) K^dag A^p K B^(q/2))^s]``."""

    p: float
    q: float
    s: float
    K: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.s > 0:
            raise InvalidParamsError(f"s must be positive, got {self.s}")
        K = as_square(self.K)
        smin = np.linalg.svd(K, compute_uv=False).min()
        if smin <= SINGULAR_TOL:
            raise InvalidParamsError(f"K must be invertible (smallest singular value {smin:.3e})")
        object.__setattr__(self, "K", K)

    @classmethod
    def for_psi(cls, alpha: float, z: float, dim: int) -> "TraceFunctionalParams":
        """The substitution under which the functional becomes Psi."""
        return cls(alpha / z, (1 - alpha) / z, z, np.eye(dim, dtype=np.complex128))


def general_trace_functional(A, B, tf: TraceFunctionalParams) -> float:
    # X^dag X = B^(q/2) K^dag A^p K B^(q/2), so the trace is sum of sv^(2s)
    A, B = hermitize(A), hermitize(B)
    X = matrix_power(A, tf.p / 2) @ tf.K @ matrix_power(B, tf.q / 2)
    sv = np.linalg.svd(X, compute_uv=False)
    return float(np.sum(sv ** (2 * tf.s)))


# --- variational formula ------------------------------------------------------


def _require_variational(params) -> AlphaZParams:
    p = _as_params(params)
    if not (p.alpha > 1 and p.z > 1):
        raise InvalidParamsError(f"the variational formula needs alpha > 1 and z > 1, got ({p.alpha}, {p.z})")
    return p


def f_functional(H, rho, sigma, params) -> float:
    """``z Tr(s^c rho^(a/z) s^c H) - (z-1) Tr[(s^d H s^d)^(z/(z-1))]``
    with ``c = (z-a)/2z`` and ``d = (z-1)/2z``; bounded above by Psi."""
    p = _require_variational(params)
    a, z = p.alpha, p.z
    rho, sigma, H = hermitize(rho), hermitize(sigma), hermitize(H)
    c = matrix_power(sigma, (z - a) / (2 * z))
    first = float(np.trace(c @ matrix_power(rho, a / z) @ c @ H).real)
    d = matrix_power(sigma, (z - 1) / (2 * z))
    second = float(np.trace(matrix_power(d @ H @ d, z / (z - 1))).real)
    return z * first - (z - 1) * second


def optimal_H(rho, sigma, params) -> np.ndarray:
    """Closed-form maximizer of :func:`f_functional`."""
    p = _require_variational(params)
    return sandwich_operator(rho, sigma, p.alpha, p.z, (1 - p.z) / (2 * p.z))


@dataclass
class ProbeReport:
    target: str
    params: dict
    trials: int
    max_violation: float
    verdict: str
    worst_instance_seed: int
    certified: bool = True  # False when the sampled inputs may fall outside the claim's hypotheses

    def to_json(self) -> dict:
        mv = self.max_violation
        return {
            "target": self.target,
            "params": self.params,
            "trials": self.trials,
            "max_violation": mv if math.isfinite(mv) else str(mv),
            "verdict": self.verdict,
            "worst_instance_seed": self.worst_instance_seed,
            "certified": self.certified,
        }

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"


def _verdict(v: float, tol: float = PROBE_TOL) -> str:
    return "consistent" if v <= tol else "violated"


def _random_positive(rng, dim: int) -> np.ndarray:
    G = ginibre(rng, dim, dim)
    P = G @ G.conj().T + 1e-3 * np.eye(dim)
    return 0.5 * (P + P.conj().T)


def verify_supremum(rho, sigma, params, trials: int = 200, seed: int = 0) -> ProbeReport:
    """Sample positive H and report ``max f(H) - Psi``.

    Half the samples are multiplicative perturbations of the maximizer, half
    are global Wishart draws with a random overall scale. The gap
    ``|f(H*) - Psi|`` (relative) is folded into the reported violation.
    """
    p = _require_variational(params)
    psi = psi_functional(rho, sigma, p)
    Hs = optimal_H(rho, sigma, p)
    at_opt = abs(f_functional(Hs, rho, sigma, p) - psi) / max(1.0, abs(psi))
    worst, worst_seed = at_opt, int(seed)
    dim = Hs.shape[0]
    root = matrix_power(Hs, 0.5)
    for t in range(trials):
        s = derive_seed(seed, t)
        rng = make_rng(s)
        if t % 2 == 0:
            W = ginibre(rng, dim, dim)
            W = 0.5 * (W + W.conj().T) * rng.uniform(0.01, 0.5)
            w, U = np.linalg.eigh(W)
            H = root @ ((U * np.exp(w)) @ U.conj().T) @ root
        else:
            H = _random_positive(rng, dim) * math.exp(rng.normal())
        v = f_functional(0.5 * (H + H.conj().T), rho, sigma, p) - psi
        if v > worst:
            worst, worst_seed = v, s
    return ProbeReport(
        "variational_supremum", {"alpha": p.alpha, "z": p.z}, trials, float(worst), _verdict(worst), worst_seed
    )


# --- trace inequalities ------------------------------------------------------


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    slack: float


def young_trace_check(X, Y, p: float) -> InequalityCheck:
    """``p Tr(XY) - (p/q) Tr(Y^q) <= Tr(X^p)`` with ``1/p + 1/q = 1``."""
    if not p > 1:
        raise InvalidPError(f"Young's inequality needs p > 1, got {p}")
    q = p / (p - 1)
    X, Y = hermitize(X), hermitize(Y)
    lhs = p * float(np.trace(X @ Y).real) - (p / q) * float(np.trace(matrix_power(Y, q)).real)
    rhs = float(np.trace(matrix_power(X, p)).real)
    return InequalityCheck(lhs, rhs, rhs - lhs)


def _check_invertible(M: np.ndarray, name: str) -> None:
    smin = np.linalg.svd(M, compute_uv=False).min()
    if smin <= SINGULAR_TOL:
        raise SingularMatrixError(f"{name} is not invertible (smallest singular value {smin:.3e})")


def _check_exponents(r0: float, r1: float, r2: float) -> None:
    if min(r0, r1, r2) <= 0:
        raise ExponentMismatchError("exponents must be positive")
    if abs(1 / r0 - 1 / r1 - 1 / r2) > 1e-12:
        raise ExponentMismatchError(f"1/r0 != 1/r1 + 1/r2 for ({r0}, {r1}, {r2})")


def _zhang_rhs(X, Yinv, Z, r0, r1, r2) -> float:
    return (r1 / r0) * trace_abs_power(X @ Z, r0) - (r1 / r2) * trace_abs_power(Yinv @ Z, r2)


def zhang_lower_bound(X, Y, Z, r0: float, r1: float, r2: float) -> InequalityCheck:
    """``Tr|XY|^r1 >= (r1/r0) Tr|XZ|^r0 - (r1/r2) Tr|Y^-1 Z|^r2``."""
    _check_exponents(r0, r1, r2)
    X, Y, Z = as_square(X), as_square(Y), as_square(Z)
    for M, name in ((X, "X"), (Y, "Y"), (Z, "Z")):
        _check_invertible(M, name)
    lhs = trace_abs_power(X @ Y, r1)
    rhs = _zhang_rhs(X, np.linalg.inv(Y), Z, r0, r1, r2)
    return InequalityCheck(lhs, rhs, lhs - rhs)


def zhang_maximizer(X, Y, r1: float, r2: float) -> np.ndarray:
    """``Z = Y |XY|^(r1/r2)`` attains the maximum in Zhang's formula."""
    X, Y = as_square(X), as_square(Y)
    T = X @ Y
    return Y @ matrix_power(T.conj().T @ T, r1 / (2 * r2))


def zhang_local_search(X, Y, r0: float, r1: float, r2: float, *, steps: int = 500, Z0=None):
    """Maximize the right-hand side over Z with BFGS from ``Z0`` (identity by default).

    Returns ``(Z, rhs)``.
    """
    _check_exponents(r0, r1, r2)
    X, Y = as_square(X), as_square(Y)
    n = X.shape[0]
    Yinv = np.linalg.inv(Y)
    Z0 = np.eye(n, dtype=np.complex128) if Z0 is None else as_square(Z0)

    def unpack(v):
        return (v[: n * n] + 1j * v[n * n :]).reshape(n, n)

    def objective(v):
        return -_zhang_rhs(X, Yinv, unpack(v), r0, r1, r2)

    x0 = np.concatenate([Z0.real.ravel(), Z0.imag.ravel()])
    res = optimize.minimize(objective, x0, method="BFGS", options={"maxiter": steps, "gtol": 1e-10})
    return unpack(res.x), -float(res.fun)


# --- convexity probes ----------------------------------------------------------


class ProbeTarget(enum.Enum):
    PSI_CONVEX = "psi_convex"
    PSI_CONCAVE = "psi_concave"
    TRACE_FUNCTIONAL = "trace_functional"
    POWER_MEAN = "power_mean"
    CONGRUENCE_POWER = "congruence_power"
    F_FIXED_H = "f_fixed_h"


LAMBDAS = (0.25, 0.5, 0.75)


def midpoint_violation(g: Callable, x1: tuple, x2: tuple, sense: str, lambdas=LAMBDAS) -> float:
    """Worst scaled violation of convexity (``sense='convex'``) or concavity
    of ``g`` along the segment between the argument tuples ``x1`` and ``x2``."""
    g1, g2 = g(*x1), g(*x2)
    worst = -math.inf
    for lam in lambdas:
        mix = tuple(lam * a + (1 - lam) * b for a, b in zip(x1, x2))
        gm = g(*mix)
        chord = lam * g1 + (1 - lam) * g2
        v = gm - chord if sense == "convex" else chord - gm
        worst = max(worst, v / max(1.0, abs(g1), abs(g2), abs(gm)))
    return worst


def _trace_functional_sense(p: float, q: float, s: float) -> str | None:
    if p < q or s <= 0:
        return None
    if 0 <= q <= p <= 1 and s <= 1 / (p + q):
        return "concave"
    if -1 <= q <= p <= 0:
        return "convex"
    if -1 <= q <= 0 and 1 <= p <= 2 and (p, q) != (1, -1) and p + q > 0 and s >= 1 / (p + q):
        return "convex"
    return None


def _power_mean(A, B, p):
    M = B.conj().T @ matrix_power(A, p) @ B
    return float(np.trace(matrix_power(0.5 * (M + M.conj().T), 1 / p)).real)


def _congruence_power(X, Z, A, p):
    W = Z.conj().T @ matrix_power(X, p / 2) @ Z
    M = W @ A @ W
    return float(np.trace(matrix_power(0.5 * (M + M.conj().T), 1 / p)).real)


def _probe_setup(target: ProbeTarget, params: dict):
    """Return (sense, certified, builder) where builder(rng, dim) yields (g, x1, x2)."""
    if target in (ProbeTarget.PSI_CONVEX, ProbeTarget.PSI_CONCAVE, ProbeTarget.F_FIXED_H):
        az = _as_params((params["alpha"], params["z"]))
        region = classify_region(az.alpha, az.z)
        if target is ProbeTarget.PSI_CONVEX and region not in (RegionClass.MonotoneCase2, RegionClass.MonotoneCase3):
            raise InvalidRegimeError(f"Psi is only claimed convex in cases 2 and 3, got {region.value}")
        if target is ProbeTarget.PSI_CONCAVE and region is not RegionClass.MonotoneCase1:
            raise InvalidRegimeError(f"Psi is only claimed concave in case 1, got {region.value}")
        if target is ProbeTarget.F_FIXED_H:
            if region is not RegionClass.MonotoneCase2 or az.z <= 1:
                raise InvalidRegimeError("f at fixed H needs 1 < alpha <= 2, alpha/2 <= z <= alpha and z > 1")

            def build(rng, dim):
                H = _random_positive(rng, dim)
                x1 = (random_density_from(rng, dim), random_density_from(rng, dim))
                x2 = (random_density_from(rng, dim), random_density_from(rng, dim))
                return (lambda r, s: f_functional(H, r, s, az)), x1, x2

            return "convex", False, build

        def build(rng, dim):
            x1 = (random_density_from(rng, dim), random_density_from(rng, dim))
            x2 = (random_density_from(rng, dim), random_density_from(rng, dim))
            return (lambda r, s: psi_functional(r, s, az)), x1, x2

        return ("convex" if target is ProbeTarget.PSI_CONVEX else "concave"), True, build

    if target is ProbeTarget.TRACE_FUNCTIONAL:
        p, q, s = float(params["p"]), float(params["q"]), float(params["s"])
        sense = _trace_functional_sense(p, q, s)
        if sense is None:
            raise InvalidRegimeError(f"(p, q, s) = ({p}, {q}, {s}) is outside the known convex/concave regimes")
        K = params.get("K")

        def build(rng, dim):
            Kt = ginibre(rng, dim, dim) if K is None else K
            tf = TraceFunctionalParams(p, q, s, Kt)
            x1 = (random_density_from(rng, dim), random_density_from(rng, dim))
            x2 = (random_density_from(rng, dim), random_density_from(rng, dim))
            return (lambda a, b: general_trace_functional(a, b, tf)), x1, x2

        return sense, True, build

    if target is ProbeTarget.POWER_MEAN:
        p = float(params["p"])
        if 0 < p <= 1:
            sense = "concave"
        elif 1 < p <= 2:
            sense = "convex"
        else:
            raise InvalidRegimeError(f"p must lie in (0, 2], got {p}")
        B = params.get("B")

        def build(rng, dim):
            Bt = ginibre(rng, dim, dim) if B is None else as_matrix(B)
            x1 = (random_density_from(rng, dim),)
            x2 = (random_density_from(rng, dim),)
            return (lambda a: _power_mean(a, Bt, p)), x1, x2

        return sense, True, build

    if target is ProbeTarget.CONGRUENCE_POWER:
        p = float(params["p"])
        if not 0 < p < 1:
            raise InvalidRegimeError(f"p must lie in (0, 1), got {p}")

        def build(rng, dim):
            Z = ginibre(rng, dim, dim)
            A = _random_positive(rng, dim)
            x1 = (random_density_from(rng, dim),)
            x2 = (random_density_from(rng, dim),)
            return (lambda x: _congruence_power(x, Z, A, p)), x1, x2

        return "concave", False, build

    raise InvalidRegimeError(f"unknown probe target {target!r}")


def convexity_probe(target, params: dict, trials: int = 200, seed: int = 0, *, dim: int = 3, lambdas=LAMBDAS) -> ProbeReport:
    """Midpoint (plus lambda grid) test of a claimed convexity or concavity.

    Parameters
    ----------
    target : ProbeTarget or str
    params : dict
        ``alpha``/``z`` for the Psi and f targets, ``p``/``q``/``s`` (and
        optionally ``K``) for the trace functional, ``p`` (and optionally
        ``B``) for the power mean, ``p`` for the congruence power.
    trials : int
        Number of random pairs; each draws from its own derived seed.

    Returns
    -------
    ProbeReport
        ``certified`` is False for targets whose hypotheses cannot be checked
        on the sampled inputs; their verdict is informational.
    """
    target = ProbeTarget(target)
    sense, certified, build = _probe_setup(target, params)
    worst, worst_seed = -math.inf, int(seed)
    for t in range(trials):
        s = derive_seed(seed, t)
        g, x1, x2 = build(make_rng(s), dim)
        v = midpoint_violation(g, x1, x2, sense, lambdas)
        if v > worst:
            worst, worst_seed = v, s
    if trials == 0:
        worst = 0.0
    shown = {k: v for k, v in params.items() if isinstance(v, (int, float))}
    return ProbeReport(target.value, shown, trials, float(worst), _verdict(worst), worst_seed, certified)
