"""Randomized property suite: every invariant of the library as a seeded
check that returns its worst observed violation.

Each check receives ``(seed, trials, dims_max)`` and returns a non-negative
number compared against the property's tolerance. Dimensions are drawn
uniformly from ``2..dims_max`` per trial.
"""

from __future__ import annotations

import math
import traceback
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels as ch
from . import divergences as dv
from . import saturation as sat
from . import variational as var
from .linalg import kron, matrix_power, partial_trace
from .states import derive_seed, ginibre, is_density, make_rng, random_density_from, random_unitary_from


@dataclass(frozen=True)
class Property:
    name: str
    tol: float
    check: Callable[[int, int, int], float]


def _trials(seed: int, trials: int, dims_max: int, tag: int):
    """Yield ``(rng, dim)`` per trial from an independent seed stream."""
    for t in range(trials):
        rng = make_rng(derive_seed(seed, tag, t))
        yield rng, int(rng.integers(2, max(2, dims_max) + 1))


def _pair(rng, d):
    return random_density_from(rng, d), random_density_from(rng, d)


ALPHAS = (0.5, 0.8, 1.5, 2.0, 3.0)


def _alpha_z_region(rng):
    """A random (alpha, z) inside one of the monotone cases."""
    case = int(rng.integers(3))
    if case == 0:
        a = rng.uniform(0.1, 0.95)
        return a, rng.uniform(max(a, 1 - a), 2.0)
    if case == 1:
        a = rng.uniform(1.05, 2.0)
        return a, rng.uniform(a / 2, a)
    a = rng.uniform(2.0, 4.0)
    return a, rng.uniform(a - 1, a)


def _max(values) -> float:
    return max(values, default=0.0)


# --- linalg / states / channels -------------------------------------------------


def _power_composition(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 1):
        A = random_density_from(rng, d)
        a, b = rng.uniform(-1, 2, size=2)
        lhs = matrix_power(A, a) @ matrix_power(A, b)
        out.append(np.linalg.norm(lhs - matrix_power(A, a + b), 2) / max(1.0, np.linalg.norm(lhs, 2)))
    return _max(out)


def _random_states_valid(seed, trials, dims_max):
    bad = 0
    for rng, d in _trials(seed, trials, dims_max, 2):
        rank = int(rng.integers(1, d + 1))
        bad += not is_density(random_density_from(rng, d, rank))
    return float(bad)


def _partial_trace_channel_agrees(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 3):
        d_b = int(rng.integers(2, max(2, dims_max) + 1))
        X = random_density_from(rng, d * d_b)
        for keep in ([0], [1]):
            Y = ch.partial_trace_channel((d, d_b), keep).apply(X)
            out.append(np.linalg.norm(Y - partial_trace(X, (d, d_b), keep), 2))
    return _max(out)


def _random_channel_cptp(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 4):
        d_out = int(rng.integers(1, max(2, dims_max) + 1))
        k = int(rng.integers(math.ceil(d / d_out), d * d_out + 1))
        rep = ch.validate_cptp(ch.random_channel_from(rng, d, d_out, k))
        out.append(max(rep.tp_residual, -rep.choi_min_eig))
    return _max(out)


def _adjoint_duality(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 5):
        c = ch.random_channel_from(rng, d, 2, d)
        X, Y = random_density_from(rng, d), random_density_from(rng, 2)
        out.append(abs(np.trace(c.apply(X) @ Y) - np.trace(X @ c.adjoint_apply(Y))))
    return _max(out)


# --- divergences ------------------------------------------------------------------


def _reduction_identity(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 10):
        rho, sigma = _pair(rng, d)
        for a in ALPHAS:
            out.append(abs(dv.alpha_z(rho, sigma, (a, 1.0)) - dv.renyi_alpha(rho, sigma, a)))
            out.append(abs(dv.alpha_z(rho, sigma, (a, a)) - dv.sandwiched(rho, sigma, a)))
    return _max(out)


def _unitary_invariance(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 11):
        rho, sigma = _pair(rng, d)
        U = random_unitary_from(rng, d)
        a, z = _alpha_z_region(rng)
        base = dv.alpha_z(rho, sigma, (a, z))
        rot = dv.alpha_z(U @ rho @ U.conj().T, U @ sigma @ U.conj().T, (a, z))
        out.append(abs(base - rot))
    return _max(out)


def _tensor_property(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 12):
        rho, sigma = _pair(rng, d)
        tau = random_density_from(rng, 2)
        a, z = _alpha_z_region(rng)
        out.append(abs(dv.alpha_z(np.kron(rho, tau), np.kron(sigma, tau), (a, z)) - dv.alpha_z(rho, sigma, (a, z))))
    return _max(out)


def _umegaki_limit(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 13):
        rho, sigma = _pair(rng, d)
        u = dv.umegaki(rho, sigma)
        for a in (1 - 1e-4, 1 + 1e-4):
            out.append(abs(dv.alpha_z(rho, sigma, (a, 1.0)) - u))
    return _max(out)


def _nonnegativity(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 14):
        rho, sigma = _pair(rng, d)
        out.append(-dv.alpha_z(rho, sigma, _alpha_z_region(rng)))
    return max(0.0, _max(out))


def _dpi_monotone(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 15):
        d_b = 2
        rho, sigma = _pair(rng, d * d_b)
        kind = int(rng.integers(3))
        if kind == 0:
            c = ch.partial_trace_channel((d, d_b), [0])
        elif kind == 1:
            c = ch.random_channel_from(rng, d * d_b, d, d_b)
        else:
            c = ch.random_unitary_channel_from(rng, d * d_b)
        out.append(-dv.dpi_gap(rho, sigma, c, _alpha_z_region(rng)))
    return max(0.0, _max(out))


# --- variational ---------------------------------------------------------------------


def _variational_params(rng):
    a = rng.uniform(1.1, 2.0)
    return dv.AlphaZParams(a, rng.uniform(max(1.05, a / 2), max(1.06, a)))


def _variational_optimum(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 20):
        rho, sigma = _pair(rng, d)
        p = _variational_params(rng)
        psi = dv.psi_functional(rho, sigma, p)
        out.append(abs(var.f_functional(var.optimal_H(rho, sigma, p), rho, sigma, p) - psi) / max(1.0, psi))
    return _max(out)


def _variational_upper_bound(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 21):
        rho, sigma = _pair(rng, d)
        p = _variational_params(rng)
        out.append(var.verify_supremum(rho, sigma, p, trials=20, seed=int(rng.integers(2**63))).max_violation)
    return max(0.0, _max(out))


def _psi_convexity(seed, trials, dims_max):
    out = []
    for k, (rng, d) in enumerate(_trials(seed, trials, dims_max, 22)):
        a, z = _alpha_z_region(rng)
        target = "psi_concave" if a < 1 else "psi_convex"
        out.append(var.convexity_probe(target, {"alpha": a, "z": z}, trials=1, seed=derive_seed(seed, 22, k), dim=d).max_violation)
    return max(0.0, _max(out))


def _trace_functional_specialization(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 23):
        rho, sigma = _pair(rng, d)
        a, z = _alpha_z_region(rng)
        tf = var.TraceFunctionalParams.for_psi(a, z, d)
        out.append(abs(var.general_trace_functional(rho, sigma, tf) - dv.psi_functional(rho, sigma, (a, z))))
    return _max(out)


def _young(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 24):
        X, Y = _pair(rng, d)
        p = rng.uniform(1.1, 4.0)
        out.append(-var.young_trace_check(X, Y, p).slack)
        q = p / (p - 1)
        out.append(abs(var.young_trace_check(X, matrix_power(X, p / q), p).slack))
    return max(0.0, _max(out))


def _zhang(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 25):
        X, Y, Z = (ginibre(rng, d, d) for _ in range(3))
        r1, r2 = rng.uniform(0.5, 4.0, size=2)
        r0 = 1 / (1 / r1 + 1 / r2)
        out.append(-var.zhang_lower_bound(X, Y, Z, r0, r1, r2).slack)
    return max(0.0, _max(out))


# --- saturation -----------------------------------------------------------------------


def _petz_recovery(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 30):
        sigma = random_density_from(rng, d)
        c = ch.random_channel_from(rng, d, 2, d)
        P = sat.petz_recovery(sigma, c)
        rep = ch.validate_cptp(P)
        out.append(max(rep.tp_residual, -rep.choi_min_eig, np.linalg.norm(P.apply(c.apply(sigma)) - sigma, 2)))
    return _max(out)


def _necessary_residual_tensor(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 31):
        rho_a, sigma_a = _pair(rng, d)
        tau = random_density_from(rng, 2)
        a = rng.uniform(1.05, 2.0)
        z = rng.uniform(a / 2, a)
        rho, sigma = kron(rho_a, tau), kron(sigma_a, tau)
        rep = sat.saturation_report(rho, sigma, ch.partial_trace_channel((d, 2), [0]), (a, z))
        out.append(max(abs(rep.gap) / 1e-9, rep.necessary_residual / 1e-7))
    return _max(out)


def _coincidence_at_z_alpha(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 32):
        rho, sigma = _pair(rng, 2 * d)
        c = ch.random_channel_from(rng, 2 * d, d, 2)
        a = rng.uniform(1.05, 2.0)
        out.append(abs(sat.necessary_residual(rho, sigma, c, (a, a)) - sat.sandwiched_residual(rho, sigma, c, a)))
    return _max(out)


def _sufficient_identity(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 33):
        rho_a, sigma_a = _pair(rng, d)
        tau = random_density_from(rng, 2)
        a = rng.uniform(1.05, 2.0)
        rep = sat.sufficient_condition_check(kron(rho_a, tau), kron(sigma_a, tau), (d, 2), (a, a))
        if rep.necessary_residual <= 1e-8:
            out.append(rep.entropy_identity_residual)
        else:
            out.append(math.inf)
    return _max(out)


def _umegaki_error_bound(seed, trials, dims_max):
    out = []
    for rng, d in _trials(seed, trials, dims_max, 34):
        rho, sigma = _pair(rng, 2 * d)
        out.append(-sat.umegaki_error_bound_check(rho, sigma, (d, 2)).slack)
    return max(0.0, _max(out))


PROPERTIES = (
    Property("linalg.power_composition", 1e-9, _power_composition),
    Property("states.random_density_valid", 0.0, _random_states_valid),
    Property("channels.partial_trace_agreement", 1e-12, _partial_trace_channel_agrees),
    Property("channels.random_channel_cptp", 1e-9, _random_channel_cptp),
    Property("channels.adjoint_duality", 1e-12, _adjoint_duality),
    Property("divergences.reduction_identity", 1e-10, _reduction_identity),
    Property("divergences.unitary_invariance", 1e-9, _unitary_invariance),
    Property("divergences.tensor_property", 1e-9, _tensor_property),
    Property("divergences.umegaki_limit", 1e-3, _umegaki_limit),
    Property("divergences.nonnegativity", 1e-9, _nonnegativity),
    Property("divergences.dpi", 1e-8, _dpi_monotone),
    Property("variational.optimum_attains_psi", 1e-8, _variational_optimum),
    Property("variational.upper_bound", 1e-8, _variational_upper_bound),
    Property("variational.psi_convexity", 1e-8, _psi_convexity),
    Property("variational.trace_functional_specialization", 1e-12, _trace_functional_specialization),
    Property("variational.young", 1e-9, _young),
    Property("variational.zhang", 1e-9, _zhang),
    Property("saturation.petz_recovery", 1e-9, _petz_recovery),
    Property("saturation.necessary_tensor", 1.0, _necessary_residual_tensor),
    Property("saturation.coincidence_z_alpha", 1e-10, _coincidence_at_z_alpha),
    Property("saturation.sufficient_identity", 1e-7, _sufficient_identity),
    Property("saturation.umegaki_error_bound", 1e-8, _umegaki_error_bound),
)


def run_property_suite(seed: int = 0, trials: int = 10, dims_max: int = 3, properties=PROPERTIES) -> dict:
    """Run every property; the result maps each name to its worst violation."""
    results = []
    for prop in properties:
        error = None
        try:
            v = float(prop.check(seed, trials, dims_max)) if trials > 0 else 0.0
        except Exception as exc:  # a crash is reported as a failure, not propagated
            v, error = math.inf, "".join(traceback.format_exception_only(type(exc), exc)).strip()
        ok = v <= prop.tol
        entry = {
            "name": prop.name,
            "max_violation": v if math.isfinite(v) else str(v),
            "tolerance": prop.tol,
            "verdict": "consistent" if ok else "violated",
        }
        if error:
            entry["error"] = error
        results.append(entry)
    failed = [r["name"] for r in results if r["verdict"] != "consistent"]
    return {
        "seed": seed,
        "trials": trials,
        "dims_max": dims_max,
        "results": results if trials > 0 else [],
        "failed": failed,
        "passed": not failed,
    }
