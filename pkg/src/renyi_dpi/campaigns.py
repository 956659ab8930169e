"""Randomized campaigns behind the command-line tools: (alpha, z) grid sweeps
of DPI gaps, saturation audits and a best-effort search for DPI violations.

Every trial draws from its own seed ``derive_seed(master, *indices)``, so the
output does not depend on evaluation order or on the number of workers.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .channels import (
    KrausChannel,
    channel_from_isometry_seed,
    identity_channel,
    partial_trace_channel,
    random_channel_from,
    random_unitary_channel_from,
)
from .divergences import AlphaZParams, RegionClass, classify_region, dpi_gap, in_necessary_region
from .errors import ConfigError, InvalidParamsError, RenyiDPIError
from .saturation import saturation_report, sufficient_condition_check
from .states import derive_seed, ginibre, make_rng, matrix_to_json, random_density_from, regularize

CHANNEL_KINDS = ("partial_trace", "random_cptp", "unitary", "identity")
CSV_HEADER = ("alpha", "z", "region", "dim_a", "dim_b", "trial_seed", "gap", "necessary_residual")
VIOLATION_TOL = 1e-8


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


# --- gap sweep -------------------------------------------------------------------


@dataclass
class SweepConfig:
    alpha_grid: list
    z_grid: list
    dims: tuple = (2, 2)
    trials_per_cell: int = 10
    channel_kind: str = "partial_trace"
    seed: int = 0
    regularization_eps: float = 0.0
    output_path: str = "sweep.csv"

    def validate(self) -> "SweepConfig":
        if not self.alpha_grid or not self.z_grid:
            raise ConfigError("alpha_grid and z_grid must be non-empty")
        if self.trials_per_cell < 1:
            raise ConfigError(f"trials_per_cell must be >= 1, got {self.trials_per_cell}")
        if not 0 <= self.regularization_eps < 1:
            raise ConfigError(f"regularization_eps must lie in [0, 1), got {self.regularization_eps}")
        if self.channel_kind not in CHANNEL_KINDS:
            raise ConfigError(f"channel_kind must be one of {CHANNEL_KINDS}, got {self.channel_kind!r}")
        if len(self.dims) != 2 or min(self.dims) < 1:
            raise ConfigError(f"dims must be two positive integers, got {self.dims}")
        for a in self.alpha_grid:
            for z in self.z_grid:
                try:
                    classify_region(a, z)
                except InvalidParamsError as exc:
                    raise ConfigError(str(exc)) from exc
        return self


_FIELD_PARSERS = {
    "alpha_grid": lambda v: [float(x) for x in v.replace(",", " ").split()],
    "z_grid": lambda v: [float(x) for x in v.replace(",", " ").split()],
    "dims": lambda v: tuple(int(x) for x in v.replace(",", " ").split()),
    "trials_per_cell": int,
    "channel_kind": str.strip,
    "seed": int,
    "regularization_eps": float,
    "output_path": str.strip,
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments allowed) into typed fields."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[sweep]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    out = {}
    for key, raw in cp["sweep"].items():
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _FIELD_PARSERS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return out


def load_config(path=None, defaults=None, **overrides) -> SweepConfig:
    """Layer ``defaults``, then the config file (optional), then non-None overrides."""
    fields = dict(defaults or {})
    if path is not None:
        try:
            fields.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    fields.update({k: v for k, v in overrides.items() if v is not None})
    missing = {"alpha_grid", "z_grid"} - fields.keys()
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return SweepConfig(**fields).validate()


def _build_channel(kind: str, rng, d_a: int, d_b: int) -> KrausChannel:
    d = d_a * d_b
    if kind == "partial_trace":
        return partial_trace_channel((d_a, d_b), [0])
    if kind == "random_cptp":
        return random_channel_from(rng, d, d_a, d_b)
    if kind == "unitary":
        return random_unitary_channel_from(rng, d)
    return identity_channel(d)


def sweep_trial(task) -> tuple:
    """One CSV row; ``task = (config, alpha_index, z_index, trial_index)``."""
    cfg, ai, zi, ti = task
    alpha, z = cfg.alpha_grid[ai], cfg.z_grid[zi]
    d_a, d_b = cfg.dims
    seed = derive_seed(cfg.seed, ai, zi, ti)
    rng = make_rng(seed)
    rho = random_density_from(rng, d_a * d_b)
    sigma = random_density_from(rng, d_a * d_b)
    if cfg.regularization_eps > 0:
        rho, sigma = regularize(rho, cfg.regularization_eps), regularize(sigma, cfg.regularization_eps)
    channel = _build_channel(cfg.channel_kind, rng, d_a, d_b)
    params = AlphaZParams(alpha, z)
    gap = dpi_gap(rho, sigma, channel, params)
    residual = math.nan
    if in_necessary_region(alpha, z):
        residual = saturation_report(rho, sigma, channel, params).necessary_residual
    return (alpha, z, classify_region(alpha, z).value, d_a, d_b, seed, gap, residual)


def _cell_summary(rows: list) -> dict:
    gaps = np.array([r[6] for r in rows])
    i = int(np.argmin(gaps))
    res = rows[i][7]
    return {
        "alpha": rows[0][0],
        "z": rows[0][1],
        "region": rows[0][2],
        "min_gap": float(gaps[i]),
        "mean_gap": float(gaps.mean()),
        "min_necessary_residual_at_min_gap": None if math.isnan(res) else float(res),
        "violations": int(np.sum(gaps < -VIOLATION_TOL)),
    }


def run_sweep(cfg: SweepConfig, workers: int = 1) -> tuple[list, dict]:
    """Evaluate every (alpha, z, trial) and return ``(rows, summary)``."""
    tasks = [
        (cfg, ai, zi, ti)
        for ai in range(len(cfg.alpha_grid))
        for zi in range(len(cfg.z_grid))
        for ti in range(cfg.trials_per_cell)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_trial, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [sweep_trial(t) for t in tasks]
    n = cfg.trials_per_cell
    cells = [_cell_summary(rows[k : k + n]) for k in range(0, len(rows), n)]
    summary = {
        "config": {**asdict(cfg), "dims": list(cfg.dims)},
        "rows": len(rows),
        "cells": cells,
        "monotone_violations": sum(c["violations"] for c in cells if c["region"] != RegionClass.NotMonotone.value),
        "not_monotone_violations": sum(c["violations"] for c in cells if c["region"] == RegionClass.NotMonotone.value),
    }
    return rows, summary


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for a, z, region, d_a, d_b, seed, gap, res in rows:
        w.writerow([fmt_float(a), fmt_float(z), region, d_a, d_b, seed, fmt_float(gap), fmt_float(res)])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def summary_path(output_path) -> Path:
    p = Path(output_path)
    return p.with_name(p.name + ".summary.json")


def write_sweep(cfg: SweepConfig, workers: int = 1) -> dict:
    """Run the sweep and write the CSV plus ``<output>.summary.json``.

    On any failure neither file is left behind.
    """
    out = Path(cfg.output_path)
    summ = summary_path(out)
    try:
        rows, summary = run_sweep(cfg, workers)
        _atomic_write(out, rows_to_csv(rows))
        _atomic_write(summ, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except BaseException:
        out.unlink(missing_ok=True)
        summ.unlink(missing_ok=True)
        raise
    return summary


# --- saturation audit ---------------------------------------------------------------

AUDIT_MODES = ("tensor", "random", "product-sufficient")
SATURATED_GAP = 1e-9


def _audit_instance(mode: str, params: AlphaZParams, d_a: int, d_b: int, seed: int):
    rng = make_rng(seed)
    if mode == "random":
        rho = random_density_from(rng, d_a * d_b)
        sigma = random_density_from(rng, d_a * d_b)
    else:
        rho_a, sigma_a = random_density_from(rng, d_a), random_density_from(rng, d_a)
        tau = random_density_from(rng, d_b)
        rho, sigma = np.kron(rho_a, tau), np.kron(sigma_a, tau)
    meta = {"seed": seed, "dims": [d_a, d_b], "mode": mode}
    if mode == "product-sufficient":
        rep = sufficient_condition_check(rho, sigma, (d_a, d_b), params)
        rep.meta.update(meta)
        return rep
    return saturation_report(rho, sigma, partial_trace_channel((d_a, d_b), [0]), params, **meta)


def _correlation(gaps, residuals) -> dict:
    g, r = np.asarray(gaps, float), np.asarray(residuals, float)
    if g.size < 3 or np.ptp(g) == 0 or np.ptp(r) == 0:
        return {"pearson": None, "spearman": None}
    return {
        "pearson": float(np.corrcoef(g, r)[0, 1]),
        "spearman": float(stats.spearmanr(g, r).statistic),
    }


def saturation_audit(mode: str, alpha: float, z: float, dims, trials: int, seed: int) -> dict:
    if mode not in AUDIT_MODES:
        raise InvalidParamsError(f"mode must be one of {AUDIT_MODES}, got {mode!r}")
    params = AlphaZParams(alpha, z)
    if mode != "product-sufficient" and not in_necessary_region(alpha, z):
        raise InvalidParamsError(
            f"(alpha, z) = ({alpha}, {z}) is outside 1 < alpha <= 2, alpha/2 <= z <= alpha"
        )
    d_a, d_b = dims
    reports = [_audit_instance(mode, params, d_a, d_b, derive_seed(seed, t)) for t in range(trials)]
    gaps = [r.gap for r in reports]
    residuals = [r.necessary_residual for r in reports]
    saturated = [r.necessary_residual for r in reports if abs(r.gap) <= SATURATED_GAP]
    large = [r for r in reports if r.gap > 1e-3]
    aggregate = {
        "instances": len(reports),
        "saturated_instances": len(saturated),
        "max_residual_among_saturated": max(saturated) if saturated else None,
        "instances_with_gap_above_1e-3": len(large),
        "of_which_residual_above_1e-3": sum(r.necessary_residual > 1e-3 for r in large),
        "gap_residual_correlation": _correlation(gaps, residuals),
    }
    if mode == "product-sufficient":
        ident = [r.entropy_identity_residual for r in reports]
        aggregate["max_entropy_identity_residual"] = max(ident) if ident else None
    return {
        "mode": mode,
        "alpha": alpha,
        "z": z,
        "dims": [d_a, d_b],
        "seed": seed,
        "reports": [r.to_json() for r in reports],
        "aggregate": aggregate,
    }


# --- falsification search ---------------------------------------------------------

FOUND_THRESHOLD = -1e-6
PERTURBATIONS_PER_ROUND = 50


@dataclass
class _Instance:
    g_rho: np.ndarray
    g_sigma: np.ndarray
    g_channel: np.ndarray

    def perturbed(self, rng, step: float) -> "_Instance":
        return _Instance(*(G + step * ginibre(rng, *G.shape) for G in (self.g_rho, self.g_sigma, self.g_channel)))

    def materialize(self, d_a: int):
        def state(G):
            R = G @ G.conj().T
            R = 0.5 * (R + R.conj().T)
            return R / np.trace(R).real

        return state(self.g_rho), state(self.g_sigma), channel_from_isometry_seed(self.g_channel, d_a)


def _random_instance(rng, d_a: int, d_b: int) -> _Instance:
    d = d_a * d_b
    return _Instance(ginibre(rng, d, d), ginibre(rng, d, d), ginibre(rng, d_a * d_b, d))


def _evaluate(inst: _Instance, params: AlphaZParams, d_a: int) -> float:
    try:
        rho, sigma, ch = inst.materialize(d_a)
        gap = dpi_gap(rho, sigma, ch, params)
    except RenyiDPIError:
        return math.inf
    return gap if math.isfinite(gap) else math.inf


@dataclass
class FalsifyResult:
    alpha: float
    z: float
    region: str
    dims: list
    budget: int
    seed: int
    evaluations: int = 0
    best_gap: float | None = None
    found: bool = False
    origin_seed: int | None = None
    refinement_steps: list = field(default_factory=list)
    instance: dict | None = None

    def to_json(self) -> dict:
        return asdict(self)


def falsify(alpha: float, z: float, dims, budget: int, seed: int) -> FalsifyResult:
    """Search for ``dpi_gap < -1e-6`` at a non-monotone (alpha, z).

    About half the budget goes to independent random instances. The rest
    refines the best instance: rounds of 50 Gaussian perturbations, keeping
    any improvement and halving the step after a round without one.
    """
    region = classify_region(alpha, z)
    if region.monotone:
        raise InvalidParamsError(f"({alpha}, {z}) is in {region.value}; the DPI holds there")
    params = AlphaZParams(alpha, z)
    d_a, d_b = (int(d) for d in dims)
    result = FalsifyResult(alpha, z, region.value, [d_a, d_b], int(budget), int(seed))
    if budget <= 0:
        return result

    best, best_gap = None, math.inf
    n_random = max(1, budget // 2)
    for i in range(n_random):
        s = derive_seed(seed, 0, i)
        inst = _random_instance(make_rng(s), d_a, d_b)
        gap = _evaluate(inst, params, d_a)
        if gap < best_gap:
            best, best_gap, result.origin_seed = inst, gap, s
    used = n_random

    step, rnd = 0.3, 0
    while used < budget and best is not None:
        rs = derive_seed(seed, 1, rnd)
        rng = make_rng(rs)
        improved = False
        for k in range(min(PERTURBATIONS_PER_ROUND, budget - used)):
            cand = best.perturbed(rng, step)
            gap = _evaluate(cand, params, d_a)
            used += 1
            if gap < best_gap:
                best, best_gap, improved = cand, gap, True
                result.refinement_steps.append({"round_seed": rs, "index": k, "step": step})
        if not improved:
            step = max(step / 2, 1e-6)
        rnd += 1

    result.evaluations = used
    if best is not None and math.isfinite(best_gap):
        rho, sigma, ch = best.materialize(d_a)
        result.best_gap = best_gap
        result.found = best_gap < FOUND_THRESHOLD
        result.instance = {"rho": matrix_to_json(rho), "sigma": matrix_to_json(sigma), "channel": ch.to_json()}
    return result

