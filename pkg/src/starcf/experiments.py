"""Experiment runners behind the command line interface.

Each runner takes a SystemConfig and returns (header, rows) with every
value already rendered as a string for the CSV writer. Rows carry the
schema version, the experiment name, the run seed, and a digest of the
run configuration, so any record can be traced back to the exact inputs
that produced it. Sweep values live in their own columns; the digest
always describes the base configuration of the run.

Per-experiment sweep grids can be overridden from the config file through
the ``experiments`` mapping, keyed by subcommand name. Unknown keys in an
override are rejected rather than ignored.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import ConfigError, NumericalError
from .monte_carlo import estimate_se
from .numerics import bessel_j0
from .scenario import SPEED_OF_LIGHT, SystemConfig, place_scenario
from .se_closed_form import (
    evaluate_closed_form,
    instant_sinr,
)

SCHEMA_VERSION = "1"

_BASE_COLS = ["schema_version", "experiment", "seed", "config_hash"]

# first positive root of the zeroth-order Bessel function
_J0_FIRST_ROOT = 2.404825557695773

_DEFAULTS = {
    "fig1": {
        "velocities": [10.0, 60.0, 120.0],
        "alphas": [1.0, 6.0],
        "kappas": [math.pi / 8, math.pi / 2],
        "models": ["uniform"],
        "pilot_lengths": [3, 5],
        "max_instant": 400,
    },
    "fig2": {
        "m_list": [5, 10, 20, 30],
        "alphas": [1.0, 2.0, 6.0],
    },
    "fig3": {
        "l_list": [16, 64, 144, 196],
        "alphas": [1.0, 2.0, 4.0, 6.0],
        "kappas": [math.pi / 8, math.pi / 2],
    },
    "table1": {
        "velocities": [60.0, 90.0, 120.0, 150.0, 180.0],
    },
    "validate": {
        "tolerance": 0.05,
    },
}


def _sweep(cfg: SystemConfig, name: str) -> dict:
    """Defaults for one experiment merged with the config-file override."""
    merged = dict(_DEFAULTS[name])
    override = cfg.experiments.get(name, {})
    if not isinstance(override, dict):
        raise ConfigError(f"experiments.{name} must be an object")
    unknown = sorted(set(override) - set(merged))
    if unknown:
        raise ConfigError(
            f"unknown experiments.{name} keys: {', '.join(unknown)}"
        )
    merged.update(override)
    return merged


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _base(cfg: SystemConfig, name: str) -> list:
    return [SCHEMA_VERSION, name, str(cfg.seed), cfg.config_hash()]


def _near_square(n: int) -> tuple:
    """Most-square (columns, rows) factorization of an element count."""
    for d in range(int(math.isqrt(n)), 0, -1):
        if n % d == 0:
            return d, n // d
    return 1, n


def run_fig1(cfg: SystemConfig):
    """Closed-form sum rate per downlink instant, swept over impairments.

    Fixed deployment (one placement per parameter combination, all drawn
    from the run seed), rate evaluated at every instant from the first
    downlink symbol out to max_instant, beyond the coherence block if
    needed. Shows how channel aging erodes the rate within a block and
    how pilot cadence, amplification, and phase-error spread shift the
    curve.
    """
    sweep = _sweep(cfg, "fig1")
    header = _BASE_COLS + [
        "model", "kappa_rad", "alpha", "velocity_kmh", "pilot_length",
        "lag", "instant", "sum_se_bits_per_hz",
    ]
    rows = []
    base = _base(cfg, "fig1")
    max_instant = int(sweep["max_instant"])
    for model in sweep["models"]:
        for kappa in sweep["kappas"]:
            for alpha in sweep["alphas"]:
                for vel in sweep["velocities"]:
                    for pilots in sweep["pilot_lengths"]:
                        pilots = int(pilots)
                        if max_instant <= pilots:
                            raise ConfigError(
                                "max_instant must exceed the pilot length"
                            )
                        c = cfg.replace(
                            phase_model=str(model),
                            kappa=float(kappa),
                            amplification=float(alpha),
                            velocity_kmh=float(vel),
                            pilot_length=pilots,
                        )
                        result = evaluate_closed_form(place_scenario(c))
                        lags = np.arange(max_instant - pilots)
                        sinr = instant_sinr(c, result.components, lags)
                        sum_se = np.log2(1.0 + sinr).sum(axis=0)
                        for lag in lags:
                            rows.append(base + [
                                _fmt(str(model)), _fmt(float(kappa)),
                                _fmt(float(alpha)), _fmt(float(vel)),
                                _fmt(pilots), _fmt(int(lag)),
                                _fmt(int(lag) + pilots + 1),
                                _fmt(float(sum_se[lag])),
                            ])
    return header, rows


def run_fig2(cfg: SystemConfig, trials=None, seeds_per_point=None):
    """Closed-form versus sampled average rate across AP counts.

    Every (AP count, amplification) point is averaged over consecutive
    seeds; the sampled column carries a propagated standard error that
    treats per-user estimates as independent, which is approximate but
    adequate for error bars.
    """
    sweep = _sweep(cfg, "fig2")
    n_seeds = 5 if seeds_per_point is None else int(seeds_per_point)
    n_trials = 2000 if trials is None else int(trials)
    if n_seeds < 1 or n_trials < 1:
        raise ConfigError("seeds per point and trials must be positive")
    header = _BASE_COLS + [
        "m_aps", "alpha", "n_seeds", "trials", "avg_se_cf_bits_per_hz",
        "avg_se_mc_bits_per_hz", "avg_se_mc_stderr_bits_per_hz",
    ]
    rows = []
    base = _base(cfg, "fig2")
    for m in sweep["m_list"]:
        for alpha in sweep["alphas"]:
            cf_avgs, mc_avgs, mc_vars = [], [], []
            for i in range(n_seeds):
                c = cfg.replace(
                    m_aps=int(m),
                    amplification=float(alpha),
                    seed=cfg.seed + i,
                )
                scn = place_scenario(c)
                cf = evaluate_closed_form(scn)
                mc = estimate_se(scn, trials=n_trials)
                k = c.k_users
                cf_avgs.append(float(cf.se.mean()))
                mc_avgs.append(float(mc.se.mean()))
                mc_vars.append(float((mc.se_stderr ** 2).sum()) / k ** 2)
            stderr = math.sqrt(sum(mc_vars)) / n_seeds
            rows.append(base + [
                _fmt(int(m)), _fmt(float(alpha)), _fmt(n_seeds),
                _fmt(n_trials), _fmt(sum(cf_avgs) / n_seeds),
                _fmt(sum(mc_avgs) / n_seeds), _fmt(stderr),
            ])
    return header, rows


def _without_surface(scenario):
    """Same deployment with the surface links removed."""
    return dataclasses.replace(
        scenario,
        beta_m=np.zeros_like(scenario.beta_m),
        beta_k=np.zeros_like(scenario.beta_k),
    )


def _conventional_sum_se(cfg: SystemConfig) -> float:
    """Sum rate of a split-surface baseline with the same element budget.

    Emulates two co-located single-mode panels, each with half the
    elements: a reflect-only panel serving the reflection side and a
    pass-through panel serving the transmission side. Each half is
    evaluated in its own run (the other side falls back to its direct
    links), so coupling between the two panels is neglected; that skips
    a small extra interference term and slightly flatters the baseline.
    """
    if cfg.l_elements % 2:
        raise ConfigError(
            "the split-surface baseline needs an even element count"
        )
    half = cfg.l_elements // 2
    cols, rows_ = _near_square(half)
    total = 0.0
    for split, take_reflection in ((1.0, True), (0.0, False)):
        c = cfg.replace(
            l_elements=half, l_horizontal=cols, l_vertical=rows_,
            u_split=split,
        )
        scn = place_scenario(c)
        se = evaluate_closed_form(scn).se
        side = scn.is_reflection == take_reflection
        total += float(se[side].sum())
    return total


def run_fig3(cfg: SystemConfig, seeds_per_point=None):
    """Closed-form sum rate across surface sizes and operating modes.

    Compares the dual-mode surface against the split-surface baseline at
    the same element budget and against no surface at all. The no-surface
    rows repeat per sweep combination (a flat reference line) and carry
    l_elements 0.
    """
    sweep = _sweep(cfg, "fig3")
    n_seeds = 5 if seeds_per_point is None else int(seeds_per_point)
    if n_seeds < 1:
        raise ConfigError("seeds per point must be positive")
    header = _BASE_COLS + [
        "surface", "l_elements", "alpha", "kappa_rad", "n_seeds",
        "sum_se_bits_per_hz",
    ]
    rows = []
    base = _base(cfg, "fig3")
    for l_total in sweep["l_list"]:
        l_total = int(l_total)
        cols, rows_ = _near_square(l_total)
        for alpha in sweep["alphas"]:
            for kappa in sweep["kappas"]:
                sums = {"star": 0.0, "conventional": 0.0, "none": 0.0}
                for i in range(n_seeds):
                    c = cfg.replace(
                        l_elements=l_total, l_horizontal=cols,
                        l_vertical=rows_, amplification=float(alpha),
                        kappa=float(kappa), seed=cfg.seed + i,
                    )
                    scn = place_scenario(c)
                    sums["star"] += float(evaluate_closed_form(scn).se.sum())
                    sums["conventional"] += _conventional_sum_se(c)
                    bare = _without_surface(scn)
                    sums["none"] += float(evaluate_closed_form(bare).se.sum())
                for surface in ("star", "conventional", "none"):
                    n_elem = 0 if surface == "none" else l_total
                    rows.append(base + [
                        surface, _fmt(n_elem), _fmt(float(alpha)),
                        _fmt(float(kappa)), _fmt(n_seeds),
                        _fmt(sums[surface] / n_seeds),
                    ])
    return header, rows


def first_fade_zero(doppler_hz: float, symbol_time_s: float):
    """Smallest positive instant where the aging correlation hits zero.

    Returns None when the correlation never reaches zero (no motion).
    """
    rate = 2.0 * math.pi * doppler_hz * symbol_time_s
    if rate <= 0.0:
        return None
    n = max(1, int(_J0_FIRST_ROOT / rate) - 2)
    while bessel_j0(rate * n) > 0.0:
        n += 1
    return n


def run_table1(cfg: SystemConfig):
    """Coherence-block lengths set by the first zero of the aging curve.

    For each speed, reports the earliest instant at which the temporal
    correlation crosses zero; scheduling a block no longer than this
    keeps every downlink symbol positively correlated with the estimate.
    """
    sweep = _sweep(cfg, "table1")
    header = _BASE_COLS + ["velocity_kmh", "doppler_hz", "first_zero_instant"]
    rows = []
    base = _base(cfg, "table1")
    for vel in sweep["velocities"]:
        vel = float(vel)
        if vel < 0.0 or not math.isfinite(vel):
            raise ConfigError("velocities must be finite and nonnegative")
        doppler = vel / 3.6 * cfg.carrier_hz / SPEED_OF_LIGHT
        n = first_fade_zero(doppler, cfg.symbol_time_s)
        rows.append(base + [
            _fmt(vel), _fmt(doppler), "" if n is None else _fmt(n),
        ])
    return header, rows


def run_validate(cfg: SystemConfig, trials=None):
    """Per-user agreement check between the two rate evaluations.

    Returns (header, rows, ok); ok is False when any user's sampled rate
    misses the closed form by more than the relative tolerance. The rows
    are still produced on failure so the report can be written before
    the run is declared bad.
    """
    sweep = _sweep(cfg, "validate")
    tol = float(sweep["tolerance"])
    if not 0.0 < tol < 1.0:
        raise ConfigError("tolerance must be in (0, 1)")
    n_trials = 10000 if trials is None else int(trials)
    header = _BASE_COLS + [
        "user", "trials", "se_cf_bits_per_hz", "se_mc_bits_per_hz",
        "se_mc_stderr_bits_per_hz", "rel_error", "tolerance", "status",
    ]
    scn = place_scenario(cfg)
    cf = evaluate_closed_form(scn)
    mc = estimate_se(scn, trials=n_trials)
    rows = []
    base = _base(cfg, "validate")
    ok = True
    for k in range(cfg.k_users):
        rel = abs(mc.se[k] - cf.se[k]) / cf.se[k]
        status = "pass" if rel <= tol else "fail"
        ok = ok and status == "pass"
        rows.append(base + [
            _fmt(k), _fmt(n_trials), _fmt(float(cf.se[k])),
            _fmt(float(mc.se[k])), _fmt(float(mc.se_stderr[k])),
            _fmt(float(rel)), _fmt(tol), status,
        ])
    return header, rows, ok
