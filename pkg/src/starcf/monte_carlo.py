"""Sampled spectral-efficiency estimation by direct system simulation.

This module shares no rate formulas with the closed form. Per trial it
draws one coherence block (anchor channels, surface fading, element phase
errors), runs the pilot phase with fresh per-slot fading innovations and
receiver noise, forms linear MMSE estimates and conjugate beams, and
records moments of the received-signal terms. Agreement with the closed
form is the package's core cross-validation.

Time structure inside a block: the channel at lag n from the anchor is the
anchor channel scaled by the user's aging coefficient rho_k[n] plus an
independent innovation scaled by sqrt(1 - rho_k[n]^2). Conditioned on one
trial, the cross term between user k's channel and the beam for user k' is

    s_kk'[n] = rho_k[n] u_kk' + sqrt(1 - rho_k[n]^2) v_kk'

where u uses the anchor channels and v uses an innovation draw. One
innovation set per trial therefore gives unbiased estimates of the first
and second moments of s_kk'[n] at every lag from two moment sets. Data
symbols and receiver thermal noise enter the hardening rate bound only
through their known powers, so they are never sampled. The surface
amplification noise reaching a user rides on that user's own-mode element
responses and user-side link; its conditional power is accumulated in
anchor, innovation, and cross parts so it too can be assembled at any lag.

Trials are processed in fixed-size chunks, each driven by its own child
random stream, and chunk sums are reduced in a fixed order: results are
reproducible for a given (seed, trials, chunk_size) regardless of how the
caller schedules the work. Standard errors come from a delete-one-chunk
jackknife of the full rate functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    aging_coefficient,
    cascade_channel,
    combined_channel,
    sample_channel_draw,
    sample_user_channels,
    user_modes,
)
from .errors import ConfigError, NumericalError
from .estimation import (
    EstimationStatistics,
    estimation_statistics,
    mmse_estimate,
    project_pilots,
)
from .numerics import RngStream
from .ris_model import SurfaceStatistics, derive_surface_statistics
from .scenario import Scenario
from .se_closed_form import block_lags, power_control

_CHUNK = 512
_MC_STREAM = 3  # child index reserved for trial sampling


@dataclass(frozen=True)
class McResult:
    """Sampled rate estimate with the moment estimates behind it.

    Moment arrays are averages over trials. u refers to anchor-channel
    cross terms, v to innovation cross terms; both include the downlink
    power and power-control weights. dn_* are the conditional surface
    amplification noise powers at the user.
    """

    se: np.ndarray  # (K,) bit/s/Hz
    se_stderr: np.ndarray  # (K,) jackknife standard error
    sinr: np.ndarray  # (K, n) effective SINR per lag
    lags: np.ndarray  # (n,)
    trials: int
    u_mean: np.ndarray  # (K, K) complex, E{u}
    u_sq: np.ndarray  # (K, K) E|u|^2
    v_sq: np.ndarray  # (K, K) E|v|^2
    uv_cross: np.ndarray  # (K, K) complex, E{u conj(v)}
    dn_anchor: np.ndarray  # (K,)
    dn_innov: np.ndarray  # (K,)
    dn_cross: np.ndarray  # (K,)


def _chunk_sizes(trials: int, chunk_size: int) -> list[int]:
    full, rest = divmod(trials, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _moment_se(cfg, rho, mu_sig, u2_sum, v2_sum, uv_sum, dna, dni, dnx):
    """Rates per user from moment estimates, evaluated at every lag.

    rho is (K, n); mu_sig is E{u_kk}; the *_sum arrays are already summed
    over the interfering-beam axis.
    """
    rho_sq = rho * rho
    rho_bar = np.sqrt(np.clip(1.0 - rho_sq, 0.0, None))
    coherent = rho_sq * np.abs(mu_sig)[:, None] ** 2
    total = (
        rho_sq * u2_sum[:, None]
        + rho_bar * rho_bar * v2_sum[:, None]
        + 2.0 * rho * rho_bar * uv_sum[:, None]
    )
    dyn = rho_sq * dna[:, None] + rho_bar * rho_bar * dni[:, None]
    dyn += rho * rho_bar * dnx[:, None]
    denom = total - coherent + dyn + cfg.noise_power_mw
    if np.any(denom <= 0.0):
        raise NumericalError("nonpositive sampled interference power")
    sinr = coherent / denom
    se = np.log2(1.0 + sinr).sum(axis=1) / cfg.block_length
    return se, sinr


def estimate_se(
    scenario: Scenario,
    stats: SurfaceStatistics | None = None,
    est: EstimationStatistics | None = None,
    eta: np.ndarray | None = None,
    trials: int = 2_000,
    seed: int | None = None,
    chunk_size: int = _CHUNK,
) -> McResult:
    """Estimate per-user downlink rates by simulation.

    Derives surface statistics, estimation statistics, and power control
    from the scenario when not supplied, exactly as the closed-form entry
    point does, so both routes evaluate the same deployment.
    """
    cfg = scenario.cfg
    if trials < 1:
        raise ConfigError(f"trials must be positive, got {trials}")
    if chunk_size < 1:
        raise ConfigError(f"chunk_size must be positive, got {chunk_size}")
    if stats is None:
        stats = derive_surface_statistics(cfg)
    if est is None:
        est = estimation_statistics(scenario, stats)
    if eta is None:
        eta = power_control(est)
    if seed is None:
        seed = cfg.seed

    modes = user_modes(scenario)
    is_r = modes == "r"
    sqrt_pd = math.sqrt(cfg.downlink_power_mw)
    sqrt_eta = np.sqrt(eta)
    dyn_power = cfg.dynamic_noise_power_mw
    root = RngStream(seed).child(_MC_STREAM)
    sizes = _chunk_sizes(trials, chunk_size)

    k = cfg.k_users
    n_chunks = len(sizes)
    cs_u = np.zeros((n_chunks, k, k), dtype=complex)
    cs_u2 = np.zeros((n_chunks, k, k))
    cs_v2 = np.zeros((n_chunks, k, k))
    cs_uv = np.zeros((n_chunks, k, k), dtype=complex)
    cs_dn = np.zeros((n_chunks, 3, k))

    for i, batch in enumerate(sizes):
        gen = root.child(i).generator()
        draw = sample_channel_draw(scenario, stats, gen, batch)
        y = project_pilots(scenario, stats, draw, gen)
        ghat = mmse_estimate(est, y, scenario.pilot_index)
        innov = sample_user_channels(scenario, stats, gen, batch)

        anchor_agg = combined_channel(draw, modes)
        innov_agg = innov.direct + cascade_channel(
            draw.surface_ap, draw.responses, innov.surface_user, modes
        )
        beams = ghat.conj()
        u = sqrt_pd * np.einsum(
            "bmkn,bmln,ml->bkl", anchor_agg, beams, sqrt_eta, optimize=True
        )
        v = sqrt_pd * np.einsum(
            "bmkn,bmln,ml->bkl", innov_agg, beams, sqrt_eta, optimize=True
        )

        resp_user = np.where(
            is_r[None, :, None],
            draw.responses["r"][:, None, :],
            draw.responses["t"][:, None, :],
        )
        gain = np.abs(resp_user) ** 2  # (B, K, L) element power gains
        anchor_su = draw.anchor.surface_user
        cs_dn[i, 0] = dyn_power * (np.abs(anchor_su) ** 2 * gain).sum(-1).sum(0)
        cs_dn[i, 1] = dyn_power * (
            (np.abs(innov.surface_user) ** 2 * gain).sum(-1).sum(0)
        )
        cs_dn[i, 2] = (
            2.0
            * dyn_power
            * ((anchor_su * innov.surface_user.conj()).real * gain).sum(-1).sum(0)
        )

        cs_u[i] = u.sum(axis=0)
        cs_u2[i] = (u.real**2 + u.imag**2).sum(axis=0)
        cs_v2[i] = (v.real**2 + v.imag**2).sum(axis=0)
        cs_uv[i] = (u * v.conj()).sum(axis=0)

    size_arr = np.asarray(sizes, dtype=float)

    def reduce(include):
        # include: 0/1 flags per chunk; chunk arrays hold per-chunk sums
        total = float(include @ size_arr)
        u_mean = np.einsum("c,ckl->kl", include, cs_u) / total
        u_sq = np.einsum("c,ckl->kl", include, cs_u2) / total
        v_sq = np.einsum("c,ckl->kl", include, cs_v2) / total
        uv = np.einsum("c,ckl->kl", include, cs_uv) / total
        dn = np.einsum("c,cjk->jk", include, cs_dn) / total
        return u_mean, u_sq, v_sq, uv, dn

    lags = block_lags(cfg)
    rho = aging_coefficient(cfg, lags)
    ones = np.ones(n_chunks)
    u_mean, u_sq, v_sq, uv, dn = reduce(ones)
    se, sinr = _moment_se(
        cfg,
        rho,
        np.diag(u_mean),
        u_sq.sum(axis=1),
        v_sq.sum(axis=1),
        uv.real.sum(axis=1),
        dn[0],
        dn[1],
        dn[2],
    )

    if n_chunks >= 2:
        jack = np.empty((n_chunks, k))
        for c in range(n_chunks):
            w = ones.copy()
            w[c] = 0.0
            um, u2, v2, uvx, dnx = reduce(w)
            jack[c], _ = _moment_se(
                cfg,
                rho,
                np.diag(um),
                u2.sum(axis=1),
                v2.sum(axis=1),
                uvx.real.sum(axis=1),
                dnx[0],
                dnx[1],
                dnx[2],
            )
        dev = jack - jack.mean(axis=0)
        se_stderr = np.sqrt((n_chunks - 1) / n_chunks * (dev**2).sum(axis=0))
    else:
        se_stderr = np.full(k, np.nan)

    return McResult(
        se=se,
        se_stderr=se_stderr,
        sinr=sinr,
        lags=lags,
        trials=trials,
        u_mean=u_mean,
        u_sq=u_sq,
        v_sq=v_sq,
        uv_cross=uv,
        dn_anchor=dn[0],
        dn_innov=dn[1],
        dn_cross=dn[2],
    )
