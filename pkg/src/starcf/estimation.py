"""MMSE estimation of aggregate AP-user channels from time-multiplexed pilots.

Users share a short pilot phase: each user sends its pilot in one slot, so
users in the same slot contaminate each other. APs estimate the aggregate
channel (direct plus through-surface) at the anchor instant, the first
instant after the pilot phase; a user whose pilot came earlier in the phase
carries a larger aging lag into its filter.

The closed-form filter statistics here are what both the analytical rate
expressions and the sampled validation path consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelDraw,
    age_user_channels,
    aggregate_covariance,
    cascade_channel,
    delta_scalars,
    sample_user_channels,
    user_modes,
)
from .errors import NumericalError
from .numerics import bessel_j0, complex_normal
from .ris_model import MODES, SurfaceStatistics
from .scenario import Scenario

# Beyond this the pilot covariance solve is numerically meaningless.
_MAX_CONDITION = 1e12


@dataclass(frozen=True)
class EstimationStatistics:
    """Filter matrices and second moments of the channel estimates."""

    delta: np.ndarray  # (M, K) aggregate channel strengths
    delta_mats: np.ndarray  # (M, K, N, N) aggregate covariances
    psi: np.ndarray  # (M, K, N, N) pilot projection covariances
    z: np.ndarray  # (M, K, N, N) MMSE filters
    q: np.ndarray  # (M, K, N, N) estimate covariances
    tr_q: np.ndarray  # (M, K) real traces of q
    rho_pilot: np.ndarray  # (K,) aging between each pilot and the anchor


def z_from_psi(
    psi: np.ndarray, delta_mats: np.ndarray, gain: np.ndarray
) -> np.ndarray:
    """MMSE filters gain * delta psi^{-1} for stacked Hermitian matrices.

    INPUT
        psi        : (..., N, N) Hermitian positive definite
        delta_mats : (..., N, N) Hermitian
        gain       : (...) scalar factor per matrix pair
    Raises NumericalError when any psi is singular or has condition number
    above 1e12.
    """
    vals = np.linalg.eigvalsh(psi)
    smallest = vals[..., 0]
    largest = vals[..., -1]
    cond = largest / np.maximum(smallest, 1e-300)
    if np.any(smallest <= 0.0) or np.any(cond > _MAX_CONDITION):
        worst = float(np.max(cond))
        raise NumericalError(
            f"pilot covariance is ill conditioned (condition {worst:.3e})"
        )
    x = np.linalg.solve(psi, delta_mats)  # psi^{-1} delta
    z = np.conj(np.swapaxes(x, -1, -2))  # delta psi^{-1}, both Hermitian
    return np.asarray(gain)[..., None, None] * z


def estimation_statistics(
    scenario: Scenario, stats: SurfaceStatistics
) -> EstimationStatistics:
    """Closed-form pilot and estimation second moments for one deployment."""
    cfg = scenario.cfg
    m_aps, k_users = cfg.m_aps, cfg.k_users
    n = cfg.n_antennas

    delta = delta_scalars(scenario, stats)
    delta_mats = aggregate_covariance(scenario, stats)

    # per-user sum of aggregate strengths over its pilot group
    group_sum = np.empty_like(delta)
    for t in range(cfg.pilot_length):
        members = scenario.pilot_index == t
        if np.any(members):
            group_sum[:, members] = delta[:, members].sum(axis=1, keepdims=True)

    surface_noise = (
        scenario.beta_m * cfg.dynamic_noise_power_mw * stats.tr_gamma_total
    )
    scale = cfg.pilot_power_mw * group_sum + surface_noise[:, None]
    psi = (
        scale[:, :, None, None] * scenario.R_ap[None, None, :, :]
        + cfg.noise_power_mw * np.eye(n)[None, None, :, :]
    )

    rho_pilot = bessel_j0(
        2.0 * math.pi * cfg.doppler_hz() * cfg.symbol_time_s * scenario.pilot_lag
    )
    gain = np.broadcast_to(
        math.sqrt(cfg.pilot_power_mw) * rho_pilot[None, :], (m_aps, k_users)
    )
    z = z_from_psi(psi, delta_mats, gain)
    q = gain[:, :, None, None] * (z @ delta_mats)
    q = 0.5 * (q + np.conj(np.swapaxes(q, -1, -2)))
    tr_q = np.trace(q, axis1=-2, axis2=-1).real
    return EstimationStatistics(
        delta=delta,
        delta_mats=delta_mats,
        psi=psi,
        z=z,
        q=q,
        tr_q=tr_q,
        rho_pilot=rho_pilot,
    )


def project_pilots(
    scenario: Scenario,
    stats: SurfaceStatistics,
    draw: ChannelDraw,
    gen: np.random.Generator,
) -> np.ndarray:
    """Received pilot projections per slot and AP for a batch of blocks.

    Draw order per slot, slots ascending: user-channel innovations, surface
    amplification noise for mode 'r' then mode 't', AP thermal noise. The
    surface noise of a slot is shared by every AP, as all APs hear the same
    surface.

    OUTPUT
        (B, pilot_length, M, N) complex array.
    """
    cfg = scenario.cfg
    batch = draw.anchor.direct.shape[0]
    modes = user_modes(scenario)
    doppler = cfg.doppler_hz()
    sqrt_pp = math.sqrt(cfg.pilot_power_mw)
    sqrt_dyn = math.sqrt(cfg.dynamic_noise_power_mw)
    sqrt_noise = math.sqrt(cfg.noise_power_mw)

    y = np.zeros(
        (batch, cfg.pilot_length, cfg.m_aps, cfg.n_antennas), dtype=complex
    )
    for t in range(cfg.pilot_length):
        innovation = sample_user_channels(scenario, stats, gen, batch)
        lag = cfg.pilot_length - t  # slot t+1 to anchor, in symbols
        rho_t = bessel_j0(2.0 * math.pi * doppler * cfg.symbol_time_s * lag)
        chans = age_user_channels(draw.anchor, innovation, rho_t)
        h = chans.direct + cascade_channel(
            draw.surface_ap, draw.responses, chans.surface_user, modes
        )
        members = np.flatnonzero(scenario.pilot_index == t)
        y[:, t] = sqrt_pp * h[:, :, members, :].sum(axis=2)
        for mode in MODES:
            v = sqrt_dyn * complex_normal(gen, (batch, cfg.l_elements))
            y[:, t] += np.einsum(
                "bmnl,bl->bmn",
                draw.surface_ap,
                draw.responses[mode] * v,
                optimize=True,
            )
        y[:, t] += sqrt_noise * complex_normal(
            gen, (batch, cfg.m_aps, cfg.n_antennas)
        )
    return y


def mmse_estimate(
    est: EstimationStatistics, y: np.ndarray, pilot_index: np.ndarray
) -> np.ndarray:
    """Anchor-instant channel estimates from pilot projections.

    INPUT
        y : (B, pilot_length, M, N) from project_pilots.
    OUTPUT
        (B, M, K, N) estimates of the aggregate channels.
    """
    y_per_user = y[:, pilot_index]  # (B, K, M, N)
    return np.einsum("mkij,bkmj->bmki", est.z, y_per_user, optimize=True)
