"""Batched channel realizations: direct links, surface cascades, aging.

Every sampler takes an explicit numpy Generator and draws in a documented,
fixed order, so a chunk of Monte Carlo trials is reproducible from its
stream alone. All arrays carry the trial batch as the leading axis.

User-side channels age across the block: the channel at lag n from the
anchor instant is rho(n) times the anchor plus sqrt(1 - rho(n)^2) times an
independent innovation with the same spatial statistics, where rho is the
order-zero Bessel factor of the user's Doppler. AP-side and surface-side
geometry is static over a block, so the surface-to-AP channel does not age.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import bessel_j0, complex_normal, hermitian_sqrt
from .ris_model import MODES, SurfaceStatistics, sample_phase_errors, surface_response
from .scenario import Scenario, SystemConfig


def user_modes(scenario: Scenario) -> np.ndarray:
    """Surface mode serving each user: 'r' in front, 't' behind."""
    return np.where(scenario.is_reflection, "r", "t")


def aging_coefficient(cfg: SystemConfig, lags) -> np.ndarray:
    """Temporal correlation of each user's channel at the given lags.

    INPUT
        lags : scalar or (n,) array of instant differences, in symbols.
    OUTPUT
        (K,) for a scalar lag, else (K, n).
    """
    doppler = cfg.doppler_hz()
    arg = 2.0 * np.pi * cfg.symbol_time_s * np.multiply.outer(doppler, np.asarray(lags))
    return bessel_j0(arg)


def delta_scalars(scenario: Scenario, stats: SurfaceStatistics) -> np.ndarray:
    """(M, K) aggregate channel strengths: direct plus through-surface.

    The aggregate AP-user covariance is this scalar times the shared AP
    antenna correlation.
    """
    modes = user_modes(scenario)
    tr_t = np.array([stats.tr_t[m] for m in modes])
    return scenario.beta_mk + np.outer(scenario.beta_m, scenario.beta_k * tr_t)


def aggregate_covariance(scenario: Scenario, stats: SurfaceStatistics) -> np.ndarray:
    """(M, K, N, N) covariance of the aggregate AP-user channel."""
    delta = delta_scalars(scenario, stats)
    return delta[:, :, None, None] * scenario.R_ap[None, None, :, :]


@dataclass(frozen=True)
class UserChannels:
    """User-side channels at one instant, batched over trials."""

    direct: np.ndarray  # (B, M, K, N) AP-user links
    surface_user: np.ndarray  # (B, K, L) surface-user links


@dataclass(frozen=True)
class ChannelDraw:
    """Everything static over one coherence block, batched over trials."""

    anchor: UserChannels  # user-side channels at the anchor instant
    surface_ap: np.ndarray  # (B, M, N, L) surface-AP links, static
    responses: dict  # mode -> (B, L) element responses with phase errors


def sample_user_channels(
    scenario: Scenario,
    stats: SurfaceStatistics,
    gen: np.random.Generator,
    batch: int,
) -> UserChannels:
    """Draw user-side channels: direct links first, then surface-user links."""
    cfg = scenario.cfg
    m, k, n = cfg.m_aps, cfg.k_users, cfg.n_antennas
    l_elem = cfg.l_elements
    half_ap = hermitian_sqrt(scenario.R_ap)

    v = complex_normal(gen, (batch, m, k, n))
    direct = np.sqrt(scenario.beta_mk)[None, :, :, None] * np.einsum(
        "ij,bmkj->bmki", half_ap, v, optimize=True
    )

    v = complex_normal(gen, (batch, k, l_elem))
    scale = np.sqrt(cfg.element_area_m2 * scenario.beta_k)[None, :, None]
    surface_user = scale * np.einsum(
        "ij,bkj->bki", stats.correlation_half, v, optimize=True
    )
    return UserChannels(direct=direct, surface_user=surface_user)


def sample_channel_draw(
    scenario: Scenario,
    stats: SurfaceStatistics,
    gen: np.random.Generator,
    batch: int,
) -> ChannelDraw:
    """Draw one batch of coherence blocks.

    Draw order: anchor user channels, surface-AP channels, then phase errors
    for mode 'r' followed by mode 't'.
    """
    cfg = scenario.cfg
    m, n, l_elem = cfg.m_aps, cfg.n_antennas, cfg.l_elements
    anchor = sample_user_channels(scenario, stats, gen, batch)

    half_ap = hermitian_sqrt(scenario.R_ap)
    v = complex_normal(gen, (batch, m, n, l_elem))
    scale = np.sqrt(cfg.element_area_m2 * scenario.beta_m)[None, :, None, None]
    surface_ap = scale * np.einsum(
        "np,bmpq,ql->bmnl", half_ap, v, stats.correlation_half, optimize=True
    )

    state = stats.state
    responses = {}
    for mode in MODES:
        errors = sample_phase_errors(
            state.phase_model, state.kappa, (batch, l_elem), gen
        )
        responses[mode] = surface_response(state, mode, errors)
    return ChannelDraw(anchor=anchor, surface_ap=surface_ap, responses=responses)


def age_user_channels(
    anchor: UserChannels, innovation: UserChannels, rho: np.ndarray
) -> UserChannels:
    """User-side channels at a lag with per-user correlation rho.

    The innovation must be an independent draw with the same statistics; the
    result keeps each user's marginal covariance for any rho in [-1, 1].
    """
    rho = np.asarray(rho, dtype=float)
    k = anchor.direct.shape[2]
    if rho.shape != (k,):
        raise ValueError(f"rho must have shape ({k},), got {rho.shape}")
    rho_bar = np.sqrt(1.0 - rho * rho)
    direct = (
        rho[None, None, :, None] * anchor.direct
        + rho_bar[None, None, :, None] * innovation.direct
    )
    surface_user = (
        rho[None, :, None] * anchor.surface_user
        + rho_bar[None, :, None] * innovation.surface_user
    )
    return UserChannels(direct=direct, surface_user=surface_user)


def cascade_channel(
    surface_ap: np.ndarray,
    responses: dict,
    surface_user: np.ndarray,
    modes: np.ndarray,
) -> np.ndarray:
    """(B, M, K, N) through-surface component of each AP-user link.

    Each user's link passes through the response of the mode serving it.
    """
    is_r = np.asarray(modes) == "r"
    resp_user = np.where(
        is_r[None, :, None], responses["r"][:, None, :], responses["t"][:, None, :]
    )
    weighted = resp_user * surface_user
    return np.einsum("bmnl,bkl->bmkn", surface_ap, weighted, optimize=True)


def combined_channel(draw: ChannelDraw, modes: np.ndarray) -> np.ndarray:
    """(B, M, K, N) aggregate anchor-instant channel, direct plus cascade."""
    casc = cascade_channel(
        draw.surface_ap, draw.responses, draw.anchor.surface_user, modes
    )
    return draw.anchor.direct + casc
