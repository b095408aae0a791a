"""Closed-form downlink rate of the surface-assisted cell-free system.

APs beamform conjugately on their channel estimates; users decode knowing
only statistics, so a use-and-then-forget rate bound applies. The effective
SINR at lag n from the anchor splits into a coherent power and three noise
floors: interference that scales with the squared aging factor, interference
that does not, the surface's amplification noise, and thermal noise. A
single evaluation yields the whole block's rate curve.

All expectations over surface phase errors use exact fourth-moment
statistics from ris_model, so the only gap to a sampled evaluation is Monte
Carlo noise and non-Gaussian residuals of the cascade, not a truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import aging_coefficient, user_modes
from .errors import NumericalError
from .estimation import EstimationStatistics, estimation_statistics
from .ris_model import SurfaceStatistics, derive_surface_statistics
from .scenario import Scenario, SystemConfig


def power_control(est: EstimationStatistics) -> np.ndarray:
    """(M, K) downlink power coefficients spending each AP's full budget.

    Each AP splits its power over the users it serves in proportion to
    nothing: the coefficient is the inverse of the AP's total estimate
    power, identical across users, which radiates exactly the downlink
    power at every AP.
    """
    per_ap = est.tr_q.sum(axis=1)  # (M,)
    if np.any(per_ap <= 0):
        raise NumericalError("an AP has no estimate power to allocate")
    return np.broadcast_to(1.0 / per_ap[:, None], est.tr_q.shape).copy()


@dataclass(frozen=True)
class SinrComponents:
    """Per-user pieces of the effective SINR at lag n.

    sinr_k(n) = coherent rho_k^2(n) /
        (aging_interference rho_k^2(n) - coherent rho_k^2(n)
         + static_interference + dynamic_noise + noise)
    """

    coherent: np.ndarray  # (K,) beamformed signal power factor
    aging_interference: np.ndarray  # (K,) scales with rho^2, includes coherent
    static_interference: np.ndarray  # (K,) lag-independent interference
    dynamic_noise: np.ndarray  # (K,) surface amplification noise
    noise: float  # thermal


def sinr_components(
    scenario: Scenario,
    stats: SurfaceStatistics,
    est: EstimationStatistics,
    eta: np.ndarray,
) -> SinrComponents:
    """Assemble the closed-form SINR pieces for every user."""
    cfg = scenario.cfg
    p_d = cfg.downlink_power_mw
    p_p = cfg.pilot_power_mw
    sigma_v2 = cfg.dynamic_noise_power_mw
    modes = user_modes(scenario)
    r_ap = scenario.R_ap
    z = est.z
    sqrt_eta = np.sqrt(eta)

    # coherent power: matched estimates add across APs
    coherent = p_d * (sqrt_eta * est.tr_q).sum(axis=0) ** 2  # (K,)

    same_slot = (
        scenario.pilot_index[:, None] == scenario.pilot_index[None, :]
    ).astype(float)  # (K, K)

    # copilot coherent interference: estimates of a user's copilots carry its
    # pilot, so their beams point partly at it
    dz = np.einsum("mkab,mlab->mkl", est.delta_mats, z.conj()).real  # tr(D Z^H)
    s = np.einsum("ml,mkl->lk", sqrt_eta, dz)  # (k', k)
    copilot_coherent = (
        p_p * est.rho_pilot**2 * np.einsum("lk,lk->k", same_slot, s * s)
    )

    # copilot cascade fluctuation: the shared surface makes the through-link
    # of the pilot non-Gaussian; exact fourth moments enter here
    rzrz = np.einsum(
        "ab,mkcb,cd,mkda->mk", r_ap, z.conj(), r_ap, z, optimize=True
    ).real  # tr(R Z^H R Z)
    tt_same = np.array([stats.t_product[(w, w)] for w in modes])  # (K,)
    beta_m2 = scenario.beta_m**2
    per_ap_quartic = np.einsum("mk,m,mk->k", eta, beta_m2, rzrz)  # over k'
    copilot_quartic = (
        p_p
        * est.rho_pilot**2
        * scenario.beta_k**2
        * tt_same
        * (same_slot @ per_ap_quartic)
    )

    aging_interference = p_d * (copilot_coherent + copilot_quartic)

    # average beamformed interference power, every user against every beam:
    # tr(D_mk Q_mk') weighted by the beam's power coefficient
    dq_eta = np.einsum("mkab,mlba,ml->kl", est.delta_mats, est.q, eta).real
    static = p_d * dq_eta.sum(axis=1)  # (K,)

    # coherent surface correlation: all beams bounce off one surface draw
    rz1 = np.einsum("ab,mkba->mk", r_ap, z).real  # tr(R Z)
    r_coh = np.einsum("mk,m,mk->k", sqrt_eta, scenario.beta_m, rz1)  # (k',)
    tt_pair = np.array(
        [[stats.t_product[(wa, wb)] for wb in modes] for wa in modes]
    )  # (K, K) mode-pair product traces
    inner = (tt_pair * scenario.beta_k[None, :]) @ same_slot  # (k, k')
    gamma_term = np.array([stats.t_gamma_product[w] for w in modes])  # (K,)
    weights = p_p * inner + sigma_v2 * gamma_term[:, None]  # (k, k')
    surface_coherent = p_d * scenario.beta_k * (weights @ (r_coh * r_coh))

    static_interference = static + surface_coherent

    tr_gamma_mode = np.array([stats.tr_gamma[w] for w in modes])
    dynamic_noise = sigma_v2 * scenario.beta_k * tr_gamma_mode

    return SinrComponents(
        coherent=coherent,
        aging_interference=aging_interference,
        static_interference=static_interference,
        dynamic_noise=dynamic_noise,
        noise=cfg.noise_power_mw,
    )


def block_lags(cfg: SystemConfig) -> np.ndarray:
    """Lags of the downlink instants from the anchor: 0 .. block end."""
    return np.arange(cfg.block_length - cfg.pilot_length)


def instant_sinr(cfg: SystemConfig, comp: SinrComponents, lags) -> np.ndarray:
    """Per-user effective SINR at arbitrary lags from the anchor instant.

    OUTPUT
        sinr : (K, n)
    """
    lags = np.asarray(lags)
    rho = aging_coefficient(cfg, lags)  # (K, n)
    rho_sq = rho * rho
    numer = comp.coherent[:, None] * rho_sq
    denom = (
        (comp.aging_interference - comp.coherent)[:, None] * rho_sq
        + comp.static_interference[:, None]
        + comp.dynamic_noise[:, None]
        + comp.noise
    )
    if np.any(denom <= 0.0):
        raise NumericalError("nonpositive effective noise power in rate bound")
    return numer / denom


def block_sinr(cfg: SystemConfig, comp: SinrComponents):
    """Per-user effective SINR across the downlink instants.

    OUTPUT
        lags : (n,) instant lags from the anchor
        sinr : (K, n)
    """
    lags = block_lags(cfg)
    return lags, instant_sinr(cfg, comp, lags)


@dataclass(frozen=True)
class ClosedFormResult:
    """Closed-form rate evaluation of one deployment."""

    se: np.ndarray  # (K,) rate per user, bit/s/Hz
    sinr: np.ndarray  # (K, n) per instant
    lags: np.ndarray  # (n,)
    components: SinrComponents
    eta: np.ndarray  # (M, K) power control


def evaluate_closed_form(
    scenario: Scenario,
    stats: SurfaceStatistics | None = None,
    est: EstimationStatistics | None = None,
    eta: np.ndarray | None = None,
) -> ClosedFormResult:
    """Full closed-form evaluation; derives whatever inputs are omitted."""
    cfg = scenario.cfg
    if stats is None:
        stats = derive_surface_statistics(cfg)
    if est is None:
        est = estimation_statistics(scenario, stats)
    if eta is None:
        eta = power_control(est)
    comp = sinr_components(scenario, stats, est, eta)
    lags, sinr = block_sinr(cfg, comp)
    se = np.log2(1.0 + sinr).sum(axis=1) / cfg.block_length
    return ClosedFormResult(
        se=se, sinr=sinr, lags=lags, components=comp, eta=eta
    )
