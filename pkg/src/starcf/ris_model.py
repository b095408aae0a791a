"""Statistics of an energy-splitting, amplifying reconfigurable surface.

The surface serves two disjoint coverage modes at once, "r" (users on the
front side) and "t" (users on the back side). Every element splits its power
between the modes, applies a nominal per-mode phase shift, amplifies by a
common factor, and adds a random phase error drawn fresh per coherence block.

This module turns a SystemConfig into the deterministic second- and
fourth-order quantities the estimator and the rate expressions consume:
spatial correlation across the element grid, per-mode effective correlation
under phase errors, the cascade trace factors, and exact expectations of
products of the cascade matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .numerics import (
    RngStream,
    bessel_i2_ratio,
    bessel_i_ratio,
    hermitian_sqrt,
)
from .scenario import SystemConfig

MODES = ("r", "t")


def element_positions(
    l_elements: int, l_horizontal: int, spacing_wavelengths: float
) -> np.ndarray:
    """Planar grid coordinates of the surface elements, in wavelengths.

    Element x sits at column (x mod l_horizontal) and row (x div
    l_horizontal), both scaled by the element pitch.

    OUTPUT
        (l_elements, 2) array of (horizontal, vertical) positions.
    """
    idx = np.arange(l_elements)
    cols = idx % l_horizontal
    rows = idx // l_horizontal
    return spacing_wavelengths * np.stack([cols, rows], axis=1).astype(float)


def build_ris_correlation(
    l_elements: int, l_horizontal: int, spacing_wavelengths: float
) -> np.ndarray:
    """Isotropic spatial correlation across the element grid.

    Entry (x, y) is sinc(2 d / wavelength) for element separation d, the
    closed form for a densely packed planar array under isotropic scattering.
    Unit diagonal; symmetric PSD.
    """
    pos = element_positions(l_elements, l_horizontal, spacing_wavelengths)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return np.sinc(2.0 * dist)


def phase_error_phi(model: str, kappa: float) -> float:
    """First circular moment E{cos(t)} of the phase-error law.

    uniform   : errors on [-kappa, kappa], resultant sin(kappa)/kappa
    von_mises : concentration kappa, resultant I1(kappa)/I0(kappa)
    none      : no errors, resultant 1
    """
    if model == "none":
        return 1.0
    if kappa == 0.0:
        return 1.0
    if model == "uniform":
        return float(np.sinc(kappa / math.pi))
    if model == "von_mises":
        return bessel_i_ratio(kappa)
    raise ValueError(f"unknown phase-error model: {model!r}")


def phase_error_phi2(model: str, kappa: float) -> float:
    """Second circular moment E{cos(2t)} of the phase-error law.

    Enters only fourth-order statistics (products of two cascade matrices
    sharing one error draw); second-order quantities depend on the first
    moment alone.
    """
    if model == "none":
        return 1.0
    if kappa == 0.0:
        return 1.0
    if model == "uniform":
        return float(np.sinc(2.0 * kappa / math.pi))
    if model == "von_mises":
        return bessel_i2_ratio(kappa)
    raise ValueError(f"unknown phase-error model: {model!r}")


def sample_phase_errors(model: str, kappa: float, size, rng: np.random.Generator):
    """Draw phase errors for one mode; shape `size`, radians."""
    if model == "none" or kappa == 0.0:
        return np.zeros(size)
    if model == "uniform":
        return rng.uniform(-kappa, kappa, size)
    if model == "von_mises":
        return rng.vonmises(0.0, kappa, size)
    raise ValueError(f"unknown phase-error model: {model!r}")


@dataclass(frozen=True)
class RisState:
    """Configured state of the surface: splits, gains and nominal phases."""

    element_area: float  # m^2, one element
    amplification: float  # per-element power gain
    u_r: float  # reflection amplitude share
    u_t: float  # transmission amplitude share
    phases_r: np.ndarray  # (L,) nominal phases, reflection mode
    phases_t: np.ndarray  # (L,) nominal phases, transmission mode
    phase_model: str
    kappa: float
    phi: float  # first circular moment of the error law
    phi2: float  # second circular moment

    @property
    def l_elements(self) -> int:
        return self.phases_r.shape[0]

    def mode_amplitude(self, mode: str) -> float:
        _check_mode(mode)
        return self.u_r if mode == "r" else self.u_t

    def phases(self, mode: str) -> np.ndarray:
        _check_mode(mode)
        return self.phases_r if mode == "r" else self.phases_t

    def coeff(self, mode: str) -> np.ndarray:
        """Deterministic element coefficients sqrt(gain) u exp(i phase)."""
        amp = math.sqrt(self.amplification) * self.mode_amplitude(mode)
        return amp * np.exp(1j * self.phases(mode))

    def with_phase_offset(self, offset: float) -> "RisState":
        """Same state with a common phase added to every nominal phase."""
        return replace(
            self, phases_r=self.phases_r + offset, phases_t=self.phases_t + offset
        )


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def build_ris_state(cfg: SystemConfig, rng: RngStream | None = None) -> RisState:
    """Surface state from the configuration.

    Nominal phases are all zero or drawn uniformly on [0, 2 pi) from a
    dedicated child stream of the configured seed (reflection profile first,
    then transmission), so the profile is reproducible and independent of
    placement and fading draws.
    """
    l_elem = cfg.l_elements
    if cfg.nominal_phases == "zero":
        phases_r = np.zeros(l_elem)
        phases_t = np.zeros(l_elem)
    else:
        stream = rng if rng is not None else RngStream(cfg.seed).child(2)
        gen = stream.generator()
        phases_r = gen.uniform(0.0, 2.0 * math.pi, l_elem)
        phases_t = gen.uniform(0.0, 2.0 * math.pi, l_elem)
    return RisState(
        element_area=cfg.element_area_m2,
        amplification=cfg.amplification,
        u_r=math.sqrt(cfg.u_split),
        u_t=math.sqrt(1.0 - cfg.u_split),
        phases_r=phases_r,
        phases_t=phases_t,
        phase_model=cfg.phase_model,
        kappa=cfg.kappa,
        phi=phase_error_phi(cfg.phase_model, cfg.kappa),
        phi2=phase_error_phi2(cfg.phase_model, cfg.kappa),
    )


def surface_response(state: RisState, mode: str, errors: np.ndarray) -> np.ndarray:
    """Per-element response diag of the surface for given phase errors.

    errors broadcasts against the element axis, e.g. (draws, L) against (L,).
    """
    return state.coeff(mode) * np.exp(1j * np.asarray(errors))


def build_r_bar(state: RisState, corr: np.ndarray, mode: str) -> np.ndarray:
    """Mean effective correlation of the error-perturbed surface response.

    Expectation of diag(response) corr diag(response)^H over phase errors:
    off-diagonal entries shrink by the squared first moment, the diagonal is
    untouched.
    """
    c = state.coeff(mode)
    outer = np.outer(c, c.conj())
    phi_sq = state.phi * state.phi
    diag_part = np.diag(np.diag(corr))
    return outer * (phi_sq * corr + (1.0 - phi_sq) * diag_part)


def t_matrix(
    state: RisState, corr_half: np.ndarray, corr: np.ndarray, mode: str
) -> np.ndarray:
    """Mean cascade matrix; its trace scales every through-surface power."""
    r_bar = build_r_bar(state, corr, mode)
    t = state.element_area**2 * (corr_half @ r_bar @ corr_half)
    return 0.5 * (t + t.conj().T)


def gamma_matrix(state: RisState, corr: np.ndarray, mode: str) -> np.ndarray:
    """Second moment of the bare surface response, robust to phase errors.

    With a common element gain the response magnitudes are deterministic, so
    this is area * gain * share^2 * corr; phase errors never enter.
    """
    _check_mode(mode)
    share = state.mode_amplitude(mode) ** 2
    return state.element_area * state.amplification * share * corr


def _partition_tables():
    """Index-coincidence machinery for exact fourth-moment traces.

    The quartic sum runs over four element indices in the cyclic chain
    X R X R. Grouping assignments by which indices coincide reduces the
    expectation to a fixed linear combination of 15 unrestricted einsum
    contractions, one per set partition of the four slots; the combination
    weights come from inverting the partition lattice's containment matrix.
    """
    parts: list[tuple[int, ...]] = []

    def grow(prefix):
        if len(prefix) == 4:
            parts.append(tuple(prefix))
            return
        top = max(prefix)
        for block in range(top + 2):
            grow(prefix + [block])

    grow([0])

    signs = (1, -1, 1, -1)  # conjugation pattern along the chain
    subscripts = []
    harmonics = []
    for p in parts:
        letters = "".join("abcd"[b] for b in p)
        i, j, k, l = letters
        subscripts.append(f"{i}{j},{j}{k},{k}{l},{l}{i}->")
        net: dict[int, int] = {}
        for slot, block in enumerate(p):
            net[block] = net.get(block, 0) + signs[slot]
        harmonics.append(tuple(abs(n) for n in net.values()))

    def finer(p, r):
        return all(
            r[x] == r[y] for x in range(4) for y in range(4) if p[x] == p[y]
        )

    contain = np.array(
        [[1.0 if finer(p, r) else 0.0 for p in parts] for r in parts]
    )
    inv = np.linalg.inv(contain)
    weights = np.rint(inv)
    if np.abs(inv - weights).max() > 1e-9:
        raise RuntimeError("partition containment matrix inversion failed")
    return subscripts, harmonics, weights


_QUARTIC_SUBS, _QUARTIC_HARMONICS, _QUARTIC_WEIGHTS = _partition_tables()


def quartic_trace_expectation(
    c: np.ndarray, corr: np.ndarray, phi: float, phi2: float
) -> float:
    """Exact E{tr(Y corr Y corr)} with Y = D corr D^H, D = diag(c e^{i t}).

    The t_l are iid with a symmetric law whose first and second circular
    moments are phi and phi2. Each coincidence pattern of the four chain
    indices contributes its own harmonic factor, so the result is exact for
    any spread, unlike a factorization that keeps first moments only.
    """
    c = np.asarray(c)
    x = np.outer(c, c.conj()) * corr
    moments = (1.0, float(phi), float(phi2))
    mu = np.array(
        [math.prod(moments[n] for n in h) for h in _QUARTIC_HARMONICS]
    )
    coeff = _QUARTIC_WEIGHTS @ mu
    total = 0.0 + 0.0j
    for w, sub in zip(coeff, _QUARTIC_SUBS):
        if w == 0.0:
            continue
        total += w * np.einsum(sub, x, corr, x, corr, optimize=True)
    return float(total.real)


def t_product_expectation(
    state: RisState, corr: np.ndarray, mode_a: str, mode_b: str
) -> float:
    """Expected trace of the product of two cascade matrices.

    Same mode: both matrices share one phase-error draw, so fourth moments
    of the errors enter and the exact quartic expectation is used. Distinct
    modes: the draws are independent and the product of the two mean
    matrices is exact.
    """
    _check_mode(mode_a)
    _check_mode(mode_b)
    area4 = state.element_area**4
    if mode_a == mode_b:
        return area4 * quartic_trace_expectation(
            state.coeff(mode_a), corr, state.phi, state.phi2
        )
    r_bar_a = build_r_bar(state, corr, mode_a)
    r_bar_b = build_r_bar(state, corr, mode_b)
    return area4 * float(np.trace(r_bar_a @ corr @ r_bar_b @ corr).real)


@dataclass(frozen=True)
class SurfaceStatistics:
    """Every deterministic surface quantity the later stages consume."""

    state: RisState
    correlation: np.ndarray  # (L, L) element correlation
    correlation_half: np.ndarray  # its principal square root
    r_bar: dict  # mode -> mean effective correlation
    t_mean: dict  # mode -> mean cascade matrix
    gamma: dict  # mode -> bare response second moment
    tr_t: dict  # mode -> trace of t_mean
    tr_gamma: dict  # mode -> trace of gamma
    tr_gamma_total: float  # both modes summed
    t_product: dict  # (mode, mode) -> E{tr(T_a T_b)}
    t_gamma_product: dict  # mode -> tr(T_mode (gamma_r + gamma_t))


def derive_surface_statistics(
    cfg: SystemConfig, state: RisState | None = None
) -> SurfaceStatistics:
    """Assemble all second- and fourth-order surface statistics once."""
    corr = build_ris_correlation(
        cfg.l_elements, cfg.l_horizontal, cfg.spacing_wavelengths
    )
    corr_half = hermitian_sqrt(corr)
    if state is None:
        state = build_ris_state(cfg)

    r_bar = {m: build_r_bar(state, corr, m) for m in MODES}
    t_mean = {m: t_matrix(state, corr_half, corr, m) for m in MODES}
    gamma = {m: gamma_matrix(state, corr, m) for m in MODES}
    tr_t = {m: float(np.trace(t_mean[m]).real) for m in MODES}
    tr_gamma = {m: float(np.trace(gamma[m]).real) for m in MODES}
    gamma_sum = gamma["r"] + gamma["t"]
    t_product = {
        (a, b): t_product_expectation(state, corr, a, b)
        for a in MODES
        for b in MODES
    }
    t_gamma_product = {
        m: float(np.trace(t_mean[m] @ gamma_sum).real) for m in MODES
    }
    return SurfaceStatistics(
        state=state,
        correlation=corr,
        correlation_half=corr_half,
        r_bar=r_bar,
        t_mean=t_mean,
        gamma=gamma,
        tr_t=tr_t,
        tr_gamma=tr_gamma,
        tr_gamma_total=tr_gamma["r"] + tr_gamma["t"],
        t_product=t_product,
        t_gamma_product=t_gamma_product,
    )
