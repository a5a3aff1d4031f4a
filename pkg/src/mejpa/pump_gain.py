"""Small-signal three-wave-mixing gain of the flux-pumped SQUID.

The SQUID node flux obeys, per sideband, D(w) phi = I with

    D(w) = -w^2 C + Gamma0 + i w Y_env(w)

and the pump couples the signal at w_s to the conjugate idler at
w_i = w_p - w_s through gamma1::

    D(w_s) phi_s        + gamma1 conj(phi_i) = I_drive
    conj(gamma1) phi_s  + conj(D(w_i)) conj(phi_i) = 0

Eliminating the idler gives the pumped device admittance (the
pumpistor), which is transformed through the line sections to the
source plane. Only the signal and idler sidebands are kept and the pump
is stiff, so the model is linear.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .design import DesignConfig, PumpParams
from .errors import DomainError, FitQualityError, ThresholdError, UnreachableTargetError
from .junction_lab import (
    DEFAULT_CONSTANTS,
    MAX_PUMP_DEPTH,
    inverse_inductance_slope,
    pump_modulation_coefficients,
)
from .network import impedance_looking_into, source_to_device

#: Operating points must keep |gamma1|^2 <= (1 - margin) |D(w_p/2)|^2.
THRESHOLD_MARGIN = 1e-2

HALF_POWER_DB = 10 * np.log10(2.0)


@dataclass(frozen=True)
class SidebandPair:
    """Signal and idler angular frequencies; their sum is the pump."""

    omega_s: float
    omega_i: float

    def __post_init__(self):
        if np.any(np.asarray(self.omega_s) <= 0) or np.any(np.asarray(self.omega_i) <= 0):
            raise DomainError("signal and idler frequencies must be > 0")

    @classmethod
    def from_signal(cls, f_signal, f_pump):
        w_s = 2 * np.pi * np.asarray(f_signal, dtype=float)
        w_p = 2 * np.pi * f_pump
        return cls(w_s, w_p - w_s)

    @property
    def omega_p(self):
        return self.omega_s + self.omega_i


@dataclass(frozen=True)
class GainProfile:
    """Reflection gain on a frequency grid plus fitted profile metrics.

    ``g2`` and ``g4`` are coefficients of the linear power gain in powers
    of the angular detuning (rad/s) from ``f_center``. Bandwidths are in
    Hz and ``None`` when the centre gain is below the level.
    """

    freqs: np.ndarray
    g_complex: np.ndarray
    idler_complex: np.ndarray
    gain_db: np.ndarray
    f_center: float
    center_gain_db: float
    g0: float
    g2: float
    g4: float
    kappa0: float
    fit_half_width: float
    threshold_db: float
    bw_at_threshold: float
    bw_3db: float
    ripple_db: float
    band_truncated: bool = False

    @property
    def g0_db(self):
        return 10 * np.log10(self.g0)


def environment_admittance(env, omega):
    return 1.0 / impedance_looking_into(env, np.asarray(omega) / (2 * np.pi))


def sideband_denominator(omega, squid, mods, env):
    """Node coefficient D(w) = -w^2 C + Gamma0 + i w Y_env(w)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("omega must be > 0")
    return -omega**2 * squid.c_total + mods.gamma0 + 1j * omega * environment_admittance(env, omega)


def critical_pump_depth(squid, env, f_pump, constants=DEFAULT_CONSTANTS):
    """Pump depth at which the degenerate-point determinant reaches zero."""
    mods = pump_modulation_coefficients(squid, 0.0, constants)
    d_c = sideband_denominator(np.pi * f_pump, squid, mods, env)
    slope = abs(inverse_inductance_slope(squid, constants))
    if slope == 0.0:
        return np.inf
    return 2.0 * abs(d_c) / slope


def _check_threshold(squid, pump, env, mods, constants):
    # at w_s = w_i = w_p/2 the determinant |D|^2 - |gamma1|^2 is real
    d_c = sideband_denominator(pump.omega_p / 2, squid, mods, env)
    if abs(d_c) ** 2 - abs(mods.gamma1) ** 2 <= 0.0:
        crit = critical_pump_depth(squid, env, pump.f_pump, constants)
        raise ThresholdError(
            f"pump depth {pump.pump_depth:.6g} Phi0 is at or above the parametric "
            f"oscillation threshold (critical depth {crit:.6g} Phi0)",
            critical_depth=crit,
        )


def reflection_gain(pair, squid, pump, env, constants=DEFAULT_CONSTANTS):
    """Signal reflection and idler conversion amplitudes at the source plane.

    Both are ratios of power waves referenced to the (real) source
    impedance, per unit incident signal wave; arrays broadcast.

    Returns
    -------
    g_s, g_i : complex or ndarray
    """
    mods = pump_modulation_coefficients(squid, pump.pump_depth, constants, pump.pump_phase)
    _check_threshold(squid, pump, env, mods, constants)
    w_s = np.asarray(pair.omega_s, dtype=float)
    w_i = np.asarray(pair.omega_i, dtype=float)
    c = squid.c_total
    d_i = sideband_denominator(w_i, squid, mods, env)
    g1 = mods.gamma1
    # pumpistor: idler branch folded into the signal admittance
    y_dev = (-w_s**2 * c + mods.gamma0 - abs(g1) ** 2 / np.conj(d_i)) / (1j * w_s)

    z0 = env.source_impedance
    m_s = source_to_device(env, w_s / (2 * np.pi))
    # written in admittance form so that Y_dev = 0 (open circuit) is regular
    v1 = m_s.a + m_s.b * y_dev
    i1 = m_s.c + m_s.d * y_dev
    den = v1 + z0 * i1
    g_s = (v1 - z0 * i1) / den
    # device voltage for a unit incident wave
    v2 = 2 * np.sqrt(z0) / den
    phi_s = v2 / (1j * w_s)
    phi_i = -g1 * np.conj(phi_s) / d_i
    v_i = 1j * w_i * phi_i
    m_i = source_to_device(env, w_i / (2 * np.pi))
    # idler leaves through the source port, which is terminated in z0
    i2 = -(m_i.a + z0 * m_i.c) * v_i / (m_i.b + z0 * m_i.d)
    g_i = (m_i.a * v_i + m_i.b * i2) / np.sqrt(z0)
    return g_s[()], g_i[()]


def center_gain_db(config, pump=None):
    pump = config.pump if pump is None else pump
    pair = SidebandPair.from_signal(pump.f_pump / 2, pump.f_pump)
    g_s, _ = reflection_gain(pair, config.squid, pump, config.transformer, config.constants)
    return 20 * np.log10(abs(g_s))


def loaded_resonance(config, f_center=None, window=0.5, points=4001):
    """Unpumped loaded resonance and its linewidth.

    The resonance is a zero of the total node susceptance with positive
    slope; the linewidth follows from the phase slope of the total node
    admittance, kappa0 = 2 G_env / (dB/dw).

    Returns
    -------
    (omega_r, kappa0) : tuple of float, both in rad/s
    """
    f_center = config.f_center if f_center is None else f_center
    squid, env = config.squid, config.transformer
    mods = pump_modulation_coefficients(squid, 0.0, config.constants)

    def y_tot(w):
        return 1j * w * squid.c_total + mods.gamma0 / (1j * w) + environment_admittance(env, w)

    def b_tot(w):
        return y_tot(w).imag

    lo = max(f_center * (1 - window), 1e-3 * f_center)
    ws = 2 * np.pi * np.linspace(lo, f_center * (1 + window), points)
    bs = b_tot(ws)
    best = None
    for k in np.nonzero(np.sign(bs[:-1]) != np.sign(bs[1:]))[0]:
        w_r = brentq(b_tot, ws[k], ws[k + 1], xtol=1e-6, rtol=1e-14)
        h = 1e-6 * w_r
        slope = (b_tot(w_r + h) - b_tot(w_r - h)) / (2 * h)
        # discard poles of Y_env and anti-resonances
        scale = squid.c_total * w_r
        if slope <= 0 or abs(b_tot(w_r)) > 1e-6 * scale:
            continue
        g_env = y_tot(w_r).real
        if g_env <= 0:
            continue
        if best is None or abs(w_r - 2 * np.pi * f_center) < abs(best[0] - 2 * np.pi * f_center):
            best = (w_r, 2 * g_env / slope)
    if best is None:
        raise FitQualityError(
            f"no loaded resonance within +-{window:.0%} of {f_center:.6g} Hz"
        )
    return best


def unpumped_linewidth(config, f_center=None):
    """Loaded linewidth kappa0 (rad/s) of the resonance nearest ``f_center``."""
    return loaded_resonance(config, f_center)[1]


def _power_gain(config, f):
    pair = SidebandPair.from_signal(f, config.pump.f_pump)
    g_s, _ = reflection_gain(pair, config.squid, config.pump, config.transformer, config.constants)
    return np.abs(g_s) ** 2


def fit_even_polynomial(config, half_width, points=41):
    """Least-squares G0 + G2 d^2 + G4 d^4 of the power gain over +-half_width rad/s."""
    x = np.linspace(-1.0, 1.0, points)
    f = config.f_center + x * half_width / (2 * np.pi)
    g = _power_gain(config, f)
    basis = np.stack([np.ones_like(x), x**2, x**4], axis=1)
    (c0, c2, c4), *_ = np.linalg.lstsq(basis, g, rcond=None)
    return c0, c2 / half_width**2, c4 / half_width**4


def _band(config, freqs, gain_db, level_db):
    """Contiguous band around f_center with gain >= level; edges refined on the model.

    Returns ``((f_lo, f_hi), in_band_mask, truncated)`` or ``(None, None, False)``.
    """
    fc = config.f_center

    def excess(f):
        return 10 * np.log10(_power_gain(config, f)) - level_db

    if excess(fc) < 0:
        return None, None, False
    truncated = False
    edges = []
    for side in (-1, 1):
        sel = (freqs - fc) * side > 0
        fs = freqs[sel][:: side]
        ex = gain_db[sel][:: side] - level_db
        # fs now runs outward from fc
        out = np.nonzero(ex < 0)[0]
        if len(out) == 0:
            truncated = True
            edges.append(fs[-1] if len(fs) else fc)
            continue
        k = out[0]
        inner = fc if k == 0 else fs[k - 1]
        edges.append(brentq(excess, min(inner, fs[k]), max(inner, fs[k])))
    f_lo, f_hi = edges
    mask = (freqs >= f_lo) & (freqs <= f_hi)
    return (f_lo, f_hi), mask, truncated


def gain_profile(config, freq_grid=None, threshold_db=15.0, fit_points=41):
    """Gain on a grid plus G0/G2/G4, kappa0, bandwidths and ripple.

    The even polynomial is fitted over +-(kappa0/4) G0^(-1/4) about the
    degenerate point f_pump/2, which keeps the window inside the flat top
    of the profile for any gain.
    """
    freqs = config.frequencies() if freq_grid is None else np.asarray(freq_grid, dtype=float)
    if np.any(freqs <= 0) or np.any(freqs >= config.pump.f_pump):
        raise DomainError("frequency grid must lie inside (0, f_pump)")
    pair = SidebandPair.from_signal(freqs, config.pump.f_pump)
    g_s, g_i = reflection_gain(pair, config.squid, config.pump, config.transformer, config.constants)
    gain_db = 20 * np.log10(np.abs(g_s))

    kappa0 = unpumped_linewidth(config)
    g_center = float(_power_gain(config, config.f_center))
    half_width = 0.25 * kappa0 * g_center ** -0.25
    g0, g2, g4 = fit_even_polynomial(config, half_width, fit_points)

    band, sl, truncated = _band(config, freqs, gain_db, threshold_db)
    bw = None if band is None else band[1] - band[0]
    center_db = 10 * np.log10(g_center)
    ripple = None
    if band is not None:
        ripple = float(max(np.max(gain_db[sl], initial=center_db), center_db) - threshold_db)
    bw3 = None
    if g_center > 2.0:
        band3, _, trunc3 = _band(config, freqs, gain_db, center_db - HALF_POWER_DB)
        bw3 = band3[1] - band3[0]
        truncated = truncated or trunc3
    return GainProfile(
        freqs=freqs,
        g_complex=np.atleast_1d(g_s),
        idler_complex=np.atleast_1d(g_i),
        gain_db=np.atleast_1d(gain_db),
        f_center=config.f_center,
        center_gain_db=float(center_db),
        g0=float(g0),
        g2=float(g2),
        g4=float(g4),
        kappa0=float(kappa0),
        fit_half_width=float(half_width),
        threshold_db=threshold_db,
        bw_at_threshold=bw,
        bw_3db=bw3,
        ripple_db=ripple,
        band_truncated=bool(truncated),
    )


def max_pump_depth(config, f_center=None):
    """Largest pump depth allowed for operating points centred at ``f_center``."""
    f_center = config.f_center if f_center is None else f_center
    crit = critical_pump_depth(config.squid, config.transformer, 2 * f_center, config.constants)
    return min(crit * np.sqrt(1.0 - THRESHOLD_MARGIN), MAX_PUMP_DEPTH * (1 - 1e-9))


def pump_operating_point(config, target_g0_db, f_center=None):
    """Pump that gives ``target_g0_db`` at the degenerate point 2 f_center = f_pump.

    Raises
    ------
    UnreachableTargetError
        If the target exceeds the gain at the largest allowed depth.
    """
    f_center = config.f_center if f_center is None else f_center
    if not f_center > 0:
        raise DomainError("f_center must be > 0")
    base = config.pump
    if target_g0_db < 0:
        raise DomainError("target gain must be >= 0 dB")

    def pump_at(depth):
        return PumpParams(2 * f_center, depth, base.pump_phase, base.p_pump_dbm)

    if target_g0_db == 0:
        return pump_at(0.0)
    d_max = max_pump_depth(config, f_center)
    g_max = center_gain_db(config, pump_at(d_max)) if d_max > 0 else 0.0
    if not np.isfinite(d_max) or g_max < target_g0_db:
        raise UnreachableTargetError(
            f"target {target_g0_db:g} dB unreachable below threshold at "
            f"{f_center:.6g} Hz; max attainable {g_max:.3f} dB",
            max_gain_db=g_max,
        )
    depth = brentq(
        lambda d: center_gain_db(config, pump_at(d)) - target_g0_db,
        0.0, d_max, xtol=1e-14, rtol=1e-12,
    )
    return pump_at(depth)


def retune(config, target_g0_db, f_center=None):
    """Copy of ``config`` with the pump set by :func:`pump_operating_point`."""
    return config.with_pump(pump_operating_point(config, target_g0_db, f_center))
