"""Junction and SQUID physics.

Critical currents from normal-state resistance (Ambegaokar-Baratoff),
merged-element junction parameters from process densities, the
flux-tunable SQUID inductance and plasma frequency, and the first-order
inverse-inductance modulation produced by a flux pump.

Units are SI except where a field name says otherwise: junction areas
are in µm² and process densities are per µm²; flux is in units of the
flux quantum.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.constants as cst

from .errors import ConsistencyError, DivergenceError, DomainError, InvariantError

#: |cos(pi*flux)| below this is treated as a divergent Josephson inductance.
COS_FLOOR = 1e-3

#: Relative agreement required between the j_c and RA routes to i_c.
FAB_CONSISTENCY_TOL = 0.05

#: Largest pump depth (flux quanta) accepted by the small-signal model.
MAX_PUMP_DEPTH = 0.1


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants entering the junction formulas.

    ``al_gap`` is the superconducting gap in eV (thin-film aluminium by
    default). ``flux_quantum`` defaults to h/2e computed from the other
    two fields.
    """

    planck_h: float = cst.h
    electron_charge: float = cst.e
    boltzmann_k: float = cst.k
    al_gap: float = 180e-6
    flux_quantum: float = None

    def __post_init__(self):
        for name in ("planck_h", "electron_charge", "boltzmann_k", "al_gap"):
            if not getattr(self, name) > 0:
                raise InvariantError("PhysicalConstants", f"{name} must be > 0")
        phi0 = self.planck_h / (2.0 * self.electron_charge)
        if self.flux_quantum is None:
            object.__setattr__(self, "flux_quantum", phi0)
        elif abs(self.flux_quantum - phi0) > 1e-9 * phi0:
            raise InvariantError(
                "PhysicalConstants", "flux_quantum must equal planck_h / (2 e)"
            )

    @property
    def gap_joule(self):
        return self.al_gap * self.electron_charge


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class FabProcess:
    """Junction process densities.

    Attributes
    ----------
    j_c : float
        Critical current density in A/µm².
    c_per_area : float
        Junction capacitance per area in F/µm².
    ra_product : float, optional
        Room-temperature resistance-area product in Ω·µm².
    """

    j_c: float = None
    c_per_area: float = None
    ra_product: float = None

    def __post_init__(self):
        if self.j_c is None and self.ra_product is None:
            raise InvariantError("FabProcess", "need j_c or ra_product")
        if self.j_c is not None and not self.j_c > 0:
            raise InvariantError("FabProcess", "j_c must be > 0")
        if self.c_per_area is None or not self.c_per_area > 0:
            raise InvariantError("FabProcess", "c_per_area must be > 0")
        if self.ra_product is not None and not self.ra_product > 0:
            raise InvariantError("FabProcess", "ra_product must be > 0")


@dataclass(frozen=True)
class JunctionParams:
    """Single Josephson junction: area (µm²), r_n (Ω), i_c (A), c_j (F)."""

    area: float
    i_c: float
    c_j: float
    r_n: float = None

    def __post_init__(self):
        for name in ("area", "i_c", "c_j"):
            if not getattr(self, name) > 0:
                raise InvariantError("JunctionParams", f"{name} must be > 0")
        if self.r_n is not None and not self.r_n > 0:
            raise InvariantError("JunctionParams", "r_n must be > 0")


@dataclass(frozen=True)
class SquidParams:
    """Merged-element DC SQUID.

    ``i_c_total`` and ``c_total`` are the sums over both junctions,
    ``l_stray`` is the series inductance to ground and ``flux_dc`` the DC
    bias in flux quanta (only its value modulo 1 matters).
    """

    i_c_total: float
    c_total: float
    l_stray: float = 0.0
    flux_dc: float = 0.0

    def __post_init__(self):
        if not self.i_c_total > 0:
            raise InvariantError("SquidParams", "i_c_total must be > 0")
        if not self.c_total > 0:
            raise InvariantError("SquidParams", "c_total must be > 0")
        if not self.l_stray >= 0:
            raise InvariantError("SquidParams", "l_stray must be >= 0")
        if not np.isfinite(self.flux_dc):
            raise InvariantError("SquidParams", "flux_dc must be finite")

    @classmethod
    def from_junctions(cls, j1, j2, l_stray=0.0, flux_dc=0.0):
        return cls(
            i_c_total=j1.i_c + j2.i_c,
            c_total=j1.c_j + j2.c_j,
            l_stray=l_stray,
            flux_dc=flux_dc,
        )


@dataclass(frozen=True)
class ModulationCoefficients:
    """Inverse inductance of the pumped branch.

    Gamma(t) = gamma0 + gamma1 exp(i w_p t) + conj(gamma1) exp(-i w_p t)
    """

    gamma0: float
    gamma1: complex = 0j

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise InvariantError("ModulationCoefficients", "gamma0 must be > 0")
        if not abs(self.gamma1) < self.gamma0:
            raise InvariantError(
                "ModulationCoefficients",
                f"|gamma1| = {abs(self.gamma1):.6g} must be < gamma0 = {self.gamma0:.6g}",
            )


def _reduced_flux(flux):
    # map onto [-0.5, 0.5]; |cos| and the tuning curve are even and 1-periodic
    return flux - np.round(flux)


def ab_critical_current(r_n, constants=DEFAULT_CONSTANTS):
    """Ambegaokar-Baratoff critical current pi*Delta/(2 e R_n) in A."""
    if not r_n > 0:
        raise DomainError(f"r_n must be > 0, got {r_n!r}")
    return np.pi * constants.gap_joule / (2.0 * constants.electron_charge * r_n)


def junction_from_fab(area, fab, constants=DEFAULT_CONSTANTS):
    """Junction parameters for a given area (µm²) and process.

    When both ``j_c`` and ``ra_product`` are known the two estimates of
    the critical current must agree within 5 %; the ``j_c`` value is
    returned.
    """
    if not area > 0:
        raise DomainError(f"junction area must be > 0, got {area!r}")
    r_n = None
    i_c_ra = None
    if fab.ra_product is not None:
        r_n = fab.ra_product / area
        i_c_ra = ab_critical_current(r_n, constants)
    if fab.j_c is not None:
        i_c = fab.j_c * area
        if i_c_ra is not None and abs(i_c_ra - i_c) > FAB_CONSISTENCY_TOL * i_c:
            raise ConsistencyError(
                f"j_c route gives {i_c:.4g} A but RA route gives {i_c_ra:.4g} A "
                f"(tolerance {FAB_CONSISTENCY_TOL:.0%})"
            )
    else:
        i_c = i_c_ra
    return JunctionParams(area=area, i_c=i_c, c_j=fab.c_per_area * area, r_n=r_n)


def josephson_inductance(squid, constants=DEFAULT_CONSTANTS):
    """Zero-flux Josephson inductance Phi_0/(2 pi I_c) of the SQUID."""
    return constants.flux_quantum / (2.0 * np.pi * squid.i_c_total)


def _abs_cos(flux):
    c = abs(np.cos(np.pi * _reduced_flux(flux)))
    if c < COS_FLOOR:
        raise DivergenceError(
            f"|cos(pi*flux_dc)| = {c:.3g} below cos_floor = {COS_FLOOR:g} "
            f"(flux_dc = {flux!r} too close to a half flux quantum)"
        )
    return c


def squid_inductance(squid, constants=DEFAULT_CONSTANTS):
    """Flux-dependent SQUID inductance L_J/|cos(pi Phi_DC/Phi_0)| in H."""
    return josephson_inductance(squid, constants) / _abs_cos(squid.flux_dc)


def plasma_frequency(squid, constants=DEFAULT_CONSTANTS):
    """Bare resonance 1/sqrt(C (L_J(Phi) + L_s)) in rad/s."""
    return 1.0 / np.sqrt(squid.c_total * (squid_inductance(squid, constants) + squid.l_stray))


def flux_tuning_curve(squid, flux_grid, constants=DEFAULT_CONSTANTS):
    """Resonance frequency in Hz against flux bias.

    Returns a list of ``(flux, f_hz)`` pairs; points inside the
    divergence band around half-integer flux carry ``nan`` as a gap.
    """
    out = []
    for flux in flux_grid:
        flux = float(flux)
        try:
            w = plasma_frequency(_with_flux(squid, flux), constants)
            out.append((flux, w / (2.0 * np.pi)))
        except DivergenceError:
            out.append((flux, float("nan")))
    return out


def _with_flux(squid, flux):
    return SquidParams(squid.i_c_total, squid.c_total, squid.l_stray, flux)


def inverse_inductance(squid, flux=None, constants=DEFAULT_CONSTANTS):
    """1/(L_J(Phi) + L_s) of the series branch, evaluated at ``flux``."""
    if flux is None:
        flux = squid.flux_dc
    l_j0 = josephson_inductance(squid, constants)
    return 1.0 / (l_j0 / _abs_cos(flux) + squid.l_stray)


def pump_modulation_coefficients(squid, pump_depth, constants=DEFAULT_CONSTANTS,
                                 pump_phase=0.0):
    """First-order response of the branch inverse inductance to a flux pump.

    With Phi(t) = Phi_DC + dPhi cos(w_p t + phase), gamma1 is
    (dPhi/2) exp(i phase) dGamma/dPhi at Phi_DC.
    """
    if not 0.0 <= pump_depth < MAX_PUMP_DEPTH:
        raise DomainError(
            f"pump_depth must lie in [0, {MAX_PUMP_DEPTH}), got {pump_depth!r}"
        )
    gamma0 = inverse_inductance(squid, constants=constants)
    gamma1 = 0.5 * pump_depth * inverse_inductance_slope(squid, constants) * np.exp(1j * pump_phase)
    if abs(gamma1) >= gamma0:
        raise DomainError(
            f"|gamma1| = {abs(gamma1):.4g} >= gamma0 = {gamma0:.4g}: pump too strong "
            "for the first-order expansion"
        )
    return ModulationCoefficients(gamma0=gamma0, gamma1=complex(gamma1))


def inverse_inductance_slope(squid, constants=DEFAULT_CONSTANTS):
    """Analytic d[1/(L_J(Phi)+L_s)]/dPhi at Phi_DC, per flux quantum."""
    r = _reduced_flux(squid.flux_dc)
    c = _abs_cos(r)
    l_j0 = josephson_inductance(squid, constants)
    gamma = 1.0 / (l_j0 / c + squid.l_stray)
    # on the reduced branch cos >= 0, so d(1/cos)/dPhi = pi sin / cos^2
    return -gamma**2 * l_j0 * np.pi * np.sin(np.pi * r) / c**2


def pump_depth_from_power(p_pump_dbm, mutual_inductance, line_impedance=50.0,
                          constants=DEFAULT_CONSTANTS):
    """Pump depth in flux quanta from on-chip pump power.

    The pump-line mutual inductance is not a known quantity of the
    device and has to be supplied by the caller.
    """
    if not mutual_inductance > 0:
        raise DomainError("mutual_inductance must be > 0")
    p_watt = 1e-3 * 10.0 ** (p_pump_dbm / 10.0)
    i_peak = np.sqrt(2.0 * p_watt / line_impedance)
    return mutual_inductance * i_peak / constants.flux_quantum
