"""Noise-temperature bookkeeping.

Y-factor calibration of the following HEMT, amplifier noise from the
signal-to-noise improvement between pump on and pump off, and the
half-photon reference. All temperatures are in kelvin.

The amplifier noise and the system noise are coupled::

    t_jpa = t_sys (1/dsnr - 1/g) + t_in (1/dsnr - 1)
    t_sys = t_in + t_jpa + t_hemt / g

and are solved simultaneously here; t_sys on the right of the first line
is the pump-on system noise.
"""

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DetectionError, DomainError, InvariantError
from .junction_lab import DEFAULT_CONSTANTS

#: a tone must exceed this multiple of the median floor (linear power)
DETECTION_RATIO = 3.0


@dataclass(frozen=True)
class YFactorInputs:
    """Hot/cold load temperatures and the powers measured with each."""

    t_hot: float
    t_cold: float
    p_hot: float
    p_cold: float

    def __post_init__(self):
        if not (self.t_hot > self.t_cold >= 0):
            raise InvariantError("YFactorInputs", "need t_hot > t_cold >= 0")
        if not (self.p_hot > 0 and self.p_cold > 0):
            raise InvariantError("YFactorInputs", "powers must be > 0")
        if not self.p_hot > self.p_cold:
            raise InvariantError("YFactorInputs", "need p_hot > p_cold (Y > 1)")


@dataclass(frozen=True)
class NoiseBudget:
    t_in: float
    t_hemt: float
    g_jpa: float
    dsnr: float
    t_sys: float
    t_jpa: float
    t_quantum: float = None
    sub_vacuum: bool = False

    def __post_init__(self):
        if not (self.t_in >= 0 and self.t_hemt >= 0):
            raise InvariantError("NoiseBudget", "t_in and t_hemt must be >= 0")
        if not self.g_jpa >= 1:
            raise InvariantError("NoiseBudget", "g_jpa must be >= 1")
        if not self.dsnr > 0:
            raise InvariantError("NoiseBudget", "dsnr must be > 0")
        if not self.t_sys >= 0:
            raise InvariantError("NoiseBudget", "t_sys must be >= 0")
        if self.t_jpa < 0 and not self.sub_vacuum:
            raise InvariantError("NoiseBudget", "negative t_jpa must carry the sub_vacuum flag")
        expected = self.t_in + self.t_jpa + self.t_hemt / self.g_jpa
        if abs(self.t_sys - expected) > 1e-12 * max(1.0, abs(expected)):
            raise InvariantError("NoiseBudget", "t_sys != t_in + t_jpa + t_hemt/g_jpa")


def y_factor_hemt(inputs):
    """Noise temperature (t_hot - Y t_cold)/(Y - 1) with Y = p_hot/p_cold."""
    y = inputs.p_hot / inputs.p_cold
    if not y > 1:
        raise DomainError(f"Y = {y:.6g} must be > 1")
    t = (inputs.t_hot - y * inputs.t_cold) / (y - 1)
    if t < -1e-12 * inputs.t_hot:
        raise DomainError(f"inconsistent inputs: Y = {y:.6g} implies t_hemt = {t:.4g} K < 0")
    return max(t, 0.0)


def quantum_limit_temperature(f, constants=DEFAULT_CONSTANTS):
    """Half-photon temperature h f / (2 k_B)."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("frequency must be > 0")
    return (constants.planck_h * f / (2 * constants.boltzmann_k))[()]


def callen_welton_temperature(f, t_phys, constants=DEFAULT_CONSTANTS):
    """Effective temperature (h f/2k) coth(h f / 2 k T) of a load at ``t_phys``."""
    t_q = quantum_limit_temperature(f, constants)
    if t_phys == 0:
        return t_q
    if t_phys < 0:
        raise DomainError("t_phys must be >= 0")
    return t_q / np.tanh(t_q / t_phys)


def t_jpa_from_dsnr(dsnr, g_jpa, t_hemt, t_in=None, f=None, constants=DEFAULT_CONSTANTS):
    """Closed-form amplifier noise from the measured SNR improvement.

    ``t_in`` defaults to the half-photon value at ``f``. A negative
    result is returned with ``sub_vacuum=True`` rather than clipped.

    Raises
    ------
    DomainError
        If 1 - 1/dsnr + 1/g_jpa <= 0, where the pair has no physical solution.
    """
    if not dsnr > 0:
        raise DomainError("dsnr must be > 0")
    if not g_jpa >= 1:
        raise DomainError("g_jpa must be >= 1")
    t_q = quantum_limit_temperature(f, constants) if f is not None else None
    if t_in is None:
        if t_q is None:
            raise DomainError("give t_in or the analysis frequency f")
        t_in = t_q
    coeff = 1 - 1 / dsnr + 1 / g_jpa
    if not coeff > 0:
        raise DomainError(
            f"unphysical regime: 1 - 1/dsnr + 1/g_jpa = {coeff:.4g} <= 0"
        )
    t_jpa = ((t_in + t_hemt / g_jpa) * (1 / dsnr - 1 / g_jpa) + t_in * (1 / dsnr - 1)) / coeff
    t_sys = t_in + t_jpa + t_hemt / g_jpa
    return NoiseBudget(t_in, t_hemt, g_jpa, dsnr, t_sys, t_jpa, t_q, sub_vacuum=t_jpa < 0)


def t_jpa_fixed_point(dsnr, g_jpa, t_hemt, t_in, tol=1e-12, max_iter=100000):
    """Solve the coupled pair by plain iteration from t_jpa = 0.

    Converges when |1/dsnr - 1/g_jpa| < 1; used as a cross-check. The
    stopping test bounds the remaining error, not just the last step.
    """
    rate = abs(1 / dsnr - 1 / g_jpa)
    if rate >= 1:
        raise DomainError("iteration does not contract: |1/dsnr - 1/g_jpa| >= 1")
    t_jpa = 0.0
    for _ in range(max_iter):
        t_sys = t_in + t_jpa + t_hemt / g_jpa
        new = t_sys * (1 / dsnr - 1 / g_jpa) + t_in * (1 / dsnr - 1)
        if abs(new - t_jpa) * rate / (1 - rate) <= tol * max(1.0, abs(new)) or new == t_jpa:
            return new
        t_jpa = new
    raise DomainError("fixed-point iteration did not converge")


_SPLIT = re.compile(r"[,\t ;]+")


def read_trace(source):
    """Read a two-column (frequency_hz, power_dbm) trace.

    ``source`` is a path or a text stream. Lines starting with '#' are
    comments; a non-numeric first data line is taken as a header.
    Delimiters may be commas, tabs, semicolons or spaces.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    freqs, powers = [], []
    for lineno, raw in enumerate(io.StringIO(text), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [c for c in _SPLIT.split(line) if c]
        try:
            f, p = (float(x) for x in fields[:2])
            if len(fields) != 2:
                raise ValueError
        except ValueError:
            if not freqs and not powers and not any(_is_number(x) for x in fields):
                continue  # header
            raise DomainError(f"trace line {lineno}: expected two numbers, got {line!r}")
        freqs.append(f)
        powers.append(p)
    if not freqs:
        raise DomainError("trace has no data rows")
    return np.array(freqs), np.array(powers)


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def trace_snr(power_dbm):
    """Peak bin over median floor, both in linear power."""
    lin = 10 ** (np.asarray(power_dbm, dtype=float) / 10)
    floor = np.median(lin)
    peak = np.max(lin)
    if not peak >= DETECTION_RATIO * floor:
        raise DetectionError(
            f"no tone: peak/floor = {peak / floor:.3g} < {DETECTION_RATIO:g}"
        )
    return peak / floor


def dsnr_from_traces(on_trace, off_trace):
    """SNR improvement between two (freqs, power_dbm) traces on a common axis."""
    f_on, p_on = on_trace
    f_off, p_off = off_trace
    if np.shape(f_on) != np.shape(f_off) or not np.allclose(f_on, f_off, rtol=1e-12, atol=0):
        raise DomainError("traces do not share a frequency axis")
    return trace_snr(p_on) / trace_snr(p_off)
