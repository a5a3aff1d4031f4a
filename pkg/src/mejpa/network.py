"""Transmission-line two-ports and the environment seen by the SQUID.

Line sections are dispersionless: the electrical length scales linearly
with frequency from its value ``theta_ref`` at ``f_ref``. Every function
taking a frequency accepts a scalar or a numpy array and broadcasts.

The ABCD convention is e^{+i w t} with port-2 current flowing out of the
network::

    [V1]   [a  b] [V2]
    [I1] = [c  d] [I2]
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, FitQualityError, InvariantError

NEPER_PER_DB = np.log(10.0) / 20.0


@dataclass(frozen=True)
class LineSection:
    """Uniform line with impedance ``z0`` and length ``theta_ref`` rad at ``f_ref`` Hz."""

    z0: float
    f_ref: float
    theta_ref: float
    loss_db_per_section: float = 0.0

    def __post_init__(self):
        for name in ("z0", "f_ref", "theta_ref"):
            if not getattr(self, name) > 0:
                raise InvariantError("LineSection", f"{name} must be > 0")
        if not self.loss_db_per_section >= 0:
            raise InvariantError("LineSection", "loss_db_per_section must be >= 0")

    @classmethod
    def quarter_wave(cls, z0, f_ref, loss_db_per_section=0.0):
        return cls(z0, f_ref, np.pi / 2, loss_db_per_section)

    @classmethod
    def half_wave(cls, z0, f_ref, loss_db_per_section=0.0):
        return cls(z0, f_ref, np.pi, loss_db_per_section)

    def electrical_length(self, f):
        return self.theta_ref * np.asarray(f, dtype=float) / self.f_ref


@dataclass(frozen=True)
class TwoPortABCD:
    """ABCD parameters; fields may be numpy arrays of a common shape."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls, shape=()):
        one = np.ones(shape, dtype=complex)
        zero = np.zeros(shape, dtype=complex)
        return cls(one, zero, zero.copy(), one.copy())

    def __matmul__(self, other):
        return TwoPortABCD(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def det(self):
        return self.a * self.d - self.b * self.c

    def as_matrix(self):
        """Stack into an array of shape (..., 2, 2)."""
        return np.stack(
            [np.stack([self.a, self.b], -1), np.stack([self.c, self.d], -1)], -2
        )

    def input_impedance(self, z_load):
        """Impedance at port 1 with port 2 terminated in ``z_load``."""
        return (self.a * z_load + self.b) / (self.c * z_load + self.d)


@dataclass(frozen=True)
class EnvironmentModel:
    """Source plus line sections between the source and the SQUID node.

    ``sections`` are ordered from the source towards the device. The
    optional ``ripple_segment`` sits between the source and the first
    section and stands for a mismatched cable. ``r_match``, ``alpha`` and
    ``z_eff`` are filled in by :meth:`characterize`.
    """

    source_impedance: float = 50.0
    sections: tuple = ()
    ripple_segment: LineSection = None
    r_match: float = None
    alpha: float = None
    z_eff: float = None

    def __post_init__(self):
        if not self.source_impedance > 0:
            raise InvariantError("EnvironmentModel", "source_impedance must be > 0")
        object.__setattr__(self, "sections", tuple(self.sections))
        for s in self.chain():
            if not isinstance(s, LineSection):
                raise InvariantError("EnvironmentModel", f"not a LineSection: {s!r}")
        if self.alpha is not None and not np.isfinite(self.alpha):
            raise InvariantError("EnvironmentModel", "alpha must be finite")

    def chain(self):
        """All line sections, source side first."""
        head = (self.ripple_segment,) if self.ripple_segment is not None else ()
        return head + self.sections

    def characterize(self, f_center, span=0.01):
        r, alpha, z_eff = fit_r_alpha(self, f_center, span)
        return replace(self, r_match=r, alpha=alpha, z_eff=z_eff)


def abcd_of_line(section, f):
    theta = section.electrical_length(f)
    loss = section.loss_db_per_section * NEPER_PER_DB
    if loss == 0.0:
        ch = np.cos(theta) + 0j
        sh = 1j * np.sin(theta)
    else:
        gl = loss + 1j * theta
        ch, sh = np.cosh(gl), np.sinh(gl)
    return TwoPortABCD(ch, section.z0 * sh, sh / section.z0, ch.copy())


def cascade(sections, f):
    """Matrix product of the sections in the order given."""
    sections = list(sections)
    if not sections:
        raise DomainError("cascade needs at least one section")
    out = abcd_of_line(sections[0], f)
    for s in sections[1:]:
        out = out @ abcd_of_line(s, f)
    return out


def source_to_device(env, f):
    """ABCD of the whole chain with port 1 at the source, port 2 at the SQUID."""
    chain = env.chain()
    if not chain:
        return TwoPortABCD.identity(np.shape(f))
    return cascade(chain, f)


def impedance_looking_into(env, f):
    """Impedance seen from the SQUID node towards the source."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("frequency must be > 0")
    chain = env.chain()
    zs = env.source_impedance
    if not chain:
        return np.full(f.shape, zs, dtype=complex)[()]
    # uniform lines are symmetric, so reversing the order reverses the network
    return cascade(chain[::-1], f).input_impedance(zs)[()]


def _five_point_derivative(fun, x, h):
    return (fun(x - 2 * h) - 8 * fun(x - h) + 8 * fun(x + h) - fun(x + 2 * h)) / (12 * h)


def fit_r_alpha(env, f_center, span=0.01, rel_step=1e-4):
    """Local Z(w) = R + i alpha w characterisation around ``f_center``.

    Returns ``(r_match, alpha, z_eff)`` with alpha = d Im Z / d w taken by
    a five-point central difference and z_eff = alpha w_center / 2.
    """
    if not f_center > 0:
        raise DomainError("f_center must be > 0")
    w_c = 2 * np.pi * f_center
    w = w_c * (1.0 + np.linspace(-span, span, 41))
    im = impedance_looking_into(env, w / (2 * np.pi)).imag
    steps = np.diff(im)
    tol = 1e-12 * max(1.0, np.max(np.abs(im)))
    if np.any(steps > tol) and np.any(steps < -tol):
        raise FitQualityError(
            f"Im Z is not monotone within +-{span:.2%} of {f_center:.6g} Hz"
        )
    r_match = float(impedance_looking_into(env, f_center).real)

    def im_z(x):
        return impedance_looking_into(env, x / (2 * np.pi)).imag

    alpha = float(_five_point_derivative(im_z, w_c, rel_step * w_c))
    return r_match, alpha, alpha * w_c / 2.0
