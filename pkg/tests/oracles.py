"""Independent reference computations used by several test modules."""

import numpy as np

from mejpa.junction_lab import pump_modulation_coefficients
from mejpa.network import abcd_of_line


def chain_matrix(env, f):
    """Source-to-device ABCD as a plain numpy product, one frequency."""
    m = np.eye(2, dtype=complex)
    for s in env.chain():
        ab = abcd_of_line(s, f)
        m = m @ np.array([[ab.a, ab.b], [ab.c, ab.d]], dtype=complex)
    return m


def thevenin(env, f):
    """Open-circuit device-plane voltage per unit incident wave, and source impedance seen there."""
    z0 = env.source_impedance
    (a, b), (c, d) = chain_matrix(env, f)
    e = 2 * np.sqrt(z0)
    return e / (a + z0 * c), (d * z0 + b) / (c * z0 + a)


def two_by_two_gain(f_s, squid, pump, env, constants):
    """Signal reflection and idler output from a dense 2x2 solve of the node equations.

    Unknowns are the signal node flux and the conjugate idler node flux;
    the drive is the Norton current of the source seen through the chain.
    """
    mods = pump_modulation_coefficients(squid, pump.pump_depth, constants, pump.pump_phase)
    w_s = 2 * np.pi * f_s
    w_i = 2 * np.pi * pump.f_pump - w_s
    f_i = w_i / (2 * np.pi)
    v_th, z_th_s = thevenin(env, f_s)
    _, z_th_i = thevenin(env, f_i)

    def node(w, z_th):
        return -w**2 * squid.c_total + mods.gamma0 + 1j * w / z_th

    a = np.array([
        [node(w_s, z_th_s), mods.gamma1],
        [np.conj(mods.gamma1), np.conj(node(w_i, z_th_i))],
    ])
    rhs = np.array([v_th / z_th_s, 0.0])
    phi_s, phi_i_conj = np.linalg.solve(a, rhs)
    z0 = env.source_impedance
    # signal back at the source plane
    v2 = 1j * w_s * phi_s
    i2 = (v_th - v2) / z_th_s
    (ma, mb), (mc, md) = chain_matrix(env, f_s)
    v1, i1 = ma * v2 + mb * i2, mc * v2 + md * i2
    g_s = (v1 - z0 * i1) / (v1 + z0 * i1)
    # idler: no source at w_i
    v2i = 1j * w_i * np.conj(phi_i_conj)
    i2i = -v2i / z_th_i
    (ma, mb), _ = chain_matrix(env, f_i)
    g_i = (ma * v2i + mb * i2i) / np.sqrt(z0)
    return g_s, g_i
