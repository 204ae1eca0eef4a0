"""Unit conventions.

Rates are stored as angular frequencies in rad/us, so a value quoted as
nu/2pi in MHz maps to ``2*pi*nu``. Times are in microseconds, distances in
metres.
"""

import math

TWO_PI = 2.0 * math.pi
SPEED_OF_LIGHT = 299_792_458.0  # m/s
SPEED_OF_LIGHT_M_PER_US = SPEED_OF_LIGHT * 1e-6


def mhz_to_angular(nu_mhz):
    """nu/2pi in MHz -> angular frequency in rad/us."""
    return TWO_PI * nu_mhz


def angular_to_mhz(omega):
    return omega / TWO_PI


def round_distance(d_m, step=10.0):
    """Display rounding used for propagation distances."""
    return step * round(d_m / step)
