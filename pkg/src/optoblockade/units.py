"""Conversion between linear frequencies (as quoted, "2*pi x f") and internal units."""

import math

TWO_PI = 2.0 * math.pi

#: Linear-frequency scale of the supported unit suffixes, relative to 1 MHz.
SCALES = {"GHz": 1e3, "MHz": 1.0, "kHz": 1e-3, "Hz": 1e-6}


def mhz(f):
    """Internal angular value of a linear frequency given in MHz."""
    return TWO_PI * f


def khz(f):
    return TWO_PI * f * 1e-3


def to_mhz(w):
    """Linear frequency in MHz of an internal angular value."""
    return w / TWO_PI
