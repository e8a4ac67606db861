"""Ordinary-frequency <-> angular-frequency conversion.

Internally every frequency and rate is angular, in rad/ns. Config files and
reports use ordinary frequency (the ``omega / 2 pi`` convention) with an
explicit unit suffix.
"""
import math

TWO_PI = 2.0 * math.pi

_SCALE = {"ghz": 1.0, "mhz": 1e-3, "khz": 1e-6}


def to_angular(value: float, unit: str) -> float:
    """``value`` in ``unit`` (GHz, MHz, kHz) to rad/ns."""
    return TWO_PI * value * _SCALE[unit.lower()]


def from_angular(omega: float, unit: str) -> float:
    return omega / (TWO_PI * _SCALE[unit.lower()])


def ghz(value: float) -> float:
    return to_angular(value, "ghz")


def mhz(value: float) -> float:
    return to_angular(value, "mhz")


def khz(value: float) -> float:
    return to_angular(value, "khz")
