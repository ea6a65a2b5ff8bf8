"""Planar initial profiles ``u0(x) = g(x_0 + ... + x_{d-1})``.

A 1-periodic ``g`` gives data that are periodic on the unit torus in every
dimension, and planar solutions reduce Burgers' equation to
``w_t + d * w * w_s = 0`` along ``s = sum(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from grpburgers.errors import InputError


def _planar(*x):
    s = x[0]
    for xi in x[1:]:
        s = s + xi
    return s


@dataclass(frozen=True)
class ConstantProfile:
    value: float

    def g(self, s):
        return np.full(np.shape(s), float(self.value))

    def dg(self, s):
        return np.zeros(np.shape(s))

    def bounds(self) -> tuple[float, float]:
        return self.value, self.value

    def breaking_time(self, dim: int) -> float:
        return math.inf

    def __call__(self, *x):
        return self.g(_planar(*x))


@dataclass(frozen=True)
class SineProfile:
    """``g(s) = mean + amplitude * sin(2 pi k s)``."""

    mean: float = 0.25
    amplitude: float = 0.1
    wavenumber: int = 1

    def __post_init__(self) -> None:
        if int(self.wavenumber) != self.wavenumber or self.wavenumber < 1:
            raise InputError("wavenumber must be a positive integer for periodicity")

    def g(self, s):
        return self.mean + self.amplitude * np.sin(2.0 * np.pi * self.wavenumber * s)

    def dg(self, s):
        k = 2.0 * np.pi * self.wavenumber
        return self.amplitude * k * np.cos(k * s)

    def bounds(self) -> tuple[float, float]:
        a = abs(self.amplitude)
        return self.mean - a, self.mean + a

    def breaking_time(self, dim: int) -> float:
        """First time characteristics cross, ``1 / (d * max(-g'))``."""
        steepest = 2.0 * np.pi * self.wavenumber * abs(self.amplitude)
        return math.inf if steepest == 0 else 1.0 / (dim * steepest)

    def __call__(self, *x):
        return self.g(_planar(*x))


@dataclass(frozen=True)
class RiemannProfile:
    """``u_left`` on ``frac(s) < position``, ``u_right`` on the rest of the period."""

    u_left: float = 1.0
    u_right: float = 0.0
    position: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.position < 1.0:
            raise InputError("Riemann position must lie strictly inside (0, 1)")

    def g(self, s):
        frac = np.mod(s, 1.0)
        return np.where(frac < self.position, float(self.u_left), float(self.u_right))

    def bounds(self) -> tuple[float, float]:
        return min(self.u_left, self.u_right), max(self.u_left, self.u_right)

    def __call__(self, *x):
        return self.g(_planar(*x))


PROFILES = {
    "constant": ConstantProfile,
    "sine": SineProfile,
    "riemann": RiemannProfile,
}


def make_profile(kind: str, **params):
    try:
        cls = PROFILES[kind]
    except KeyError:
        raise InputError(
            f"unknown initial condition {kind!r}; expected one of {sorted(PROFILES)}"
        ) from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {kind!r}: {exc}") from None
