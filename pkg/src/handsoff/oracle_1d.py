"""Closed forms for the scalar plant dx/dt = a x + a u (+ d) and its
nonlinear sibling dx/dt = sin(a x) + a u.

The input gain equals a, so the control that pushes x toward the origin
is -sgn(a x): for a stable plant (a < 0) that is +sgn(x).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class Unreachable(Exception):
    """The state lies outside the set steerable to the origin."""


class PlantKind(enum.Enum):
    LINEAR = "linear"
    NONLINEAR_SIN = "nonlinear-sin"


@dataclass(frozen=True)
class ScalarPlant:
    a: float
    kind: PlantKind = PlantKind.LINEAR

    def __post_init__(self):
        if not math.isfinite(self.a) or self.a == 0:
            raise ValueError(f"plant coefficient a must be finite and nonzero, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "kind", PlantKind(self.kind))

    @property
    def stable(self) -> bool:
        return self.a < 0

    def rhs(self, x, u, d=0.0):
        if self.kind is PlantKind.LINEAR:
            return self.a * x + self.a * u + d
        return sin_plant_rhs(self.a, x, u) + d

    def linear_model(self):
        """(A, B) of the linear model used by the controller."""
        return np.array([[self.a]]), np.array([[self.a]])


def min_time_1d(plant: ScalarPlant, x: float) -> float:
    """Minimum time to reach 0 from x with |u| <= 1.

    log(1 + |x|)/|a| for a < 0, and -log(1 - |x|)/a for a > 0 where the
    reachable set is (-1, 1).
    """
    ax = abs(float(x))
    if plant.a < 0:
        return math.log1p(ax) / abs(plant.a)
    if ax >= 1.0:
        raise Unreachable(f"|x| = {ax} >= 1 for the unstable plant a = {plant.a}")
    return -math.log1p(-ax) / plant.a


@dataclass(frozen=True)
class HandsOffSegment:
    """Two-piece control on [0, T]: first_value on [0, tau), second_value on [tau, T]."""

    tau: float
    first_value: float
    second_value: float
    T: float

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.tau, self.first_value, self.second_value)

    @property
    def active_length(self) -> float:
        return ((self.tau if self.first_value != 0 else 0.0)
                + (self.T - self.tau if self.second_value != 0 else 0.0))

    @property
    def rate(self) -> float:
        return self.active_length / self.T

    def pieces(self):
        """(start, end, value) triples with positive length."""
        out = []
        if self.tau > 0:
            out.append((0.0, self.tau, self.first_value))
        if self.T > self.tau:
            out.append((self.tau, self.T, self.second_value))
        return out


def handsoff_control_1d(plant: ScalarPlant, x_k: float, T_k: float) -> HandsOffSegment:
    """Maximum hands-off control on [0, T_k] for the linear scalar model.

    Stable plant: off, then bang on [tau, T_k] with
    tau = log(exp(|a| T_k) - |x_k|)/|a|. Unstable plant: bang on
    [0, tau) with tau = -log(1 - |x_k|)/a, then off.
    """
    a = plant.a
    T_star = min_time_1d(plant, x_k)
    if T_k < T_star * (1 - 1e-12):
        raise ValueError(f"horizon {T_k} is shorter than the minimum time {T_star}")
    if x_k == 0:
        return HandsOffSegment(T_k, 0.0, 0.0, T_k)
    bang = -float(np.sign(a * x_k))
    if a < 0:
        tau = math.log(math.exp(abs(a) * T_k) - abs(x_k)) / abs(a)
        tau = min(max(tau, 0.0), T_k)
        return HandsOffSegment(tau, 0.0, bang, T_k)
    tau = min(T_star, T_k)
    return HandsOffSegment(tau, bang, 0.0, T_k)


def flow_linear(a: float, x0: float, u: float, t: float, d: float = 0.0) -> float:
    """Exact solution at time t of dx/dt = a x + a u + d from x0, u and d constant."""
    forcing = a * u + d
    return x0 * math.exp(a * t) + forcing * math.expm1(a * t) / a


def sin_plant_rhs(a: float, x, u):
    return np.sin(a * x) + a * u


def linearization_error(a: float, x):
    """d(x) = sin(a x) - a x, the gap to the linear model."""
    return np.sin(a * x) - a * x
