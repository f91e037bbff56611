"""Piecewise-constant signals on uniform grids, with the support ("L0"),
Lp and sparsity-rate functionals.

Channel i at step k holds its value on the half-open cell
[k*dt, (k+1)*dt), so support measure is dt times the active-cell count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

EPS_ZERO = 1e-6
ADMISSIBLE_TOL = 1e-9


@dataclass(frozen=True)
class ControlSignal:
    samples: np.ndarray  # (m, N)
    dt: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s.reshape(1, -1)
        if s.ndim != 2 or s.shape[1] < 1:
            raise ValueError(f"samples must be an (m, N) array, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("control samples must be finite")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def N(self) -> int:
        return self.samples.shape[1]

    @property
    def T(self) -> float:
        return self.N * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt

    def channel(self, i: int) -> np.ndarray:
        if not 0 <= i < self.m:
            raise IndexError(f"channel {i} out of range for {self.m} channel(s)")
        return self.samples[i]

    def is_admissible(self, tol: float = ADMISSIBLE_TOL) -> bool:
        return bool(np.max(np.abs(self.samples)) <= 1.0 + tol)

    def scaled(self, alpha: float) -> "ControlSignal":
        return ControlSignal(alpha * self.samples, self.dt)


@dataclass(frozen=True)
class StateTrajectory:
    samples: np.ndarray  # (n, N + 1)
    dt: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s.reshape(1, -1)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def N(self) -> int:
        return self.samples.shape[1] - 1

    @property
    def T(self) -> float:
        return self.N * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt


def l0_norm(u: ControlSignal, channel: int = 0, eps_zero: float = EPS_ZERO) -> float:
    """Length of the support of one channel (cells with |u| > eps_zero)."""
    if not eps_zero > 0:
        raise ValueError("eps_zero must be positive")
    return u.dt * int(np.count_nonzero(np.abs(u.channel(channel)) > eps_zero))


def lp_norm(u: ControlSignal, channel: int = 0, p: float = 1.0) -> float:
    if not p > 0:
        raise ValueError("p must be positive")
    v = np.abs(u.channel(channel))
    return float(np.sum(v**p) * u.dt) ** (1.0 / p)


def sparsity_rate(u: ControlSignal, channel: int = 0, eps_zero: float = EPS_ZERO) -> float:
    return min(1.0, l0_norm(u, channel, eps_zero) / u.T)


@dataclass(frozen=True)
class LimitCheck:
    ps: tuple[float, ...]
    values: tuple[float, ...]  # ||u||_p^p at each p
    l0: float
    gap: float  # | ||u||_{p_min}^{p_min} - ||u||_0 |


def lp_to_l0_limit_check(u: ControlSignal, channel: int = 0,
                         ps=(1.0, 0.5, 0.1, 0.01)) -> LimitCheck:
    """Evaluate ||u||_p^p on a decreasing p-grid against the support length.

    Exactly-zero samples are excluded (0^p = 0 for every p > 0); the
    support here is the exact one, not the eps-thresholded one.
    """
    v = np.abs(u.channel(channel))
    nz = v[v > 0]
    values = tuple(float(np.sum(nz**p) * u.dt) for p in ps)
    l0 = u.dt * nz.size
    return LimitCheck(tuple(ps), values, l0, abs(values[-1] - l0))


def quantize(values, eps_zero: float = EPS_ZERO) -> np.ndarray:
    """Map samples to {-1, 0, +1} by sign with an eps_zero dead band."""
    v = np.asarray(values, dtype=float)
    return np.where(v > eps_zero, 1, np.where(v < -eps_zero, -1, 0))


def switching_count(u: ControlSignal, channel: int = 0, eps_zero: float = EPS_ZERO) -> int:
    q = quantize(u.channel(channel), eps_zero)
    return int(np.count_nonzero(np.diff(q)))


def forbidden_adjacencies(u: ControlSignal, channel: int = 0,
                          eps_zero: float = EPS_ZERO) -> int:
    """Number of direct +1 <-> -1 transitions (no off cell in between)."""
    q = quantize(u.channel(channel), eps_zero)
    return int(np.count_nonzero(np.abs(np.diff(q)) == 2))


def ternary_distance(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.minimum(np.abs(v), np.abs(np.abs(v) - 1.0))


def bang_off_bang_distance(u: ControlSignal, channel: int = 0,
                           eps_zero: float = EPS_ZERO) -> float:
    """Largest distance of a sample to {-1, 0, 1}, skipping switch cells.

    At every transition of the quantized sequence, the one of the two
    adjacent cells farther from {-1, 0, 1} is the cell containing the
    switch and is left out. A switch can also fall inside the first or
    last cell (off for part of the cell, bang for the rest) without
    showing up as a transition, so a nonzero end cell is left out too.
    """
    v = u.channel(channel)
    d = ternary_distance(v)
    keep = np.ones(v.size, dtype=bool)
    q = quantize(v, eps_zero)
    for k in np.flatnonzero(np.diff(q)) + 1:
        keep[k if d[k] >= d[k - 1] else k - 1] = False
    for k in (0, v.size - 1):
        if q[k] != 0:
            keep[k] = False
    return float(d[keep].max()) if keep.any() else 0.0


def max_adjacent_jump(u: ControlSignal, channel: int = 0) -> float:
    v = u.channel(channel)
    return float(np.max(np.abs(np.diff(v)))) if v.size > 1 else 0.0


def write_csv(path, u: ControlSignal, x: StateTrajectory | None = None) -> None:
    """One row per grid point: t, u_1..u_m[, x_1..x_n], 12 significant digits.

    The final row repeats the last control cell (zero-order hold).
    """
    header = ["t"] + [f"u_{i + 1}" for i in range(u.m)]
    if x is not None:
        if x.N != u.N:
            raise ValueError("state and control grids differ")
        header += [f"x_{j + 1}" for j in range(x.n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(u.N + 1):
            row = [k * u.dt] + list(u.samples[:, min(k, u.N - 1)])
            if x is not None:
                row += list(x.samples[:, k])
            w.writerow([f"{v:.12g}" for v in row])
