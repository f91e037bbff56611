"""Self-triggered hands-off feedback.

At each sampling instant t_k the state x_k is measured, the next horizon
T_k = max(T_min, T*(x_k)/r) is fixed, and the maximum hands-off control
on [0, T_k] is applied open loop until t_{k+1} = t_k + T_k. The plant is
integrated with classical RK4 under a bounded disturbance.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .lti import LtiSystem, matrix_measure
from .oracle_1d import (PlantKind, ScalarPlant, Unreachable, handsoff_control_1d,
                        min_time_1d)
from .signals import EPS_ZERO
from .sparse_control import (N_PER_UNIT, T_MAX, TOL_T, FiniteHorizonProblem, grid_steps,
                             minimum_time, solve_l1)

Plant = Union[LtiSystem, ScalarPlant]

MU_TOL = 1e-9


class DisturbanceKind(enum.Enum):
    ZERO = "zero"
    UNIFORM = "uniform"
    WORST_CASE = "worst-case"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Disturbance:
    """Disturbance model, held constant on each sim_dt cell.

    UNIFORM reads a single Philox stream keyed by (seed, episode): the n
    components of cell j are stream values j*n .. j*n + n - 1, so any
    cell can be regenerated on its own by moving the counter.
    """

    kind: DisturbanceKind = DisturbanceKind.ZERO
    seed: int = 0
    episode: int = 0
    direction: tuple[float, ...] | None = None
    hook: Callable[[float, int], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", DisturbanceKind(self.kind))
        if self.kind is DisturbanceKind.CUSTOM and self.hook is None:
            raise ValueError("custom disturbance needs a hook(t, step_index)")


_BLOCK = 256  # cells per generated block; a multiple of 4 keeps Philox words aligned


def _uniform_block(model: Disturbance, delta: float, n: int, block: int) -> np.ndarray:
    """Cells block*_BLOCK .. (block+1)*_BLOCK - 1 as an (_BLOCK, n) array."""
    # Philox emits four 64-bit words per counter value and one double per word
    start = block * _BLOCK * n
    g = np.random.Generator(np.random.Philox(
        key=[model.seed & (2**64 - 1), model.episode], counter=[start // 4, 0, 0, 0]))
    return g.uniform(-delta, delta, _BLOCK * n).reshape(_BLOCK, n)


def disturbance_sample(model: Disturbance, delta: float, n: int, t: float,
                       step_index: int, cache: dict | None = None) -> np.ndarray:
    """Disturbance on sim cell step_index (starting at time t).

    The value depends only on (model, delta, n, step_index) and, for
    a custom hook, t. Passing a dict as cache reuses generated blocks.
    """
    if model.kind is DisturbanceKind.ZERO or delta == 0:
        return np.zeros(n)
    if model.kind is DisturbanceKind.WORST_CASE:
        d = np.ones(n) if model.direction is None else np.asarray(model.direction, float)
        return delta * d / np.linalg.norm(d)
    if model.kind is DisturbanceKind.UNIFORM:
        b, i = divmod(step_index, _BLOCK)
        if cache is None:
            return _uniform_block(model, delta, n, b)[i].copy()
        if b not in cache:
            cache[b] = _uniform_block(model, delta, n, b)
        return cache[b][i]
    return np.asarray(model.hook(t, step_index), dtype=float).reshape(n)


@dataclass(frozen=True)
class SelfTriggeredConfig:
    plant: Plant
    x0: np.ndarray
    r: float
    T_min: float
    delta: float = 0.0
    disturbance: Disturbance = field(default_factory=Disturbance)
    total_time: float = 10.0
    sim_dt: float | None = None  # default T_min / 50
    n_per_unit: int = N_PER_UNIT
    tol_T: float = TOL_T
    T_max: float = T_MAX
    eps_zero: float = EPS_ZERO

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.size != self.n:
            raise ValueError(f"x0 must have {self.n} entries")
        if not 0 < self.r < 1:
            raise ValueError(f"r must lie in (0, 1), got {self.r}")
        if not self.T_min > 0:
            raise ValueError("T_min must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        sim_dt = self.T_min / 50 if self.sim_dt is None else float(self.sim_dt)
        if not sim_dt > 0:
            raise ValueError("sim_dt must be positive")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "sim_dt", sim_dt)

    @property
    def n(self) -> int:
        return 1 if isinstance(self.plant, ScalarPlant) else self.plant.n

    @property
    def m(self) -> int:
        return 1 if isinstance(self.plant, ScalarPlant) else self.plant.m

    def with_(self, **changes) -> "SelfTriggeredConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(changes)
        return SelfTriggeredConfig(**d)


def _rhs(plant: Plant):
    if isinstance(plant, ScalarPlant):
        a = plant.a
        if plant.kind is PlantKind.LINEAR:
            return lambda x, u, d: a * x + a * u + d
        return lambda x, u, d: np.sin(a * x) + a * u + d
    A, B = plant.A, plant.B
    return lambda x, u, d: A @ x + B @ u + d


def _rk4(f, x, u, d, h):
    k1 = f(x, u, d)
    k2 = f(x + 0.5 * h * k1, u, d)
    k3 = f(x + 0.5 * h * k2, u, d)
    k4 = f(x + h * k3, u, d)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def min_time(cfg: SelfTriggeredConfig, x) -> float:
    """T*(x) for the controller's linear model; inf when unreachable."""
    if isinstance(cfg.plant, ScalarPlant):
        try:
            return min_time_1d(cfg.plant, float(x[0]))
        except Unreachable:
            return math.inf
    res = minimum_time(cfg.plant, x, tol_T=cfg.tol_T, n_per_unit=cfg.n_per_unit,
                       T_max=cfg.T_max)
    return res.T_star


def interval_control(cfg: SelfTriggeredConfig, x_k, T_k: float):
    """Maximum hands-off control on [0, T_k] as (start, end, value) pieces."""
    if isinstance(cfg.plant, ScalarPlant):
        seg = handsoff_control_1d(cfg.plant, float(x_k[0]), T_k)
        return [(s, e, np.array([v])) for s, e, v in seg.pieces()]
    N = grid_steps(T_k, cfg.n_per_unit)
    sol = solve_l1(FiniteHorizonProblem(cfg.plant, x_k, T_k, N))
    if not sol.ok:
        raise Unreachable(f"L1 solve failed ({sol.status.value}) at T_k = {T_k}")
    dt = T_k / N
    u = sol.u.samples
    return [(k * dt, T_k if k == N - 1 else (k + 1) * dt, u[:, k].copy()) for k in range(N)]


@dataclass(frozen=True)
class Event:
    t: float
    x: np.ndarray
    T_star: float
    T_k: float
    pieces: list
    sup_norm: float
    rate: float

    def to_dict(self) -> dict:
        return {
            "t_k": self.t, "x_k": self.x.tolist(), "T_star": self.T_star, "T_k": self.T_k,
            "control": [{"start": s, "end": e, "u": v.tolist()} for s, e, v in self.pieces],
            "sup_norm": self.sup_norm, "rate": self.rate,
        }


@dataclass
class EpisodeLog:
    events: list
    t: np.ndarray          # integration nodes
    x: np.ndarray          # (n, nodes)
    u: np.ndarray          # (m, nodes - 1), constant on [t[j], t[j+1])
    status: str            # "completed" or "escaped"
    total_time: float

    @property
    def elapsed(self) -> float:
        return float(self.t[-1])

    def sampled_states(self) -> np.ndarray:
        return np.array([ev.x for ev in self.events])

    def write_events(self, path) -> None:
        with open(path, "w") as fh:
            for ev in self.events:
                fh.write(json.dumps(ev.to_dict()) + "\n")

    def write_trajectory(self, path) -> None:
        m, n = self.u.shape[0], self.x.shape[0]
        header = ["t"] + [f"u_{i + 1}" for i in range(m)] + [f"x_{j + 1}" for j in range(n)]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for j in range(self.t.size):
                uj = self.u[:, min(j, self.u.shape[1] - 1)] if self.u.shape[1] else np.zeros(m)
                row = [self.t[j], *uj, *self.x[:, j]]
                fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def _integrate(cfg: SelfTriggeredConfig, f, x, t0: float, pieces, dist_cache: dict):
    """RK4 across [t0, t0 + T] splitting at control pieces and disturbance cells."""
    h = cfg.sim_dt
    ts, xs, us = [], [], []
    for s, e, v in pieces:
        a, b = t0 + s, t0 + e
        if b <= a:
            continue
        j = int(math.floor(a / h))
        t = a
        while t < b:
            nxt = min(b, (j + 1) * h)
            if nxt <= t:
                j += 1
                continue
            d = disturbance_sample(cfg.disturbance, cfg.delta, cfg.n, j * h, j, dist_cache)
            x = _rk4(f, x, v, d, nxt - t)
            if not np.all(np.isfinite(x)):
                raise FloatingPointError("state diverged")
            ts.append(nxt)
            xs.append(x)
            us.append(v)
            t = nxt
            j += 1
    return x, ts, xs, us


def run_episode(cfg: SelfTriggeredConfig) -> EpisodeLog:
    """Run the self-triggered loop until the sampling time passes total_time.

    The last interval is completed rather than truncated, so every
    interval of the log is a full horizon. An unreachable sampled state
    ends the episode with status "escaped".
    """
    f = _rhs(cfg.plant)
    x = cfg.x0.copy()
    t = 0.0
    events = []
    ts, xs, us = [0.0], [x.copy()], []
    cache: dict = {}
    status = "completed"
    while t < cfg.total_time:
        T_star = min_time(cfg, x)
        if not math.isfinite(T_star):
            status = "escaped"
            break
        T_k = max(cfg.T_min, T_star / cfg.r)
        try:
            pieces = interval_control(cfg, x, T_k)
        except Unreachable:
            status = "escaped"
            break
        x_k = x.copy()
        try:
            x, t_i, x_i, u_i = _integrate(cfg, f, x, t, pieces, cache)
        except FloatingPointError:
            status = "escaped"
            break
        sup = max([np.linalg.norm(x_k)] + [np.linalg.norm(v) for v in x_i])
        active = sum(e - s for s, e, v in pieces if np.max(np.abs(v)) > cfg.eps_zero)
        events.append(Event(t, x_k, T_star, T_k, pieces, float(sup), active / T_k))
        ts.extend(t_i)
        xs.extend(x_i)
        us.extend(u_i)
        t = t + T_k
        ts[-1] = t  # keep t_{k+1} = t_k + T_k exact
    return EpisodeLog(events, np.array(ts), np.array(xs).T.reshape(cfg.n, -1),
                      np.array(us).T.reshape(cfg.m, -1) if us else np.zeros((cfg.m, 0)),
                      status, cfg.total_time)


def simulate_open_loop(cfg: SelfTriggeredConfig, u_value=0.0, until: float | None = None):
    """Plant under a constant control (zero by default) and the same disturbance."""
    f = _rhs(cfg.plant)
    T = cfg.total_time if until is None else until
    u = np.broadcast_to(np.asarray(u_value, dtype=float), (cfg.m,)).copy()
    x, ts, xs, _ = _integrate(cfg, f, cfg.x0.copy(), 0.0, [(0.0, T, u)], {})
    return np.array([0.0] + ts), np.column_stack([cfg.x0] + xs)


@dataclass(frozen=True)
class RateReport:
    total: float
    per_interval: tuple[float, ...]
    elapsed: float


def measured_sparsity_rate(log: EpisodeLog, eps_zero: float = EPS_ZERO) -> RateReport:
    """Support length of the stitched control divided by elapsed time."""
    if log.t.size < 2:
        return RateReport(0.0, (), 0.0)
    widths = np.diff(log.t)
    active = np.max(np.abs(log.u), axis=0) > eps_zero
    total = float(np.sum(widths[active]) / log.elapsed)
    return RateReport(total, tuple(ev.rate for ev in log.events), log.elapsed)


@dataclass(frozen=True)
class StabilityReport:
    mu: float
    T_star0: float
    T0: float
    gamma: float
    alpha_gamma: float
    condition_ok: bool
    h: float
    alpha_description: str
    b_norm: float
    delta: float
    approximate: bool
    degenerate_measure: bool
    omega_in_reachable: bool | None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _sphere_directions(n: int, K: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(K) / K
        return np.column_stack([np.cos(ang), np.sin(ang)])
    g = np.random.default_rng(12345).normal(size=(K, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def alpha_sampled(cfg: SelfTriggeredConfig, v: float, K: int = 64) -> float:
    """max of T*(v d) over K unit directions d (an estimate of the bound on T*
    over the ball of radius v)."""
    if v == 0:
        return 0.0
    return max(min_time(cfg, v * d) for d in _sphere_directions(cfg.n, K))


def stability_report(cfg: SelfTriggeredConfig, alpha: Callable[[float], float] | None = None,
                     n_directions: int = 64) -> StabilityReport:
    """Radius gamma of the set holding every sampled state k >= 1, the
    condition alpha(gamma) <= r T0, and the intersample bound h.

    For the stable scalar plant alpha(v) = v/|a|; for the unstable scalar
    plant alpha is the exact minimum time; otherwise it is sampled over
    n_directions unit vectors and the verdict is flagged approximate.
    """
    plant = cfg.plant
    approximate = False
    omega_ok = None
    if isinstance(plant, ScalarPlant):
        A, B = plant.linear_model()
        a = plant.a
        if alpha is not None:
            desc = "user supplied"
        elif a < 0:
            alpha = lambda v: v / abs(a)  # noqa: E731
            desc = "v/|a| (scalar stable)"
        else:
            alpha = lambda v: -math.log1p(-v) / a if v < 1 else math.inf  # noqa: E731
            desc = "-log(1-v)/a (scalar unstable, exact)"
    else:
        A, B = plant.A, plant.B
        if alpha is None:
            alpha = lambda v: alpha_sampled(cfg, v, n_directions)  # noqa: E731
            desc = f"sampled over {n_directions} directions (approximate)"
            approximate = cfg.n >= 2
        else:
            desc = "user supplied"
    mu = matrix_measure(A)
    b_norm = float(np.sum(np.linalg.norm(B, axis=0)))
    T_star0 = min_time(cfg, cfg.x0)
    T0 = max(cfg.T_min, T_star0 / cfg.r)
    delta = cfg.delta
    degenerate = abs(mu) < MU_TOL
    if degenerate:
        warnings.warn("matrix measure is ~0; using the mu -> 0 limit gamma = delta * T0")
        gamma = delta * T0
    else:
        gamma = delta / mu * math.expm1(mu * T0)
    a_gamma = float(alpha(gamma))
    condition = a_gamma <= cfg.r * T0
    if isinstance(plant, ScalarPlant):
        omega_ok = plant.a < 0 or gamma < 1
    gain = b_norm + delta
    if mu < 0 and not degenerate:
        h = gamma + gain / abs(mu)
    else:
        T_long = max(cfg.T_min, a_gamma / cfg.r)
        if degenerate:
            h = gamma + gain * T_long
        else:
            h = (gamma + gain / abs(mu)) * math.exp(mu * T_long) - gain / mu
    return StabilityReport(mu=mu, T_star0=T_star0, T0=T0, gamma=gamma, alpha_gamma=a_gamma,
                           condition_ok=bool(condition), h=h, alpha_description=desc,
                           b_norm=b_norm, delta=delta, approximate=approximate,
                           degenerate_measure=degenerate, omega_in_reachable=omega_ok)


def check_practical_stability(log: EpisodeLog, report: StabilityReport, tol: float = 1e-4) -> dict:
    """Compare sampled states (k >= 1) with gamma and intersample states with h."""
    sampled = [np.linalg.norm(ev.x) for ev in log.events[1:]]
    start = log.events[1].t if len(log.events) > 1 else log.elapsed
    mask = log.t >= start
    inter = np.linalg.norm(log.x[:, mask], axis=0) if mask.any() else np.zeros(0)
    max_s = float(max(sampled, default=0.0))
    max_i = float(inter.max(initial=0.0))
    return {
        "max_sampled_norm": max_s,
        "max_intersample_norm": max_i,
        "sampled_within_gamma": max_s <= report.gamma + tol,
        "intersample_within_h": max_i <= report.h + tol,
    }
