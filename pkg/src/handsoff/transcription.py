"""Finite-horizon control problems and their transcription to convex programs.

Dynamics are eliminated by substitution: with the ZOH map (Ad, Bd) on N
steps, x[N] = Phi x0 + Gamma u, so the terminal condition is the only
equality block and the program variables are the control samples alone.

Cost normalization: the continuous-time weight (1/T) * integral becomes
(1/T) * dt * sum = (1/N) * sum on the grid, so both conventions produce
the same coefficients.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .lti import DiscretizedSystem, LtiSystem, discretize_zoh, expm
from .signals import ControlSignal
from .solver import ConvexProgram


class Objective(enum.Enum):
    L0_EXACT = "l0-exact"
    L1 = "l1"
    L1L2 = "l1l2"
    L2 = "l2"


@dataclass(frozen=True)
class FiniteHorizonProblem:
    sys: LtiSystem
    x0: np.ndarray
    T: float
    N: int
    objective: Objective = Objective.L1
    lam: np.ndarray | None = None
    theta: np.ndarray | None = None
    xT: np.ndarray | None = None

    def __post_init__(self):
        n, m = self.sys.n, self.sys.m
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        xT = np.zeros(n) if self.xT is None else np.asarray(self.xT, dtype=float).reshape(-1)
        if x0.size != n or xT.size != n:
            raise ValueError(f"x0 and xT must have {n} entries")
        lam = np.ones(m) if self.lam is None else np.broadcast_to(
            np.asarray(self.lam, dtype=float), (m,)).copy()
        default_theta = 1.0 if self.objective in (Objective.L1L2, Objective.L2) else 0.0
        theta = np.full(m, default_theta) if self.theta is None else np.broadcast_to(
            np.asarray(self.theta, dtype=float), (m,)).copy()
        objective = Objective(self.objective)
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if objective is not Objective.L2 and np.any(lam <= 0):
            raise ValueError("lambda weights must be positive")
        if np.any(theta < 0):
            raise ValueError("theta weights must be nonnegative")
        if objective in (Objective.L1L2, Objective.L2) and np.any(theta <= 0):
            raise ValueError(f"theta weights must be positive for objective {objective.value}")
        for name, val in (("x0", x0), ("xT", xT), ("lam", lam), ("theta", theta),
                          ("objective", objective), ("N", int(self.N)), ("T", float(self.T))):
            object.__setattr__(self, name, val)

    @property
    def dt(self) -> float:
        return self.T / self.N

    def with_(self, **changes) -> "FiniteHorizonProblem":
        fields = dict(sys=self.sys, x0=self.x0, T=self.T, N=self.N, objective=self.objective,
                      lam=self.lam, theta=self.theta, xT=self.xT)
        fields.update(changes)
        return FiniteHorizonProblem(**fields)


def reachability_operator(disc: DiscretizedSystem) -> np.ndarray:
    """Gamma (n x mN): column i*N + k is Ad^(N-1-k) Bd e_i."""
    n, m, N = disc.source.n, disc.source.m, disc.N
    Gamma = np.empty((n, m * N))
    P = disc.Bd.copy()
    for k in range(N - 1, -1, -1):
        Gamma[:, k::N] = P
        P = disc.Ad @ P
    return Gamma


def terminal_constraint(sys: LtiSystem, x0, xT, T: float, N: int):
    """(Gamma, rhs, disc, Phi) with Gamma u = xT - Phi x0 on the ZOH grid."""
    disc = discretize_zoh(sys, T, N)
    Phi = expm(sys.A * T)
    Gamma = reachability_operator(disc)
    rhs = np.asarray(xT, dtype=float) - Phi @ np.asarray(x0, dtype=float)
    return Gamma, rhs, disc, Phi


@dataclass(frozen=True)
class Transcript:
    program: ConvexProgram
    disc: DiscretizedSystem
    Phi: np.ndarray
    Gamma: np.ndarray
    split: bool  # variables are [u+, u-] rather than u
    normalization: str = field(default="1/N (equal to dt/T)")

    @property
    def m(self) -> int:
        return self.disc.source.m

    @property
    def N(self) -> int:
        return self.disc.N

    def decode(self, z) -> ControlSignal:
        z = np.asarray(z, dtype=float)
        mN = self.m * self.N
        u = z[:mN] - z[mN:] if self.split else z
        return ControlSignal(u.reshape(self.m, self.N), self.disc.dt)

    def encode(self, u: ControlSignal) -> np.ndarray:
        flat = np.asarray(u.samples, dtype=float).reshape(-1)
        if not self.split:
            return flat.copy()
        return np.concatenate([np.maximum(flat, 0.0), np.maximum(-flat, 0.0)])


def transcribe(prob: FiniteHorizonProblem) -> Transcript:
    """Build the convex program for an L1, L1/L2 or L2 problem.

    L1 and L1/L2 use the split u = u+ - u- with 0 <= u+-, so that |u|
    enters linearly; the L1/L2 energy term is written as
    theta/2 * (u+^2 + u-^2), which agrees with theta/2 * u^2 whenever
    u+ u- = 0 and is strictly larger otherwise, so minimizers coincide.
    L2 keeps the unsplit u in [-1, 1].
    """
    if prob.objective is Objective.L0_EXACT:
        raise ValueError("the exact L0 problem is combinatorial and has no convex transcript")
    m, N = prob.sys.m, prob.N
    Gamma, rhs, disc, Phi = terminal_constraint(prob.sys, prob.x0, prob.xT, prob.T, N)
    lam = np.repeat(prob.lam, N) / N
    theta = np.repeat(prob.theta, N) / N
    if prob.objective is Objective.L2:
        prog = ConvexProgram(c=np.zeros(m * N), Aeq=Gamma, beq=rhs,
                             lb=-np.ones(m * N), ub=np.ones(m * N), Q=theta)
        return Transcript(prog, disc, Phi, Gamma, split=False)
    Q = None
    if prob.objective is Objective.L1L2:
        Q = np.concatenate([theta, theta])
    prog = ConvexProgram(c=np.concatenate([lam, lam]), Aeq=np.hstack([Gamma, -Gamma]), beq=rhs,
                         lb=np.zeros(2 * m * N), ub=np.ones(2 * m * N), Q=Q)
    return Transcript(prog, disc, Phi, Gamma, split=True)
