"""Maximum hands-off, L1, L1/L2 and L2 finite-horizon controls on the
ZOH-discretized plant, minimum-time search, and the pointwise minimizer
maps (dead zone, saturated shrinkage) of the corresponding Hamiltonians.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .lti import LtiSystem, Verdict, normality_sufficient
from .signals import (EPS_ZERO, ControlSignal, StateTrajectory, bang_off_bang_distance,
                      forbidden_adjacencies, max_adjacent_jump, switching_count)
from .solver import (KKT_TOL, MAX_ITER, ConvexProgram, KKTResiduals, Status, feasibility,
                     solve)
from .transcription import (FiniteHorizonProblem, Objective, Transcript, terminal_constraint,
                            transcribe)

__all__ = [
    "FiniteHorizonProblem", "Objective", "ControlSolution", "Certificates", "solve_problem",
    "solve_l1", "solve_l1l2", "solve_l2", "solve_l0_exact", "minimum_time", "MinTime",
    "dead_zone", "shrink", "sat", "sat_shrink", "switching_bound", "NormalityUnknown",
]

TERMINAL_TOL = 1e-6
N_PER_UNIT = 200
TOL_T = 1e-3
T_MAX = 20.0


class NormalityUnknown(ValueError):
    """The sufficient normality test did not pass."""


@dataclass(frozen=True)
class Certificates:
    terminal_error: float
    kkt: KKTResiduals | None
    bang_off_bang_distance: tuple[float, ...]
    switching_counts: tuple[int, ...]
    forbidden_adjacencies: tuple[int, ...]
    max_jumps: tuple[float, ...]
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "terminal_error": self.terminal_error,
            "kkt": None if self.kkt is None else self.kkt.to_dict(),
            "bang_off_bang_distance": list(self.bang_off_bang_distance),
            "switching_counts": list(self.switching_counts),
            "forbidden_adjacencies": list(self.forbidden_adjacencies),
            "max_adjacent_jump": list(self.max_jumps),
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class ControlSolution:
    u: ControlSignal
    x: StateTrajectory
    objective_value: float
    certificates: Certificates
    status: Status
    problem: FiniteHorizonProblem = field(repr=False)
    # N * Gamma_k' nu per channel/step; the argument of the pointwise minimizer
    switching_function: np.ndarray | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def support_cells(self, eps_zero: float = EPS_ZERO) -> np.ndarray:
        return np.count_nonzero(np.abs(self.u.samples) > eps_zero, axis=1)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "objective": self.problem.objective.value,
            "objective_value": self.objective_value,
            "T": self.problem.T,
            "N": self.problem.N,
            "certificates": self.certificates.to_dict(),
        }


def _certify(prob: FiniteHorizonProblem, u: ControlSignal, disc, kkt, iterations,
             eps_zero: float = EPS_ZERO):
    x = disc.simulate(prob.x0, u.samples)
    channels = range(u.m)
    cert = Certificates(
        terminal_error=float(np.linalg.norm(x[:, -1] - prob.xT)),
        kkt=kkt,
        bang_off_bang_distance=tuple(bang_off_bang_distance(u, i, eps_zero) for i in channels),
        switching_counts=tuple(switching_count(u, i, eps_zero) for i in channels),
        forbidden_adjacencies=tuple(forbidden_adjacencies(u, i, eps_zero) for i in channels),
        max_jumps=tuple(max_adjacent_jump(u, i) for i in channels),
        iterations=iterations,
    )
    return StateTrajectory(x, u.dt), cert


def _objective_value(prob: FiniteHorizonProblem, u: ControlSignal, eps_zero=EPS_ZERO) -> float:
    s = u.samples
    if prob.objective is Objective.L0_EXACT:
        return float(np.sum(prob.lam * np.count_nonzero(np.abs(s) > eps_zero, axis=1)) / prob.N)
    val = 0.0
    if prob.objective in (Objective.L1, Objective.L1L2):
        val += float(np.sum(prob.lam * np.abs(s).sum(axis=1)))
    if prob.objective in (Objective.L1L2, Objective.L2):
        val += float(np.sum(0.5 * prob.theta * (s**2).sum(axis=1)))
    return val / prob.N


def _solve_convex(prob: FiniteHorizonProblem, kkt_tol: float, max_iter: int,
                  trace=None) -> ControlSolution:
    tr: Transcript = transcribe(prob)
    res = solve(tr.program, kkt_tol=kkt_tol, max_iter=max_iter, trace=trace)
    u = tr.decode(res.x)
    if res.status is not Status.INFEASIBLE:
        u = ControlSignal(np.clip(u.samples, -1.0, 1.0), u.dt)
    x, cert = _certify(prob, u, tr.disc, res.kkt, res.iterations)
    # equality multiplier of the terminal constraint, sign chosen so that
    # u minimizes  f(u) + nu' Gamma u  pointwise
    nu = -res.y
    sw = prob.N * (tr.Gamma.T @ nu).reshape(prob.sys.m, prob.N)
    status = res.status
    if status is Status.OPTIMAL and cert.terminal_error > TERMINAL_TOL:
        status = Status.MAX_ITER
    return ControlSolution(u, x, _objective_value(prob, u), cert, status, prob, sw)


def solve_l1(prob: FiniteHorizonProblem, kkt_tol: float = KKT_TOL,
             max_iter: int = MAX_ITER, trace=None) -> ControlSolution:
    """Minimum-fuel control: minimize (1/N) sum_i lam_i ||u_i||_1 subject to
    the exact grid terminal condition and |u| <= 1."""
    if prob.objective is not Objective.L1:
        prob = prob.with_(objective=Objective.L1)
    return _solve_convex(prob, kkt_tol, max_iter, trace)


def solve_l1l2(prob: FiniteHorizonProblem, kkt_tol: float = KKT_TOL,
               max_iter: int = MAX_ITER, trace=None) -> ControlSolution:
    if prob.objective is not Objective.L1L2:
        prob = prob.with_(objective=Objective.L1L2)
    return _solve_convex(prob, kkt_tol, max_iter, trace)


def solve_l2(prob: FiniteHorizonProblem, kkt_tol: float = KKT_TOL,
             max_iter: int = MAX_ITER, trace=None) -> ControlSolution:
    if prob.objective is not Objective.L2:
        prob = prob.with_(objective=Objective.L2)
    return _solve_convex(prob, kkt_tol, max_iter, trace)


# -- exhaustive l0 search ----------------------------------------------------

def _pattern_feasible(G: np.ndarray, rhs: np.ndarray, tol: float):
    """Is G v = rhs solvable with |v| <= 1? Returns v or None.

    Uses an exact least-squares path when the columns are independent and
    an LP (HiGHS) otherwise, independent of the interior-point solver.
    """
    scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
    if G.shape[1] == 0:
        return np.zeros(0) if np.abs(rhs).max(initial=0.0) <= tol * scale else None
    v, _, rank, _ = np.linalg.lstsq(G, rhs, rcond=None)
    if np.abs(G @ v - rhs).max() > tol * scale * 10:
        return None
    if rank == G.shape[1]:
        return v if np.abs(v).max() <= 1 + 1e-9 else None
    if np.abs(v).max() <= 1.0:
        return v  # the minimum-norm solution already fits the box
    # weak duality with y = rhs: y'rhs <= ||G'y||_1 for every feasible v
    if rhs @ rhs > np.abs(G.T @ rhs).sum() * (1 + 1e-9) + tol * scale:
        return None
    res = linprog(np.zeros(G.shape[1]), A_eq=G, b_eq=rhs, bounds=[(-1, 1)] * G.shape[1],
                  method="highs")
    if res.status != 0:
        return None
    v = res.x
    return v if np.abs(G @ v - rhs).max() <= tol * scale * 10 else None


def _patterns(m: int, N: int, lam: np.ndarray):
    """Support patterns ordered by weighted cost, then cardinality, then
    lexicographically (cells numbered i*N + k)."""
    counts = sorted(itertools.product(range(N + 1), repeat=m),
                    key=lambda c: (float(np.dot(lam, c)), sum(c), c))
    for c in counts:
        per_channel = [itertools.combinations(range(i * N, (i + 1) * N), c[i]) for i in range(m)]
        if sum(c) == 0:
            yield ()
            continue
        if m == 1:
            yield from per_channel[0]
            continue
        # collect and sort so that ties inside a count vector are lexicographic
        for combo in sorted(tuple(sorted(itertools.chain(*parts)))
                            for parts in itertools.product(*[list(p) for p in per_channel])):
            yield combo


def solve_l0_exact(prob: FiniteHorizonProblem, budget: int = 1_000_000,
                   tol: float = 1e-9) -> ControlSolution:
    """Exhaustive maximum hands-off control on the grid.

    Support patterns are tried in order of weighted size
    (1/N) sum_i lam_i |S_i|; the first pattern whose box-constrained
    terminal equation is solvable wins. Requires m*N <= 24.
    """
    m, N = prob.sys.m, prob.N
    if m * N > 24:
        raise ValueError(f"exhaustive search needs m*N <= 24, got {m * N}")
    Gamma, rhs, disc, _ = terminal_constraint(prob.sys, prob.x0, prob.xT, prob.T, N)
    examined = 0
    found = None
    status = Status.INFEASIBLE
    for pattern in _patterns(m, N, prob.lam):
        examined += 1
        if examined > budget:
            status = Status.BUDGET_EXCEEDED
            break
        v = _pattern_feasible(Gamma[:, list(pattern)], rhs, tol)
        if v is not None:
            found = (pattern, v)
            status = Status.OPTIMAL
            break
    flat = np.zeros(m * N)
    if found is not None:
        flat[list(found[0])] = np.clip(found[1], -1.0, 1.0)
    u = ControlSignal(flat.reshape(m, N), disc.dt)
    prob = prob.with_(objective=Objective.L0_EXACT)
    x, cert = _certify(prob, u, disc, None, examined)
    value = (float(sum(prob.lam[c // N] for c in found[0])) / N) if found else math.inf
    return ControlSolution(u, x, value, cert, status, prob)


def solve_problem(prob: FiniteHorizonProblem, **kw) -> ControlSolution:
    return {
        Objective.L1: solve_l1,
        Objective.L1L2: solve_l1l2,
        Objective.L2: solve_l2,
        Objective.L0_EXACT: solve_l0_exact,
    }[prob.objective](prob, **kw)


# -- minimum time ------------------------------------------------------------

@dataclass(frozen=True)
class MinTime:
    T_star: float
    status: str  # "ok" or "unreachable"
    evaluations: int = 0

    @property
    def reachable(self) -> bool:
        return self.status == "ok"


def grid_steps(T: float, n_per_unit: int = N_PER_UNIT) -> int:
    return max(1, int(math.ceil(n_per_unit * T - 1e-9)))


def reachable_in(sys: LtiSystem, x0, T: float, xT=None, n_per_unit: int = N_PER_UNIT) -> bool:
    """Feasibility of the grid terminal condition with |u| <= 1 at horizon T."""
    xT = np.zeros(sys.n) if xT is None else xT
    N = grid_steps(T, n_per_unit)
    Gamma, rhs, _, _ = terminal_constraint(sys, x0, xT, T, N)
    V = Gamma.shape[1]
    prog = ConvexProgram(c=np.zeros(V), Aeq=Gamma, beq=rhs, lb=-np.ones(V), ub=np.ones(V))
    return feasibility(prog).feasible


def minimum_time(sys: LtiSystem, x0, xT=None, tol_T: float = TOL_T,
                 n_per_unit: int = N_PER_UNIT, T_max: float = T_MAX,
                 T_start: float = 0.5) -> MinTime:
    """Bisection on the horizon for feasibility of the grid problem.

    The bracket grows geometrically from T_start until feasible; hitting
    T_max reports "unreachable". The returned time is the feasible end
    of a bracket no wider than tol_T.
    """
    if not tol_T > 0:
        raise ValueError("tol_T must be positive")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    xT = np.zeros(sys.n) if xT is None else np.asarray(xT, dtype=float).reshape(-1)
    if np.array_equal(x0, xT) and not np.any(xT):
        return MinTime(0.0, "ok", 0)
    evals = 0
    lo, hi = 0.0, min(T_start, T_max)
    while True:
        evals += 1
        if reachable_in(sys, x0, hi, xT, n_per_unit):
            break
        lo = hi
        if hi >= T_max:
            return MinTime(math.inf, "unreachable", evals)
        hi = min(2.0 * hi, T_max)
    while hi - lo > tol_T:
        mid = 0.5 * (lo + hi)
        evals += 1
        if reachable_in(sys, x0, mid, xT, n_per_unit):
            hi = mid
        else:
            lo = mid
    return MinTime(hi, "ok", evals)


# -- pointwise minimizer maps --------------------------------------------------

def dead_zone(w, lam: float):
    """Dead-zone map D_lam: -1 below -lam, 0 inside, +1 above lam.

    The map is set-valued at |w| = lam; there it returns 0 together with
    a True boundary flag. Works elementwise on arrays.
    """
    if not lam > 0:
        raise ValueError("threshold must be positive")
    w = np.asarray(w, dtype=float)
    boundary = np.isclose(np.abs(w), lam, rtol=1e-12, atol=0.0)
    val = np.where(boundary, 0.0, np.where(w > lam, 1.0, np.where(w < -lam, -1.0, 0.0)))
    if val.ndim == 0:
        return float(val), bool(boundary)
    return val, boundary


def shrink(v, k: float):
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - k, 0.0)


def sat(v):
    return np.clip(v, -1.0, 1.0)


def sat_shrink(v, lam: float, theta: float):
    """sat(S_{lam/theta}(v)): soft threshold at lam/theta, then clip to [-1, 1].

    The L1/L2 pointwise minimizer is -sat_shrink(a/theta, lam, theta),
    the argmin over |u| <= 1 of lam|u| + theta/2 u^2 + a u.
    """
    if not (lam > 0 and theta > 0):
        raise ValueError("lam and theta must be positive")
    out = sat(shrink(v, lam / theta))
    return float(out) if np.ndim(out) == 0 else out


def switching_bound(sys: LtiSystem, T: float) -> int:
    """floor(2 n m (1 + T omega / pi)), omega the largest imaginary part of eig(A)."""
    if normality_sufficient(sys) is not Verdict.NORMAL:
        raise NormalityUnknown("switching bound requires controllable (A, b_i) and nonsingular A")
    omega = float(max(0.0, np.max(np.linalg.eigvals(sys.A).imag)))
    return int(math.floor(2 * sys.n * sys.m * (1 + T * omega / math.pi)))
