"""Dense primal-dual interior-point solver for

    minimize    c'x + 1/2 x'Qx
    subject to  Aeq x = beq,  lb <= x <= ub

with Mehrotra predictor-corrector steps. Bounds may be infinite. The
Newton system is reduced to the (few) equality rows by a Schur
complement; H = Q + diag(barrier) is inverted elementwise when Q is
diagonal and by Cholesky otherwise.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

KKT_TOL = 1e-8
MAX_ITER = 100
PHASE1_TOL = 1e-7
_STEP_FRACTION = 0.995
_REG = 1e-13


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    BUDGET_EXCEEDED = "budget_exceeded"  # exhaustive support search only


@dataclass(frozen=True)
class ConvexProgram:
    c: np.ndarray
    Aeq: np.ndarray
    beq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    Q: np.ndarray | None = None  # (V, V), or a length-V vector for a diagonal

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        V = c.size
        Aeq = np.asarray(self.Aeq, dtype=float).reshape(-1, V) if V else np.zeros((0, 0))
        beq = np.asarray(self.beq, dtype=float).reshape(-1)
        lb = np.broadcast_to(np.asarray(self.lb, dtype=float), (V,)).copy()
        ub = np.broadcast_to(np.asarray(self.ub, dtype=float), (V,)).copy()
        if Aeq.shape[0] != beq.size:
            raise ValueError(f"Aeq has {Aeq.shape[0]} rows but beq has {beq.size} entries")
        for name, arr in (("c", c), ("Aeq", Aeq), ("beq", beq)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN or inf")
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)):
            raise ValueError("bounds contain NaN")
        if np.any(lb > ub):
            raise ValueError("lb > ub for some variable")
        Q = self.Q
        if Q is not None:
            Q = np.asarray(Q, dtype=float)
            if not np.all(np.isfinite(Q)):
                raise ValueError("Q contains NaN or inf")
            if Q.ndim == 1:
                # diagonal given as a vector
                if Q.size != V:
                    raise ValueError(f"diagonal Q must have {V} entries, got {Q.size}")
                if np.any(Q < 0):
                    raise ValueError("Q must be positive semidefinite")
            else:
                if Q.shape != (V, V):
                    raise ValueError(f"Q must be {V}x{V}, got {Q.shape}")
                if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
                    raise ValueError("Q must be symmetric")
                if V <= 200:
                    w = np.linalg.eigvalsh(Q)
                    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
                        raise ValueError("Q must be positive semidefinite")
        for name, val in (("c", c), ("Aeq", Aeq), ("beq", beq), ("lb", lb), ("ub", ub), ("Q", Q)):
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_eq(self) -> int:
        return self.Aeq.shape[0]

    def objective(self, x) -> float:
        val = float(self.c @ x)
        if self.Q is not None:
            Qx = self.Q * x if self.Q.ndim == 1 else self.Q @ x
            val += 0.5 * float(x @ Qx)
        return val


def _is_diagonal(Q: np.ndarray) -> bool:
    return not np.any(Q - np.diag(np.diag(Q)))


@dataclass(frozen=True)
class KKTResiduals:
    primal: float
    dual: float
    complementarity: float

    def max(self) -> float:
        return max(self.primal, self.dual, self.complementarity)

    def to_dict(self) -> dict:
        return {"primal": self.primal, "dual": self.dual,
                "complementarity": self.complementarity}


@dataclass(frozen=True)
class SolveResult:
    x: np.ndarray
    status: Status
    kkt: KKTResiduals
    iterations: int
    objective: float
    y: np.ndarray          # equality multipliers: grad f = Aeq' y + z_lower - z_upper
    z_lower: np.ndarray
    z_upper: np.ndarray
    infeasibility: float = 0.0


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    margin: float    # 0 when feasible
    residual: float  # attained phase-1 objective (l1 norm of Aeq x - beq)
    x: np.ndarray


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def _ipm(prog: ConvexProgram, tol: float, max_iter: int, trace=None) -> SolveResult:
    c, A, b, lb, ub = prog.c, prog.Aeq, prog.beq, prog.lb, prog.ub
    V, p = prog.n_vars, prog.n_eq
    Q = prog.Q
    q_diag = None
    if Q is None:
        q_diag = np.zeros(V)
    elif Q.ndim == 1:
        q_diag = Q
    elif _is_diagonal(Q):
        q_diag = np.diag(Q).copy()
    is_lp = Q is None or not np.any(Q)

    hl = np.isfinite(lb)
    hu = np.isfinite(ub)
    x = np.where(hl & hu, 0.5 * (lb + ub),
                 np.where(hl, lb + 1.0, np.where(hu, ub - 1.0, 0.0)))
    fixed = hl & hu & (ub - lb <= 0)
    if np.any(fixed):
        # degenerate box: widen by a hair so the barrier stays defined
        lb = np.where(fixed, lb - 1e-12, lb)
        ub = np.where(fixed, ub + 1e-12, ub)
    zl = hl.astype(float)
    zu = hu.astype(float)
    y = np.zeros(p)
    n_comp = int(hl.sum() + hu.sum())

    def residuals(x, y, zl, zu):
        sl = np.where(hl, x - lb, 1.0)
        su = np.where(hu, ub - x, 1.0)
        Qx = q_diag * x if q_diag is not None else Q @ x
        rd = Qx + c - A.T @ y - zl + zu
        rp = A @ x - b
        cl = sl * zl
        cu = su * zu
        return sl, su, rd, rp, cl, cu

    status = Status.MAX_ITER
    it = 0
    while True:
        sl, su, rd, rp, cl, cu = residuals(x, y, zl, zu)
        comp_max = float(max(cl[hl].max(initial=0.0), cu[hu].max(initial=0.0)))
        kkt = KKTResiduals(float(np.abs(rp).max(initial=0.0)),
                           float(np.abs(rd).max(initial=0.0)), comp_max)
        if trace is not None:
            trace.write(json.dumps({"iteration": it, **kkt.to_dict()}) + "\n")
        if kkt.max() <= tol:
            status = Status.OPTIMAL
            break
        if it >= max_iter:
            break
        it += 1
        mu = float((cl[hl].sum() + cu[hu].sum()) / n_comp) if n_comp else 0.0

        # x pinned to a bound in floating point (infeasible runs): stop here
        if np.any(sl[hl] <= 0) or np.any(su[hu] <= 0):
            break
        sig = np.where(hl, zl / sl, 0.0) + np.where(hu, zu / su, 0.0)
        if q_diag is not None:
            hinv = 1.0 / (q_diag + sig + _REG)

            def hsolve(r):
                return hinv[:, None] * r if r.ndim == 2 else hinv * r
            HiAt = hsolve(A.T)
        else:
            H = Q + np.diag(sig + _REG)
            cf = la.cho_factor(H, check_finite=False)

            def hsolve(r):
                return la.cho_solve(cf, r, check_finite=False)
            HiAt = hsolve(A.T) if p else np.zeros((V, 0))
        M = A @ HiAt if p else np.zeros((0, 0))
        if p:
            try:
                mf = la.cho_factor(M, check_finite=False)

                def msolve(r):
                    return la.cho_solve(mf, r, check_finite=False)
            except la.LinAlgError:
                def msolve(r):
                    return np.linalg.lstsq(M, r, rcond=None)[0]

        def newton(rcl, rcu):
            rhs1 = -rd + np.where(hl, rcl / sl, 0.0) - np.where(hu, rcu / su, 0.0)
            h1 = hsolve(rhs1)
            if p:
                dy = msolve(-rp - A @ h1)
                dx = h1 + HiAt @ dy
            else:
                dy = np.zeros(0)
                dx = h1
            dzl = np.where(hl, (rcl - zl * dx) / sl, 0.0)
            dzu = np.where(hu, (rcu + zu * dx) / su, 0.0)
            return dx, dy, dzl, dzu

        def steps(dx, dzl, dzu):
            ap = min(_max_step(sl[hl], dx[hl]), _max_step(su[hu], -dx[hu]))
            ad = min(_max_step(zl[hl], dzl[hl]), _max_step(zu[hu], dzu[hu]))
            return ap, ad

        # predictor
        dx, dy, dzl, dzu = newton(-cl, -cu)
        ap, ad = steps(dx, dzl, dzu)
        if n_comp:
            mu_aff = ((sl + ap * dx)[hl] @ (zl + ad * dzl)[hl]
                      + (su - ap * dx)[hu] @ (zu + ad * dzu)[hu]) / n_comp
            sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        else:
            sigma = 0.0
        # corrector
        rcl = np.where(hl, sigma * mu - cl - dx * dzl, 0.0)
        rcu = np.where(hu, sigma * mu - cu + dx * dzu, 0.0)
        dx, dy, dzl, dzu = newton(rcl, rcu)
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dy))):
            break
        ap, ad = steps(dx, dzl, dzu)
        ap = min(1.0, _STEP_FRACTION * ap)
        ad = min(1.0, _STEP_FRACTION * ad)
        if not is_lp:
            ap = ad = min(ap, ad)
        x = x + ap * dx
        y = y + ad * dy
        zl = zl + ad * dzl
        zu = zu + ad * dzu

    return SolveResult(x=x, status=status, kkt=kkt, iterations=it,
                       objective=prog.objective(x), y=y, z_lower=zl, z_upper=zu)


def _kkt_at(prog: ConvexProgram, x, y, zl, zu) -> KKTResiduals:
    hl = np.isfinite(prog.lb)
    hu = np.isfinite(prog.ub)
    Q = prog.Q
    Qx = 0.0 if Q is None else (Q * x if Q.ndim == 1 else Q @ x)
    rd = Qx + prog.c - prog.Aeq.T @ y - zl + zu
    rp = prog.Aeq @ x - prog.beq
    viol = np.maximum(np.where(hl, prog.lb - x, 0.0), np.where(hu, x - prog.ub, 0.0))
    cl = np.abs(np.where(hl, (x - prog.lb) * zl, 0.0))
    cu = np.abs(np.where(hu, (prog.ub - x) * zu, 0.0))
    return KKTResiduals(float(max(np.abs(rp).max(initial=0.0), viol.max(initial=0.0))),
                        float(np.abs(rd).max(initial=0.0)),
                        float(max(cl.max(initial=0.0), cu.max(initial=0.0))))


def _polish(prog: ConvexProgram, res: SolveResult, tol: float) -> SolveResult | None:
    """Active-set cleanup of an interior point.

    Variables whose bound gap is smaller than the bound multiplier are
    fixed at that bound; the KKT system on the remaining (free) ones is
    solved directly. For an LP at most rank(Aeq) variables stay free,
    chosen by the largest gap/multiplier ratio. The result is accepted
    only if it certifies at tol without a worse objective.
    """
    x, zl, zu = res.x, res.z_lower, res.z_upper
    lb, ub, A, b, c, Q = prog.lb, prog.ub, prog.Aeq, prog.beq, prog.c, prog.Q
    hl = np.isfinite(lb)
    hu = np.isfinite(ub)
    V, p = prog.n_vars, prog.n_eq
    gl = np.where(hl, x - lb, np.inf)
    gu = np.where(hu, ub - x, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        rl = np.where(hl, gl / np.maximum(zl, 1e-300), np.inf)
        ru = np.where(hu, gu / np.maximum(zu, 1e-300), np.inf)
    ratio = np.minimum(rl, ru)
    is_lp = Q is None or not np.any(Q)
    free = ratio >= 1.0
    if is_lp:
        rank = np.linalg.matrix_rank(A) if p else 0
        if free.sum() > rank:
            free = np.zeros(V, dtype=bool)
            if rank:
                free[np.argsort(-ratio, kind="stable")[:rank]] = True
    at_l = ~free & (rl <= ru)
    at_u = ~free & ~at_l
    xn = x.copy()
    xn[at_l] = lb[at_l]
    xn[at_u] = ub[at_u]
    F = np.flatnonzero(free)
    rhs = b - A[:, ~free] @ xn[~free] if p else np.zeros(0)
    AF = A[:, F]
    if Q is None:
        QFF = np.zeros((F.size, F.size))
        qN = np.zeros(F.size)
    elif Q.ndim == 1:
        QFF = np.diag(Q[F])
        qN = np.zeros(F.size)
    else:
        QFF = Q[np.ix_(F, F)]
        qN = Q[np.ix_(F, np.flatnonzero(~free))] @ xn[~free]
    K = np.block([[QFF, -AF.T], [AF, np.zeros((p, p))]])
    r = np.concatenate([-(c[F] + qN), rhs])
    if F.size + p == 0:
        sol = np.zeros(0)
    else:
        sol = np.linalg.lstsq(K, r, rcond=None)[0]
        if np.abs(K @ sol - r).max(initial=0.0) > 1e-3 * tol:
            return None
    xn[F] = sol[:F.size]
    y = sol[F.size:] if p else np.zeros(0)
    if is_lp and p and F.size < p:
        # multipliers underdetermined by the free columns: stay near the IPM ones
        y = res.y + np.linalg.lstsq(AF.T, c[F] - AF.T @ res.y, rcond=None)[0] if F.size else res.y
    over = np.maximum(np.where(hl, lb - xn, 0.0), np.where(hu, xn - ub, 0.0))
    if over.max(initial=0.0) > 1e-12:
        return None
    xn = np.clip(xn, lb, ub)
    Qx = 0.0 if Q is None else (Q * xn if Q.ndim == 1 else Q @ xn)
    red = Qx + c - A.T @ y
    zl_n = np.where(at_l, np.maximum(red, 0.0), 0.0)
    zu_n = np.where(at_u, np.maximum(-red, 0.0), 0.0)
    kkt = _kkt_at(prog, xn, y, zl_n, zu_n)
    obj = prog.objective(xn)
    if kkt.max() > tol or obj > res.objective + tol * (1.0 + abs(res.objective)):
        return None
    return SolveResult(x=xn, status=Status.OPTIMAL, kkt=kkt, iterations=res.iterations,
                       objective=obj, y=y, z_lower=zl_n, z_upper=zu_n)


def _phase1(prog: ConvexProgram) -> ConvexProgram:
    V, p = prog.n_vars, prog.n_eq
    eye = np.eye(p)
    return ConvexProgram(
        c=np.concatenate([np.zeros(V), np.ones(2 * p)]),
        Aeq=np.hstack([prog.Aeq, eye, -eye]),
        beq=prog.beq,
        lb=np.concatenate([prog.lb, np.zeros(2 * p)]),
        ub=np.concatenate([prog.ub, np.full(2 * p, np.inf)]),
    )


def feasibility(prog: ConvexProgram, kkt_tol: float = KKT_TOL,
                max_iter: int = MAX_ITER) -> Feasibility:
    """Phase-1 check: minimize ||Aeq x - beq||_1 over the box.

    Declared infeasible when phase 1 converges to a minimum above 1e-7.
    """
    V = prog.n_vars
    if prog.n_eq == 0:
        x = np.clip(np.zeros(V), prog.lb, prog.ub)
        return Feasibility(True, 0.0, 0.0, x)
    res = _ipm(_phase1(prog), kkt_tol, max_iter)
    x = np.clip(res.x[:V], prog.lb, prog.ub)
    resid = float(np.abs(prog.Aeq @ x - prog.beq).sum())
    # an unconverged phase 1 proves nothing; report the residual but stay feasible
    feasible = resid <= PHASE1_TOL or res.status is not Status.OPTIMAL
    return Feasibility(feasible, 0.0 if feasible else resid, resid, x)


def solve(prog: ConvexProgram, kkt_tol: float = KKT_TOL, max_iter: int = MAX_ITER,
          trace=None, polish: bool = True) -> SolveResult:
    """Solve the program; certify OPTIMAL only when every KKT residual is
    at most kkt_tol. A non-converged run is classified by a phase-1 solve.

    Parameters
    ----------
    trace : file-like, optional
        Receives one JSON line per iteration with the residuals.
    polish : bool
        Try an active-set cleanup of the interior solution (exact zeros
        and bounds); kept only when it certifies at kkt_tol.
    """
    res = _ipm(prog, kkt_tol, max_iter, trace)
    if res.status is Status.OPTIMAL:
        if polish:
            # push the interior point closer to the optimal face, then clean up
            for tighter in (kkt_tol, kkt_tol * 1e-3, kkt_tol * 1e-6):
                if tighter < kkt_tol:
                    deeper = _ipm(prog, tighter, max_iter, None)
                    if deeper.status is not Status.OPTIMAL:
                        break
                    res = deeper
                polished = _polish(prog, res, kkt_tol)
                if polished is not None:
                    return polished
        return res
    feas = feasibility(prog, kkt_tol, max(max_iter, MAX_ITER))
    if not feas.feasible:
        return SolveResult(x=res.x, status=Status.INFEASIBLE, kkt=res.kkt,
                           iterations=res.iterations, objective=res.objective,
                           y=res.y, z_lower=res.z_lower, z_upper=res.z_upper,
                           infeasibility=feas.margin)
    return res
