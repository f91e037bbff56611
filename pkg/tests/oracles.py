"""Brute-force reference solutions used by the test-suite."""

import itertools

import numpy as np


def vertex_enumeration(c, Aeq, beq, lb, ub, tol=1e-9):
    """Minimum of c'x over the vertices of {Aeq x = beq, lb <= x <= ub}.

    Every basic solution fixes V - p variables at a bound and solves the
    equalities for the remaining p (Aeq must have full row rank and finite
    bounds). Returns (value, x) or (inf, None) when no vertex is feasible.
    """
    c, Aeq, beq = map(np.asarray, (c, Aeq, beq))
    p, V = Aeq.shape
    best, arg = np.inf, None
    for basis in itertools.combinations(range(V), p):
        B = Aeq[:, basis]
        if np.linalg.matrix_rank(B) < p:
            continue
        rest = [j for j in range(V) if j not in basis]
        for at_upper in itertools.product((False, True), repeat=len(rest)):
            x = np.empty(V)
            x[rest] = np.where(at_upper, ub[rest], lb[rest])
            x[list(basis)] = np.linalg.solve(B, beq - Aeq[:, rest] @ x[rest])
            if np.all(x >= lb - tol) and np.all(x <= ub + tol):
                val = float(c @ x)
                if val < best - 1e-12:
                    best, arg = val, x
    return best, arg


def random_tiny_lp(rng, V=None, p=None):
    """Feasible LP with finite bounds: beq is generated from an interior point."""
    V = V or int(rng.integers(2, 7))
    p = p or int(rng.integers(1, min(V, 3) + 1))
    Aeq = rng.normal(size=(p, V))
    lb = rng.uniform(-2, 0, V)
    ub = lb + rng.uniform(0.5, 3, V)
    x_in = lb + rng.uniform(0.1, 0.9, V) * (ub - lb)
    return rng.normal(size=V), Aeq, Aeq @ x_in, lb, ub


def box_qp_single_equality(q, c, s, lb, ub):
    """min 1/2 sum q_i x_i^2 + c'x  s.t. sum x = s, lb <= x <= ub, q > 0.

    x_i(y) = clip((y - c_i)/q_i) is monotone in the multiplier y, so a
    bisection on y solves the KKT system.
    """
    x_of = lambda y: np.clip((y - c) / q, lb, ub)  # noqa: E731
    lo, hi = -1e6, 1e6
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if x_of(mid).sum() < s:
            lo = mid
        else:
            hi = mid
    return x_of(0.5 * (lo + hi))
