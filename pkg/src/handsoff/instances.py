"""Random problem generators for experiments and tests."""

from __future__ import annotations

import numpy as np

from .lti import LtiSystem, Verdict, normality_sufficient
from .sparse_control import dead_zone
from .transcription import FiniteHorizonProblem, terminal_constraint


def random_normal_system(rng: np.random.Generator, n: int, m: int) -> LtiSystem:
    """Gaussian (A, B) redrawn until the sufficient normality test passes."""
    while True:
        sys = LtiSystem(rng.normal(size=(n, n)), rng.normal(size=(n, m)))
        if normality_sufficient(sys) is Verdict.NORMAL:
            return sys


def costate_instance(rng: np.random.Generator, n_max: int = 3, N_max: int = 12,
                     margin: float = 0.05):
    """Single-input discrete instance with a known, unique, ternary l1 solution.

    A random multiplier nu fixes the switching function w = N Gamma' nu,
    scaled so that max |w| lies in [1.1, 3]. Then u = -D_1(w) satisfies the
    l1 optimality conditions, and x0 is chosen so that u meets the terminal
    condition. Redraws while some |w_k| is within margin of the threshold,
    which keeps the solution unique.

    Returns
    -------
    (FiniteHorizonProblem, numpy.ndarray)
        The problem and its l1 solution as a length-N vector.
    """
    while True:
        n = int(rng.integers(1, n_max + 1))
        N = int(rng.integers(n + 1, N_max + 1))
        sys = random_normal_system(rng, n, 1)
        T = float(rng.uniform(0.5, 3.0))
        G, _, _, Phi = terminal_constraint(sys, np.zeros(n), np.zeros(n), T, N)
        w = N * G.T @ rng.normal(size=n)
        w *= rng.uniform(1.1, 3.0) / np.abs(w).max()
        if np.min(np.abs(np.abs(w) - 1)) < margin:
            continue
        u = -dead_zone(w, 1.0)[0]
        x0 = -np.linalg.solve(Phi, G @ u)
        return FiniteHorizonProblem(sys, x0, T, N), u


def reachable_instance(rng: np.random.Generator, n: int, m: int, T: float, N: int,
                       amplitude: float = 0.6) -> FiniteHorizonProblem:
    """Normal instance whose x0 is steered to 0 by a smooth input of the given amplitude."""
    sys = random_normal_system(rng, n, m)
    G, _, _, Phi = terminal_constraint(sys, np.zeros(n), np.zeros(n), T, N)
    u = amplitude * np.sin(rng.uniform(0.5, 3) * np.linspace(0, T, m * N) + rng.uniform(0, 6))
    return FiniteHorizonProblem(sys, -np.linalg.solve(Phi, G @ u), T, N)
