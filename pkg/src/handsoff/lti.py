"""Linear time-invariant plants: matrix functions, ZOH discretization and
the structural checks (controllability, nonsingularity) used to certify
normality of the L1-optimal control problem."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# singular values below RANK_RTOL * sigma_max count as zero
RANK_RTOL = 1e-9

# Pade(13) coefficients and scaling threshold (Higham 2005)
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


class Verdict(enum.Enum):
    NORMAL = "normal"
    UNKNOWN = "unknown"


def _as_square(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade core.

    Parameters
    ----------
    M : array_like, shape (n, n)

    Returns
    -------
    numpy.ndarray
        exp(M), relative error around 1e-13 for moderately normal M.
    """
    M = _as_square(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    n = M.shape[0]
    ident = np.eye(n)
    norm1 = np.linalg.norm(M, 1)
    if norm1 == 0:
        return ident
    s = 0
    if norm1 > _THETA13:
        s = int(np.ceil(np.log2(norm1 / _THETA13)))
    X = M / 2.0**s
    b = _PADE13
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
         + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def matrix_measure(A) -> float:
    """Largest eigenvalue of the symmetric part (A + A^T)/2."""
    A = _as_square(A)
    return float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1])


def numerical_rank(M, rtol: float = RANK_RTOL) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def is_nonsingular(A, rtol: float = RANK_RTOL) -> bool:
    A = _as_square(A)
    return numerical_rank(A, rtol) == A.shape[0]


def kalman_matrix(A, b) -> np.ndarray:
    """[b, Ab, ..., A^{n-1} b] for a single column b."""
    A = _as_square(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    cols = [b]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


@dataclass(frozen=True)
class LtiSystem:
    """dx/dt = A x + B u with A (n x n) and B (n x m)."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0] or B.shape[1] < 1:
            raise ValueError(
                f"B must have {A.shape[0]} rows and at least one column, got shape {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("system matrices must be finite")
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @classmethod
    def from_dict(cls, d: dict) -> "LtiSystem":
        for key in ("A", "B"):
            if key not in d:
                raise ValueError(f"system: missing field '{key}'")
        try:
            return cls(np.array(d["A"], dtype=float), np.array(d["B"], dtype=float))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"system: {exc}") from exc

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist()}


@dataclass(frozen=True)
class DiscretizedSystem:
    Ad: np.ndarray
    Bd: np.ndarray
    dt: float
    N: int
    source: LtiSystem = field(repr=False)

    @property
    def T(self) -> float:
        return self.N * self.dt

    def simulate(self, x0, u) -> np.ndarray:
        """States at the N+1 grid points for samples u of shape (m, N)."""
        u = np.asarray(u, dtype=float).reshape(self.source.m, -1)
        x = np.empty((self.source.n, u.shape[1] + 1))
        x[:, 0] = np.asarray(x0, dtype=float).reshape(-1)
        for k in range(u.shape[1]):
            x[:, k + 1] = self.Ad @ x[:, k] + self.Bd @ u[:, k]
        return x


def discretize_zoh(sys: LtiSystem, T: float, N: int) -> DiscretizedSystem:
    """Exact zero-order-hold map on a uniform grid of N steps over [0, T].

    Ad and Bd are read off the exponential of the augmented matrix
    [[A, B], [0, 0]] * dt.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    if int(N) != N or N < 1:
        raise ValueError(f"step count must be a positive integer, got {N}")
    N = int(N)
    dt = T / N
    n, m = sys.n, sys.m
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = sys.A
    aug[:n, n:] = sys.B
    E = expm(aug * dt)
    return DiscretizedSystem(E[:n, :n].copy(), E[:n, n:].copy(), dt, N, sys)


@dataclass(frozen=True)
class Controllability:
    channels: tuple[bool, ...]

    @property
    def overall(self) -> bool:
        return all(self.channels)


def controllability_check(sys: LtiSystem) -> Controllability:
    """Per-input Kalman rank test of (A, b_i)."""
    return Controllability(tuple(
        numerical_rank(kalman_matrix(sys.A, sys.B[:, i])) == sys.n
        for i in range(sys.m)))


def normality_sufficient(sys: LtiSystem) -> Verdict:
    """NORMAL when every (A, b_i) is controllable and A is nonsingular.

    The condition is only sufficient, so failure yields UNKNOWN rather
    than a claim of singularity.
    """
    if controllability_check(sys).overall and is_nonsingular(sys.A):
        return Verdict.NORMAL
    return Verdict.UNKNOWN
