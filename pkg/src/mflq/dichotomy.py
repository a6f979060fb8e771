"""Decaying solutions of linear ODEs with an exponential dichotomy.

The systems handled here have the form ``dz/dt = K z + psi0 * exp(-rho*t/2)``
with ``z`` of dimension 2n and `K` admitting an invertible transform `U` such
that ``inv(U) K U`` is block upper triangular with a stable leading block
`F11` and an antistable trailing block `F22`.  Under that splitting there is
exactly one choice of the trailing half ``z2(0)`` of the initial state, for a
given leading half ``z1(0)``, that keeps the solution bounded (indeed
exponentially decaying) on ``[0, inf)``; every other choice blows up at the
antistable rate.

Two constructions of the transform are supported: the analytic one from a
stabilizing Riccati solution (unit-triangular `U`) and the generic one from
an ordered real Schur form (orthogonal `U`).  The improper integral behind
the bounded choice is evaluated in closed form as a linear solve; trajectory
samples come from an augmented matrix exponential, not ODE stepping.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DichotomySplitFailure, GraphSubspaceFailure, StabilityCheckFailure
from .linalg import as_square, mat_exp, real_schur_ordered, solve_linear, spectral_abscissa

__all__ = [
    "BvpSolution",
    "DichotomyDecomposition",
    "decompose_from_riccati",
    "decompose_from_schur",
    "evaluate_trajectory",
    "solve_decaying",
]

_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class DichotomyDecomposition:
    """Invertible `U` (with inverse `V`) block-triangularizing the source
    matrix `K`: ``V K U = [[F11, F12], [0, F22]]`` with `F11` stable and
    `-F22` stable.  The leading n-by-n block of `U` is invertible with
    condition estimate `U11_condition`."""

    U: np.ndarray
    V: np.ndarray
    F11: np.ndarray
    F12: np.ndarray
    F22: np.ndarray
    U11_condition: float
    K: np.ndarray

    @property
    def n(self):
        return self.F11.shape[0]


@dataclass(frozen=True)
class BvpSolution:
    """Initial data and generators of the unique decaying solution.

    In transformed coordinates ``y = V z`` the trailing half is exactly
    ``y2(t) = y2_offset * exp(-decay_rate * t)`` and the leading half is
    propagated by ``exp(y1_generator * t)`` acting on ``(y1_0, 1)``, where
    the trailing corner of `y1_generator` carries the forcing decay.
    """

    z1_0: np.ndarray
    z2_0: np.ndarray
    y1_0: np.ndarray
    y2_offset: np.ndarray
    y1_generator: np.ndarray
    decay_rate: float


def decompose_from_riccati(A_shift, M, Q_coupling, X_plus):
    """Dichotomy transform of ``[[A_shift, -M], [Q_coupling, -A_shift']]``
    built from a stabilizing Riccati solution.

    `X_plus` must solve ``X A_shift + A_shift' X - X M X - Q_coupling = 0``
    with ``A_shift - M X_plus`` stable.  Then ``U = [[I, 0], [X_plus, I]]``
    triangularizes the matrix exactly, with ``F11 = A_shift - M @ X_plus``,
    ``F12 = -M`` and ``F22 = -F11'``.

    Raises :class:`StabilityCheckFailure` if the closed loop is not stable,
    and ``ValueError`` if `X_plus` does not actually solve the equation.
    """
    A_shift = as_square(A_shift, "A_shift")
    M = as_square(M, "M")
    Q_coupling = as_square(Q_coupling, "Q_coupling")
    X_plus = as_square(X_plus, "X_plus")
    n = A_shift.shape[0]
    f11 = A_shift - M @ X_plus
    abscissa = spectral_abscissa(f11)
    if abscissa >= 0.0:
        raise StabilityCheckFailure(
            f"closed-loop matrix is not stable (abscissa {abscissa:.3e})"
        )
    k = np.block([[A_shift, -M], [Q_coupling, -A_shift.T]])
    ident = np.eye(n)
    zero = np.zeros((n, n))
    u = np.block([[ident, zero], [X_plus, ident]])
    v = np.block([[ident, zero], [-X_plus, ident]])
    d = DichotomyDecomposition(
        U=u, V=v, F11=f11, F12=-M, F22=-f11.T, U11_condition=1.0, K=k
    )
    resid = np.linalg.norm(
        v @ k @ u - np.block([[d.F11, d.F12], [zero, d.F22]]), "fro"
    )
    tol = 1e-7 * (1.0 + np.linalg.norm(k, "fro")
                  + np.linalg.norm(X_plus, "fro") ** 2)
    if resid > tol:
        raise ValueError(
            f"X_plus does not solve the coupled Riccati equation "
            f"(triangularization residual {resid:.3e})"
        )
    return d


def decompose_from_schur(K, axis_tol=None):
    """Dichotomy transform of a generic 2n-by-2n matrix from its ordered
    real Schur form (orthogonal `U`, so ``V = U'``).

    Raises
    ------
    ImaginaryAxisEigenvalue
        If the spectrum touches the imaginary axis.
    DichotomySplitFailure
        If the stable/antistable split is not n/n.
    GraphSubspaceFailure
        If the leading n-by-n block of `U` has condition estimate > 1e12.
    """
    K = as_square(K)
    m = K.shape[0]
    if m % 2:
        raise ValueError(f"matrix dimension must be even, got {m}")
    n = m // 2
    sf = real_schur_ordered(K, axis_tol=axis_tol)
    if sf.k_stable != n:
        raise DichotomySplitFailure(
            f"stable/antistable split is {sf.k_stable}/{m - sf.k_stable}, "
            f"need {n}/{n}"
        )
    u11 = sf.W[:n, :n]
    condition = np.linalg.cond(u11)
    if not np.isfinite(condition) or condition > _CONDITION_LIMIT:
        raise GraphSubspaceFailure(
            f"leading transform block has condition {condition:.3e}; "
            "the stable subspace is not a graph subspace"
        )
    return DichotomyDecomposition(
        U=sf.W,
        V=sf.W.T,
        F11=sf.T[:n, :n],
        F12=sf.T[:n, n:],
        F22=sf.T[n:, n:],
        U11_condition=float(condition),
        K=K,
    )


def solve_decaying(d, z1_0, psi0, rho):
    """Unique decaying solution of ``dz/dt = K z + psi0 exp(-rho*t/2)``.

    Given the leading initial half ``z1(0)``, computes the only trailing
    half ``z2(0)`` for which the solution stays bounded on ``[0, inf)``.
    The trailing transformed component must equal
    ``y2(t) = c * exp(-rho*t/2)`` with
    ``c = -inv(F22 + (rho/2) I) @ (V @ psi0)[n:]``,
    the closed form of ``-int_0^inf exp(-F22*s) (V psi)(s) ds`` (convergent
    because ``-F22`` is stable and ``rho > 0``); the leading transformed
    initial value then follows from ``U11 y1(0) = z1(0) - U12 c``.
    """
    if rho <= 0.0:
        raise ValueError(f"decay rate rho must be positive, got {rho}")
    n = d.n
    z1_0 = np.asarray(z1_0, dtype=float).reshape(n)
    psi0 = np.asarray(psi0, dtype=float).reshape(2 * n)
    v_psi = d.V @ psi0
    c = -solve_linear(d.F22 + 0.5 * rho * np.eye(n), v_psi[n:])
    y1_0 = solve_linear(d.U[:n, :n], z1_0 - d.U[:n, n:] @ c)
    z2_0 = d.U[n:, :n] @ y1_0 + d.U[n:, n:] @ c
    forcing = d.F12 @ c + v_psi[:n]
    generator = np.zeros((n + 1, n + 1))
    generator[:n, :n] = d.F11
    generator[:n, n] = forcing
    generator[n, n] = -0.5 * rho
    return BvpSolution(
        z1_0=z1_0,
        z2_0=z2_0,
        y1_0=y1_0,
        y2_offset=c,
        y1_generator=generator,
        decay_rate=0.5 * rho,
    )


def evaluate_trajectory(sol, d, rho, t_grid):
    """Sample the decaying solution ``z(t)`` on a nonnegative time grid.

    Each step advances the augmented state ``(y1, theta)`` by the cached
    matrix exponential of `y1_generator` times the step length, so there is
    no integration drift; ``y2`` is evaluated exactly.  Returns an array of
    shape ``(len(t_grid), 2n)`` whose rows are ``z(t)``.
    """
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t.ndim != 1:
        raise ValueError("t_grid must be one-dimensional")
    if t.size and (t[0] < 0.0 or np.any(np.diff(t) < 0.0)):
        raise ValueError("t_grid must be nonnegative and nondecreasing")
    n = d.n
    w = np.concatenate([sol.y1_0, [1.0]])
    y = np.empty((t.size, 2 * n))
    steps = {}
    prev = 0.0
    for i, ti in enumerate(t):
        dt = ti - prev
        if dt > 0.0:
            stepper = steps.get(dt)
            if stepper is None:
                stepper = mat_exp(sol.y1_generator * dt)
                steps[dt] = stepper
            w = stepper @ w
            prev = ti
        y[i, :n] = w[:n]
        y[i, n:] = sol.y2_offset * np.exp(-0.5 * rho * ti)
    z = y @ d.U.T
    # z(0) is (z1_0, z2_0) by construction; bypass the transform roundoff
    z[t == 0.0] = np.concatenate([sol.z1_0, sol.z2_0])
    return z
