"""Continuous-time algebraic Riccati equations via stable Schur vectors.

Solves ``X A_o + A_o' X - X M X + Q_o = 0`` for the stabilizing (maximal)
symmetric solution.  The state weight `Q_o` may be indefinite; what is
required is that the associated 2n-by-2n Hamiltonian matrix has no
eigenvalues on the imaginary axis and that ``(A_o, M)`` is stabilizable.
The solution is read off the orthonormal basis of the stable invariant
subspace: if its leading n rows form an invertible block ``W11``, then
``X = W21 @ inv(W11)``.

The discounted Riccati equation
``rho*Pi = Pi A + A' Pi - Pi B inv(R) B' Pi + Q`` reduces to the same
solver by shifting ``A -> A - (rho/2) I``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as _sla

from .errors import GraphSubspaceFailure, NonPositiveR, StabilizabilityFailure
from .linalg import as_square, eigenvalues, real_schur_ordered, spectral_abscissa

__all__ = [
    "CareProblem",
    "StabilizingRiccatiSolution",
    "care_hamiltonian",
    "care_residual",
    "solve_care_stabilizing",
    "solve_discounted_are",
    "stabilizability_margin",
]

_SYM_RTOL = 1e-10
_PBH_RTOL = 1e-8
_GRAPH_CONDITION_LIMIT = 1e12


def _check_symmetric(m, name, rtol=_SYM_RTOL):
    err = np.linalg.norm(m - m.T, "fro")
    if err > rtol * max(np.linalg.norm(m, "fro"), np.finfo(float).tiny):
        raise ValueError(f"{name} is not symmetric (asymmetry {err:.3e})")


@dataclass(frozen=True)
class CareProblem:
    """Data ``(A_o, M, Q_o)`` of the Riccati equation
    ``X A_o + A_o' X - X M X + Q_o = 0``.

    `M` must be symmetric positive semi-definite; `Q_o` symmetric but not
    necessarily sign-definite.
    """

    A_o: np.ndarray
    M: np.ndarray
    Q_o: np.ndarray

    def __post_init__(self):
        a = as_square(self.A_o, "A_o")
        m = as_square(self.M, "M")
        q = as_square(self.Q_o, "Q_o")
        if not (a.shape == m.shape == q.shape):
            raise ValueError("A_o, M, Q_o must share one square shape")
        _check_symmetric(m, "M")
        _check_symmetric(q, "Q_o")
        min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.T)).min())
        if min_eig < -1e-10 * max(np.linalg.norm(m, "fro"), 1.0):
            raise ValueError(f"M is not positive semi-definite (min eig {min_eig:.3e})")
        object.__setattr__(self, "A_o", a)
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "Q_o", q)

    @property
    def n(self):
        return self.A_o.shape[0]


@dataclass(frozen=True)
class StabilizingRiccatiSolution:
    """Symmetric solution with a certified stable closed loop.

    `residual` is the Frobenius norm of the equation evaluated at `X`;
    `spectrum_margin` is ``-max Re eig(closed_loop) > 0``.
    """

    X: np.ndarray
    closed_loop: np.ndarray
    residual: float
    spectrum_margin: float


def care_hamiltonian(p):
    """2n-by-2n Hamiltonian ``[[A_o, -M], [-Q_o, -A_o']]`` of the problem."""
    return np.block([[p.A_o, -p.M], [-p.Q_o, -p.A_o.T]])


def care_residual(x, p):
    """Frobenius norm of ``X A_o + A_o' X - X M X + Q_o`` at ``X = x``."""
    x = np.asarray(x, dtype=float)
    r = x @ p.A_o + p.A_o.T @ x - x @ p.M @ x + p.Q_o
    return float(np.linalg.norm(r, "fro"))


def stabilizability_margin(a, b):
    """Smallest scaled PBH singular value over the closed right half plane.

    For every eigenvalue ``lam`` of `a` with ``Re lam >= 0`` the test matrix
    ``[lam*I - a, b]`` must have full row rank; the margin returned is the
    minimum of its smallest singular values divided by ``1 + ||a|| + ||b||``.
    Returns ``inf`` when `a` is already stable.
    """
    a = as_square(a, "A")
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    n = a.shape[0]
    scale = 1.0 + float(np.linalg.norm(a, "fro")) + float(np.linalg.norm(b, "fro"))
    margin = np.inf
    ident = np.eye(n)
    for lam in eigenvalues(a):
        if lam.real < 0.0:
            continue
        test = np.hstack([lam * ident - a, b.astype(complex)])
        sigma = np.linalg.svd(test, compute_uv=False)[-1]
        margin = min(margin, float(sigma) / scale)
    return float(margin)


def solve_care_stabilizing(p, axis_tol=None):
    """Stabilizing solution of a :class:`CareProblem` by Schur vectors.

    Pipeline: build the Hamiltonian, reject imaginary-axis eigenvalues,
    order the real Schur form stable-first, and form ``X = W21 @ inv(W11)``
    from the leading n Schur vectors, symmetrized as ``(X + X') / 2``.

    Raises
    ------
    StabilizabilityFailure
        If the PBH test on ``(A_o, M)`` fails.
    ImaginaryAxisEigenvalue
        If the Hamiltonian spectrum touches the imaginary axis, i.e. the
        exponential dichotomy needed by the method does not exist.
    GraphSubspaceFailure
        If `W11` is numerically singular (condition estimate > 1e12): the
        stable subspace is not a graph subspace.
    """
    n = p.n
    margin = stabilizability_margin(p.A_o, p.M)
    if margin <= _PBH_RTOL:
        raise StabilizabilityFailure(
            f"(A_o, M) fails the PBH stabilizability test (margin {margin:.3e})"
        )
    h = care_hamiltonian(p)
    sf = real_schur_ordered(h, axis_tol=axis_tol)
    # A Hamiltonian matrix off the axis always splits n/n.
    if sf.k_stable != n:
        raise GraphSubspaceFailure(
            f"expected {n} stable eigenvalues, found {sf.k_stable}"
        )
    w11 = sf.W[:n, :n]
    w21 = sf.W[n:, :n]
    condition = np.linalg.cond(w11)
    if not np.isfinite(condition) or condition > _GRAPH_CONDITION_LIMIT:
        raise GraphSubspaceFailure(
            f"leading Schur-vector block has condition {condition:.3e}"
        )
    x = np.linalg.solve(w11.T, w21.T).T
    x = 0.5 * (x + x.T)
    closed_loop = p.A_o - p.M @ x
    residual = care_residual(x, p)
    margin_cl = -spectral_abscissa(closed_loop)
    norm_x = np.linalg.norm(x, "fro")
    if margin_cl <= 0.0 or residual > 1e-7 * (1.0 + norm_x**2):
        raise GraphSubspaceFailure(
            f"solution failed certification (residual {residual:.3e}, "
            f"closed-loop margin {margin_cl:.3e})"
        )
    return StabilizingRiccatiSolution(
        X=x, closed_loop=closed_loop, residual=residual, spectrum_margin=margin_cl
    )


def solve_discounted_are(A, B, Q, R, rho, axis_tol=None):
    """Stabilizing solution of the discounted Riccati equation.

    Solves ``rho*Pi = Pi A + A' Pi - Pi B inv(R) B' Pi + Q`` such that
    ``A - B inv(R) B' Pi - (rho/2) I`` is stable, by applying
    :func:`solve_care_stabilizing` to the shifted data
    ``(A - (rho/2) I, B inv(R) B', Q)``.

    `R` must be symmetric positive definite (:class:`NonPositiveR` otherwise);
    the inverse enters only through a Cholesky solve against ``B'``.
    """
    A = as_square(A, "A")
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    R = as_square(R, "R")
    _check_symmetric(R, "R")
    min_eig_r = float(np.linalg.eigvalsh(R).min())
    if min_eig_r <= 1e-10 * max(np.linalg.norm(R, "fro"), 1.0):
        raise NonPositiveR(f"R must be positive definite (min eig {min_eig_r:.3e})")
    m = B @ _sla.cho_solve(_sla.cho_factor(R), B.T)
    m = 0.5 * (m + m.T)
    shifted = A - 0.5 * rho * np.eye(A.shape[0])
    return solve_care_stabilizing(CareProblem(shifted, m, Q), axis_tol=axis_tol)
