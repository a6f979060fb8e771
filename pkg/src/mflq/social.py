"""Social-optimum pipeline for the LQ mean-field model.

The consistency system for the mean field ``xbar`` and the adjoint offset
``s`` is a forward linear ODE pair with one free initial condition ``s(0)``.
After discounting the unknowns by ``exp(-rho*t/2)`` the coefficient matrix
becomes the Hamiltonian ``H = [[As, -B inv(R) B'], [Q_Gamma, -As']]`` with
``As = A - B inv(R) B' Pi - (rho/2) I``; solving one auxiliary Riccati
equation block-triangularizes `H` and the unique initial value ``s0``
keeping ``(xbar, s)`` in the admissible growth class follows in closed form.

The induced decentralized strategy for every agent is the linear feedback
``u_i(t) = K_x x_i(t) - inv(R) B' s(t)`` with ``K_x = -inv(R) B' Pi``.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as _sla

from . import dichotomy, riccati
from .errors import ImaginaryAxisEigenvalue
from .linalg import default_axis_tol, eigenvalues
from .problem import gamma_weights, raise_on_failed_validation, validate

__all__ = [
    "SceSolution",
    "StrategySpec",
    "build_hamiltonian",
    "decentralized_strategy",
    "sce_residual",
    "solve_sce",
]


@dataclass(frozen=True)
class SceSolution:
    """Closed-form solution of the social consistency system.

    `A_C` is the stable matrix governing the discounted pair; the mean field
    itself evolves by ``A_cl = A_C + (rho/2) I`` (spectral abscissa below
    ``rho/2``).  Along the whole trajectory ``s(t) = X_plus @ xbar(t) +
    offset`` holds identically.
    """

    Pi: np.ndarray
    H: np.ndarray
    X_plus: np.ndarray
    A_C: np.ndarray
    offset: np.ndarray
    s0: np.ndarray
    A_cl: np.ndarray
    rho: float
    decomposition: dichotomy.DichotomyDecomposition
    bvp: dichotomy.BvpSolution
    pi_residual: float
    aux_residual: float
    solve_seconds: float

    @property
    def n(self):
        return self.Pi.shape[0]

    def trajectory(self, t_grid):
        """Sample ``(xbar(t), s(t))`` on a nonnegative grid.

        Returns two arrays of shape ``(len(t_grid), n)``.
        """
        t = np.atleast_1d(np.asarray(t_grid, dtype=float))
        z = dichotomy.evaluate_trajectory(self.bvp, self.decomposition, self.rho, t)
        growth = np.exp(0.5 * self.rho * t)[:, None]
        scaled = z * growth
        return scaled[:, : self.n], scaled[:, self.n:]


@dataclass(frozen=True)
class StrategySpec:
    """Decentralized strategy ``u_i(t, x) = K_x @ x + feedforward(t)`` where
    ``feedforward(t) = feedforward_gain @ s(t)``."""

    K_x: np.ndarray
    feedforward_gain: np.ndarray
    solution: SceSolution

    def feedforward(self, t_grid):
        """Feedforward input samples, shape ``(len(t_grid), n1)``."""
        _, s = self.solution.trajectory(t_grid)
        return s @ self.feedforward_gain.T


def build_hamiltonian(p, Pi, w):
    """Hamiltonian ``[[As, -B inv(R) B'], [Q_Gamma, -As']]`` of the
    discounted consistency system, ``As = A - B inv(R) B' Pi - (rho/2) I``."""
    m = p.control_gram()
    a_shift = p.A - m @ Pi - 0.5 * p.rho * np.eye(p.n)
    return np.block([[a_shift, -m], [w.Q_Gamma, -a_shift.T]])


def solve_sce(p, axis_tol=None):
    """Solve the social consistency system end to end.

    Pipeline: validate the standing assumptions, solve the discounted
    Riccati equation for `Pi`, assemble `H`, reject imaginary-axis
    eigenvalues of `H`, solve the auxiliary Riccati equation for `X_plus`,
    build the dichotomy transform and extract ``s0`` and the trajectory
    generators.

    Raises :class:`ImaginaryAxisEigenvalue` when the dichotomy does not
    exist (e.g. the scalar boundary case where the drift equals half the
    discount rate under full mean-field tracking); validation failures raise
    :class:`StabilizabilityFailure` or :class:`NonPositiveR`.
    """
    t_start = time.perf_counter()
    raise_on_failed_validation(validate(p, axis_tol=axis_tol))
    are = riccati.solve_discounted_are(p.A, p.B, p.Q, p.R, p.rho, axis_tol=axis_tol)
    pi = are.X
    w = gamma_weights(p.Q, p.Gamma, p.eta)
    h = build_hamiltonian(p, pi, w)
    n = p.n
    tol = default_axis_tol(h) if axis_tol is None else axis_tol
    lam = eigenvalues(h)
    on_axis = lam[np.abs(lam.real) <= tol]
    if on_axis.size:
        raise ImaginaryAxisEigenvalue(
            "consistency Hamiltonian has eigenvalue(s) on or near the "
            "imaginary axis: " + ", ".join(f"{z:.6g}" for z in on_axis),
            eigenvalues=on_axis,
        )
    a_shift = h[:n, :n]
    gram = -h[:n, n:]
    aux = riccati.solve_care_stabilizing(
        riccati.CareProblem(a_shift, gram, -w.Q_Gamma), axis_tol=axis_tol
    )
    x_plus = aux.X
    d = dichotomy.decompose_from_riccati(a_shift, gram, w.Q_Gamma, x_plus)
    psi0 = np.concatenate([np.zeros(n), w.eta_Gamma])
    bvp = dichotomy.solve_decaying(d, p.x0, psi0, p.rho)
    return SceSolution(
        Pi=pi,
        H=h,
        X_plus=x_plus,
        A_C=aux.closed_loop,
        offset=bvp.y2_offset,
        s0=bvp.z2_0,
        A_cl=aux.closed_loop + 0.5 * p.rho * np.eye(n),
        rho=p.rho,
        decomposition=d,
        bvp=bvp,
        pi_residual=are.residual,
        aux_residual=aux.residual,
        solve_seconds=time.perf_counter() - t_start,
    )


def decentralized_strategy(sol, p):
    """Strategy gains induced by a solved consistency system."""
    gain = -_sla.cho_solve(_sla.cho_factor(p.R), p.B.T)
    return StrategySpec(K_x=gain @ sol.Pi, feedforward_gain=gain, solution=sol)


def sce_residual(sol, p, t_grid):
    """Max central-difference residual of the consistency ODE pair.

    Samples ``(xbar, s)`` on the uniform grid, differentiates by central
    differences at interior points and compares with the right-hand sides.
    Returns the max-norm residual over both equations.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size < 3:
        raise ValueError("need at least three grid points")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform")
    xbar, s = sol.trajectory(t)
    m = p.control_gram()
    w = gamma_weights(p.Q, p.Gamma, p.eta)
    rhs_x = xbar @ (p.A - m @ sol.Pi).T - s @ m.T
    rhs_s = (xbar @ w.Q_Gamma.T
             + s @ (p.rho * np.eye(p.n) - p.A.T + sol.Pi @ m).T
             + w.eta_Gamma)
    fd_x = (xbar[2:] - xbar[:-2]) / (2.0 * dt[0])
    fd_s = (s[2:] - s[:-2]) / (2.0 * dt[0])
    res_x = np.abs(fd_x - rhs_x[1:-1]).max()
    res_s = np.abs(fd_s - rhs_s[1:-1]).max()
    return float(max(res_x, res_s))
