"""Problem data for the LQ mean-field model and its standing-assumption checks.

An instance collects the agent dynamics ``dx_i = (A x_i + B u_i) dt + D dW_i``
and the discounted quadratic cost with mean-field coupling
``Gamma * mean(x) + eta``, state weight `Q` (symmetric, possibly indefinite),
control weight ``R > 0`` and discount rate ``rho > 0``.  ``x0`` is the
initial mean field.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import riccati
from .errors import ImaginaryAxisEigenvalue, NonPositiveR, StabilizabilityFailure
from .linalg import as_square, default_axis_tol, eigenvalues

__all__ = [
    "GammaWeights",
    "ProblemData",
    "ValidationReport",
    "gamma_weights",
    "raise_on_failed_validation",
    "validate",
]

_SYM_RTOL = 1e-10


def _sym_error(m):
    return np.linalg.norm(m - m.T, "fro") / max(np.linalg.norm(m, "fro"), 1e-300)


@dataclass(frozen=True)
class ProblemData:
    """One LQ mean-field problem instance; `D` is only needed for simulation."""

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    Gamma: np.ndarray
    eta: np.ndarray
    rho: float
    x0: np.ndarray
    D: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        a = as_square(self.A, "A")
        n = a.shape[0]
        b = np.asarray(self.B, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got shape {b.shape}")
        q = as_square(self.Q, "Q")
        r = as_square(self.R, "R")
        gam = as_square(self.Gamma, "Gamma")
        eta = np.asarray(self.eta, dtype=float).reshape(-1)
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if q.shape[0] != n or gam.shape[0] != n:
            raise ValueError("Q and Gamma must match the state dimension")
        if r.shape[0] != b.shape[1]:
            raise ValueError(
                f"R must be {b.shape[1]}x{b.shape[1]} for {b.shape[1]} controls"
            )
        if eta.size != n or x0.size != n:
            raise ValueError("eta and x0 must have the state dimension")
        if _sym_error(q) > _SYM_RTOL:
            raise ValueError("Q must be symmetric")
        if _sym_error(r) > _SYM_RTOL:
            raise ValueError("R must be symmetric")
        if not (np.isfinite(self.rho) and self.rho > 0.0):
            raise ValueError(f"discount rate rho must be positive, got {self.rho}")
        d = self.D
        if d is not None:
            d = np.asarray(d, dtype=float)
            if d.ndim == 1:
                d = d[:, None]
            if d.shape[0] != n or not np.isfinite(d).all():
                raise ValueError(f"D must have {n} finite rows, got shape {d.shape}")
        for name, val in (("A", a), ("B", b), ("Q", q), ("R", r),
                          ("Gamma", gam), ("eta", eta), ("x0", x0), ("D", d)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def n1(self):
        return self.B.shape[1]

    @property
    def n2(self):
        return None if self.D is None else self.D.shape[1]

    def control_gram(self):
        """``B @ inv(R) @ B'`` via a Cholesky solve, symmetrized."""
        import scipy.linalg as sla

        m = self.B @ sla.cho_solve(sla.cho_factor(self.R), self.B.T)
        return 0.5 * (m + m.T)


@dataclass(frozen=True)
class GammaWeights:
    """Coupling-adjusted weights entering the mean-field equations:
    ``Q_Gamma = Gamma' Q + Q Gamma - Gamma' Q Gamma`` and
    ``eta_Gamma = (I - Gamma') Q eta``."""

    Q_Gamma: np.ndarray
    eta_Gamma: np.ndarray


def gamma_weights(Q, Gamma, eta):
    """Compute :class:`GammaWeights` from the cost data."""
    Q = as_square(Q, "Q")
    Gamma = as_square(Gamma, "Gamma")
    eta = np.asarray(eta, dtype=float).reshape(-1)
    q_gamma = Gamma.T @ Q + Q @ Gamma - Gamma.T @ Q @ Gamma
    q_gamma = 0.5 * (q_gamma + q_gamma.T)
    eta_gamma = (np.eye(Q.shape[0]) - Gamma.T) @ (Q @ eta)
    return GammaWeights(Q_Gamma=q_gamma, eta_Gamma=eta_gamma)


@dataclass(frozen=True)
class ValidationReport:
    """Verdicts for the standing assumptions of the solvers.

    `stabilizability_margin` is the scaled PBH margin (``inf`` when `A` is
    stable); `axis_margin` is the distance of the discount-shifted
    Hamiltonian spectrum from the imaginary axis, or ``None`` when it could
    not be formed because `R` failed.  Borderline margins are reported, not
    rejected; hard failures flip the corresponding flag.
    """

    stabilizable: bool
    stabilizability_margin: float
    r_positive_definite: bool
    r_min_eigenvalue: float
    axis_ok: Optional[bool]
    axis_margin: Optional[float]
    axis_tol: float

    @property
    def ok(self):
        return bool(self.stabilizable and self.r_positive_definite and self.axis_ok)

    def failures(self):
        """Names of the failed checks, in check order."""
        out = []
        if not self.stabilizable:
            out.append("stabilizability")
        if not self.r_positive_definite:
            out.append("R_positive_definite")
        if not self.axis_ok:
            out.append("shifted_hamiltonian_axis")
        return out


def validate(p, axis_tol=None):
    """Check stabilizability of ``(A, B)``, positive definiteness of `R`,
    and that the discount-shifted Hamiltonian built from `Q` has no
    eigenvalues near the imaginary axis.  Never raises; the report carries
    the verdicts and margins.
    """
    margin = riccati.stabilizability_margin(p.A, p.B)
    stabilizable = bool(margin > 1e-8)
    r_min = float(np.linalg.eigvalsh(p.R).min())
    r_ok = bool(r_min > 1e-10 * max(float(np.linalg.norm(p.R, "fro")), 1.0))
    axis_ok = None
    axis_margin = None
    tol = 0.0
    if r_ok:
        shifted = p.A - 0.5 * p.rho * np.eye(p.n)
        h = riccati.care_hamiltonian(
            riccati.CareProblem(shifted, p.control_gram(), p.Q)
        )
        tol = default_axis_tol(h) if axis_tol is None else axis_tol
        axis_margin = float(np.abs(eigenvalues(h).real).min())
        axis_ok = bool(axis_margin > tol)
    return ValidationReport(
        stabilizable=stabilizable,
        stabilizability_margin=margin,
        r_positive_definite=r_ok,
        r_min_eigenvalue=r_min,
        axis_ok=axis_ok,
        axis_margin=axis_margin,
        axis_tol=tol,
    )


def raise_on_failed_validation(report):
    """Translate a failed :class:`ValidationReport` into the matching error."""
    if not report.stabilizable:
        raise StabilizabilityFailure(
            f"(A, B) fails the PBH test (margin {report.stabilizability_margin:.3e})"
        )
    if not report.r_positive_definite:
        raise NonPositiveR(
            f"R must be positive definite (min eig {report.r_min_eigenvalue:.3e})"
        )
    if not report.axis_ok:
        raise ImaginaryAxisEigenvalue(
            "discount-shifted Hamiltonian has eigenvalue(s) near the "
            f"imaginary axis (margin {report.axis_margin:.3e})"
        )
