"""Dense real linear algebra kernels shared by all solver modules.

Provides eigenvalues, the real Schur form with stable-eigenvalues-first
ordering, a scaling-and-squaring matrix exponential, pivoted linear solves,
and spectral classification helpers.  Everything operates on plain float64
``numpy`` arrays; all functions are pure and inputs are never mutated.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as _sla

from .errors import (
    ImaginaryAxisEigenvalue,
    SchurConvergenceFailure,
    SingularMatrix,
)

__all__ = [
    "OrderedSchurForm",
    "as_square",
    "default_axis_tol",
    "eigenvalues",
    "mat_exp",
    "real_schur_ordered",
    "solve_linear",
    "spectral_abscissa",
]


def as_square(a, name="matrix"):
    """Validate and return `a` as a finite square float64 array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} has non-finite entries")
    return a


def default_axis_tol(k):
    """Scale-invariant tolerance for 'eigenvalue on the imaginary axis'."""
    k = np.asarray(k, dtype=float)
    return 1e-9 * (1.0 + np.linalg.norm(k, "fro"))


def eigenvalues(a):
    """All eigenvalues of a real square matrix, with multiplicity.

    Complex eigenvalues come in conjugate pairs since the input is real.
    Raises ``ValueError`` for non-square input and propagates the LAPACK
    convergence error if the QR iteration fails.
    """
    return np.linalg.eigvals(as_square(a))


def spectral_abscissa(a):
    """max Re(lambda) over the eigenvalues of `a`."""
    return float(eigenvalues(a).real.max())


def solve_linear(a, b):
    """Solve ``a @ x = b`` by pivoted LU factorization.

    Raises :class:`SingularMatrix` when any pivot falls below
    ``1e-12 * ||a||_F``, rather than returning garbage.
    """
    a = as_square(a, "coefficient matrix")
    b = np.asarray(b, dtype=float)
    nrm = np.linalg.norm(a, "fro")
    with warnings.catch_warnings():
        # an exactly-zero pivot is reported below as SingularMatrix
        warnings.simplefilter("ignore", _sla.LinAlgWarning)
        lu, piv = _sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if nrm == 0.0 or pivots.min() < 1e-12 * nrm:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below threshold {1e-12 * nrm:.3e}"
        )
    return _sla.lu_solve((lu, piv), b, check_finite=False)


# ---------------------------------------------------------------------------
# Matrix exponential: scaling and squaring with diagonal Pade approximants.
# Degree and scaling power are chosen from the 1-norm of the input, following
# the classic theta thresholds for double precision.

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}

_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_approximant(a, m):
    """[m/m] diagonal Pade approximant of exp at `a`."""
    b = _PADE_COEFFS[m]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    if m == 3:
        u = a @ (b[3] * a2 + b[1] * ident)
        v = b[2] * a2 + b[0] * ident
    elif m == 5:
        a4 = a2 @ a2
        u = a @ (b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = b[4] * a4 + b[2] * a2 + b[0] * ident
    elif m == 7:
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    elif m == 9:
        a4 = a2 @ a2
        a6 = a4 @ a2
        a8 = a6 @ a2
        u = a @ (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    else:  # m == 13
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return np.linalg.solve(v - u, v + u)


def mat_exp(a):
    """Matrix exponential ``exp(a)`` of a real square matrix.

    Uses [m/m] diagonal Pade approximants with scaling and squaring; the
    degree m in {3, 5, 7, 9, 13} and the scaling power are picked from the
    1-norm of `a`.  Raises ``OverflowError`` if the result overflows to
    non-finite values (extreme norms).
    """
    a = as_square(a)
    if a.shape[0] == 0:
        return a.copy()
    nrm = np.linalg.norm(a, 1)
    result = None
    for m in (3, 5, 7, 9):
        if nrm <= _PADE_THETA[m]:
            result = _pade_approximant(a, m)
            break
    if result is None:
        s = max(0, int(np.ceil(np.log2(nrm / _PADE_THETA[13]))))
        result = _pade_approximant(a / 2.0**s, 13)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(s):
                result = result @ result
    if not np.isfinite(result).all():
        raise OverflowError("matrix exponential overflowed")
    return result


# ---------------------------------------------------------------------------
# Real Schur form with stable-first ordering.


@dataclass(frozen=True)
class OrderedSchurForm:
    """Orthogonal similarity ``K = W @ T @ W.T`` with stable eigenvalues
    collected in the leading diagonal blocks of the quasi-triangular `T`.

    `k_stable` is the number of eigenvalues with negative real part; they
    occupy the leading ``k_stable x k_stable`` block of `T`.
    """

    W: np.ndarray
    T: np.ndarray
    k_stable: int


def _diagonal_blocks(t):
    """Block structure (start, size) of a quasi-triangular matrix."""
    m = t.shape[0]
    blocks = []
    i = 0
    while i < m:
        if i + 1 < m and t[i + 1, i] != 0.0:
            blocks.append((i, 2))
            i += 2
        else:
            blocks.append((i, 1))
            i += 1
    return blocks


def _block_is_stable(t, start, size):
    # 2x2 blocks hold a conjugate pair; the common real part is the
    # mean of the two diagonal entries.
    if size == 1:
        return t[start, start] < 0.0
    return 0.5 * (t[start, start] + t[start + 1, start + 1]) < 0.0


def _swap_adjacent_blocks(t, w, i, p, q, swap_tol):
    """Swap the p-block at row `i` with the q-block just below it.

    Solves a small Sylvester equation for the invariant subspace of the
    trailing block, orthogonalizes it, and applies the resulting rotation to
    `t` and `w` in place.  Raises :class:`SchurConvergenceFailure` when the
    Sylvester system is too ill-conditioned for the swap to hold numerically.
    """
    j = i + p
    hi = i + p + q
    a11 = t[i:j, i:j]
    a22 = t[j:hi, j:hi]
    a12 = t[i:j, j:hi]
    try:
        x = _sla.solve_sylvester(a11, -a22, a12)
    except np.linalg.LinAlgError as exc:  # eigenvalue collision
        raise SchurConvergenceFailure(f"block swap at row {i} failed") from exc
    basis = np.vstack([-x, np.eye(q)])
    rot, _ = np.linalg.qr(basis, mode="complete")
    t[i:hi, :] = rot.T @ t[i:hi, :]
    t[:, i:hi] = t[:, i:hi] @ rot
    w[:, i:hi] = w[:, i:hi] @ rot
    residual = np.linalg.norm(t[i + q:hi, i:i + q])
    if residual > swap_tol:
        raise SchurConvergenceFailure(
            f"block swap at row {i} left residual {residual:.3e}"
        )
    t[i + q:hi, i:i + q] = 0.0


def real_schur_ordered(k, axis_tol=None):
    """Real Schur form of `k` with all stable eigenvalues moved first.

    After an unordered Schur reduction, adjacent 1x1/2x2 diagonal blocks are
    swapped by orthogonal rotations until every eigenvalue with negative real
    part sits in the leading block.

    Parameters
    ----------
    k : array, shape (m, m)
        Real square matrix with no eigenvalue within `axis_tol` of the
        imaginary axis.
    axis_tol : float, optional
        Tolerance for the axis test; defaults to ``1e-9 * (1 + ||k||_F)``.
        Eigenvalues within the tolerance are rejected even if genuinely
        off-axis: the splitting would not be numerically trustworthy.

    Returns
    -------
    OrderedSchurForm

    Raises
    ------
    ImaginaryAxisEigenvalue
        If some eigenvalue has ``|Re| <= axis_tol``.
    SchurConvergenceFailure
        If the QR iteration or a block swap fails, or the final factors do
        not reproduce `k` to working accuracy.
    """
    k = as_square(k)
    m = k.shape[0]
    if axis_tol is None:
        axis_tol = default_axis_tol(k)
    lam = eigenvalues(k)
    on_axis = lam[np.abs(lam.real) <= axis_tol]
    if on_axis.size:
        raise ImaginaryAxisEigenvalue(
            "eigenvalue(s) on or near the imaginary axis: "
            + ", ".join(f"{z:.6g}" for z in on_axis),
            eigenvalues=on_axis,
        )

    try:
        t, w = _sla.schur(k, output="real")
    except _sla.LinAlgError as exc:
        raise SchurConvergenceFailure("Schur reduction did not converge") from exc
    t = t.copy()
    w = w.copy()

    blocks = [(start, size, _block_is_stable(t, start, size))
              for start, size in _diagonal_blocks(t)]
    swap_tol = 1e-8 * (1.0 + np.linalg.norm(k, "fro"))

    # Bubble each stable block up past the unstable ones above it.
    filled = 0  # blocks[:filled] are stable
    for idx in range(len(blocks)):
        if not blocks[idx][2]:
            continue
        for pos in range(idx, filled, -1):
            up_start, up_size, up_flag = blocks[pos - 1]
            _, lo_size, lo_flag = blocks[pos]
            _swap_adjacent_blocks(t, w, up_start, up_size, lo_size, swap_tol)
            blocks[pos - 1] = (up_start, lo_size, lo_flag)
            blocks[pos] = (up_start + lo_size, up_size, up_flag)
        filled += 1

    k_stable = sum(size for _, size, stable in blocks if stable)

    ortho_err = np.linalg.norm(w.T @ w - np.eye(m), "fro")
    recon_err = np.linalg.norm(w.T @ k @ w - t, "fro")
    if ortho_err > 1e-10 * m or recon_err > 1e-8 * max(np.linalg.norm(k, "fro"), 1.0):
        raise SchurConvergenceFailure(
            f"ordered Schur factors inaccurate (orthogonality {ortho_err:.3e}, "
            f"reconstruction {recon_err:.3e})"
        )
    return OrderedSchurForm(W=w, T=t, k_stable=k_stable)
