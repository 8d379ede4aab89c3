"""Sparse linear algebra kernel: operator wrapper, conjugate gradients and the
smallest eigenpair of -Δ + I by inverse power iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, EigensolverError, SolverError


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Discrete -Δ + I on a grid.

    ``sym`` is the symmetric positive definite form acting on the unknowns
    (all nodes for Neumann, interior nodes for Dirichlet) and ``weights`` the
    quadrature weights with ``sym = diag(weights) @ A`` on those unknowns.
    ``axis_ops`` are the 1D second-difference matrices of each axis; applying
    them direction by direction and adding ``u`` (rather than multiplying by
    the assembled matrix) maps constants to themselves to the last bit.
    Rows outside ``row_mask`` of the -Δ part are zero (Dirichlet boundary).
    """

    grid: object
    kind: str
    sym: sp.csr_matrix
    weights: np.ndarray
    unknowns: np.ndarray
    full: sp.csr_matrix | None = None
    axis_ops: tuple | None = None
    row_mask: np.ndarray | None = None
    _matrix: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        if self.full is not None:
            mat = self.full
        else:
            mat = sp.diags(1.0 / self.weights, format="csr") @ self.sym
            mat.sort_indices()
        object.__setattr__(self, "_matrix", sp.csr_matrix(mat))

    @property
    def matrix(self) -> sp.csr_matrix:
        """The full-grid operator A (nonsymmetric on Neumann boundary rows)."""
        return self._matrix

    @property
    def size(self) -> int:
        return self._matrix.shape[0]

    def apply(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.axis_ops is None:
            return self._matrix @ u
        shape = tuple(op.shape[0] for op in self.axis_ops)
        U = u.reshape(shape)
        lap = np.zeros(shape)
        for axis, op in enumerate(self.axis_ops):
            moved = np.moveaxis(U, axis, 0).reshape(shape[axis], -1)
            lap += np.moveaxis((op @ moved).reshape((shape[axis],) + tuple(np.delete(shape, axis))), 0, axis)
        lap = lap.ravel()
        if self.row_mask is not None:
            lap[~self.row_mask] = 0.0
        return lap + u

    def restrict(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float)[self.unknowns]

    def extend(self, x) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.unknowns] = x
        return out


@dataclass(frozen=True)
class Eigenpair:
    lambda1: float
    phi1: np.ndarray
    residual: float
    iterations: int

    def to_dict(self, phi1_csv_path=None) -> dict:
        return {
            "lambda1": float(self.lambda1),
            "phi1_csv_path": phi1_csv_path,
            "residual": float(self.residual),
        }


def cg_solve(A: SparseOperator, b, tol=1e-10, max_iter=None, x0=None, precondition=False):
    """Solve ``A x = b`` by conjugate gradients on the symmetric form.

    Converges when ``||A x - b||_2 <= tol * ||b||_2`` measured on the unknowns.
    Dirichlet boundary entries of the result are zero.  Raises SolverError
    carrying the final residual when ``max_iter`` iterations do not suffice.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=float)
    rhs_a = A.restrict(b)
    bnorm = float(np.sqrt(np.dot(rhs_a, rhs_a)))
    n = rhs_a.size
    if max_iter is None:
        max_iter = 10 * n + 100
    if bnorm == 0.0:
        return np.zeros(A.size)

    S = A.sym
    w = A.weights
    rhs = w * rhs_a
    x = np.zeros(n) if x0 is None else A.restrict(x0).copy()
    dinv = 1.0 / S.diagonal() if precondition else None
    target = tol * bnorm

    it = 0
    while True:
        # restart from the true residual to shed recurrence drift
        r = rhs - S @ x
        rnorm = float(np.sqrt(np.dot(r / w, r / w)))
        if rnorm <= target:
            return A.extend(x)
        if it >= max_iter:
            raise SolverError(
                f"conjugate gradients did not converge in {max_iter} iterations "
                f"(residual {rnorm:.3e}, target {target:.3e})",
                residual=rnorm,
                iterations=it,
            )
        z = dinv * r if precondition else r
        p = z.copy()
        rz = float(np.dot(r, z))
        inner = 0
        while it < max_iter and inner < n + 10:
            Sp = S @ p
            pSp = float(np.dot(p, Sp))
            if pSp <= 0.0:
                break
            alpha = rz / pSp
            x = x + alpha * p
            r = r - alpha * Sp
            it += 1
            inner += 1
            ra = r / w
            if float(np.sqrt(np.dot(ra, ra))) <= 0.5 * target:
                break
            z = dinv * r if precondition else r
            rz_new = float(np.dot(r, z))
            p = z + (rz_new / rz) * p
            rz = rz_new


def rayleigh_quotient(A: SparseOperator, w) -> float:
    """Weighted Rayleigh quotient <A w, w> / <w, w> over the operator's unknowns."""
    x = A.restrict(w)
    den = float(np.dot(x, A.weights * x))
    if den == 0.0:
        raise DomainError("Rayleigh quotient of the zero field")
    return float(np.dot(x, A.sym @ x)) / den


def smallest_eigenpair(A: SparseOperator, eig_tol=1e-10, max_iter=200, cg_tol=1e-10):
    """Smallest eigenpair by inverse power iteration from the all-ones vector.

    The eigenvector is normalised to max-norm 1 and made positive; the
    eigenvalue is the Rayleigh quotient of the converged vector.
    """
    x = A.extend(np.ones(A.unknowns.size))
    lam = rayleigh_quotient(A, x)
    for it in range(max_iter + 1):
        res = float(np.max(np.abs(A.restrict(A.apply(x) - lam * x))))
        if res <= eig_tol:
            phi = x / np.max(np.abs(x))
            if phi[A.unknowns].sum() < 0:
                phi = -phi
            if np.any(phi[A.unknowns] <= 0):
                raise EigensolverError("eigenvector is not positive", rayleigh=lam, iterations=it)
            return Eigenpair(lambda1=lam, phi1=phi, residual=res, iterations=it)
        if it == max_iter:
            break
        # warm start with the eigenvalue estimate: x / lam solves A y = x when x is an eigenvector
        y = cg_solve(A, x, tol=cg_tol, x0=x / lam)
        x = y / np.max(np.abs(y))
        lam = rayleigh_quotient(A, x)
    raise EigensolverError(
        f"inverse power iteration did not converge in {max_iter} iterations "
        f"(last Rayleigh quotient {lam:.12g})",
        rayleigh=lam,
        iterations=max_iter,
    )
