"""Nonlinear solvers for the steady Gierer-Meinhardt system

    A u = u^a1 / v^b1,    A v = u^a2 / v^b2,    A = -Δ + I (zero flux),

built around the truncated fixed-point map on an ordered box, with Newton
refinement, deflated Newton for additional roots, continuation along the
two homotopy families, and multistart probes of the auxiliary problems.

Failed solves are returned as reports with ``converged=False``; only invalid
input raises.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .barriers import BoxSpec, ExponentConfig
from .errors import ConfigurationError, DomainError
from .mesh import Grid, dirichlet_operator, neumann_operator
from .sparse_solve import SparseOperator, cg_solve

FLOOR_SCALE = 1e-300
ACCEPT_TOL = 1e-8


@dataclass
class SolutionPair:
    u: np.ndarray
    v: np.ndarray
    residual_u: float
    residual_v: float
    box_label: str = "none"
    boundary_class: str = "indeterminate"
    provenance: str = ""

    @property
    def residual(self) -> float:
        return max(self.residual_u, self.residual_v)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])


@dataclass
class SolveReport:
    u: np.ndarray
    v: np.ndarray
    iterations: int
    residual_u: float
    residual_v: float
    converged: bool
    box_label: str = "none"
    boundary_class: str = "indeterminate"
    wall_time_ms: float = 0.0
    history: list = field(default_factory=list)
    in_box: bool | None = None
    truncation_inactive: bool | None = None
    message: str = ""

    @property
    def residual(self) -> float:
        return max(self.residual_u, self.residual_v)

    def to_pair(self, provenance="") -> SolutionPair:
        return SolutionPair(self.u, self.v, self.residual_u, self.residual_v,
                            self.box_label, self.boundary_class, provenance)

    def to_dict(self) -> dict:
        return {
            "iterations": int(self.iterations),
            "residual_u": float(self.residual_u),
            "residual_v": float(self.residual_v),
            "converged": bool(self.converged),
            "box_label": self.box_label,
            "boundary_class": self.boundary_class,
            "wall_time_ms": float(self.wall_time_ms),
            "in_box": self.in_box,
            "truncation_inactive": self.truncation_inactive,
            "message": self.message,
        }


def _operator(grid_or_op, bc="neumann") -> SparseOperator:
    if isinstance(grid_or_op, SparseOperator):
        return grid_or_op
    if bc == "neumann":
        return neumann_operator(grid_or_op)
    if bc == "dirichlet":
        return dirichlet_operator(grid_or_op)
    raise ConfigurationError(f"unknown boundary condition {bc!r}")


def _rows(A: SparseOperator) -> np.ndarray:
    mask = np.zeros(A.size, dtype=bool)
    mask[A.unknowns] = True
    return mask


# --- pointwise pieces -----------------------------------------------------

def truncate(values, lower, upper) -> np.ndarray:
    """Clamp nodewise into [lower, upper]."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    bad = np.flatnonzero(lower > upper)
    if bad.size:
        raise DomainError(f"truncation bounds are not ordered at node {int(bad[0])}")
    return np.minimum(np.maximum(values, lower), upper)


def _floored(v):
    return np.maximum(v, FLOOR_SCALE * max(1.0, float(np.max(np.abs(v))) if v.size else 1.0))


def gm_rhs(u, v, exponents: ExponentConfig, mask=None):
    """Return ``(u^a1 / v^b1, u^a2 / v^b2)`` nodewise.

    ``v`` is floored at a tiny multiple of its magnitude so that exact zeros
    on boundary nodes give the finite one-sided limit.  Nodes outside
    ``mask`` are set to zero.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if mask is None:
        mask = np.ones(u.shape, dtype=bool)
    out = []
    uf, vf = u[mask], _floored(v[mask])
    for a, b in exponents.pairs():
        f = np.zeros(u.shape)
        with np.errstate(all="ignore"):
            f[mask] = np.power(uf, a) / np.power(vf, b)
        bad = np.flatnonzero(~np.isfinite(f))
        if bad.size:
            k = int(bad[0])
            raise DomainError(f"nonlinearity not finite at node {k} (u={u[k]!r}, v={v[k]!r})")
        out.append(f)
    return out[0], out[1]


def _rhs_derivatives(u, v, exponents: ExponentConfig, mask):
    """Partial derivatives of both nonlinearities on ``mask`` (zero elsewhere)."""
    uf, vf = u[mask], _floored(v[mask])
    out = []
    for a, b in exponents.pairs():
        du = np.zeros(u.shape)
        dv = np.zeros(u.shape)
        with np.errstate(all="ignore"):
            du[mask] = a * np.power(uf, a - 1.0) / np.power(vf, b)
            dv[mask] = -b * np.power(uf, a) / np.power(vf, b + 1.0)
        out.append((du, dv))
    return out


def residual_vector(u, v, exponents: ExponentConfig, A: SparseOperator) -> np.ndarray:
    rows = _rows(A)
    f1, f2 = gm_rhs(u, v, exponents, mask=rows)
    return np.concatenate([A.apply(u) - f1, A.apply(v) - f2])


def residual(u, v, exponents: ExponentConfig, A: SparseOperator):
    """Max-norms of ``A u - f1`` and ``A v - f2``."""
    r = residual_vector(u, v, exponents, A)
    n = A.size
    return float(np.max(np.abs(r[:n]))), float(np.max(np.abs(r[n:])))


def jacobian(u, v, exponents: ExponentConfig, A: SparseOperator) -> sp.csr_matrix:
    """Analytic 2N x 2N Jacobian of :func:`residual_vector`."""
    rows = _rows(A)
    (d1u, d1v), (d2u, d2v) = _rhs_derivatives(np.asarray(u, float), np.asarray(v, float), exponents, rows)
    M = A.matrix
    return sp.bmat([
        [M - sp.diags(d1u), sp.diags(-d1v)],
        [sp.diags(-d2u), M - sp.diags(d2v)],
    ], format="csc")


# --- Newton machinery -----------------------------------------------------

@dataclass
class NewtonResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    history: list
    message: str = ""


def _linear_solve(J, rhs):
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            d = spla.spsolve(sp.csc_matrix(J), rhs)
        except (spla.MatrixRankWarning, RuntimeError):
            return None
    d = np.atleast_1d(d)
    return d if np.all(np.isfinite(d)) else None


def damped_newton(F, J, x0, tol=1e-10, max_iter=50, feasible=None, min_step=1e-10) -> NewtonResult:
    """Newton's method with Armijo backtracking on the Euclidean residual norm.

    Converges when the max-norm of ``F`` drops to ``tol``.  ``feasible``
    rejects trial points (e.g. non-positive fields) before ``F`` is evaluated.
    """
    x = np.array(x0, dtype=float)
    r = F(x)
    history = [float(np.max(np.abs(r)))]
    for it in range(max_iter + 1):
        rmax = history[-1]
        if rmax <= tol:
            return NewtonResult(x, True, it, rmax, history, "converged")
        if it == max_iter:
            break
        d = _linear_solve(J(x), -r)
        if d is None:
            return NewtonResult(x, False, it, rmax, history, "singular Jacobian")
        r2 = float(np.dot(r, r))
        t = 1.0
        while t >= min_step:
            xn = x + t * d
            if feasible is None or feasible(xn):
                rn = F(xn)
                if np.all(np.isfinite(rn)) and float(np.dot(rn, rn)) <= (1.0 - 1e-4 * t) ** 2 * r2:
                    break
            t *= 0.5
        else:
            return NewtonResult(x, False, it, rmax, history, "line search failure")
        x, r = xn, rn
        history.append(float(np.max(np.abs(r))))
    return NewtonResult(x, False, max_iter, history[-1], history, "iteration budget exhausted")


def log_deflation_factor(x, roots, shift=1.0, power=2):
    """``log M(x)`` and its gradient for ``M(x) = prod_i (1/||x - r_i||^p + shift)``."""
    x = np.asarray(x, dtype=float)
    logm = 0.0
    grad = np.zeros_like(x)
    for r in roots:
        e = x - r
        s = float(np.dot(e, e))
        if s == 0.0:
            return np.inf, grad
        m = s ** (-power / 2.0) + shift
        logm += np.log(m)
        grad += (-power * s ** (-power / 2.0 - 1.0) * e) / m
    return logm, grad


def deflated_residual_norm(F, x, roots, shift=1.0, power=2) -> float:
    """Euclidean norm of the deflated residual ``M(x) F(x)``."""
    logm, _ = log_deflation_factor(x, [np.asarray(r, dtype=float) for r in roots], shift, power)
    return float(np.exp(logm) * np.linalg.norm(F(np.asarray(x, dtype=float))))


def newton_deflated(F, J, x0, roots, tol=1e-10, max_iter=100, shift=1.0, power=2,
                    feasible=None, min_step=1e-10, divergence=1e8, min_distance=1e-6) -> NewtonResult:
    """Newton's method on the deflated residual ``G(x) = prod_i (1/||x - r_i||^p + shift) F(x)``.

    The deflated step is the undeflated Newton step rescaled by
    ``1 / (1 - grad(log M) . step)``.  Convergence means ``||F||_inf <= tol``
    at a point farther than ``min_distance`` from every deflated root.
    """
    roots = [np.asarray(r, dtype=float) for r in roots]
    x = np.array(x0, dtype=float)

    def log_m_and_grad(x):
        return log_deflation_factor(x, roots, shift, power)

    def g_norm(x, r):
        logm, _ = log_m_and_grad(x)
        return np.exp(logm) * float(np.linalg.norm(r))

    r = F(x)
    history = [float(np.max(np.abs(r)))]
    for it in range(max_iter + 1):
        rmax = history[-1]
        if rmax <= tol:
            near = min((float(np.max(np.abs(x - q))) for q in roots), default=np.inf)
            if near <= min_distance:
                return NewtonResult(x, False, it, rmax, history, "returned to a deflated root")
            return NewtonResult(x, True, it, rmax, history, "converged")
        if it == max_iter:
            break
        step = _linear_solve(J(x), -r)
        if step is None:
            return NewtonResult(x, False, it, rmax, history, "singular Jacobian")
        _, grad = log_m_and_grad(x)
        denom = 1.0 - float(np.dot(grad, step))
        if abs(denom) < 1e-14:
            return NewtonResult(x, False, it, rmax, history, "singular deflated Jacobian")
        d = step / denom
        # largest feasible step first; Armijo on |G| below it, else take the feasible step
        t = 1.0
        while t >= min_step and not (feasible is None or feasible(x + t * d)):
            t *= 0.5
        if t < min_step:
            return NewtonResult(x, False, it, rmax, history, "line search failure")
        t_feas, g0 = t, g_norm(x, r)
        xn = None
        while t >= min_step:
            trial = x + t * d
            rt = F(trial)
            if np.all(np.isfinite(rt)) and g_norm(trial, rt) <= (1.0 - 1e-4 * t) * g0:
                xn, rn = trial, rt
                break
            t *= 0.5
        if xn is None:
            xn = x + t_feas * d
            rn = F(xn)
            if not np.all(np.isfinite(rn)):
                return NewtonResult(x, False, it, rmax, history, "line search failure")
        x, r = xn, rn
        history.append(float(np.max(np.abs(r))))
        if float(np.max(np.abs(x))) > divergence:
            return NewtonResult(x, False, it + 1, history[-1], history, "diverged")
    return NewtonResult(x, False, max_iter, history[-1], history, "iteration budget exhausted")


def cubic_deflation_self_test(n_starts=50, seed=0, tol=1e-12, span=3.0):
    """Recover the roots of x^3 - x one at a time by deflation, then probe for more.

    Returns ``(roots, extra)`` where ``roots`` lists the three roots in the
    order found and ``extra`` counts converged runs once all are deflated.
    """
    def F(x):
        return x ** 3 - x

    def J(x):
        return sp.csc_matrix(np.atleast_2d(3.0 * x[0] ** 2 - 1.0))

    roots = []
    first = damped_newton(F, J, np.array([0.2]), tol=tol)
    if first.converged:
        roots.append(first.x.copy())
    for start in (0.5, -0.5):
        res = newton_deflated(F, J, np.array([start]), roots, tol=tol)
        if res.converged and _distinct(roots, res.x):
            roots.append(res.x.copy())
    rng = np.random.default_rng(seed)
    extra = 0
    for _ in range(n_starts):
        res = newton_deflated(F, J, rng.uniform(-span, span, 1), roots, tol=tol)
        extra += int(res.converged)
    return [float(r[0]) for r in roots], extra


def _positive_on(rows, n):
    def feasible(x):
        return bool(np.all(x[:n][rows] > 0) and np.all(x[n:][rows] > 0))
    return feasible


def newton_refine(u, v, exponents: ExponentConfig, A=None, tol=1e-10, max_iter=30, grid=None) -> SolveReport:
    """Damped Newton on the coupled system from a positive start."""
    t0 = time.perf_counter()
    A = _operator(A if A is not None else grid)
    n = A.size
    rows = _rows(A)
    x0 = np.concatenate([u, v]).astype(float)
    if not _positive_on(rows, n)(x0):
        raise DomainError("Newton start must be positive on the unknowns")

    res = damped_newton(
        lambda x: residual_vector(x[:n], x[n:], exponents, A),
        lambda x: jacobian(x[:n], x[n:], exponents, A),
        x0, tol=tol, max_iter=max_iter, feasible=_positive_on(rows, n),
    )
    uu, vv = res.x[:n].copy(), res.x[n:].copy()
    if A.kind == "dirichlet":
        # the boundary rows read u = 0; remove the roundoff left by the linear solves
        uu[~rows] = 0.0
        vv[~rows] = 0.0
    ru, rv = residual(uu, vv, exponents, A)
    return SolveReport(uu, vv, res.iterations, ru, rv, res.converged,
                       wall_time_ms=1e3 * (time.perf_counter() - t0),
                       history=res.history, message=res.message)


# --- truncated fixed point on a box ---------------------------------------

def picard_solve_in_box(box: BoxSpec, exponents: ExponentConfig, start=None, tol=1e-9, max_iter=500,
                        A=None, bc="neumann", refine=True, newton_tol=1e-10,
                        accept_tol=ACCEPT_TOL, cg_tol=1e-10, box_tol=None) -> SolveReport:
    """Truncated fixed-point iteration on an ordered box, then Newton refinement.

    Each step solves ``A u_new = f1(T1 u, T2 v)``, ``A v_new = f2(T1 u, T2 v)``
    with the clamps ``T`` into the box.  The pair is accepted when the refined
    residual is at most ``accept_tol``; ``in_box`` records whether it still lies
    in the box, which is when truncation is inactive and it solves the system.
    """
    t0 = time.perf_counter()
    A = _operator(A if A is not None else box.grid, bc)
    rows = _rows(A)
    if box_tol is None:
        box_tol = 10 * accept_tol
    if start is None:
        u, v = box.midpoint()
    else:
        u, v = (np.array(s, dtype=float) for s in start)
        if not box.contains(u, v, tol=box_tol):
            raise DomainError("Picard start must lie inside the box")

    history = []
    picard_converged = False
    k = 0
    for k in range(1, max_iter + 1):
        tu = truncate(u, box.lower_u, box.upper_u)
        tv = truncate(v, box.lower_v, box.upper_v)
        assert box.contains(tu, tv)
        f1, f2 = gm_rhs(tu, tv, exponents, mask=rows)
        un = cg_solve(A, f1, tol=cg_tol, x0=u)
        vn = cg_solve(A, f2, tol=cg_tol, x0=v)
        change = max(float(np.max(np.abs(un - u))), float(np.max(np.abs(vn - v))))
        history.append(change)
        u, v = un, vn
        if change <= tol:
            picard_converged = True
            break

    truncation_inactive = box.contains(u, v, tol=box_tol)
    message = f"picard {'converged' if picard_converged else 'budget exhausted'} after {k} steps"
    iterations = k
    if refine and np.all(u[rows] > 0) and np.all(v[rows] > 0):
        nr = newton_refine(u, v, exponents, A, tol=newton_tol)
        iterations += nr.iterations
        message += f"; newton {nr.message} after {nr.iterations} steps"
        history.extend(nr.history)
        if nr.residual <= max(residual(u, v, exponents, A)):
            u, v = nr.u, nr.v
    elif refine:
        message += "; newton skipped (non-positive iterate)"

    ru, rv = residual(u, v, exponents, A)
    in_box = box.contains(u, v, tol=box_tol)
    converged = max(ru, rv) <= accept_tol
    return SolveReport(u, v, iterations, ru, rv, converged, box_label=box.label,
                       wall_time_ms=1e3 * (time.perf_counter() - t0), history=history,
                       in_box=in_box, truncation_inactive=truncation_inactive, message=message)


# --- deflation ------------------------------------------------------------

def deflated_newton(known, start, exponents: ExponentConfig, A=None, tol=1e-10, max_iter=50,
                    shift=1.0, power=2, grid=None, accept_tol=ACCEPT_TOL) -> SolveReport:
    """Search for a root of the coupled system away from the ``known`` solutions."""
    t0 = time.perf_counter()
    A = _operator(A if A is not None else grid)
    n = A.size
    rows = _rows(A)
    for s in known:
        if max(residual(s.u, s.v, exponents, A)) > accept_tol:
            raise DomainError("deflated solutions must be accepted roots")
    x0 = np.concatenate([start[0], start[1]]).astype(float)
    feasible = _positive_on(rows, n)
    if not feasible(x0):
        raise DomainError("deflated Newton start must be positive on the unknowns")
    res = newton_deflated(
        lambda x: residual_vector(x[:n], x[n:], exponents, A),
        lambda x: jacobian(x[:n], x[n:], exponents, A),
        x0, [s.as_vector() for s in known], tol=tol, max_iter=max_iter,
        shift=shift, power=power, feasible=feasible,
    )
    uu, vv = res.x[:n], res.x[n:]
    ru, rv = residual(uu, vv, exponents, A)
    return SolveReport(uu, vv, res.iterations, ru, rv, res.converged and max(ru, rv) <= accept_tol,
                       box_label="annulus", wall_time_ms=1e3 * (time.perf_counter() - t0),
                       history=res.history, message=res.message)


# --- homotopies -----------------------------------------------------------

FAMILIES = ("plus_family", "abs_family")


@dataclass
class HomotopyConfig:
    """Continuation setup for the two auxiliary families.

    ``plus_family`` adds ``(1-t) lam (u - phi1)^+``; ``abs_family`` adds
    ``(1-t) lam |u^+ - phi1|``.  ``lam`` must lie in (0, lambda1).
    """

    family: str = "plus_family"
    lam: float = 0.5
    t_schedule: tuple = tuple(np.linspace(0.0, 1.0, 21))
    max_iter: int = 50
    tol: float = 1e-10
    lambda1: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not 0.0 < self.lam < self.lambda1:
            raise ConfigurationError(f"lambda = {self.lam} must lie in (0, {self.lambda1})")
        ts = np.asarray(self.t_schedule, dtype=float)
        if ts.size < 2 or np.any(ts < 0) or np.any(ts > 1) or np.any(np.diff(ts) <= 0):
            raise ConfigurationError("t_schedule must increase strictly within [0, 1]")


def _aux_term(w, phi, family):
    """The auxiliary source and its derivative in w."""
    if family == "plus_family":
        g = np.maximum(w - phi, 0.0)
        dg = (w > phi).astype(float)
    else:
        wp = np.maximum(w, 0.0)
        g = np.abs(wp - phi)
        dg = np.sign(wp - phi) * (w > 0)
    return g, dg


def homotopy_residual(u, v, t, config: HomotopyConfig, exponents, A, phi1):
    n = A.size
    g1, dg1 = _aux_term(u, phi1, config.family)
    g2, dg2 = _aux_term(v, phi1, config.family)
    s = (1.0 - t) * config.lam
    F = np.concatenate([A.apply(u) - s * g1, A.apply(v) - s * g2])
    if t > 0:
        f1, f2 = gm_rhs(u, v, exponents)
        F[:n] -= t * f1
        F[n:] -= t * f2
    return F


def homotopy_jacobian(u, v, t, config: HomotopyConfig, exponents, A, phi1):
    s = (1.0 - t) * config.lam
    _, dg1 = _aux_term(u, phi1, config.family)
    _, dg2 = _aux_term(v, phi1, config.family)
    M = A.matrix
    blocks = [[M - sp.diags(s * dg1), None], [None, M - sp.diags(s * dg2)]]
    if t > 0:
        rows = np.ones(A.size, dtype=bool)
        (d1u, d1v), (d2u, d2v) = _rhs_derivatives(u, v, exponents, rows)
        blocks = [[blocks[0][0] - sp.diags(t * d1u), sp.diags(-t * d1v)],
                  [sp.diags(-t * d2u), blocks[1][1] - sp.diags(t * d2v)]]
    else:
        n = A.size
        blocks[0][1] = sp.csr_matrix((n, n))
        blocks[1][0] = sp.csr_matrix((n, n))
    return sp.bmat(blocks, format="csc")


@dataclass
class HomotopyResult:
    branch: list
    t_values: list
    failed_at: int | None
    messages: list

    @property
    def complete(self) -> bool:
        return self.failed_at is None

    @property
    def endpoint(self):
        return self.branch[-1] if self.branch else None


def _pair_at(x, n, t, config, exponents, A, phi1, label):
    u, v = x[:n], x[n:]
    r = homotopy_residual(u, v, t, config, exponents, A, phi1)
    return SolutionPair(u.copy(), v.copy(), float(np.max(np.abs(r[:n]))), float(np.max(np.abs(r[n:]))),
                        box_label="none", provenance=f"{label} t={t:.6g}")


def homotopy_solve(config: HomotopyConfig, exponents: ExponentConfig, grid=None, A=None, phi1=None,
                   start=None, start_floor=1e-2) -> HomotopyResult:
    """Natural-parameter continuation along ``config.t_schedule``.

    ``plus_family`` runs forward from the trivial solution (0, 0) at t = 0.
    ``abs_family`` runs backward from ``start`` (default: the constant pair
    (phi1, phi1)) at t = 1 toward t = 0.  Newton at each t is warm-started
    from the previous point; positivity is enforced whenever t > 0, and warm
    starts are lifted to at least ``start_floor`` so the GM term is defined.
    """
    A = _operator(A if A is not None else grid)
    n = A.size
    if phi1 is None:
        phi1 = np.ones(n)
    ts = list(np.asarray(config.t_schedule, dtype=float))
    if config.family == "plus_family":
        x = np.zeros(2 * n) if start is None else np.concatenate(start).astype(float)
    else:
        ts = ts[::-1]
        x = np.concatenate([phi1, phi1]) if start is None else np.concatenate(start).astype(float)

    branch, t_values, messages = [], [], []
    for k, t in enumerate(ts):
        if t > 0:
            x0 = np.maximum(x, start_floor)
            feasible = lambda y: bool(np.all(y > 0))  # noqa: E731
        else:
            x0 = x
            feasible = None
        res = damped_newton(
            lambda y: homotopy_residual(y[:n], y[n:], t, config, exponents, A, phi1),
            lambda y: homotopy_jacobian(y[:n], y[n:], t, config, exponents, A, phi1),
            x0, tol=config.tol, max_iter=config.max_iter, feasible=feasible,
        )
        messages.append(f"t={t:.6g}: {res.message} ({res.iterations} steps)")
        if not res.converged:
            return HomotopyResult(branch, t_values, k, messages)
        x = res.x
        branch.append(_pair_at(x, n, t, config, exponents, A, phi1, config.family))
        t_values.append(float(t))
    return HomotopyResult(branch, t_values, None, messages)


# --- search regions -------------------------------------------------------

@dataclass(frozen=True)
class SearchRegions:
    """Radii of the nested balls in the discrete C^1 norm; the annulus is L2 < |w| < L1."""

    L1: float
    L2: float

    def __post_init__(self):
        if not 0.0 < self.L2 < self.L1:
            raise ConfigurationError(f"need 0 < L2 < L1, got L2={self.L2}, L1={self.L1}")

    def in_annulus(self, norm: float) -> bool:
        return self.L2 < norm < self.L1

    def to_dict(self) -> dict:
        return {"L1": self.L1, "L2": self.L2}


def pair_c1_norm(grid: Grid, u, v) -> float:
    """C^1 norm of a pair: the larger of the component norms."""
    from .mesh import c1_norm
    return max(c1_norm(grid, u), c1_norm(grid, v))


def search_regions(boxes, margin=1.01, factor=4.0) -> SearchRegions:
    """L2 just above the C^1 norms of every box upper barrier, L1 = factor * L2."""
    L2 = margin * max(pair_c1_norm(b.grid, b.upper_u, b.upper_v) for b in boxes)
    return SearchRegions(L1=factor * L2, L2=L2)


# --- nonexistence probes --------------------------------------------------

@dataclass
class NonexistenceReport:
    problem: str
    lam: float
    n_starts: int
    n_converged: int
    roots: list
    min_residual: float
    residual_zero: float
    residual_phi1: float
    tol: float
    seed: int

    @property
    def nonexistence_supported(self) -> bool:
        return self.n_converged == 0

    def to_dict(self) -> dict:
        return {
            "problem": self.problem, "lambda": self.lam, "n_starts": self.n_starts,
            "n_converged": self.n_converged, "n_distinct_roots": len(self.roots),
            "root_summaries": [{"min": float(r.min()), "max": float(r.max())} for r in self.roots],
            "min_residual": self.min_residual, "residual_zero": self.residual_zero,
            "residual_phi1": self.residual_phi1, "tol": self.tol, "seed": self.seed,
        }


def _abs_source(u, phi, lam):
    return lam * np.abs(np.maximum(u, 0.0) - phi)


def l9_residual(u, lam, A, phi1) -> float:
    """Max-norm residual of ``A u = lam |u^+ - phi1|``."""
    return float(np.max(np.abs(A.apply(u) - _abs_source(u, phi1, lam))))


def _distinct(roots, x, threshold=1e-6):
    return all(float(np.max(np.abs(x - r))) > threshold for r in roots)


def check_l9_nonexistence(lam=0.5, n_starts=100, tol=1e-10, grid=None, seed=0, max_iter=50,
                          eig=None) -> NonexistenceReport:
    """Multistart Newton probe of ``-Δu + u = lam |u^+ - phi1|`` (zero flux).

    Evaluates the two explicit non-solutions 0 and phi1, then runs damped
    Newton from random fields with nodes uniform in ``[-2 |phi1|, 2 |phi1|]``.
    Converged roots are reported, not raised.
    """
    if not 0.0 < lam < 1.0:
        raise ConfigurationError(f"lambda = {lam} must lie in (0, 1)")
    if grid is None:
        from .mesh import build_grid
        grid = build_grid(1, (0.0, 1.0), 65)
    A = neumann_operator(grid)
    if eig is None:
        from .sparse_solve import smallest_eigenpair
        eig = smallest_eigenpair(A)
    phi = eig.phi1
    r0 = l9_residual(np.zeros(grid.num_nodes), lam, A, phi)
    rphi = l9_residual(phi, lam, A, phi)

    def F(u):
        return A.apply(u) - _abs_source(u, phi, lam)

    def J(u):
        d = np.sign(np.maximum(u, 0.0) - phi) * (u > 0)
        return A.matrix - sp.diags(lam * d)

    rng = np.random.default_rng(seed)
    bound = 2.0 * float(np.max(np.abs(phi)))
    roots, converged, best = [], 0, np.inf
    for _ in range(n_starts):
        x0 = rng.uniform(-bound, bound, grid.num_nodes)
        res = damped_newton(F, J, x0, tol=tol, max_iter=max_iter)
        best = min(best, res.residual)
        if res.converged:
            converged += 1
            if _distinct(roots, res.x):
                roots.append(res.x)
    return NonexistenceReport("abs_auxiliary", lam, n_starts, converged, roots, float(best),
                              r0, rphi, tol, seed)


def check_p0_nonexistence(lam=0.5, n_starts=50, tol=1e-10, grid=None, seed=0, max_iter=50,
                          exponents=None, eig=None) -> NonexistenceReport:
    """Multistart probe of the abs family at t = 0 (decoupled auxiliary system)."""
    if grid is None:
        from .mesh import build_grid
        grid = build_grid(1, (0.0, 1.0), 65)
    A = neumann_operator(grid)
    if eig is None:
        from .sparse_solve import smallest_eigenpair
        eig = smallest_eigenpair(A)
    phi = eig.phi1
    n = grid.num_nodes
    config = HomotopyConfig("abs_family", lam=lam, lambda1=eig.lambda1 + 1e-12)
    exponents = exponents or ExponentConfig(0.4, 0.2, 0.4, 0.2)

    def F(x):
        return homotopy_residual(x[:n], x[n:], 0.0, config, exponents, A, phi)

    def J(x):
        return homotopy_jacobian(x[:n], x[n:], 0.0, config, exponents, A, phi)

    zero = np.zeros(2 * n)
    r0 = float(np.max(np.abs(F(zero))))
    rphi = float(np.max(np.abs(F(np.concatenate([phi, phi])))))
    rng = np.random.default_rng(seed)
    bound = 2.0 * float(np.max(np.abs(phi)))
    roots, converged, best = [], 0, np.inf
    for _ in range(n_starts):
        x0 = rng.uniform(-bound, bound, 2 * n)
        res = damped_newton(F, J, x0, tol=tol, max_iter=max_iter)
        best = min(best, res.residual)
        if res.converged:
            converged += 1
            if _distinct(roots, res.x):
                roots.append(res.x)
    return NonexistenceReport("abs_family_t0", lam, n_starts, converged, roots, float(best),
                              r0, rphi, tol, seed)
