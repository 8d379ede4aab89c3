"""Barrier functions, constant calibration and ordered-box certificates.

The two ordered rectangles built here trap a steady state of

    -Δu + u = u^a1 / v^b1,    -Δv + v = u^a2 / v^b2

with zero-flux boundary conditions:

* interior box ``[phi1 / C, C z]^2`` built from the Neumann eigenfunction and
  the Neumann solution ``z`` of ``(-Δ + I) z = 1``;
* boundary box ``[y_delta / C, C y]^2`` built from the Dirichlet solution ``y``
  of ``(-Δ + I) y = 1`` and ``y_delta``, whose source flips to -1 in the band
  of width delta along the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CalibrationError, ConfigurationError, DomainError
from .mesh import Grid, dirichlet_operator, neumann_operator
from .sparse_solve import Eigenpair, cg_solve, smallest_eigenpair

CLAMP_EPS = 1e-12
MAX_DOUBLINGS = 64


@dataclass(frozen=True)
class ExponentConfig:
    """Exponents of the activator/inhibitor nonlinearities.

    Requires ``0 <= a_i - b_i`` and ``a_i + b_i < 1`` with all exponents positive.
    """

    alpha1: float
    beta1: float
    alpha2: float
    beta2: float

    def __post_init__(self):
        for name in ("alpha1", "beta1", "alpha2", "beta2"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"exponent condition violated: {name} = {value} must be positive")
        problem = exponent_violation(self.alpha1, self.beta1, self.alpha2, self.beta2)
        if problem:
            raise ConfigurationError(f"exponent condition violated: {problem}")

    def pairs(self):
        return ((self.alpha1, self.beta1), (self.alpha2, self.beta2))

    def to_dict(self) -> dict:
        return {"alpha1": self.alpha1, "beta1": self.beta1,
                "alpha2": self.alpha2, "beta2": self.beta2}


def exponent_violation(alpha1, beta1, alpha2, beta2) -> str | None:
    """Describe the first violated exponent inequality, or None if all hold."""
    for i, (a, b) in enumerate(((alpha1, beta1), (alpha2, beta2)), start=1):
        if a - b < 0:
            return f"alpha{i} - beta{i} = {a - b:.6g} < 0"
        if a + b >= 1:
            return f"alpha{i} + beta{i} = {a + b:.6g} >= 1"
    return None


def _pow(x, p):
    # x**0 := 1 for x > 0, avoiding 0**0 ambiguity in the degenerate alpha == beta branch
    if p == 0:
        return np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else 1.0
    return np.power(x, p) if isinstance(x, np.ndarray) else float(x) ** p


@dataclass(frozen=True, eq=False)
class BarrierSet:
    grid: Grid
    eig: Eigenpair
    z: np.ndarray
    y: np.ndarray
    y_delta: np.ndarray
    delta: float
    mu_bar: float
    mu_under: float
    c0: float
    c1: float
    c: float
    C_interior: float | None = None
    C_boundary: float | None = None

    @property
    def lambda1(self) -> float:
        return self.eig.lambda1

    @property
    def phi1(self) -> np.ndarray:
        return self.eig.phi1

    def constants(self) -> dict:
        return {
            "lambda1": self.lambda1, "delta": self.delta, "mu_bar": self.mu_bar,
            "mu_under": self.mu_under, "c0": self.c0, "c1": self.c1, "c": self.c,
            "C_interior": self.C_interior, "C_boundary": self.C_boundary,
            "domain_size": self.grid.diameter,
        }


@dataclass(frozen=True, eq=False)
class BoxSpec:
    grid: Grid
    lower_u: np.ndarray
    lower_v: np.ndarray
    upper_u: np.ndarray
    upper_v: np.ndarray
    label: str

    def __post_init__(self):
        for lo, hi, name in ((self.lower_u, self.upper_u, "u"), (self.lower_v, self.upper_v, "v")):
            bad = np.flatnonzero(lo > hi)
            if bad.size:
                raise CalibrationError(
                    f"{self.label} box: lower bound exceeds upper bound for {name} at node {int(bad[0])}"
                )

    def contains(self, u, v, tol=0.0) -> bool:
        return bool(
            np.all(u >= self.lower_u - tol) and np.all(u <= self.upper_u + tol)
            and np.all(v >= self.lower_v - tol) and np.all(v <= self.upper_v + tol)
        )

    def midpoint(self):
        return 0.5 * (self.lower_u + self.upper_u), 0.5 * (self.lower_v + self.upper_v)


@dataclass
class InequalityCheck:
    inequality_id: str
    worst_slack: float
    worst_node: int
    passed: bool

    def to_dict(self) -> dict:
        return {"inequality_id": self.inequality_id, "worst_slack": self.worst_slack,
                "worst_node": self.worst_node, "pass": self.passed}


@dataclass
class CertificateReport:
    label: str
    checks: list = field(default_factory=list)
    nodes: str = "all"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> list:
        return [c.to_dict() for c in self.checks]


# --- barrier fields -------------------------------------------------------

def compute_z(grid: Grid, tol=1e-10) -> np.ndarray:
    """Neumann solution of (-Δ + I) z = 1."""
    A = neumann_operator(grid)
    rhs = np.ones(grid.num_nodes)
    # the right-hand side is the leading term of (I - Δ)^{-1} b and is exact for constants
    return cg_solve(A, rhs, tol=tol, x0=rhs)


def compute_y(grid: Grid, tol=1e-10) -> np.ndarray:
    """Dirichlet solution of (-Δ + I) y = 1, zero on the boundary."""
    return cg_solve(dirichlet_operator(grid), np.ones(grid.num_nodes), tol=tol)


def band_source(grid: Grid, delta: float) -> np.ndarray:
    """+1 where dist > delta, -1 in the closed boundary band dist <= delta."""
    return np.where(grid.dist > delta, 1.0, -1.0)


def compute_y_delta(grid: Grid, delta: float, tol=1e-10) -> np.ndarray:
    if not 0.0 < delta < 0.5 * grid.min_extent:
        raise ConfigurationError(
            f"delta = {delta} must lie in (0, {0.5 * grid.min_extent}) for this grid"
        )
    return cg_solve(dirichlet_operator(grid), band_source(grid, delta), tol=tol)


def calibrate_delta(grid: Grid, y=None, tol=1e-10, max_halvings=20):
    """Largest delta of the form (min extent)/20 / 2^k with y_delta >= y/2 at every node.

    Returns ``(delta, y_delta)``.
    """
    if y is None:
        y = compute_y(grid, tol=tol)
    delta = grid.min_extent / 20.0
    for _ in range(max_halvings + 1):
        y_delta = compute_y_delta(grid, delta, tol=tol)
        if np.all(y_delta >= 0.5 * y):
            return delta, y_delta
        delta *= 0.5
    raise CalibrationError(f"y_delta >= y/2 still fails after {max_halvings} halvings of delta")


def calibrate_constants(grid: Grid, eig: Eigenpair, z, y, y_delta, delta) -> BarrierSet:
    """Fit the comparison constants between the barrier fields.

    mu_bar / mu_under are the extremes of phi1, ``z >= c0 mu_bar``,
    ``z <= c1 phi1`` and ``d / c <= y <= c d`` on interior nodes.
    """
    interior = grid.interior_mask
    if not interior.any():
        raise ConfigurationError("grid has no interior nodes")
    phi = eig.phi1
    mu_bar = float(phi.max())
    mu_under = float(phi.min())
    c0 = float(np.clip(z.min() / mu_bar, CLAMP_EPS, 1.0 - CLAMP_EPS))
    c1 = float(np.max(z / phi))
    d = grid.dist[interior]
    yi = y[interior]
    ratio = np.maximum(d / yi, yi / d)
    c = float(max(1.0 + CLAMP_EPS, ratio.max()))
    return BarrierSet(grid=grid, eig=eig, z=z, y=y, y_delta=y_delta, delta=float(delta),
                      mu_bar=mu_bar, mu_under=mu_under, c0=c0, c1=c1, c=c)


# --- box constants --------------------------------------------------------

def interior_inequalities(C, exponents: ExponentConfig, b: BarrierSet) -> dict:
    """Margins (>= 0 means satisfied) of the four interior-box requirements on C."""
    a1, b1 = exponents.alpha1, exponents.beta1
    a2, b2 = exponents.alpha2, exponents.beta2
    lam, c1, mb, mu = b.lambda1, b.c1, b.mu_bar, b.mu_under
    return {
        "super_u": C - C ** (a1 + b1) * c1 ** a1 * _pow(mb, a1 - b1),
        "super_v": C - _pow(C * c1 * mb, a2 - b2),
        "sub_u": 1.0 - C ** (a1 + b1 - 1.0) * lam * c1 ** b1 * mb * _pow(mu, b1 - a1),
        "sub_v": _pow(mu / C, a2 - b2) - lam * mb / C,
    }


def calibrate_C_interior(exponents: ExponentConfig, barriers: BarrierSet, certify=True) -> float:
    """Smallest power of two C >= 2 meeting the interior-box inequalities.

    With ``certify`` the nodal certificate of the resulting box must pass too.
    """
    margins = {}
    A = neumann_operator(barriers.grid) if certify else None
    for k in range(1, MAX_DOUBLINGS + 1):
        C = 2.0 ** k
        margins = interior_inequalities(C, exponents, barriers)
        if all(m >= 0 for m in margins.values()):
            if not certify:
                return C
            report = verify_subsuper(interior_box(barriers, C), exponents, A)
            if report.passed:
                return C
            margins = {c.inequality_id: c.worst_slack for c in report.checks}
    violated = ", ".join(name for name, m in margins.items() if m < 0)
    raise CalibrationError(f"no C <= 2^{MAX_DOUBLINGS} satisfies the interior box inequalities ({violated})")


def boundary_inequalities(C, exponents: ExponentConfig, b: BarrierSet, grid: Grid) -> dict:
    """Margins of the boundary-box requirements on C (strict: > 0 means satisfied).

    The domain size entering the bounds is the diameter, an upper bound for
    the boundary distance; ``d_min`` is the smallest grid distance beyond delta.
    """
    a1, b1 = exponents.alpha1, exponents.beta1
    a2, b2 = exponents.alpha2, exponents.beta2
    c = b.c
    D = grid.diameter
    outside = grid.dist > b.delta
    if not outside.any():
        raise CalibrationError("no grid node lies farther than delta from the boundary")
    d_min = float(grid.dist[outside].min())
    return {
        "upper_u": C - _pow(C * c * D, b1 - a1),
        "upper_v": C - (C * c) ** (b2 + a2) * 2.0 ** a2 * _pow(D, b2 - a2),
        "lower_u": _pow(d_min / (2.0 * c * C), b1 - a1) - 1.0 / C,
        "lower_v": _pow(d_min, b2 - a2) / (2.0 ** b2 * (C * c) ** (b2 + a2)) - 1.0 / C,
    }


def calibrate_C_boundary(exponents: ExponentConfig, barriers: BarrierSet, grid: Grid, certify=True) -> float:
    """Smallest power of two C >= 2 meeting the boundary-box inequalities strictly.

    The closed-form bounds alone do not always imply the nodal inequality for
    the activator subsolution, so with ``certify`` doubling continues until
    the nodal certificate of the box passes as well.
    """
    margins = {}
    A = neumann_operator(grid) if certify else None
    for k in range(1, MAX_DOUBLINGS + 1):
        C = 2.0 ** k
        margins = boundary_inequalities(C, exponents, barriers, grid)
        if all(m > 0 for m in margins.values()):
            if not certify:
                return C
            report = verify_subsuper(boundary_box(barriers, C), exponents, A)
            if report.passed:
                return C
            margins = {c.inequality_id: c.worst_slack for c in report.checks}
    violated = ", ".join(name for name, m in margins.items() if m <= 0)
    raise CalibrationError(f"no C <= 2^{MAX_DOUBLINGS} satisfies the boundary box inequalities ({violated})")


def build_barriers(grid: Grid, exponents: ExponentConfig, tol=1e-10, eig_tol=1e-10) -> BarrierSet:
    """Eigenpair, barrier fields and every calibrated constant for one configuration."""
    eig = smallest_eigenpair(neumann_operator(grid), eig_tol=eig_tol)
    z = compute_z(grid, tol=tol)
    y = compute_y(grid, tol=tol)
    delta, y_delta = calibrate_delta(grid, y, tol=tol)
    b = calibrate_constants(grid, eig, z, y, y_delta, delta)
    b = replace(b, C_interior=calibrate_C_interior(exponents, b))
    return replace(b, C_boundary=calibrate_C_boundary(exponents, b, grid))


def interior_box(barriers: BarrierSet, C) -> BoxSpec:
    lo = barriers.phi1 / C
    hi = C * barriers.z
    return BoxSpec(barriers.grid, lo, lo.copy(), hi, hi.copy(), "interior")


def boundary_box(barriers: BarrierSet, C) -> BoxSpec:
    # y_delta >= y/2 >= 0 after calibration; the clamp only guards uncalibrated delta
    lo = np.maximum(barriers.y_delta, 0.0) / C
    hi = C * barriers.y
    return BoxSpec(barriers.grid, lo, lo.copy(), hi, hi.copy(), "boundary")


def make_boxes(barriers: BarrierSet):
    """Interior box [phi1/C, C z]^2 and boundary box [max(y_delta, 0)/C, C y]^2."""
    if barriers.C_interior is None or barriers.C_boundary is None:
        raise CalibrationError("box constants have not been calibrated")
    return interior_box(barriers, barriers.C_interior), boundary_box(barriers, barriers.C_boundary)


# --- certificates ---------------------------------------------------------

def _ratio(u, v, a, b, floor_scale=1e-300):
    vf = np.maximum(v, floor_scale * max(1.0, float(np.max(np.abs(v)))))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.power(u, a) / np.power(vf, b)


def verify_subsuper(box: BoxSpec, exponents: ExponentConfig, A=None) -> CertificateReport:
    """Check the ordered box as a pointwise sub/supersolution pair.

    The nonlinearities are increasing in u and decreasing in v, so the
    quantifier over the box is replaced by its extreme corner:

    * sub_u:   A u_lo <= f1(u_lo, v_hi)
    * sub_v:   A v_lo <= f2(u_lo, v_lo)
    * super_u: A u_hi >= f1(u_hi, v_lo)
    * super_v: A v_hi >= f2(u_hi, v_hi)

    The boundary box is checked on interior nodes only: its barriers satisfy
    Dirichlet data, and the boundary flux term of the weak inequalities is
    carried explicitly rather than through the Neumann boundary rows.
    """
    g = box.grid
    if A is None:
        A = neumann_operator(g)
    nodes = g.interior_mask if box.label == "boundary" else np.ones(g.num_nodes, dtype=bool)
    for name, arr in (("lower_u", box.lower_u), ("lower_v", box.lower_v)):
        if np.any(arr[nodes] <= 0):
            raise DomainError(f"{box.label} box: {name} must be positive on checked nodes")
    (a1, b1), (a2, b2) = exponents.pairs()
    lu, lv, uu, uv = box.lower_u, box.lower_v, box.upper_u, box.upper_v
    slacks = {
        "sub_u": _ratio(lu, uv, a1, b1) - A.apply(lu),
        "sub_v": _ratio(lu, lv, a2, b2) - A.apply(lv),
        "super_u": A.apply(uu) - _ratio(uu, lv, a1, b1),
        "super_v": A.apply(uv) - _ratio(uu, uv, a2, b2),
    }
    idx = np.flatnonzero(nodes)
    report = CertificateReport(label=box.label, nodes="interior" if box.label == "boundary" else "all")
    for name, s in slacks.items():
        sub = s[idx]
        k = int(np.argmin(sub))
        worst = float(sub[k])
        report.checks.append(InequalityCheck(name, worst, int(idx[k]), bool(worst >= 0.0)))
    return report
