"""The three-solution pipeline: barriers, certified boxes, two box solves and
an annulus search by deflated Newton, followed by boundary classification and
a distinctness audit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .barriers import BarrierSet, BoxSpec, ExponentConfig, build_barriers, make_boxes, verify_subsuper
from .errors import CalibrationError, ConfigurationError, DomainError, SolverError
from .mesh import Grid, boundary_trace_max, boundary_trace_min, neumann_operator
from .solver import (
    ACCEPT_TOL,
    HomotopyConfig,
    SearchRegions,
    SolutionPair,
    deflated_newton,
    homotopy_solve,
    pair_c1_norm,
    picard_solve_in_box,
    residual,
    search_regions,
)

EXIT_THREE = 0
EXIT_CONFIG = 1
EXIT_TWO = 2
EXIT_SOLVER = 3


@dataclass
class Budgets:
    """Tolerances and iteration budgets of one pipeline run."""

    n_starts: int = 200
    newton_max_iter: int = 50
    picard_max_iter: int = 500
    t_steps: int = 21
    lam: float = 0.5
    tol: float = 1e-10
    accept_tol: float = ACCEPT_TOL
    eig_tol: float = 1e-10
    scales: tuple = (1.5, 2.0, 3.0)
    max_mode: int = 4

    def __post_init__(self):
        for name in ("tol", "accept_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.n_starts < 0 or self.t_steps < 2:
            raise ConfigurationError("n_starts must be >= 0 and t_steps >= 2")

    @property
    def distinct_tol(self) -> float:
        return max(0.05, 1e3 * self.accept_tol)


@dataclass
class MultiRootResult:
    solutions: list
    pairwise_distances: np.ndarray | None
    regions: SearchRegions | None
    certificates: list
    status: str
    exit_code: int
    message: str = ""
    box_reports: list = field(default_factory=list)
    search_log: list = field(default_factory=list)
    component_distances: tuple | None = None
    barriers: BarrierSet | None = None

    @property
    def complete(self) -> bool:
        return self.exit_code == EXIT_THREE

    def to_dict(self) -> dict:
        def mat(m):
            return None if m is None else np.asarray(m).tolist()

        return {
            "status": self.status,
            "exit_code": self.exit_code,
            "message": self.message,
            "n_solutions": len(self.solutions),
            "solutions": [
                {
                    "box_label": s.box_label,
                    "boundary_class": s.boundary_class,
                    "residual_u": s.residual_u,
                    "residual_v": s.residual_v,
                    "provenance": s.provenance,
                }
                for s in self.solutions
            ],
            "pairwise_distances": mat(self.pairwise_distances),
            "component_distances": None if self.component_distances is None
            else {"u": mat(self.component_distances[0]), "v": mat(self.component_distances[1])},
            "regions": None if self.regions is None else self.regions.to_dict(),
            "certificates": [c.to_dict() for c in self.certificates],
            "box_reports": [r.to_dict() for r in self.box_reports],
            "search_log": self.search_log,
            "constants": None if self.barriers is None else self.barriers.constants(),
        }


def classify_boundary(pair: SolutionPair, barriers: BarrierSet, accept_tol=ACCEPT_TOL) -> str:
    """``vanishing``, ``positive`` or ``indeterminate`` from the boundary traces of both fields."""
    g = barriers.grid
    if max(boundary_trace_max(g, pair.u), boundary_trace_max(g, pair.v)) <= 10 * accept_tol:
        return "vanishing"
    C = barriers.C_interior if barriers.C_interior is not None else 1.0
    gap = boundary_trace_min(g, barriers.phi1) / C / 2.0
    if min(boundary_trace_min(g, pair.u), boundary_trace_min(g, pair.v)) >= gap:
        return "positive"
    return "indeterminate"


def component_distance_matrices(solutions):
    k = len(solutions)
    du = np.zeros((k, k))
    dv = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            du[i, j] = du[j, i] = float(np.max(np.abs(solutions[i].u - solutions[j].u)))
            dv[i, j] = dv[j, i] = float(np.max(np.abs(solutions[i].v - solutions[j].v)))
    return du, dv


def pairwise_distance_matrix(solutions) -> np.ndarray:
    """Symmetric matrix of ``max(|u_i - u_j|_inf, |v_i - v_j|_inf)``."""
    if len(solutions) < 2:
        raise ConfigurationError("need at least two solutions to compare")
    du, dv = component_distance_matrices(solutions)
    return np.maximum(du, dv)


def _modal_profile(grid: Grid, modes) -> np.ndarray:
    prof = np.ones(grid.num_nodes)
    for axis, k in enumerate(modes):
        lo, hi = grid.extents[axis]
        x = (grid.points[:, axis] - lo) / (hi - lo)
        prof = prof * np.cos(k * np.pi * x)
    return prof


def _scaled_start(grid, base, profile, scale, target):
    """``scale * base * exp(a * profile)`` with ``a >= 0`` chosen so the C^1 norm is ``target``."""
    def norm(a):
        return pair_c1_norm(grid, scale * base * np.exp(a * profile), base)

    lo, hi = 0.0, 1.0
    while norm(hi) < target and hi < 1e3:
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if norm(mid) < target:
            lo = mid
        else:
            hi = mid
    return scale * base * np.exp(hi * profile)


def annulus_starts(grid: Grid, base: SolutionPair, regions: SearchRegions, budgets: Budgets, seed: int):
    """Deterministic Newton starts with C^1 norm inside the annulus.

    Each start is ``s * w1 * exp(a cos(k pi x))`` per component, where ``w1`` is
    the interior-box solution, ``s`` cycles through ``budgets.scales``, the
    modes ``k`` are drawn at random and ``a`` hits a random target norm in
    (L2, L1).
    """
    rng = np.random.default_rng(seed)
    for i in range(budgets.n_starts):
        s = budgets.scales[i % len(budgets.scales)]
        comps = []
        info = {"index": i, "scale": s}
        for name, w in (("u", base.u), ("v", base.v)):
            modes = tuple(int(k) for k in rng.integers(0, budgets.max_mode + 1, grid.dimension))
            if all(k == 0 for k in modes):
                modes = (1,) + modes[1:]
            sign = 1.0 if rng.random() < 0.5 else -1.0
            target = rng.uniform(regions.L2, regions.L1)
            comps.append(_scaled_start(grid, w, sign * _modal_profile(grid, modes), s, target))
            info[f"modes_{name}"] = list(modes)
        info["start_norm"] = pair_c1_norm(grid, comps[0], comps[1])
        yield comps[0], comps[1], info


def _outside(box: BoxSpec, u, v) -> bool:
    return not box.contains(u, v)


def _accept_third(pair, known, boxes, rows, budgets):
    if pair.residual > budgets.accept_tol:
        return False, "residual above accept_tol"
    if not (np.all(pair.u[rows] > 0) and np.all(pair.v[rows] > 0)):
        return False, "not positive on interior nodes"
    scale = max(float(np.max(np.abs(pair.u))), float(np.max(np.abs(pair.v))))
    if scale < budgets.distinct_tol:
        return False, "collapsed onto the trivial pair"
    for s in known:
        if (float(np.max(np.abs(pair.u - s.u))) < budgets.distinct_tol
                or float(np.max(np.abs(pair.v - s.v))) < budgets.distinct_tol):
            return False, f"within {budgets.distinct_tol} of {s.box_label} solution"
    if not all(_outside(b, pair.u, pair.v) for b in boxes):
        return False, "inside a box"
    return True, "accepted"


def annulus_search(grid: Grid, exponents: ExponentConfig, known, boxes, regions: SearchRegions,
                   budgets: Budgets, seed: int, A=None, lambda1=1.0, phi1=None):
    """Deflated Newton from annulus starts, then one plus-family homotopy branch.

    Returns ``(third, log)`` where ``third`` is the first accepted new solution
    (or None) and ``log`` has one entry per attempt.
    """
    A = A if A is not None else neumann_operator(grid)
    rows = ~grid.boundary_mask
    log = []
    third = None
    for u0, v0, info in annulus_starts(grid, known[0], regions, budgets, seed):
        entry = dict(info, kind="deflated_newton")
        try:
            rep = deflated_newton(known, (u0, v0), exponents, A, tol=budgets.tol,
                                  max_iter=budgets.newton_max_iter, accept_tol=budgets.accept_tol)
        except DomainError as exc:
            entry.update(converged=False, message=str(exc))
            log.append(entry)
            continue
        entry.update(converged=rep.converged, iterations=rep.iterations,
                     residual=rep.residual, message=rep.message)
        if rep.converged:
            cand = rep.to_pair(provenance=f"deflated Newton, start {info['index']}")
            ok, why = _accept_third(cand, known, boxes, rows, budgets)
            entry.update(accepted=ok, verdict=why, norm=pair_c1_norm(grid, cand.u, cand.v))
            if ok:
                log.append(entry)
                return cand, log
        log.append(entry)

    entry = {"kind": "plus_family_homotopy", "lambda": budgets.lam}
    hr = homotopy_solve(HomotopyConfig("plus_family", lam=budgets.lam,
                                       t_schedule=tuple(np.linspace(0.0, 1.0, budgets.t_steps)),
                                       max_iter=budgets.newton_max_iter, tol=budgets.tol,
                                       lambda1=lambda1 + 1e-12),
                        exponents, A=A, phi1=phi1)
    entry.update(complete=hr.complete, failed_at=hr.failed_at)
    if hr.complete:
        end = hr.endpoint
        ru, rv = residual(end.u, end.v, exponents, A)
        cand = SolutionPair(end.u, end.v, ru, rv, "annulus", provenance="plus_family endpoint")
        ok, why = _accept_third(cand, known, boxes, rows, budgets)
        entry.update(residual=cand.residual, accepted=ok, verdict=why)
        if ok:
            third = cand
    log.append(entry)
    return third, log


def find_three_solutions(grid: Grid, exponents: ExponentConfig, budgets: Budgets | None = None,
                         seed: int = 7) -> MultiRootResult:
    """Run the full pipeline and return every solution found with its audit trail.

    Exit codes: 0 three solutions, 1 calibration or certificate failure,
    2 two solutions after an exhausted annulus search, 3 a box solve failed.
    """
    budgets = budgets or Budgets()
    try:
        barriers = build_barriers(grid, exponents, tol=budgets.tol, eig_tol=budgets.eig_tol)
    except (CalibrationError, SolverError) as exc:
        return MultiRootResult([], None, None, [], "calibration_failure", EXIT_CONFIG, str(exc))
    A = neumann_operator(grid)
    boxes = make_boxes(barriers)
    certificates = [verify_subsuper(b, exponents, A) for b in boxes]
    for cert in certificates:
        if not cert.passed:
            bad = ", ".join(f"{c.inequality_id} (slack {c.worst_slack:.3e} at node {c.worst_node})"
                            for c in cert.failing())
            return MultiRootResult([], None, None, certificates, "certificate_failure", EXIT_CONFIG,
                                   f"{cert.label} box certificate failed: {bad}", barriers=barriers)

    solutions, reports = [], []
    for box in boxes:
        rep = picard_solve_in_box(box, exponents, A=A, max_iter=budgets.picard_max_iter,
                                  newton_tol=budgets.tol, accept_tol=budgets.accept_tol)
        reports.append(rep)
        if not (rep.converged and rep.in_box):
            why = "did not converge" if not rep.converged else "converged outside the box"
            rep.boundary_class = classify_boundary(rep.to_pair(), barriers, budgets.accept_tol)
            return MultiRootResult(solutions, None, None, certificates, "box_solve_failure", EXIT_SOLVER,
                                   f"{box.label} box solve {why} (residual {rep.residual:.3e}; {rep.message})",
                                   box_reports=reports, barriers=barriers)
        pair = rep.to_pair(provenance=f"picard+newton in {box.label} box")
        pair.boundary_class = rep.boundary_class = classify_boundary(pair, barriers, budgets.accept_tol)
        solutions.append(pair)

    regions = search_regions(boxes)
    third, log = annulus_search(grid, exponents, solutions, boxes, regions, budgets, seed, A,
                                lambda1=barriers.lambda1, phi1=barriers.phi1)

    if third is not None:
        third.box_label = "annulus"
        third.boundary_class = classify_boundary(third, barriers, budgets.accept_tol)
        solutions.append(third)
        status, code, msg = "three_found", EXIT_THREE, "third solution found in the annulus"
    else:
        status, code = "two_found", EXIT_TWO
        msg = f"annulus search exhausted after {budgets.n_starts} starts and one homotopy branch"
    du, dv = component_distance_matrices(solutions)
    return MultiRootResult(solutions, np.maximum(du, dv), regions, certificates, status, code, msg,
                           box_reports=reports, search_log=log, component_distances=(du, dv),
                           barriers=barriers)
