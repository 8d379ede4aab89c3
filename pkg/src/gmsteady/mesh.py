"""Structured grids on intervals and rectangles, and the discrete -Δ + I operators.

Nodes are ordered lexicographically: in 2D the node (i, j) with i along x and
j along y has flat index ``i * n_y + j``.

The Neumann operator uses ghost-node mirroring (u[-1] = u[1]), which keeps the
scheme second order and maps constants to themselves.  It is assembled in the
symmetric form ``S = W A`` where ``W`` holds the trapezoidal node weights
(1/2 per boundary direction), so ``A = W^{-1} S`` carries the mirrored -2/h^2
couplings on boundary rows while ``S`` is exactly symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .sparse_solve import SparseOperator


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform tensor-product grid on an interval or rectangle.

    Attributes:
        dimension: 1 or 2.
        extents: per-axis ``(low, high)``.
        n: nodes per axis.
        h: spacing per axis.
        coords: list of 1D coordinate arrays, one per axis.
        points: ``(num_nodes, dimension)`` array of node coordinates.
        boundary_mask: True on nodes lying on the boundary.
        dist: exact Euclidean distance of each node to the boundary.
    """

    dimension: int
    extents: tuple[tuple[float, float], ...]
    n: tuple[int, ...]
    h: tuple[float, ...] = field(init=False)
    coords: list = field(init=False, repr=False)
    points: np.ndarray = field(init=False, repr=False)
    boundary_mask: np.ndarray = field(init=False, repr=False)
    dist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = tuple((hi - lo) / (m - 1) for (lo, hi), m in zip(self.extents, self.n))
        coords = [np.linspace(lo, hi, m) for (lo, hi), m in zip(self.extents, self.n)]
        mesh = np.meshgrid(*coords, indexing="ij")
        points = np.stack([c.ravel() for c in mesh], axis=1)

        # distance to a box boundary is the smallest distance to any face
        per_axis = [np.minimum(c - lo, hi - c).ravel() for c, (lo, hi) in zip(mesh, self.extents)]
        dist = np.min(np.stack(per_axis), axis=0)

        ii = np.meshgrid(*[np.arange(m) for m in self.n], indexing="ij")
        mask = np.zeros(points.shape[0], dtype=bool)
        for k, m in zip(ii, self.n):
            mask |= (k.ravel() == 0) | (k.ravel() == m - 1)
        dist[mask] = 0.0
        dist = np.maximum(dist, 0.0)

        for name, value in (("h", h), ("coords", coords), ("points", points),
                            ("boundary_mask", mask), ("dist", dist)):
            object.__setattr__(self, name, value)
        mask.setflags(write=False)
        dist.setflags(write=False)
        points.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.n)

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum((hi - lo) ** 2 for lo, hi in self.extents)))

    @property
    def min_extent(self) -> float:
        return float(min(hi - lo for lo, hi in self.extents))

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights normalised so interior nodes carry 1."""
        factors = [_trapezoid_weights(m) for m in self.n]
        w = factors[0]
        for f in factors[1:]:
            w = np.kron(w, f)
        return w

    def reshape(self, values):
        return np.asarray(values).reshape(self.shape)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "extents": [list(e) for e in self.extents],
            "n": list(self.n),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Grid:
        return build_grid(data["dimension"], data["extents"], data["n"])


def build_grid(dimension, extents, n) -> Grid:
    """Build a uniform grid.

    ``extents`` is a single ``(low, high)`` pair or one pair per axis; ``n`` is an
    int or one int per axis.  Raises ConfigurationError for fewer than 3 nodes
    per axis or a degenerate extent.
    """
    if dimension not in (1, 2):
        raise ConfigurationError(f"dimension must be 1 or 2, got {dimension}")
    ext = np.asarray(extents, dtype=float)
    if ext.ndim == 1 or ext.shape == (1, 2):
        ext = np.tile(ext.reshape(1, -1), (dimension, 1))
    if ext.shape != (dimension, 2):
        raise ConfigurationError(f"extents must give (low, high) per axis, got {extents}")
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    if ns.size == 1:
        ns = np.repeat(ns, dimension)
    if ns.size != dimension:
        raise ConfigurationError(f"n must give one count per axis, got {n}")
    for (lo, hi), m in zip(ext, ns):
        if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
            raise ConfigurationError(f"degenerate extent ({lo}, {hi})")
        if m < 3:
            raise ConfigurationError(f"need at least 3 nodes per axis, got {m}")
    return Grid(
        dimension=dimension,
        extents=tuple((float(lo), float(hi)) for lo, hi in ext),
        n=tuple(int(m) for m in ns),
    )


def _trapezoid_weights(m):
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    return w


def _stiffness_1d(m, h):
    # symmetric Neumann stiffness: W^{-1} K gives the mirrored stencil
    a = 1.0 / (h * h)
    main = np.full(m, 2.0 * a)
    main[0] = main[-1] = a
    off = np.full(m - 1, -a)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _second_difference_1d(m, h):
    a = 1.0 / (h * h)
    return sp.diags([np.full(m - 1, -a), np.full(m, 2.0 * a), np.full(m - 1, -a)],
                    [-1, 0, 1], format="csr")


def _mirrored_second_difference_1d(m, h):
    # W^{-1} K in 1D: the ghost-node stencil with -2/h^2 on the boundary rows
    mat = sp.lil_matrix(_second_difference_1d(m, h))
    a = 1.0 / (h * h)
    mat[0, 1] = -2.0 * a
    mat[m - 1, m - 2] = -2.0 * a
    return _finalize(mat)


def _kron_sum(grid, factors_1d, diag_1d):
    """Sum over axes of kron(diag, ..., factor_axis, ..., diag)."""
    total = None
    for axis in range(grid.dimension):
        term = None
        for k in range(grid.dimension):
            mat = factors_1d[k] if k == axis else diag_1d[k]
            term = mat if term is None else sp.kron(term, mat, format="csr")
        total = term if total is None else total + term
    return total


def _finalize(mat):
    mat = sp.csr_matrix(mat)
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def neumann_operator(grid: Grid) -> SparseOperator:
    """Discrete -Δ + I with zero-flux (mirror) boundary conditions."""
    wd = [sp.diags(_trapezoid_weights(m), format="csr") for m in grid.n]
    stiff = _kron_sum(grid, [_stiffness_1d(m, h) for m, h in zip(grid.n, grid.h)], wd)
    weights = grid.weights
    sym = _finalize(stiff + sp.diags(weights, format="csr"))
    return SparseOperator(
        grid=grid,
        kind="neumann",
        sym=sym,
        weights=weights,
        unknowns=np.arange(grid.num_nodes),
        axis_ops=tuple(_mirrored_second_difference_1d(m, h) for m, h in zip(grid.n, grid.h)),
    )


def dirichlet_operator(grid: Grid) -> SparseOperator:
    """Discrete -Δ + I on interior nodes with homogeneous Dirichlet data.

    The full-grid matrix keeps identity rows on the boundary so that applying it
    to a field returns the boundary values there (the residual of ``u = 0``).
    """
    eye = [sp.identity(m, format="csr") for m in grid.n]
    lap = _kron_sum(grid, [_second_difference_1d(m, h) for m, h in zip(grid.n, grid.h)], eye)
    interior = np.flatnonzero(grid.interior_mask)
    # boundary rows of the Laplacian part are dropped; the identity remains
    lap = _finalize(sp.diags(grid.interior_mask.astype(float), format="csr") @ lap)
    full = _finalize(lap + sp.identity(grid.num_nodes, format="csr"))
    sym = _finalize(full[interior][:, interior])
    return SparseOperator(
        grid=grid,
        kind="dirichlet",
        sym=sym,
        weights=np.ones(interior.size),
        unknowns=interior,
        full=full,
        axis_ops=tuple(_second_difference_1d(m, h) for m, h in zip(grid.n, grid.h)),
        row_mask=grid.interior_mask,
    )


def boundary_trace_max(grid: Grid, values) -> float:
    """Largest absolute value of a field over boundary nodes."""
    return float(np.max(np.abs(np.asarray(values)[grid.boundary_mask])))


def boundary_trace_min(grid: Grid, values) -> float:
    """Smallest signed value of a field over boundary nodes."""
    return float(np.min(np.asarray(values)[grid.boundary_mask]))


def c1_norm(grid: Grid, values) -> float:
    """Discrete C^1 norm: max |value| plus the largest adjacent difference quotient."""
    arr = grid.reshape(values)
    slope = 0.0
    for axis, h in enumerate(grid.h):
        d = np.abs(np.diff(arr, axis=axis)) / h
        slope = max(slope, float(d.max()))
    return float(np.max(np.abs(arr))) + slope
