"""Grid-refinement study of the Dirichlet barrier against its 1D closed form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barriers import compute_y
from .errors import ConfigurationError
from .mesh import build_grid


def y_exact(x, low=0.0, high=1.0):
    """Solution of -y'' + y = 1 on (low, high) with zero end values."""
    mid = 0.5 * (low + high)
    half = 0.5 * (high - low)
    return 1.0 - np.cosh(np.asarray(x) - mid) / np.cosh(half)


@dataclass
class StudyReport:
    n_list: list
    h: list
    errors: list
    slope: float

    def to_dict(self) -> dict:
        return {"n_list": self.n_list, "h": self.h, "errors": self.errors, "slope": self.slope}


def convergence_study(n_list, extents=(0.0, 1.0), dimension=1, tol=1e-12) -> StudyReport:
    """Max-norm error of the discrete y at each n and the fitted order in h."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ConfigurationError(f"convergence study needs at least 3 grid sizes, got {len(n_list)}")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigurationError("n_list must be strictly increasing")
    if dimension != 1:
        raise ConfigurationError("convergence study is only supported in 1D (closed form needed)")
    lo, hi = (float(e) for e in np.asarray(extents, dtype=float).ravel()[:2])
    hs, errs = [], []
    for n in n_list:
        g = build_grid(1, (lo, hi), n)
        y = compute_y(g, tol=tol)
        hs.append(g.h[0])
        errs.append(float(np.max(np.abs(y - y_exact(g.coords[0], lo, hi)))))
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    return StudyReport(n_list, hs, errs, slope)
