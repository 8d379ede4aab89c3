"""
Looking for a solution that vanishes on the boundary
====================================================

The second box [y_delta / C, C y]^2 pins both fields to zero on the boundary.
Under zero-flux conditions no positive solution can do that: a zero trace
together with the mirrored boundary row forces the neighbouring node to zero,
and so on inward.  The Neumann solve therefore escapes the box and lands on
(1, 1).  Swapping in Dirichlet rows shows what the box would contain if the
boundary condition were different.
"""

import numpy as np

from gmsteady import (ExponentConfig, boundary_trace_max, build_barriers, build_grid, make_boxes,
                      picard_solve_in_box)

grid = build_grid(1, (0.0, 1.0), 129)
exponents = ExponentConfig(0.4, 0.2, 0.4, 0.2)
barriers = build_barriers(grid, exponents)
_, box = make_boxes(barriers)

for bc in ("neumann", "dirichlet"):
    rep = picard_solve_in_box(box, exponents, bc=bc)
    trace = max(boundary_trace_max(grid, rep.u), boundary_trace_max(grid, rep.v))
    print(f"{bc:>9}: converged={rep.converged} in_box={rep.in_box} residual={rep.residual:.2e} "
          f"trace={trace:.2e} max u={np.max(rep.u):.4f}")

# The zero-flux answer is the constant pair; the zero-trace one is a bump.
