"""
Deflation: from a cubic to the coupled system
=============================================

Deflation multiplies the residual by prod(1/|x - r|^2 + 1) over known roots r,
so Newton cannot settle on them again.  On x^3 - x it peels off all three
roots and then comes back empty-handed.  On the coupled system we deflate the
constant steady state and start from large modal profiles in the annulus
between the box barriers and four times their norm.
"""

from collections import Counter

from gmsteady import (ExponentConfig, build_barriers, build_grid, make_boxes, picard_solve_in_box)
from gmsteady.multiroot import Budgets, annulus_search
from gmsteady.solver import cubic_deflation_self_test, search_regions

roots, extra = cubic_deflation_self_test(n_starts=50)
print("cubic roots:", [round(r, 12) + 0.0 for r in roots], " extra roots:", extra)

grid = build_grid(1, (0.0, 1.0), 129)
exponents = ExponentConfig(0.4, 0.2, 0.4, 0.2)
barriers = build_barriers(grid, exponents)
boxes = make_boxes(barriers)
known = [picard_solve_in_box(boxes[0], exponents).to_pair()]

regions = search_regions(boxes)
print(f"annulus: L2={regions.L2:.2f} L1={regions.L1:.2f}")

budgets = Budgets(n_starts=40)
third, log = annulus_search(grid, exponents, known, boxes, regions, budgets, seed=7,
                            lambda1=barriers.lambda1, phi1=barriers.phi1)
print("third solution found:", third is not None)
print("outcomes:", dict(Counter(e.get("verdict") or e.get("message") or e["kind"] for e in log)))
