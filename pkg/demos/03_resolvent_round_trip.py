"""
Solving L y = phi with the explicit integral formula
====================================================

For zero-mean ``phi`` the equation ``L y = phi`` has a unique zero-mean
solution that is regular at ``x = 0``.  ``solve_L`` evaluates it on panels
graded toward the singular points ``0`` and ``+-pi``.
"""

import numpy as np

from bfheat import TrigPoly, Unsolvable, apply_L, make_grid, solve_L

for eps in (0.5, 1.0):
    grid = make_grid(eps)
    for name, y in (("cos x", TrigPoly.cos(1)), ("sin 2x", TrigPoly.sin(2))):
        phi = apply_L(y, eps)
        sol = solve_L(phi, eps, grid)
        err = sol.error_against(lambda x: y(x).real)
        print(f"eps = {eps}, y = {name:6s}: {grid.nodes.size} nodes, "
              f"residual {sol.residual:.1e}, nodal error {err:.1e}")

# constants are not in the range of L
try:
    solve_L(TrigPoly.constant(1.0), 0.5)
except Unsolvable as exc:
    print("phi = 1 rejected:", exc)

# a right-hand side given as a plain function on the grid
grid = make_grid(0.5)
sol = solve_L(lambda x: np.cos(3 * x) - np.sin(x), 0.5, grid)
print(f"phi = cos 3x - sin x: residual {sol.residual:.1e}, max |y| {np.max(np.abs(sol.y)):.4f}")
