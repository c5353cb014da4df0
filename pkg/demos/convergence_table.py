"""
Convergence rates with and without a fold
=========================================

A clamped unit square under the uniform load f = 100, solved with quadratic
discontinuous elements on six uniformly refined meshes (192 to 196 608
unknowns). The exact solution is unknown, so the error in the dG norm is
estimated from the norms themselves: the limit is extrapolated from the three
finest levels and err_j = sqrt(|s~^2 - s_j^2|).

Four fold geometries are compared: no fold, a straight fold at x = 1/2, and a
sine-shaped fold approximated piecewise linearly and piecewise quadratically.

Usage: python demos/convergence_table.py [levels]
"""
import sys

import numpy as np

from foldplate import PRESETS, run

levels = int(sys.argv[1]) if len(sys.argv) > 1 else 6
names = ["table1-nofold", "table1-straight", "table1-pwlinear", "table1-pwquadratic"]

# reference rates, rows 192 ... 196608
reference = {
    "table1-nofold": [1.3020, 1.3158, 1.2823, 1.2262, 1.1744, 1.1737],
    "table1-straight": [1.2874, 1.2801, 1.2292, 1.1597, 1.0828, 1.0820],
    "table1-pwlinear": [1.2190, 1.1767, 1.1243, 1.0916, 1.0242, 1.0230],
    "table1-pwquadratic": [1.3384, 1.2049, 1.1281, 1.0948, 1.0261, 1.0248],
}

results = {}
for name in names:
    config = PRESETS[name].with_overrides({"levels": str(levels)})
    manifest = run(config, output_dir="demo-output")
    results[name] = manifest["rows"]
    print(f"{name}: s~ = {manifest['rows'][-1]['stilde']:.6f}")

###############################################################################
# Rates per level next to the reference values. The coarsest row has no rate:
# it needs an error on a level before the first.

print()
print(f"{'dofs':>7s}" + "".join(f"{n.split('-')[1]:>22s}" for n in names))
for j in range(levels):
    cells = []
    for name in names:
        rate = results[name][j]["rate"]
        ours = "   -  " if rate is None else f"{rate:.4f}"
        cells.append(f"{ours} ({reference[name][j]:.4f})")
    print(f"{results[names[0]][j]['ndofs']:7d}" + "".join(f"{c:>22s}" for c in cells))

###############################################################################
# All four columns settle towards the predicted rate 1 = k - 1; the folded
# plates get there on coarser meshes than the flat one.

errs = np.array([[row["err"] for row in results[name]] for name in names])
print()
print("estimated errors, finest level:", ", ".join(f"{e:.3e}" for e in errs[:, -1]))
