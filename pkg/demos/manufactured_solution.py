"""
Checking the convergence order against a known solution
=======================================================

u = x^2 (1-x)^2 y^2 (1-y)^2 is clamped on the unit square and f = lap^2 u.
Because u is known, the dG error can be computed directly and compared with
the estimate that the convergence tables rely on. For degree k, the error
should decay like h^(k-1).
"""
import numpy as np

from foldplate import PRESETS, run

for name in ("manufactured-k2", "manufactured-k3"):
    manifest = run(PRESETS[name], output_dir="demo-output")
    direct = np.array([lev["direct_error"] for lev in manifest["levels"]])
    estimate = np.array([row["err"] for row in manifest["rows"]])
    rates = np.log2(direct[:-1] / direct[1:])
    print(name)
    print("  direct error  ", np.array2string(direct, precision=3))
    print("  direct rates  ", np.array2string(rates, precision=3))
    print("  estimate/error", np.array2string(estimate / direct, precision=3))

###############################################################################
# The rates approach k - 1. The estimate sits below the true error by a
# steady factor: the squared-norm identity behind it holds for the energy
# norm of the bilinear form, which is equivalent to the dG norm but not equal
# to it. For k = 3 the extrapolated limit is already at rounding level, so the
# estimate ratio is noisy.
