# The relativistic diffusion matrix and its discrete operator.
import numpy as np

from rvmfp.diffusion import FokkerPlanckOperator, apply_diffusion, diffusion_matrix, stability_dt
from rvmfp.grid import PhaseGrid, gamma
from rvmfp.verify import diffusion_identities, moment_identity_ratios

# D(v) = (I + v v^T) / v0 stretches along v and shrinks across it
v = (3.0, 4.0)
print(diffusion_matrix(v).as_array())
print("along v:", apply_diffusion(*v, *v), "expected", gamma(*v) * np.array(v))
print("across v:", apply_diffusion(*v, -4.0, 3.0), "expected", np.array([-4.0, 3.0]) / gamma(*v))

# the same identities over a million random momenta out to |v| = 1000
err_par, err_perp, bad = diffusion_identities()
print(f"max relative errors {err_par:.1e} {err_perp:.1e}, sandwich violations {bad}")

# discrete operator on a Gaussian against the closed form
# div(D grad f) = f (|v|^2 v0 - 2 v0 - |v|^2/v0) for f = exp(-|v|^2/2)
for nv in (32, 64, 128):
    g = PhaseGrid(0.0, 1.0, 1, 8.0, nv)
    v1, v2 = g.momentum_mesh()
    r2 = v1 ** 2 + v2 ** 2
    f = np.exp(-r2 / 2)
    exact = f * (r2 * g.v0_table - 2 * g.v0_table - r2 / g.v0_table)
    err = np.abs(FokkerPlanckOperator(g).laplacian(f) - exact).max()
    print(f"nv={nv:4d}  max error {err:.3e}")

# sum v0 L f = 2 sum f holds to second order in dv
res, ratios = moment_identity_ratios()
print("moment identity residuals", res, "ratios", ratios)

# explicit steps need dt below this; the solver subcycles inside each dt = dx
g = PhaseGrid(-2.0, 2.0, 128, 16.0, 64)
print(f"stability_dt {stability_dt(g):.3e} vs dx {g.dx:.3e}")
