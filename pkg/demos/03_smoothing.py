# How fast does the diffusion smooth rough momentum data?
import numpy as np

from rvmfp.studies import probe_config, smoothing_probe

# x-homogeneous box with dt = dx = 0.01; f0 is the indicator of a disc in v
rough = smoothing_probe(probe_config("rough_v"))
print("t         |v0^1.5 grad f|^2   |v0 grad^2 f|^2")
for t, a, b in zip(rough.times, rough.grad1_sq, rough.grad2_sq):
    print(f"{t:6.3f}  {a:16.4e}  {b:16.4e}")
print(f"fitted slopes {rough.slope1:.3f} {rough.slope2:.3f}  (bounds scale like 1/t and 1/t^2)")

# the disc edge alone gives -1/2 and -3/2 at short times, steeper once the disc
# has spread; the fitted window sees both regimes
for radius in (0.4, 0.5, 0.8):
    cfg = probe_config("rough_v").with_(scenario={"params": {"radius": radius}})
    r = smoothing_probe(cfg)
    print(f"radius {radius}: slopes {r.slope1:.3f} {r.slope2:.3f}")

# exp(1 - v0) is stationary once friction is on, so nothing decays
ctrl = smoothing_probe(probe_config("maxwellian", friction=True))
print(f"control slopes {ctrl.slope1:.3f} {ctrl.slope2:.3f}")
print("control norms stay put:", np.round(ctrl.grad1_sq[[0, -1]], 4))
