"""From a disorder-averaged sweep to a critical point.

An RTPM sweep on L x L^1.697 tori, then the crossing of S_cf curves and a
data collapse. With a tenth of the desk-scale samples the exponent is rough.
"""

from plaqsym.harness import SweepConfig, run_sweep
from plaqsym.scaling import estimate_crossing, fit_collapse

cfg = SweepConfig("rtpm", (8, 12, 16), tuple(round(0.72 + 0.02 * k, 2) for k in range(9)), ltau="power:1.697", realizations=100, seed=1)
table = run_sweep(cfg)
curves = table.curves("scf")
for L, (p, y, se) in curves.items():
    print(f"  L={L:2d} " + " ".join(f"{v:5.2f}" for v in y))
c = estimate_crossing(curves)
print(f"crossing p_c = {c.p_c:.3f} +- {c.err:.3f}")
f = fit_collapse(curves, c.p_c, 1.0)
print(f"collapse p_c = {f.p_c:.3f}, nu = {f.nu:.2f} (quality {f.quality:.3g})")
