"""Where does the alternating-variance family have a conservative tuning?

The family has g_k = -g and variance rates alternating rho2 and
2 sigma2 - rho2, so every slope parameter equals sigma2 / 2g. The stable
weights do not depend on rho2, and the conservation functional is

    F(rho2) = (rho2 W_odd + (2 sigma2 - rho2) W_even) / 2 - g

with W_odd and W_even the expected weight on odd and even ranks. A root in
(0, 2 sigma2) needs W_even < g / sigma2 < W_odd. The scan shows that this
holds only for small slope parameters; at sigma2 / 2g = 5 the weight is
spread too evenly and F stays positive over the whole bracket.

Run: python demos/e1_scan.py
"""

from atlaszipf import TuningError, make_e1_family, tune_e1_rho
from atlaszipf.zipf import _e1_columns, weight_moments

N, MC = 64, 20_000

print(f"{'s':>5} {'W_odd':>7} {'W_even':>7} {'g/s2':>7} root")
for s in (1.05, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0):
    g, sigma2 = 1.0, 2.0 * s
    mom = weight_moments(make_e1_family(g, sigma2, sigma2, K=N), N, _e1_columns(N), MC, 0)
    w_odd, w_even = mom.mean
    print(f"{s:5.2f} {w_odd:7.4f} {w_even:7.4f} {g / sigma2:7.4f} {w_even < g / sigma2 < w_odd}")

for sigma2 in (2.5, 10.0):
    try:
        res = tune_e1_rho(1.0, sigma2, N, mc=MC, seed=0)
        print(f"sigma2={sigma2}: rho2* = {res.rho2:.6f} after {res.iterations} bisections")
    except TuningError as exc:
        lo, hi = exc.evidence[0], exc.evidence[-1]
        print(f"sigma2={sigma2}: no root, F ranges {lo[1]:.4f} .. {hi[1]:.4f}")
