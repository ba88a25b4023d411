"""A conservative, complete, quasi-Zipfian simple family built by tuning.

Take g = 0.05 and two variance rates a <= b with the tail held at b. The
tail slope parameter b / 2g is above one, which makes the family complete.
Conservation then pins a: the expected relative drift of the top n must
vanish, and a is found by a root search on that Monte Carlo functional at
n = 10^4. With b = 0.12 the family is quasi-Zipfian (s1 below one, tail
1.2), so the harness should report hypotheses and conclusion together.

Run: python demos/quasi_zipfian_instance.py   (a few minutes)
"""

from scipy.optimize import brentq

from atlaszipf import FirstOrderFamily, conservation_estimate, proposition2_check

G, B = 0.05, 0.12


def drift(a, n=10_000, mc=20_000, seed=3):
    return conservation_estimate(FirstOrderFamily([-G, -G], [a, B]), n, mc, seed).value


a = brentq(drift, 1e-4, B, xtol=1e-10)
print(f"tuned sigma2_1 = {a!r}")

rep = proposition2_check(FirstOrderFamily([-G, -G], [a, B]), (100, 1000, 10_000), mc=100_000, seed=0)
print(f"conservative: {rep.conservative.passes} ({rep.conservative.reason})")
print(f"complete:     {rep.complete.passes} ({rep.complete.reason})")
print(f"top weight:   {rep.topweight.value:.3f} (ok: {rep.topweight_ok})")
c = rep.classification
print(f"verdict:      {c.verdict} (s1 {c.s1:.4f}, tail {c.tail_limit:.3f})")
print(f"hypotheses hold: {rep.hypotheses_hold}, conclusion holds: {rep.conclusion_holds}")
