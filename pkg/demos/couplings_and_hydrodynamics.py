"""
Couplings, exact generators and the rapid-stirring limit
========================================================

Three checks on the particle system itself: the basic coupling keeps
ordered configurations ordered, the Monte Carlo law on two sites matches
the matrix exponential of the generator, and with fast individual stirring
the male density follows the mean-field equation.

    python3 demos/couplings_and_hydrodynamics.py
"""
from dioecious.acceptance import coupling_violations, ctmc_tv_distance
from dioecious.ips import IpsParams, Model, hydrodynamic_check

for kind in ("order", "lambda", "domination"):
    bad = coupling_violations(kind, runs=60)
    print(f"coupling ({kind}): {bad} violations in 60 runs")

tv = ctmc_tv_distance(IpsParams(1.0, Model.G2, torus_side=2), replicas=20_000)
print(f"two-site torus: total variation between Monte Carlo and expm(tQ) = {tv:.4f}")

res = hydrodynamic_check(eps_values=(0.2, 0.1), replicas=60)
print(f"beta = {res.beta:g}")
for eps, dist, se in zip(res.eps, res.sup_distance, res.stderr):
    print(f"  eps = {eps:.2f}: sup distance {dist:.4f} (bin standard error {se:.4f})")
print("distance shrinks with eps:", res.monotone)
