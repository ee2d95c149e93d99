"""
Critical birth rates of the mean-field systems
==============================================

Bisect the birth rate at which a plateau bump stops dying out and starts
spreading, for the contact process and for the bistable one-component
system with both standard coefficients.  Run from the repository root:

    python3 demos/critical_rates.py
"""
from dioecious.critical import bisect_lambda_c
from dioecious.pde import ReactionSpec, System, sys11_roots

# The contact process is monostable: any rate above 1/(2d) spreads.
contact = ReactionSpec(System.CONTACT, 1.0, dim_d=2)
b = bisect_lambda_c(contact, 0.5 / 4, 2.0 / 4, 0.01)
print(f"contact process, d = 2: lambda_c in [{b.lo:.4f}, {b.hi:.4f}]"
      " (exact 0.25; slow fronts near threshold read as dying within a finite horizon)")

# The bistable system w' = w'' + beta w^2 (1 - w) - w has an unstable root
# and a stable one once beta > 4; a bump spreads only when the stable
# state wins the travelling-wave race, at beta = 4.5.
r1, r0 = sys11_roots(6.0)
print(f"beta = 6: roots {r1:.4f} (unstable) and {r0:.4f} (stable)")

for name, coeff in (("g-i", 4.0), ("g-tilde-i", 20.0)):
    spec = ReactionSpec(System.SYS11, 1.0, dim_d=2, coefficient=coeff)
    b = bisect_lambda_c(spec, 4.2 / coeff, 5.0 / coeff, 2e-3)
    print(f"sys11 with {name} (beta = {coeff:g} lambda): lambda_c in [{b.lo:.4f}, {b.hi:.4f}],"
          f" predicted {4.5 / coeff:.4f}")
    for rec in b.transcript:
        print(f"    iteration {rec.iteration:2d}  probe {rec.probe:.5f}  {rec.verdict.value}")
