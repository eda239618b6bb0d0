"""Find every critical point of the phase function by Newton continuation.

Each chart has a unique explicit critical point at q = 0; continuation along
a lifted ray brings it to the target q.  At the end: exactly (n+1)! distinct
nondegenerate points whose row matrix has characteristic polynomial
prod (x - lam_i), i.e. the points sit on the expected spectral variety.
"""

from todamirror import census, scaling_residual, to_lagrangian, uv_identity_check

n = 2
lam = (0.25, 0.125, -0.375)
q = (1.0, 1.0)

result = census(n, lam, q)
print(f"n = {n}, lambda = {lam}, q = {q}")
print(f"found {result.count} critical points (expected {result.expected})")
print(f"pairwise distance >= {result.min_pairwise_distance:.3f}, "
      f"all nondegenerate: {result.all_nondegenerate}")
print(f"max spectral-identity residual:   {result.max_spectral_residual:.2e}")
print(f"max Toda-relation residual:       {result.max_lagrangian_residual:.2e}")

print("\nper-chart critical values and momenta:")
for rec in result.records:
    lp = to_lagrangian(rec)
    p_str = ", ".join(f"{z:.4f}" for z in lp.p)
    print(f"  chart {rec.chart.kseq} (perm {rec.chart.permutation}): "
          f"u = {rec.u_sigma:.6f}   p = [{p_str}]")

for c in (2.0, 1.0 / 3.0):
    r = scaling_residual(n, lam, q, c)
    print(f"\nquasi-homogeneity residual at c = {c:.3f}: {r:.2e}")

print("row-factorisation identity (symbolic, exact):", uv_identity_check(n))
