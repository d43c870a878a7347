"""The five copula families and what they say about joint extremes.

Run:  python3 demos/02_copula_families.py
"""
import numpy as np

from newscopula import (ClaytonCopula, copula_table, excess_report, kendall_tau_quad, make_copula,
                        tail_coefficients)
from newscopula.copulas import tail_ratio_mc

families = [("gaussian", (0.5,)), ("clayton", (2.0,)), ("gumbel", (2.0,)),
            ("t", (0.5, 4.0)), ("sjc", (0.2, 0.6))]

print(f"{'family':<10}{'params':<14}{'tau':>8}{'rho_S':>8}{'lam_L':>8}{'lam_U':>8}")
for tag, params in families:
    cop = make_copula(tag, *params)
    lo, up = tail_coefficients(cop)
    print(f"{tag:<10}{str(params):<14}{cop.kendall_tau():>8.3f}{cop.spearman_rho():>8.3f}"
          f"{lo:>8.3f}{up:>8.3f}")

# Kendall's tau by numerical integration agrees with Clayton's closed form.
for theta in (0.5, 1.0, 2.0):
    print(f"Clayton theta={theta}: quadrature tau {kendall_tau_quad(ClaytonCopula(theta)):.5f},"
          f" closed form {theta / (theta + 2):.5f}")

# Lower-tail dependence is a limit: C(q, q)/q approaches it as q shrinks.
weak = ClaytonCopula(0.134)
print(f"\nClayton theta=0.134: lambda_L = 2^(-1/theta) = {tail_coefficients(weak)[0]:.6f}")
for q in (1e-1, 1e-3, 1e-6, 1e-12):
    print(f"  C(q,q)/q at q={q:g}: {float(weak.cdf(q, q)) / q:.4f}")
strong = ClaytonCopula(2.0)
print(f"theta=2 Monte Carlo C(q,q)/q at q=1e-3: "
      f"{tail_ratio_mc(strong, 1e-3, 10 ** 6, np.random.default_rng(0)):.4f} "
      f"(limit {2 ** -0.5:.4f})")

# A 4x4 rank-bin table of Clayton draws piles up in the lower-left cell.
u, v = strong.sample(180, np.random.default_rng(5)).T
table = copula_table(u, v, k=4)
print("\nEmpirical copula table, 180 Clayton(2) pairs")
print(table.format())
rep = excess_report(table)
print(f"Largest excess in cell {rep.max_excess_cell}: {rep.max_excess:+.0%}")
