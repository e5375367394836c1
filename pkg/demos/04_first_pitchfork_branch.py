"""Continue the first pitchfork at k = 1/6 and compare with the exact bright family."""

from kdvls.continuation import continue_branch, exact_bright_deviation, fit_branch

pts = continue_branch(1, 1.0, 1 / 6, analyze=False)
print(" a        Omega          deviation from exact family")
for pt in pts[::4]:
    print(f" {pt.a:.3f}  {pt.params.Omega:+.10f}  {exact_bright_deviation(pt):.1e}")
fits = fit_branch(pts)
print(f"Omega - Omega_c ~ {fits.quad_coeff:.6f} a^2 (expected 1/12 = {1 / 12:.6f})")
print(f"scaling exponents: ||U-U0|| ~ |dOmega|^{fits.slope_U:.3f}, "
      f"||A|| ~ |dOmega|^{fits.slope_A:.3f}")
