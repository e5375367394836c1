"""Pitchfork points of the KdV soliton and the L2 eigenvalues that vanish there."""

from kdvls import spectra
from kdvls.continuation import kdv_profile
from kdvls.discretize import Block, assemble, lowest_eigs
from kdvls.grid import default_grid
from kdvls.model import ModelParams

for k in (1 / 6, 0.5, 1.0, 2.0):
    lad = spectra.bifurcation_ladder(1.0, k)
    g = default_grid(1.0, lad.points[-1])
    prof = kdv_profile(1.0, g)
    print(f"k = {k:.4f}: {lad.J} pitchfork point(s)")
    for j, om in enumerate(lad.points, start=1):
        lam = lowest_eigs(assemble(Block.L2, prof, ModelParams(1.0, om, k), g), j)[j - 1]
        print(f"   j={j}: Omega_c = {om:+.6f}, mode exponent {lad.exponents[j - 1]:.4f}, "
              f"discrete lambda_j(L2) = {lam:+.1e}")
km, kp = spectra.instability_k_window()
print(f"embedded-pair coupling window: ({km:.5f}, {kp:.5f})")
