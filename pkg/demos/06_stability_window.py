"""The negative-Krein neutral pair: embedded in the continuum only inside a k-window."""

from kdvls import spectra, stability

km, kp = spectra.instability_k_window()
for k in (0.05, 0.2, 0.5, 1.0, 2.0):
    r = stability.embedded_negative_pair(k)
    print(f"k={k:4.2f}: Omega={r.Omega:+.5f} pair at +-i{abs(r.mode.omega):.5f}  "
          f"Krein {r.mode.krein:+d}  embedded={r.embedded}")
print(f"closed-form window ({km:.5f}, {kp:.5f}); bisection:",
      round(stability.window_endpoint(0.05, 0.2), 4), round(stability.window_endpoint(1.0, 2.0), 4))
r = stability.branch_point_pair(0.5, 0.02)
print(f"second-pitchfork branch point a=0.02: Krein {r.mode.krein:+d}, embedded={r.embedded}")
