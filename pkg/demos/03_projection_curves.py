"""Sign of the projection integrals that decide super/subcriticality of each pitchfork."""

import numpy as np

from kdvls import greens

for which, label in ((greens.Which.FIRST, "int g^2 W dy"), (greens.Which.SECOND,
                                                            "int gt^2 Wt dy")):
    e, v = greens.projection_curve(which)
    print(f"{label}: value at exponent 1 = {greens.projection(which, 1.0):.10f}")
    print(f"   sign changes at {[round(z, 6) for z in greens.sign_changes(e, v)]}")
    i = int(np.argmin(v))
    print(f"   sampled minimum {v[i]:.6f} at exponent {e[i]:.3f}")
    for x in (0.1, 0.5, 1.0, 2.0, 3.0, 4.0):
        print(f"   {x:4.1f}  {greens.projection(which, x):+.6e}")
