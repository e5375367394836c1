"""Morse indices, the D matrix and constrained counts along both pitchfork branches."""

import warnings

from kdvls.continuation import continue_branch, primary_branch_index
from kdvls.discretize import d_matrix_exact_bright

for j, k, a in ((1, 1 / 6, [0.05, 0.1]), (2, 0.5, [0.02, 0.04])):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pts = continue_branch(j, 1.0, k, a)
    for pt in pts:
        s = pt.spectrum_full
        print(f"j={j} a={pt.a}: Omega={pt.params.Omega:+.6f}  full Hessian (n, z) = "
              f"({s.morse_index}, {s.nullity})  -> {pt.classification}")
        print(f"   numeric D = {pt.D.entries.round(3).tolist()}")
        if j == 1:
            E = d_matrix_exact_bright(1.0, pt.params.Omega)
            print(f"   exact   D = {E.entries.round(3).tolist()}")
for Om in (-1.5, -0.5, -0.1):
    r = primary_branch_index(1.0, 0.5, Om)
    print(f"uncoupled soliton k=1/2 Omega={Om}: extra negative directions {r.n_beyond_kdv}, "
          f"{r.classification}")
