import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from kdvls import spectra
from kdvls.continuation import kdv_profile
from kdvls.discretize import Block, DiscreteOperator, assemble, lowest_eigs
from kdvls.errors import NoBifurcations, OutOfDomain
from kdvls.grid import Grid
from kdvls.model import ModelParams


def _pt_oracle(gamma, m):
    """Lowest eigenvalues of -d^2 - gamma sech^2 on a wide fine grid."""
    g = Grid(60.0, 8001) if gamma > 1 else Grid(200.0, 10001)
    M = (-g.d2 + sp.diags(-gamma * np.cosh(g.nodes) ** -2.0)).tocsr()
    op = DiscreteOperator(M, Block.L1, g, None, (None,), np.arange(g.n_points),
                          np.zeros(g.n_points, int), (0.0,), 1.0)
    return lowest_eigs(op, m)


def test_pt_examples():
    s = spectra.poschl_teller_spectrum(12.0)
    assert s.eigenvalues == (-9.0, -4.0, -1.0) and s.resonance_at_zero
    assert [e + 4 for e in s.eigenvalues] == [-5.0, 0.0, 3.0]
    s = spectra.poschl_teller_spectrum(2.0)
    assert s.eigenvalues == (-1.0,) and s.resonance_at_zero
    s = spectra.poschl_teller_spectrum(0.1)
    assert s.count == 1 and not s.resonance_at_zero
    assert s.eigenvalues[0] == pytest.approx(-(0.5 * math.sqrt(1.4) - 0.5) ** 2, rel=1e-12)
    with pytest.raises(OutOfDomain):
        spectra.poschl_teller_spectrum(0.0)


@pytest.mark.parametrize("gamma", [0.1, 0.5, 2.0, 6.0, 12.0, 30.0, 100.0])
def test_pt_matches_discrete_oracle(gamma):
    s = spectra.poschl_teller_spectrum(gamma)
    num = _pt_oracle(gamma, s.count)
    assert np.max(np.abs(num - np.array(s.eigenvalues))) <= 1e-4


def test_ladder_examples():
    lad = spectra.bifurcation_ladder(1.0, 0.5)
    assert lad.J == 2 and lad.points == pytest.approx((-1.0, -0.25))
    lad = spectra.bifurcation_ladder(1.0, 1.0 / 6.0)
    assert lad.J == 1 and lad.points == pytest.approx((-0.25,))
    assert spectra.bifurcation_ladder(2.0, 0.5).points == pytest.approx((-2.0, -0.5))
    with pytest.raises(NoBifurcations):
        spectra.bifurcation_ladder(1.0, -0.5)


@given(st.floats(min_value=0.01, max_value=20), st.floats(min_value=0.1, max_value=5))
def test_ladder_invariants(k, c):
    lad = spectra.bifurcation_ladder(c, k)
    assert lad.J >= 1 and all(p < 0 for p in lad.points)
    assert all(a < b for a, b in zip(lad.points, lad.points[1:]))
    assert k > lad.J * (lad.J - 1) / 12 * (1 - 1e-12)
    assert lad.points[0] == pytest.approx(spectra.omega_bif(1, c, k))


@pytest.mark.parametrize("k", [1.0 / 6.0, 0.5, 1.0])
def test_ladder_zero_crossing(k):
    c = 1.0
    lad = spectra.bifurcation_ladder(c, k)
    g = Grid(40.0 / math.sqrt(min(c, abs(lad.points[-1]))), 4001)
    prof = kdv_profile(c, g)
    for j, om in enumerate(lad.points, start=1):
        lam = lowest_eigs(assemble(Block.L2, prof, ModelParams(c, om, k), g), j)
        assert abs(lam[j - 1]) <= 1e-5
        below = lowest_eigs(assemble(Block.L2, prof, ModelParams(c, om * 1.01, k), g), j)
        above = lowest_eigs(assemble(Block.L2, prof, ModelParams(c, om * 0.99, k), g), j)
        assert below[j - 1] > 0 > above[j - 1]


def test_modes():
    assert spectra.mode_g(1.0, 1.0 / 6.0, 0.0) == 1.0 and spectra.p_of(1.0 / 6.0) == 1.0
    assert spectra.mode_gtilde(1.0, 0.5, 0.0) == 0.0 and spectra.q_of(0.5) == 1.0
    assert spectra.mode_g(1.0, 0.3, 200.0) < 1e-20
    with pytest.raises(OutOfDomain):
        spectra.mode_gtilde(1.0, 1.0 / 6.0, 0.0)


@pytest.mark.parametrize("j,k", [(1, 1.0 / 6.0), (1, 0.5), (2, 0.5), (2, 1.0)])
def test_modes_annihilated_by_L2(j, k):
    c = 1.0
    om = spectra.omega_bif(j, c, k)
    g = Grid(40.0 / math.sqrt(abs(om)), 4001)
    L2 = assemble(Block.L2, kdv_profile(c, g), ModelParams(c, om, k), g)
    v = spectra.kernel_mode(j, c, k, g.nodes)
    assert np.max(np.abs(L2.apply(v))) / np.max(np.abs(v)) <= 1e-5


def test_window():
    km, kp = spectra.instability_k_window()
    assert km == pytest.approx(0.0774, abs=1e-4) and kp == pytest.approx(1.2559, abs=1e-4)
    assert spectra.in_instability_window(0.5) and not spectra.in_instability_window(2.0)


def test_window_algebra():
    km, kp = spectra.instability_k_window()
    ks = np.concatenate([np.linspace(0.01, 2.0, 400), [km * 0.999, km * 1.001,
                                                         kp * 0.999, kp * 1.001]])
    for k in ks:
        inside = abs(spectra.omega_bif(1, 1, k)) > 2 * abs(spectra.omega_bif(2, 1, k))
        assert inside == (km < k < kp)
