import math
import warnings

import numpy as np
import pytest

from kdvls import continuation, greens, spectra
from kdvls.continuation import (BvpConfig, BranchPoint, classify, continue_branch,
                                exact_bright_deviation, fit_branch, kdv_profile,
                                morse_perturbation_check, primary_branch_index, solve_profile)
from kdvls.discretize import d_matrix_exact_bright
from kdvls.errors import NoConvergence, OutOfDomain, ShapeError, TrivialBranch
from kdvls.grid import Grid, default_grid
from kdvls.model import ExactFamily, Family, ModelParams, WaveProfile, eval_exact, sample_exact


def test_config_validation():
    g = Grid(10.0, 101)
    for bad in [dict(newton_tol=0.0), dict(max_iter=0), dict(damping=0.0), dict(damping=1.5),
                dict(parity_a="zero")]:
        with pytest.raises(ShapeError):
            BvpConfig(g, **bad)


def test_newton_fixed_point_bright(bright):
    fam, prof = bright
    cfg = BvpConfig(prof.grid)
    out = solve_profile(ModelParams(fam.c, fam.Omega, fam.k), prof, cfg)
    assert len(out.history) - 1 <= 3
    assert max(np.max(np.abs(out.U - prof.U)), np.max(np.abs(out.A - prof.A))) <= 1e-8


def test_newton_fixed_point_tanh():
    fam = ExactFamily(Family.SECH_TANH, 1.0, -0.2)
    prof = sample_exact(fam)
    out = solve_profile(ModelParams(fam.c, fam.Omega, fam.k), prof,
                        BvpConfig(prof.grid, parity_a="odd"))
    assert out.parity_a == "odd"
    assert max(np.max(np.abs(out.U - prof.U)), np.max(np.abs(out.A - prof.A))) <= 1e-8


def test_tanh_at_bifurcation_point_is_trivial():
    fam = ExactFamily(Family.SECH_TANH, 1.0, -0.25)
    assert fam.k == pytest.approx(0.5)
    prof = sample_exact(fam)
    with pytest.warns(TrivialBranch):
        out = solve_profile(ModelParams(1.0, -0.25, 0.5), prof,
                            BvpConfig(prof.grid, parity_a="odd"))
    assert np.max(np.abs(out.U - prof.U)) <= 1e-8 and out.parity_a == "zero"


def test_trivial_branch_from_perturbed_U():
    g = Grid(40.0, 2001)
    U0 = 3.0 / np.cosh(0.5 * g.nodes) ** 2
    init = WaveProfile(g, 1.1 * U0, np.zeros(g.n_points), "even", "zero")
    with pytest.warns(TrivialBranch):
        out = solve_profile(ModelParams(1.0, -0.5, 0.5), init, BvpConfig(g))
    assert np.max(np.abs(out.U - U0)) <= 1e-6 and np.all(out.A == 0)


def test_newton_quadratic_convergence(bright):
    fam, prof = bright
    g = prof.grid
    bump = 0.02 * np.exp(-g.nodes**2)
    init = WaveProfile(g, prof.U * (1 + bump), prof.A * (1 - bump), "even", "even")
    out = solve_profile(ModelParams(fam.c, fam.Omega, fam.k), init, BvpConfig(g))
    r = np.array(out.history)
    pairs = [(a, b) for a, b in zip(r[:-1], r[1:]) if a < 1e-3 and b > 1e-13]
    assert pairs, r
    assert max(b / a**2 for a, b in pairs) < 1e3


def test_no_convergence():
    g = Grid(40.0, 1001)
    init = WaveProfile(g, np.zeros(g.n_points), np.ones(g.n_points) * 0.0 + np.exp(-g.nodes**2),
                       "even", "even")
    with pytest.raises(NoConvergence) as info:
        solve_profile(ModelParams(1.0, -0.125, 1 / 6), init, BvpConfig(g, max_iter=1))
    assert np.isfinite(info.value.last_residual)


def test_mismatched_initial():
    g = Grid(40.0, 1001)
    prof = kdv_profile(1.0, g)
    with pytest.raises(ShapeError):
        solve_profile(ModelParams(1, -1, 1), prof, BvpConfig(Grid(40.0, 2001)))
    with pytest.raises(OutOfDomain):
        solve_profile(ModelParams(1, -1, 1, s=-1, enforce_sign=False), prof, BvpConfig(g))


def test_branch_validation():
    with pytest.raises(OutOfDomain):
        continue_branch(3, 1.0, 1.0, [0.1])
    with pytest.raises(OutOfDomain):
        continue_branch(2, 1.0, 0.1, [0.1])
    with pytest.raises(OutOfDomain):
        continue_branch(1, 1.0, -0.1, [0.1])
    with pytest.raises(ShapeError):
        continue_branch(2, 1.0, 0.5, [0.1], cfg=BvpConfig(Grid(40.0, 1001)))


def test_branch_quadratic_coefficient(branch_j1):
    assert len(branch_j1) == 20
    fits = fit_branch(branch_j1)
    assert fits.quad_coeff == pytest.approx(1 / 12, rel=0.03)


def test_branch_matches_bright_family(branch_j1):
    assert max(exact_bright_deviation(pt) for pt in branch_j1) <= 1e-5


def test_branch_scaling_slopes(branch_j1):
    fits = fit_branch(branch_j1)
    assert abs(fits.slope_U - 1) <= 0.1 and abs(fits.slope_A - 0.5) <= 0.05


def test_branch_invariants(branch_j1, analyzed_j2):
    for pts, parity in ((branch_j1, "even"), (analyzed_j2, "odd")):
        for pt in pts:
            g = pt.profile.grid
            assert pt.profile.residual_norm <= 1e-10
            assert g.parity_defect(pt.profile.A, parity) <= 1e-8
            assert g.parity_defect(pt.profile.U, "even") <= 1e-8
            assert pt.amplitude == pytest.approx(pt.a, abs=1e-8)


def test_second_branch_subcritical(analyzed_j2):
    Om_c = spectra.omega_bif(2, 1.0, 0.5)
    assert all(pt.params.Omega < Om_c for pt in analyzed_j2)


def test_second_branch_against_tanh_family(analyzed_j2):
    """Near the pitchfork the j=2 branch at k=1/2 follows the sech-tanh trend:
    its Omega(a) and the tanh family's Omega at k=1/2 both lie below -1/4
    only through O(a^2) terms, so the branch point tends to the family's
    bifurcation point -c k/(3-2k) = -1/4 as a -> 0."""
    Om_exact = spectra.omega_exact_tanh(0.5, 1.0)
    shifts = np.array([pt.params.Omega - Om_exact for pt in analyzed_j2])
    a = np.array([pt.a for pt in analyzed_j2])
    assert np.all(shifts < 0)
    assert np.allclose(shifts / a**2, shifts[0] / a[0] ** 2, rtol=0.05)


def test_classification_j1(analyzed_j1):
    for pt in analyzed_j1:
        cls = classify(pt)
        assert str(cls) == "MINIMIZER" and cls.z_hat == 2
        assert (pt.spectrum_lj.morse_index, pt.spectrum_lj.nullity) == (1, 1)
        assert (pt.spectrum_full.morse_index, pt.spectrum_full.nullity) == (1, 2)


def test_classification_j2(analyzed_j2):
    for pt in analyzed_j2:
        cls = classify(pt)
        assert str(cls) == "SADDLE(2)" and cls.z_hat == 2
        assert pt.spectrum_full.morse_index in (3, 4) and pt.spectrum_full.nullity == 2


def test_classify_requires_analysis(branch_j1):
    with pytest.raises(ShapeError):
        classify(branch_j1[0])


def test_numeric_D_matches_exact(analyzed_j1):
    for pt in analyzed_j1:
        D, E = pt.D, d_matrix_exact_bright(pt.params.c, pt.params.Omega)
        assert abs(D.d11) <= 0.02 * abs(E.d12)
        for i, j in [(0, 1), (1, 0), (1, 1)]:
            assert D.entries[i, j] == pytest.approx(E.entries[i, j], rel=0.02)


def test_primary_branch_uncoupled_minimizer():
    res = primary_branch_index(1.0, 0.5, -1.5)
    assert str(res.classification) == "MINIMIZER" and res.dP_dc == pytest.approx(18, rel=1e-6)
    assert [primary_branch_index(1.0, 0.5, Om).n_beyond_kdv for Om in (-1.5, -0.5, -0.1)] == \
        [0, 2, 4]


def test_morse_perturbation():
    meas, pred = morse_perturbation_check(1, 1.0, 1 / 6, 0.05)
    assert 0.9 <= meas / pred <= 1.1
    assert morse_perturbation_check(1, 1.0, 1 / 6, 0.0) == (0.0, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        meas2, _ = morse_perturbation_check(2, 1.0, 0.5, 0.05)
    assert meas2 < 0


def test_zero_sum_identity():
    zs = continuation.zero_sum_identity(1.0, 1 / 6)
    assert abs(zs.total) <= 1e-6
    assert zs.term_l2 == pytest.approx(zs.term_l2_closed, abs=1e-6)
    zs2 = continuation.zero_sum_identity(1.5, 0.5)
    assert abs(zs2.total) <= 1e-6 * max(1.0, abs(zs2.term_l1))


def test_u0_w2_inner():
    assert continuation.u0_w2_inner(1.0) == pytest.approx(-6.0, abs=1e-5)
    assert continuation.u0_w2_inner(4.0) == pytest.approx(-3.0, abs=1e-5)


def test_sweep_stops_at_failure():
    cfg = BvpConfig(continuation.branch_grid(1, 1.0, 1 / 6), max_iter=3)
    pts = continue_branch(1, 1.0, 1 / 6, [0.02, 0.04, 5.0, 0.06], cfg, analyze=False)
    assert [pt.a for pt in pts] == [0.02, 0.04]
