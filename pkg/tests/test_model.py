import math
import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from conftest import observed_order
from kdvls.errors import (InvalidCoefficients, InvalidFamily, InvalidParams, ShapeError,
                          TruncationWarning, WrongRegime)
from kdvls.grid import Grid
from kdvls.model import (ExactFamily, Family, ModelParams, PhysicalCoefficients, WaveProfile,
                         conserved_quantities, eval_exact, first_invariant, normalize_coefficients,
                         residual_ode, sample_exact, second_invariant_k1,
                         second_invariant_melnikov, zero_profile)

nonzero = st.floats(min_value=0.1, max_value=10.0) | st.floats(min_value=-10.0, max_value=-0.1)


# -- normalization ------------------------------------------------------------

def test_normalize_identity():
    assert normalize_coefficients(PhysicalCoefficients(1, 1, 1, 1, 1)) == (1, 1)


def test_normalize_example():
    k, s = normalize_coefficients(PhysicalCoefficients(2, 3, -1, 6, 4))
    assert k == pytest.approx(1.0) and s == -1


def test_normalize_zero_coefficient():
    with pytest.raises(InvalidCoefficients):
        normalize_coefficients(PhysicalCoefficients(0, 1, 1, 1, 1))


@given(nonzero, nonzero, nonzero, nonzero, nonzero, st.floats(min_value=0.1, max_value=10))
def test_normalize_scaling_invariance(a, b, g, kap, sig, t):
    base = normalize_coefficients(PhysicalCoefficients(a, b, g, kap, sig))
    # scaling alpha, kappa by t and beta, sigma by t leaves sigma beta/(alpha kappa) fixed
    scaled = normalize_coefficients(PhysicalCoefficients(t * a, t * b, g, t * kap, t * sig))
    assert scaled[0] == pytest.approx(base[0], rel=1e-12) and scaled[1] == base[1]


# -- parameters -----------------------------------------------------------------

def test_params_invariants():
    assert ModelParams(1.0, -0.5, 2.0).s == 1
    assert ModelParams(1.0, -0.5, -2.0).s == -1
    assert ModelParams(2.0, -0.5, 1.0).omega == pytest.approx(-1.5)
    for bad in [dict(c=0.0, Omega=-1, k=1), dict(c=1, Omega=0.0, k=1), dict(c=1, Omega=-1, k=0),
                dict(c=1, Omega=-1, k=1, s=-1)]:
        with pytest.raises(InvalidParams):
            ModelParams(**bad)


# -- exact families -------------------------------------------------------------

def test_eval_exact_examples():
    U, A = eval_exact(ExactFamily(Family.KDV_UNCOUPLED, 1.0), 0.0)
    assert (U, A) == (3.0, 0.0)
    U, A = eval_exact(ExactFamily(Family.SECH_BRIGHT, 1.0, -0.25), 0.0)
    assert U == pytest.approx(3.0) and A == 0.0
    fam = ExactFamily(Family.SECH_TANH, 1.0, -0.25)
    assert fam.k == pytest.approx(0.5)
    xi = np.linspace(-10, 10, 41)
    U, A = eval_exact(fam, xi)
    assert np.allclose(U, 3.0 / np.cosh(xi / 2) ** 2, atol=1e-14) and np.all(A == 0)


def test_eval_exact_invalid():
    with pytest.raises(InvalidFamily):
        ExactFamily(Family.SECH_BRIGHT, 1.0, -0.5)
    with pytest.raises(InvalidFamily):
        ExactFamily(Family.SECH_BRIGHT, 1.0, -0.1, k=0.5)
    with pytest.raises(InvalidFamily):
        ExactFamily(Family.SECH_TANH, 1.0, -0.1, k=0.9)


@given(st.floats(min_value=-30, max_value=30), st.floats(min_value=0.2, max_value=5),
       st.floats(min_value=0.01, max_value=0.99))
def test_reversibility(xi, c, frac):
    Om = -frac * c / 4
    for fam, sign in [(ExactFamily(Family.KDV_UNCOUPLED, c), 1),
                      (ExactFamily(Family.SECH_BRIGHT, c, Om), 1),
                      (ExactFamily(Family.SECH_TANH, c, Om), -1)]:
        Up, Ap = eval_exact(fam, xi)
        Um, Am = eval_exact(fam, -xi)
        assert Up == Um and Ap == sign * Am


def test_exact_families_solve_ode_symbolically():
    """Closed forms satisfy the traveling-wave ODEs identically (sympy oracle)."""
    xi, c, x = sp.symbols("xi c x", positive=True)
    Om = -x
    mu = sp.sqrt(x)
    sech = 1 / sp.cosh(mu * xi)
    cases = [
        (3 * c / sp.cosh(sp.sqrt(c) * xi / 2) ** 2, sp.Integer(0), sp.Integer(1), -c, 1),
        (12 * x * sech**2, sp.sqrt(12 * x * (c - 4 * x)) * sech, sp.Rational(1, 6), Om, 1),
        (2 * (c + 2 * x) * sech**2,
         sp.sqrt(2 * (c - 4 * x) * (c + 2 * x)) * sech * sp.tanh(mu * xi),
         3 * x / (c + 2 * x), Om, 1),
    ]
    for U, A, k, Omega, s in cases:
        r1 = sp.diff(U, xi, 2) - c * U + U**2 / 2 + s * A**2
        r2 = sp.diff(A, xi, 2) + (Omega + k * U) * A
        for r in (r1, r2):
            r = sp.simplify(r.rewrite(sp.exp))
            assert r == 0


# -- residuals --------------------------------------------------------------------

def test_residual_examples(kdv, bright):
    for fam, prof in (kdv, bright):
        assert residual_ode(prof, fam.params)[2] <= 1e-6
    g = Grid(10.0, 101)
    assert residual_ode(zero_profile(g), ModelParams(1, -1, 1))[2] == 0.0


def test_residual_shape_error():
    g = Grid(10.0, 101)
    with pytest.raises(ShapeError):
        WaveProfile(g, np.zeros(100), np.zeros(101))


@pytest.mark.parametrize("fam", [ExactFamily(Family.KDV_UNCOUPLED, 1.0),
                                 ExactFamily(Family.SECH_BRIGHT, 1.0, -0.125),
                                 ExactFamily(Family.SECH_TANH, 1.0, -0.2)])
def test_residual_second_order_convergence(fam):
    """With the 2nd-order stencil, halving h quarters the residual."""
    base = Grid(80.0, 2001, order=2)
    errs = [residual_ode(sample_exact(fam, g), fam.params)[2] for g in (base, base.refined())]
    assert 1.9 <= observed_order(*errs) <= 2.1


# -- invariants ---------------------------------------------------------------

def test_first_invariant(kdv, bright):
    for fam, prof in (kdv, bright):
        assert np.max(np.abs(first_invariant(prof, fam.params))) <= 1e-5
    fam = ExactFamily(Family.SECH_TANH, 1.0, -0.2)
    assert np.max(np.abs(first_invariant(sample_exact(fam), fam.params))) <= 1e-5
    g = Grid(10.0, 101)
    assert np.all(first_invariant(zero_profile(g), ModelParams(1, -1, 1)) == 0)


def test_second_invariant_melnikov(bright):
    fam, prof = bright
    I = second_invariant_melnikov(prof, fam.params)
    assert np.max(I) - np.min(I) <= 1e-5


def test_second_invariant_k1():
    fam = ExactFamily(Family.SECH_TANH, 1.0, -1.0, s=-1)
    assert fam.k == pytest.approx(1.0)
    I = second_invariant_k1(sample_exact(fam), fam.params)
    assert np.max(I) - np.min(I) <= 1e-5


def test_second_invariant_wrong_regime(kdv):
    _, prof = kdv
    with pytest.raises(WrongRegime):
        second_invariant_melnikov(prof, ModelParams(1.0, -0.25, 0.5))
    with pytest.raises(WrongRegime):
        second_invariant_k1(prof, ModelParams(1.0, -0.5, 1.0))


# -- conserved quantities --------------------------------------------------------

@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 4.0])
def test_kdv_momentum(c):
    fam = ExactFamily(Family.KDV_UNCOUPLED, c)
    cons = conserved_quantities(sample_exact(fam), fam.params)
    assert cons.Q == 0.0
    assert cons.P == pytest.approx(12 * c**1.5, rel=1e-8)


def test_bright_conserved(bright):
    fam, prof = bright
    cons = conserved_quantities(prof, fam.params)
    x = 0.125
    assert cons.P_U == pytest.approx(96 * x**1.5, rel=1e-6)
    assert cons.Q == pytest.approx(144 * (1 - 4 * x) * math.sqrt(x), rel=1e-6)
    # LS part of the momentum is -(c/2) Q
    assert cons.P == pytest.approx(cons.P_U - 0.5 * fam.c * cons.Q, rel=1e-12)


def test_truncation_warning():
    fam = ExactFamily(Family.KDV_UNCOUPLED, 1.0)
    prof = sample_exact(fam, Grid(5.0, 501))
    with pytest.warns(TruncationWarning):
        cons = conserved_quantities(prof, fam.params)
    assert cons.truncated
