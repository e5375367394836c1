"""Variation-of-parameters solutions of -W'' + 4W - 12 sech^2(y) W = f.

In the scaled variable y = sqrt(c) xi / 2 the operator L1 at the KdV soliton
becomes (c/4)(-d^2/dy^2 + 4 - 12 sech^2 y), so L1^{-1} g^2 = (4/c) W(y) with
f = sech^{2p}(y). The sign of the projection  int g^2 W dy  decides whether a
pitchfork is super- or subcritical.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.integrate import simpson
from scipy.special import beta as beta_fn

from .errors import OutOfDomain, ShapeError
from .spectra import mode_exponent

Y_MAX = 40.0
N_Y = 16001
SWEEP = np.round(np.arange(0.05, 4.0 + 1e-9, 0.025), 10)


class Which(enum.Enum):
    FIRST = 1
    SECOND = 2


def y_grid(y_max: float = Y_MAX, n: int = N_Y) -> np.ndarray:
    m = (n - 1) // 2
    y = (y_max / m) * np.arange(-m, m + 1, dtype=float)
    y[m] = 0.0
    return y


def homogeneous_pair(y):
    """Decaying odd solution W1 and growing even solution W2, Wronskian 1."""
    y = np.asarray(y, dtype=float)
    t, sech2 = np.tanh(y), np.cosh(y) ** -2.0
    W1 = t * sech2
    W2 = 0.625 + 0.25 * np.cosh(y) ** 2 + 1.875 * sech2 * (y * t - 1.0)
    return W1, W2


def homogeneous_pair_derivs(y):
    y = np.asarray(y, dtype=float)
    t, sech2 = np.tanh(y), np.cosh(y) ** -2.0
    dW1 = sech2 * (sech2 - 2.0 * t**2)
    # d/dy [sech^2 (y t - 1)] = sech^2 (t + y sech^2) - 2 t sech^2 (y t - 1)
    dW2 = (0.5 * np.cosh(y) * np.sinh(y)
           + 1.875 * (sech2 * (t + y * sech2) - 2.0 * t * sech2 * (y * t - 1.0)))
    return dW1, dW2


def wronskian(y):
    W1, W2 = homogeneous_pair(y)
    dW1, dW2 = homogeneous_pair_derivs(y)
    return W1 * dW2 - dW1 * W2


def _check_grid(y):
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 5 or n % 2 == 0:
        raise ShapeError("y grid must have an odd number (>= 5) of nodes")
    m = (n - 1) // 2
    if y[m] != 0.0 or not np.allclose(y, -y[::-1], rtol=0, atol=1e-12 * abs(y[-1])):
        raise ShapeError("y grid must be symmetric about 0 with a node at 0")
    h = np.diff(y)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ShapeError("y grid must be uniform")
    return y, m, float(h[0])


def _solve_even(forcing, y):
    """Even decaying solution for an even forcing sampled on ``y``.

    Built on y >= 0 as W1(y) int_0^y W2 f + W2(y) int_y^inf W1 f, the tail
    integral replacing int_{-inf}^y to avoid cancelling e^{2y} growth.
    """
    y, m, h = _check_grid(y)
    yy = y[m:]
    f = forcing(yy)
    W1, W2 = homogeneous_pair(yy)
    head = cumulative_cubic(W2 * f, h)
    tail = cumulative_cubic((W1 * f)[::-1], h)[::-1]
    half = W1 * head + W2 * tail
    return np.concatenate([half[:0:-1], half])


def cumulative_cubic(f: np.ndarray, h: float) -> np.ndarray:
    """Running integral from the first node by four-point (cubic) interval rules.

    Fourth-order like cumulative Simpson, but every interval uses the same
    rule, so the error is smooth from node to node (cumulative Simpson's error
    alternates, which second differences of W amplify by 1/h^2).
    """
    f = np.asarray(f, dtype=float)
    if f.size < 4:
        raise ShapeError("need at least four nodes")
    seg = np.empty(f.size - 1)
    seg[1:-1] = (-f[:-3] + 13.0 * f[1:-2] + 13.0 * f[2:-1] - f[3:]) / 24.0
    seg[0] = (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
    seg[-1] = (9.0 * f[-1] + 19.0 * f[-2] - 5.0 * f[-3] + f[-4]) / 24.0
    return h * np.concatenate([[0.0], np.cumsum(seg)])


def _check_exponent(x, name):
    if not x > 0:
        raise OutOfDomain(f"exponent {name} must be positive, got {x}")


def forcing_first(p):
    return lambda y: np.cosh(y) ** (-2.0 * p)


def forcing_second(q):
    return lambda y: np.cosh(y) ** (-2.0 * q) * np.tanh(y) ** 2


def solve_W(p: float, y=None) -> np.ndarray:
    _check_exponent(p, "p")
    y = y_grid() if y is None else y
    return _solve_even(forcing_first(p), y)


def solve_Wtilde(q: float, y=None) -> np.ndarray:
    _check_exponent(q, "q")
    y = y_grid() if y is None else y
    return _solve_even(forcing_second(q), y)


def projection_integral(p: float, y=None) -> float:
    """int g^2 W dy for g = sech^p; equals (c^{3/2}/8) <g^2, L1^{-1} g^2>."""
    y = y_grid() if y is None else np.asarray(y, dtype=float)
    W = solve_W(p, y)
    return float(simpson(forcing_first(p)(y) * W, x=y))


def projection_integral_tilde(q: float, y=None) -> float:
    """int gt^2 Wt dy for gt = sech^q tanh."""
    y = y_grid() if y is None else np.asarray(y, dtype=float)
    W = solve_Wtilde(q, y)
    return float(simpson(forcing_second(q)(y) * W, x=y))


def projection(which: Which, exponent: float, y=None) -> float:
    which = Which(which)
    if which is Which.FIRST:
        return projection_integral(exponent, y)
    return projection_integral_tilde(exponent, y)


def projection_curve(which: Which, exponents=SWEEP, max_workers: int | None = None):
    """Projection integral over a sweep of exponents.

    Evaluations are independent; threaded and sequential sweeps agree bitwise.
    """
    exps = np.asarray(exponents, dtype=float)
    if max_workers is None or max_workers <= 1:
        vals = [projection(which, e) for e in exps]
    else:
        with ThreadPoolExecutor(max_workers) as pool:
            vals = list(pool.map(lambda e: projection(which, e), exps))
    return exps, np.array(vals)


def sign_changes(exps, vals):
    """Abscissae of sign changes along a sampled curve (linear interpolation)."""
    exps, vals = np.asarray(exps), np.asarray(vals)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return [float(exps[i] - vals[i] * (exps[i + 1] - exps[i]) / (vals[i + 1] - vals[i]))
            for i in idx]


# -- norms and leading-order predictions ---------------------------------

def sech_power_integral(p: float) -> float:
    """int sech^{2p}(y) dy = B(p, 1/2)."""
    return float(beta_fn(p, 0.5))


def mode_norm_sq(j: int, c: float, k: float, xi=None) -> float:
    """||g_j||^2 in xi-units; by Simpson quadrature when a grid is given."""
    e = mode_exponent(j, k)
    _check_exponent(e, "mode exponent")
    if xi is not None:
        xi = np.asarray(xi, dtype=float)
        y = 0.5 * math.sqrt(c) * xi
        f = forcing_first(e)(y) if j == 1 else forcing_second(e)(y)
        return float(simpson(f, x=xi))
    base = beta_fn(e, 0.5) if j == 1 else beta_fn(e, 1.5)
    return 2.0 / math.sqrt(c) * float(base)


def inner_g2_L1inv_g2(j: int, c: float, k: float) -> float:
    """<g_j^2, L1^{-1} g_j^2> in xi-units."""
    e = mode_exponent(j, k)
    return 8.0 / c**1.5 * projection(Which(j), e)


def _xi_grid_for_norm(c):
    return y_grid() * 2.0 / math.sqrt(c)


def delta_omega_prediction(a: float, c: float, k: float, which: Which = Which.FIRST) -> float:
    """Leading-order shift Omega - Omega_c^(j) = -k a^2 <g^2, L1^{-1} g^2>/||g||^2."""
    which = Which(which)
    if which is Which.FIRST and not k > 0:
        raise OutOfDomain("first pitchfork needs k > 0")
    if which is Which.SECOND and not k > 1.0 / 6.0:
        raise OutOfDomain("second pitchfork needs k > 1/6")
    if a == 0:
        return 0.0
    j = which.value
    norm = mode_norm_sq(j, c, k, _xi_grid_for_norm(c))
    return -k * a**2 * inner_g2_L1inv_g2(j, c, k) / norm


def lambda2_prediction(which: Which, c: float, k: float) -> float:
    """Coefficient of a^2 in the split kernel eigenvalue of L_J."""
    which = Which(which)
    j = which.value
    norm = mode_norm_sq(j, c, k, _xi_grid_for_norm(c))
    return -4.0 * inner_g2_L1inv_g2(j, c, k) / norm
