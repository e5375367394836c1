"""Closed-form spectral data of sech^2 wells and the bifurcation ladder."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoBifurcations, OutOfDomain

RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class PTSpectrum:
    """Bound states of -d^2/dx^2 - gamma sech^2(x)."""

    gamma: float
    eigenvalues: tuple
    resonance_at_zero: bool

    @property
    def count(self) -> int:
        return len(self.eigenvalues)


def poschl_teller_spectrum(gamma: float) -> PTSpectrum:
    """Eigenvalues -(nu - n)^2, nu = (sqrt(1 + 4 gamma) - 1)/2, n = 0..floor(nu).

    A zero-energy level (nu an integer) is a resonance, not an eigenvalue.
    """
    if not gamma > 0:
        raise OutOfDomain(f"gamma must be positive, got {gamma}")
    nu = 0.5 * (math.sqrt(1.0 + 4.0 * gamma) - 1.0)
    nearest = round(nu)
    resonance = abs(nu - nearest) <= RESONANCE_TOL * max(1.0, nu)
    top = nearest if resonance else math.floor(nu)
    eigs = []
    for n in range(top + 1):
        if resonance and n == nearest:
            continue
        eigs.append(-(nu - n) ** 2)
    return PTSpectrum(gamma, tuple(sorted(eigs)), resonance)


def root48(k: float) -> float:
    return math.sqrt(1.0 + 48.0 * k)


def p_of(k: float) -> float:
    """Exponent of the ground state of L2 at the first bifurcation."""
    return 0.5 * (root48(k) - 1.0)


def q_of(k: float) -> float:
    """Exponent of the first excited state of L2 at the second bifurcation."""
    return 0.5 * (root48(k) - 3.0)


def mode_exponent(j: int, k: float) -> float:
    return 0.5 * (root48(k) - 2 * j + 1)


def omega_bif(j: int, c: float, k: float) -> float:
    """Pitchfork point Omega_c^(j) = -c/16 (sqrt(1+48k) - 2j + 1)^2."""
    return -c / 16.0 * (root48(k) - 2 * j + 1) ** 2


def omega_exact_tanh(k: float, c: float) -> float:
    """Omega at which the sech-tanh family exists for coupling k."""
    return -c * k / (3.0 - 2.0 * k)


@dataclass(frozen=True)
class BifurcationLadder:
    c: float
    k: float
    J: int
    points: tuple
    exponents: tuple


def bifurcation_ladder(c: float, k: float) -> BifurcationLadder:
    if not c > 0:
        raise OutOfDomain(f"c must be positive, got {c}")
    if not k > 0:
        raise NoBifurcations(f"no pitchfork points for k={k} <= 0")
    # largest J with k > J(J-1)/12; equality means the J-th state is a resonance
    J = 1
    while k > (J + 1) * J / 12.0 * (1 + 1e-14):
        J += 1
    points = tuple(omega_bif(j, c, k) for j in range(1, J + 1))
    exps = tuple(mode_exponent(j, k) for j in range(1, J + 1))
    return BifurcationLadder(c, k, J, points, exps)


def mode_g(c: float, k: float, xi):
    """Kernel of L2 at Omega_c^(1): sech^p(sqrt(c) xi / 2)."""
    if not k > 0:
        raise OutOfDomain(f"g needs k > 0, got {k}")
    y = 0.5 * math.sqrt(c) * np.asarray(xi, dtype=float)
    return np.cosh(y) ** (-p_of(k))


def mode_gtilde(c: float, k: float, xi):
    """Kernel of L2 at Omega_c^(2): sech^q(sqrt(c) xi / 2) tanh(sqrt(c) xi / 2)."""
    if not k > 1.0 / 6.0:
        raise OutOfDomain(f"g-tilde needs k > 1/6, got {k}")
    y = 0.5 * math.sqrt(c) * np.asarray(xi, dtype=float)
    return np.cosh(y) ** (-q_of(k)) * np.tanh(y)


def kernel_mode(j: int, c: float, k: float, xi):
    if j == 1:
        return mode_g(c, k, xi)
    if j == 2:
        return mode_gtilde(c, k, xi)
    raise OutOfDomain("closed-form kernel modes exist for j = 1, 2 only")


K_MINUS = (8.0 - 5.0 * math.sqrt(2.0)) / 12.0
K_PLUS = (8.0 + 5.0 * math.sqrt(2.0)) / 12.0


def instability_k_window() -> tuple[float, float]:
    """Couplings for which the ground-state LS pair is embedded at the second pitchfork."""
    return K_MINUS, K_PLUS


def in_instability_window(k: float) -> bool:
    return K_MINUS < k < K_PLUS


def embedding_margin(k: float, c: float = 1.0) -> float:
    """|Omega_c^(1)| - 2 |Omega_c^(2)|; positive exactly inside the k-window."""
    return abs(omega_bif(1, c, k)) - 2.0 * abs(omega_bif(2, c, k))
