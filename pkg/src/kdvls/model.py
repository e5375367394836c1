"""Model parameters, exact solitary-wave families, residuals and invariants.

Traveling waves of the normalized KdV-LS system satisfy

    U'' - c U + U**2/2 + s A**2 = 0,
    A'' + (Omega + k U) A = 0,

with c > 0 the speed, Omega < 0 the shifted frequency, k the coupling and
s = +-1.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (InvalidCoefficients, InvalidFamily, InvalidParams,
                     ShapeError, TruncationWarning, WrongRegime)
from .grid import Grid, default_grid

BOUNDARY_TOL = 1e-10
REGIME_TOL = 1e-12


@dataclass(frozen=True)
class PhysicalCoefficients:
    """Coefficients of u_t + alpha u u_x + beta u_xxx + gamma (|psi|^2)_x = 0,
    i psi_t + kappa psi_xx + sigma u psi = 0."""

    alpha: float
    beta: float
    gamma: float
    kappa: float
    sigma: float


def normalize_coefficients(pc: PhysicalCoefficients) -> tuple[float, int]:
    """Scale the physical system to normalized form; returns ``(k, s)``."""
    vals = (pc.alpha, pc.beta, pc.gamma, pc.kappa, pc.sigma)
    if any(v == 0 for v in vals):
        raise InvalidCoefficients(f"all coefficients must be nonzero, got {vals}")
    k = pc.sigma * pc.beta / (pc.alpha * pc.kappa)
    s = 1 if pc.alpha * pc.gamma > 0 else -1
    return k, s


@dataclass(frozen=True)
class ModelParams:
    """Parameters (c, Omega, k, s) of the traveling-wave problem.

    ``s`` defaults to sign(k). Setting ``enforce_sign=False`` admits s != sign(k),
    which some exact families need; the Hessian-based tools reject such
    parameters.
    """

    c: float
    Omega: float
    k: float
    s: int | None = None
    enforce_sign: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidParams(f"wave speed must be positive, got c={self.c}")
        if not self.Omega < 0:
            raise InvalidParams(f"Omega must be negative, got {self.Omega}")
        if self.k == 0:
            raise InvalidParams("coupling k must be nonzero")
        sign_k = 1 if self.k > 0 else -1
        if self.s is None:
            object.__setattr__(self, "s", sign_k)
        if self.s not in (1, -1):
            raise InvalidParams(f"s must be +1 or -1, got {self.s}")
        if self.enforce_sign and self.s != sign_k:
            raise InvalidParams(f"s = sign(k) is required (k={self.k}, s={self.s})")

    @property
    def omega(self) -> float:
        """Unshifted frequency, Omega - c**2/4."""
        return self.Omega - self.c**2 / 4

    @property
    def sign_consistent(self) -> bool:
        return self.s == (1 if self.k > 0 else -1)

    def replace(self, **changes) -> "ModelParams":
        kw = dict(c=self.c, Omega=self.Omega, k=self.k, s=self.s,
                  enforce_sign=self.enforce_sign)
        kw.update(changes)
        return ModelParams(**kw)


class Family(enum.Enum):
    KDV_UNCOUPLED = "kdv"
    SECH_BRIGHT = "bright"
    SECH_TANH = "tanh"


@dataclass(frozen=True)
class ExactFamily:
    """A closed-form solution family.

    KDV_UNCOUPLED works for any (Omega, k). SECH_BRIGHT fixes k = 1/6.
    SECH_TANH derives k = -3 Omega / (c - 2 Omega). Both coupled families need
    s (c + 4 Omega) >= 0; equality is the bifurcation point where A = 0.
    """

    family: Family
    c: float
    Omega: float | None = None
    k: float | None = None
    s: int = 1

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if not self.c > 0:
            raise InvalidFamily(f"c must be positive, got {self.c}")
        if fam is Family.KDV_UNCOUPLED:
            if self.Omega is None:
                object.__setattr__(self, "Omega", -self.c)
            if self.k is None:
                object.__setattr__(self, "k", float(self.s))
            return
        if self.Omega is None or not self.Omega < 0:
            raise InvalidFamily(f"{fam.name} needs Omega < 0, got {self.Omega}")
        if fam is Family.SECH_BRIGHT:
            if self.k is None:
                object.__setattr__(self, "k", 1.0 / 6.0)
            elif abs(self.k - 1.0 / 6.0) > REGIME_TOL:
                raise InvalidFamily(f"SECH_BRIGHT requires k = 1/6, got {self.k}")
        else:
            derived = -3.0 * self.Omega / (self.c - 2.0 * self.Omega)
            if self.k is not None and abs(self.k - derived) > 1e-9:
                raise InvalidFamily(f"SECH_TANH fixes k = {derived}, got {self.k}")
            object.__setattr__(self, "k", derived)
        if self.s * (self.c + 4.0 * self.Omega) < 0:
            raise InvalidFamily(
                f"{fam.name} requires s(c + 4 Omega) >= 0 "
                f"(s={self.s}, c={self.c}, Omega={self.Omega})")

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.c, self.Omega, self.k, self.s, enforce_sign=False)


def eval_exact(fam: ExactFamily, xi):
    """Closed-form (U, A) of an exact family, centred at xi = 0."""
    xi = np.asarray(xi, dtype=float)
    c, Om, s = fam.c, fam.Omega, fam.s
    if fam.family is Family.KDV_UNCOUPLED:
        U = 3.0 * c / np.cosh(0.5 * math.sqrt(c) * xi) ** 2
        return U, np.zeros_like(U)
    mu = math.sqrt(-Om)
    sech = 1.0 / np.cosh(mu * xi)
    amp_sq = max(s * (c + 4.0 * Om), 0.0)
    if fam.family is Family.SECH_BRIGHT:
        U = -12.0 * Om * sech**2
        A = math.sqrt(-12.0 * Om * amp_sq) * sech
    else:
        U = 2.0 * (c - 2.0 * Om) * sech**2
        A = math.sqrt(2.0 * amp_sq * (c - 2.0 * Om)) * sech * np.tanh(mu * xi)
    return U, A


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """Sampled (U, A) on a grid with declared parities.

    ``history`` holds the Newton residual sequence when the profile was solved.
    """

    grid: Grid
    U: np.ndarray
    A: np.ndarray
    parity_u: str = "even"
    parity_a: str = "even"
    residual_norm: float = 0.0
    history: tuple = ()

    def __post_init__(self):
        self.grid.check(self.U, self.A)
        if self.parity_u != "even":
            raise ShapeError("U is always even")
        if self.parity_a not in ("even", "odd", "zero"):
            raise ShapeError(f"unknown A parity {self.parity_a!r}")

    @property
    def xi(self) -> np.ndarray:
        return self.grid.nodes

    def boundary_max(self) -> float:
        return float(max(abs(self.U[0]), abs(self.U[-1]), abs(self.A[0]), abs(self.A[-1])))


def family_parity(fam: ExactFamily) -> str:
    if fam.family is Family.KDV_UNCOUPLED or fam.s * (fam.c + 4 * fam.Omega) == 0:
        return "zero"
    return "even" if fam.family is Family.SECH_BRIGHT else "odd"


def sample_exact(fam: ExactFamily, grid: Grid | None = None) -> WaveProfile:
    """Exact family on a grid (default: ``default_grid(c, Omega)``)."""
    if grid is None:
        om = None if fam.family is Family.KDV_UNCOUPLED else fam.Omega
        grid = default_grid(fam.c, om)
    U, A = eval_exact(fam, grid.nodes)
    prof = WaveProfile(grid, U, A, "even", family_parity(fam))
    _, _, norm = residual_ode(prof, fam.params)
    return WaveProfile(grid, U, A, "even", prof.parity_a, norm)


def zero_profile(grid: Grid) -> WaveProfile:
    z = np.zeros(grid.n_points)
    return WaveProfile(grid, z, z.copy(), "even", "zero")


def residual_ode(profile: WaveProfile, p: ModelParams):
    """Pointwise residuals of the traveling-wave ODEs and their max norm."""
    g = profile.grid
    U, A = profile.U, profile.A
    g.check(U, A)
    rU = g.deriv2(U) - p.c * U + 0.5 * U**2 + p.s * A**2
    rA = g.deriv2(A) + (p.Omega + p.k * U) * A
    norm = float(max(np.max(np.abs(rU)), np.max(np.abs(rA))))
    return rU, rA, norm


def first_invariant(profile: WaveProfile, p: ModelParams) -> np.ndarray:
    """Pointwise Hamiltonian of the traveling-wave system (zero for decaying waves)."""
    g = profile.grid
    U, A = profile.U, profile.A
    Up, Ap = g.deriv(U), g.deriv(A)
    return (0.5 * Up**2 - 0.5 * p.c * U**2 + U**3 / 6.0 + p.s / p.k * Ap**2
            + p.s * U * A**2 + p.Omega * p.s / p.k * A**2)


def second_invariant_melnikov(profile: WaveProfile, p: ModelParams) -> np.ndarray:
    """Second invariant of the integrable k = 1/6 case."""
    if abs(p.k - 1.0 / 6.0) > REGIME_TOL:
        raise WrongRegime(f"invariant requires k = 1/6, got k={p.k}")
    g = profile.grid
    U, A = profile.U, profile.A
    Up, Ap = g.deriv(U), g.deriv(A)
    c, Om, s = p.c, p.Omega, p.s
    return (A * Ap * Up - U * Ap**2 + A**2 * (Om * U + U**2 / 12.0 + s * A**2 / 4.0)
            + 3.0 * (c + 4.0 * Om) * (Ap**2 + Om * A**2))


def second_invariant_k1(profile: WaveProfile, p: ModelParams) -> np.ndarray:
    """Second invariant of the integrable case k = 1, Omega = -c."""
    if abs(p.k - 1.0) > REGIME_TOL or abs(p.Omega + p.c) > REGIME_TOL * max(1.0, p.c):
        raise WrongRegime(f"invariant requires k = 1 and Omega = -c, got k={p.k}, Omega={p.Omega}")
    g = profile.grid
    U, A = profile.U, profile.A
    return g.deriv(A) * g.deriv(U) - p.c * A * U + p.s * A**3 / 3.0 + 0.5 * A * U**2


@dataclass(frozen=True)
class Conserved:
    Q: float
    P: float
    H: float
    P_U: float
    truncated: bool = False


def conserved_quantities(profile: WaveProfile, p: ModelParams) -> Conserved:
    """Mass, momentum and energy of the wave (U, A exp(i c xi / 2)).

    ``P_U`` is the KdV part of the momentum, ``P = P_U - (c s / 2k) int A^2``.
    Emits :class:`TruncationWarning` when the profile has not decayed.
    """
    g = profile.grid
    U, A = profile.U, profile.A
    truncated = profile.boundary_max() > BOUNDARY_TOL
    if truncated:
        warnings.warn(f"profile boundary value {profile.boundary_max():.3g} exceeds "
                      f"{BOUNDARY_TOL:g}", TruncationWarning, stacklevel=2)
    a2 = g.integrate(A**2)
    Q = p.s / p.k * a2
    P_U = 0.5 * g.integrate(U**2)
    P = P_U - 0.5 * p.c * p.s / p.k * a2
    Up, Ap = g.deriv(U), g.deriv(A)
    H = 0.5 * g.integrate(Up**2 - U**3 / 3.0
                          + 2.0 * p.s / p.k * (Ap**2 + 0.25 * p.c**2 * A**2)
                          - 2.0 * p.s * U * A**2)
    return Conserved(Q, P, H, P_U, truncated)
