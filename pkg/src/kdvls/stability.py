"""Linearized spectral stability lambda v = J L v, Krein signatures, embedded pairs.

J = diag(d/dxi, [[0, k/2s], [-k/2s, 0]]) is exactly skew-symmetric on the
grid, and L is the block-diagonal Hessian LJ (+) L2. Neutral modes in a
window on the imaginary axis are found by shift-invert Arnoldi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import spectra
from .discretize import Block, DiscreteOperator, assemble, lowest_eigs
from .errors import NumericalFailure, OutOfDomain, ShapeError
from .grid import Grid, default_grid
from .model import ExactFamily, Family, ModelParams, WaveProfile, sample_exact

LOCALIZATION_MASS = 0.99
DEFAULT_NEV = 16
REAL_PART_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class StabilityOperator:
    matrix: sp.csr_matrix
    J: sp.csr_matrix
    L: DiscreteOperator
    grid: Grid
    params: ModelParams
    band_tol: float

    @property
    def bands(self) -> tuple:
        """Continuous spectrum: i R, i[|Omega|, inf), i(-inf, -|Omega|]."""
        w = abs(self.params.Omega)
        return ((-math.inf, math.inf), (w, math.inf), (-math.inf, -w))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class ModeReport:
    eigenvalue: complex
    eigenvector: np.ndarray
    krein: int
    krein_value: float
    embedded: bool
    localization: float

    @property
    def omega(self) -> float:
        return float(self.eigenvalue.imag)


def band_tolerance(p: ModelParams, g: Grid) -> float:
    """Twice the offset of the lowest discrete LS level above |Omega| at A = U = 0.

    At the zero profile the LS block has levels |Omega| + eig(-d^2), so the
    offset is the lowest Dirichlet eigenvalue of the grid Laplacian.
    """
    lap = DiscreteOperator((-g.d2).tocsr(), Block.L1, g, None, (None,),
                           np.arange(g.n_points), np.zeros(g.n_points, int), (0.0,), 1.0)
    return 2.0 * float(lowest_eigs(lap, 1)[0])


def build_stability(profile: WaveProfile, p: ModelParams, g: Grid) -> StabilityOperator:
    if not p.sign_consistent:
        raise OutOfDomain("stability operator needs s = sign(k)")
    L = assemble(Block.FULL, profile, p, g)
    n = g.n_points
    r = p.k / (2.0 * p.s)
    I = sp.identity(n, format="csr")
    J = sp.bmat([[g.d1, None, None], [None, None, r * I], [None, -r * I, None]], format="csr")
    M = (J @ L.matrix).tocsr()
    return StabilityOperator(M, J, L, g, p, band_tolerance(p, g))


def _localization(v: np.ndarray, g: Grid) -> float:
    n = g.n_points
    inside = np.abs(g.nodes) <= 0.5 * g.half_length
    mass = np.abs(v.reshape(3, n)) ** 2
    return float(mass[:, inside].sum() / mass.sum())


def _eigs_near(M: sp.csr_matrix, sigma: complex, nev: int):
    n = M.shape[0]
    nev = min(nev, n - 2)
    try:
        lu = spla.splu((M.astype(complex) - sigma * sp.identity(n, format="csc")).tocsc())
    except RuntimeError as exc:
        raise NumericalFailure("shift-invert factorization failed", sigma=sigma,
                               cause=str(exc)) from exc
    op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=complex)
    try:
        nu, V = spla.eigs(op, k=nev, which="LM", tol=1e-13, maxiter=10 * n)
    except spla.ArpackError as exc:
        raise NumericalFailure("Arnoldi iteration failed", sigma=sigma, cause=str(exc)) from exc
    lam = sigma + 1.0 / nu
    order = np.argsort(np.abs(lam - sigma))
    return lam[order], V[:, order]


def _report(opr: StabilityOperator, lam: complex, v: np.ndarray) -> ModeReport:
    Lm = opr.L.matrix
    v = v / np.linalg.norm(v)
    q = float(np.real(np.vdot(v, Lm @ v)))
    tol = 1e-8 * opr.L.scale
    krein = 0 if abs(q) <= tol else (1 if q > 0 else -1)
    near_axis = abs(lam.real) <= REAL_PART_TOL * max(1.0, abs(lam))
    emb = bool(near_axis and abs(lam.imag) >= abs(opr.params.Omega) - opr.band_tol)
    return ModeReport(complex(lam), v, krein, q, emb, _localization(v, opr.grid))


def eigen_window(opr: StabilityOperator, window, nev: int = DEFAULT_NEV):
    """Eigenpairs of J L with imaginary part inside ``window`` (nearest the centre)."""
    lo, hi = window
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ShapeError(f"window must be a finite interval, got {window}")
    sigma = 0.5j * (lo + hi)
    lam, V = _eigs_near(opr.matrix, sigma, nev)
    keep = (lam.imag >= lo) & (lam.imag <= hi)
    return lam[keep], V[:, keep]


def neutral_modes(opr: StabilityOperator, window, nev: int = DEFAULT_NEV,
                  localized_only: bool = True) -> list:
    """Localized eigenmodes of J L in an imaginary window, with Krein data."""
    lam, V = eigen_window(opr, window, nev)
    out = [_report(opr, l, V[:, i]) for i, l in enumerate(lam)]
    if localized_only:
        out = [m for m in out if m.localization >= LOCALIZATION_MASS]
    return out


def quadruplet_defect(opr: StabilityOperator, window, nev: int = DEFAULT_NEV) -> float:
    """Worst pairing error of lambda -> -lambda and lambda -> conj(lambda).

    Eigenvalues found in ``window`` are matched against those found
    independently in the mirrored window. Only eigenvalues well inside the
    window are matched, so that both searches are sure to contain the partner.
    """
    lo, hi = window
    lam_p, _ = eigen_window(opr, (lo, hi), nev)
    lam_m, _ = eigen_window(opr, (-hi, -lo), nev)
    if lam_p.size == 0 or lam_m.size == 0:
        raise NumericalFailure("no eigenvalues in window", window=window)
    radius = 0.5 * np.max(np.abs(lam_p - 0.5j * (lo + hi)))
    inner = lam_p[np.abs(lam_p - 0.5j * (lo + hi)) <= radius]
    worst = 0.0
    for l in inner:
        d_conj = np.min(np.abs(lam_m - np.conj(l)))
        d_neg = np.min(np.abs(lam_m + l))
        worst = max(worst, float(d_conj), float(d_neg))
    return worst


def ls_pair_frequency(profile: WaveProfile, p: ModelParams, g: Grid) -> float:
    """(k/2) lambda_1(L2): the frequency of the L2-ground-state pair when A = 0."""
    L2 = assemble(Block.L2, profile, p, g)
    return 0.5 * p.k * float(lowest_eigs(L2, 1)[0])


@dataclass(frozen=True)
class EmbeddedPairResult:
    k: float
    c: float
    Omega: float
    omega_estimate: float
    mode: ModeReport | None
    band_tol: float

    @property
    def embedded(self) -> bool:
        return bool(self.mode is not None and self.mode.embedded and self.mode.krein < 0)


def second_bifurcation_omega(c: float, k: float) -> float:
    """-c/16 (sqrt(1+48k) - 3)^2, used for every k > 0 (not only k > 1/6)."""
    return spectra.omega_bif(2, c, k)


def embedded_negative_pair(k: float, c: float = 1.0, n_points: int | None = None,
                           profile: WaveProfile | None = None,
                           params: ModelParams | None = None) -> EmbeddedPairResult:
    """The L2-ground-state neutral pair of J L and whether it is embedded.

    By default the uncoupled soliton at Omega = Omega_c^(2)(k) is used; a
    coupled profile (e.g. a second-pitchfork branch point) can be passed
    instead.
    """
    if not k > 0:
        raise OutOfDomain(f"k must be positive, got {k}")
    if profile is None:
        Om = second_bifurcation_omega(c, k)
        p = ModelParams(c, Om, k)
        g = default_grid(c, Om, n_points)
        profile = sample_exact(ExactFamily(Family.KDV_UNCOUPLED, c), g)
    else:
        if params is None:
            raise ShapeError("params are required with an explicit profile")
        p, g = params, profile.grid
    opr = build_stability(profile, p, g)
    w1 = abs(ls_pair_frequency(profile, p, g))
    half = max(0.02 * w1, 4.0 * opr.band_tol, 1e-3)
    modes = neutral_modes(opr, (w1 - half, w1 + half))
    mode = min(modes, key=lambda m: abs(m.omega - w1)) if modes else None
    return EmbeddedPairResult(k, c, p.Omega, w1, mode, opr.band_tol)


def window_endpoint(lo: float, hi: float, tol: float = 1e-3, c: float = 1.0,
                    n_points: int | None = None) -> float:
    """Bisect for the k at which the embedded flag flips between ``lo`` and ``hi``."""
    f_lo = embedded_negative_pair(lo, c, n_points).embedded
    f_hi = embedded_negative_pair(hi, c, n_points).embedded
    if f_lo == f_hi:
        raise ShapeError(f"embedded flag does not change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if embedded_negative_pair(mid, c, n_points).embedded == f_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


ZERO_CLUSTER = 1e-4


@dataclass(frozen=True)
class KdvBlockSpectrum:
    eigenvalues: np.ndarray
    zero_cluster: np.ndarray
    max_real_part: float

    @property
    def off_axis(self) -> np.ndarray:
        return self.eigenvalues[np.abs(self.eigenvalues.real) > REAL_PART_TOL]


def kdv_block_spectrum(c: float, shifts=(0.0, 0.25, 0.5, 1.0), nev: int = DEFAULT_NEV,
                       g: Grid | None = None, zero_cluster: float = ZERO_CLUSTER
                       ) -> KdvBlockSpectrum:
    """Eigenvalues of d/dxi L1 at the KdV soliton near i*shift for each shift.

    The translational zero eigenvalue is defective (a 2x2 Jordan block), so
    rounding splits it into a cluster of radius ~ sqrt(eps ||d/dxi L1||),
    about 1e-6 on the default grid. Eigenvalues with |lambda| <= zero_cluster
    are reported separately and excluded from ``max_real_part``.
    """
    g = default_grid(c) if g is None else g
    prof = sample_exact(ExactFamily(Family.KDV_UNCOUPLED, c), g)
    L1 = assemble(Block.L1, prof, ModelParams(c, -c, 1.0), g).matrix
    M = (g.d1 @ L1).tocsr()
    out = []
    for s in shifts:
        lam, _ = _eigs_near(M, 1j * s + 1e-3, nev)
        out.append(lam)
    lam = np.concatenate(out)
    zero = np.abs(lam) <= zero_cluster
    rest = lam[~zero]
    worst = float(np.max(np.abs(rest.real))) if rest.size else 0.0
    return KdvBlockSpectrum(rest, lam[zero], worst)


def branch_point_pair(k: float, a: float, c: float = 1.0, j: int = 2,
                      grid: Grid | None = None) -> EmbeddedPairResult:
    """The L2-ground-state pair at a point of the j-th pitchfork branch.

    Once A != 0 the pair couples to the discretized continuum; on the default
    domain a near-collision with a quasi-continuum level can push it off the
    axis as a spurious complex quartet. The default grid therefore doubles the
    domain length at the default node spacing.
    """
    from .continuation import BvpConfig, branch_grid, continue_branch

    if grid is None:
        base = branch_grid(j, c, k)
        grid = Grid(2.0 * base.half_length, 2 * base.n_points - 1, base.order)
    cfg = BvpConfig(grid, parity_a="even" if j == 1 else "odd")
    pts = continue_branch(j, c, k, [a], cfg=cfg, analyze=False)
    if not pts:
        raise NumericalFailure("branch point did not converge", j=j, k=k, a=a)
    pt = pts[0]
    return embedded_negative_pair(k, c, profile=pt.profile, params=pt.params)
