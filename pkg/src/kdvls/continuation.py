"""Newton solution of the traveling-wave BVP and continuation of pitchfork branches.

Unknowns live on reflection-parity half grids (U even; A even or odd), which
removes the translational kernel. The residual is arranged as

    G1 = -(U'' - cU + U^2/2 + sA^2),   G2 = -(2s/k)(A'' + (Omega + kU) A),

so that its Jacobian is exactly the symmetric Hessian block L_J.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import simpson

from . import greens, spectra
from .discretize import (Block, DMatrix, SpectrumReport, assemble, constrained_index,
                         low_spectrum, lowest_eigs)
from .errors import NoConvergence, OutOfDomain, ShapeError, TrivialBranch
from .grid import Grid, default_grid
from .model import (Conserved, ExactFamily, Family, ModelParams, WaveProfile,
                    conserved_quantities, residual_ode, sample_exact)

TRIVIAL_TOL = 1e-8
CONSTRAINT_TOL = 1e-12
D_REL_STEP = 1e-4
D_STEP_FRACTION = 0.05


@dataclass(frozen=True)
class BvpConfig:
    grid: Grid
    newton_tol: float = 1e-10
    max_iter: int = 50
    damping: float = 1.0
    parity_a: str = "even"

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ShapeError("newton_tol must be positive")
        if self.max_iter < 1:
            raise ShapeError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ShapeError("damping must lie in (0, 1]")
        if self.parity_a not in ("even", "odd"):
            raise ShapeError(f"parity_a must be 'even' or 'odd', got {self.parity_a!r}")


def _residual_G(U, A, p: ModelParams, g: Grid):
    G1 = -(g.deriv2(U) - p.c * U + 0.5 * U**2 + p.s * A**2)
    G2 = -(2.0 * p.s / p.k) * (g.deriv2(A) + (p.Omega + p.k * U) * A)
    return G1, G2


def _folds(g: Grid, parity_a: str):
    return g.fold("even", orthonormal=True), g.fold(parity_a, orthonormal=True)


def _check_initial(initial: WaveProfile, cfg: BvpConfig):
    if initial.grid != cfg.grid:
        raise ShapeError("initial profile is not on the configured grid")
    if initial.parity_a not in ("zero", cfg.parity_a):
        raise ShapeError(f"initial A parity {initial.parity_a!r} does not match "
                         f"configured parity {cfg.parity_a!r}")


def _finish(U, A, p, cfg, history, warn_trivial=True):
    g = cfg.grid
    trivial = float(np.max(np.abs(A))) <= TRIVIAL_TOL * max(1.0, float(np.max(np.abs(U))))
    if trivial:
        A = np.zeros_like(A)
    prof = WaveProfile(g, U, A, "even", "zero" if trivial else cfg.parity_a)
    norm = residual_ode(prof, p)[2]
    prof = replace(prof, residual_norm=norm, history=tuple(history))
    if trivial and warn_trivial:
        warnings.warn("Newton iteration converged to the uncoupled branch A = 0",
                      TrivialBranch, stacklevel=3)
    return prof


def solve_profile(p: ModelParams, initial: WaveProfile, cfg: BvpConfig,
                  warn_trivial: bool = True) -> WaveProfile:
    """Newton iteration for (U, A) at fixed (c, Omega, k, s).

    The returned profile's ``history`` is the ode-residual max-norm before
    each Newton step and after the last one.
    """
    if not p.sign_consistent:
        raise OutOfDomain("solve_profile needs s = sign(k)")
    _check_initial(initial, cfg)
    g = cfg.grid
    EU, EA = _folds(g, cfg.parity_a)
    xu, xa = EU.T @ initial.U, EA.T @ initial.A
    history = []
    for _ in range(cfg.max_iter + 1):
        U, A = EU @ xu, EA @ xa
        prof = WaveProfile(g, U, A, "even", cfg.parity_a)
        r = residual_ode(prof, p)[2]
        history.append(r)
        if not np.isfinite(r):
            break
        if r <= cfg.newton_tol:
            return _finish(U, A, p, cfg, history, warn_trivial)
        if len(history) > cfg.max_iter:
            break
        J = assemble(Block.LJ, prof, p, g, parity=("even", cfg.parity_a)).matrix
        G1, G2 = _residual_G(U, A, p, g)
        rhs = np.concatenate([EU.T @ G1, EA.T @ G2])
        dx = spla.spsolve(J.tocsc(), -rhs)
        xu = xu + cfg.damping * dx[:xu.size]
        xa = xa + cfg.damping * dx[xu.size:]
    raise NoConvergence(f"Newton did not reach {cfg.newton_tol:g} in {cfg.max_iter} steps",
                        last_residual=history[-1], history=tuple(history))


# -- branch continuation ----------------------------------------------------

@dataclass(frozen=True)
class Classification:
    kind: str
    n_hat: int
    z_hat: int

    def __str__(self):
        return "MINIMIZER" if self.kind == "MINIMIZER" else f"SADDLE({self.n_hat})"


@dataclass(frozen=True, eq=False)
class BranchPoint:
    j: int
    a: float
    params: ModelParams
    profile: WaveProfile
    conserved: Conserved
    spectrum_lj: SpectrumReport | None = None
    spectrum_full: SpectrumReport | None = None
    D: DMatrix | None = None
    classification: Classification | None = None
    amplitude: float = field(default=float("nan"))


def branch_mode(j: int, c: float, k: float, xi):
    return spectra.kernel_mode(j, c, k, xi)


def default_a_values(c: float) -> np.ndarray:
    return np.round(np.arange(1, 21) * 0.01, 10) * math.sqrt(c)


def branch_grid(j: int, c: float, k: float, n_points: int | None = None) -> Grid:
    return default_grid(c, spectra.omega_bif(j, c, k), n_points)


def _validate_branch(j, c, k):
    if j not in (1, 2):
        raise OutOfDomain(f"closed-form kernel modes exist for j = 1, 2 only, got {j}")
    if not c > 0:
        raise OutOfDomain(f"c must be positive, got {c}")
    if j == 1 and not k > 0:
        raise OutOfDomain("first pitchfork needs k > 0")
    if j == 2 and not k > 1.0 / 6.0:
        raise OutOfDomain("second pitchfork needs k > 1/6")


def kdv_profile(c: float, g: Grid) -> WaveProfile:
    return sample_exact(ExactFamily(Family.KDV_UNCOUPLED, c), g)


def w2_correction(j: int, c: float, k: float, g: Grid) -> np.ndarray:
    """w2 = s L1^{-1} g_j^2 by an even-subspace solve at the KdV soliton."""
    p = ModelParams(c, spectra.omega_bif(j, c, k), k)
    U0 = kdv_profile(c, g)
    L1 = assemble(Block.L1, U0, p, g, parity="even")
    gj = branch_mode(j, c, k, g.nodes)
    return p.s * L1.solve_full(gj**2)


def lyapunov_schmidt_guess(j: int, c: float, k: float, a: float, g: Grid, parity_a: str):
    """Leading-order branch point: U0 + a^2 w2, a g_j, Omega_c^(j) + delta Omega(a)."""
    U0 = kdv_profile(c, g).U
    U = U0 + a**2 * w2_correction(j, c, k, g)
    A = a * branch_mode(j, c, k, g.nodes)
    Om = spectra.omega_bif(j, c, k) + greens.delta_omega_prediction(a, c, k, greens.Which(j))
    return U, A, Om


def _amplitude(A, gj, g: Grid):
    return g.inner(gj, A) / g.inner(gj, gj)


def _solve_augmented(j, c, k, a, U, A, Om, cfg: BvpConfig):
    g = cfg.grid
    EU, EA = _folds(g, cfg.parity_a)
    gj = branch_mode(j, c, k, g.nodes)
    w = np.full(g.n_points, 1.0)
    # Simpson weights so that the constraint matches Grid.inner exactly
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w *= g.h / 3.0
    norm = float(w @ (gj * gj))
    crow = (EA.T @ (w * gj)) / norm
    xu, xa = EU.T @ U, EA.T @ A
    history = []
    for _ in range(cfg.max_iter + 1):
        U, A = EU @ xu, EA @ xa
        if not (np.isfinite(Om) and Om < 0):
            history.append(float("inf"))
            break
        p = ModelParams(c, Om, k)
        prof = WaveProfile(g, U, A, "even", cfg.parity_a)
        r = residual_ode(prof, p)[2]
        cres = float(crow @ xa) - a
        history.append(r)
        if not np.isfinite(r):
            break
        if r <= cfg.newton_tol and abs(cres) <= CONSTRAINT_TOL * max(1.0, abs(a)):
            return U, A, Om, history
        if len(history) > cfg.max_iter:
            break
        J = assemble(Block.LJ, prof, p, g, parity=("even", cfg.parity_a)).matrix
        G1, G2 = _residual_G(U, A, p, g)
        dG_dOm = np.concatenate([np.zeros(xu.size), EA.T @ (-(2.0 * p.s / p.k) * A)])
        row = sp.hstack([sp.csr_matrix((1, xu.size)), sp.csr_matrix(crow[None, :])])
        M = sp.bmat([[J, sp.csr_matrix(dG_dOm[:, None])], [row, None]], format="csc")
        rhs = np.concatenate([EU.T @ G1, EA.T @ G2, [cres]])
        dx = spla.spsolve(M, -rhs)
        n_u = xu.size
        xu = xu + cfg.damping * dx[:n_u]
        xa = xa + cfg.damping * dx[n_u:-1]
        Om = Om + cfg.damping * dx[-1]
    raise NoConvergence(f"augmented Newton failed at a={a}", last_residual=history[-1],
                        history=tuple(history), a=a)


def continue_branch(j: int, c: float, k: float, a_values=None, cfg: BvpConfig | None = None,
                    analyze: bool = True, m: int = 8) -> list:
    """Amplitude-parameterized branch from the j-th pitchfork of the KdV soliton.

    Each point solves the ode system together with <g_j, A> = a ||g_j||^2
    for (U, A, Omega). A failure at some amplitude ends the sweep; the
    completed prefix is returned.
    """
    _validate_branch(j, c, k)
    parity_a = "even" if j == 1 else "odd"
    if cfg is None:
        cfg = BvpConfig(branch_grid(j, c, k), parity_a=parity_a)
    elif cfg.parity_a != parity_a:
        raise ShapeError(f"branch j={j} needs A parity {parity_a!r}, config has {cfg.parity_a!r}")
    a_values = default_a_values(c) if a_values is None else np.asarray(a_values, dtype=float)
    g = cfg.grid
    gj = branch_mode(j, c, k, g.nodes)
    points, states = [], []
    for a in a_values:
        if len(states) >= 2:
            (a0, X0), (a1, X1) = states[-2], states[-1]
            t = (a - a1) / (a1 - a0)
            guess = tuple(x1 + t * (x1 - x0) for x0, x1 in zip(X0, X1))
        else:
            guess = lyapunov_schmidt_guess(j, c, k, a, g, parity_a)
        try:
            U, A, Om, hist = _solve_augmented(j, c, k, a, *guess, cfg)
        except NoConvergence:
            break
        states.append((a, (U, A, Om)))
        p = ModelParams(c, Om, k)
        prof = WaveProfile(g, U, A, "even", parity_a)
        prof = replace(prof, residual_norm=residual_ode(prof, p)[2], history=tuple(hist))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cons = conserved_quantities(prof, p)
        pt = BranchPoint(j, float(a), p, prof, cons, amplitude=_amplitude(A, gj, g))
        if analyze:
            pt = analyze_point(pt, cfg, m)
        points.append(pt)
    return points


def analyze_point(pt: BranchPoint, cfg: BvpConfig, m: int = 8) -> BranchPoint:
    """Attach L_J / full-Hessian spectra, the numerical D matrix and the classification."""
    g, p = cfg.grid, pt.params
    slj = low_spectrum(assemble(Block.LJ, pt.profile, p, g), m)
    sl2 = low_spectrum(assemble(Block.L2, pt.profile, p, g), m)
    w = np.sort(np.concatenate([slj.eigenvalues, sl2.eigenvalues]))[:m]
    tol = max(slj.tol_zero, sl2.tol_zero)
    sfull = SpectrumReport(w, int(np.sum(w < -tol)), int(np.sum(np.abs(w) <= tol)), tol,
                           min(slj.edge, sl2.edge), slj.quasi_continuum_floor,
                           slj.spurious_edge_note)
    D = d_matrix_numeric(pt, cfg)
    n_hat, z_hat = constrained_index(sfull, D)
    cls = Classification("MINIMIZER" if n_hat == 0 else "SADDLE", n_hat, z_hat)
    return replace(pt, spectrum_lj=slj, spectrum_full=sfull, D=D, classification=cls)


def classify(point: BranchPoint) -> Classification:
    if point.classification is not None:
        return point.classification
    if point.spectrum_full is None or point.D is None:
        raise ShapeError("branch point has no spectrum / D matrix; use analyze_point")
    n_hat, z_hat = constrained_index(point.spectrum_full, point.D)
    return Classification("MINIMIZER" if n_hat == 0 else "SADDLE", n_hat, z_hat)


def d_matrix_numeric(pt: BranchPoint, cfg: BvpConfig, rel_step: float = D_REL_STEP) -> DMatrix:
    """Central differences of (P(U,0), Q) in (c, |Omega|) by fixed-parameter solves.

    The relative step is ``rel_step`` unless that would move the pitchfork point
    by more than a fraction of the distance |Omega - Omega_c|, in which case it
    is reduced so the perturbed solves stay on the branch.
    """
    p = pt.params
    Om_c = spectra.omega_bif(pt.j, p.c, p.k)
    rel = min(rel_step, D_STEP_FRACTION * abs(p.Omega - Om_c) / abs(Om_c))
    dc, dx = rel * p.c, rel * abs(p.Omega)
    cfg = replace(cfg, parity_a=pt.profile.parity_a if pt.profile.parity_a != "zero"
                  else cfg.parity_a)

    def pq(c, Om):
        q = ModelParams(c, Om, p.k)
        prof = solve_profile(q, pt.profile, cfg, warn_trivial=False)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cq = conserved_quantities(prof, q)
        return np.array([cq.P_U, cq.Q])

    d_c = (pq(p.c + dc, p.Omega) - pq(p.c - dc, p.Omega)) / (2 * dc)
    # |Omega| grows as Omega decreases
    d_x = (pq(p.c, p.Omega - dx) - pq(p.c, p.Omega + dx)) / (2 * dx)
    return DMatrix.from_entries([[d_c[0], d_x[0]], [d_c[1], d_x[1]]])


# -- diagnostics along a branch ----------------------------------------------

@dataclass(frozen=True)
class BranchFits:
    quad_coeff: float
    quartic_coeff: float
    slope_U: float
    slope_A: float


def fit_branch(points, c: float | None = None) -> BranchFits:
    """Fits of Omega - Omega_c = alpha a^2 + beta a^4 and log-log norm slopes."""
    if len(points) < 3:
        raise ShapeError("need at least three branch points")
    j = points[0].j
    c = points[0].params.c if c is None else c
    k = points[0].params.k
    g = points[0].profile.grid
    Om_c = spectra.omega_bif(j, c, k)
    a = np.array([pt.a for pt in points])
    dOm = np.array([pt.params.Omega for pt in points]) - Om_c
    coef, *_ = np.linalg.lstsq(np.column_stack([a**2, a**4]), dOm, rcond=None)
    U0 = kdv_profile(c, g).U
    nU = np.array([math.sqrt(g.integrate((pt.profile.U - U0) ** 2)) for pt in points])
    nA = np.array([math.sqrt(g.integrate(pt.profile.A**2)) for pt in points])
    x = np.log(np.abs(dOm))
    sU = np.polyfit(x, np.log(nU), 1)[0]
    sA = np.polyfit(x, np.log(nA), 1)[0]
    return BranchFits(float(coef[0]), float(coef[1]), float(sU), float(sA))


def exact_bright_deviation(pt: BranchPoint) -> float:
    """Max-norm distance of a k = 1/6 branch point to the bright family at the same Omega."""
    p = pt.params
    fam = ExactFamily(Family.SECH_BRIGHT, p.c, p.Omega, s=p.s)
    from .model import eval_exact
    U, A = eval_exact(fam, pt.profile.grid.nodes)
    return float(max(np.max(np.abs(pt.profile.U - U)), np.max(np.abs(pt.profile.A - A))))


def morse_perturbation_check(j: int, c: float, k: float, a: float,
                             cfg: BvpConfig | None = None) -> tuple[float, float]:
    """(measured, predicted) split kernel eigenvalue of L_J at amplitude a.

    The measurement is taken in the profile's own parity subspace, which holds
    the split eigenvector and excludes the translational mode.
    """
    _validate_branch(j, c, k)
    if a == 0:
        return 0.0, 0.0
    pts = continue_branch(j, c, k, [a], cfg, analyze=False)
    if not pts:
        raise NoConvergence(f"no branch point at a={a}")
    pt = pts[0]
    g = pt.profile.grid
    op = assemble(Block.LJ, pt.profile, pt.params, g, parity=("even", pt.profile.parity_a))
    w = lowest_eigs(op, 4)
    measured = float(w[np.argmin(np.abs(w))])
    predicted = a**2 * greens.lambda2_prediction(greens.Which(j), c, k)
    return measured, predicted


# -- primary branch ----------------------------------------------------------

@dataclass(frozen=True)
class PrimaryIndex:
    n: int
    z: int
    n_beyond_kdv: int
    dP_dc: float
    n_hat: int
    z_hat: int
    classification: Classification
    spectrum: SpectrumReport


def primary_branch_index(c: float, k: float, Omega: float, g: Grid | None = None,
                         m: int = 8) -> PrimaryIndex:
    """Morse counts of the full Hessian at the uncoupled soliton, constrained by P alone.

    With A = 0 the mass plays no role, so D reduces to the 1x1 slope dP/dc,
    estimated by a central difference of the quadrature of the exact profile.
    """
    p = ModelParams(c, Omega, k)
    g = default_grid(c, Omega) if g is None else g
    prof = kdv_profile(c, g)
    rep = low_spectrum(assemble(Block.FULL, prof, p, g), m)
    dc = D_REL_STEP * c
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        P = [conserved_quantities(kdv_profile(cc, g), p.replace(c=cc)).P_U
             for cc in (c + dc, c - dc)]
    dP = (P[0] - P[1]) / (2 * dc)
    D = DMatrix.from_entries([[dP]])
    n_hat, z_hat = constrained_index(rep, D)
    cls = Classification("MINIMIZER" if n_hat == 0 else "SADDLE", n_hat, z_hat)
    return PrimaryIndex(rep.morse_index, rep.nullity, rep.morse_index - 1, dP, n_hat, z_hat,
                        cls, rep)


# -- identities of the first pitchfork ---------------------------------------

@dataclass(frozen=True)
class ZeroSum:
    term_l2: float
    term_l2_closed: float
    term_l1: float

    @property
    def total(self) -> float:
        return self.term_l2 + self.term_l1


def zero_sum_identity(c: float, k: float, g: Grid | None = None) -> ZeroSum:
    """4<g U0', L2^{-1} g U0'> + s<(U0')^2, L1^{-1} g^2> at the first pitchfork.

    The L2 term is evaluated both by an odd-subspace solve and from the
    closed form L2^{-1} g U0' = (s/2) g'; the L1 term is a quadrature in y of
    the variation-of-parameters solution W.
    """
    _validate_branch(1, c, k)
    Om = spectra.omega_bif(1, c, k)
    g = default_grid(c, Om) if g is None else g
    p = ModelParams(c, Om, k)
    xi = g.nodes
    y = 0.5 * math.sqrt(c) * xi
    sech, t = 1.0 / np.cosh(y), np.tanh(y)
    pe = spectra.p_of(k)
    U0p = -3.0 * c**1.5 * sech**2 * t
    gm = sech**pe
    gp = -pe * 0.5 * math.sqrt(c) * sech**pe * t
    prof = kdv_profile(c, g)
    L2 = assemble(Block.L2, prof, p, g, parity="odd")
    term_l2 = 4.0 * g.inner(gm * U0p, L2.solve_full(gm * U0p))
    term_l2_closed = 4.0 * g.inner(gm * U0p, 0.5 * p.s * gp)
    # (U0')^2 = 9 c^3 sech^4 tanh^2, L1^{-1} g^2 = (4/c) W(y), d xi = (2/sqrt c) dy
    yr = greens.y_grid()
    W = greens.solve_W(pe, yr)
    f = np.cosh(yr) ** -4.0 * np.tanh(yr) ** 2
    term_l1 = p.s * 72.0 * c**1.5 * float(simpson(f * W, x=yr))
    return ZeroSum(term_l2, term_l2_closed, term_l1)


def u0_w2_inner(c: float, k: float = 1.0 / 6.0, g: Grid | None = None) -> float:
    """<U0, w2> with w2 = s L1^{-1} g^2 (a discrete even solve)."""
    _validate_branch(1, c, k)
    g = default_grid(c, spectra.omega_bif(1, c, k)) if g is None else g
    U0 = kdv_profile(c, g).U
    return g.inner(U0, w2_correction(1, c, k, g))
