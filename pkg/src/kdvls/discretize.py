"""Finite-difference Hessian operators, low spectra, Morse counts and the D matrix.

Operators are assembled on a :class:`~kdvls.grid.Grid` with homogeneous
Dirichlet ghosts, so every matrix is exactly symmetric. Sub-blocks are

    L1 = -d^2 + c - U,
    L2 = (2s/k)(-d^2 - Omega - k U),
    LJ = [[L1, -2sA], [-2sA, L2]],
    FULL = LJ (+) L2,

and LJ_GAMMA is the one-parameter normalization of LJ at the k = 1/6 bright
family. Any operator can be restricted to a reflection-parity subspace with
orthonormal fold matrices; the restriction stays banded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalFailure, OutOfDomain, ShapeError, WrongRegime
from .grid import Grid
from .model import ModelParams, WaveProfile

DEFAULT_M = 8
ZERO_TOL_FLOOR = 1e-8
ZERO_TOL_FACTOR = 50.0


class Block(enum.Enum):
    L1 = "L1"
    L2 = "L2"
    LJ = "LJ"
    FULL = "FULL"
    LJ_GAMMA = "LJ_GAMMA"


# number of scalar fields per block structure
_N_FIELDS = {Block.L1: 1, Block.L2: 1, Block.LJ: 2, Block.FULL: 3, Block.LJ_GAMMA: 2}


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Symmetric sparse matrix for one of the Hessian blocks.

    ``parity`` holds one entry per field (``None`` for the full grid);
    ``node_index`` and ``field_index`` give, per row, the grid node and the
    field it belongs to, which is all that is needed to band the matrix.
    """

    matrix: sp.csr_matrix
    block_structure: Block
    grid: Grid
    params: ModelParams | None
    parity: tuple
    node_index: np.ndarray
    field_index: np.ndarray
    edges: tuple
    scale: float
    gamma: float | None = None
    boundary: str = field(default="DIRICHLET")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def edge(self) -> float:
        """Bottom of the continuous spectrum."""
        return min(self.edges)

    @property
    def extension(self) -> sp.csr_matrix:
        """Orthonormal map from this operator's unknowns to full-grid fields."""
        return sp.block_diag([self.grid.fold(par, orthonormal=True) for par in self.parity],
                             format="csr")

    def restrict(self, v: np.ndarray) -> np.ndarray:
        return self.extension.T @ v

    def extend(self, x: np.ndarray) -> np.ndarray:
        return self.extension @ x

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve M x = rhs in this operator's own coordinates."""
        return spla.spsolve(self.matrix.tocsc(), rhs)

    def solve_full(self, rhs_full: np.ndarray) -> np.ndarray:
        """Full-grid solution of M x = rhs within the operator's parity subspace."""
        return self.extend(self.solve(self.restrict(rhs_full)))

    def bandwidth(self) -> int:
        perm = self.band_order()
        coo = self.matrix[perm][:, perm].tocoo()
        return int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0

    def band_order(self) -> np.ndarray:
        return np.lexsort((self.field_index, self.node_index))


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    morse_index: int
    nullity: int
    tol_zero: float
    edge: float
    quasi_continuum_floor: float | None
    spurious_edge_note: str

    @property
    def m(self) -> int:
        return len(self.eigenvalues)


# -- assembly ---------------------------------------------------------------

def _check_profile(profile: WaveProfile | None, g: Grid):
    if profile is None:
        raise ShapeError("a profile is required for this block structure")
    if profile.grid != g:
        raise ShapeError("profile and operator grids differ")
    g.check(profile.U, profile.A)


def _tol_zero(g: Grid, scale: float) -> float:
    return max(ZERO_TOL_FLOOR, ZERO_TOL_FACTOR * g.h ** g.order) * scale


def _l1_full(g: Grid, U, c):
    return (-g.d2 + sp.diags(c - U)).tocsr()


def _l2_full(g: Grid, U, p: ModelParams):
    return ((2.0 * p.s / p.k) * (-g.d2 + sp.diags(-p.Omega - p.k * U))).tocsr()


def _default_parity(which: Block, parity):
    n = _N_FIELDS[which]
    if parity is None:
        return (None,) * n
    if isinstance(parity, str):
        parity = (parity,)
    parity = tuple(parity)
    if len(parity) != n:
        raise ShapeError(f"{which.value} needs {n} parities, got {len(parity)}")
    for par in parity:
        if par not in (None, "even", "odd"):
            raise ShapeError(f"unknown parity {par!r}")
    return parity


def _restrict(M, g: Grid, parity):
    E = sp.block_diag([g.fold(par, orthonormal=True) for par in parity], format="csr")
    Mr = (E.T @ M @ E).tocsr()
    Mr = ((Mr + Mr.T) * 0.5).tocsr()  # fold weights can leave 1-ulp asymmetry
    Mr.eliminate_zeros()
    nodes, fields = [], []
    for f, par in enumerate(parity):
        idx = np.arange(g.n_points) if par is None else g.half_rows(par)
        nodes.append(np.abs(idx - g.center) if par is not None else idx)
        fields.append(np.full(idx.size, f))
    return Mr, np.concatenate(nodes), np.concatenate(fields)


def assemble(which, profile: WaveProfile | None, p: ModelParams | None, g: Grid,
             parity=None, gamma: float | None = None) -> DiscreteOperator:
    """Assemble a Hessian block on ``g``.

    ``parity`` is ``None`` (full grid) or one of ``"even"``/``"odd"`` per field
    (``(U, A)`` for LJ, ``(U, z1, z2)`` for FULL). LJ_GAMMA needs ``gamma > 4``
    and treats ``g`` as the grid in the scaled variable eta; ``profile`` and
    ``p`` are ignored for it.
    """
    which = Block(which)
    parity = _default_parity(which, parity)
    if which is Block.LJ_GAMMA:
        if gamma is None or not gamma > 4:
            raise OutOfDomain(f"LJ_GAMMA needs gamma > 4, got {gamma}")
        eta = g.nodes
        sech = 1.0 / np.cosh(eta)
        off = sp.diags(-4.0 * math.sqrt(3.0 * (gamma - 4.0)) * sech)
        M = sp.bmat([[-g.d2 + sp.diags(gamma - 12.0 * sech**2), off],
                     [off, 12.0 * (-g.d2 + sp.diags(1.0 - 2.0 * sech**2))]], format="csr")
        edges = (gamma, 12.0)
        scale = max(gamma, 24.0)
        params = None
    else:
        if p is None:
            raise ShapeError("model parameters are required")
        if not p.sign_consistent:
            raise OutOfDomain(f"Hessian operators need s = sign(k) (k={p.k}, s={p.s})")
        _check_profile(profile, g)
        U, A = profile.U, profile.A
        l2_scale = 2.0 / abs(p.k)
        edges_l1, edges_l2 = (p.c,), (l2_scale * abs(p.Omega),)
        amp = max(float(np.max(np.abs(U))), float(np.max(np.abs(A))), p.c, abs(p.Omega))
        if which is Block.L1:
            M, edges, scale = _l1_full(g, U, p.c), edges_l1, amp
        elif which is Block.L2:
            M, edges, scale = _l2_full(g, U, p), edges_l2, l2_scale * max(amp, abs(p.k) * amp)
        else:
            off = sp.diags(-2.0 * p.s * A)
            LJ = sp.bmat([[_l1_full(g, U, p.c), off], [off, _l2_full(g, U, p)]], format="csr")
            scale = max(amp, l2_scale * amp)
            if which is Block.LJ:
                M, edges = LJ, edges_l1 + edges_l2
            else:
                M = sp.block_diag([LJ, _l2_full(g, U, p)], format="csr")
                edges = edges_l1 + edges_l2 + edges_l2
        params = p
    Mr, nodes, fields = _restrict(M, g, parity)
    return DiscreteOperator(Mr, which, g, params, parity, nodes, fields,
                            tuple(float(e) for e in edges), float(scale), gamma)


# -- spectra ----------------------------------------------------------------

def _banded_lower(M: sp.spmatrix):
    coo = M.tocoo()
    low = coo.row >= coo.col
    r, cidx, v = coo.row[low], coo.col[low], coo.data[low]
    bw = int(np.max(r - cidx)) if r.size else 0
    ab = np.zeros((bw + 1, M.shape[0]))
    ab[r - cidx, cidx] = v
    return ab


def lowest_eigs(op: DiscreteOperator, m: int, vectors: bool = False):
    """The ``m`` smallest eigenvalues (and optionally eigenvectors) of ``op``."""
    if m < 1:
        raise ShapeError("m must be >= 1")
    m = min(m, op.dimension)
    perm = op.band_order()
    ab = _banded_lower(op.matrix[perm][:, perm])
    try:
        res = sla.eig_banded(ab, lower=True, select="i", select_range=(0, m - 1),
                             eigvals_only=not vectors)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure("banded eigensolver failed", block=op.block_structure.value,
                               dimension=op.dimension, cause=str(exc)) from exc
    if not vectors:
        return np.sort(res)
    w, V = res
    out = np.empty_like(V)
    out[perm] = V
    return w, out


def low_spectrum(op: DiscreteOperator, m: int = DEFAULT_M) -> SpectrumReport:
    """Lowest ``m`` eigenvalues with Morse index and nullity.

    FULL is block diagonal (LJ (+) L2), so its blocks are solved separately and
    merged.
    """
    if op.block_structure is Block.FULL:
        w = _full_lowest(op, m)
    else:
        w = lowest_eigs(op, m)
    tol = _tol_zero(op.grid, op.scale)
    morse = int(np.sum(w < -tol))
    null = int(np.sum(np.abs(w) <= tol))
    above = w[w >= op.edge]
    floor = float(above[0]) if above.size else None
    if floor is None:
        note = f"no quasi-continuum level among the lowest {len(w)} (edge {op.edge:.6g})"
    else:
        note = (f"lowest quasi-continuum level {floor:.6g} above edge {op.edge:.6g}; "
                "levels at or above the edge are not bound states")
    return SpectrumReport(w, morse, null, tol, op.edge, floor, note)


def _full_lowest(op: DiscreteOperator, m: int) -> np.ndarray:
    g = op.grid
    sizes = [g.n_points if par is None else len(g.half_rows(par)) for par in op.parity]
    nJ = sizes[0] + sizes[1]
    A = op.matrix[:nJ][:, :nJ]
    B = op.matrix[nJ:][:, nJ:]
    parts = []
    for M, sl in ((A, slice(0, nJ)), (B, slice(nJ, None))):
        sub = DiscreteOperator(M.tocsr(), Block.LJ, g, op.params, (),
                               op.node_index[sl], op.field_index[sl], op.edges, op.scale)
        parts.append(lowest_eigs(sub, m))
    return np.sort(np.concatenate(parts))[:m]


# -- D matrix and constrained counts -----------------------------------------

@dataclass(frozen=True)
class DMatrix:
    """Jacobian of (P, Q) with respect to (c, |Omega|), or the 1x1 dP/dc block.

    p0 and z0 count positive and zero eigenvalues of the symmetric part.
    """

    entries: np.ndarray
    p0: int
    z0: int

    @classmethod
    def from_entries(cls, entries, rtol: float = 1e-8) -> "DMatrix":
        D = np.atleast_2d(np.asarray(entries, dtype=float))
        if D.shape not in ((1, 1), (2, 2)):
            raise ShapeError(f"D must be 1x1 or 2x2, got {D.shape}")
        ev = np.linalg.eigvalsh(0.5 * (D + D.T))
        tol = rtol * max(1.0, float(np.max(np.abs(D))))
        return cls(D, int(np.sum(ev > tol)), int(np.sum(np.abs(ev) <= tol)))

    def _entry(self, i, j):
        if self.entries.shape[0] <= max(i, j):
            raise ShapeError("entry not present in a 1x1 D matrix")
        return float(self.entries[i, j])

    @property
    def d11(self):
        return self._entry(0, 0)

    @property
    def d12(self):
        return self._entry(0, 1)

    @property
    def d21(self):
        return self._entry(1, 0)

    @property
    def d22(self):
        return self._entry(1, 1)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))


def constrained_index(report: SpectrumReport | tuple, D: DMatrix) -> tuple[int, int]:
    """(n_hat, z_hat) = (n - p0 - z0, z + z0)."""
    n, z = (report.morse_index, report.nullity) if isinstance(report, SpectrumReport) else report
    return n - D.p0 - D.z0, z + D.z0


def d_matrix_exact_bright(c: float, Omega: float) -> DMatrix:
    """Exact D along the k = 1/6 bright family, from P(U,0) = 96|Omega|^{3/2}
    and Q = 144 (c - 4|Omega|) |Omega|^{1/2}."""
    if not (c > 0 and -c / 4.0 < Omega < 0):
        raise WrongRegime(f"bright family needs -c/4 < Omega < 0, got c={c}, Omega={Omega}")
    x = abs(Omega)
    off = 144.0 * math.sqrt(x)
    d22 = 72.0 / math.sqrt(x) * (c - 12.0 * x)
    return DMatrix.from_entries([[0.0, off], [off, d22]])


# -- normalized bright-family Hessian -----------------------------------------

def eta_grid(n_points: int | None = None, half_length: float = 40.0, order: int = 6) -> Grid:
    from .grid import default_n_points
    return Grid(half_length, default_n_points() if n_points is None else n_points, order)


def _l1_gamma(g: Grid, gamma: float, parity: str):
    sech2 = np.cosh(g.nodes) ** -2.0
    M = -g.d2 + sp.diags(gamma - 12.0 * sech2)
    return _restrict(M, g, (parity,))[0]


def _l2_unit(g: Grid, parity: str):
    sech2 = np.cosh(g.nodes) ** -2.0
    M = -g.d2 + sp.diags(1.0 - 2.0 * sech2)
    return _restrict(M, g, (parity,))[0]


def green_scalar_gamma(gamma: float, g: Grid | None = None) -> float:
    """<(L1(gamma))^{-1} sech^2, sech^2> with L1(gamma) = -d^2 + gamma - 12 sech^2."""
    if not gamma > 4 and gamma != 4:
        raise OutOfDomain(f"gamma must be >= 4, got {gamma}")
    g = eta_grid() if g is None else g
    E = g.fold("even", orthonormal=True)
    f = np.cosh(g.nodes) ** -2.0
    x = E @ spla.spsolve(_l1_gamma(g, gamma, "even").tocsc(), E.T @ f)
    return g.inner(x, f)


def translation_pair(gamma: float, eta):
    """(v0, z0) = (tanh sech^2, (gamma - 4) tanh sech), the translational solution."""
    eta = np.asarray(eta, dtype=float)
    t, sech = np.tanh(eta), 1.0 / np.cosh(eta)
    return t * sech**2, (gamma - 4.0) * t * sech


def k_quadratic_form_z0(gamma: float, g: Grid | None = None) -> float:
    """<K z0, z0> with K = sech L1(gamma)^{-1} sech, by a discrete odd solve."""
    if not gamma > 4:
        raise OutOfDomain(f"gamma must be > 4, got {gamma}")
    g = eta_grid() if g is None else g
    E = g.fold("odd", orthonormal=True)
    sech = 1.0 / np.cosh(g.nodes)
    _, z0 = translation_pair(gamma, g.nodes)
    v = E @ spla.spsolve(_l1_gamma(g, gamma, "odd").tocsc(), E.T @ (sech * z0))
    return g.inner(sech * v, z0)


@dataclass(frozen=True)
class GeneralizedEigs:
    gamma: float
    mu: np.ndarray
    mu_translation: float
    overlap: float


def generalized_eigs_odd(gamma: float, g: Grid | None = None, n_points: int = 2001,
                         half_length: float = 30.0) -> GeneralizedEigs:
    """Odd-subspace eigenvalues mu of L2 z = mu K z, K = sech L1(gamma)^{-1} sech.

    Solved as the definite pencil K z = nu L2 z (L2 = -d^2 + 1 - 2 sech^2 is
    positive on odd functions), mu = 1/nu. ``mu_translation`` is the eigenvalue
    whose eigenvector overlaps most with tanh sech.
    """
    if not gamma > 4:
        raise OutOfDomain(f"gamma must be > 4, got {gamma}")
    g = Grid(half_length, n_points, 6) if g is None else g
    Eo = g.fold("odd", orthonormal=True)
    sech = 1.0 / np.cosh(g.nodes)
    # multiplication by sech is diagonal on odd half-grid coordinates (node m + j)
    s_half = sech[g.center + 1:]
    L1 = _l1_gamma(g, gamma, "odd").toarray()
    L2 = _l2_unit(g, "odd").toarray()
    X = np.linalg.solve(L1, np.diag(s_half))
    K = s_half[:, None] * X
    K = 0.5 * (K + K.T)
    nu, V = sla.eigh(K, L2)
    keep = nu > 1e-12 * np.max(np.abs(nu))
    mu = np.sort(1.0 / nu[keep])
    z0 = Eo.T @ (np.tanh(g.nodes) * sech)
    overl = np.abs(V.T @ (L2 @ z0)) / np.sqrt(np.einsum("ij,ij->j", V, L2 @ V) * (z0 @ L2 @ z0))
    overl = np.where(keep, overl, -1.0)
    i = int(np.argmax(overl))
    return GeneralizedEigs(gamma, mu, float(1.0 / nu[i]), float(overl[i]))
