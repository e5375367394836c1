"""Uniform symmetric grids, finite-difference stencils and parity folding.

All differentiation matrices assume homogeneous Dirichlet data outside the
grid (ghost values are zero), which keeps every assembled second-derivative
matrix exactly symmetric and every first-derivative matrix exactly
skew-symmetric.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson

from .errors import ShapeError

DEFAULT_N = 4001
DEFAULT_ORDER = 6
DECAY_LENGTHS = 40.0

# central-difference weights, offsets -r..r
_D2_WEIGHTS = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    6: np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0,
}
_D1_WEIGHTS = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    6: np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0,
}


def default_n_points() -> int:
    """Default node count, overridable through ``KDVLS_GRID_N``."""
    value = os.environ.get("KDVLS_GRID_N")
    if not value:
        return DEFAULT_N
    n = int(value)
    if n < 3 or n % 2 == 0:
        raise ShapeError(f"KDVLS_GRID_N must be an odd integer >= 3, got {n}")
    return n


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-half_length, half_length] with a node at 0.

    ``order`` selects the accuracy of the central-difference stencils (2, 4 or 6).
    """

    half_length: float
    n_points: int = DEFAULT_N
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not self.half_length > 0:
            raise ShapeError("half_length must be positive")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ShapeError("n_points must be an odd integer >= 3")
        if self.order not in _D2_WEIGHTS:
            raise ShapeError("stencil order must be 2, 4 or 6")

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / (self.n_points - 1)

    @property
    def center(self) -> int:
        return (self.n_points - 1) // 2

    @cached_property
    def nodes(self) -> np.ndarray:
        m = self.center
        x = self.h * np.arange(-m, m + 1, dtype=float)
        x[m] = 0.0
        return x

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.half_length, factor * (self.n_points - 1) + 1, self.order)

    def with_order(self, order: int) -> "Grid":
        return Grid(self.half_length, self.n_points, order)

    def check(self, *vectors):
        for v in vectors:
            if np.shape(v) != (self.n_points,):
                raise ShapeError(
                    f"vector of shape {np.shape(v)} does not match grid of {self.n_points} nodes"
                )

    # -- stencils ---------------------------------------------------------

    def _banded(self, weights, scale) -> sp.csr_matrix:
        r = len(weights) // 2
        n = self.n_points
        diags = [np.full(n - abs(o), w * scale) for o, w in zip(range(-r, r + 1), weights)]
        return sp.diags(diags, list(range(-r, r + 1)), shape=(n, n), format="csr")

    @cached_property
    def d2(self) -> sp.csr_matrix:
        """Second-derivative matrix (symmetric)."""
        return self._banded(_D2_WEIGHTS[self.order], 1.0 / self.h**2)

    @cached_property
    def d1(self) -> sp.csr_matrix:
        """First-derivative matrix (skew-symmetric)."""
        return self._banded(_D1_WEIGHTS[self.order], 1.0 / self.h)

    def deriv(self, f: np.ndarray) -> np.ndarray:
        return self.d1 @ f

    def deriv2(self, f: np.ndarray) -> np.ndarray:
        return self.d2 @ f

    # -- quadrature -------------------------------------------------------

    def integrate(self, f: np.ndarray) -> float:
        """Composite Simpson rule over the whole grid."""
        return float(simpson(f, dx=self.h))

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return self.integrate(f * g)

    # -- parity -----------------------------------------------------------

    def reflect(self, f: np.ndarray) -> np.ndarray:
        return f[::-1]

    def fold(self, parity: str | None, orthonormal: bool = False) -> sp.csr_matrix:
        """Extension matrix from a half-grid parity subspace to the full grid.

        ``parity`` is ``"even"`` (unknowns at xi >= 0) or ``"odd"``
        (unknowns at xi > 0, value zero at the centre). ``None`` gives the
        identity. With ``orthonormal=True`` the columns have unit l2 norm, so
        ``E.T @ M @ E`` is the restriction of a reflection-symmetric ``M``.
        """
        n, m = self.n_points, self.center
        if parity is None:
            return sp.identity(n, format="csr")
        if parity == "even":
            cols = np.arange(m + 1)
            sign = 1.0
        elif parity == "odd":
            cols = np.arange(1, m + 1)
            sign = -1.0
        else:
            raise ShapeError(f"unknown parity {parity!r}")
        rows_pos = m + cols
        rows_neg = m - cols
        w = np.ones(len(cols))
        if orthonormal:
            w = np.where(cols == 0, 1.0, 1.0 / np.sqrt(2.0))
        mask = cols > 0
        rows = np.concatenate([rows_pos, rows_neg[mask]])
        cc = np.concatenate([np.arange(len(cols)), np.arange(len(cols))[mask]])
        vals = np.concatenate([w, sign * w[mask]])
        return sp.csr_matrix((vals, (rows, cc)), shape=(n, len(cols)))

    def half_rows(self, parity: str | None) -> np.ndarray:
        """Row indices of the equations kept by a parity-restricted solve."""
        m, n = self.center, self.n_points
        if parity is None:
            return np.arange(n)
        return np.arange(m, n) if parity == "even" else np.arange(m + 1, n)

    def parity_defect(self, f: np.ndarray, parity: str) -> float:
        if parity == "even":
            return float(np.max(np.abs(f - f[::-1])))
        if parity == "odd":
            return float(np.max(np.abs(f + f[::-1])))
        if parity == "zero":
            return float(np.max(np.abs(f)))
        raise ShapeError(f"unknown parity {parity!r}")


def default_grid(c: float, Omega: float | None = None, n_points: int | None = None,
                 order: int = DEFAULT_ORDER) -> Grid:
    """Grid wide enough for sech-type tails to vanish in double precision.

    Half-length is ``40/sqrt(min(c, |Omega|))``, i.e. forty of the slowest
    decay lengths of U and A.
    """
    rate = c if Omega is None else min(c, abs(Omega))
    n = default_n_points() if n_points is None else n_points
    return Grid(DECAY_LENGTHS / np.sqrt(rate), n, order)
