"""Solitary waves of the coupled KdV / linear-Schroedinger system.

Modules
-------
model         exact families, residuals, invariants, conserved quantities
spectra       sech^2-well spectra, bifurcation ladder, kernel modes
greens        variation-of-parameters solves and projection integrals
discretize    Hessian blocks on a grid, Morse counts, the D matrix
continuation  Newton boundary-value solves and pitchfork branches
stability     the linearized problem J L, Krein signatures, embedded pairs
cli           the ``kdvls`` command-line front end
"""

__version__ = "0.1.0"

from .errors import (DomainError, InvalidFamily, KdvlsError, NoBifurcations,  # noqa: F401
                     NoConvergence, NumericalFailure, OutOfDomain, WrongRegime)
from .grid import Grid, default_grid  # noqa: F401
from .model import ExactFamily, Family, ModelParams, WaveProfile, sample_exact  # noqa: F401
