"""One-dimensional single-particle matter on a finite-difference grid.

The default problem is the quartic double well V(x) = A x^4 - B x^2 whose
lowest two levels form the two-level emitter of the gauge comparison.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, ForbiddenTransitionError

DEFAULT_POINTS = 1024


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got {self.x_min}, {self.x_max}")
        if self.n_points < 64:
            raise ValueError(f"n_points must be >= 64, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self) -> "Grid":
        """Same box with half the spacing."""
        return Grid(self.x_min, self.x_max, 2 * self.n_points - 1)


@dataclass(frozen=True)
class PotentialSpec:
    A: float
    B: float
    m: float = 1.0

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError(f"quartic coefficient A must be > 0, got {self.A}")
        if self.m <= 0:
            raise ValueError(f"mass must be > 0, got {self.m}")

    @classmethod
    def from_anharmonicity(cls, A: float, anh: float, m: float = 1.0) -> "PotentialSpec":
        """Invert anh = m B^3 / A^2 for B."""
        return cls(A, (anh * A * A / m) ** (1.0 / 3.0), m)

    def __call__(self, x):
        x = np.asarray(x, float)
        return self.A * x ** 4 - self.B * x ** 2

    def default_grid(self, n_points: int = DEFAULT_POINTS) -> Grid:
        L = 3.0 * np.sqrt(max(self.B, 0.0) / self.A) + 2.0
        return Grid(-L, L, n_points)


# reference double well: m = 1, A = 50, anharmonicity 45
DOUBLE_WELL = PotentialSpec.from_anharmonicity(50.0, 45.0, 1.0)


@dataclass(frozen=True, eq=False)
class MatterEigensystem:
    energies: np.ndarray
    wavefunctions: np.ndarray   # (n_points, k); Dirichlet zeros at the ends
    x: np.ndarray
    x_elems: np.ndarray
    p_elems: np.ndarray
    m: float = 1.0

    @property
    def k_levels(self) -> int:
        return len(self.energies)

    def orthonormality_defect(self) -> float:
        h = self.x[1] - self.x[0]
        S = self.wavefunctions.T @ self.wavefunctions * h
        return float(np.max(np.abs(S - np.eye(self.k_levels))))


def anharmonicity(pot: PotentialSpec) -> float:
    """m B^3 / A^2 (hbar = 1)."""
    return pot.m * pot.B ** 3 / pot.A ** 2


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    # rightmost lobe positive: gives <0|x|1> > 0 in a symmetric well
    for j in range(psi.shape[1]):
        col = psi[:, j]
        idx = np.nonzero(np.abs(col) > 1e-3 * np.abs(col).max())[0][-1]
        if col[idx] < 0:
            psi[:, j] = -col
    return psi


def solve_potential(grid: Grid, V: Callable[[np.ndarray], np.ndarray], m: float, k_levels: int) -> MatterEigensystem:
    """Lowest eigenpairs of -(1/2m) d^2/dx^2 + V(x), Dirichlet boundaries.

    Second-order central differences on the interior points; momentum
    elements use the centered first difference of the eigenfunctions.
    """
    if k_levels > grid.n_points // 4:
        raise ValueError(f"k_levels={k_levels} exceeds n_points/4={grid.n_points // 4}")
    x = grid.x
    h = grid.spacing
    xi = x[1:-1]
    Vi = np.asarray(V(xi), float)
    if not np.all(np.isfinite(Vi)):
        raise ValueError("potential is not finite on the grid")
    diag = 1.0 / (m * h * h) + Vi
    off = np.full(len(xi) - 1, -0.5 / (m * h * h))
    E, psi = sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, k_levels - 1))
    psi = _fix_sign(psi / np.sqrt(h))
    full = np.zeros((len(x), k_levels))
    full[1:-1] = psi
    X = (psi.T * xi) @ psi * h
    dpsi = (full[2:] - full[:-2]) / (2 * h)
    P = -1j * (psi.T @ dpsi) * h
    X = 0.5 * (X + X.T)
    P = 0.5 * (P + P.conj().T)
    return MatterEigensystem(E, full, x, X.astype(complex), P, m)


@lru_cache(maxsize=32)
def solve_double_well(grid: Grid, pot: PotentialSpec, k_levels: int = 8,
                      check_convergence: bool = False, rtol: float = 1e-4) -> MatterEigensystem:
    """Eigenpairs of the quartic double well.

    With ``check_convergence`` the problem is re-solved on a grid of half the
    spacing and the excitation gaps E_k - E_0 must agree to ``rtol``.
    """
    eig = solve_potential(grid, pot, pot.m, k_levels)
    if check_convergence:
        fine = solve_potential(grid.refined(), pot, pot.m, k_levels)
        g0 = eig.energies[1:] - eig.energies[0]
        g1 = fine.energies[1:] - fine.energies[0]
        err = np.max(np.abs(g1 - g0) / np.abs(g1))
        if err > rtol:
            raise ConvergenceError(
                f"grid not converged: gap E1-E0 {g0[0]:.10g} -> {g1[0]:.10g} "
                f"(max relative change {err:.2e} > {rtol:.0e})")
    return eig


def gap_ratio(eig: MatterEigensystem) -> float:
    """(E2 - E1) / (E1 - E0)."""
    E = eig.energies
    return float((E[2] - E[1]) / (E[1] - E[0]))


def px_identity_error(eigs: MatterEigensystem, pot: PotentialSpec | None, j: int, k: int,
                      forbidden_tol: float = 1e-8) -> float:
    """Relative violation of <j|p|k> = i m (E_j - E_k) <j|x|k>."""
    if j == k:
        raise ValueError("px identity needs j != k")
    m = pot.m if pot is not None else eigs.m
    x = eigs.x_elems[j, k]
    p = eigs.p_elems[j, k]
    scale = max(np.max(np.abs(eigs.x_elems)), 1e-300)
    if abs(x) < forbidden_tol * scale:
        raise ForbiddenTransitionError(f"<{j}|x|{k}> = {abs(x):.2e}: dipole-forbidden transition")
    w = eigs.energies[j] - eigs.energies[k]
    return float(abs(p - 1j * m * w * x) / abs(p))
