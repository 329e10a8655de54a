"""Finite-dimensional operator algebra.

Conventions used everywhere in the package:

* hbar = 1, frequencies in units of the cavity frequency unless stated.
* Two-level sites use the basis ordering (|g>, |e>), so sigma_z = diag(-1, +1)
  and sigma_minus = |g><e|.
* Bosonic sites are truncated at ``dim`` Fock states |0> ... |dim-1>.
* Composite spaces are ordered tensor products; site 0 is the leftmost
  Kronecker factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from math import ceil
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.stats import poisson

from .errors import ConvergenceError, DimensionError, NotHermitianError

HERMITIAN_TOL = 1e-10
DISPLACEMENT_TOL = 1e-8

SPIN_KINDS = ("sigma_x", "sigma_y", "sigma_z", "sigma_minus", "sigma_plus")
BOSON_KINDS = ("annihilate", "create", "number")


@dataclass(frozen=True)
class HilbertSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("a Hilbert space needs at least one site")
        if any(d < 1 for d in dims):
            raise DimensionError(f"every subsystem dimension must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def basis_index(self, labels: Sequence[int]) -> int:
        """Flat index of the product state |labels[0], labels[1], ...>."""
        return int(np.ravel_multi_index(tuple(labels), self.dims))


@dataclass(frozen=True, eq=False)
class Operator:
    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        n = self.space.total
        if data.shape != (n, n):
            raise DimensionError(f"operator shape {data.shape} does not match space dimension {n}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def _check(self, other: "Operator"):
        if other.space != self.space:
            raise DimensionError(f"space mismatch: {self.space.dims} vs {other.space.dims}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.data + other.data)
        return Operator(self.space, self.data + other * np.eye(self.space.total))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __neg__(self):
        return Operator(self.space, -self.data)

    def __mul__(self, scalar):
        return Operator(self.space, self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.space, self.data / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.data @ other.data)
        if isinstance(other, Ket):
            if other.space != self.space:
                raise DimensionError("ket lives in a different space")
            return Ket(self.space, self.data @ other.amplitudes)
        return NotImplemented

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T), initial=0.0))

    def expect(self, ket: "Ket") -> complex:
        v = ket.amplitudes
        return complex(np.vdot(v, self.data @ v))


@dataclass(frozen=True, eq=False)
class Ket:
    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.space.total:
            raise DimensionError(f"ket length {amps.shape[0]} does not match space dimension {self.space.total}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, space: HilbertSpace, labels: Sequence[int]) -> "Ket":
        v = np.zeros(space.total, complex)
        v[space.basis_index(labels)] = 1.0
        return cls(space, v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Ket":
        return Ket(self.space, self.amplitudes / self.norm())

    def overlap(self, other: "Ket") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        v = self.amplitudes
        return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues and column eigenvectors of a Hermitian operator."""
    values: np.ndarray
    vectors: np.ndarray
    space: HilbertSpace | None = field(default=None)

    def ket(self, k: int) -> Ket:
        if self.space is None:
            raise DimensionError("eigensystem has no attached space")
        return Ket(self.space, self.vectors[:, k])

    def to_eigenbasis(self, op) -> np.ndarray:
        m = op.data if isinstance(op, Operator) else np.asarray(op)
        return self.vectors.conj().T @ m @ self.vectors

    def from_eigenbasis(self, m: np.ndarray) -> np.ndarray:
        return self.vectors @ m @ self.vectors.conj().T


# ----------------------------------------------------------------------------
# elementary operators

def _local(kind: str, dim: int) -> np.ndarray:
    if kind in SPIN_KINDS:
        sm = np.array([[0, 1], [0, 0]], complex)
        sp = sm.T.copy()
        return {
            "sigma_minus": sm,
            "sigma_plus": sp,
            "sigma_x": sp + sm,
            "sigma_y": -1j * (sp - sm),
            "sigma_z": np.diag([-1.0, 1.0]).astype(complex),
        }[kind]
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    if kind == "annihilate":
        return a
    if kind == "create":
        return a.conj().T
    if kind == "number":
        return np.diag(np.arange(dim, dtype=float)).astype(complex)
    raise ValueError(f"unknown operator kind {kind!r}")


def embed(space: HilbertSpace, site: int, local: np.ndarray) -> Operator:
    """Kronecker-embed a single-site matrix, identity elsewhere."""
    if not 0 <= site < space.n_sites:
        raise DimensionError(f"site {site} out of range for {space.n_sites} sites")
    local = np.asarray(local, complex)
    if local.shape != (space.dims[site],) * 2:
        raise DimensionError(f"local operator shape {local.shape} does not fit site {site} of dim {space.dims[site]}")
    factors = [np.eye(d, dtype=complex) for d in space.dims]
    factors[site] = local
    return Operator(space, reduce(np.kron, factors))


def elementary_operators(space: HilbertSpace, site: int, kind: str) -> Operator:
    """Single-site operator embedded in ``space``.

    kind is one of annihilate, create, number, sigma_x, sigma_y, sigma_z,
    sigma_minus, sigma_plus.
    """
    if not 0 <= site < space.n_sites:
        raise DimensionError(f"site {site} out of range for kind {kind!r} ({space.n_sites} sites)")
    dim = space.dims[site]
    if kind in SPIN_KINDS:
        if dim != 2:
            raise DimensionError(f"spin kind {kind!r} needs dim 2 at site {site}, got {dim}")
    elif kind in BOSON_KINDS:
        if dim < 2:
            raise DimensionError(f"bosonic kind {kind!r} needs dim >= 2 at site {site}, got {dim}")
    else:
        raise DimensionError(f"unknown operator kind {kind!r} at site {site}")
    return embed(space, site, _local(kind, dim))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.total, dtype=complex))


# ----------------------------------------------------------------------------
# displacements and coherent states

def fock_rule(alpha: float) -> int:
    """Smallest Fock dimension the truncation rule accepts for amplitude alpha."""
    a = abs(alpha)
    return int(ceil(a * a + 6 * a + 10))


def coherent_tail(alpha: complex, n_fock: int) -> float:
    """Weight of the exact coherent state |alpha> outside the first n_fock levels."""
    return float(poisson.sf(n_fock - 1, abs(alpha) ** 2))


def local_displacement(dim: int, alpha: complex, tol: float = DISPLACEMENT_TOL) -> np.ndarray:
    tail = coherent_tail(alpha, dim)
    if tail > tol:
        raise ConvergenceError(
            f"Fock dimension {dim} too small for displacement |alpha|={abs(alpha):.4g}: "
            f"coherent tail {tail:.2e} > {tol:.0e} (rule asks for n_fock >= {fock_rule(abs(alpha))})")
    a = _local("annihilate", dim)
    return sla.expm(alpha * a.conj().T - np.conj(alpha) * a)


def displacement(space: HilbertSpace, site: int, alpha: complex, tol: float = DISPLACEMENT_TOL) -> Operator:
    """D(alpha) = exp(alpha a^dag - alpha* a) on a bosonic site.

    Built as the matrix exponential of the truncated anti-Hermitian generator,
    so the result is unitary to rounding; truncation is judged from the tail
    of the coherent state instead.
    """
    if space.dims[site] < 2:
        raise DimensionError(f"displacement needs a bosonic site, site {site} has dim {space.dims[site]}")
    return embed(space, site, local_displacement(space.dims[site], alpha, tol))


def coherent_state(space: HilbertSpace, site: int, alpha: complex, tol: float = DISPLACEMENT_TOL) -> Ket:
    """D(alpha) applied to the vacuum of every site."""
    vac = Ket.basis(space, [0] * space.n_sites)
    return (displacement(space, site, alpha, tol) @ vac).normalized()


# ----------------------------------------------------------------------------
# eigensolver and diagnostics

def _as_array(op) -> np.ndarray:
    return op.data if isinstance(op, Operator) else np.asarray(op, dtype=complex)


def eig_hermitian(H, degeneracy_tol: float = 1e-12) -> EigenSystem:
    """Deterministic Hermitian eigendecomposition.

    Values ascend; within a degenerate cluster vectors are ordered by the
    index of their largest component, and each vector's largest component
    is made real positive.
    """
    m = _as_array(H)
    scale = max(float(np.max(np.abs(m), initial=0.0)), 1.0)
    defect = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    if defect >= HERMITIAN_TOL * scale:
        raise NotHermitianError(defect)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    lead = np.argmax(np.abs(v) > (1 - 1e-9) * np.max(np.abs(v), axis=0), axis=0)
    # cluster id increments where consecutive values separate
    cluster = np.concatenate([[0], np.cumsum(np.diff(w) > degeneracy_tol * scale)])
    order = np.lexsort((lead, cluster))
    w, v, lead = w[order], v[:, order], lead[order]
    phase = v[lead, np.arange(v.shape[1])]
    v = v * (np.abs(phase) / phase)[None, :]
    space = H.space if isinstance(H, Operator) else None
    return EigenSystem(w, v, space)


def commutator_norm(A, B) -> float:
    """max-abs entry of AB - BA."""
    if isinstance(A, Operator) and isinstance(B, Operator):
        A._check(B)
    a, b = _as_array(A), _as_array(B)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a @ b - b @ a), initial=0.0))


def unitary_defect(U) -> float:
    u = _as_array(U)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])), initial=0.0))


def phase_rotation_check(theta: float, H, N) -> float:
    """max-abs of exp(i theta N) H exp(-i theta N) - H for a diagonalizable N."""
    n = _as_array(N)
    nd = np.real(np.diag(n))
    if np.max(np.abs(n - np.diag(np.diag(n))), initial=0.0) > 0:
        en = eig_hermitian(n)
        R = en.vectors @ np.diag(np.exp(1j * theta * en.values)) @ en.vectors.conj().T
    else:
        R = np.diag(np.exp(1j * theta * nd))
    h = _as_array(H)
    return float(np.max(np.abs(R @ h @ R.conj().T - h), initial=0.0))
