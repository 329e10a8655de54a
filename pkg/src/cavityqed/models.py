"""Hamiltonian builders: JCM, Rabi, polaron frame, gauge pairs, Dicke.

Light-matter spaces are ordered [spin, fock]; the bare ground state
|0, g> therefore has flat index 0.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, DimensionError
from .matter1d import DOUBLE_WELL, Grid, MatterEigensystem, PotentialSpec, solve_double_well
from .opcore import (HilbertSpace, Ket, Operator, _local, coherent_tail, elementary_operators,
                     fock_rule, local_displacement)

MAX_FULL_SPIN_DIM = 4096


class TruncationWarning(UserWarning):
    pass


def check_fock(n_fock: int, alpha: float, strict: bool = True, what: str = "") -> bool:
    """Apply the Fock truncation rule n_fock >= |a|^2 + 6|a| + 10."""
    need = fock_rule(alpha)
    if n_fock >= need:
        return True
    msg = f"{what}n_fock={n_fock} below truncation rule {need} for amplitude {abs(alpha):.4g}"
    if strict:
        raise ConvergenceError(msg)
    warnings.warn(msg, TruncationWarning, stacklevel=3)
    return False


@dataclass(frozen=True)
class JcmParams:
    omega_c: float = 1.0
    omega_eg: float = 1.0
    omega_r: float = 0.0
    n_fock: int = 20

    def __post_init__(self):
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if self.omega_r < 0:
            raise ValueError(f"omega_r must be >= 0, got {self.omega_r}")
        if self.n_fock < 2:
            raise ValueError(f"n_fock must be >= 2, got {self.n_fock}")

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((2, self.n_fock))

    @property
    def beta(self) -> float:
        """Normalized coupling omega_r / omega_c."""
        return self.omega_r / self.omega_c


@dataclass(frozen=True)
class RabiParams(JcmParams):
    epsilon: float = 0.0


@dataclass(frozen=True)
class GaugeParams:
    q: float = 1.0
    A0: float = 0.0
    omega_c: float = 1.0
    pot: PotentialSpec = DOUBLE_WELL
    grid: Grid | None = None
    n_fock: int = 40
    n_matter_levels: int = 8

    def __post_init__(self):
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if self.n_matter_levels < 2:
            raise ValueError(f"n_matter_levels must be >= 2, got {self.n_matter_levels}")
        if self.grid is None:
            object.__setattr__(self, "grid", self.pot.default_grid())

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((self.n_matter_levels, self.n_fock))

    def matter(self) -> MatterEigensystem:
        return solve_double_well(self.grid, self.pot, max(self.n_matter_levels, 2))

    def omega_r(self, matter: MatterEigensystem | None = None) -> float:
        """Vacuum Rabi frequency q omega_c A0 <e|x|g>."""
        matter = matter or self.matter()
        return float(self.q * self.omega_c * self.A0 * abs(matter.x_elems[1, 0]))


def resonant_gauge_params(ratio: float, pot: PotentialSpec = DOUBLE_WELL, grid: Grid | None = None,
                          n_fock: int = 40, n_matter_levels: int = 8, q: float = 1.0) -> GaugeParams:
    """Gauge parameters with omega_c = E1 - E0 and Omega_R / omega_c = ratio."""
    grid = grid or pot.default_grid()
    matter = solve_double_well(grid, pot, max(n_matter_levels, 2))
    wc = float(matter.energies[1] - matter.energies[0])
    A0 = ratio / (q * abs(matter.x_elems[1, 0]))
    return GaugeParams(q=q, A0=A0, omega_c=wc, pot=pot, grid=grid, n_fock=n_fock,
                       n_matter_levels=n_matter_levels)


@dataclass(frozen=True)
class DickeParams:
    n_spins: int = 1
    omega_c: float = 1.0
    omega_eg: float = 1.0
    omega_r: float = 0.0
    n_fock: int = 20
    bosonized: bool = False
    n_matter_boson: int | None = field(default=None)

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError(f"n_spins must be >= 1, got {self.n_spins}")

    @property
    def space(self) -> HilbertSpace:
        if self.bosonized:
            return HilbertSpace((self.n_fock, self.n_matter_boson or self.n_fock))
        return HilbertSpace((2,) * self.n_spins + (self.n_fock,))


# ----------------------------------------------------------------------------
# excitation-number and parity operators

def excitation_number(space: HilbertSpace, spin_site: int = 0, fock_site: int = 1) -> Operator:
    """N = a^dag a + (sigma_z + 1)/2."""
    n = elementary_operators(space, fock_site, "number")
    sz = elementary_operators(space, spin_site, "sigma_z")
    return n + 0.5 * (sz + 1.0)


def excitation_labels(space: HilbertSpace, spin_site: int = 0, fock_site: int = 1) -> np.ndarray:
    return np.rint(np.real(np.diag(excitation_number(space, spin_site, fock_site).data))).astype(int)


def parity(space: HilbertSpace, spin_site: int = 0, fock_site: int = 1) -> Operator:
    """Pi = sigma_z exp(i pi a^dag a)."""
    sz = elementary_operators(space, spin_site, "sigma_z")
    n = np.arange(space.dims[fock_site])
    rot = Operator(space, _embed_diag(space, fock_site, np.cos(np.pi * n)))
    return sz @ rot


def _embed_diag(space, site, d):
    factors = [np.ones(k) for k in space.dims]
    factors[site] = np.asarray(d, float)
    return np.diag(reduce(np.kron, factors)).astype(complex)


# ----------------------------------------------------------------------------
# JCM and Rabi

def build_jcm(p: JcmParams) -> Operator:
    """w_c a^dag a + (w_eg/2) sigma_z + Omega_R (a sigma_+ + a^dag sigma_-)."""
    s = p.space
    a = elementary_operators(s, 1, "annihilate")
    sz = elementary_operators(s, 0, "sigma_z")
    sm = elementary_operators(s, 0, "sigma_minus")
    H = p.omega_c * (a.dag() @ a) + 0.5 * p.omega_eg * sz + p.omega_r * (a @ sm.dag() + a.dag() @ sm)
    return H


def analytic_jcm_spectrum(p: JcmParams, n_blocks: int) -> list[tuple[int, float, float]]:
    """Closed-form JCM levels (n, w_{n,+}, w_{n,-}); n = 0 repeats the scalar -w_eg/2."""
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    delta = p.omega_c - p.omega_eg
    out = [(0, -0.5 * p.omega_eg, -0.5 * p.omega_eg)]
    for n in range(1, n_blocks):
        root = np.sqrt(0.25 * delta ** 2 + p.omega_r ** 2 * n)
        base = -0.5 * p.omega_eg + p.omega_c * n - 0.5 * delta
        out.append((n, float(base + root), float(base - root)))
    return out


def jcm_sector_eigenvalues(H: Operator, n: int) -> np.ndarray:
    """Eigenvalues of H restricted to excitation number n (space [spin, fock])."""
    labels = excitation_labels(H.space)
    idx = np.nonzero(labels == n)[0]
    return np.linalg.eigvalsh(H.data[np.ix_(idx, idx)])


def _spin_boson(space: HilbertSpace, n_spins: int, omega_c, omega_eg, omega_r, epsilon=0.0) -> Operator:
    # shared by build_rabi and the full-spin Dicke branch so N = 1 matches bitwise
    f = n_spins
    a = elementary_operators(space, f, "annihilate")
    x = a + a.dag()
    H = omega_c * (a.dag() @ a)
    for i in range(n_spins):
        H = H + 0.5 * omega_eg * elementary_operators(space, i, "sigma_z")
    for i in range(n_spins):
        H = H + omega_r * (x @ elementary_operators(space, i, "sigma_x"))
    if epsilon != 0.0:
        for i in range(n_spins):
            H = H + 0.5 * epsilon * elementary_operators(space, i, "sigma_x")
    return H


def build_rabi(p: RabiParams, strict: bool = True) -> Operator:
    """w_c a^dag a + (w_eg/2) sigma_z + Omega_R (a + a^dag) sigma_x + (eps/2) sigma_x."""
    check_fock(p.n_fock, p.beta, strict, "rabi: ")
    eps = getattr(p, "epsilon", 0.0)
    return _spin_boson(p.space, 1, p.omega_c, p.omega_eg, p.omega_r, eps)


def gauge_field(space: HilbertSpace, beta: float) -> Operator:
    """Cavity electric field a + a^dag + 2 beta sigma_x of the dipole-gauge Rabi model.

    In the polaron frame this is simply a + a^dag, so its positive-frequency
    part gives gauge-consistent photodetection.
    """
    a = elementary_operators(space, 1, "annihilate")
    return a + a.dag() + 2.0 * beta * elementary_operators(space, 0, "sigma_x")


# ----------------------------------------------------------------------------
# polaron frame and gRWA

def _require_symmetric(p):
    if getattr(p, "epsilon", 0.0) != 0.0:
        raise ValueError("polaron-frame builders are defined for epsilon = 0 only")


def polaron_unitary(p: JcmParams, strict: bool = True) -> Operator:
    """U = exp[beta sigma_x (a - a^dag)], assembled from displacement operators."""
    beta = p.beta
    check_fock(p.n_fock, beta, strict, "polaron unitary: ")
    s = p.space
    Pp = 0.5 * np.array([[1, 1], [1, 1]], complex)   # sigma_x = +1
    Pm = 0.5 * np.array([[1, -1], [-1, 1]], complex)  # sigma_x = -1
    tol = np.inf if not strict else 1e-8
    Dm = local_displacement(p.n_fock, -beta, tol)
    Dp = local_displacement(p.n_fock, beta, tol)
    return Operator(s, np.kron(Pp, Dm) + np.kron(Pm, Dp))


def build_polaron_rabi(p: RabiParams, strict: bool = True) -> Operator:
    """Polaron-frame Rabi Hamiltonian.

    w_c a^dag a - Omega_R^2/w_c + (w_eg/2)[cos(theta) sigma_z - sin(theta) sigma_y],
    cos(theta) = (D(2b) + D(-2b))/2, sin(theta) = (D(-2b) - D(2b))/(2i), b = Omega_R/w_c.
    The constant keeps the spectrum identical to build_rabi.
    """
    _require_symmetric(p)
    beta = p.beta
    check_fock(p.n_fock, 2 * beta, strict, "polaron: ")
    s = p.space
    tol = np.inf if not strict else 1e-8
    Dp = local_displacement(p.n_fock, 2 * beta, tol)
    Dm = local_displacement(p.n_fock, -2 * beta, tol)
    cos_t = 0.5 * (Dp + Dm)
    sin_t = (Dm - Dp) / 2j
    sz = _local("sigma_z", 2)
    sy = _local("sigma_y", 2)
    a = elementary_operators(s, 1, "annihilate")
    H = p.omega_c * (a.dag() @ a) - (p.omega_r ** 2 / p.omega_c)
    H = H + Operator(s, 0.5 * p.omega_eg * (np.kron(sz, cos_t) - np.kron(sy, sin_t)))
    return H


def grwa_project(H_pol: Operator, spin_site: int = 0, fock_site: int = 1) -> Operator:
    """Keep only matrix elements between states of equal excitation number."""
    labels = excitation_labels(H_pol.space, spin_site, fock_site)
    mask = labels[:, None] == labels[None, :]
    return Operator(H_pol.space, np.where(mask, H_pol.data, 0.0))


def build_truncated_coulomb_tls(p: RabiParams, strict: bool = True) -> Operator:
    """Coulomb-gauge two-level Hamiltonian by minimal coupling inside the TLS space.

    U^dag [(w_eg/2) sigma_z] U + w_c a^dag a - Omega_R^2/w_c with
    U = exp[(Omega_R/w_c) sigma_x (a - a^dag)]; the constant is the same
    energy reference used by build_polaron_rabi.
    """
    _require_symmetric(p)
    s = p.space
    U = polaron_unitary(p, strict)
    a = elementary_operators(s, 1, "annihilate")
    Ha = 0.5 * p.omega_eg * elementary_operators(s, 0, "sigma_z")
    return U.dag() @ Ha @ U + p.omega_c * (a.dag() @ a) - (p.omega_r ** 2 / p.omega_c)


# ----------------------------------------------------------------------------
# gauge pair on the double-well matter system

def build_full_coulomb(g: GaugeParams, matter: MatterEigensystem | None = None) -> Operator:
    """(p - qA)^2/2m + V(x) + w_c a^dag a in the truncated matter eigenbasis.

    A = i A0 (a - a^dag). The quadratic A^2 term is kept exactly; p and x
    are the grid matrix elements between the first n_matter_levels states.
    """
    matter = matter or g.matter()
    nm, nf = g.n_matter_levels, g.n_fock
    s = g.space
    a = _local("annihilate", nf)
    Ahat = 1j * g.A0 * (a - a.conj().T)
    Hm = np.diag(matter.energies[:nm]).astype(complex)
    P = matter.p_elems[:nm, :nm]
    If, Im = np.eye(nf), np.eye(nm)
    H = (np.kron(Hm, If) + g.omega_c * np.kron(Im, a.conj().T @ a)
         - (g.q / matter.m) * np.kron(P, Ahat)
         + (g.q ** 2 / (2 * matter.m)) * np.kron(Im, Ahat @ Ahat))
    return Operator(s, H)


def gauge_unitary(g: GaugeParams, matter: MatterEigensystem | None = None, strict: bool = True) -> Operator:
    """U = exp[q A0 x (a - a^dag)] on the truncated matter x Fock space."""
    matter = matter or g.matter()
    nm, nf = g.n_matter_levels, g.n_fock
    X = matter.x_elems[:nm, :nm]
    xmax = float(np.max(np.abs(np.linalg.eigvalsh(X))))
    alpha = g.q * g.A0 * xmax
    check_fock(nf, alpha, strict, "gauge transform: ")
    if strict and coherent_tail(alpha, nf) > 1e-8:
        raise ConvergenceError(f"gauge transform: Fock space too small for displacement {alpha:.4g}")
    a = _local("annihilate", nf)
    K = g.q * g.A0 * np.kron(X, a - a.conj().T)
    return Operator(g.space, sla.expm(K))


def gauge_transform(H: Operator, g: GaugeParams, matter: MatterEigensystem | None = None,
                    strict: bool = True) -> Operator:
    """U H U^dag (Coulomb to dipole gauge)."""
    if H.space != g.space:
        raise DimensionError(f"H space {H.space.dims} differs from gauge space {g.space.dims}")
    U = gauge_unitary(g, matter, strict)
    return U @ H @ U.dag()


def project_two_level(H_full: Operator, matter: MatterEigensystem | None = None) -> Operator:
    """P H P with P = |g><g| + |e><e| on the matter site (site 0)."""
    nm, nf = H_full.space.dims
    if nm < 2:
        raise DimensionError("matter basis needs at least 2 levels")
    idx = np.arange(2 * nf)
    return Operator(HilbertSpace((2, nf)), H_full.data[np.ix_(idx, idx)])


def build_gauge_family(g: GaugeParams, strict: bool = True) -> dict[str, Operator]:
    """Full Coulomb, full dipole (by transformation) and their two-level projections."""
    matter = g.matter()
    HC = build_full_coulomb(g, matter)
    HD = gauge_transform(HC, g, matter, strict)
    return {
        "full_coulomb": HC,
        "full_dipole": HD,
        "coulomb": project_two_level(HC, matter),
        "dipole": project_two_level(HD, matter),
    }


# ----------------------------------------------------------------------------
# Dicke model

def build_dicke(d: DickeParams) -> Operator:
    """N spins on one mode; bosonized branch w_c a^dag a + w_eg b^dag b + sqrt(N) Omega (a+a^dag)(b+b^dag)."""
    s = d.space
    if d.bosonized:
        a = elementary_operators(s, 0, "annihilate")
        b = elementary_operators(s, 1, "annihilate")
        g = np.sqrt(d.n_spins) * d.omega_r
        return d.omega_c * (a.dag() @ a) + d.omega_eg * (b.dag() @ b) + g * ((a + a.dag()) @ (b + b.dag()))
    if s.total > MAX_FULL_SPIN_DIM:
        raise DimensionError(f"full-spin Dicke space 2^{d.n_spins} x {d.n_fock} = {s.total} exceeds {MAX_FULL_SPIN_DIM}")
    return _spin_boson(s, d.n_spins, d.omega_c, d.omega_eg, d.omega_r)


def collective_lowering(d: DickeParams) -> Operator:
    """b = sum_i sigma_-^i / sqrt(N) on the full-spin space."""
    s = d.space
    if s.total > MAX_FULL_SPIN_DIM:
        raise DimensionError(f"full-spin space dimension {s.total} exceeds {MAX_FULL_SPIN_DIM}")
    b = sum((elementary_operators(s, i, "sigma_minus") for i in range(d.n_spins)),
            Operator(s, np.zeros((s.total, s.total))))
    return b / np.sqrt(d.n_spins)


def symmetric_dicke_state(d: DickeParams, n_x: int) -> Ket:
    """Symmetric n_x-excitation spin state, cavity in vacuum."""
    N = d.n_spins
    if not 0 <= n_x <= N:
        raise ValueError(f"n_x must lie in [0, {N}]")
    s = d.space
    v = np.zeros(s.total, complex)
    for k in range(2 ** N):
        bits = [(k >> (N - 1 - i)) & 1 for i in range(N)]
        if sum(bits) == n_x:
            v[s.basis_index(bits + [0])] = 1.0
    return Ket(s, v / np.linalg.norm(v))


def hp_commutator_expectation(d: DickeParams, state: Ket) -> float:
    """<state| [b, b^dag] |state> with b the collective spin lowering operator."""
    b = collective_lowering(d)
    c = b @ b.dag() - b.dag() @ b
    return float(np.real(c.expect(state)))
