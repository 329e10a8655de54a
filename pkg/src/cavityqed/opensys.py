"""Open-system engines: Liouvillians, steady states, gaps and emission rates.

Density matrices are vectorized by column stacking, vec(A rho B) = (B^T kron A) vec(rho).
Superoperators are stored as scipy sparse matrices. The standard kind lives
in the bare basis; the dressed and generalized kinds are assembled in the
energy eigenbasis of H and keep that frame, so their steady states and
spectra decompose into small blocks.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import expm_multiply, splu

from .analysis import SweepResult
from .errors import CavityQEDError, DegenerateSteadyStateError, DimensionError, NotHermitianError, SolverError
from .models import RabiParams, TruncationWarning, build_rabi, gauge_field
from .opcore import EigenSystem, HilbertSpace, Operator, eig_hermitian, elementary_operators

KINDS = ("standard", "dressed", "generalized")
SPECTRA = ("flat", "ohmic")
DEGENERATE_OMEGA = 1e-10
ZERO_EIG = 1e-10
RESIDUAL_TOL = 1e-8
POSITIVITY_TOL = 1e-8


def n_thermal(omega, T: float) -> np.ndarray:
    """Bose-Einstein occupation 1/(exp(w/T) - 1); zero for T = 0 or w <= 0."""
    w = np.asarray(omega, float)
    if T <= 0:
        return np.zeros_like(w)
    out = np.zeros_like(w)
    pos = w > 0
    with np.errstate(over="ignore"):
        out[pos] = 1.0 / np.expm1(w[pos] / T)
    return out


@dataclass(frozen=True, eq=False)
class BathSpec:
    """One reservoir coupled through a Hermitian system operator.

    ``coupling`` enters the eigenbasis kinds through <j|X|k>; ``lowering`` is
    the bare jump operator of the standard kind, whose thermal factor uses
    the bare ``frequency``. gamma(w) = gamma0 (flat) or gamma0 w/omega_ref
    (ohmic) for w > 0, and 0 otherwise.
    """
    coupling: Operator
    gamma0: float = 1e-3
    temperature: float = 0.0
    spectrum: str = "flat"
    lowering: Operator | None = None
    frequency: float = 1.0
    omega_ref: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.gamma0 < 0:
            raise ValueError(f"gamma0 must be >= 0, got {self.gamma0}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.spectrum not in SPECTRA:
            raise ValueError(f"spectrum must be one of {SPECTRA}, got {self.spectrum!r}")

    def rate(self, omega) -> np.ndarray:
        w = np.asarray(omega, float)
        if self.spectrum == "flat":
            g = np.full_like(w, self.gamma0)
        else:
            g = self.gamma0 * w / self.omega_ref
        return np.where(w > 0, g, 0.0)

    def nth(self, omega) -> np.ndarray:
        return n_thermal(omega, self.temperature)

    @classmethod
    def cavity(cls, space: HilbertSpace, beta: float = 0.0, gamma0: float = 1e-3, temperature: float = 0.0,
               spectrum: str = "flat", omega_c: float = 1.0, photon_site: int = 1) -> "BathSpec":
        """Cavity loss through the field a + a^dag + 2 beta sigma_x (site order [spin, fock])."""
        X = gauge_field(space, beta) if beta != 0.0 else None
        a = elementary_operators(space, photon_site, "annihilate")
        if X is None:
            X = a + a.dag()
        return cls(X, gamma0, temperature, spectrum, a, omega_c, omega_c, "cavity")

    @classmethod
    def atom(cls, space: HilbertSpace, gamma0: float = 1e-3, temperature: float = 0.0, spectrum: str = "flat",
             omega_eg: float = 1.0, spin_site: int = 0) -> "BathSpec":
        sx = elementary_operators(space, spin_site, "sigma_x")
        sm = elementary_operators(space, spin_site, "sigma_minus")
        return cls(sx, gamma0, temperature, spectrum, sm, omega_eg, 1.0, "atom")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: HilbertSpace
    data: np.ndarray

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])

    def expect(self, op) -> float:
        m = op.data if isinstance(op, Operator) else np.asarray(op)
        return float(np.real(np.trace(m @ self.data)))

    @classmethod
    def pure(cls, ket) -> "DensityMatrix":
        return cls(ket.space, ket.projector())


@dataclass(frozen=True, eq=False)
class Liouvillian:
    kind: str
    matrix: sp.csr_matrix
    eigs: EigenSystem
    frame: str            # "bare" or "eigen"
    space: HilbertSpace
    secular_threshold: float | None = None

    @property
    def dim(self) -> int:
        return self.space.total

    def to_frame(self, rho) -> np.ndarray:
        r = _rho_array(rho)
        return self.eigs.to_eigenbasis(r) if self.frame == "eigen" else r

    def from_frame(self, r: np.ndarray) -> np.ndarray:
        return self.eigs.from_eigenbasis(r) if self.frame == "eigen" else r

    def apply(self, rho) -> np.ndarray:
        """L rho, input and output in the bare basis."""
        D = self.dim
        out = self.matrix @ vec(self.to_frame(rho))
        return self.from_frame(unvec(out, D))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _rho_array(rho) -> np.ndarray:
    if isinstance(rho, (DensityMatrix, Operator)):
        return rho.data
    return np.asarray(rho, complex)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, D: int) -> np.ndarray:
    return np.asarray(v).reshape(D, D, order="F")


# ----------------------------------------------------------------------------
# superoperator primitives (column stacking)

def _csr(A) -> sp.csr_matrix:
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=complex)
    m = A.data if isinstance(A, Operator) else A
    return sp.csr_matrix(np.asarray(m, complex))


def spre(A) -> sp.csr_matrix:
    A = _csr(A)
    return sp.kron(sp.identity(A.shape[0], complex, "csr"), A, "csr")


def spost(B) -> sp.csr_matrix:
    B = _csr(B)
    return sp.kron(B.T, sp.identity(B.shape[0], complex, "csr"), "csr")


def sprepost(A, B) -> sp.csr_matrix:
    return sp.kron(_csr(B).T, _csr(A), "csr")


def dissipator(S) -> sp.csr_matrix:
    """D[S] rho = S rho S^dag - (S^dag S rho + rho S^dag S)/2."""
    s = S.data if isinstance(S, Operator) else np.asarray(S, complex)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionError(f"dissipator needs a square operator, got shape {s.shape}")
    ss = s.conj().T @ s
    return (sprepost(s, s.conj().T) - 0.5 * spre(ss) - 0.5 * spost(ss)).tocsr()


def commutator_super(H) -> sp.csr_matrix:
    """-i[H, .]."""
    return (-1j * (spre(H) - spost(H))).tocsr()


# ----------------------------------------------------------------------------
# Liouvillian assembly

def _transitions(eigs: EigenSystem, bath: BathSpec):
    """Energy-lowering transitions k -> j (w_k - w_j > 0) with nonzero amplitude."""
    w = eigs.values
    s = eigs.to_eigenbasis(bath.coupling)
    om = w[None, :] - w[:, None]
    j, k = np.nonzero((om > DEGENERATE_OMEGA) & (np.abs(s) > 0))
    om_t = om[j, k]
    J = bath.rate(om_t)
    n = bath.nth(om_t)
    keep = J > 0
    return j[keep], k[keep], om_t[keep], s[j, k][keep], (0.5 * J * (n + 1))[keep], (0.5 * J * n)[keep]


def _pairs(omega: np.ndarray, delta: float | None):
    """Index pairs (p, q) of transitions with |w_p - w_q| < delta; delta None -> only p == q."""
    n = len(omega)
    if delta is None or n == 0:
        idx = np.arange(n)
        return idx, idx
    order = np.argsort(omega, kind="stable")
    ws = omega[order]
    lo = np.searchsorted(ws, ws - delta, side="right")
    hi = np.searchsorted(ws, ws + delta, side="left")
    counts = hi - lo
    p_sorted = np.repeat(np.arange(n), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    q_sorted = np.repeat(lo, counts) + offs
    return order[p_sorted], order[q_sorted]


def _eigenframe_dissipator(eigs: EigenSystem, bath: BathSpec, delta: float | None) -> sp.csr_matrix:
    D = len(eigs.values)
    j, k, om, L, Wd, Wu = _transitions(eigs, bath)
    p, q = _pairs(om, delta)
    jp, kp, Lp = j[p], k[p], L[p]
    lq, mq, Lq = j[q], k[q], L[q]
    rows, cols, vals = [], [], []
    # emission: A_q rho A_p^dag + A_p rho A_q^dag, weight Wd(q)
    rows += [lq + jp * D, jp + lq * D]
    cols += [mq + kp * D, kp + mq * D]
    vals += [Wd[q] * Lq * Lp.conj(), Wd[q] * Lp * Lq.conj()]
    K = np.zeros((D, D), complex)
    sel = jp == lq
    np.add.at(K, (kp[sel], mq[sel]), Wd[q][sel] * Lp[sel].conj() * Lq[sel])
    if np.any(Wu > 0):
        # absorption: A_q^dag rho A_p + A_p^dag rho A_q, weight Wu(q)
        rows += [mq + kp * D, kp + mq * D]
        cols += [lq + jp * D, jp + lq * D]
        vals += [Wu[q] * Lq.conj() * Lp, Wu[q] * Lp.conj() * Lq]
        sel = kp == mq
        np.add.at(K, (jp[sel], lq[sel]), Wu[q][sel] * Lp[sel] * Lq[sel].conj())
    T = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(D * D, D * D))
    return (T - spre(K) - spost(K.conj().T)).tocsr()


def build_liouvillian(H: Operator, baths: Sequence[BathSpec], kind: str = "dressed",
                      secular_threshold: float | None = None) -> Liouvillian:
    """Master-equation generator including -i[H, .].

    standard: sum over baths of g(n+1) D[S] + g n D[S^dag] with bare S and
    g = gamma(frequency). dressed: eigenbasis jumps |j><k| weighted by
    |<j|X|k>|^2 gamma(w_kj) (n+1), plus the reverse with n. generalized: as
    dressed plus cross terms between transitions of one bath whose Bohr
    frequencies differ by less than the secular threshold (default 10 max gamma0).
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    defect = H.hermiticity_defect()
    if defect > 1e-10 * max(1.0, float(np.max(np.abs(H.data)))):
        raise NotHermitianError(defect)
    eigs = eig_hermitian(H)
    if kind == "standard":
        L = commutator_super(H)
        for b in baths:
            S = b.lowering if b.lowering is not None else b.coupling
            g = float(b.rate(b.frequency))
            n = float(b.nth(b.frequency))
            L = L + g * (n + 1) * dissipator(S)
            if n > 0:
                L = L + g * n * dissipator(S.dag())
        return Liouvillian(kind, L.tocsr(), eigs, "bare", H.space)
    D = H.space.total
    w = eigs.values
    diag = -1j * (w[:, None] - w[None, :])
    L = sp.diags(vec(diag)).tocsr()
    delta = None
    if kind == "generalized":
        delta = secular_threshold if secular_threshold is not None else 10 * max((b.gamma0 for b in baths), default=0.0)
    for b in baths:
        L = L + _eigenframe_dissipator(eigs, b, delta)
    L.eliminate_zeros()
    return Liouvillian(kind, L.tocsr(), eigs, "eigen", H.space, delta)


# ----------------------------------------------------------------------------
# observables

def positive_frequency_part(S, eigs: EigenSystem, tol: float = DEGENERATE_OMEGA) -> Operator:
    """E+ = sum_{w_k > w_j} <j|S|k> |j><k|, returned in the bare basis.

    Elements between levels closer than ``tol`` are dropped.
    """
    s = eigs.to_eigenbasis(S)
    w = eigs.values
    mask = (w[None, :] - w[:, None]) > tol
    Ep = eigs.from_eigenbasis(np.where(mask, s, 0.0))
    space = S.space if isinstance(S, Operator) else eigs.space
    return Operator(space, Ep)


def photodetection_rate(rho, E_plus, rate: float = 1.0) -> float:
    """rate * Tr(E- E+ rho)."""
    r = _rho_array(rho)
    e = E_plus.data if isinstance(E_plus, Operator) else np.asarray(E_plus)
    return float(rate * np.real(np.trace(e.conj().T @ e @ r)))


# ----------------------------------------------------------------------------
# steady state and spectrum

def _blocks(M: sp.csr_matrix):
    n, labels = connected_components(abs(M) + abs(M.T), directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.cumsum(np.bincount(labels, minlength=n))[:-1]
    return np.split(order, splits)


SVD_BLOCK = 400


def _nullity(A: np.ndarray, rtol: float = 1e-12) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s <= rtol * max(s[0], 1e-300)))


def _solve_block(A, tr: np.ndarray) -> np.ndarray:
    """Solve A x = 0 with the trace row sum(tr * x) = 1 replacing one population row.

    Small blocks use dense LU with a condition estimate; large blocks use a
    sparse LU, where an exactly singular factor signals a second null vector.
    """
    r = int(np.nonzero(tr)[0][0])
    b = np.zeros(len(tr), complex)
    b[r] = 1.0
    if sp.issparse(A):
        A = A.tolil()
        A[r, :] = tr
        try:
            return splu(A.tocsc()).solve(b)
        except RuntimeError as exc:
            raise DegenerateSteadyStateError(2) from exc
    A = A.copy()
    A[r, :] = tr
    lu, piv = sla.lu_factor(A, check_finite=False)
    anorm = np.linalg.norm(A, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm)
    if info != 0 or rcond < 1e-15:
        raise DegenerateSteadyStateError(2)
    return sla.lu_solve((lu, piv), b, check_finite=False)


def steady_state(L: Liouvillian) -> DensityMatrix:
    """Unique fixed point of L with unit trace.

    The generator is split into connected blocks and exactly one null vector
    may exist among them. Small blocks are rank-tested by SVD; a large block
    is taken to hold a null vector when the trace functional annihilates it
    from the left, and a second one shows up as a singular bordered system.
    Residual and positivity are checked, never enforced.
    """
    D = L.dim
    M = L.matrix
    is_diag = np.zeros(D * D, bool)
    is_diag[np.arange(D) * (D + 1)] = True
    nullity = 0
    found = None
    for blk in _blocks(M):
        if len(blk) == 1:
            if abs(M[blk[0], blk[0]]) <= ZERO_EIG:
                nullity += 1
                found = blk
            continue
        A = M[blk][:, blk]
        if len(blk) <= SVD_BLOCK:
            k = _nullity(A.toarray())
        else:
            y = is_diag[blk].astype(complex)
            scale = max(float(abs(A).max()), 1e-300)
            k = int(y.any() and np.max(np.abs(A.T @ y)) <= 1e-12 * scale)
        if k:
            nullity += k
            found = blk
    if nullity != 1:
        raise DegenerateSteadyStateError(nullity)
    blk = found
    tr = is_diag[blk].astype(complex)
    if not tr.any():
        raise SolverError("steady-state block carries no population")
    x = np.zeros(D * D, complex)
    A = M[blk][:, blk]
    x[blk] = _solve_block(A.toarray() if len(blk) <= SVD_BLOCK else A, tr)
    res = float(np.max(np.abs(M @ x)))
    if res > RESIDUAL_TOL:
        raise SolverError(f"steady-state residual {res:.2e} exceeds {RESIDUAL_TOL:.0e}")
    rho = unvec(x, D)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    rho = L.from_frame(rho)
    dm = DensityMatrix(L.space, rho)
    lam = dm.min_eigenvalue()
    if lam < -POSITIVITY_TOL:
        msg = f"steady state has negative eigenvalue {lam:.2e}"
        if L.kind == "generalized":
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        else:
            raise SolverError(msg)
    return dm


def liouvillian_spectrum(L: Liouvillian) -> np.ndarray:
    """All eigenvalues of L, block by block."""
    M = L.matrix
    out = []
    for blk in _blocks(M):
        if len(blk) == 1:
            out.append(np.array([M[blk[0], blk[0]]], complex))
        else:
            try:
                out.append(np.linalg.eigvals(M[blk][:, blk].toarray()))
            except np.linalg.LinAlgError as exc:
                raise SolverError(f"Liouvillian eigenvalues failed: {exc}") from exc
    return np.concatenate(out)


def liouvillian_gap(L: Liouvillian, zero_tol: float = ZERO_EIG) -> float:
    """-max Re(lambda) over nonzero eigenvalues."""
    lam = liouvillian_spectrum(L)
    nz = lam[np.abs(lam) > zero_tol]
    if nz.size == 0:
        return 0.0
    return float(-np.max(nz.real))


def lindblad_evolve(rho0, L: Liouvillian, t: float) -> DensityMatrix:
    """exp(L t) rho0 via a Krylov action on the vectorized state."""
    if t < 0:
        raise ValueError("t must be >= 0")
    D = L.dim
    v = vec(L.to_frame(rho0))
    if t > 0:
        v = expm_multiply(L.matrix * t, v)
    rho = L.from_frame(unvec(v, D))
    tr = np.trace(rho)
    if abs(tr - 1) > 1e-9 * max(1.0, abs(np.trace(_rho_array(rho0)))):
        raise SolverError(f"trace drifted to {tr:.12g}")
    dm = DensityMatrix(L.space, 0.5 * (rho + rho.conj().T))
    if dm.min_eigenvalue() < -POSITIVITY_TOL and L.kind != "generalized":
        raise SolverError(f"evolved state lost positivity: {dm.min_eigenvalue():.2e}")
    return dm


def lindblad_series(rho0, L: Liouvillian, times: Sequence[float]) -> list[DensityMatrix]:
    """exp(L t) rho0 on an ascending time grid.

    On a uniform grid one step propagator per connected block of L is built
    with expm and applied repeatedly; other grids fall back to lindblad_evolve.
    """
    t = np.asarray(times, float)
    if t.ndim != 1 or len(t) == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be a nonempty ascending grid with t >= 0")
    dt = np.diff(t)
    if len(t) > 1 and np.max(np.abs(dt - dt[0])) > 1e-9 * max(t[-1], 1.0):
        return [lindblad_evolve(rho0, L, float(x)) for x in t]
    D = L.dim
    v0 = vec(L.to_frame(rho0))
    if t[0] > 0:
        v0 = expm_multiply(L.matrix * t[0], v0)
    steps = np.zeros((len(t), D * D), complex)
    steps[0] = v0
    M = L.matrix
    for blk in _blocks(M):
        vb = v0[blk]
        if not np.any(vb) or len(t) == 1:
            steps[:, blk] = vb
            continue
        P = sla.expm(M[blk][:, blk].toarray() * dt[0])
        for i in range(1, len(t)):
            vb = P @ vb
            steps[i, blk] = vb
    out = []
    tr0 = np.trace(_rho_array(rho0))
    for v in steps:
        rho = L.from_frame(unvec(v, D))
        if abs(np.trace(rho) - tr0) > 1e-9 * max(1.0, abs(tr0)):
            raise SolverError(f"trace drifted to {np.trace(rho):.12g}")
        dm = DensityMatrix(L.space, 0.5 * (rho + rho.conj().T))
        if dm.min_eigenvalue() < -POSITIVITY_TOL and L.kind != "generalized":
            raise SolverError(f"evolved state lost positivity: {dm.min_eigenvalue():.2e}")
        out.append(dm)
    return out


# ----------------------------------------------------------------------------
# Rabi-model open-system sweeps

def rabi_open_system(ratio: float, n_fock: int = 20, omega_c: float = 1.0, omega_eg: float = 1.0,
                     gamma0: float = 1e-3, T_a: float = 0.0, T_c: float = 0.0, spectrum: str = "flat"):
    """Rabi Hamiltonian with cavity (gauge field) and atom baths."""
    p = RabiParams(omega_c, omega_eg, ratio * omega_c, n_fock)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        H = build_rabi(p, strict=False)
    truncated = any(issubclass(w.category, TruncationWarning) for w in caught)
    s = p.space
    baths = [BathSpec.cavity(s, p.beta, gamma0, T_c, spectrum, omega_c),
             BathSpec.atom(s, gamma0, T_a, spectrum, omega_eg)]
    return H, baths, truncated


def emission_rates(ratio: float, kinds=KINDS, **kw) -> dict[str, float]:
    """Steady-state photon emission rate per master-equation kind.

    standard: gamma <a^dag a>; dressed and generalized: gamma Tr(E- E+ rho)
    with E the gauge field of the cavity bath.
    """
    H, baths, _ = rabi_open_system(ratio, **kw)
    cav = baths[0]
    g = float(cav.rate(cav.frequency))
    out = {}
    for kind in kinds:
        L = build_liouvillian(H, baths, kind)
        rho = steady_state(L)
        if kind == "standard":
            out[kind] = g * rho.expect(cav.lowering.dag() @ cav.lowering)
        else:
            Ep = positive_frequency_part(cav.coupling, L.eigs)
            out[kind] = photodetection_rate(rho, Ep, g)
    return out


def emission_sweep(couplings: Sequence[float], kinds=KINDS, n_fock: int = 20, omega_c: float = 1.0,
                   omega_eg: float = 1.0, gamma0: float = 1e-3, T_a: float = 0.05, T_c: float = 0.0,
                   spectrum: str = "flat") -> SweepResult:
    """W_ph(Omega_R / w_c) per kind; T_a is in units of omega_eg."""
    g = np.asarray(couplings, float)
    cols = {f"W_{k}": np.full(len(g), np.nan) for k in kinds}
    res = SweepResult("coupling", g, cols, dict(n_fock=n_fock, gamma0=gamma0, T_a=T_a, T_c=T_c,
                                                 spectrum=spectrum, kinds=",".join(kinds)))
    truncated = []
    for i, gi in enumerate(g):
        try:
            _, _, tr = rabi_open_system(gi, n_fock, omega_c, omega_eg, gamma0, 0, 0, spectrum)
            if tr:
                truncated.append(float(gi))
            rates = emission_rates(gi, kinds, n_fock=n_fock, omega_c=omega_c, omega_eg=omega_eg,
                                   gamma0=gamma0, T_a=T_a * omega_eg, T_c=T_c, spectrum=spectrum)
            for k, v in rates.items():
                cols[f"W_{k}"][i] = v
        except CavityQEDError as exc:
            res.failures.append((i, str(exc)))
    if truncated:
        res.metadata["fock_rule_violated_from"] = min(truncated)
    return res


def gap_sweep(couplings: Sequence[float], kind: str = "dressed", n_fock: int = 20, omega_c: float = 1.0,
              omega_eg: float = 1.0, gamma0: float = 1e-3, T: float = 0.0, spectrum: str = "ohmic") -> SweepResult:
    g = np.asarray(couplings, float)
    gaps = np.full(len(g), np.nan)
    res = SweepResult("coupling", g, {"gap": gaps}, dict(kind=kind, n_fock=n_fock, gamma0=gamma0, T=T,
                                                          spectrum=spectrum))
    for i, gi in enumerate(g):
        try:
            H, baths, _ = rabi_open_system(gi, n_fock, omega_c, omega_eg, gamma0, T, T, spectrum)
            gaps[i] = liouvillian_gap(build_liouvillian(H, baths, kind))
        except CavityQEDError as exc:
            res.failures.append((i, str(exc)))
    return res
