"""Regime metrics, spectral sweeps and ground-state observables."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CavityQEDError
from .models import RabiParams, build_rabi
from .opcore import (HilbertSpace, Ket, Operator, eig_hermitian, elementary_operators,
                     local_displacement)

ALPHA_FS = 1.0 / 137.0
USC_ZETA = 0.04
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class RegimeMetrics:
    zeta: float
    cooperativity: float
    classification: str


def regime_metrics(omega_c: float, omega_eg: float, omega_r: float,
                   gamma: float = np.inf, kappa: float = np.inf) -> RegimeMetrics:
    """zeta = 4 W^2/(w_c w_eg), C = 4 W^2/(gamma kappa) and the regime label.

    Labels: deep-strong if W > max(w_c, w_eg); USC if zeta >= 0.04;
    strong if C > 1; weak otherwise. Loss rates default to infinity
    (C = 0) when only zeta matters.
    """
    if omega_c <= 0 or omega_eg <= 0:
        raise ValueError(f"bare frequencies must be > 0, got omega_c={omega_c}, omega_eg={omega_eg}")
    if omega_r < 0:
        raise ValueError(f"omega_r must be >= 0, got {omega_r}")
    if gamma <= 0 or kappa <= 0:
        raise ValueError("loss rates must be > 0")
    zeta = 4 * omega_r ** 2 / (omega_c * omega_eg)
    coop = 4 * omega_r ** 2 / (gamma * kappa)
    if omega_r > max(omega_c, omega_eg):
        label = "deep-strong"
    elif zeta >= USC_ZETA:
        label = "USC"
    elif coop > 1:
        label = "strong"
    else:
        label = "weak"
    return RegimeMetrics(float(zeta), float(coop), label)


# reference platforms: (system, w_c, w_eg, W, quoted zeta); frequencies in their native units
PLATFORMS = (
    ("superconducting circuits", 35.2, 23.9, 35.2, 6.0),
    ("molecular plasmonic cavities", 452.0, 452.0, 73.0, 0.03),
    ("graphene quantum dots", 25.0, 3.8, 49.0, 101.0),
)

MOLECULAR_ROW_NOTE = ("molecular row: 4*73^2/452^2 = 0.104 from the zeta definition; the quoted 0.03 "
               "equals W^2/(w_c w_eg) without the factor 4")


def platform_metrics() -> list[dict]:
    rows = []
    for name, wc, weg, wr, quoted in PLATFORMS:
        m = regime_metrics(wc, weg, wr)
        rows.append(dict(system=name, omega_c=wc, omega_eg=weg, omega_r=wr, zeta=m.zeta,
                         zeta_reference=quoted, classification=m.classification))
    return rows


def single_atom_coupling_bound(ell: int, V: float, Z: float | None = None, Z0: float | None = None,
                               exponent: int = 1, alpha_fs: float = ALPHA_FS) -> float:
    """W/w_c ~ alpha^(3/2) / (ell pi sqrt(V)), alpha optionally rescaled by (Z/Z0)^exponent."""
    if ell < 1 or V <= 0:
        raise ValueError(f"need ell >= 1 and V > 0, got ell={ell}, V={V}")
    a = alpha_fs
    if Z is not None or Z0 is not None:
        if Z is None or Z0 is None or Z <= 0 or Z0 <= 0:
            raise ValueError("impedance rescaling needs positive Z and Z0")
        if exponent not in (1, -1):
            raise ValueError("impedance exponent must be +1 or -1")
        a = (Z / Z0) ** exponent * a
    return float(a ** 1.5 / (ell * np.pi * np.sqrt(V)))


def rwa_boundary(omega_c: float, omega_eg: float, omega_r: float) -> float:
    """Largest excitation number n_max = (w_c + w_eg)^2 / W^2 for which the RWA holds."""
    if omega_r <= 0:
        return float("inf")
    return float((omega_c + omega_eg) ** 2 / omega_r ** 2)


# ----------------------------------------------------------------------------
# sweeps

@dataclass
class SweepResult:
    axis_name: str
    axis: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    failures: list[tuple[int, str]] = field(default_factory=list)

    def header(self) -> list[str]:
        return [self.axis_name] + list(self.columns)

    def rows(self) -> np.ndarray:
        return np.column_stack([self.axis] + [np.asarray(c, float) for c in self.columns.values()])


class SweepError(CavityQEDError):
    def __init__(self, result: SweepResult):
        super().__init__(f"{len(result.failures)} sweep point(s) failed: "
                         + "; ".join(f"#{i}: {m}" for i, m in result.failures[:3]))
        self.result = result


def spectrum_sweep(builder: Callable[[float], Operator], couplings: Sequence[float], k_levels: int,
                   relative: bool = False, axis_name: str = "coupling", raise_on_failure: bool = True) -> SweepResult:
    """Lowest k_levels eigenvalues of builder(g) for each g.

    Failed points are recorded as NaN rows; a SweepError carrying the
    partial result is raised at the end if any point failed.
    """
    g = np.asarray(couplings, float)
    out = np.full((len(g), k_levels), np.nan)
    res = SweepResult(axis_name, g, {}, {"k_levels": k_levels, "relative": relative})
    for i, gi in enumerate(g):
        try:
            w = eig_hermitian(builder(float(gi))).values[:k_levels]
            out[i, :len(w)] = w - w[0] if relative else w
        except (CavityQEDError, np.linalg.LinAlgError, ValueError) as exc:
            res.failures.append((i, str(exc)))
    res.columns = {f"E{k}": out[:, k] for k in range(k_levels)}
    if res.failures and raise_on_failure:
        raise SweepError(res)
    return res


# ----------------------------------------------------------------------------
# ground-state observables

def ground_manifold(H: Operator, abs_tol: float = DEGENERACY_TOL, rel_tol: float | None = None):
    """Lowest eigenvalue cluster of H.

    Levels join the cluster while their distance to the ground energy is
    below ``abs_tol``, or below ``rel_tol`` times the gap to the next level
    outside the cluster. Returns (values, vectors).
    """
    es = eig_hermitian(H)
    w = es.values
    k = 1
    while k < len(w):
        d = w[k] - w[0]
        nxt = w[k + 1] - w[k] if k + 1 < len(w) else np.inf
        if d < abs_tol or (rel_tol is not None and d < rel_tol * nxt):
            k += 1
        else:
            break
    return w[:k], es.vectors[:, :k]


def ground_state_photons(H: Operator, photon_site: int = 1, abs_tol: float = DEGENERACY_TOL,
                         return_degeneracy: bool = False):
    """<a^dag a> in the ground state; averaged over a degenerate ground subspace."""
    n = elementary_operators(H.space, photon_site, "number").data
    _, V = ground_manifold(H, abs_tol)
    val = float(np.real(np.trace(V.conj().T @ n @ V))) / V.shape[1]
    if return_degeneracy:
        return val, V.shape[1]
    return val


def photons_vs_coupling(ratios: Sequence[float], omega_eg: float = 1.0, n_fock: int = 30, omega_c: float = 1.0,
                        strict: bool = True) -> np.ndarray:
    return np.array([ground_state_photons(build_rabi(RabiParams(omega_c, omega_eg, r * omega_c, n_fock), strict))
                     for r in ratios])


class PlateauError(CavityQEDError):
    pass


def perturbative_photon_coefficient(omega_eg: float = 1.0, omega_c: float = 1.0, ratios=(0.01, 0.02),
                                    n_fock: int = 30, plateau_tol: float = 0.05) -> float:
    """c in <a^dag a> ~ c (W/w_c)^2, Richardson-extrapolated to W -> 0.

    The ratio c(b) = <n>/b^2 is evaluated at two small couplings; their
    relative spread must stay below ``plateau_tol``.
    """
    b1, b2 = ratios
    c1, c2 = photons_vs_coupling(ratios, omega_eg, n_fock, omega_c) / np.array(ratios) ** 2
    if abs(c1 - c2) / abs(c1) > plateau_tol:
        raise PlateauError(f"no plateau: c({b1})={c1:.6g}, c({b2})={c2:.6g}")
    # c(b) = c0 + c2 b^2 + ...
    return float((b2 ** 2 * c1 - b1 ** 2 * c2) / (b2 ** 2 - b1 ** 2))


def cat_state(alpha: float, n_fock: int) -> Ket:
    """(|alpha, right> + |-alpha, left>)/sqrt(2), |left/right> = (|e> +/- |g>)/sqrt(2)."""
    space = HilbertSpace((2, n_fock))
    g, e = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    left, right = (e + g) / np.sqrt(2), (e - g) / np.sqrt(2)
    vac = np.zeros(n_fock)
    vac[0] = 1.0
    Dp = local_displacement(n_fock, alpha)
    Dm = local_displacement(n_fock, -alpha)
    v = np.kron(right, Dp @ vac) + np.kron(left, Dm @ vac)
    return Ket(space, v / np.linalg.norm(v))


def cat_fidelity(ground, alpha: float) -> float:
    """Weight of the cat state inside the ground state or ground subspace.

    ``ground`` is a Ket, or a matrix whose orthonormal columns span a
    (quasi-)degenerate ground manifold, as returned by ground_manifold.
    """
    if isinstance(ground, Ket):
        V = ground.amplitudes[:, None]
    else:
        V = np.asarray(ground, complex)
        if V.ndim == 1:
            V = V[:, None]
    n_fock = V.shape[0] // 2
    cat = cat_state(alpha, n_fock).amplitudes
    return float(np.sum(np.abs(V.conj().T @ cat) ** 2))


def effective_mass(m: float, omega_r: float, omega_c: float) -> float:
    """m [1 + 2 (W/w_c)^2]."""
    if m <= 0 or omega_c <= 0 or omega_r < 0:
        raise ValueError("effective_mass needs m > 0, omega_c > 0, omega_r >= 0")
    return float(m * (1 + 2 * (omega_r / omega_c) ** 2))


def rwa_overlay(omega_c: float, omega_eg: float, couplings: Sequence[float]) -> np.ndarray:
    """Energy w_c n_max(W) of the RWA validity boundary."""
    return np.array([omega_c * rwa_boundary(omega_c, omega_eg, g) for g in couplings])


def analytic_jcm_levels(p, k_levels: int) -> np.ndarray:
    """Lowest k_levels closed-form JCM energies, sorted."""
    from .models import analytic_jcm_spectrum
    n_blocks = k_levels + 2
    vals = [-0.5 * p.omega_eg]
    for n, wp, wm in analytic_jcm_spectrum(p, n_blocks)[1:]:
        vals += [wp, wm]
    return np.sort(vals)[:k_levels]


def min_gap_along(builder: Callable[[float], Operator], grid: Sequence[float], levels=(0, 1)) -> float:
    """Smallest gap between two levels along a parameter sweep."""
    i, j = levels
    gaps = [np.diff(eig_hermitian(builder(float(x))).values[[i, j]])[0] for x in grid]
    return float(np.min(gaps))
