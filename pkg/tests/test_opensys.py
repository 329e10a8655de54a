import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavityqed.errors import DegenerateSteadyStateError, DimensionError, NotHermitianError
from cavityqed.models import JcmParams, RabiParams, build_jcm, build_polaron_rabi
from cavityqed.opcore import HilbertSpace, Operator, eig_hermitian, elementary_operators
from cavityqed.opensys import (BathSpec, KINDS, build_liouvillian, dissipator, emission_rates, emission_sweep,
                               gap_sweep, lindblad_evolve, lindblad_series, liouvillian_gap, n_thermal, photodetection_rate,
                               positive_frequency_part, rabi_open_system, steady_state, unvec, vec)

from conftest import random_unitary


def _cavity(n=10, gamma=0.01, T=0.0, omega=1.0):
    s = HilbertSpace((n,))
    a = elementary_operators(s, 0, "annihilate")
    H = omega * (a.dag() @ a)
    return H, BathSpec(a + a.dag(), gamma, T, "flat", a, omega, omega, "cavity"), a


def _apply(S, rho):
    D = rho.shape[0]
    return unvec(S @ vec(rho), D)


def test_vec_roundtrip(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(unvec(vec(m), 4), m)


def test_dissipator_examples():
    s = HilbertSpace((3,))
    a = elementary_operators(s, 0, "annihilate")
    Da = dissipator(a)
    P0, P1 = np.diag([1, 0, 0]).astype(complex), np.diag([0, 1, 0]).astype(complex)
    assert np.max(np.abs(_apply(Da, P0))) == 0
    assert np.allclose(_apply(Da, P1), P0 - P1)
    sm = elementary_operators(HilbertSpace((2,)), 0, "sigma_minus")
    g, e = np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)
    assert np.allclose(_apply(dissipator(sm), e), g - e)
    with pytest.raises(DimensionError):
        dissipator(np.ones((2, 3)))


def test_bath_rates():
    b = BathSpec(Operator(HilbertSpace((2,)), np.eye(2)), 0.1, spectrum="ohmic", omega_ref=2.0)
    assert np.allclose(b.rate([-1.0, 0.0, 1.0, 4.0]), [0, 0, 0.05, 0.2])
    assert n_thermal(1.0, 0.0) == 0.0
    assert n_thermal(1.0, 1.0) == pytest.approx(1 / (np.e - 1))
    with pytest.raises(ValueError):
        BathSpec(Operator(HilbertSpace((2,)), np.eye(2)), -1.0)


def test_standard_jcm_ground_stable():
    p = JcmParams(1, 1, 0.3, 10)
    H = build_jcm(p)
    s = H.space
    baths = [BathSpec(elementary_operators(s, 1, "annihilate") + elementary_operators(s, 1, "create"), 0.01,
                      lowering=elementary_operators(s, 1, "annihilate")),
             BathSpec(elementary_operators(s, 0, "sigma_x"), 0.01, lowering=elementary_operators(s, 0, "sigma_minus"))]
    L = build_liouvillian(H, baths, "standard")
    rho = np.zeros((s.total, s.total), complex)
    rho[0, 0] = 1.0
    assert np.max(np.abs(L.apply(rho))) < 1e-14


def _ground_projector(H):
    G = eig_hermitian(H).vectors[:, 0]
    return np.outer(G, G.conj())


def test_rabi_ground_hierarchy():
    H, baths, _ = rabi_open_system(1.0, 30, T_a=0.0, T_c=0.0)
    rho = _ground_projector(H)
    assert np.linalg.norm(build_liouvillian(H, baths, "dressed").apply(rho)) < 1e-10
    assert np.linalg.norm(build_liouvillian(H, baths, "generalized").apply(rho)) < 1e-10
    assert np.linalg.norm(build_liouvillian(H, baths, "standard").apply(rho)) > 1e-3


def test_dressed_ground_fixed_point_on_grid():
    for beta in np.linspace(0.0, 2.0, 9):
        H, baths, _ = rabi_open_system(float(beta), 30, T_a=0.0, T_c=0.0)
        rho = _ground_projector(H)
        assert np.linalg.norm(build_liouvillian(H, baths, "dressed").apply(rho)) < 1e-10


def test_dressed_jumps_lower_energy():
    H, baths, _ = rabi_open_system(0.7, 16, T_a=0.0, T_c=0.0)
    L = build_liouvillian(H, baths, "dressed")
    D = H.space.total
    M = L.matrix.tocoo()
    # population transfer k -> j only toward lower eigenstate index
    pop = (M.row % (D + 1) == 0) & (M.col % (D + 1) == 0) & (M.row != M.col)
    assert np.all(M.row[pop] // (D + 1) < M.col[pop] // (D + 1))


def test_rejects_non_hermitian():
    s = HilbertSpace((2,))
    with pytest.raises(NotHermitianError):
        build_liouvillian(Operator(s, np.array([[0, 1], [0, 0]])), [], "standard")
    with pytest.raises(ValueError):
        build_liouvillian(Operator(s, np.eye(2)), [], "other")


@given(seed=st.integers(0, 2 ** 16), beta=st.floats(0.0, 1.5), T=st.floats(0.0, 1.0))
def test_trace_preservation(seed, beta, T):
    rng = np.random.default_rng(seed)
    H, baths, _ = rabi_open_system(beta, 8, T_a=T, T_c=T)
    D = H.space.total
    m = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    rho = m + m.conj().T
    for kind in KINDS:
        L = build_liouvillian(H, baths, kind)
        assert abs(np.trace(L.apply(rho))) < 1e-10


def test_positive_frequency_examples():
    H, b, a = _cavity(8)
    Ep = positive_frequency_part(b.coupling, eig_hermitian(H))
    assert np.allclose(Ep.data, a.data, atol=1e-12)
    s = HilbertSpace((2,))
    sz = elementary_operators(s, 0, "sigma_z")
    Ep = positive_frequency_part(elementary_operators(s, 0, "sigma_x"), eig_hermitian(0.5 * sz))
    assert np.allclose(Ep.data, elementary_operators(s, 0, "sigma_minus").data)


def test_positive_frequency_rabi():
    H, baths, _ = rabi_open_system(1.0, 30)
    es = eig_hermitian(H)
    Ep = positive_frequency_part(baths[0].coupling, es)
    assert np.max(np.abs(Ep.data @ es.vectors[:, 0])) < 1e-12
    # upper triangular in the ascending eigenbasis, and E- = (E+)^dag
    Em = es.to_eigenbasis(Ep)
    assert np.max(np.abs(np.tril(Em))) < 1e-12
    assert photodetection_rate(_ground_projector(H), Ep) < 1e-12
    rho1 = np.outer(es.vectors[:, 1], es.vectors[:, 1].conj())
    assert photodetection_rate(rho1, Ep) > 1e-3


def test_photodetection_weak_coupling():
    # in the weak-coupling window W from E+ agrees with the naive gamma <a^dag a>
    H, baths, _ = rabi_open_system(0.01, 20, T_a=0.5, T_c=0.0)
    rho = steady_state(build_liouvillian(H, baths, "dressed"))
    cav = baths[0]
    Ep = positive_frequency_part(cav.coupling, eig_hermitian(H))
    naive = rho.expect(cav.lowering.dag() @ cav.lowering)
    assert photodetection_rate(rho, Ep) == pytest.approx(naive, rel=0.05)


def test_photodetection_gauge_contract():
    beta = 0.8
    p = RabiParams(1, 1, beta, 40)
    HD, bathsD, _ = rabi_open_system(beta, 40, T_a=0.3)
    HP = build_polaron_rabi(p)
    s = HP.space
    a = elementary_operators(s, 1, "annihilate")
    bathsP = [BathSpec(a + a.dag(), 1e-3, 0.0, "flat", a, 1.0, 1.0),
              BathSpec(elementary_operators(s, 0, "sigma_x"), 1e-3, 0.3, "flat",
                       elementary_operators(s, 0, "sigma_minus"), 1.0, 1.0)]
    esD, esP = eig_hermitian(HD), eig_hermitian(HP)
    EpD = positive_frequency_part(bathsD[0].coupling, esD)
    EpP = positive_frequency_part(bathsP[0].coupling, esP)
    for k in (1, 2, 3):
        rD = np.outer(esD.vectors[:, k], esD.vectors[:, k].conj())
        rP = np.outer(esP.vectors[:, k], esP.vectors[:, k].conj())
        assert photodetection_rate(rD, EpD) == pytest.approx(photodetection_rate(rP, EpP), abs=1e-8)
    wD = photodetection_rate(steady_state(build_liouvillian(HD, bathsD, "dressed")), EpD)
    wP = photodetection_rate(steady_state(build_liouvillian(HP, bathsP, "dressed")), EpP)
    assert wD > 0 and wD == pytest.approx(wP, rel=1e-6, abs=1e-8)


def test_steady_state_examples():
    H, b, _ = _cavity(8)
    rho = steady_state(build_liouvillian(H, [b], "standard"))
    assert abs(rho.data[0, 0] - 1) < 1e-10
    # thermal cavity: Bose-Einstein ratios p(n+1)/p(n) = exp(-w/T)
    H, b, _ = _cavity(30, T=0.5)
    for kind in KINDS:
        rho = steady_state(build_liouvillian(H, [b], kind))
        p = np.real(np.diag(rho.data))
        assert np.allclose(p[1:6] / p[:5], np.exp(-1 / 0.5), rtol=1e-8)
        assert abs(rho.trace() - 1) < 1e-10 and rho.min_eigenvalue() > -1e-9


def test_dressed_relaxes_to_rabi_ground():
    H, baths, _ = rabi_open_system(1.0, 30, T_a=0.0, T_c=0.0)
    rho = steady_state(build_liouvillian(H, baths, "dressed"))
    G = eig_hermitian(H).vectors[:, 0]
    assert 1 - np.real(G.conj() @ rho.data @ G) < 1e-8


def test_degenerate_steady_state_reported():
    s = HilbertSpace((2,))
    L = build_liouvillian(Operator(s, np.zeros((2, 2))), [], "standard")
    with pytest.raises(DegenerateSteadyStateError) as exc:
        steady_state(L)
    assert exc.value.nullity >= 2


def test_gap_examples(rng):
    H, b, _ = _cavity(12)
    for kind in KINDS:
        assert liouvillian_gap(build_liouvillian(H, [b], kind)) == pytest.approx(0.005, rel=1e-9)
    # similarity transform of the system basis leaves the gap unchanged
    Hr, baths, _ = rabi_open_system(0.5, 10)
    U = random_unitary(rng, Hr.space.total)
    rot = lambda op: Operator(op.space, U @ op.data @ U.conj().T)
    baths_u = [BathSpec(rot(b.coupling), b.gamma0, b.temperature, b.spectrum, rot(b.lowering), b.frequency,
                        b.omega_ref) for b in baths]
    for kind in KINDS:
        g0 = liouvillian_gap(build_liouvillian(Hr, baths, kind))
        g1 = liouvillian_gap(build_liouvillian(rot(Hr), baths_u, kind))
        assert g1 == pytest.approx(g0, rel=1e-8)


def test_evolve_examples():
    s = HilbertSpace((3,))
    L0 = build_liouvillian(Operator(s, np.zeros((3, 3))), [], "standard")
    rho0 = np.diag([0.2, 0.3, 0.5]).astype(complex)
    assert np.allclose(lindblad_evolve(rho0, L0, 5.0).data, rho0)
    gamma = 0.01
    H, b, a = _cavity(6, gamma)
    L = build_liouvillian(H, [b], "standard")
    rho1 = np.zeros((6, 6), complex)
    rho1[1, 1] = 1
    n = a.dag() @ a
    for t in np.array([0.1, 1.0, 10.0]) / gamma:
        r = lindblad_evolve(rho1, L, float(t))
        assert r.expect(n) == pytest.approx(np.exp(-gamma * t), rel=1e-8)
        assert abs(r.trace() - 1) < 1e-9
    with pytest.raises(ValueError):
        lindblad_evolve(rho1, L, -1.0)


def test_emission_zero_coupling():
    rates = emission_rates(0.0, n_fock=10, T_a=0.05)
    assert all(v == pytest.approx(0.0, abs=1e-15) for v in rates.values())


def test_emission_hierarchy_weak_coupling():
    res = emission_sweep([0.005, 0.01, 0.02], n_fock=20, T_a=0.5)
    W = np.array([res.columns[f"W_{k}"] for k in KINDS])
    assert np.all(np.max(W, 0) / np.min(W, 0) - 1 < 0.05)


def test_emission_standard_virtual_photon_artifact():
    # at low atomic temperature the naive gamma <a^dag a> counts virtual photons
    res = emission_sweep([0.01, 0.1], n_fock=20, T_a=0.05)
    assert np.all(res.columns["W_standard"] > 1e3 * res.columns["W_dressed"])
    assert res.columns["W_dressed"][0] == pytest.approx(1.049e-12, rel=0.01)


def test_emission_truncation_recorded():
    res = emission_sweep([0.5, 2.5], kinds=("dressed",), n_fock=20)
    assert res.metadata["fock_rule_violated_from"] == 2.5


def test_gap_sweep_ohmic():
    res = gap_sweep([1.0, 1.5, 2.0], n_fock=20)
    g = res.columns["gap"]
    assert np.allclose(g, [5.952e-5, 5.82e-6, 1.76e-7], rtol=0.01)


@pytest.mark.parametrize("kind", KINDS)
def test_series_matches_single_evolution(kind):
    H, baths, _ = rabi_open_system(0.4, 8, T_a=0.2)
    L = build_liouvillian(H, baths, kind)
    D = H.space.total
    rho0 = np.zeros((D, D), complex)
    rho0[H.space.basis_index([1, 0]), H.space.basis_index([1, 0])] = 1.0
    ts = np.linspace(0.0, 300.0, 4)
    series = lindblad_series(rho0, L, ts)
    for t, r in zip(ts, series):
        assert np.max(np.abs(r.data - lindblad_evolve(rho0, L, float(t)).data)) < 1e-9
    # nonuniform grids take the per-time path
    assert len(lindblad_series(rho0, L, [0.0, 1.0, 5.0])) == 3
    with pytest.raises(ValueError):
        lindblad_series(rho0, L, [1.0, 0.5])
