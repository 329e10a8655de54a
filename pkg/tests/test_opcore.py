import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavityqed.errors import ConvergenceError, DimensionError, NotHermitianError
from cavityqed.models import JcmParams, RabiParams, TruncationWarning, build_jcm, build_rabi, excitation_number, parity
from cavityqed.opcore import (HilbertSpace, Ket, Operator, coherent_state, coherent_tail, commutator_norm,
                              displacement, eig_hermitian, elementary_operators, embed, fock_rule, identity,
                              phase_rotation_check, unitary_defect, _local)

from conftest import random_hermitian, random_unitary


def test_space_basics():
    s = HilbertSpace((2, 5, 3))
    assert s.total == 30 and s.n_sites == 3
    assert s.basis_index([1, 0, 0]) == 15
    with pytest.raises(DimensionError):
        HilbertSpace((2, 0))
    with pytest.raises(DimensionError):
        HilbertSpace(())


def test_operator_shape_checked():
    s = HilbertSpace((2, 3))
    with pytest.raises(DimensionError):
        Operator(s, np.eye(5))
    with pytest.raises(DimensionError):
        Ket(s, np.ones(4))
    other = HilbertSpace((3, 2))
    with pytest.raises(DimensionError):
        identity(s) + identity(other)


def test_spin_conventions():
    s = HilbertSpace((2,))
    sz = elementary_operators(s, 0, "sigma_z").data
    sm = elementary_operators(s, 0, "sigma_minus").data
    g, e = np.array([1, 0]), np.array([0, 1])
    assert np.allclose(sz, np.diag([-1, 1]))
    assert np.allclose(sm @ e, g) and np.allclose(sm @ g, 0)
    sx = elementary_operators(s, 0, "sigma_x").data
    sy = elementary_operators(s, 0, "sigma_y").data
    # sigma_x sigma_y = i sigma_z
    assert np.allclose(sx @ sy, 1j * sz)


def test_annihilation_example():
    s = HilbertSpace((4,))
    a = elementary_operators(s, 0, "annihilate")
    v = a @ Ket.basis(s, [3])
    assert np.allclose(v.amplitudes, np.sqrt(3) * Ket.basis(s, [2]).amplitudes, atol=1e-14)
    assert np.allclose((a @ Ket.basis(s, [0])).amplitudes, 0)


def test_operator_kind_errors():
    s = HilbertSpace((3, 4))
    with pytest.raises(DimensionError):
        elementary_operators(s, 0, "sigma_x")
    with pytest.raises(DimensionError):
        elementary_operators(s, 2, "annihilate")
    with pytest.raises(DimensionError):
        elementary_operators(s, 1, "banana")
    with pytest.raises(DimensionError):
        elementary_operators(HilbertSpace((1,)), 0, "number")


@given(n_fock=st.integers(2, 40))
def test_ladder_identity(n_fock):
    a = _local("annihilate", n_fock)
    for n in range(1, n_fock):
        v = np.zeros(n_fock)
        v[n] = 1
        w = np.zeros(n_fock)
        w[n - 1] = np.sqrt(n)
        assert np.max(np.abs(a @ v - w)) < 1e-14


@given(d1=st.integers(2, 4), d2=st.integers(2, 4), seed=st.integers(0, 2 ** 16))
def test_embedding_homomorphism(d1, d2, seed):
    rng = np.random.default_rng(seed)
    s = HilbertSpace((d1, d2))
    A = rng.normal(size=(d2, d2)) + 1j * rng.normal(size=(d2, d2))
    B = rng.normal(size=(d2, d2))
    C = rng.normal(size=(d1, d1))
    lhs = (embed(s, 1, A) @ embed(s, 1, B)).data
    assert np.max(np.abs(lhs - embed(s, 1, A @ B).data)) < 1e-12
    assert commutator_norm(embed(s, 0, C), embed(s, 1, A)) < 1e-14


@given(alpha=st.floats(-3.0, 3.0), phase=st.floats(0, 2 * np.pi))
def test_displacement_unitary(alpha, phase):
    z = alpha * np.exp(1j * phase)
    s = HilbertSpace((fock_rule(abs(z)),))
    assert unitary_defect(displacement(s, 0, z)) < 1e-8


def test_displacement_truncation_error():
    s = HilbertSpace((5,))
    with pytest.raises(ConvergenceError, match="n_fock >= "):
        displacement(s, 0, 2.0)


def test_coherent_state_statistics():
    s = HilbertSpace((40,))
    k = coherent_state(s, 0, 1.5)
    n = elementary_operators(s, 0, "number")
    assert abs(k.norm() - 1) < 1e-12
    assert abs(n.expect(k).real - 2.25) < 1e-9
    assert coherent_tail(1.5, 40) < 1e-12


def test_eig_reconstruction(rng):
    H = random_hermitian(rng, 8)
    es = eig_hermitian(H)
    rec = es.vectors @ np.diag(es.values) @ es.vectors.conj().T
    assert np.max(np.abs(rec - H)) < 1e-9
    assert np.max(np.abs(es.vectors.conj().T @ es.vectors - np.eye(8))) < 1e-10
    assert np.all(np.diff(es.values) >= 0)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError) as exc:
        eig_hermitian(np.array([[0, 1], [0, 0]], complex))
    assert exc.value.defect == pytest.approx(1.0)


def test_eig_deterministic_degenerate_order():
    H = np.diag([1.0, 0.0, 1.0, 0.0])
    es = eig_hermitian(H)
    assert np.array_equal(np.argmax(np.abs(es.vectors), axis=0), [1, 3, 0, 2])
    es2 = eig_hermitian(H.copy())
    assert np.array_equal(es.vectors, es2.vectors)


@given(seed=st.integers(0, 2 ** 16), n=st.integers(2, 10))
def test_eigenvalues_invariant_under_unitary(seed, n):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, n)
    U = random_unitary(rng, n)
    a = eig_hermitian(H).values
    b = eig_hermitian(U @ H @ U.conj().T).values
    assert np.max(np.abs(a - b)) < 1e-9


def test_symmetry_commutators():
    jp = JcmParams(1.0, 1.0, 0.5, 12)
    Hj = build_jcm(jp)
    assert commutator_norm(excitation_number(Hj.space), Hj) < 1e-12
    Hr = build_rabi(RabiParams(1.0, 1.0, 0.5, 16))
    assert commutator_norm(parity(Hr.space), Hr) < 1e-12
    assert commutator_norm(excitation_number(Hr.space), Hr) > 0.1


def test_phase_rotation():
    Hj = build_jcm(JcmParams(1.0, 1.0, 0.5, 12))
    N = excitation_number(Hj.space)
    assert phase_rotation_check(np.pi / 3, Hj, N) < 1e-12
    with pytest.warns(TruncationWarning):
        Hr = build_rabi(RabiParams(1.0, 1.0, 0.5, 12), strict=False)
    assert phase_rotation_check(np.pi / 3, Hr, N) > 1e-3
