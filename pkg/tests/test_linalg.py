"""Symplectic/unitary primitive checks."""

import numpy as np
import pytest
import scipy.linalg as sla

from equindex.config import DEFAULT
from equindex.errors import NotInvolutive, NotSymplectic, RankDeficient
from equindex.linalg import (
    DihedralMatrixData,
    InvolutionData,
    SymplecticSpace,
    SymplecticStructure,
    check_lagrangian,
    frame_of_unitary,
    graph_lagrangian,
    intersection_dimension,
    principal_angles,
    random_lagrangian_frame,
    random_real_symplectic,
    random_unitary,
    spectral_projectors,
    standard_J,
    unitary_of_lagrangian,
    validate_dihedral_data,
)


def fig8_generators():
    R2 = np.diag([1.0, -1.0])
    S = np.block([[R2 / 2, np.sqrt(3) / 2 * R2], [-np.sqrt(3) / 2 * R2, R2 / 2]])
    N = np.block([[-R2, np.zeros((2, 2))], [np.zeros((2, 2)), R2]])
    return S, N


def test_J_is_integer_complex_structure():
    J = standard_J(3)
    assert np.array_equal(J @ J, -np.eye(6))
    assert np.array_equal(J.T, -J)


def test_spectral_projectors_diagonal():
    plus, minus = spectral_projectors(np.diag([1.0, -1.0]))
    assert plus.shape == (2, 1) and minus.shape == (2, 1)
    assert abs(abs(plus[0, 0]) - 1) < 1e-14 and abs(plus[1, 0]) < 1e-14
    assert abs(abs(minus[1, 0]) - 1) < 1e-14 and abs(minus[0, 0]) < 1e-14


def test_spectral_projectors_swap():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    plus, minus = spectral_projectors(InvolutionData(swap, "swap"))
    v = plus[:, 0]
    assert np.allclose(np.abs(v), [1 / np.sqrt(2)] * 2)
    assert np.linalg.norm(swap @ v - v) < 1e-14
    w = minus[:, 0]
    assert np.linalg.norm(swap @ w + w) < 1e-14


def test_spectral_projectors_fig8_product():
    S, N = fig8_generators()
    plus, minus = spectral_projectors(S @ N)
    assert plus.shape[1] == 2 and minus.shape[1] == 2
    # oracle: eigendecomposition of the explicit 4x4 product
    evals = np.linalg.eigvalsh((S @ N + (S @ N).T) / 2)
    assert np.sum(evals > 0) == 2 and np.sum(evals < 0) == 2


def test_spectral_projectors_dimension_sum():
    rng = np.random.default_rng(11)
    for _ in range(5):
        O = np.linalg.qr(rng.standard_normal((6, 6)))[0]
        U = O @ np.diag(rng.choice([-1.0, 1.0], 6)) @ O.T
        plus, minus = spectral_projectors(U)
        assert plus.shape[1] + minus.shape[1] == 6


def test_not_involutive():
    with pytest.raises(NotInvolutive):
        spectral_projectors(np.array([[1.0, 0.1], [0.0, -1.0]]))


def test_check_lagrangian_cases():
    space = SymplecticSpace(1)
    ok, res = check_lagrangian(np.array([[1.0], [0.0]]), space)
    assert ok and res < 1e-14
    # V_+(N) for N = diag(1,-1): span(e1) is Lagrangian
    plus, _ = spectral_projectors(np.diag([1.0, -1.0]))
    ok, _ = check_lagrangian(plus, space)
    assert ok
    # two columns for m=1 is malformed
    with pytest.raises(RankDeficient):
        check_lagrangian(np.eye(2), space)
    # complex line spanned by (1, i) is not Lagrangian
    ok, res = check_lagrangian(np.array([[1.0], [1.0j]]), space)
    assert not ok and res > 0.1


def test_unitary_parametrisation_roundtrip():
    st = SymplecticStructure.standard(2)
    horizontal = np.vstack([np.eye(2), np.zeros((2, 2))])
    assert np.linalg.norm(unitary_of_lagrangian(horizontal, st) - np.eye(2)) < 1e-13
    rng = np.random.default_rng(5)
    for _ in range(6):
        Z = random_lagrangian_frame(rng, st)
        U = unitary_of_lagrangian(Z, st)
        assert np.linalg.norm(U.conj().T @ U - np.eye(2)) < 1e-12
        back = frame_of_unitary(U, st)
        assert principal_angles(Z, back).max() < DEFAULT.tol_lag


def test_graph_of_symmetric_matrix_roundtrip():
    st = SymplecticStructure.standard(3)
    rng = np.random.default_rng(9)
    A = rng.standard_normal((3, 3))
    A = (A + A.T) / 2
    Z = np.vstack([np.eye(3), A])
    ok, _ = check_lagrangian(Z, standard_J(3))
    assert ok
    back = frame_of_unitary(unitary_of_lagrangian(Z, st), st)
    assert principal_angles(Z, back).max() < DEFAULT.tol_lag


def test_intersection_dimension_matches_unitary_kernel():
    st = SymplecticStructure.standard(3)
    rng = np.random.default_rng(3)
    for _ in range(8):
        Z1 = random_lagrangian_frame(rng, st)
        Z2 = random_lagrangian_frame(rng, st)
        U1 = unitary_of_lagrangian(Z1, st)
        U2 = unitary_of_lagrangian(Z2, st)
        lam = np.linalg.eigvals(np.linalg.inv(U2) @ U1)
        assert intersection_dimension(Z1, Z2) == np.sum(np.abs(lam - 1) < 1e-8)
    # engineered 1-dim intersection
    Z1 = random_lagrangian_frame(rng, st)
    U1 = unitary_of_lagrangian(Z1, st)
    evals, evecs = np.linalg.eig(U1)
    U2 = evecs @ np.diag(evals * np.exp(1j * np.array([0.0, 0.3, -0.4]))) @ evecs.conj().T
    Z2 = frame_of_unitary(U2, st)
    assert intersection_dimension(Z1, Z2) == 1


def test_graph_lagrangian():
    from equindex.linalg import doubled_J
    Jd = doubled_J(standard_J(1))
    G = graph_lagrangian(np.eye(2))
    ok, _ = check_lagrangian(G, Jd)
    assert ok
    for theta in np.linspace(0, 2 * np.pi, 9):
        g = sla.expm(theta * standard_J(1))
        ok, res = check_lagrangian(graph_lagrangian(g), Jd)
        assert ok and res <= DEFAULT.tol_lag
    bad = np.eye(2) * 1.05  # ||g^T J g - J|| ~ 0.1
    with pytest.raises(NotSymplectic):
        graph_lagrangian(bad)


def test_graph_intersections_count_fixed_vectors():
    Jd_struct = SymplecticStructure.doubled(2)
    rng = np.random.default_rng(21)
    for _ in range(5):
        g = random_real_symplectic(rng, 2, scale=0.7)
        ginter = intersection_dimension(graph_lagrangian(g), graph_lagrangian(np.eye(4)))
        kdim = np.sum(np.abs(np.linalg.eigvals(g) - 1) < 1e-8)
        assert ginter == kdim
    del Jd_struct


def test_validate_dihedral_data():
    n = 5
    zeta = np.exp(2j * np.pi / n)
    M = np.diag([zeta, zeta.conjugate()])
    N = np.array([[0.0, 1.0], [1.0, 0.0]])
    rep = DihedralMatrixData(M=M, N=N, Q=np.linalg.matrix_power(M, n), n=n)
    report = validate_dihedral_data(rep)
    assert report["passed"], report

    S, Nf = fig8_generators()
    rep8 = DihedralMatrixData(M=S, N=Nf, Q=np.eye(4), n=6, quaternionic=True)
    report8 = validate_dihedral_data(rep8)
    assert report8["passed"], report8

    bad = DihedralMatrixData(M=S, N=Nf + 0.01 * np.triu(np.ones((4, 4)), 1),
                             Q=np.eye(4), n=6, quaternionic=True)
    assert not validate_dihedral_data(bad)["passed"]


def test_quaternionic_eigenspaces_are_lagrangian():
    # V_(+/-)(M^k N) Lagrangian whenever the quaternionic relations hold
    from equindex.dihedral import random_quaternionic_rep
    rng = np.random.default_rng(2)
    for n in (2, 3, 4):
        rep = random_quaternionic_rep(rng, n=n, m=2)
        Jm = standard_J(2)
        for k in range(n + 1):
            A = np.linalg.matrix_power(rep.M, k) @ rep.N
            plus, minus = spectral_projectors(A)
            for V in (plus, minus):
                ok, res = check_lagrangian(V, Jm)
                assert ok, (n, k, res)


def test_random_unitary_is_unitary():
    rng = np.random.default_rng(0)
    U = random_unitary(rng, 4)
    assert np.linalg.norm(U.conj().T @ U - np.eye(4)) < 1e-12
