import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kreinsys.krein import (
    CanonicalSymmetry,
    DegenerateSubspaceError,
    KreinSubspace,
    SignatureMismatchError,
    extend_j_isometry,
    hermitian_sqrt,
    j_companion_basis,
    j_orthogonal_projection,
    j_unitarity_defect,
    random_j_unitary,
    regularize_subspace,
    signature,
)

G_HYP = np.array([[1.25, 0.75], [0.75, 1.25]], dtype=complex)


def test_symmetry_validation():
    CanonicalSymmetry(np.eye(3))
    CanonicalSymmetry.from_signs([1, -1, 1])
    with pytest.raises(ValueError):
        CanonicalSymmetry(np.array([[1.0, 0.5], [0.5, 1.0]]))  # not involutive
    with pytest.raises(ValueError):
        CanonicalSymmetry(np.array([[0.0, 1.0], [0.0, 0.0]]))  # not hermitian
    j = CanonicalSymmetry.from_signs([1, 1, -1])
    assert j.signature == (2, 1)
    empty = CanonicalSymmetry(np.zeros((0, 0)))
    assert empty.dim == 0 and empty.signature == (0, 0)


def test_j_unitarity_defect_identity_metrics():
    # plain unitary with identity metrics on both sides
    q, _ = np.linalg.qr(np.arange(9).reshape(3, 3) + np.eye(3) + 1j)
    d1, d2 = j_unitarity_defect(q, CanonicalSymmetry.identity(3), CanonicalSymmetry.identity(3))
    assert d1 < 1e-12 and d2 < 1e-12


def test_j_unitarity_defect_hyperbolic():
    # the hyperbolic benchmark operator is unitary for the diag(-1, 1) metric
    j = CanonicalSymmetry.from_signs([-1, 1])
    d1, d2 = j_unitarity_defect(G_HYP, j, j)
    assert d1 < 1e-12 and d2 < 1e-12
    # and fails for the definite metric
    i2 = CanonicalSymmetry.identity(2)
    d1, d2 = j_unitarity_defect(G_HYP, i2, i2)
    assert d1 > 1.0


def test_j_unitarity_defect_shape_check():
    with pytest.raises(ValueError):
        j_unitarity_defect(np.eye(3), CanonicalSymmetry.identity(2), CanonicalSymmetry.identity(3))


def test_signature_examples():
    assert signature(np.diag([3.0, 0.0, -2.0])) == (1, 1, 1)
    assert signature(np.zeros((0, 0))) == (0, 0, 0)
    # eigenvalues of G*G are 4 and 1/4, so I - G*G has eigenvalues -3 and 3/4
    h = np.eye(2) - G_HYP.conj().T @ G_HYP
    assert signature(h) == (1, 1, 0)
    with pytest.raises(ValueError):
        signature(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_j_orthogonal_projection_hand_value():
    # J = diag(1,-1), f0 = (sqrt2, 1)^T is J-semiunitary; h = e1 projects to (-1, sqrt2)
    j = CanonicalSymmetry.from_signs([1, -1])
    f0 = np.array([[np.sqrt(2.0)], [1.0]], dtype=complex)
    h = np.array([[1.0], [0.0]], dtype=complex)
    h0 = j_orthogonal_projection(h, f0, j)
    assert np.allclose(h0, [[-1.0], [np.sqrt(2.0)]], atol=1e-14)
    assert abs((f0.conj().T @ h0)[0, 0]) < 1e-14
    # J(h - h0) must be orthogonal to ker f0*
    k = null_basis = np.array([[1.0], [-np.sqrt(2.0)]], dtype=complex)
    assert abs((k.conj().T @ (j.matrix @ (h - h0)))[0, 0]) < 1e-14


def test_j_orthogonal_projection_rejects_non_semiunitary():
    j = CanonicalSymmetry.identity(2)
    f0 = np.array([[2.0], [0.0]], dtype=complex)
    with pytest.raises(ValueError):
        j_orthogonal_projection(np.array([[1.0], [1.0]]), f0, j)


def test_regularize_subspace_negative_line():
    j = CanonicalSymmetry.from_signs([1, -1])
    basis = np.array([[1.0], [-np.sqrt(2.0)]], dtype=complex)
    sub = KreinSubspace.from_basis(basis, j)
    new_basis, j0 = regularize_subspace(sub, j)
    assert j0.matrix.shape == (1, 1) and j0.matrix[0, 0] == -1
    gram = new_basis.conj().T @ j.matrix @ new_basis
    assert np.allclose(gram, [[-1.0]], atol=1e-12)


def test_regularize_subspace_degenerate():
    j = CanonicalSymmetry.from_signs([1, -1])
    basis = np.array([[1.0], [1.0]], dtype=complex)  # neutral vector
    with pytest.raises(DegenerateSubspaceError):
        regularize_subspace(KreinSubspace.from_basis(basis, j), j)


def test_regularize_orders_positive_first():
    j = CanonicalSymmetry.from_signs([1, -1, 1])
    basis = np.eye(3, dtype=complex)[:, [1, 0]]  # negative direction listed first
    new_basis, j0 = regularize_subspace(KreinSubspace.from_basis(basis, j), j)
    assert np.allclose(np.diagonal(j0.matrix), [1, -1])


def test_companion_basis():
    j = CanonicalSymmetry.from_signs([1, -1])
    basis = np.array([[np.sqrt(2.0)], [1.0]], dtype=complex)
    comp = j_companion_basis(basis, j)
    assert comp.shape == (2, 1)
    assert abs((basis.conj().T @ j.matrix @ comp)[0, 0]) < 1e-13


def test_extend_identity_case():
    # dom = ran = span(e1) in (C^2, diag(1,-1)), U the identity on it
    j = CanonicalSymmetry.from_signs([1, -1])
    basis = np.eye(2, dtype=complex)[:, :1]
    dom = KreinSubspace.from_basis(basis, j)
    ran = KreinSubspace.from_basis(basis, j)
    k2, j2, u_full = extend_j_isometry(dom, j, ran, j, basis.copy())
    assert k2 == 0 and j2.dim == 0
    assert np.allclose(u_full, np.eye(2), atol=1e-12)


def test_extend_dim_mismatch_reports_pad():
    i2 = CanonicalSymmetry.identity(2)
    i3 = CanonicalSymmetry.identity(3)
    dom = KreinSubspace.from_basis(np.eye(2, dtype=complex)[:, :1], i2)
    ran = KreinSubspace.from_basis(np.eye(3, dtype=complex)[:, :1], i3)
    with pytest.raises(SignatureMismatchError) as info:
        extend_j_isometry(dom, i2, ran, i3, np.eye(3, dtype=complex)[:, :1])
    assert info.value.pad_dom == (1, 0)
    assert info.value.pad_ran == (0, 0)


def test_extend_signature_mismatch_reports_pad():
    jm = CanonicalSymmetry.from_signs([1, -1, 1])
    ji = CanonicalSymmetry.identity(3)
    dom = KreinSubspace.from_basis(np.eye(3, dtype=complex)[:, :1], jm)
    ran = KreinSubspace.from_basis(np.eye(3, dtype=complex)[:, :1], ji)
    with pytest.raises(SignatureMismatchError) as info:
        extend_j_isometry(dom, jm, ran, ji, np.eye(3, dtype=complex)[:, :1])
    # companions have signatures (1,1) vs (2,0)
    assert info.value.pad_dom == (1, 0)
    assert info.value.pad_ran == (0, 1)


@pytest.mark.parametrize("seed", range(6))
def test_extend_construct_then_restrict(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    signs = rng.choice([1.0, -1.0], size=n)
    j = CanonicalSymmetry.from_signs(signs)
    w = random_j_unitary(j, j, rng)
    r = int(rng.integers(1, n))
    # columns of a random J-unitary span regular subspaces
    dom = KreinSubspace.from_basis(np.eye(n, dtype=complex)[:, :r], j)
    u = w[:, :r]
    ran = KreinSubspace.from_basis(u, j)
    k2, _, u_full = extend_j_isometry(dom, j, ran, j, u)
    assert k2 == 0
    d1, d2 = j_unitarity_defect(u_full, j, j)
    assert max(d1, d2) < 1e-10
    assert np.max(np.abs(u_full[:, :r] - u)) < 1e-10


def test_hermitian_sqrt():
    h = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    s = hermitian_sqrt(h)
    assert np.allclose(s @ s, h, atol=1e-12)
    # slight negative eigenvalue is clamped
    s2 = hermitian_sqrt(np.diag([1.0, -1e-12]))
    assert np.allclose(s2, np.diag([1.0, 0.0]), atol=1e-12)
    with pytest.raises(ValueError):
        hermitian_sqrt(np.diag([1.0, -1.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_indefinite_cauchy_bound(seed):
    # |[x, x]_J| <= ||x||^2 since J has unit spectral norm
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    j = CanonicalSymmetry.from_signs(rng.choice([1.0, -1.0], size=n))
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    val = np.real(np.vdot(x, j.matrix @ x))
    assert abs(val) <= np.vdot(x, x).real + 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_j_unitary_is_j_unitary(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    j = CanonicalSymmetry.from_signs(rng.choice([1.0, -1.0], size=n))
    w = random_j_unitary(j, j, rng)
    d1, d2 = j_unitarity_defect(w, j, j)
    assert max(d1, d2) < 1e-10
