from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equichan.channels import (
    DiagonalParams,
    ProductParams,
    UnitaryParams,
    apply,
    apply_du,
    apply_product,
    apply_u,
    decompose_product,
    params_from_json,
    params_to_json,
    superoperator,
    twirl,
    validate,
)
from equichan.choi import choi_generic
from equichan.errors import DimensionMismatch, EquichanError, UnsupportedFamily
from equichan.linalg import basis_matrix, kron, partial_trace

unit = st.floats(-1, 1, allow_nan=False)


def rand_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


# ---------------------------------------------------------------- construction


def test_unitary_rejects_n1():
    with pytest.raises(EquichanError):
        UnitaryParams(1, 1.0, 0.5)


def test_exact_scalars_preserved():
    p = UnitaryParams(3, 1, Fraction(-1, 8))
    assert p.lam == Fraction(-1, 8)


def test_diagonal_params_are_read_only():
    p = DiagonalParams.identity(3)
    with pytest.raises(ValueError):
        p.mixing[0, 0] = 2.0


def test_diagonal_params_shape_check():
    with pytest.raises(DimensionMismatch):
        DiagonalParams(3, np.ones((2, 2)), np.eye(3))


def test_du2_constructor_is_row_stochastic():
    p = DiagonalParams.du2(0.3, 0.2, 0.1 + 0.2j)
    np.testing.assert_allclose(p.mixing.sum(axis=1), 1.0)
    assert p.offdiag[1, 0] == np.conj(p.offdiag[0, 1])
    assert validate(p).unital and validate(p).hermiticity_preserving


def test_du3_symmetric_structure():
    p = DiagonalParams.du3_symmetric(0.4, 0.2)
    np.testing.assert_allclose(p.mixing, 0.4 * np.eye(3) + 0.3 * (np.ones((3, 3)) - np.eye(3)))
    np.testing.assert_allclose(p.mixing.sum(axis=1), 1.0)


# ---------------------------------------------------------------- U(n) action


def test_apply_u_identity():
    X = rand_complex(np.random.default_rng(0), 3, 3)
    np.testing.assert_allclose(apply_u(UnitaryParams.identity(3), X), X)


def test_apply_u_depolarizing():
    X = rand_complex(np.random.default_rng(1), 3, 3)
    np.testing.assert_allclose(apply_u(UnitaryParams(3, 1.0, 0.0), X), np.trace(X) / 3 * np.eye(3))


def test_apply_u_off_diagonal_scaled():
    np.testing.assert_allclose(apply_u(UnitaryParams(2, 1.0, 0.5), basis_matrix(2, 0, 1)), 0.5 * basis_matrix(2, 0, 1))


def test_apply_u_is_equivariant():
    rng = np.random.default_rng(2)
    p = UnitaryParams(3, 0.7, -0.3)
    U, _ = np.linalg.qr(rand_complex(rng, 3, 3))
    X = rand_complex(rng, 3, 3)
    np.testing.assert_allclose(apply(p, U @ X @ U.conj().T), U @ apply(p, X) @ U.conj().T, atol=1e-12)


def test_apply_batches():
    rng = np.random.default_rng(3)
    p = UnitaryParams(2, 1.0, 0.3)
    Xs = rand_complex(rng, 5, 2, 2)
    np.testing.assert_allclose(apply(p, Xs), np.stack([apply(p, X) for X in Xs]))


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_u(UnitaryParams(3, 1.0, 0.0), np.eye(2))


# ---------------------------------------------------------------- DU(n) action


def test_apply_du_identity():
    X = rand_complex(np.random.default_rng(4), 4, 4)
    np.testing.assert_allclose(apply_du(DiagonalParams.identity(4), X), X)


def test_apply_du_off_diagonal():
    L = np.array([[0, 0.3 + 0.1j], [0.3 - 0.1j, 0]])
    p = DiagonalParams(2, L, np.eye(2))
    np.testing.assert_allclose(apply_du(p, basis_matrix(2, 0, 1)), L[0, 1] * basis_matrix(2, 0, 1))


def test_apply_du_mixing_convention():
    C = np.array([[0.8, 0.3], [0.2, 0.7]])
    p = DiagonalParams(2, np.zeros((2, 2)), C)
    np.testing.assert_allclose(apply_du(p, basis_matrix(2, 0, 0)), np.diag([0.8, 0.2]))
    # the same action read off the Choi matrix block (0,0)
    J = choi_generic(p).matrix.reshape(2, 2, 2, 2)
    np.testing.assert_allclose(J[0, :, 0, :], np.diag([0.8, 0.2]))


def test_apply_du_equivariant_under_diagonal_unitaries():
    rng = np.random.default_rng(5)
    p = DiagonalParams(3, rand_complex(rng, 3, 3), rng.random((3, 3)))
    D = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 3)))
    X = rand_complex(rng, 3, 3)
    np.testing.assert_allclose(apply(p, D @ X @ D.conj().T), D @ apply(p, X) @ D.conj().T, atol=1e-12)


# ---------------------------------------------------------------- product action


def test_decompose_identity():
    parts = decompose_product(np.eye(6), 2, 3)
    np.testing.assert_allclose(parts[0], np.eye(6))
    for P in parts[1:]:
        np.testing.assert_allclose(P, 0, atol=1e-15)


def test_decompose_traceless_product():
    X = kron(basis_matrix(2, 0, 1), basis_matrix(2, 0, 1))
    parts = decompose_product(X, 2, 2)
    np.testing.assert_allclose(parts[3], X)
    for P in parts[:3]:
        np.testing.assert_allclose(P, 0, atol=1e-15)


def test_decompose_e11_tensor_identity():
    X = kron(basis_matrix(2, 0, 0), np.eye(2))
    X00, X01, X10, X11 = decompose_product(X, 2, 2)
    np.testing.assert_allclose(X00, 0.5 * np.eye(4))
    np.testing.assert_allclose(X01, 0, atol=1e-15)
    np.testing.assert_allclose(X10, kron(basis_matrix(2, 0, 0) - 0.5 * np.eye(2), np.eye(2)))
    np.testing.assert_allclose(X11, 0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)]))
def test_decompose_sums_and_traces(seed, dims):
    n1, n2 = dims
    X = rand_complex(np.random.default_rng(seed), n1 * n2, n1 * n2)
    X00, X01, X10, X11 = decompose_product(X, n1, n2)
    np.testing.assert_allclose(X00 + X01 + X10 + X11, X, atol=1e-12)
    # X11 is traceless in both partial traces, X01 has no first-factor content
    np.testing.assert_allclose(partial_trace(X11, dims, "first"), 0, atol=1e-11)
    np.testing.assert_allclose(partial_trace(X11, dims, "second"), 0, atol=1e-11)
    np.testing.assert_allclose(partial_trace(X01, dims, "second"), 0, atol=1e-11)
    np.testing.assert_allclose(partial_trace(X10, dims, "first"), 0, atol=1e-11)


def test_apply_product_identity():
    X = rand_complex(np.random.default_rng(6), 6, 6)
    np.testing.assert_allclose(apply_product(ProductParams.identity(2, 3), X), X, atol=1e-12)


def test_apply_product_traceless_product():
    X = kron(basis_matrix(2, 0, 1), basis_matrix(3, 0, 2))
    p = ProductParams(2, 3, 1.0, 0.2, -0.4, 0.7)
    np.testing.assert_allclose(apply_product(p, X), 0.7 * X, atol=1e-15)


def test_apply_product_depolarizing():
    X = kron(basis_matrix(2, 0, 0), basis_matrix(2, 0, 0))
    np.testing.assert_allclose(apply_product(ProductParams(2, 2), X), 0.25 * np.eye(4))


def test_product_basis_case_diagonal():
    # E_ii (x) F_kl with k != l: image is d E_ii (x) F_kl + b I (x) F_kl
    p = ProductParams(2, 3, 1.0, 0.3, -0.2, 0.5)
    a, b, c, d = p.abcd
    X = kron(basis_matrix(2, 1, 1), basis_matrix(3, 0, 2))
    expected = d * X + b * kron(np.eye(2), basis_matrix(3, 0, 2))
    np.testing.assert_allclose(apply_product(p, X), expected, atol=1e-14)


def test_product_equivariant_under_product_unitaries():
    rng = np.random.default_rng(7)
    p = ProductParams(2, 3, 1.0, 0.3, -0.2, 0.5)
    U1, _ = np.linalg.qr(rand_complex(rng, 2, 2))
    U2, _ = np.linalg.qr(rand_complex(rng, 3, 3))
    U = kron(U1, U2)
    X = rand_complex(rng, 6, 6)
    np.testing.assert_allclose(apply(p, U @ X @ U.conj().T), U @ apply(p, X) @ U.conj().T, atol=1e-12)


# ---------------------------------------------------------------- superoperator


def test_superoperator_matches_apply():
    rng = np.random.default_rng(8)
    p = DiagonalParams(3, rand_complex(rng, 3, 3), rng.random((3, 3)))
    X = rand_complex(rng, 3, 3)
    S = superoperator(p)
    np.testing.assert_allclose((S @ X.reshape(-1)).reshape(3, 3), apply(p, X), atol=1e-14)


def test_superoperator_callable_needs_dim():
    with pytest.raises(DimensionMismatch):
        superoperator(lambda X: X)
    np.testing.assert_array_equal(superoperator(lambda X: X, 2), np.eye(4))


# ---------------------------------------------------------------- validate


def test_validate_examples():
    f = validate(UnitaryParams(2, 1.0, 0.3))
    assert (f.unital, f.hermiticity_preserving) == (True, True)
    f = validate(UnitaryParams(2, 1.0, 0.3 + 0.1j))
    assert (f.unital, f.hermiticity_preserving) == (True, False)
    f = validate(ProductParams(2, 2, 0.9, 0.1, 0.2, 0.3))
    assert (f.unital, f.hermiticity_preserving) == (False, True)


def test_validate_du_flags():
    C = np.array([[0.5, 0.4], [0.5, 0.5]])
    assert not validate(DiagonalParams(2, np.zeros((2, 2)), C)).unital
    L = np.array([[0, 0.5], [0.4, 0]])
    assert not validate(DiagonalParams(2, L, np.eye(2))).hermiticity_preserving


def test_validate_matches_behaviour():
    # the flags agree with what the map actually does to I and to Hermitian inputs
    rng = np.random.default_rng(9)
    for p in (UnitaryParams(3, 0.9, 0.2), UnitaryParams(3, 1.0, 0.2j), ProductParams(2, 2, 1.0, 0.1j, 0.2, 0.3)):
        f = validate(p)
        n = p.dim
        assert f.unital == np.allclose(apply(p, np.eye(n)), np.eye(n))
        H = rand_complex(rng, n, n)
        H = H + H.conj().T
        Y = apply(p, H)
        assert f.hermiticity_preserving == np.allclose(Y, Y.conj().T)


def test_validate_rejects_unknown():
    with pytest.raises(UnsupportedFamily):
        validate(object())


# ---------------------------------------------------------------- twirl


def test_twirl_identity_u():
    params, res = twirl(choi_generic(lambda X: X, 3), "U", 3)
    assert params.sigma == pytest.approx(1.0) and params.lam == pytest.approx(1.0)
    assert res < 1e-12


def test_twirl_transpose_du():
    params, res = twirl(choi_generic(lambda X: X.T, 2), "DU", 2)
    np.testing.assert_allclose(params.offdiag, 0)
    np.testing.assert_allclose(params.mixing, np.eye(2))
    assert res > 0.1


def test_twirl_fixed_point_product():
    p = ProductParams(2, 3, 1.0, 0.3, -0.2, 0.45)
    q, res = twirl(choi_generic(p), "PROD", (2, 3))
    np.testing.assert_allclose(q.lams, p.lams, atol=1e-13)
    assert res < 1e-12


def test_twirl_is_a_projection():
    # the residual is orthogonal to the family: twirling twice changes nothing
    rng = np.random.default_rng(10)
    M = rand_complex(rng, 9, 9)
    for fam in ("U", "DU"):
        q, _ = twirl(M, fam, 3)
        q2, res2 = twirl(choi_generic(q), fam, 3)
        assert res2 < 1e-12
        np.testing.assert_allclose(choi_generic(q2).matrix, choi_generic(q).matrix, atol=1e-12)


def test_twirl_unknown_family():
    with pytest.raises(UnsupportedFamily):
        twirl(np.eye(4), "SU", 2)


# ---------------------------------------------------------------- json


@settings(max_examples=30, deadline=None)
@given(unit, unit, unit)
def test_params_json_roundtrip(a, b, c):
    for p in (
        UnitaryParams(3, 1.0, complex(a, b)),
        DiagonalParams.du2(abs(a), abs(b), c),
        ProductParams(2, 3, 1.0, a, b, c),
    ):
        q = params_from_json(params_to_json(p))
        np.testing.assert_allclose(choi_generic(q).matrix, choi_generic(p).matrix)


def test_params_json_errors():
    with pytest.raises(EquichanError):
        params_from_json({"n": 2})
    with pytest.raises(EquichanError):
        params_from_json({"family": "U", "n": 2})
    with pytest.raises(EquichanError):
        params_from_json({"family": "PROD", "n1": 2, "n2": 2, "lam": [1, 0]})
    with pytest.raises(UnsupportedFamily):
        params_from_json({"family": "XYZ"})
