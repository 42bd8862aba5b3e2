import numpy as np
import pytest
from numpy.polynomial import chebyshev as cheb

from dovsolver.basis import (
    BasisSpec,
    CoeffVector,
    Interval,
    basis_matrix,
    constant_coeffs,
    eval_series,
    project,
)
from dovsolver.expr import parse
from dovsolver.opalg import (
    OpMatrix,
    hat_truncation_bound,
    hat_vector,
    integrate_coeffs,
    integration_matrix,
    kernel_matrix,
    power_vector,
    product_matrix,
    unit_product_matrix,
)


def test_integration_matrix_published_rows():
    p3 = integration_matrix(BasisSpec(Interval(-1, 1), 1, 3)).a
    assert np.allclose(p3[1], [-0.25, 0.0, 0.25])
    p4 = integration_matrix(BasisSpec(Interval(-1, 1), 1, 4)).a
    assert np.allclose(p4[2], [-1 / 3, -1 / 2, 0.0, 1 / 6])


def test_integration_matrix_first_row_from_antiderivative():
    # int_{-1}^{x} T_0 = x + 1 = T_0 + T_1 (the displayed variant 1,0,1,0...
    # fails the quadrature cross-check below)
    p3 = integration_matrix(BasisSpec(Interval(-1, 1), 1, 3)).a
    assert np.allclose(p3[0], [1.0, 1.0, 0.0])


def test_hybrid_integration_block_structure():
    spec = BasisSpec(Interval(0, 1), 2, 2)
    q = integration_matrix(spec).a
    # cross-block coupling of the constant: whole-block integral 1/2
    assert np.allclose(q[0:2, 2:4], [[0.5, 0.0], [0.0, 0.0]])
    # diagonal blocks are the one-block matrix scaled into the half-width block
    assert np.allclose(q[0:2, 0:2], [[0.25, 0.25], [-0.0625, 0.0]])
    assert np.allclose(q[2:4, 0:2], 0.0)


def _analytic_running_integral(cv):
    """Independent oracle: per-block chebint plus accumulated block masses."""
    spec = cv.spec
    scale = 1.0 / (spec.interval.A * spec.N)

    def F(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        idx = np.atleast_1d(spec.block_index(t))
        masses = []
        for n0 in range(spec.N):
            anti = cheb.chebint(cv.block(n0), lbnd=-1.0) * scale
            masses.append(cheb.chebval(1.0, anti))
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        for n0 in np.unique(idx):
            mask = idx == n0
            anti = cheb.chebint(cv.block(n0), lbnd=-1.0) * scale
            xi = np.clip(spec.local_coord(n0, t[mask]), -1, 1)
            out[mask] = cum[n0] + cheb.chebval(xi, anti)
        return out

    return F


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("M", [3, 5, 8])
def test_integration_contract_random_polynomials(N, M):
    rng = np.random.default_rng(7 * N + M)
    spec = BasisSpec(Interval(-0.5, 1.5), N, M)
    Q = integration_matrix(spec)
    for _ in range(25):
        c = np.zeros(spec.dim)
        for n0 in range(N):
            c[n0 * M:n0 * M + M - 1] = rng.normal(size=M - 1)  # degree <= M-2
        cv = CoeffVector(spec, c)
        through_matrix = integrate_coeffs(Q, cv)
        reference = project(_analytic_running_integral(cv), spec)
        assert np.max(np.abs(through_matrix.c - reference.c)) < 1e-10


def test_product_matrix_of_one_is_identity():
    for spec in (BasisSpec(Interval(0, 1), 1, 5), BasisSpec(Interval(0, 1), 3, 4)):
        W = product_matrix(constant_coeffs(spec, 1.0))
        assert np.allclose(W.a, np.eye(spec.dim))


def test_product_matrix_linearization_rows():
    spec = BasisSpec(Interval(-1, 1), 1, 3)
    W = product_matrix(CoeffVector(spec, [0, 1, 0]))
    assert np.allclose(W.a, [[0, 1, 0], [0.5, 0, 0.5], [0, 0.5, 0]])


def test_product_matrix_pointwise_property():
    rng = np.random.default_rng(5)
    spec = BasisSpec(Interval(0, 1), 1, 6)
    t = rng.uniform(0, 1, 50)
    for _ in range(20):
        deg_c, deg_v = rng.integers(0, 3, size=2)  # deg(c) + deg(v) <= M-1
        c = np.zeros(6)
        c[:deg_c + 1] = rng.normal(size=deg_c + 1)
        v = np.zeros(6)
        v[:deg_v + 1] = rng.normal(size=deg_v + 1)
        cv, vv = CoeffVector(spec, c), CoeffVector(spec, v)
        prod = CoeffVector(spec, product_matrix(cv).a.T @ v)
        direct = eval_series(cv, t) * eval_series(vv, t)
        assert np.max(np.abs(eval_series(prod, t) - direct)) < 1e-12


def test_hat_vector_identity():
    spec = BasisSpec(Interval(-1, 1), 1, 4)
    assert np.allclose(hat_vector(OpMatrix(spec, np.eye(4))).b, [2.5, 0, 0.5, 0])


def test_hat_vector_single_entries():
    spec = BasisSpec(Interval(-1, 1), 1, 5)
    b = np.zeros((5, 5))
    b[0, 0] = 1.0
    assert np.allclose(hat_vector(OpMatrix(spec, b)).b, [1, 0, 0, 0, 0])
    b = np.zeros((5, 5))
    b[0, 1] = 1.0
    assert np.allclose(hat_vector(OpMatrix(spec, b)).b, [0, 1, 0, 0, 0])


def test_hat_contract_with_truncation_bound():
    rng = np.random.default_rng(11)
    for N, M in [(1, 5), (2, 4), (3, 3)]:
        spec = BasisSpec(Interval(0, 2), N, M)
        t = rng.uniform(0, 2, 100)
        H = basis_matrix(spec, t)
        for _ in range(10):
            B = OpMatrix(spec, rng.normal(size=(spec.dim, spec.dim)))
            lhs = np.einsum("ij,jk,ik->i", H, B.a, H)
            rhs = H @ hat_vector(B).b
            assert np.max(np.abs(lhs - rhs)) <= hat_truncation_bound(B) + 1e-12


def test_hat_contract_exact_on_low_degree_support():
    rng = np.random.default_rng(12)
    spec = BasisSpec(Interval(0, 1), 2, 6)
    t = rng.uniform(0, 1, 100)
    H = basis_matrix(spec, t)
    # support restricted to p + q <= M - 1 inside each diagonal block
    B = np.zeros((spec.dim, spec.dim))
    for n0 in range(2):
        for p in range(6):
            for q in range(6 - p):
                B[n0 * 6 + p, n0 * 6 + q] = rng.normal()
    Bm = OpMatrix(spec, B)
    lhs = np.einsum("ij,jk,ik->i", H, B, H)
    rhs = H @ hat_vector(Bm).b
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_hat_vector_linearity():
    rng = np.random.default_rng(13)
    spec = BasisSpec(Interval(0, 1), 2, 4)
    B1 = rng.normal(size=(8, 8))
    B2 = rng.normal(size=(8, 8))
    a, b = 1.7, -0.3
    combined = hat_vector(OpMatrix(spec, a * B1 + b * B2)).b
    split = a * hat_vector(OpMatrix(spec, B1)).b + b * hat_vector(OpMatrix(spec, B2)).b
    assert np.array_equal(combined, split) or np.max(np.abs(combined - split)) < 1e-15


def test_power_vector_of_constant_one():
    spec = BasisSpec(Interval(0, 1), 2, 4)
    U = constant_coeffs(spec, 1.0)
    assert np.allclose(power_vector(U, 7).c, U.c)


def test_power_vector_square_of_t():
    spec = BasisSpec(Interval(-1, 1), 1, 4)
    U = project(lambda t: t, spec)
    assert np.allclose(power_vector(U, 2).c, [0.5, 0, 0.5, 0], atol=1e-13)


def test_power_vector_cube_pointwise():
    spec = BasisSpec(Interval(0, 1), 1, 6)
    U = project(lambda t: t, spec)
    assert eval_series(power_vector(U, 3), 0.4) == pytest.approx(0.064, abs=1e-12)


def test_power_vector_consistency_under_degree_condition():
    rng = np.random.default_rng(21)
    for N, M, r in [(1, 7, 2), (2, 7, 3), (1, 9, 4)]:
        spec = BasisSpec(Interval(0, 1), N, M)
        deg = (M - 1) // r
        c = np.zeros(spec.dim)
        for n0 in range(N):
            c[n0 * M:n0 * M + deg + 1] = rng.normal(size=deg + 1)
        U = CoeffVector(spec, c)
        t = rng.uniform(0, 1, 60)
        assert np.max(np.abs(eval_series(power_vector(U, r), t)
                             - eval_series(U, t) ** r)) < 1e-10


def test_unit_product_matrix_matches_generic():
    spec = BasisSpec(Interval(0, 1), 2, 3)
    for r in range(1, spec.dim + 1):
        c = np.zeros(spec.dim)
        c[r - 1] = 1.0
        assert np.allclose(unit_product_matrix(spec, r),
                           product_matrix(CoeffVector(spec, c)).a)


def test_kernel_matrix_constant():
    spec = BasisSpec(Interval(0, 1), 2, 3)
    K = kernel_matrix(parse("1"), spec).a
    expected = np.zeros((6, 6))
    expected[0, 0] = expected[0, 3] = expected[3, 0] = expected[3, 3] = 1.0
    assert np.max(np.abs(K - expected)) < 1e-13


def test_kernel_matrix_separable_bilinear():
    K = kernel_matrix(parse("t*x"), BasisSpec(Interval(-1, 1), 1, 3)).a
    expected = np.zeros((3, 3))
    expected[1, 1] = 1.0
    assert np.max(np.abs(K - expected)) < 1e-14


def test_kernel_matrix_smooth_kernel_grid_error():
    # measured truncation of the degree-7x7 expansion of cos(t-x) on [0,1]^2
    # is 1.5e-9 on this grid
    spec = BasisSpec(Interval(0, 1), 1, 8)
    K = kernel_matrix(parse("cos(t-x)"), spec).a
    g = np.linspace(0, 1, 20)
    H = basis_matrix(spec, g)
    approx = H @ K @ H.T
    exact = np.cos(g[None, :] - g[:, None])
    assert np.max(np.abs(approx - exact)) < 2e-9
