import math

import numpy as np
import pytest

from dovsolver.basis import (
    BasisSpec,
    CoeffVector,
    Interval,
    basis_matrix,
    chebyshev_eval,
    constant_coeffs,
    eval_series,
    gauss_chebyshev_nodes,
    hcp_eval,
    project,
    series_derivative,
    weight,
)
from dovsolver.oracle import weighted_l2_error


def test_interval_scaling():
    iv = Interval(0.0, 1.0)
    assert iv.A == 2.0
    assert Interval(-1.0, 1.0).A == 1.0
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_chebyshev_eval_examples():
    assert chebyshev_eval(0, 0.3) == 1.0
    assert chebyshev_eval(2, 0.5) == pytest.approx(-0.5, abs=1e-15)
    assert chebyshev_eval(5, math.cos(0.7)) == pytest.approx(math.cos(3.5), abs=1e-12)


def test_chebyshev_eval_clamps_roundoff():
    assert chebyshev_eval(3, 1.0 + 5e-13) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        chebyshev_eval(3, 1.1)


def test_hcp_eval_examples():
    spec = BasisSpec(Interval(0, 1), 1, 4)
    assert hcp_eval(spec, 1, 0.37) == 1.0

    spec = BasisSpec(Interval(0, 1), 2, 3)
    assert hcp_eval(spec, 4, 0.25) == 0.0
    # local argument 4*0.75 - 3 = 0 and phi_1(0) = 0
    assert hcp_eval(spec, 5, 0.75) == pytest.approx(0.0, abs=1e-15)


def test_hcp_eval_index_range():
    spec = BasisSpec(Interval(0, 1), 2, 3)
    with pytest.raises(IndexError):
        hcp_eval(spec, 0, 0.5)
    with pytest.raises(IndexError):
        hcp_eval(spec, 7, 0.5)


def test_block_ownership_half_open():
    spec = BasisSpec(Interval(0, 1), 2, 2)
    assert spec.block_index(0.5) == 1  # boundary belongs to the right block
    assert spec.block_index(1.0) == 1  # last block closed
    assert spec.block_index(0.0) == 0


def test_weight_examples():
    assert weight(BasisSpec(Interval(-1, 1), 1, 4), 0.0) == pytest.approx(1.0)
    assert weight(BasisSpec(Interval(0, 1), 1, 4), 0.5) == pytest.approx(1.0)
    spec = BasisSpec(Interval(0, 1), 2, 4)
    assert weight(spec, 0.375) == pytest.approx(1 / math.sqrt(1 - 0.25))
    with pytest.raises(ValueError, match="singular"):
        weight(spec, 0.5)


def test_project_constant():
    for spec in (BasisSpec(Interval(0, 1), 1, 4), BasisSpec(Interval(-1, 2), 3, 5)):
        cv = project(lambda t: np.ones_like(t), spec)
        expected = constant_coeffs(spec, 1.0)
        assert np.allclose(cv.c, expected.c, atol=1e-14)


def test_project_linear_on_reference():
    cv = project(lambda t: t, BasisSpec(Interval(-1, 1), 1, 4))
    assert np.allclose(cv.c, [0, 1, 0, 0], atol=1e-14)


def test_project_quadratic_coeffs():
    cv = project(lambda t: t**2, BasisSpec(Interval(0, 1), 1, 5))
    assert np.allclose(cv.c, [3 / 8, 1 / 2, 1 / 8, 0, 0], atol=1e-14)


def test_eval_series_examples():
    spec = BasisSpec(Interval(0, 1), 1, 4)
    cv = project(lambda t: np.ones_like(t), spec)
    assert eval_series(cv, 0.42) == pytest.approx(1.0, abs=1e-14)

    cv = CoeffVector(BasisSpec(Interval(-1, 1), 1, 4), [0, 1, 0, 0])
    assert eval_series(cv, 0.3) == pytest.approx(0.3, abs=1e-15)

    cv = project(lambda t: t**3, BasisSpec(Interval(0, 1), 1, 6))
    assert eval_series(cv, 0.5) == pytest.approx(0.125, abs=1e-12)


def test_coeff_vector_validation():
    spec = BasisSpec(Interval(0, 1), 2, 3)
    with pytest.raises(ValueError):
        CoeffVector(spec, [1.0, 2.0])


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("M", [2, 4, 6, 8])
def test_orthogonality(N, M):
    # independent quadrature: Gauss-Legendre in theta, where the weighted
    # inner product per block becomes a plain integral of cos products
    spec = BasisSpec(Interval(0.0, 1.5), N, M)
    theta, wq = np.polynomial.legendre.leggauss(200)
    theta = 0.5 * math.pi * (theta + 1.0)
    wq = wq * 0.5 * math.pi
    x = np.cos(theta)
    gram = np.zeros((spec.dim, spec.dim))
    for n0 in range(N):
        t = spec.block_nodes(n0, x)
        H = basis_matrix(spec, t)
        gram += (H * wq[:, None]).T @ H / (spec.interval.A * N)
    a_n = spec.interval.A * N
    expected = np.zeros_like(gram)
    for r in range(spec.dim):
        m = r % M
        expected[r, r] = math.pi / a_n if m == 0 else math.pi / (2 * a_n)
    assert np.max(np.abs(gram - expected)) < 1e-10


@pytest.mark.parametrize("N,M", [(1, 3), (2, 4), (3, 6)])
def test_projection_exactness_for_polynomials(N, M):
    rng = np.random.default_rng(42)
    spec = BasisSpec(Interval(-0.5, 2.0), N, M)
    coeffs = rng.normal(size=M)  # global polynomial of degree M-1
    p = np.polynomial.Polynomial(coeffs)
    cv = project(p, spec)
    for n0 in range(N):
        t = spec.block_nodes(n0, rng.uniform(-1, 1, 100))
        assert np.max(np.abs(eval_series(cv, t) - p(t))) < 1e-12


def test_best_approximation_beats_taylor():
    # weighted L2 error of the projection never exceeds the same-degree
    # Taylor polynomial anchored at each block's left endpoint
    for N, M in [(1, 4), (2, 3), (2, 5)]:
        spec = BasisSpec(Interval(0, 1), N, M)
        cv = project(np.exp, spec)
        err_proj = weighted_l2_error(np.exp, cv)

        def taylor_piece(t):
            t = np.asarray(t, dtype=float)
            idx = np.atleast_1d(spec.block_index(t))
            left = spec.interval.t0 + idx * spec.block_width
            out = np.zeros_like(np.atleast_1d(t))
            for d in range(M):
                out += np.exp(left) * (np.atleast_1d(t) - left) ** d / math.factorial(d)
            return out

        err_taylor = weighted_l2_error(
            lambda t: np.exp(t) - taylor_piece(t), CoeffVector(spec, np.zeros(spec.dim)))
        assert err_proj <= err_taylor + 1e-14


@pytest.mark.parametrize("N", [1, 2, 4])
@pytest.mark.parametrize("M", [2, 3, 4, 5, 6, 7, 8])
def test_truncation_bound_for_exp(N, M):
    # smoothness-based bound with gamma = max |f^(M)| = e on [0, 1]
    spec = BasisSpec(Interval(0, 1), N, M)
    err = weighted_l2_error(np.exp, project(np.exp, spec))
    a_n = spec.interval.A * N
    bound = math.e / (N ** (M - 1) * math.factorial(M)) * math.sqrt(math.pi / a_n)
    assert err <= bound


def test_series_derivative_matches_analytic():
    spec = BasisSpec(Interval(0, 2), 2, 8)
    cv = project(lambda t: t**3, spec)
    d2 = series_derivative(cv, 2)
    t = np.linspace(0.05, 1.95, 50)
    assert np.max(np.abs(eval_series(d2, t) - 6 * t)) < 1e-9


def test_gauss_chebyshev_rule_is_interior():
    x = gauss_chebyshev_nodes(64)
    assert np.all(np.abs(x) < 1.0)
    # integrates x^2 / sqrt(1-x^2) to pi/2
    assert np.pi / 64 * np.sum(x**2) == pytest.approx(np.pi / 2, abs=1e-13)
