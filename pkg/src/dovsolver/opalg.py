"""Operational matrices of integration and product, and the hat transform.

These are the algebraic core of the direct method: integration and
multiplication become matrix actions on coefficient vectors, and the hat
transform turns the quadratic form H(t)^T B H(t) into a plain series, which
is what removes collocation from the first-kind equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import (
    BasisSpec,
    CoeffVector,
    chebyshev_vandermonde,
    gauss_chebyshev_nodes,
    projection_rule_size,
)
from .expr import Expr, evaluate


@dataclass(frozen=True)
class OpMatrix:
    """Dense NM x NM matrix over a basis, block-major index order."""

    spec: BasisSpec
    a: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.shape != (self.spec.dim, self.spec.dim):
            raise ValueError(f"expected {self.spec.dim}x{self.spec.dim} matrix, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class HatVector:
    spec: BasisSpec
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.shape != (self.spec.dim,):
            raise ValueError(f"expected {self.spec.dim} entries, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)


def _integration_rows(M: int) -> np.ndarray:
    """Rows of antiderivative coefficients on the reference interval.

    Row m holds the Chebyshev coefficients of int_{-1}^x T_m; the first two
    rows come from direct integration, higher rows from the degree-shift
    recurrence.  The T_M term of the last row falls outside the basis and is
    dropped (inherent truncation).
    """
    p = np.zeros((M, M))
    p[0, 0] = 1.0
    if M > 1:
        p[0, 1] = 1.0
    if M > 1:
        p[1, 0] = -0.25
        if M > 2:
            p[1, 2] = 0.25
    for m in range(2, M):
        p[m, 0] = (-1.0) ** (m + 1) / (m * m - 1.0)
        p[m, m - 1] = -0.5 / (m - 1.0)
        if m + 1 < M:
            p[m, m + 1] = 0.5 / (m + 1.0)
    return p


def _block_average_column(M: int) -> np.ndarray:
    """First column of the cross-block coupling: int_{-1}^{1} T_m dx."""
    e = np.zeros(M)
    e[0] = 2.0
    for m in range(2, M, 2):
        e[m] = -2.0 / (m * m - 1.0)
    return e


def integration_matrix(spec: BasisSpec) -> OpMatrix:
    """Matrix Q with int_{t0}^t H(s) ds ~= Q H(t).

    Block upper triangular: diagonal blocks integrate within a block,
    off-diagonal blocks carry the accumulated block averages forward.  For a
    function g with coefficients C, the coefficients of its running integral
    are C^T Q (equivalently Q^T C as a column vector).
    """
    N, M = spec.N, spec.M
    scale = 1.0 / (spec.interval.A * N)
    p = _integration_rows(M) * scale
    e = np.zeros((M, M))
    e[:, 0] = _block_average_column(M) * scale
    a = np.zeros((spec.dim, spec.dim))
    for nr in range(N):
        a[nr * M:(nr + 1) * M, nr * M:(nr + 1) * M] = p
        for nc in range(nr + 1, N):
            a[nr * M:(nr + 1) * M, nc * M:(nc + 1) * M] = e
    return OpMatrix(spec, a)


def integrate_coeffs(Q: OpMatrix, cv: CoeffVector) -> CoeffVector:
    """Coefficients of the running integral of the represented function."""
    return CoeffVector(cv.spec, Q.a.T @ cv.c)


def _product_block(c: np.ndarray, M: int) -> np.ndarray:
    # w[i, k] = coefficient of T_k in T_i * (series c), products of degree
    # >= M silently dropped: w[i, k] = (c_{k-i} [k>=i] + c_{i+k} [i+k<M]
    #                                   + c_{i-k} [i>=k>=1]) / 2
    i = np.arange(M)[:, None]
    k = np.arange(M)[None, :]
    cpad = np.concatenate([np.asarray(c, dtype=float), np.zeros(M)])
    w = np.where(k >= i, cpad[np.abs(k - i)], 0.0)
    w = w + np.where(i + k < M, cpad[i + k], 0.0)
    w = w + np.where((i >= k) & (k >= 1), cpad[np.abs(i - k)], 0.0)
    return 0.5 * w


def product_matrix(cv: CoeffVector) -> OpMatrix:
    """Product operational matrix W of the function represented by cv.

    W[i, k] is the coefficient of H_k in H_i * f, built per block from the
    linearization T_i T_j = (T_{i+j} + T_|i-j|)/2; cross-block entries vanish
    because supports are disjoint.  For a second function with coefficients
    V, the product has coefficients W^T V.
    """
    spec = cv.spec
    a = np.zeros((spec.dim, spec.dim))
    for n0 in range(spec.N):
        sl = slice(n0 * spec.M, (n0 + 1) * spec.M)
        a[sl, sl] = _product_block(cv.block(n0), spec.M)
    return OpMatrix(spec, a)


def unit_product_matrix(spec: BasisSpec, r: int) -> np.ndarray:
    """Product matrix of the r-th basis function (1-based), as a raw array."""
    n0, m = spec.split(r)
    c = np.zeros(spec.M)
    c[m] = 1.0
    a = np.zeros((spec.dim, spec.dim))
    sl = slice(n0 * spec.M, (n0 + 1) * spec.M)
    a[sl, sl] = _product_block(c, spec.M)
    return a


_HAT_INDEX_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _hat_indices(M: int):
    try:
        return _HAT_INDEX_CACHE[M]
    except KeyError:
        p = np.arange(M)[:, None]
        q = np.arange(M)[None, :]
        plus = (p + q).ravel()
        minus = np.abs(p - q).ravel()
        keep = plus < M
        _HAT_INDEX_CACHE[M] = (plus[keep], keep, minus)
        return _HAT_INDEX_CACHE[M]


def _hat_core(a: np.ndarray, N: int, M: int) -> np.ndarray:
    # per block: b[d] = (sum of entries with p+q = d, for d < M)/2
    #                 + (sum of entries with |p-q| = d)/2
    plus, keep, minus = _hat_indices(M)
    out = np.empty(N * M)
    for n0 in range(N):
        blk = a[n0 * M:(n0 + 1) * M, n0 * M:(n0 + 1) * M].ravel()
        out[n0 * M:(n0 + 1) * M] = 0.5 * (
            np.bincount(plus, weights=blk[keep], minlength=M)
            + np.bincount(minus, weights=blk, minlength=M))
    return out


def hat_vector(B: OpMatrix) -> HatVector:
    """Hat transform: vector b with H(t)^T B H(t) ~= b . H(t).

    Only the diagonal blocks of B contribute (off-block products of basis
    functions are identically zero); within a block the same Chebyshev
    linearization as the product matrix applies, with degrees >= M dropped.
    The transform is exactly linear in B.
    """
    return HatVector(B.spec, _hat_core(B.a, B.spec.N, B.spec.M))


def hat_truncation_bound(B: OpMatrix) -> float:
    """Mass of the linearization terms the hat transform drops: half the sum
    of |B_pq| over diagonal-block entries with p + q >= M."""
    N, M = B.spec.N, B.spec.M
    total = 0.0
    for n0 in range(N):
        blk = B.a[n0 * M:(n0 + 1) * M, n0 * M:(n0 + 1) * M]
        for p in range(M):
            for q in range(M):
                if p + q >= M:
                    total += 0.5 * abs(blk[p, q])
    return total


def power_vector(U: CoeffVector, r: int) -> CoeffVector:
    """Coefficients approximating the r-th pointwise power of the function.

    Built by repeated application of the product matrix; exact up to roundoff
    while r times the per-block degree stays below M.
    """
    if r < 1:
        raise ValueError(f"power must be >= 1: {r}")
    w_t = product_matrix(U).a.T
    out = U.c
    for _ in range(r - 1):
        out = w_t @ out
    return CoeffVector(U.spec, out)


def kernel_matrix(k: Expr, spec: BasisSpec) -> OpMatrix:
    """Projection K of a bivariate kernel with k(s, t) ~= H(s)^T K H(t).

    Tensor Gauss-Chebyshev quadrature per block pair, matching the 1-D
    projection rule; the kernel expression uses variable x for the first
    argument and t for the second.
    """
    Q = projection_rule_size(spec.M)
    x = gauss_chebyshev_nodes(Q)
    phi = chebyshev_vandermonde(spec.M, x)
    scale = np.full(spec.M, 2.0 / Q)
    scale[0] = 1.0 / Q
    proj = phi * scale[:, None]
    a = np.empty((spec.dim, spec.dim))
    for ns in range(spec.N):
        s_pts = spec.block_nodes(ns, x)
        for nt in range(spec.N):
            t_pts = spec.block_nodes(nt, x)
            vals = np.asarray(
                evaluate(k, {"x": s_pts[:, None], "t": t_pts[None, :]}), dtype=float)
            if vals.shape != (Q, Q):
                vals = np.broadcast_to(vals, (Q, Q))
            a[ns * spec.M:(ns + 1) * spec.M, nt * spec.M:(nt + 1) * spec.M] = \
                proj @ vals @ proj.T
    return OpMatrix(spec, a)
