"""Shifted Chebyshev and hybrid block-pulse/Chebyshev bases.

A ``BasisSpec`` with N blocks and M degrees per block spans an NM-dimensional
space of piecewise polynomials on [t0, tf]; N = 1 reduces to plain shifted
Chebyshev polynomials.  Coefficient vectors are flattened block-major:
c_{1,0} .. c_{1,M-1}, c_{2,0} .. c_{N,M-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb

_CLAMP_TOL = 1e-12


def chebyshev_eval(m: int, x):
    """First-kind Chebyshev polynomial of degree m via the three-term
    recurrence; x may be a scalar or array in [-1, 1] (roundoff clamped)."""
    if m < 0:
        raise ValueError(f"degree must be nonnegative: {m}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + _CLAMP_TOL):
        raise ValueError("argument outside [-1, 1] beyond roundoff tolerance")
    xa = np.clip(xa, -1.0, 1.0)
    prev = np.ones_like(xa)
    if m == 0:
        out = prev
    else:
        cur = xa.copy()
        for _ in range(m - 1):
            prev, cur = cur, 2.0 * xa * cur - prev
        out = cur
    return float(out) if np.ndim(x) == 0 else out


def chebyshev_vandermonde(m_count: int, x: np.ndarray) -> np.ndarray:
    """Matrix phi[m, q] = T_m(x_q) for degrees 0 .. m_count-1."""
    x = np.asarray(x, dtype=float)
    out = np.empty((m_count, x.size))
    out[0] = 1.0
    if m_count > 1:
        out[1] = x
    for m in range(2, m_count):
        out[m] = 2.0 * x * out[m - 1] - out[m - 2]
    return out


def gauss_chebyshev_nodes(n: int) -> np.ndarray:
    """Nodes of the n-point Gauss-Chebyshev rule (first kind), all interior.

    With weights pi/n the rule integrates p(x)/sqrt(1-x^2) exactly for
    polynomials p of degree <= 2n-1.
    """
    q = np.arange(1, n + 1)
    return np.cos((2 * q - 1) * np.pi / (2 * n))


@dataclass(frozen=True)
class Interval:
    """Domain [t0, tf] with its affine scaling factor A = 2/(tf - t0)."""

    t0: float
    tf: float

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError(f"empty interval: [{self.t0}, {self.tf}]")

    @property
    def A(self) -> float:
        return 2.0 / (self.tf - self.t0)

    @property
    def width(self) -> float:
        return self.tf - self.t0


@dataclass(frozen=True)
class BasisSpec:
    """Hybrid basis: N equal blocks, Chebyshev degrees 0 .. M-1 per block.

    Block n (0-based here) covers [t0 + n*w, t0 + (n+1)*w) with w the block
    width; interior boundaries belong to the right block and the last block
    is closed, so evaluation is a total function on the domain.
    """

    interval: Interval
    N: int = 1
    M: int = 4

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError(f"N and M must be positive: N={self.N}, M={self.M}")

    @property
    def dim(self) -> int:
        return self.N * self.M

    @property
    def block_width(self) -> float:
        return self.interval.width / self.N

    def block_index(self, t):
        """0-based index of the block owning t (vectorized)."""
        ta = np.asarray(t, dtype=float)
        idx = np.floor((ta - self.interval.t0) / self.block_width).astype(int)
        idx = np.clip(idx, 0, self.N - 1)
        return int(idx) if np.ndim(t) == 0 else idx

    def local_coord(self, n0, t):
        """Map t inside block n0 to the reference coordinate in [-1, 1]."""
        a = self.interval.A
        return a * self.N * (np.asarray(t, dtype=float) - self.interval.t0) - 2.0 * (n0 + 1) + 1.0

    def block_nodes(self, n0: int, x: np.ndarray) -> np.ndarray:
        """Map reference points x in [-1, 1] into block n0."""
        w = self.block_width
        return self.interval.t0 + n0 * w + (np.asarray(x, dtype=float) + 1.0) * (w / 2.0)

    def split(self, r: int) -> tuple[int, int]:
        """1-based flat index r -> (block n0, degree m), both 0-based."""
        if not 1 <= r <= self.dim:
            raise IndexError(f"basis index out of range: {r} (dim {self.dim})")
        return (r - 1) // self.M, (r - 1) % self.M


@dataclass(frozen=True)
class CoeffVector:
    """Coefficients of a function in the basis of ``spec`` (length N*M)."""

    spec: BasisSpec
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (self.spec.dim,):
            raise ValueError(f"expected {self.spec.dim} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def block(self, n0: int) -> np.ndarray:
        return self.c[n0 * self.spec.M:(n0 + 1) * self.spec.M]


def hcp_eval(spec: BasisSpec, r: int, t):
    """Value of the r-th basis function (1-based flat index) at t.

    Zero off the owning block; at interior boundaries the right block owns
    the point, the last block is closed.
    """
    n0, m = spec.split(r)
    ta = np.asarray(t, dtype=float)
    inside = spec.block_index(ta) == n0
    xi = np.clip(spec.local_coord(n0, ta), -1.0, 1.0)
    val = np.where(inside, chebyshev_eval(m, xi), 0.0)
    return float(val) if np.ndim(t) == 0 else val


def basis_matrix(spec: BasisSpec, t: np.ndarray) -> np.ndarray:
    """Matrix H[i, r] = (basis function r+1)(t_i)."""
    ta = np.asarray(t, dtype=float)
    out = np.zeros((ta.size, spec.dim))
    idx = spec.block_index(ta)
    for n0 in np.unique(np.atleast_1d(idx)):
        mask = np.atleast_1d(idx) == n0
        xi = np.clip(spec.local_coord(n0, ta[mask]), -1.0, 1.0)
        out[mask, n0 * spec.M:(n0 + 1) * spec.M] = chebyshev_vandermonde(spec.M, xi).T
    return out


def weight(spec: BasisSpec, t: float) -> float:
    """Chebyshev weight of the block containing t; singular at block edges."""
    n0 = spec.block_index(t)
    xi = spec.local_coord(n0, float(t))
    s = 1.0 - xi * xi
    if s <= 0.0:
        raise ValueError(f"weight is singular at block endpoint t={t}")
    return 1.0 / np.sqrt(s)


def projection_rule_size(M: int) -> int:
    # exact for polynomial integrands of degree <= 2Q-1
    return max(64, 4 * M)


def _sample(f, t: np.ndarray) -> np.ndarray:
    try:
        v = np.asarray(f(t), dtype=float)
        if v.shape == t.shape:
            return v
    except (TypeError, ValueError):
        pass
    return np.array([float(f(ti)) for ti in t])


def project(f, spec: BasisSpec) -> CoeffVector:
    """Weighted L2 projection of a callable onto the basis.

    Inner products are evaluated per block by Gauss-Chebyshev quadrature,
    which absorbs the singular weight exactly and never touches block
    endpoints; denominators are the closed-form norms pi/(A N) for degree 0
    and pi/(2 A N) otherwise.
    """
    Q = projection_rule_size(spec.M)
    x = gauss_chebyshev_nodes(Q)
    phi = chebyshev_vandermonde(spec.M, x)
    coeffs = np.empty(spec.dim)
    for n0 in range(spec.N):
        fv = _sample(f, spec.block_nodes(n0, x))
        blk = phi @ fv
        blk[0] /= Q
        if spec.M > 1:
            blk[1:] *= 2.0 / Q
        coeffs[n0 * spec.M:(n0 + 1) * spec.M] = blk
    return CoeffVector(spec, coeffs)


def constant_coeffs(spec: BasisSpec, value: float) -> CoeffVector:
    """Coefficients of the constant function (exact, no quadrature)."""
    c = np.zeros(spec.dim)
    c[::spec.M] = value
    return CoeffVector(spec, c)


def eval_series(cv: CoeffVector, t):
    """Evaluate the represented function at t (scalar or array), per block
    by the Clenshaw recurrence."""
    spec = cv.spec
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(ta)
    idx = np.atleast_1d(spec.block_index(ta))
    for n0 in np.unique(idx):
        mask = idx == n0
        xi = np.clip(spec.local_coord(n0, ta[mask]), -1.0, 1.0)
        out[mask] = _cheb.chebval(xi, cv.block(n0))
    return float(out[0]) if np.ndim(t) == 0 else out


def series_derivative(cv: CoeffVector, order: int = 1) -> CoeffVector:
    """Coefficients of the order-th derivative, block by block.

    Jumps at block boundaries are ignored (the result is the derivative of
    each polynomial piece).
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    spec = cv.spec
    scale = spec.interval.A * spec.N
    out = np.zeros(spec.dim)
    for n0 in range(spec.N):
        d = cv.block(n0)
        if order < spec.M:
            d = _cheb.chebder(d, m=order, scl=scale)
            out[n0 * spec.M:n0 * spec.M + d.size] = d
    return CoeffVector(spec, out)
