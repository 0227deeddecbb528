"""Spectral bookkeeping for -Laplacian + |x|^2 on R^n.

An eigenspace is labeled by its level N >= 0: the eigenvalue is
lambda^2 = 2N + n with multiplicity binom(N+n-1, n-1), and a product
basis is indexed by the multi-indices alpha with |alpha| = N.  This
module enumerates those indices, evaluates eigenfunctions (single basis
elements and dense coefficient combinations on tensor grids), and
provides the exact finite-sum form of the spectral projection kernel
used as the reference for the oscillatory-integral evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .hermite import hermite_batch, hermite_batch_grid


def eigenvalue_squared(level: int, dim: int) -> int:
    if level < 0 or dim < 1:
        raise ValueError("need level >= 0 and dim >= 1")
    return 2 * level + dim


def level_from_eigenvalue_squared(r: int, dim: int) -> int:
    """Inverse of eigenvalue_squared; rejects r not of the form 2N + dim."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if r < dim or (r - dim) % 2:
        raise ValueError(f"{r} is not an eigenvalue of the {dim}-d oscillator")
    return (r - dim) // 2


def multiplicity(level: int, dim: int) -> int:
    if level < 0 or dim < 1:
        raise ValueError("need level >= 0 and dim >= 1")
    return math.comb(level + dim - 1, dim - 1)


def level_indices(level: int, dim: int) -> Iterator[tuple[int, ...]]:
    """All multi-indices alpha >= 0 with |alpha| = level, lexicographically
    decreasing from (level, 0, ..., 0).
    """
    if level < 0 or dim < 1:
        raise ValueError("need level >= 0 and dim >= 1")
    a = [level] + [0] * (dim - 1)
    while True:
        yield tuple(a)
        # rightmost entry before the last that can still donate
        i = dim - 2
        while i >= 0 and a[i] == 0:
            i -= 1
        if i < 0:
            return
        a[i] -= 1
        tail = sum(a[i + 1 :]) + 1
        for j in range(i + 1, dim):
            a[j] = 0
        a[i + 1] = tail


@dataclass(frozen=True)
class Eigenspace:
    level: int
    dim: int

    def __post_init__(self):
        if self.level < 0 or self.dim < 1:
            raise ValueError("need level >= 0 and dim >= 1")

    @property
    def eigenvalue_squared(self) -> int:
        return eigenvalue_squared(self.level, self.dim)

    @property
    def eigenvalue(self) -> float:
        return math.sqrt(self.eigenvalue_squared)

    @property
    def multiplicity(self) -> int:
        return multiplicity(self.level, self.dim)

    def indices(self) -> Iterator[tuple[int, ...]]:
        return level_indices(self.level, self.dim)


def eigenfunction_at_points(alpha, pts) -> np.ndarray:
    """Product eigenfunction for multi-index alpha at points of shape (m, n)."""
    alpha = tuple(int(a) for a in alpha)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != len(alpha):
        raise ValueError("points and multi-index have different dimensions")
    vals = np.ones(pts.shape[0])
    for axis, k in enumerate(alpha):
        vals = vals * hermite_batch([k], pts[:, axis])[0]
    return vals


def eigenspace_eval_2d(level, coeffs, xs, ys, axis_x=None, axis_y=None) -> np.ndarray:
    """Dense combination sum_a c_a f_a(x) f_{N-a}(y) on a tensor grid.

    ``coeffs`` has length level+1, ordered by the first index a = 0..level.
    ``axis_x``/``axis_y`` accept precomputed hermite_batch_grid(level, .)
    tables so repeated sweeps over one grid can share them.  Returns an
    array of shape (len(xs), len(ys)).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (level + 1,):
        raise ValueError("coefficient vector must have length level + 1")
    hx = hermite_batch_grid(level, xs) if axis_x is None else axis_x
    hy = hermite_batch_grid(level, ys) if axis_y is None else axis_y
    if hx.shape[0] != level + 1 or hy.shape[0] != level + 1:
        raise ValueError("axis tables do not match the level")
    # f_a on x pairs with f_{N-a} on y
    return (coeffs[:, None] * hx).T @ hy[::-1]


def random_coefficients(space: Eigenspace, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm coefficient vector over the eigenspace basis."""
    c = rng.standard_normal(space.multiplicity)
    return c / np.linalg.norm(c)


def projection_kernel_sum(level: int, dim: int, x, y, index_cap: int = 2_000_000) -> float:
    """Spectral projection kernel at (x, y) as the exact eigenbasis sum.

    Cost is O(level) in one and two dimensions and O(multiplicity * dim)
    otherwise; ``index_cap`` guards the general path.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (dim,) or y.shape != (dim,):
        raise ValueError("points must have shape (dim,)")
    if dim == 1:
        vals = hermite_batch([level], np.array([x[0], y[0]]))[0]
        return float(vals[0] * vals[1])
    if dim == 2:
        h = hermite_batch_grid(level, np.array([x[0], x[1], y[0], y[1]]))
        # sum_a f_a(x1) f_{N-a}(x2) f_a(y1) f_{N-a}(y2)
        return float(np.dot(h[:, 0] * h[:, 2], (h[:, 1] * h[:, 3])[::-1]))
    if multiplicity(level, dim) > index_cap:
        raise ValueError("eigenspace too large for direct summation")
    h = hermite_batch_grid(level, np.concatenate([x, y]))
    total = 0.0
    for alpha in level_indices(level, dim):
        px = 1.0
        py = 1.0
        for axis, k in enumerate(alpha):
            px *= h[k, axis]
            py *= h[k, dim + axis]
        total += px * py
    return total


def _table_key(xs: np.ndarray) -> bytes:
    return xs.tobytes()


class Eigenfunction:
    """Sparse coefficient combination over one eigenspace, callable on points.

    Evaluation caches per-axis Hermite tables keyed by the distinct
    coordinate values seen, so tensor-product quadrature grids cost one
    recurrence pass per axis rather than one per node.
    """

    def __init__(self, dim: int, level: int, indices, coefficients):
        self.dim = int(dim)
        self.level = int(level)
        self.indices = tuple(tuple(int(a) for a in alpha) for alpha in indices)
        self.coefficients = tuple(float(c) for c in coefficients)
        if len(self.indices) != len(self.coefficients):
            raise ValueError("indices and coefficients differ in length")
        if not self.indices:
            raise ValueError("eigenfunction needs at least one term")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("duplicate multi-index")
        for alpha in self.indices:
            if len(alpha) != self.dim:
                raise ValueError(f"index {alpha} has wrong dimension")
            if sum(alpha) != self.level or min(alpha) < 0:
                raise ValueError(f"index {alpha} is not in level {self.level}")
        self._axis_orders = [sorted({a[k] for a in self.indices})
                             for k in range(self.dim)]
        self._order_pos = [{o: i for i, o in enumerate(orders)}
                           for orders in self._axis_orders]
        self._cache: dict[tuple[int, bytes], np.ndarray] = {}

    @property
    def eigenvalue_squared(self) -> int:
        return 2 * self.level + self.dim

    @property
    def eigenvalue(self) -> float:
        return math.sqrt(2 * self.level + self.dim)

    def global_l2_norm(self) -> float:
        return math.sqrt(math.fsum(c * c for c in self.coefficients))

    def _axis_table(self, axis: int, uniq: np.ndarray) -> np.ndarray:
        key = (axis, _table_key(uniq))
        table = self._cache.get(key)
        if table is None:
            table = hermite_batch(self._axis_orders[axis], uniq)
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = table
        return table

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[1] != self.dim:
            raise ValueError("points have wrong dimension")
        uniqs, invs, tables = [], [], []
        for k in range(self.dim):
            uniq, inv = np.unique(pts[:, k], return_inverse=True)
            uniqs.append(uniq)
            invs.append(inv)
            tables.append(self._axis_table(k, uniq))
        acc = np.zeros(pts.shape[0])
        for alpha, c in zip(self.indices, self.coefficients):
            term = np.full(pts.shape[0], c)
            for k in range(self.dim):
                term = term * tables[k][self._order_pos[k][alpha[k]]][invs[k]]
            acc += term
        return acc


class DenseEigenfunction2D:
    """Full 2-D eigenspace combination with tensor-grid evaluation.

    Coefficient a pairs f_a on the first axis with f_{N-a} on the
    second.  Points sharing axis values (quadrature meshes) are
    evaluated through one matrix product per call instead of one
    recurrence per term, which is what makes dense random combinations
    at level a few thousand affordable.
    """

    def __init__(self, level: int, coefficients):
        self.dim = 2
        self.level = int(level)
        self.coefficients = np.asarray(coefficients, dtype=float).copy()
        if self.coefficients.shape != (self.level + 1,):
            raise ValueError("coefficient vector must have length level + 1")
        self._cache: dict[tuple[int, bytes], np.ndarray] = {}

    @property
    def eigenvalue(self) -> float:
        return math.sqrt(2 * self.level + 2)

    def global_l2_norm(self) -> float:
        c = self.coefficients
        return math.sqrt(math.fsum(c * c))

    def _axis_table(self, axis: int, uniq: np.ndarray) -> np.ndarray:
        key = (axis, _table_key(uniq))
        table = self._cache.get(key)
        if table is None:
            table = hermite_batch_grid(self.level, uniq)
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[key] = table
        return table

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1 or pts.shape[1] != 2:
            raise ValueError("points must have shape (m, 2)")
        u1, inv1 = np.unique(pts[:, 0], return_inverse=True)
        u2, inv2 = np.unique(pts[:, 1], return_inverse=True)
        h1 = self._axis_table(0, u1)
        h2 = self._axis_table(1, u2)
        tile = (self.coefficients[:, None] * h1).T @ h2[::-1]
        return tile[inv1, inv2]
