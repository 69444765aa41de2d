"""Finite pointed metric spaces.

A :class:`FiniteMetricSpace` is a validated symmetric distance matrix with a
distinguished basepoint.  Balls are open (strict inequality) and membership
is decided on the stored floats without slack; tolerance only enters in
validation.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .exceptions import (
    AsymmetricMatrix,
    DuplicatePoint,
    InstanceTooLarge,
    InvalidSpace,
    NegativeDistance,
    TriangleViolation,
)
from .validation import check_index, check_positive, check_square_matrix, search_bound

TRIANGLE_RTOL = 1e-9
DEFAULT_GH_BOUND = 14


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    dist: np.ndarray
    basepoint: int = 0

    @property
    def n(self):
        return self.dist.shape[0]

    @property
    def diameter(self):
        return float(self.dist.max()) if self.n else 0.0

    def with_basepoint(self, basepoint):
        return validate_space(self.dist, basepoint)

    def scaled(self, factor):
        return validate_space(self.dist * check_positive(factor, "factor"), self.basepoint)

    def to_dict(self):
        return {"n": self.n, "basepoint": self.basepoint, "dist": self.dist.tolist()}

    def __repr__(self):
        return f"FiniteMetricSpace(n={self.n}, basepoint={self.basepoint})"


def space_violations(dist, tol=None):
    """List every metric-axiom violation of ``dist`` (empty when valid)."""
    d = check_square_matrix(dist, "dist")
    n = d.shape[0]
    scale = float(np.abs(d).max()) if n else 0.0
    if tol is None:
        tol = TRIANGLE_RTOL * scale
    found = []
    for i, j in zip(*np.nonzero(np.triu(d != d.T, 1))):
        found.append(AsymmetricMatrix(int(i), int(j)))
    for i, j in zip(*np.nonzero((d < 0) | np.diag(np.diag(d) != 0))):
        found.append(NegativeDistance(int(i), int(j)))
    off = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero(np.triu((d == 0) & off, 1))):
        found.append(DuplicatePoint(int(i), int(j)))
    if n >= 3:
        # through[i, j, k] = d[i, k] + d[k, j]
        through = d[:, None, :] + d.T[None, :, :]
        bad = d[:, :, None] > through + tol
        for i, j, k in zip(*np.nonzero(bad)):
            if i < j:
                found.append(TriangleViolation(int(i), int(j), int(k)))
    return found


def validate_space(dist_matrix, basepoint=0):
    """Validate a distance matrix and return the pointed space.

    Raises the first violation found (an :class:`InvalidSpace` subclass);
    its ``violations`` attribute lists all of them.
    """
    d = check_square_matrix(dist_matrix, "dist")
    if d.shape[0] == 0:
        raise InvalidSpace("a metric space needs at least one point")
    basepoint = check_index(basepoint, d.shape[0], "basepoint")
    found = space_violations(d)
    if found:
        first = found[0]
        first.violations = found
        raise first
    d = d.copy()
    d.setflags(write=False)
    return FiniteMetricSpace(d, basepoint)


def ball(space, center, r):
    """Indices of the open ball ``{i : d(center, i) < r}``."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    return np.flatnonzero(space.dist[center] < r)


def radius(space):
    """``min_p max_q d(p, q)``."""
    return float(space.dist.max(axis=1).min())


def diameter(space):
    return space.diameter


# -- generators --------------------------------------------------------------


def circle_distances(n, circumference=2 * np.pi):
    """Arc-length distance matrix of ``n`` equally spaced points on a circle."""
    k = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    steps = np.minimum(k, n - k)
    return circumference * steps / n


def circle_space(n, circumference=2 * np.pi, basepoint=0):
    return validate_space(circle_distances(n, circumference), basepoint)


def euclidean_space(points, basepoint=0):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    diff = pts[:, None, :] - pts[None, :, :]
    return validate_space(np.sqrt((diff**2).sum(-1)), basepoint)


def random_space(n, rng, dim=2, basepoint=0):
    """Random points in the unit cube with the Euclidean metric."""
    return euclidean_space(rng.random((n, dim)), basepoint)


# -- plain Gromov-Hausdorff oracle -------------------------------------------


def _distortion_feasible(dx, dy, t):
    """Is there a correspondence with distortion <= t?

    A correspondence is a set of pairwise compatible pairs covering both
    sides.  Backtracking keeps the matrix of pairs compatible with every
    chosen pair and always branches on the uncovered point with the fewest
    compatible partners.
    """
    n, m = dx.shape[0], dy.shape[0]

    def extend(compat, cov_x, cov_y):
        if cov_x.all() and cov_y.all():
            return True
        row_counts = np.where(cov_x, n * m + 1, compat.sum(axis=1))
        col_counts = np.where(cov_y, n * m + 1, compat.sum(axis=0))
        if row_counts.min() == 0 or col_counts.min() == 0:
            return False
        if row_counts.min() <= col_counts.min():
            x = int(row_counts.argmin())
            options = [(x, int(y)) for y in np.flatnonzero(compat[x])]
        else:
            y = int(col_counts.argmin())
            options = [(int(x), y) for x in np.flatnonzero(compat[:, y])]
        for a, b in options:
            nxt = compat & (np.abs(dx[:, a][:, None] - dy[b][None, :]) <= t)
            cx, cy = cov_x.copy(), cov_y.copy()
            cx[a] = cy[b] = True
            if extend(nxt, cx, cy):
                return True
        return False

    compat = np.ones((n, m), dtype=bool)
    return extend(compat, np.zeros(n, dtype=bool), np.zeros(m, dtype=bool))


def gh_distance_bruteforce(X, Y, max_points=None):
    """Half the minimal distortion over all correspondences between X and Y.

    Exact: the distortion of any correspondence is one of the finitely many
    values ``|d_X(a, a') - d_Y(b, b')|``, and feasibility at a threshold is
    monotone, so bisection over those values with an exhaustive feasibility
    test finds the optimum.
    """
    limit = max_points if max_points is not None else search_bound(DEFAULT_GH_BOUND)
    if X.n + Y.n > limit:
        raise InstanceTooLarge(f"|X| + |Y| = {X.n + Y.n} exceeds the guard {limit}")
    candidates = np.unique(np.abs(X.dist.ravel()[:, None] - Y.dist.ravel()[None, :]))
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _distortion_feasible(X.dist, Y.dist, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return 0.5 * float(candidates[lo])


def are_isometric(X, Y, tol=0.0):
    """Exhaustive check for a distance-preserving bijection (small spaces only)."""
    if X.n != Y.n:
        return False
    if not np.allclose(np.sort(X.dist, axis=None), np.sort(Y.dist, axis=None), atol=tol, rtol=0):
        return False
    for perm in permutations(range(Y.n)):
        p = np.asarray(perm)
        if np.all(np.abs(Y.dist[np.ix_(p, p)] - X.dist) <= tol):
            return True
    return False
