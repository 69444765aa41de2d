"""Bi-invariant geometry on SO(n), Riemannian centers of mass, and the
discrete-to-continuous construction for maps out of finite subgroups.

Distances are the Frobenius norm of the principal logarithm of ``A^T B``,
divided by the diameter ``pi * sqrt(2 * floor(n / 2))`` so that every SO(n)
has diameter 1.  In SO(2) this is ``|theta - phi| / pi`` on the circle.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm
from sklearn.base import BaseEstimator

from .action_geometry import minimal_net
from .exceptions import NetIncompatible, NoConvergence, NoCoverage, PointsTooSpread
from .metric import validate_space
from .validation import check_positive, check_rotation, check_rotations

CUT_LOCUS_TOL = 1e-9


class CutLocusWarning(RuntimeWarning):
    """``A^T B`` has eigenvalue -1: the principal logarithm is not unique."""


# -- so(n) <-> SO(n) ---------------------------------------------------------


def hat3(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def vee3(S):
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def rot2(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def angle2(R):
    return math.atan2(R[1, 0], R[0, 0])


def project_to_so(M):
    """Nearest rotation in Frobenius norm (polar factor with det fixed to +1)."""
    U, _, Vt = np.linalg.svd(M)
    if np.linalg.det(U @ Vt) < 0:
        U[:, -1] = -U[:, -1]
    return U @ Vt


def exp_so(S):
    """Exponential of a skew-symmetric matrix."""
    n = S.shape[0]
    if n == 2:
        return rot2(S[1, 0])
    if n == 3:
        v = vee3(S)
        t = float(np.linalg.norm(v))
        if t < 1e-12:
            return np.eye(3) + S + 0.5 * S @ S
        K = S / t
        return np.eye(3) + math.sin(t) * K + (1.0 - math.cos(t)) * K @ K
    return project_to_so(expm(S))


def log_so(R):
    """Principal logarithm of a rotation, as a skew-symmetric matrix."""
    n = R.shape[0]
    if n == 1:
        return np.zeros((1, 1))
    if n == 2:
        t = angle2(R)
        return np.array([[0.0, -t], [t, 0.0]])
    if n == 3:
        skew = 0.5 * vee3(R - R.T)
        s = float(np.linalg.norm(skew))
        c = 0.5 * (np.trace(R) - 1.0)
        t = math.atan2(s, c)
        if t < 1e-8:
            return hat3(skew * (1.0 + t * t / 6.0))
        if math.pi - t > 1e-6:
            return hat3(skew * (t / s))
        # near pi: axis from the symmetric part
        B = 0.5 * (R + np.eye(3))
        j = int(np.argmax(np.diag(B)))
        axis = B[:, j] / math.sqrt(max(B[j, j], 1e-300))
        if skew @ axis < 0:
            axis = -axis
        return hat3(axis * t)
    L = np.real(logm(R))
    return 0.5 * (L - L.T)


def rotation_angles(R):
    """Rotation angles in [0, pi], one per 2-plane (eigenvalue pair)."""
    n = R.shape[0]
    if n == 2:
        return np.array([abs(angle2(R))])
    if n == 3:
        skew = 0.5 * np.linalg.norm(vee3(R - R.T))
        return np.array([math.atan2(skew, 0.5 * (np.trace(R) - 1.0))])
    ang = np.sort(np.abs(np.angle(np.linalg.eigvals(R))))[::-1]
    # eigenvalue pairs e^{+-i t}; the unpaired remainder is +1
    return ang[: 2 * (n // 2) : 2]


def so_diameter(n):
    return math.pi * math.sqrt(2 * (n // 2)) if n >= 2 else 1.0


def geodesic_distance(A, B, return_flag=False):
    """Normalized bi-invariant distance between two rotations.

    With ``return_flag=True`` returns ``(distance, at_cut_locus)``; the
    distance is well defined at the cut locus even though the logarithm is not.
    """
    n = A.shape[0]
    ang = rotation_angles(A.T @ B)
    d = math.sqrt(2.0 * float(ang @ ang)) / so_diameter(n)
    if return_flag:
        return d, bool(np.any(math.pi - ang < CUT_LOCUS_TOL))
    return d


def pairwise_distances(points):
    k = len(points)
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            D[i, j] = D[j, i] = geodesic_distance(points[i], points[j])
    return D


def so2_angles_distance(theta, phi):
    """Vectorized normalized SO(2) distance between angle arrays."""
    gap = np.mod(np.abs(np.asarray(theta) - np.asarray(phi)), 2 * math.pi)
    return np.minimum(gap, 2 * math.pi - gap) / math.pi


def group_as_space(points):
    """A finite set of rotations as a metric space under the normalized distance."""
    return validate_space(pairwise_distances(points))


# -- center of mass ----------------------------------------------------------


@dataclass(frozen=True)
class ComConfig:
    """Constants of the center-of-mass construction.

    ``r_conv`` is the trust radius, ``R_growth`` the per-point growth factor
    and ``N_max`` the largest number of points averaged at once.  None of
    them is derived from curvature; they are configuration.
    """

    r_conv: float = 0.4
    R_growth: float = 1.0
    N_max: int = 3

    def __post_init__(self):
        check_positive(self.r_conv, "r_conv")
        if self.R_growth < 1:
            raise ValueError("R_growth must be >= 1")
        if self.N_max < 1:
            raise ValueError("N_max must be >= 1")

    @property
    def K(self):
        return growth_sum(self.R_growth, self.N_max)

    @property
    def max_spread(self):
        return self.r_conv / self.K


def growth_sum(R, m):
    """``1 + R + ... + R**m``."""
    return float(sum(R**k for k in range(m + 1)))


def log_direction_sum(x, points, weights):
    """``sum_i w_i log(x^T p_i)``: minus half the gradient of the mean objective."""
    S = np.zeros_like(x)
    for p, w in zip(points, weights):
        S += w * log_so(x.T @ p)
    return S


def mean_objective(x, points, weights):
    """``sum_i w_i d(x, p_i)^2`` in the normalized metric."""
    return float(sum(w * geodesic_distance(x, p) ** 2 for p, w in zip(points, weights)))


@dataclass
class MeanResult:
    mean: np.ndarray
    n_iter: int
    step_norm: float
    spread: float


def karcher_mean(points, weights, cfg=None, tol=1e-12, max_iter=100):
    """Weighted intrinsic mean of nearby rotations.

    Zero-weight points are dropped before anything else, so they cannot
    affect the result.  Iterates ``x <- x exp(sum_i w_i log(x^T p_i))`` from
    the heaviest point until the step norm falls below ``tol``.
    """
    res = karcher_mean_result(points, weights, cfg, tol, max_iter)
    return res.mean


def karcher_mean_result(points, weights, cfg=None, tol=1e-12, max_iter=100):
    cfg = cfg or ComConfig()
    pts = check_rotations(points)
    w = np.asarray(weights, dtype=float).ravel()
    if len(w) != len(pts):
        raise ValueError("one weight per point is required")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative and sum to 1")
    keep = w > 0
    pts, w = pts[keep], w[keep]
    spread = float(pairwise_distances(pts).max()) if len(pts) > 1 else 0.0
    if spread >= cfg.max_spread:
        raise PointsTooSpread(
            f"max pairwise distance {spread:.6g} is not below r_conv / K = {cfg.max_spread:.6g}"
        )
    x = pts[int(np.argmax(w))].copy()
    if len(pts) == 1:
        return MeanResult(x, 0, 0.0, spread)
    step = math.inf
    for it in range(1, max_iter + 1):
        S = log_direction_sum(x, pts, w)
        step = float(np.linalg.norm(S))
        x = project_to_so(x @ exp_so(S))
        if step < tol:
            return MeanResult(x, it, step, spread)
    raise NoConvergence(f"mean iteration did not reach tol={tol} in {max_iter} steps (last {step:.3g})")


class KarcherMean(BaseEstimator):
    """Estimator wrapper: ``fit`` a stack of rotations, read ``mean_``."""

    def __init__(self, config=None, tol=1e-12, max_iter=100):
        self.config = config
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None, sample_weight=None):
        X = check_rotations(X)
        if sample_weight is None:
            sample_weight = np.full(len(X), 1.0 / len(X))
        res = karcher_mean_result(X, sample_weight, self.config, self.tol, self.max_iter)
        self.mean_ = res.mean
        self.n_iter_ = res.n_iter
        self.spread_ = res.spread
        return self


# -- bump partitions ---------------------------------------------------------


def bump(t):
    """``exp(1 - 1/(1 - t^2))`` on ``[0, 1)``, zero beyond; equals 1 at 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = t < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


class BumpPartition:
    """Smooth partition of unity subordinate to the radius-``nu`` balls of a net."""

    def __init__(self, net, nu):
        self.net = check_rotations(net)
        self.nu = check_positive(nu, "nu")
        self._so2 = self.net.shape[1] == 2
        if self._so2:
            self._angles = np.array([angle2(p) for p in self.net])
        D = pairwise_distances(self.net)
        off = ~np.eye(len(self.net), dtype=bool)
        if np.any(D[off] < self.nu):
            raise ValueError("net points must be pairwise at least nu apart")

    def distances(self, g):
        if self._so2:
            return so2_angles_distance(self._angles, angle2(g))
        return np.array([geodesic_distance(g, p) for p in self.net])

    def weights(self, g):
        raw = bump(self.distances(g) / self.nu)
        total = raw.sum()
        if total == 0:
            raise NoCoverage("no net point within nu of the query; refine the net")
        return raw / total

    __call__ = weights


# -- target nets -------------------------------------------------------------


def so2_net(eta):
    """Equally spaced eta-net of SO(2): ``floor(2 / eta)`` rotations from the identity.

    Spacing ``2 / M >= eta`` gives separation; half-spacing ``1 / M < eta``
    gives covering (for ``eta < 1``).
    """
    M = int(math.floor(2.0 / eta))
    if M < 2 or 1.0 / M >= eta:
        raise ValueError(f"eta={eta} too large for an SO(2) net")
    return np.array([rot2(2 * math.pi * j / M) for j in range(M)])


def haar_rotations(n, size, rng):
    """Haar-random rotations via QR of Gaussian matrices."""
    out = np.empty((size, n, n))
    for i in range(size):
        Q, R = np.linalg.qr(rng.standard_normal((n, n)))
        Q = Q @ np.diag(np.sign(np.diag(R)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        out[i] = Q
    return out


def greedy_net(points, eta):
    """Greedy eta-separated subset of a rotation sample, in sample order."""
    members = []
    for i, p in enumerate(points):
        if all(geodesic_distance(p, points[j]) >= eta for j in members):
            members.append(i)
    return points[members]


# -- continuification --------------------------------------------------------


def max_nonzero_coordinates(net, nu, samples):
    """Largest number of net points within ``nu`` of any sample point.

    This is the number of points the center of mass ever averages, the
    quantity ``N_max`` must bound.
    """
    part = BumpPartition(net, nu)
    return int(max(np.count_nonzero(part.distances(g) < nu) for g in samples))


class ContinuifiedMap(BaseEstimator):
    """Continuous map ``G -> SO(n)`` built from a map on a finite subgroup.

    ``fit(source, images)`` takes the finite source group as rotations and
    the value of the discrete map at each.  It builds a minimal ``nu``-net
    ``A`` of the source, a minimal ``eta``-net ``B`` of the target, sends
    each ``a`` in ``A`` to the nearest net point ``alpha(a)`` in ``B`` to
    its image, and checks the two preconditions: ``nu``-close points of ``A``
    have ``3 eta``-close images, and ``3 eta < r_conv / K``.

    ``predict(g)`` evaluates ``g -> bump weights on A -> pushed to B ->
    center of mass``.  At a point of ``A`` this returns ``alpha`` of it
    exactly.
    """

    def __init__(self, nu=0.07, eta=0.043, config=None, target_net=None, target_sample=2000,
                 random_state=0):
        self.nu = nu
        self.eta = eta
        self.config = config
        self.target_net = target_net
        self.target_sample = target_sample
        self.random_state = random_state

    def fit(self, source, images):
        source = check_rotations(source)
        images = check_rotations(images)
        if len(source) != len(images):
            raise ValueError("one image per source element is required")
        cfg = self.config or ComConfig()
        nu = check_positive(self.nu, "nu")
        eta = check_positive(self.eta, "eta")
        if not 3 * eta < cfg.max_spread:
            raise PointsTooSpread(f"3 * eta = {3 * eta:.6g} is not below r_conv / K = {cfg.max_spread:.6g}")

        net_a = minimal_net(group_as_space(source), nu)
        self.net_indices_ = np.array(net_a.members)
        self.source_net_ = source[self.net_indices_]
        self.partition_ = BumpPartition(self.source_net_, nu)

        n = images.shape[1]
        if self.target_net is not None:
            B = check_rotations(self.target_net)
        elif n == 2:
            B = so2_net(eta)
        else:
            rng = np.random.default_rng(self.random_state)
            pool = np.concatenate([images, haar_rotations(n, self.target_sample, rng)])
            B = greedy_net(pool, eta)
        self.target_net_ = B

        alpha = []
        for a in self.net_indices_:
            d = np.array([geodesic_distance(images[a], b) for b in B])
            alpha.append(int(np.argmin(d)))
        self.alpha_ = np.array(alpha)

        DA = pairwise_distances(self.source_net_)
        for i in range(len(alpha)):
            for j in range(i + 1, len(alpha)):
                if DA[i, j] < 2 * nu:
                    gap = geodesic_distance(B[alpha[i]], B[alpha[j]])
                    if not gap < 3 * eta:
                        raise NetIncompatible(
                            f"net points {i}, {j} are {DA[i, j]:.4g} apart but their images "
                            f"are {gap:.4g} >= 3 eta apart"
                        )
        self.config_ = cfg
        self.deviation_bound_ = eta * (3 * cfg.K + 4)
        self.jump_bound_ = 3 * eta * cfg.K
        return self

    def coordinates(self, g):
        """Weights on ``B`` after pushing the bump weights on ``A`` forward by ``alpha``."""
        w = self.partition_.weights(g)
        out = np.zeros(len(self.target_net_))
        np.add.at(out, self.alpha_, w)
        return out

    def evaluate(self, g):
        coords = self.coordinates(check_rotation(g))
        idx = np.flatnonzero(coords)
        if len(idx) == 1:
            return self.target_net_[idx[0]].copy()
        w = coords[idx] / coords[idx].sum()
        return karcher_mean(self.target_net_[idx], w, self.config_)

    def predict(self, X):
        X = check_rotations(X)
        return np.array([self.evaluate(g) for g in X])

    def deviation(self, X, reference):
        """Largest distance between ``predict(X)`` and ``reference(g)`` over ``X``."""
        X = check_rotations(X)
        return max(geodesic_distance(self.evaluate(g), reference(g)) for g in X)


def continuify(source, images, nu, eta, cfg=None, **kwargs):
    return ContinuifiedMap(nu=nu, eta=eta, config=cfg, **kwargs).fit(source, images)


def warn_cut_locus(A, B):
    d, flag = geodesic_distance(A, B, return_flag=True)
    if flag:
        warnings.warn("rotations are antipodal; logarithm not unique", CutLocusWarning, stacklevel=2)
    return d
