"""Equivariant pointed Gromov-Hausdorff approximations between finite actions.

An approximation triple from ``(X, p, G)`` to ``(Y, q, L)`` at scale ``eps``
consists of ``f`` on the open ball ``B(p, 1/eps)``, ``phi: G(1/eps) ->
L(1/eps)`` and ``psi: L(1/eps) -> G(1/eps)``.  It passes when

1. ``f(p) = q``;
2. every point of ``B(q, 1/eps)`` is within ``eps`` of ``f(B(p, 1/eps))``;
3. ``f`` distorts distances on the ball by less than ``eps``;
4. ``d(f(g x), phi(g) f(x)) < eps`` whenever ``x, g x`` lie in the ball;
5. ``d(f(psi(l) x), l f(x)) < eps`` whenever ``x, psi(l) x`` lie in the ball.

All inequalities are strict.  Condition 2 is read with the image of the ball
under ``f``; the reports say so.

The search walks an ascending finite grid of scales on which every condition
can change truth value, so the smallest passing grid value is an upper bound
on the infimum that is tight to one grid gap.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InstanceTooLarge, MalformedTriple, NoApproximationBelow
from .groups import gamma_r
from .metric import ball
from .validation import check_positive, search_bound

CONDITION_2_READING = "eps-neighbourhood of f(B(p, 1/eps)) must contain B(q, 1/eps)"
GRID_MERGE_RTOL = 1e-12


@dataclass
class ApproximationTriple:
    """The data ``(f, phi, psi)`` at scale ``epsilon``.

    ``radius`` fixes the domain radius instead of ``1/epsilon``; ``math.inf``
    gives the whole-space regime used when extracting group maps.  ``phi`` or
    ``psi`` set to None means that condition was not part of the search.
    """

    f: dict
    phi: dict | None
    psi: dict | None
    epsilon: float
    radius: float | None = None

    @property
    def domain_radius(self):
        return 1.0 / self.epsilon if self.radius is None else self.radius

    def sort_key(self):
        return (
            tuple(sorted(self.f.items())),
            tuple(sorted(self.phi.items())) if self.phi is not None else (),
            tuple(sorted(self.psi.items())) if self.psi is not None else (),
        )

    def to_dict(self):
        def enc(m):
            return None if m is None else [[int(k), int(v)] for k, v in sorted(m.items())]

        return {
            "epsilon": self.epsilon,
            "radius": None if self.radius is None else _enc_float(self.radius),
            "f": enc(self.f),
            "phi": enc(self.phi),
            "psi": enc(self.psi),
        }

    @classmethod
    def from_dict(cls, data):
        def dec(m):
            return None if m is None else {int(k): int(v) for k, v in m}

        radius = data.get("radius")
        return cls(
            f=dec(data["f"]),
            phi=dec(data["phi"]),
            psi=dec(data["psi"]),
            epsilon=float(data["epsilon"]),
            radius=None if radius is None else float(radius),
        )


def _enc_float(x):
    return "inf" if np.isinf(x) else float(x)


@dataclass
class ConditionResult:
    passed: bool
    value: float = 0.0
    witness: tuple | None = None
    skipped: bool = False


@dataclass
class CertificateReport:
    epsilon: float
    conditions: dict = field(default_factory=dict)
    condition_2_reading: str = CONDITION_2_READING

    @property
    def verdict(self):
        return all(c.passed for c in self.conditions.values() if not c.skipped)

    @property
    def worst_slack(self):
        """``min(eps - value)`` over checked conditions; negative on failure."""
        return min(
            (self.epsilon - c.value for c in self.conditions.values() if not c.skipped),
            default=self.epsilon,
        )

    def failed(self):
        return sorted(k for k, c in self.conditions.items() if not c.skipped and not c.passed)

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "verdict": self.verdict,
            "worst_slack": self.worst_slack,
            "condition_2_reading": self.condition_2_reading,
            "conditions": {
                str(k): {
                    "passed": c.passed,
                    "skipped": c.skipped,
                    "value": c.value,
                    "witness": None if c.witness is None else [int(w) for w in c.witness],
                }
                for k, c in sorted(self.conditions.items())
            },
        }


# -- verification ------------------------------------------------------------


def _check_domains(src, dst, triple):
    r = triple.domain_radius
    X, Y = src.space, dst.space
    bx = set(ball(X, X.basepoint, r).tolist())
    if set(triple.f) != bx:
        raise MalformedTriple(f"f must be defined exactly on B(p, {r}) = {sorted(bx)}")
    if any(not 0 <= v < Y.n for v in triple.f.values()):
        raise MalformedTriple("f takes values outside the target space")
    g_r = set(gamma_r(src, r).tolist())
    l_r = set(gamma_r(dst, r).tolist())
    if triple.phi is not None:
        if set(triple.phi) != g_r or not set(triple.phi.values()) <= l_r:
            raise MalformedTriple("phi must map Gamma(r) into Lambda(r)")
    if triple.psi is not None:
        if set(triple.psi) != l_r or not set(triple.psi.values()) <= g_r:
            raise MalformedTriple("psi must map Lambda(r) into Gamma(r)")
    return sorted(bx), sorted(g_r), sorted(l_r)


def verify_approximation(src, dst, triple):
    """Exhaustively evaluate the five conditions for ``triple``."""
    eps = check_positive(triple.epsilon, "epsilon")
    bx, _, _ = _check_domains(src, dst, triple)
    X, Y = src.space, dst.space
    dx, dy = X.dist, Y.dist
    f = triple.f
    r = triple.domain_radius
    report = CertificateReport(eps)

    p, q = X.basepoint, Y.basepoint
    v1 = float(dy[f[p], q])
    report.conditions[1] = ConditionResult(f[p] == q, v1, None if f[p] == q else (p,))

    worst, wit = 0.0, None
    image = sorted(set(f.values()))
    for y in ball(Y, q, r):
        gap = float(dy[y, image].min())
        if gap > worst or wit is None and gap >= eps:
            worst, wit = gap, (int(y),)
    report.conditions[2] = ConditionResult(worst < eps, worst, wit if worst >= eps else None)

    worst, wit = 0.0, None
    for i, x in enumerate(bx):
        for x2 in bx[i + 1 :]:
            gap = abs(float(dx[x, x2]) - float(dy[f[x], f[x2]]))
            if gap > worst:
                worst, wit = gap, (x, x2)
    report.conditions[3] = ConditionResult(worst < eps, worst, wit if worst >= eps else None)

    in_ball = set(bx)
    for cond, mapping, maps_src in ((4, triple.phi, True), (5, triple.psi, False)):
        if mapping is None:
            report.conditions[cond] = ConditionResult(True, skipped=True)
            continue
        worst, wit = 0.0, None
        for elem, other in sorted(mapping.items()):
            g, lam = (elem, other) if maps_src else (other, elem)
            for x in bx:
                gx = int(src.perm[g, x])
                if gx not in in_ball:
                    continue
                gap = float(dy[f[gx], dst.perm[lam, f[x]]])
                if gap > worst:
                    worst, wit = gap, (elem, x)
        report.conditions[cond] = ConditionResult(worst < eps, worst, wit if worst >= eps else None)
    return report


# -- scale grid --------------------------------------------------------------


def _merge_close(values):
    if len(values) == 0:
        return values
    keep = [values[0]]
    for v in values[1:]:
        if v - keep[-1] > GRID_MERGE_RTOL * max(1.0, abs(v)):
            keep.append(v)
    return np.asarray(keep)


def epsilon_grid(*spaces):
    """Ascending candidate scales for approximations between ``spaces``.

    Thresholds are the distances, their pairwise differences and the
    reciprocals of positive distances; the grid holds the positive
    thresholds, the midpoints between consecutive thresholds (including the
    one above zero) and a sentinel beyond the largest, where a trivial
    triple always passes.
    """
    d = np.unique(np.concatenate([s.dist.ravel() for s in spaces]))
    positive = d[d > 0]
    if len(positive) == 0:
        return np.array([1.0])
    diffs = np.abs(d[:, None] - d[None, :]).ravel()
    values = _merge_close(np.unique(np.concatenate([[0.0], diffs, d, 1.0 / positive])))
    mids = 0.5 * (values[1:] + values[:-1])
    grid = np.concatenate([values[values > 0], mids, [2.0 * values[-1]]])
    return np.unique(grid)


def grid_step(grid, eps):
    """Gap between ``eps`` and its neighbouring grid values (the larger one)."""
    i = int(np.searchsorted(grid, eps))
    lower = grid[i] - grid[i - 1] if i > 0 else grid[0]
    upper = grid[i + 1] - grid[i] if i + 1 < len(grid) else 0.0
    return float(max(lower, upper))


# -- search ------------------------------------------------------------------


def find_triple(src, dst, eps, radius=None, check_phi=True, check_psi=True):
    """Lexicographically least passing triple at scale ``eps``, or None.

    ``f`` is enumerated by depth-first search over ball points ordered by
    distance from the basepoint (basepoint first, ties by index), with
    candidate targets in index order.  Pruning: forward checking of condition
    3 on unassigned points, reachability of uncovered target-ball points for
    condition 2, and a running element-pair feasibility matrix shared by
    conditions 4 and 5.  Given ``f``, ``phi`` and ``psi`` take the smallest
    feasible element for each argument.
    """
    r = 1.0 / eps if radius is None else radius
    X, Y = src.space, dst.space
    dx, dy = X.dist, Y.dist
    p, q = X.basepoint, Y.basepoint
    bx = ball(X, p, r)
    by = ball(Y, q, r)
    order = sorted(bx.tolist(), key=lambda x: (x != p, dx[p, x], x))
    k, m = len(order), Y.n
    pos = {x: t for t, x in enumerate(order)}
    G = gamma_r(src, r)
    L = gamma_r(dst, r)
    track = check_phi or check_psi

    completes = [[] for _ in range(k)]
    for gi, g in enumerate(G):
        for a in order:
            b = int(src.perm[g, a])
            if b in pos:
                completes[max(pos[a], pos[b])].append((gi, a, b))
    completes = [
        (np.array([c[0] for c in cs], dtype=int), np.array([c[1] for c in cs], dtype=int),
         np.array([c[2] for c in cs], dtype=int))
        for cs in completes
    ]
    perm_l = dst.perm[L]  # (|L|, m)
    dxo = dx[np.ix_(order, order)]
    near = dy < eps
    near_by = near[by]  # rows: target-ball points

    f = np.full(X.n, -1)
    dom0 = np.ones((k, m), dtype=bool)
    dom0[0] = False
    dom0[0, q] = True
    ok0 = np.ones((len(G), len(L)), dtype=bool)
    cov0 = np.zeros(len(by), dtype=bool)

    def feasible_cover(dom, cov, t):
        if cov.all():
            return True
        reach = dom[t + 1 :].any(axis=0)
        return bool(near_by[~cov][:, reach].any(axis=1).all())

    def dfs(t, dom, ok, cov):
        if t == k:
            if cov.all():
                result_ok[0] = ok
                return True
            return False
        x = order[t]
        for y in np.flatnonzero(dom[t]):
            f[x] = y
            ndom = dom
            if t + 1 < k:
                ndom = dom.copy()
                ndom[t + 1 :] &= np.abs(dxo[t + 1 :, t][:, None] - dy[y][None, :]) < eps
                if not ndom[t + 1 :].any(axis=1).all():
                    continue
            ncov = cov | near_by[:, y]
            if not feasible_cover(ndom, ncov, t):
                continue
            nok = ok
            gis, as_, bs = completes[t]
            if track and len(gis):
                mask = dy[f[bs][:, None], perm_l[:, f[as_]].T] < eps
                nok = ok.copy()
                np.logical_and.at(nok, gis, mask)
                if check_phi and not nok.any(axis=1).all():
                    continue
                if check_psi and not nok.any(axis=0).all():
                    continue
            if dfs(t + 1, ndom, nok, ncov):
                return True
        f[x] = -1
        return False

    result_ok = [None]
    if not dfs(0, dom0, ok0, cov0):
        return None
    ok = result_ok[0]
    phi = {int(g): int(L[np.argmax(ok[i])]) for i, g in enumerate(G)} if check_phi else None
    psi = {int(lam): int(G[np.argmax(ok[:, j])]) for j, lam in enumerate(L)} if check_psi else None
    return ApproximationTriple(
        f={int(x): int(f[x]) for x in order}, phi=phi, psi=psi, epsilon=float(eps), radius=radius
    )


def _guard(src, dst, max_size):
    limit = max_size if max_size is not None else search_bound()
    sizes = (src.space.n, dst.space.n, src.group.order, dst.group.order)
    if max(sizes) > limit:
        raise InstanceTooLarge(f"instance sizes {sizes} exceed the search guard {limit}")


@dataclass
class SearchResult:
    epsilon: float
    triple: ApproximationTriple
    grid: np.ndarray

    def __iter__(self):
        return iter((self.epsilon, self.triple))


def search_approximation(src, dst, max_size=None, eps_max=None, radius=None,
                         check_phi=True, check_psi=True, grid=None):
    """Smallest grid scale admitting a passing triple from ``src`` to ``dst``."""
    _guard(src, dst, max_size)
    if grid is None:
        grid = epsilon_grid(src.space, dst.space)
    for eps in grid:
        if eps_max is not None and eps > eps_max:
            break
        triple = find_triple(src, dst, eps, radius, check_phi, check_psi)
        if triple is not None:
            return SearchResult(float(eps), triple, grid)
    raise NoApproximationBelow(eps_max if eps_max is not None else float(grid[-1]))


@dataclass
class DistanceResult:
    epsilon: float
    forward: ApproximationTriple
    backward: ApproximationTriple
    grid: np.ndarray

    def __float__(self):
        return self.epsilon


def epgh_estimate(A, B, max_size=None, eps_max=None):
    """Smallest grid scale with passing triples in both directions, with witnesses."""
    _guard(A, B, max_size)
    grid = epsilon_grid(A.space, B.space)
    for eps in grid:
        if eps_max is not None and eps > eps_max:
            break
        fwd = find_triple(A, B, eps)
        if fwd is None:
            continue
        bwd = find_triple(B, A, eps)
        if bwd is not None:
            return DistanceResult(float(eps), fwd, bwd, grid)
    raise NoApproximationBelow(eps_max if eps_max is not None else float(grid[-1]))


def epgh_distance(A, B, max_size=None, eps_max=None):
    return epgh_estimate(A, B, max_size, eps_max).epsilon
