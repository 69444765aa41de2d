"""Geometry a finite group inherits from its action.

The action seminorm of ``g`` at radius ``R`` is the largest displacement
``d(x, g x)`` over points with both ``x`` and ``g x`` in the open ball
``B(p, R)``; the maximum over an empty set is 0.  The action pseudometric
is ``d_R(g, h) = |g h^-1|_R`` (right-invariant), or ``|g^-1 h|_R`` with
``left=True``.
"""

from dataclasses import dataclass

import numpy as np

from .metric import ball
from .validation import check_positive

REGIME_RTOL = 1e-12


@dataclass(frozen=True)
class SeminormTable:
    action: object
    R: float
    values: np.ndarray

    def __getitem__(self, g):
        return float(self.values[g])


@dataclass(frozen=True)
class Net:
    space: object
    mu: float
    members: tuple

    def __len__(self):
        return len(self.members)


@dataclass
class RegimeReport:
    R: float
    separates: bool
    separation_witnesses: tuple
    triangle: bool
    triangle_witness: tuple | None
    submultiplicative_witness: tuple | None
    subadditive_witness: tuple | None

    def to_dict(self):
        return {
            "R": self.R,
            "separates": self.separates,
            "separation_witnesses": list(self.separation_witnesses),
            "triangle": self.triangle,
            "triangle_witness": self.triangle_witness,
            "submultiplicative_witness": self.submultiplicative_witness,
            "subadditive_witness": self.subadditive_witness,
        }


def _ball_mask(action, R):
    space = action.space
    mask = np.zeros(space.n, dtype=bool)
    mask[ball(space, space.basepoint, R)] = True
    return mask


def action_seminorm(action, g, R):
    R = check_positive(R, "R")
    inside = _ball_mask(action, R)
    moved = action.perm[g]
    both = inside & inside[moved]
    if not both.any():
        return 0.0
    xs = np.flatnonzero(both)
    return float(action.space.dist[xs, moved[xs]].max())


def seminorm_table(action, R):
    """All seminorms at radius ``R`` at once."""
    R = check_positive(R, "R")
    inside = _ball_mask(action, R)
    perm = action.perm
    both = inside[None, :] & inside[perm]
    disp = action.space.dist[np.arange(action.space.n)[None, :], perm]
    values = np.where(both, disp, 0.0).max(axis=1)
    return SeminormTable(action, R, values)


def action_pseudometric(action, g, h, R, left=False):
    G = action.group
    if left:
        return action_seminorm(action, G.mul(G.inv(g), h), R)
    return action_seminorm(action, G.mul(g, G.inv(h)), R)


def pseudometric_matrix(action, R, left=False):
    """``D[g, h] = d_R(g, h)`` for every pair of elements."""
    G = action.group
    values = seminorm_table(action, R).values
    idx = np.arange(G.order)
    if left:
        return values[G.cayley[G.inverse[:, None], idx[None, :]]]
    return values[G.cayley[idx[:, None], G.inverse[None, :]]]


def metric_regime(action, R, left=False):
    """Which metric properties ``d_R`` has at radius ``R``, with witnesses.

    Reports separation (with every non-identity element of zero norm as
    witnesses), the triangle inequality, and counterexamples (if
    any) to both ``|gh| <= |g| |h|`` and ``|gh| <= |g| + |h|``; neither of
    the last two is claimed to hold.
    """
    G = action.group
    table = seminorm_table(action, R).values
    D = pseudometric_matrix(action, R, left)
    scale = max(float(action.space.dist.max()), 1.0)
    tol = REGIME_RTOL * scale

    sep_wit = tuple(int(g) + 1 for g in np.flatnonzero(table[1:] == 0))

    tri_wit = None
    # D[a, c] against D[a, b] + D[b, c]
    for a in range(G.order):
        bad = np.argwhere(D[a][None, :] > D[a][:, None] + D + tol)
        if len(bad):
            b, c = bad[0]
            tri_wit = (a, int(b), int(c))
            break

    prod = table[G.cayley]
    mult = np.argwhere(prod > table[:, None] * table[None, :] + tol)
    add = np.argwhere(prod > table[:, None] + table[None, :] + tol)
    return RegimeReport(
        R=float(R),
        separates=not sep_wit,
        separation_witnesses=sep_wit,
        triangle=tri_wit is None,
        triangle_witness=tri_wit,
        submultiplicative_witness=tuple(int(v) for v in mult[0]) if len(mult) else None,
        subadditive_witness=tuple(int(v) for v in add[0]) if len(add) else None,
    )


def minimal_net(space, mu):
    """Greedy maximal ``mu``-separated set, scanning points in index order.

    A maximal separated set covers: any point at distance ``>= mu`` from
    every member would have been admitted.
    """
    mu = check_positive(mu, "mu")
    members = []
    for x in range(space.n):
        if not members or space.dist[x, members].min() >= mu:
            members.append(x)
    return Net(space, mu, tuple(members))


def is_net(space, members, mu):
    """Covering (``< mu``) and separation (``>= mu``) checks."""
    members = list(members)
    d = space.dist
    covers = bool(np.all(d[:, members].min(axis=1) < mu))
    sub = d[np.ix_(members, members)]
    off = ~np.eye(len(members), dtype=bool)
    separated = bool(np.all(sub[off] >= mu))
    return covers and separated


def covering_multiplicity(space, net):
    """Largest number of net balls meeting a single ball of the same radius.

    Balls are open and intersect when some sample point lies in both.
    """
    d = space.dist
    inside = d < net.mu  # inside[x, z]: z in B(x, mu)
    member_balls = inside[list(net.members)]  # (k, n)
    # meets[x, j]: B(x, mu) and B(member_j, mu) share a point
    meets = (inside.astype(np.int64) @ member_balls.T.astype(np.int64)) > 0
    return int(meets.sum(axis=1).max())
