"""Finite groups as Cayley tables and their isometric actions on finite spaces.

Element 0 is always the identity.  Permutations compose as functions:
``(perm[g] o perm[h])[x] = perm[g][perm[h][x]]``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InstanceTooLarge,
    InvalidAction,
    InvalidGroup,
    NoIdentity,
    NoInverse,
    NotAssociative,
    NotASubgroup,
    NotEffective,
    NotHomomorphic,
    NotIsometric,
    QuotientNotMetric,
    InvalidSpace,
)
from .metric import validate_space
from .validation import search_bound

ISOMETRY_RTOL = 1e-12
DEFAULT_ISOMETRY_BOUND = 64
DEFAULT_ORDER_CAP = 5000


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    cayley: np.ndarray
    inverse: np.ndarray

    identity = 0

    @property
    def order(self):
        return self.cayley.shape[0]

    def mul(self, a, b):
        return int(self.cayley[a, b])

    def inv(self, a):
        return int(self.inverse[a])

    def element_order(self, g):
        k, x = 1, g
        while x != 0:
            x = self.cayley[x, g]
            k += 1
        return k

    def exponent(self):
        return int(np.lcm.reduce([self.element_order(g) for g in range(self.order)]))

    def generated(self, gens):
        """Subgroup generated by ``gens`` as a sorted index array."""
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for g in frontier:
                for s in gens:
                    h = int(self.cayley[g, s])
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        return np.array(sorted(seen))

    def generators(self):
        """Greedy generating set: scan indices, keep each element not yet generated."""
        gens, span = [], {0}
        for g in range(1, self.order):
            if g not in span:
                gens.append(g)
                span = set(self.generated(gens).tolist())
                if len(span) == self.order:
                    break
        return gens

    def is_subgroup(self, elements):
        s = set(int(e) for e in elements)
        if 0 not in s:
            return False
        return all(int(self.cayley[a, self.inverse[b]]) in s for a in s for b in s)

    def is_abelian(self):
        return bool(np.array_equal(self.cayley, self.cayley.T))

    def to_dict(self):
        return {"order": self.order, "cayley": self.cayley.tolist()}

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"


def group_violations(cayley):
    c = np.asarray(cayley)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
        raise InvalidGroup(f"cayley table must be square and nonempty, got shape {c.shape}")
    n = c.shape[0]
    if not np.issubdtype(c.dtype, np.integer):
        if not np.all(c == np.round(c)):
            raise InvalidGroup("cayley table entries must be integers")
        c = c.astype(int)
    if c.min() < 0 or c.max() >= n:
        raise InvalidGroup("cayley table entries must lie in [0, order)")
    found = []
    idx = np.arange(n)
    if not (np.array_equal(c[0], idx) and np.array_equal(c[:, 0], idx)):
        found.append(NoIdentity())
    for g in range(n):
        right = np.flatnonzero(c[g] == 0)
        if not any(c[h, g] == 0 for h in right):
            found.append(NoInverse(g))
    for a in range(n):
        # row b, column c: (ab)c against a(bc)
        bad = np.argwhere(c[c[a]] != c[a][c])
        if len(bad):
            found.append(NotAssociative(a, int(bad[0][0]), int(bad[0][1])))
            break
    return found


def validate_group(cayley):
    found = group_violations(cayley)
    if found:
        first = found[0]
        first.violations = found
        raise first
    c = np.asarray(cayley).astype(int)
    inverse = np.argmax(c == 0, axis=1)
    c.setflags(write=False)
    inverse.setflags(write=False)
    return FiniteGroup(c, inverse)


def cyclic_group(n):
    idx = np.arange(n)
    return validate_group((idx[:, None] + idx[None, :]) % n)


def group_from_permutations(perms):
    """Group table of a set of permutations closed under composition.

    ``perms[0]`` must be the identity permutation.
    """
    perms = [tuple(int(v) for v in p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    if len(index) != len(perms):
        raise InvalidGroup("duplicate permutations")
    table = np.empty((len(perms), len(perms)), dtype=int)
    arr = np.asarray(perms)
    for g in range(len(perms)):
        composed = arr[g][arr]  # row h: perm[g][perm[h][x]]
        for h in range(len(perms)):
            key = tuple(composed[h].tolist())
            if key not in index:
                raise InvalidGroup("permutations are not closed under composition")
            table[g, h] = index[key]
    return validate_group(table)


def dihedral_group(n):
    """Dihedral group of order 2n as symmetries of an n-gon (rotations first).

    Element ``k < n`` is ``x -> x + k`` and ``n + k`` is ``x -> k - x``; the
    table is built from the composition rules so ``n = 1, 2`` work too.
    """
    if n < 1:
        raise ValueError("n must be positive")
    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    table = np.empty((2 * n, 2 * n), dtype=int)
    table[:n, :n] = (a + b) % n
    table[:n, n:] = n + (a + b) % n
    table[n:, :n] = n + (a - b) % n
    table[n:, n:] = (a - b) % n
    return validate_group(table)


def find_isomorphism(G, H):
    """An isomorphism ``G -> H`` as an index array, or None.

    Backtracks over images of the greedy generators of G, matching element
    orders, and extends along the Cayley graph.
    """
    if G.order != H.order:
        return None
    gens = G.generators()
    h_orders = np.array([H.element_order(h) for h in range(H.order)])

    def extend(images):
        m = np.full(G.order, -1)
        m[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for g in frontier:
                for s, t in zip(gens, images):
                    gs, ht = int(G.cayley[g, s]), int(H.cayley[m[g], t])
                    if m[gs] < 0:
                        m[gs] = ht
                        nxt.append(gs)
                    elif m[gs] != ht:
                        return None
            frontier = nxt
        if len(set(m.tolist())) != H.order:
            return None
        return m

    def search(i, images):
        if i == len(gens):
            return extend(images)
        want = G.element_order(gens[i])
        for t in np.flatnonzero(h_orders == want):
            found = search(i + 1, images + [int(t)])
            if found is not None:
                return found
        return None

    return search(0, [])


# -- actions -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupAction:
    group: FiniteGroup
    space: object
    perm: np.ndarray

    def act(self, g, x):
        return int(self.perm[g, x])

    def displacement(self, g):
        p = self.space.basepoint
        return float(self.space.dist[p, self.perm[g, p]])

    def to_dict(self):
        return {
            "group": self.group.to_dict(),
            "space": self.space.to_dict(),
            "perm": self.perm.tolist(),
        }

    def __repr__(self):
        return f"GroupAction(order={self.group.order}, n={self.space.n})"


def action_violations(group, space, perm):
    p = np.asarray(perm)
    if p.shape != (group.order, space.n):
        raise InvalidAction(f"perm must have shape {(group.order, space.n)}, got {p.shape}")
    p = p.astype(int)
    ident = np.arange(space.n)
    for g in range(group.order):
        if not np.array_equal(np.sort(p[g]), ident):
            raise InvalidAction(f"perm[{g}] is not a permutation")
    found = []
    d = space.dist
    tol = ISOMETRY_RTOL * (float(d.max()) if d.size else 0.0)
    for g in range(group.order):
        moved = d[np.ix_(p[g], p[g])]
        bad = np.argwhere(np.abs(moved - d) > tol)
        if len(bad):
            i, j = bad[0]
            found.append(NotIsometric(g, int(i), int(j)))
    for g in range(group.order):
        composed = p[g][p]  # row h is perm[g] o perm[h]
        rows = np.flatnonzero(np.any(composed != p[group.cayley[g]], axis=1))
        if len(rows):
            found.append(NotHomomorphic(g, int(rows[0])))
    for g in range(1, group.order):
        if np.array_equal(p[g], ident):
            found.append(NotEffective(g))
    return found


def validate_action(group, space, perm):
    found = action_violations(group, space, perm)
    if found:
        first = found[0]
        first.violations = found
        raise first
    p = np.asarray(perm).astype(int)
    p.setflags(write=False)
    return GroupAction(group, space, p)


def trivial_action(space):
    return validate_action(cyclic_group(1), space, [np.arange(space.n)])


def isometry_group(space, max_points=None, max_order=DEFAULT_ORDER_CAP):
    """Full automorphism group of the distance matrix, as an action.

    Backtracking assigns images point by point; a point may only go to a
    point with the same sorted distance row, and every new assignment must
    preserve distances to the points already placed.  Elements are ordered
    lexicographically by permutation, so the identity is element 0.
    """
    limit = max_points if max_points is not None else search_bound(DEFAULT_ISOMETRY_BOUND)
    n = space.n
    if n > limit:
        raise InstanceTooLarge(f"space has {n} points, guard is {limit}")
    d = space.dist
    tol = ISOMETRY_RTOL * float(d.max()) if n > 1 else 0.0
    rows = np.sort(d, axis=1)
    profile_ok = np.all(np.abs(rows[:, None, :] - rows[None, :, :]) <= tol, axis=2)

    found = []
    image = np.full(n, -1)
    used = np.zeros(n, dtype=bool)

    def extend(i):
        if i == n:
            found.append(tuple(image.tolist()))
            if len(found) > max_order:
                raise InstanceTooLarge(f"isometry group exceeds {max_order} elements")
            return
        cand = profile_ok[i] & ~used
        if i:
            placed = image[:i]
            ok = np.all(np.abs(d[np.ix_(placed, np.arange(n))] - d[:i, i][:, None]) <= tol, axis=0)
            cand &= ok
        for j in np.flatnonzero(cand):
            image[i] = j
            used[j] = True
            extend(i + 1)
            used[j] = False
        image[i] = -1

    extend(0)
    found.sort()
    group = group_from_permutations(found)
    return validate_action(group, space, np.asarray(found))


def gamma_r(action, r):
    """Sorted element indices moving the basepoint by less than ``r``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    p = action.space.basepoint
    return np.flatnonzero(action.space.dist[p, action.perm[:, p]] < r)


def orbits(action):
    """Orbits as sorted tuples, ordered by smallest member."""
    seen, result = set(), []
    for x in range(action.space.n):
        if x not in seen:
            orb = tuple(sorted(set(action.perm[:, x].tolist())))
            seen.update(orb)
            result.append(orb)
    return result


def orbit_space(action):
    """Quotient by the action with ``d(O1, O2) = min d(x, y)`` over representatives."""
    orbs = orbits(action)
    d = action.space.dist
    k = len(orbs)
    q = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            q[a, b] = q[b, a] = d[np.ix_(orbs[a], orbs[b])].min()
    base = next(i for i, o in enumerate(orbs) if action.space.basepoint in o)
    try:
        return validate_space(q, base)
    except InvalidSpace as exc:
        raise QuotientNotMetric(str(exc)) from exc


def subgroup_action(action, elements):
    """Restrict ``action`` to a subgroup given by element indices."""
    elements = sorted(int(e) for e in elements)
    G = action.group
    if not G.is_subgroup(elements):
        raise NotASubgroup(f"{elements} is not closed under the group law")
    H = restrict_group(G, elements)
    return validate_action(H, action.space, action.perm[elements])


def restrict_group(G, elements):
    elements = sorted(int(e) for e in elements)
    pos = {e: i for i, e in enumerate(elements)}
    table = [[pos[int(G.cayley[a, b])] for b in elements] for a in elements]
    return validate_group(table)
