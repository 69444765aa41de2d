"""Almost homomorphisms out of finite groups: defect, snapping to an exact
homomorphism, kernels and orbit collapse.

Targets are either a finite group with a distance on its elements
(:class:`FiniteTarget`) or a rotation group SO(n) with the normalized
bi-invariant distance (:class:`RotationTarget`).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DefectTooLarge, NoHomomorphismNearby, NotASubgroup
from .groups import restrict_group
from .lie import angle2, exp_so, geodesic_distance, hat3, log_so, rot2, vee3
from .validation import check_rotations, check_square_matrix

GKR_CONSTANT = 1.36
DEFAULT_Q_MAX = 0.1
ROTATION_ATOL = 1e-9
TIE_ATOL = 1e-12


# -- targets -----------------------------------------------------------------


class FiniteTarget:
    """A finite group with a distance matrix on its elements."""

    def __init__(self, group, dist):
        self.group = group
        d = check_square_matrix(dist, "dist")
        if d.shape[0] != group.order:
            raise ValueError("dist must have one row per group element")
        self.dist = d

    @property
    def identity(self):
        return 0

    def mul(self, a, b):
        return int(self.group.cayley[a, b])

    def inv(self, a):
        return int(self.group.inverse[a])

    def distance(self, a, b):
        return float(self.dist[a, b])

    def same(self, a, b):
        return a == b

    def is_identity(self, a):
        return a == 0

    def key(self, a):
        return (int(a),)

    def generator_candidates(self, order, hint):
        G = self.group
        return [t for t in range(G.order) if order % G.element_order(t) == 0]

    def encode(self, a):
        return int(a)

    def coerce(self, images):
        return [int(v) for v in images]


class RotationTarget:
    """SO(n) with the normalized bi-invariant distance."""

    def __init__(self, n):
        if n not in (2, 3):
            raise ValueError("rotation targets are SO(2) or SO(3)")
        self.n = n

    @property
    def identity(self):
        return np.eye(self.n)

    def mul(self, a, b):
        return a @ b

    def inv(self, a):
        return a.T

    def distance(self, a, b):
        return geodesic_distance(a, b)

    def same(self, a, b):
        return float(np.abs(a - b).max()) <= ROTATION_ATOL

    def is_identity(self, a):
        return self.same(a, np.eye(self.n))

    def key(self, a):
        if self.n == 2:
            return (round(angle2(a) % (2 * math.pi), 12),)
        return tuple(np.round(vee3(log_so(a)), 12).tolist())

    def generator_candidates(self, order, hint):
        """Rotations of order dividing ``order``.

        SO(2) gets all of them.  In SO(3) the axis is taken from the input
        image ``hint`` (the rotation the generator is sent to), so only
        candidates about that axis are listed.
        """
        if self.n == 2:
            return [rot2(2 * math.pi * j / order) for j in range(order)]
        v = vee3(log_so(hint))
        norm = float(np.linalg.norm(v))
        axis = v / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
        return [exp_so(hat3(axis * (2 * math.pi * j / order))) for j in range(order)]

    def encode(self, a):
        return {"n": self.n, "matrix": np.asarray(a).tolist()}

    def coerce(self, images):
        return list(check_rotations(images))


# -- homomorphisms -----------------------------------------------------------


@dataclass
class Homomorphism:
    source: object
    target: object
    images: list

    def __post_init__(self):
        if len(self.images) != self.source.order:
            raise ValueError("one image per source element is required")

    def __call__(self, g):
        return self.images[g]

    def law_violation(self):
        """First pair ``(g, h)`` with ``phi(gh) != phi(g) phi(h)``, or None."""
        S, T = self.source, self.target
        for g in range(S.order):
            for h in range(S.order):
                if not T.same(self.images[S.mul(g, h)], T.mul(self.images[g], self.images[h])):
                    return (g, h)
        return None

    def is_exact(self):
        return self.law_violation() is None

    def image_size(self):
        return len({self.target.key(a) for a in self.images})

    def to_dict(self):
        return {
            "source_order": self.source.order,
            "images": [self.target.encode(a) for a in self.images],
        }


@dataclass
class DefectReport:
    q: float
    witness: tuple | None

    def to_dict(self):
        return {"q": self.q, "witness": None if self.witness is None else list(self.witness)}


def homomorphism_defect(images, source, target):
    """``q = max_{g,h} d(psi(gh) psi(h)^-1, psi(g))`` with a witness pair."""
    images = target.coerce(images)
    q, wit = 0.0, None
    for g in range(source.order):
        for h in range(source.order):
            lhs = target.mul(images[source.mul(g, h)], target.inv(images[h]))
            d = target.distance(lhs, images[g])
            if d > q:
                q, wit = d, (g, h)
    return DefectReport(q, wit)


def displacement(images, hom_images, target):
    gaps = [target.distance(a, b) for a, b in zip(images, hom_images)]
    return max(gaps), sum(gaps)


def _extend(source, target, gens, gen_images):
    """The homomorphism with the given generator images, or None if inconsistent."""
    out = [None] * source.order
    out[0] = target.identity
    frontier = [0]
    while frontier:
        nxt = []
        for g in frontier:
            for s, t in zip(gens, gen_images):
                gs = source.mul(g, s)
                val = target.mul(out[g], t)
                if out[gs] is None:
                    out[gs] = val
                    nxt.append(gs)
                elif not target.same(out[gs], val):
                    return None
        frontier = nxt
    # every edge (g, g s) was checked, which forces phi(gh) = phi(g) phi(h)
    return Homomorphism(source, target, out)


def enumerate_homomorphisms(source, target, hints=None):
    """All homomorphisms reachable from generator images of compatible order."""
    gens = source.generators()
    pools = [
        target.generator_candidates(source.element_order(s), None if hints is None else hints[s])
        for s in gens
    ]
    for combo in itertools.product(*pools):
        hom = _extend(source, target, gens, list(combo))
        if hom is not None:
            yield gens, list(combo), hom


@dataclass
class SnapResult:
    hom: Homomorphism
    displacement: float
    q: float
    candidates: int

    @property
    def bound(self):
        return GKR_CONSTANT * self.q

    @property
    def bound_check(self):
        return self.displacement <= self.bound + TIE_ATOL

    def to_dict(self):
        return {
            "hom": self.hom.to_dict(),
            "displacement": self.displacement,
            "q": self.q,
            "bound": self.bound,
            "bound_check": self.bound_check,
            "candidates": self.candidates,
        }


def snap_to_homomorphism(images, source, target, q_max=DEFAULT_Q_MAX):
    """The exact homomorphism nearest to ``images`` in the uniform distance.

    Ties on maximal displacement go to the smaller total displacement, then
    to the lexicographically smaller generator images.  Raises
    :class:`DefectTooLarge` when ``q > q_max`` and
    :class:`NoHomomorphismNearby` when the winner is farther than ``1.36 q``.
    """
    images = target.coerce(images)
    q = homomorphism_defect(images, source, target).q
    if q > q_max:
        raise DefectTooLarge(f"defect q = {q:.6g} exceeds q_max = {q_max}")
    best, best_key, count = None, None, 0
    for gens, gen_images, hom in enumerate_homomorphisms(source, target, images):
        count += 1
        worst, total = displacement(images, hom.images, target)
        key = (worst, total, tuple(target.key(t) for t in gen_images))
        if best_key is None or _less(key, best_key):
            best, best_key = hom, key
    if best is None or best_key[0] > GKR_CONSTANT * q + TIE_ATOL:
        found = "none" if best is None else f"{best_key[0]:.6g}"
        raise NoHomomorphismNearby(f"nearest homomorphism at {found}, bound 1.36 q = {GKR_CONSTANT * q:.6g}")
    if not best.is_exact():
        raise AssertionError("snapped map failed the homomorphism law")
    return SnapResult(best, best_key[0], q, count)


def _less(a, b):
    if abs(a[0] - b[0]) > TIE_ATOL:
        return a[0] < b[0]
    if abs(a[1] - b[1]) > TIE_ATOL:
        return a[1] < b[1]
    return a[2] < b[2]


# -- kernels -----------------------------------------------------------------


@dataclass
class Kernel:
    group: object
    elements: tuple

    @property
    def order(self):
        return len(self.elements)


def kernel(hom):
    """Elements sent to the identity, as a validated group with its inclusion."""
    S, T = hom.source, hom.target
    elems = tuple(g for g in range(S.order) if T.is_identity(hom.images[g]))
    if not S.is_subgroup(elems):
        raise NotASubgroup("kernel is not closed; the map is not a homomorphism")
    for g in range(S.order):
        for h in elems:
            if S.mul(S.mul(g, h), S.inv(g)) not in elems:
                raise NotASubgroup("kernel is not normal; the map is not a homomorphism")
    return Kernel(restrict_group(S, elems), elems)


def kernel_orbit_diameter(action, subgroup):
    """Largest diameter of an orbit of ``subgroup`` acting on the space."""
    elems = sorted(int(e) for e in subgroup)
    if not action.group.is_subgroup(elems):
        raise NotASubgroup(f"{elems} is not a subgroup")
    d = action.space.dist
    orbits = action.perm[elems].T  # row x: orbit of x
    return float(max(d[np.ix_(o, o)].max() for o in orbits))


@dataclass
class MonomorphismReport:
    injective: bool
    source_order: int
    image_order: int
    kernel_order: int
    target_order: int | None

    @property
    def divides(self):
        if self.target_order is None:
            return None
        return self.target_order % self.image_order == 0

    def to_dict(self):
        return {
            "injective": self.injective,
            "source_order": self.source_order,
            "image_order": self.image_order,
            "kernel_order": self.kernel_order,
            "target_order": self.target_order,
            "image_divides_target": self.divides,
        }


def check_monomorphism(hom):
    ker = kernel(hom)
    target_order = hom.target.group.order if isinstance(hom.target, FiniteTarget) else None
    return MonomorphismReport(
        injective=ker.order == 1,
        source_order=hom.source.order,
        image_order=hom.image_size(),
        kernel_order=ker.order,
        target_order=target_order,
    )
