"""Exception hierarchy for eqgh.

Validation failures are raised as the first violation found; every such
exception also carries ``violations``, the full list of problems detected.
"""


class EqghError(Exception):
    """Base class for all library errors."""


class InstanceTooLarge(EqghError):
    """An exhaustive search was asked to run beyond its configured size guard."""


# -- metric spaces -----------------------------------------------------------


class InvalidSpace(EqghError, ValueError):
    def __init__(self, message="invalid metric space", violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [self]


class AsymmetricMatrix(InvalidSpace):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"dist[{i}][{j}] != dist[{j}][{i}]")


class NegativeDistance(InvalidSpace):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"dist[{i}][{j}] is negative or has a nonzero diagonal")


class TriangleViolation(InvalidSpace):
    """``dist[i][j] > dist[i][k] + dist[k][j]`` beyond tolerance."""

    def __init__(self, i, j, k):
        self.i, self.j, self.k = i, j, k
        super().__init__(f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})")


class DuplicatePoint(InvalidSpace):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"points {i} and {j} are at distance 0")


# -- groups and actions ------------------------------------------------------


class InvalidGroup(EqghError, ValueError):
    def __init__(self, message="invalid group table", violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [self]


class NotAssociative(InvalidGroup):
    def __init__(self, a, b, c):
        self.a, self.b, self.c = a, b, c
        super().__init__(f"({a}*{b})*{c} != {a}*({b}*{c})")


class NoIdentity(InvalidGroup):
    def __init__(self):
        super().__init__("element 0 is not a two-sided identity")


class NoInverse(InvalidGroup):
    def __init__(self, g):
        self.g = g
        super().__init__(f"element {g} has no two-sided inverse")


class InvalidAction(EqghError, ValueError):
    def __init__(self, message="invalid action", violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [self]


class NotIsometric(InvalidAction):
    def __init__(self, g, i, j):
        self.g, self.i, self.j = g, i, j
        super().__init__(f"element {g} changes the distance between points {i} and {j}")


class NotHomomorphic(InvalidAction):
    def __init__(self, g, h):
        self.g, self.h = g, h
        super().__init__(f"perm[{g}*{h}] != perm[{g}] o perm[{h}]")


class NotEffective(InvalidAction):
    def __init__(self, g):
        self.g = g
        super().__init__(f"non-identity element {g} acts as the identity permutation")


class QuotientNotMetric(EqghError):
    """The min-over-orbits quotient failed metric validation."""


class NotASubgroup(EqghError, ValueError):
    pass


# -- approximations ----------------------------------------------------------


class MalformedTriple(EqghError, ValueError):
    pass


class NoApproximationBelow(EqghError):
    def __init__(self, eps_max):
        self.eps_max = eps_max
        super().__init__(f"no passing approximation triple at any grid value <= {eps_max}")


# -- numerics on SO(n) -------------------------------------------------------


class PointsTooSpread(EqghError, ValueError):
    pass


class NoConvergence(EqghError, RuntimeError):
    pass


class NoCoverage(EqghError, ValueError):
    pass


class NetIncompatible(EqghError, ValueError):
    pass


# -- homomorphism snapping ---------------------------------------------------


class DefectTooLarge(EqghError, ValueError):
    pass


class NoHomomorphismNearby(EqghError):
    pass


class DivisibilityError(EqghError, ValueError):
    pass
