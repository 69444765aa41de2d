import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqgh.epgh import (
    ApproximationTriple,
    epgh_distance,
    epgh_estimate,
    epsilon_grid,
    find_triple,
    grid_step,
    search_approximation,
    verify_approximation,
)
from eqgh.exceptions import InstanceTooLarge, MalformedTriple, NoApproximationBelow
from eqgh.groups import gamma_r, isometry_group, trivial_action
from eqgh.metric import ball, euclidean_space, gh_distance_bruteforce, validate_space
from eqgh.scenarios import gen_circle, random_action

Z3_VS_Z12 = 0.9549296585513721  # 3 / pi, frozen search output


def identity_triple(act, eps):
    r = 1 / eps
    return ApproximationTriple(
        f={int(x): int(x) for x in ball(act.space, act.space.basepoint, r)},
        phi={int(g): int(g) for g in gamma_r(act, r)},
        psi={int(g): int(g) for g in gamma_r(act, r)},
        epsilon=eps,
    )


def oracle_epsilon(src, dst, grid):
    """Smallest grid scale where some f, found by full enumeration, passes.

    Given f, conditions 4 and 5 ask independently for each element whether
    some partner works, so phi and psi need no enumeration of their own.
    """
    X, Y = src.space, dst.space
    p, q = X.basepoint, Y.basepoint
    for eps in grid:
        r = 1 / eps
        bx = [int(x) for x in ball(X, p, r)]
        by = [int(y) for y in ball(Y, q, r)]
        G, L = gamma_r(src, r), gamma_r(dst, r)
        rest = [x for x in bx if x != p]
        for values in product(range(Y.n), repeat=len(rest)):
            f = dict(zip(rest, values))
            f[p] = q
            image = list(f.values())
            if any(min(Y.dist[y, v] for v in image) >= eps for y in by):
                continue
            if any(abs(X.dist[a, b] - Y.dist[f[a], f[b]]) >= eps for a in bx for b in bx):
                continue

            def works(g, lam):
                return all(
                    Y.dist[f[int(src.perm[g, x])], dst.perm[lam, f[x]]] < eps
                    for x in bx
                    if int(src.perm[g, x]) in f
                )

            if all(any(works(g, lam) for lam in L) for g in G) and all(
                any(works(g, lam) for g in G) for lam in L
            ):
                return float(eps)
    return None


def verify_by_elements(src, dst, t):
    """Second verifier: loops over points first, then elements, and tracks only verdicts."""
    X, Y = src.space, dst.space
    eps, f = t.epsilon, t.f
    ok = f[X.basepoint] == Y.basepoint
    image = set(f.values())
    ok &= all(any(Y.dist[y, v] < eps for v in image) for y in ball(Y, Y.basepoint, t.domain_radius))
    for x in f:
        for x2 in f:
            ok &= abs(X.dist[x, x2] - Y.dist[f[x], f[x2]]) < eps
        for g, lam in t.phi.items():
            gx = int(src.perm[g, x])
            if gx in f:
                ok &= Y.dist[f[gx], dst.perm[lam, f[x]]] < eps
        for lam, g in t.psi.items():
            gx = int(src.perm[g, x])
            if gx in f:
                ok &= Y.dist[f[gx], dst.perm[lam, f[x]]] < eps
    return bool(ok)


def test_identity_triple_passes(z12):
    for eps in (0.01, 0.3, 2.0):
        assert verify_approximation(z12, z12, identity_triple(z12, eps)).verdict


def test_collapse_to_point_at_large_scale(z12, point):
    t = ApproximationTriple(f={0: 0}, phi={0: 0}, psi={0: 0}, epsilon=4.0)
    rep = verify_approximation(z12, point, t)
    assert rep.verdict
    assert "f(B(p, 1/eps))" in rep.condition_2_reading


def test_swapped_phi_fails_condition_4(z12):
    t = identity_triple(z12, 0.01)
    t.phi[1], t.phi[2] = 2, 1
    rep = verify_approximation(z12, z12, t)
    assert not rep.verdict
    assert rep.failed() == [4]
    assert rep.conditions[4].witness[0] in (1, 2)
    assert rep.worst_slack < 0


def test_malformed_domains(z12):
    t = identity_triple(z12, 0.5)
    del t.f[max(t.f)]
    with pytest.raises(MalformedTriple):
        verify_approximation(z12, z12, t)


def test_self_distance_is_grid_minimum(z12):
    eps, triple = search_approximation(z12, z12, max_size=12)
    assert eps == epsilon_grid(z12.space, z12.space)[0]
    assert triple.f == {x: x for x in range(12)}


def test_scaled_circle_against_gh(circle12):
    A, B = trivial_action(circle12), trivial_action(circle12.scaled(1.2))
    est = epgh_estimate(A, B)
    gh = gh_distance_bruteforce(A.space, B.space, max_points=24)
    assert gh == pytest.approx(0.1 * math.pi)
    # lands on the edge of the window, hence the round-off slack
    assert abs(est.epsilon - 2 * gh) <= grid_step(est.grid, est.epsilon) + 1e-12


def test_z3_vs_z12_fixture():
    A, B = gen_circle(12, 3), gen_circle(12, 12)
    assert search_approximation(A, B).epsilon == pytest.approx(Z3_VS_Z12, abs=1e-12)
    assert search_approximation(B, A).epsilon == pytest.approx(Z3_VS_Z12, abs=1e-12)
    assert epgh_distance(A, B) == epgh_distance(B, A)


def test_fixed_cyclic_vs_dihedral_stays_apart():
    values = []
    for n in (6, 8, 10, 12):
        A = gen_circle(n, 2)
        B = isometry_group(A.space)
        values.append(epgh_distance(A, B, max_size=24))
    assert min(values) > 0.3


def test_guard_and_env(monkeypatch, z12):
    with pytest.raises(InstanceTooLarge):
        search_approximation(z12, z12, max_size=8)
    monkeypatch.setenv("EQGH_SEARCH_BOUND", "8")
    with pytest.raises(InstanceTooLarge):
        search_approximation(z12, z12)


def test_no_approximation_below(z12, point):
    with pytest.raises(NoApproximationBelow):
        search_approximation(z12, point, eps_max=0.05)


def test_basepoint_breaks_gh_agreement():
    # an isometric copy with a different basepoint: plain gh is 0
    X = euclidean_space([0.0, 0.5, 1.0])
    Y = X.with_basepoint(1)
    est = epgh_estimate(trivial_action(X), trivial_action(Y))
    assert gh_distance_bruteforce(X, Y) == 0
    assert est.epsilon == 0.75
    assert est.epsilon > grid_step(est.grid, est.epsilon)


def test_passing_is_not_monotone_in_scale():
    X = validate_space([[0, 1.15], [1.15, 0]])
    Y = validate_space([[0, 0.9], [0.9, 0]])
    A, B = trivial_action(X), trivial_action(Y)
    assert find_triple(A, B, 0.3) is not None
    assert find_triple(A, B, 0.9) is None


def test_certificate_round_trip(z12):
    eps, t = search_approximation(gen_circle(12, 4), z12)
    again = ApproximationTriple.from_dict(t.to_dict())
    assert verify_approximation(gen_circle(12, 4), z12, again).verdict


def test_whole_space_triple_is_total(z12):
    A = gen_circle(12, 4)
    res = search_approximation(z12, A, radius=math.inf, check_phi=False)
    assert res.triple.phi is None
    assert set(res.triple.psi) == set(range(4))
    assert verify_approximation(z12, A, res.triple).verdict


small_actions = st.builds(
    lambda seed: random_action(np.random.default_rng(seed), max_points=5, max_order=4),
    st.integers(0, 10**6),
)


@given(small_actions, small_actions)
def test_search_matches_enumeration_oracle(A, B):
    grid = epsilon_grid(A.space, B.space)
    eps, triple = search_approximation(A, B)
    assert eps == oracle_epsilon(A, B, grid)
    assert verify_approximation(A, B, triple).verdict


@given(small_actions, small_actions)
def test_second_verifier_agrees(A, B):
    eps, triple = search_approximation(A, B)
    assert verify_by_elements(A, B, triple)
    for other in epsilon_grid(A.space, B.space)[:6]:
        t = find_triple(A, B, other)
        if t is not None:
            assert verify_by_elements(A, B, t) == verify_approximation(A, B, t).verdict


@given(small_actions, small_actions)
def test_restriction_keeps_conditions_3_to_5(A, B):
    """Restricting a passing triple to smaller domains keeps 1, 3, 4, 5.

    Condition 2 is not inherited (see test_passing_is_not_monotone_in_scale).
    """
    eps, t = search_approximation(A, B)
    grid = epsilon_grid(A.space, B.space)
    for e2 in grid[grid > eps][:5]:
        r = 1 / e2
        G, L = set(gamma_r(A, r).tolist()), set(gamma_r(B, r).tolist())
        phi = {g: t.phi[g] for g in G}
        psi = {lam: t.psi[lam] for lam in L}
        if not set(phi.values()) <= L or not set(psi.values()) <= G:
            continue
        bx = ball(A.space, A.space.basepoint, r)
        small = ApproximationTriple({int(x): t.f[int(x)] for x in bx}, phi, psi, float(e2))
        rep = verify_approximation(A, B, small)
        assert all(rep.conditions[k].passed for k in (1, 3, 4, 5))


@given(small_actions, small_actions)
def test_distance_symmetric(A, B):
    assert epgh_distance(A, B) == epgh_distance(B, A)
