"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line to the terminal.
"""

import json
import math
import time

import numpy as np
import pytest

from eqgh.action_geometry import covering_multiplicity, is_net, metric_regime, minimal_net, seminorm_table
from eqgh.epgh import epgh_estimate, grid_step, search_approximation, verify_approximation
from eqgh.exceptions import InstanceTooLarge, NoHomomorphismNearby
from eqgh.groups import cyclic_group, orbit_space, trivial_action
from eqgh.lie import ComConfig, ContinuifiedMap, geodesic_distance, karcher_mean, karcher_mean_result, log_direction_sum, rot2, so2_net
from eqgh.metric import circle_space, gh_distance_bruteforce, random_space
from eqgh.scenarios import circle_scenario, gen_circle, gen_collapsing_torus, random_action, run_sequence, torus_scenario
from eqgh.smoothing import RotationTarget, snap_to_homomorphism
from oracles import fd_gradient, grid_search_mean, random_cluster, so3_objective

SEED = 20261016


@pytest.fixture
def announce(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")

    return emit


def test_1_definition_fidelity(announce):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    verified, agree, worst = 0, 0, 0.0
    for _ in range(50):
        A, B = random_action(rng), random_action(rng)
        res = search_approximation(A, B)
        verified += verify_approximation(A, B, res.triple).verdict
        TA, TB = trivial_action(A.space), trivial_action(B.space)
        est = epgh_estimate(TA, TB)
        gh = gh_distance_bruteforce(A.space, B.space, max_points=16)
        gap = abs(est.epsilon - 2 * gh) - grid_step(est.grid, est.epsilon)
        agree += gap <= 1e-12
        worst = max(worst, gap)
    elapsed = time.perf_counter() - start
    ok = verified == 50 and agree == 50 and elapsed < 60
    announce(1, ok, f"verified {verified}/50; trivial-group epgh within one step of 2*gh on {agree}/50 "
                    f"(worst excess {worst:.3g}); {elapsed:.1f}s")
    assert verified == 50
    assert elapsed < 60
    assert agree == 50, "pointed, ball-restricted epgh does not track 2*gh; see the decisions ledger"


def _fixtures():
    acts = [gen_circle(12, p) for p in (1, 2, 3, 4, 6, 12)]
    acts += [gen_collapsing_torus(4, 3, c) for c in (0.5, 2.0)]
    acts.append(trivial_action(circle_space(5)))
    return acts


def test_2_seminorm_laws(announce):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    acts = _fixtures() + [random_action(rng) for _ in range(100)]
    bad = []
    for i, act in enumerate(acts):
        G = act.group
        radii = np.unique(np.concatenate([act.space.dist.ravel(), act.space.dist.ravel() * 1.5])) + 1e-3
        prev = None
        for R in radii:
            values = seminorm_table(act, R).values
            if not np.array_equal(values, values[G.inverse]):
                bad.append((i, "inverse"))
            if prev is not None and np.any(values < prev):
                bad.append((i, "monotone"))
            prev = values
        rep = metric_regime(act, act.space.diameter * 1.01 + 1e-6)
        if not (rep.separates and rep.triangle):
            bad.append((i, "metric"))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    announce(2, ok, f"{len(acts)} actions, {len(bad)} violations; {elapsed:.1f}s")
    assert not bad
    assert elapsed < 10


def test_3_net_laws(announce):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    good = 0
    for _ in range(200):
        s = random_space(int(rng.integers(1, 30)), rng, dim=int(rng.integers(1, 4)))
        mu = float(rng.uniform(0.01, 1.5))
        good += is_net(s, minimal_net(s, mu).members, mu)
    over = []
    for n in range(3, 41):
        c = circle_space(n)
        for k in range(1, n):
            m = covering_multiplicity(c, minimal_net(c, 2 * math.pi * k / n))
            if m > 3:
                over.append((n, k, m))
    elapsed = time.perf_counter() - start
    ok = good == 200 and not over and elapsed < 5
    first = f"first {over[0]}" if over else ""
    announce(3, ok, f"nets valid {good}/200; circle (n, k) with multiplicity > 3: {len(over)} {first}; "
                    f"max {max((m for *_, m in over), default=3)}; {elapsed:.1f}s")
    assert good == 200
    assert elapsed < 5
    assert not over, "open mu-balls on a circle can meet 4 net balls; see the decisions ledger"


def test_4_center_of_mass(announce):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    exact = (
        np.abs(karcher_mean([rot2(0.4)], [1.0]) - rot2(0.4)).max() < 1e-10
        and np.abs(karcher_mean([rot2(0.1), rot2(-0.1)], [0.5, 0.5]) - np.eye(2)).max() < 1e-10
    )
    cfg = ComConfig()
    worst_oracle = worst_opt = worst_fd = 0.0
    for _ in range(100):
        pts = random_cluster(rng, 3, 0.1)
        w = rng.uniform(0.1, 1.0, 3)
        w /= w.sum()
        res = karcher_mean_result(pts, w, cfg)
        worst_oracle = max(worst_oracle, geodesic_distance(res.mean, grid_search_mean(pts, w)))
        S = log_direction_sum(res.mean, pts, w)
        worst_opt = max(worst_opt, float(np.linalg.norm(S)))
        analytic = -np.array([S[2, 1], S[0, 2], S[1, 0]]) * 2 / math.pi**2
        fd = fd_gradient(res.mean, pts, w, lambda x, p, ww: so3_objective(x[None], p, ww)[0])
        worst_fd = max(worst_fd, float(np.abs(fd - analytic).max()))
    elapsed = time.perf_counter() - start
    ok = exact and worst_oracle < 1e-6 and worst_opt < 1e-10 and worst_fd < 1e-4 and elapsed < 120
    announce(4, ok, f"exact cases {exact}; oracle gap {worst_oracle:.2e}; log-sum {worst_opt:.2e}; "
                    f"fd gap {worst_fd:.2e}; {elapsed:.1f}s")
    assert ok


def test_5_lemma_pipeline(announce):
    start = time.perf_counter()
    cfg = ComConfig(r_conv=0.4, R_growth=1.0, N_max=2)
    eta = 0.043
    src = np.array([rot2(2 * math.pi * k / 24) for k in range(24)])
    net = so2_net(eta)
    rounded = net[[int(np.argmin([geodesic_distance(g, b) for b in net])) for g in src]]
    m = ContinuifiedMap(nu=0.07, eta=eta, config=cfg).fit(src, rounded)
    on_net = all(np.array_equal(m.evaluate(g), net[a]) for g, a in zip(src, m.alpha_))
    X = np.array([rot2(t) for t in np.linspace(0, 2 * math.pi, 10_000, endpoint=False)])
    out = m.predict(X)
    # the input map is the inclusion Z_24 -> SO(2); its continuous reference is g -> g
    dev = max(geodesic_distance(a, b) for a, b in zip(out, X))
    jump = max(geodesic_distance(out[i], out[(i + 1) % len(out)]) for i in range(len(out)))
    elapsed = time.perf_counter() - start
    bound, jump_bound = eta * (3 * cfg.K + 4), 3 * eta * cfg.K
    ok = on_net and dev <= bound and jump <= jump_bound and elapsed < 30
    announce(5, ok, f"K={cfg.K:g}; deviation {dev:.4f} <= {bound:.4f}; net points exact {on_net}; "
                    f"max jump {jump:.2e} <= {jump_bound:.4f}; {elapsed:.1f}s")
    assert ok


def test_6_gkr_snap(announce):
    rng = np.random.default_rng(SEED)
    target = RotationTarget(2)
    start = time.perf_counter()
    recovered = refused = wrong = 0
    for _ in range(1000):
        n = int(rng.integers(1, 25))
        j = int(rng.integers(n))
        base = [rot2(2 * math.pi * j * k / n) for k in range(n)]
        noisy = [b @ rot2(rng.uniform(-0.02, 0.02) * math.pi) for b in base]
        try:
            res = snap_to_homomorphism(noisy, cyclic_group(n), target)
        except NoHomomorphismNearby:
            refused += 1
            continue
        same = all(geodesic_distance(a, b) < 1e-9 for a, b in zip(res.hom.images, base))
        if same and res.displacement <= 1.36 * res.q:
            recovered += 1
        else:
            wrong += 1
    elapsed = time.perf_counter() - start
    ok = recovered >= 990 and wrong == 0 and elapsed < 30
    announce(6, ok, f"recovered {recovered}/1000, refused {refused}, wrong {wrong}; {elapsed:.1f}s")
    assert ok


def test_7_symmetry_preservation_and_loss(announce):
    start = time.perf_counter()
    circle = run_sequence(circle_scenario())
    torus = run_sequence(torus_scenario())
    injective = all(r.snapped and r.kernel_order == 1 for r in circle.rows)
    diam = [r.kernel_orbit_diameter for r in torus.rows]
    cs = [1.0 / i for i in range(1, len(diam) + 1)]
    decreasing = all(a > b for a, b in zip(diam, diam[1:]))
    below = all(d <= c for d, c in zip(diam, cs))
    loss = torus.symmetry["symmetry_loss"]
    same = True
    for first, sc in ((circle, circle_scenario), (torus, torus_scenario)):
        again = run_sequence(sc())
        same &= again.to_csv() == first.to_csv()
        same &= json.dumps(again.to_dict(), sort_keys=True) == json.dumps(first.to_dict(), sort_keys=True)
    elapsed = time.perf_counter() - start
    ok = injective and decreasing and below and loss and same and elapsed < 120
    announce(7, ok, f"circle injective {injective}; torus diameters {[round(d, 4) for d in diam]} "
                    f"decreasing {decreasing}, <= c_i {below}; loss marked {loss}; "
                    f"byte-identical {same}; {elapsed:.1f}s")
    assert ok


def test_8_orbit_space_consistency(announce):
    start = time.perf_counter()
    checked, skipped, bad = 0, 0, []
    for sc in (circle_scenario(), torus_scenario()):
        report = run_sequence(sc)
        limit_q = orbit_space(sc.limit)
        for act, row in zip(sc.steps, report.rows):
            try:
                gh = gh_distance_bruteforce(orbit_space(act), limit_q)
            except InstanceTooLarge:
                skipped += 1
                continue
            checked += 1
            if gh > row.epsilon + row.grid_step:
                bad.append((sc.name, row.step, gh, row.epsilon))
    elapsed = time.perf_counter() - start
    ok = checked > 0 and not bad and elapsed < 60
    announce(8, ok, f"checked {checked} steps, {skipped} past the oracle guard, {len(bad)} violations; "
                    f"{elapsed:.1f}s")
    assert ok
