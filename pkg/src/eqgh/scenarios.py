"""Example sequences of actions and the end-to-end convergence pipeline.

Each step of a :class:`Scenario` is compared with a finite limit candidate.
Per step the pipeline estimates the epgh scale in both directions, extracts
a total group map from a whole-space approximation, smooths it through SO(2)
when both groups are cyclic, snaps it to an exact homomorphism, and reports
the kernel and how far its orbits spread.
"""

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .action_geometry import pseudometric_matrix
from .epgh import (
    ApproximationTriple,
    epgh_estimate,
    grid_step,
    search_approximation,
    verify_approximation,
)
from .exceptions import DivisibilityError, EqghError, InstanceTooLarge
from .groups import cyclic_group, isometry_group, orbit_space, validate_action
from .io import action_from_dict
from .lie import ComConfig, ContinuifiedMap, rot2
from .metric import circle_distances, gh_distance_bruteforce, validate_space
from .smoothing import (
    FiniteTarget,
    RotationTarget,
    check_monomorphism,
    kernel,
    kernel_orbit_diameter,
    snap_to_homomorphism,
)
from .validation import search_bound

SCENARIO_BOUND = 64
CIRCLE_POINTS = 24
TORUS_BASE = 5
TORUS_FIBER = 6
LEMMA_NU = 0.07
LEMMA_ETA = 0.043
LEMMA_CONFIG = ComConfig(r_conv=0.4, R_growth=1.0, N_max=2)


# -- generators --------------------------------------------------------------


def rotation_action(space, p, step):
    """``Z_p`` acting on a space of ``n`` points by ``x -> x + step (mod n)``."""
    n = space.n
    perm = [(np.arange(n) + step * k) % n for k in range(p)]
    return validate_action(cyclic_group(p), space, perm)


def gen_circle(n, p):
    """``n`` equally spaced points on a circle of length ``2 pi``, ``Z_p`` rotating."""
    if n < 3:
        raise ValueError("a sampled circle needs n >= 3")
    if p < 1 or n % p:
        raise DivisibilityError(f"p={p} does not divide n={n}")
    space = validate_space(circle_distances(n))
    return rotation_action(space, p, n // p)


def torus_distances(n, m, c):
    """Flat torus grid: point ``i*m + j`` sits at step ``i`` of the base and ``j`` of the fiber."""
    a = circle_distances(n)
    b = circle_distances(m, c)
    return np.sqrt(a[:, None, :, None] ** 2 + b[None, :, None, :] ** 2).reshape(n * m, n * m)


def gen_collapsing_torus(n, m, c):
    """``Z_m`` rotating the fiber of circumference ``c`` of an ``n x m`` torus grid."""
    if n < 3 or m < 3:
        raise ValueError("torus grids need n, m >= 3")
    if not c > 0:
        raise ValueError("fiber circumference must be positive")
    space = validate_space(torus_distances(n, m, c))
    j = np.arange(n * m)
    base, fiber = j // m, j % m
    perm = [base * m + (fiber + k) % m for k in range(m)]
    return validate_action(cyclic_group(m), space, perm)


def random_action(rng, max_points=8, max_order=8, group_order=None):
    """A random effective isometric action on at most ``max_points`` points.

    The space is ``r`` copies of the regular action of ``Z_k``; the distance
    between ``(g, a)`` and ``(h, b)`` depends only on ``(h - g, a, b)`` and
    lies in ``[s, 2 s]``, which makes it an invariant metric automatically.
    """
    k = group_order if group_order is not None else int(rng.integers(1, max_order + 1))
    k = max(1, min(k, max_points))
    r = int(rng.integers(1, max_points // k + 1))
    n = k * r
    s = float(rng.uniform(0.2, 2.0))
    w = rng.uniform(s, 2 * s, size=(k, r, r))
    # w[t, a, b] and w[-t, b, a] describe the same pair
    w = 0.5 * (w + w[(-np.arange(k)) % k].transpose(0, 2, 1))
    w[0][np.diag_indices(r)] = 0.0
    idx = np.arange(n)
    g, a = idx % k, idx // k
    dist = w[(g[None, :] - g[:, None]) % k, a[:, None], a[None, :]]
    basepoint = int(rng.integers(n))
    space = validate_space(dist, basepoint)
    perm = [a * k + (g + t) % k for t in range(k)]
    return validate_action(cyclic_group(k), space, perm)


def random_trivial_action(rng, max_points=8):
    from .groups import trivial_action
    from .metric import random_space

    n = int(rng.integers(1, max_points + 1))
    return trivial_action(random_space(n, rng))


# -- scenarios ---------------------------------------------------------------


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass
class Scenario:
    name: str
    params: dict
    steps: list
    limit: object
    labels: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def truncated(self, k):
        return Scenario(self.name, dict(self.params, steps=k), self.steps[:k], self.limit, self.labels[:k])


def circle_scenario(n=CIRCLE_POINTS):
    ps = divisors(n)
    steps = [gen_circle(n, p) for p in ps]
    return Scenario("circle", {"n": n}, steps, steps[-1], [f"Z{p}" for p in ps])


def torus_scenario(steps=5, n=TORUS_BASE, m=TORUS_FIBER):
    acts = [gen_collapsing_torus(n, m, 1.0 / i) for i in range(1, steps + 1)]
    limit = validate_action(cyclic_group(1), validate_space(circle_distances(n)), [np.arange(n)])
    return Scenario("torus", {"n": n, "m": m, "steps": steps}, acts, limit,
                    [f"c=1/{i}" for i in range(1, steps + 1)])


def constant_scenario(action, steps=3):
    return Scenario("constant", {"steps": steps}, [action] * steps, action, ["const"] * steps)


def custom_scenario(doc):
    """``{"name": ..., "limit": <action>, "steps": [<action>, ...]}``."""
    if not isinstance(doc, dict) or "steps" not in doc or "limit" not in doc:
        raise ValueError("custom scenario needs 'steps' and 'limit'")
    steps = [action_from_dict(a) for a in doc["steps"]]
    labels = [str(i) for i in range(1, len(steps) + 1)]
    return Scenario(doc.get("name", "custom"), {}, steps, action_from_dict(doc["limit"]), labels)


# -- pipeline ----------------------------------------------------------------


def cyclic_embedding(group):
    """Rotations representing a cyclic group in SO(2), or None if not cyclic."""
    n = group.order
    gen = next((g for g in range(n) if group.element_order(g) == n), None)
    if gen is None:
        return None
    out = [None] * n
    x = 0
    for k in range(n):
        out[x] = rot2(2 * math.pi * k / n)
        x = group.mul(x, gen)
    return np.array(out)


def finite_target(action):
    """The acting group with its normalized action pseudometric at ``R > diameter``."""
    D = pseudometric_matrix(action, 2.0 * action.space.diameter + 1.0)
    scale = float(D.max())
    return FiniteTarget(action.group, D / scale if scale > 0 else D)


@dataclass
class StepRow:
    step: int
    label: str
    group_order: int
    space_size: int
    epsilon: float | None = None
    grid_step: float | None = None
    q: float | None = None
    snapped: bool = False
    displacement: float | None = None
    bound_check: bool | None = None
    kernel_order: int | None = None
    kernel_orbit_diameter: float | None = None
    limit_symmetry_order: int | None = None
    divides: bool | None = None
    embedding_injective: bool | None = None
    gh_orbit: float | None = None
    fukaya_ok: bool | None = None
    error: str = ""


CSV_FIELDS = list(StepRow.__dataclass_fields__)


@dataclass
class ConvergenceReport:
    scenario: str
    params: dict
    rows: list
    certificates: list
    symmetry: dict

    @property
    def ok(self):
        return all(not r.error for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _cell(v) for k, v in asdict(r).items()})
        return buf.getvalue()

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "params": self.params,
            "ok": self.ok,
            "rows": [asdict(r) for r in self.rows],
            "symmetry": self.symmetry,
            "certificates": self.certificates,
        }


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fukaya(action, limit, eps, step):
    X, Y = orbit_space(action), orbit_space(limit)
    try:
        gh = gh_distance_bruteforce(X, Y)
    except InstanceTooLarge:
        return None, None
    return gh, bool(gh <= eps + step)


def _smooth_so2(step_act, limit, psi):
    """Continuify ``psi`` through SO(2) and snap it; None when a group is not cyclic."""
    src = cyclic_embedding(step_act.group)
    dst = cyclic_embedding(limit.group)
    if src is None or dst is None:
        return None
    images = dst[[psi[g] for g in range(step_act.group.order)]]
    smooth = ContinuifiedMap(LEMMA_NU, LEMMA_ETA, LEMMA_CONFIG).fit(src, images)
    values = smooth.predict(src)
    return snap_to_homomorphism(values, step_act.group, RotationTarget(2))


def run_step(i, label, act, limit, bound, sym_action):
    row = StepRow(step=i, label=label, group_order=act.group.order, space_size=act.space.n)
    certs = {"step": i}
    try:
        est = epgh_estimate(act, limit, max_size=bound)
        row.epsilon = est.epsilon
        row.grid_step = grid_step(est.grid, est.epsilon)
        certs["forward"] = est.forward.to_dict()
        certs["backward"] = est.backward.to_dict()

        whole = search_approximation(limit, act, max_size=bound, radius=math.inf, check_phi=False)
        certs["extraction"] = whole.triple.to_dict()
        psi = whole.triple.psi

        snap = _smooth_so2(act, limit, psi)
        if snap is None:
            snap = snap_to_homomorphism([psi[g] for g in range(act.group.order)], act.group,
                                        finite_target(limit))
        row.q = snap.q
        row.displacement = snap.displacement
        row.bound_check = snap.bound_check
        row.snapped = True
        ker = kernel(snap.hom)
        row.kernel_order = ker.order
        row.kernel_orbit_diameter = kernel_orbit_diameter(act, ker.elements)

        row.limit_symmetry_order = sym_action.group.order
        row.divides = sym_action.group.order % act.group.order == 0
        emb = search_approximation(sym_action, act, max_size=bound, radius=math.inf, check_phi=False)
        certs["embedding"] = emb.triple.to_dict()
        epsi = emb.triple.psi
        esnap = snap_to_homomorphism([epsi[g] for g in range(act.group.order)], act.group,
                                     finite_target(sym_action), q_max=math.inf)
        row.embedding_injective = check_monomorphism(esnap.hom).injective

        row.gh_orbit, row.fukaya_ok = _fukaya(act, limit, row.epsilon, row.grid_step)
    except EqghError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row, certs


def run_sequence(scenario, bound=None):
    """Run every step of ``scenario`` against its limit candidate."""
    bound = bound if bound is not None else search_bound(SCENARIO_BOUND)
    sym_action = isometry_group(scenario.limit.space)
    rows, certs = [], []
    for i, (act, label) in enumerate(zip(scenario.steps, scenario.labels), start=1):
        row, cert = run_step(i, label, act, scenario.limit, bound, sym_action)
        rows.append(row)
        certs.append(cert)
    return ConvergenceReport(
        scenario=scenario.name,
        params=scenario.params,
        rows=rows,
        certificates=certs,
        symmetry=symmetry_summary(scenario, rows, sym_action),
    )


def symmetry_summary(scenario, rows, sym_action):
    """Order divisibility against the limit's isometry group, per step and at the end.

    Finite groups have symmetry degree 0, so the check is the order shadow:
    does ``|G_i|`` divide ``|Isom(limit)|``, and does the snapped map embed
    ``G_i``?  A final step with a nontrivial kernel marks symmetry loss.
    """
    last = rows[-1] if rows else None
    lost = bool(last and (last.divides is False or (last.kernel_order or 1) > 1))
    witness = None
    if lost and last.kernel_order:
        witness = {"step": last.step, "kernel_order": last.kernel_order,
                   "kernel_orbit_diameter": last.kernel_orbit_diameter}
    return {
        "limit_isometry_order": sym_action.group.order,
        "reading": "order divisibility of the step group into the limit isometry group",
        "divides": [r.divides for r in rows],
        "embeds": [r.embedding_injective for r in rows],
        "symmetry_loss": lost,
        "loss_witness": witness,
    }


def symmetry_semicontinuity_check(scenario, report=None):
    report = report or run_sequence(scenario)
    return report.symmetry


def reverify(report_doc, scenario):
    """Re-check every certificate of a report against the scenario's actions."""
    failures = []
    limit = scenario.limit
    sym_action = None
    for cert in report_doc["certificates"]:
        act = scenario.steps[cert["step"] - 1]
        checks = [("forward", act, limit), ("backward", limit, act), ("extraction", limit, act)]
        if "embedding" in cert:
            sym_action = sym_action or isometry_group(limit.space)
            checks.append(("embedding", sym_action, act))
        for key, src, dst in checks:
            if key not in cert:
                continue
            triple = ApproximationTriple.from_dict(cert[key])
            if not verify_approximation(src, dst, triple).verdict:
                failures.append((cert["step"], key))
    return failures


SCENARIOS = {"circle": circle_scenario, "torus": torus_scenario}
