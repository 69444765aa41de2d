"""Command-line entry points: ``epgh``, ``actiongeo``, ``lie``, ``smooth`` and ``eqgh``.

Results go to stdout as JSON.  Library errors print one line to stderr and
exit with status 1.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as jio
from .action_geometry import covering_multiplicity, minimal_net, seminorm_table
from .epgh import epgh_estimate, grid_step, verify_approximation
from .exceptions import EqghError
from .lie import ComConfig, continuify, karcher_mean_result, max_nonzero_coordinates
from .scenarios import SCENARIOS, custom_scenario, run_sequence
from .smoothing import FiniteTarget, RotationTarget, snap_to_homomorphism


def _emit(doc):
    sys.stdout.write(jio.dumps(doc) + "\n")


def _run(parser, argv):
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except (EqghError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


# -- epgh --------------------------------------------------------------------


def _epgh_dist(args):
    A, B = jio.load_action(args.A), jio.load_action(args.B)
    est = epgh_estimate(A, B, max_size=args.max_size)
    fwd = verify_approximation(A, B, est.forward)
    bwd = verify_approximation(B, A, est.backward)
    doc = {
        "epsilon": est.epsilon,
        "grid_step": grid_step(est.grid, est.epsilon),
        "forward_verdict": fwd.verdict,
        "backward_verdict": bwd.verdict,
    }
    if args.emit_certificate:
        jio.write_json(args.emit_certificate, {
            "epsilon": est.epsilon,
            "forward": {"triple": est.forward.to_dict(), "report": fwd.to_dict()},
            "backward": {"triple": est.backward.to_dict(), "report": bwd.to_dict()},
        })
    _emit(doc)


def epgh_main(argv=None):
    p = argparse.ArgumentParser(prog="epgh", description="equivariant pointed GH scale between two actions")
    sub = p.add_subparsers(required=True)
    d = sub.add_parser("dist", help="smallest grid scale with approximations both ways")
    d.add_argument("A")
    d.add_argument("B")
    d.add_argument("--max-size", type=int, default=None)
    d.add_argument("--emit-certificate", metavar="OUT")
    d.set_defaults(func=_epgh_dist)
    return _run(p, argv)


# -- actiongeo ---------------------------------------------------------------


def _seminorm(args):
    action = jio.load_action(args.action)
    table = seminorm_table(action, args.R)
    if args.element is not None:
        _emit({"R": args.R, "element": args.element, "seminorm": table[args.element]})
    else:
        _emit({"R": args.R, "seminorm": table.values.tolist()})


def _net(args):
    space = jio.load_space(args.space)
    net = minimal_net(space, args.mu)
    _emit({"mu": args.mu, "members": list(net.members),
           "covering_multiplicity": covering_multiplicity(space, net)})


def actiongeo_main(argv=None):
    p = argparse.ArgumentParser(prog="actiongeo", description="seminorms and nets of finite actions")
    sub = p.add_subparsers(required=True)
    s = sub.add_parser("seminorm")
    s.add_argument("action")
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--element", type=int)
    s.set_defaults(func=_seminorm)
    n = sub.add_parser("net")
    n.add_argument("space")
    n.add_argument("--mu", type=float, required=True)
    n.set_defaults(func=_net)
    return _run(p, argv)


# -- lie ---------------------------------------------------------------------


def _config(args):
    return ComConfig(r_conv=args.r_conv, R_growth=args.R_growth, N_max=args.N_max)


def _mean(args):
    points = jio.rotations_from_doc(jio.read_json(args.points))
    weights = jio.read_json(args.weights)
    if isinstance(weights, dict):
        weights = weights["weights"]
    res = karcher_mean_result(points, weights, _config(args))
    _emit({"mean": jio.rotation_to_dict(res.mean), "iterations": res.n_iter, "spread": res.spread})


def _continuify(args):
    doc = jio.read_json(args.psi)
    source = jio.rotations_from_doc(doc["source"])
    images = jio.rotations_from_doc(doc["images"])
    cfg = _config(args)
    m = continuify(source, images, args.nu, args.eta, cfg)
    _emit({
        "net_indices": m.net_indices_.tolist(),
        "values": [jio.rotation_to_dict(v) for v in m.predict(source)],
        "K": cfg.K,
        "deviation_bound": m.deviation_bound_,
        "jump_bound": m.jump_bound_,
        "measured_N": max_nonzero_coordinates(m.source_net_, args.nu, source),
    })


def lie_main(argv=None):
    p = argparse.ArgumentParser(prog="lie", description="SO(n) centers of mass and continuification")
    p.add_argument("--r-conv", type=float, default=0.4)
    p.add_argument("--R-growth", type=float, default=1.0)
    p.add_argument("--N-max", type=int, default=3)
    sub = p.add_subparsers(required=True)
    m = sub.add_parser("mean")
    m.add_argument("points")
    m.add_argument("weights")
    m.set_defaults(func=_mean)
    c = sub.add_parser("continuify")
    c.add_argument("psi")
    c.add_argument("--nu", type=float, required=True)
    c.add_argument("--eta", type=float, required=True)
    c.set_defaults(func=_continuify)
    return _run(p, argv)


# -- smooth ------------------------------------------------------------------


def _snap(args):
    doc = jio.read_json(args.psi)
    images = doc["images"] if isinstance(doc, dict) else doc
    source = jio.load_group(args.source)
    if args.target in ("so2", "so3"):
        target = RotationTarget(2 if args.target == "so2" else 3)
        images = jio.rotations_from_doc(images)
    else:
        group = jio.load_group(args.target)
        dist = doc.get("dist") if isinstance(doc, dict) else None
        if dist is None:
            dist = args.scale * (1.0 - np.eye(group.order))
        target = FiniteTarget(group, dist)
    res = snap_to_homomorphism(images, source, target, q_max=args.q_max)
    _emit(res.to_dict())


def smooth_main(argv=None):
    p = argparse.ArgumentParser(prog="smooth", description="snap an almost homomorphism to an exact one")
    sub = p.add_subparsers(required=True)
    s = sub.add_parser("snap")
    s.add_argument("psi")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True, help="group.json, so2 or so3")
    s.add_argument("--scale", type=float, default=1.0, help="discrete metric scale for group targets")
    s.add_argument("--q-max", type=float, default=0.1)
    s.set_defaults(func=_snap)
    return _run(p, argv)


# -- eqgh --------------------------------------------------------------------


def _scenario_run(args):
    if args.scenario in SCENARIOS:
        scenario = SCENARIOS[args.scenario]()
    else:
        scenario = custom_scenario(jio.read_json(args.scenario))
    if args.steps is not None:
        scenario = scenario.truncated(args.steps)
    report = run_sequence(scenario)
    text = report.to_csv()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.certs:
        jio.write_json(Path(args.certs) / f"{scenario.name}_certificates.json", report.to_dict())
    for row in report.rows:
        if row.error:
            print(f"step {row.step}: {row.error}", file=sys.stderr)
    return 0 if report.ok else 1


def eqgh_main(argv=None):
    p = argparse.ArgumentParser(prog="eqgh", description="convergence scenarios for finite group actions")
    sub = p.add_subparsers(required=True)
    sc = sub.add_parser("scenario").add_subparsers(required=True)
    r = sc.add_parser("run")
    r.add_argument("scenario", help="circle, torus or a custom scenario JSON")
    r.add_argument("--steps", type=int)
    r.add_argument("--out")
    r.add_argument("--certs")
    r.set_defaults(func=_scenario_run)
    return _run(p, argv)
