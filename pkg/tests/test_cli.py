import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from eqgh import io as jio
from eqgh.cli import actiongeo_main, eqgh_main, epgh_main, lie_main, smooth_main
from eqgh.epgh import ApproximationTriple, verify_approximation
from eqgh.exceptions import InvalidSpace
from eqgh.groups import cyclic_group
from eqgh.lie import rot2
from eqgh.metric import circle_space
from eqgh.scenarios import gen_circle


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(main, argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_io_round_trips(tmp_path):
    act = gen_circle(12, 4)
    back = jio.action_from_dict(json.loads(jio.dumps(act.to_dict())))
    assert np.array_equal(back.perm, act.perm)
    assert np.array_equal(back.space.dist, act.space.dist)
    R = rot2(0.3)
    assert np.array_equal(jio.rotation_from_dict(jio.rotation_to_dict(R)), R)


def test_io_rejects_bad_documents():
    with pytest.raises(ValueError):
        jio.space_from_dict({"n": 3, "dist": [[0, 1], [1, 0]]})
    with pytest.raises(InvalidSpace):
        jio.space_from_dict({"n": 3, "basepoint": 0, "dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]})
    with pytest.raises(ValueError):
        jio.rotation_from_dict({"n": 2, "matrix": [[1, 0], [0, -1]]})
    with pytest.raises(ValueError):
        jio.group_from_dict({"order": 2})


def test_epgh_dist(tmp_path, capsys):
    a = write(tmp_path, "a.json", gen_circle(12, 3).to_dict())
    b = write(tmp_path, "b.json", gen_circle(12, 12).to_dict())
    cert = tmp_path / "cert.json"
    code, out, _ = run(epgh_main, ["dist", a, b, "--emit-certificate", str(cert)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["epsilon"] == pytest.approx(3 / math.pi)
    assert doc["forward_verdict"] and doc["backward_verdict"]
    saved = json.loads(cert.read_text())
    triple = ApproximationTriple.from_dict(saved["forward"]["triple"])
    assert verify_approximation(gen_circle(12, 3), gen_circle(12, 12), triple).verdict
    assert "f(B(p, 1/eps))" in saved["forward"]["report"]["condition_2_reading"]


def test_epgh_guard_exit_code(tmp_path, capsys):
    a = write(tmp_path, "a.json", gen_circle(12, 3).to_dict())
    code, _, err = run(epgh_main, ["dist", a, a, "--max-size", "4"], capsys)
    assert code == 1 and "InstanceTooLarge" in err


def test_actiongeo(tmp_path, capsys):
    act = write(tmp_path, "act.json", gen_circle(12, 12).to_dict())
    code, out, _ = run(actiongeo_main, ["seminorm", act, "--R", str(math.pi / 4), "--element", "6"], capsys)
    assert code == 0 and json.loads(out)["seminorm"] == 0
    code, out, _ = run(actiongeo_main, ["seminorm", act, "--R", "4"], capsys)
    assert len(json.loads(out)["seminorm"]) == 12
    space = write(tmp_path, "space.json", circle_space(12).to_dict())
    code, out, _ = run(actiongeo_main, ["net", space, "--mu", str(math.pi / 3)], capsys)
    doc = json.loads(out)
    assert doc["members"] == [0, 2, 4, 6, 8, 10] and doc["covering_multiplicity"] == 3


def test_lie_mean_and_continuify(tmp_path, capsys):
    pts = write(tmp_path, "pts.json", [jio.rotation_to_dict(rot2(t)) for t in (0.1, -0.1)])
    w = write(tmp_path, "w.json", [0.5, 0.5])
    code, out, _ = run(lie_main, ["mean", pts, w], capsys)
    assert code == 0
    assert np.allclose(json.loads(out)["mean"]["matrix"], np.eye(2), atol=1e-10)

    src = [jio.rotation_to_dict(rot2(2 * math.pi * k / 24)) for k in range(24)]
    psi = write(tmp_path, "psi.json", {"source": src, "images": src})
    code, out, _ = run(lie_main, ["--N-max", "2", "continuify", psi, "--nu", "0.07", "--eta", "0.043"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["K"] == 3 and doc["measured_N"] <= 2
    assert len(doc["values"]) == 24


def test_lie_spread_error(tmp_path, capsys):
    pts = write(tmp_path, "pts.json", [jio.rotation_to_dict(rot2(t)) for t in (0.0, 2.0)])
    w = write(tmp_path, "w.json", {"weights": [0.5, 0.5]})
    code, _, err = run(lie_main, ["mean", pts, w], capsys)
    assert code == 1 and "PointsTooSpread" in err


def test_smooth_snap(tmp_path, capsys):
    z3 = write(tmp_path, "z3.json", cyclic_group(3).to_dict())
    imgs = [rot2(0.02), rot2(2 * math.pi / 3 + 0.01), rot2(4 * math.pi / 3 - 0.015)]
    psi = write(tmp_path, "psi.json", {"images": [jio.rotation_to_dict(m) for m in imgs]})
    code, out, _ = run(smooth_main, ["snap", psi, "--source", z3, "--target", "so2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["bound_check"]
    assert doc["q"] == pytest.approx(0.012732395447351537)

    z4 = write(tmp_path, "z4.json", cyclic_group(4).to_dict())
    psi4 = write(tmp_path, "psi4.json", {"images": [0, 1, 2, 2]})
    code, out, _ = run(smooth_main, ["snap", psi4, "--source", z4, "--target", z4, "--scale", "0.05"], capsys)
    assert json.loads(out)["hom"]["images"] == [0, 1, 2, 3]


def test_scenario_run(tmp_path, capsys):
    out = tmp_path / "report.csv"
    certs = tmp_path / "certs"
    code, _, _ = run(eqgh_main, ["scenario", "run", "torus", "--steps", "3", "--out", str(out),
                                 "--certs", str(certs)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("step,label") and len(lines) == 4
    assert json.loads((certs / "torus_certificates.json").read_text())["ok"]


def test_scenario_failure_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EQGH_SEARCH_BOUND", "8")
    code, _, err = run(eqgh_main, ["scenario", "run", "torus", "--steps", "1"], capsys)
    assert code == 1 and "InstanceTooLarge" in err


@pytest.mark.skipif(shutil.which("actiongeo") is None, reason="console scripts not installed")
def test_console_script(tmp_path):
    space = write(tmp_path, "space.json", circle_space(12).to_dict())
    res = subprocess.run(["actiongeo", "net", space, "--mu", "10"], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["members"] == [0]
