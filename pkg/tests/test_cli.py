import csv
import json

import pytest

from ccmorph import cli


def write(tmp_path, doc, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=2) if not isinstance(doc, str) else doc)
    return str(p)


OSC = {
    "entry": "oscillator_iso",
    "params": {"mu": 0.1},
    "initial_points": [[0.3, 0.0, 0.0, 0.0, 0.4, 0.0]],
    "horizon": 20.0,
    "tol": 1e-11,
    "suites": ["coincidence"],
}


def test_run_oscillator_coincidence(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["run", write(tmp_path, OSC), "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["passed"]
    vals = [m["value"] for m in rep["suites"]["coincidence"]["metrics"]]
    assert max(vals) < 1e-7
    assert "overall: PASS" in (out / "report.txt").read_text()
    assert "runtime" not in (out / "report.json").read_text()
    assert "total" in json.loads((out / "timings.json").read_text())


def test_trajectory_table_format(tmp_path):
    out = tmp_path / "out"
    cli.main(["run", write(tmp_path, OSC), "--out", str(out)])
    lines = (out / "trajectory_000.csv").read_text().splitlines()
    assert lines[0] == "t,t_tilde,q1,q2,q3,p1,p2,p3,H,H_tilde"
    assert len(lines) == 1 + 512
    rows = list(csv.reader(lines[1:]))
    assert all(len(r) == 10 for r in rows)
    # 17 significant digits round-trip every value
    for tok in rows[5]:
        assert "%.17g" % float(tok) == tok
    # H is conserved on the base flow, H_tilde on the derived flow
    H = [float(r[8]) for r in rows]
    Ht = [float(r[9]) for r in rows]
    assert max(H) - min(H) < 1e-9 and max(Ht) - min(Ht) < 1e-9


def test_reports_byte_identical(tmp_path):
    scen = dict(OSC, initial_points={"seed": 4, "count": 2},
                suites=["coincidence", "conservation", "closed_form"])
    path = write(tmp_path, scen)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", path, "--out", str(a)]) == 0
    assert cli.main(["run", path, "--out", str(b)]) == 0
    for name in ("report.json", "report.txt", "trajectory_000.csv", "trajectory_001.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_seed_override_changes_points(tmp_path):
    scen = dict(OSC, initial_points={"seed": 4, "count": 1}, suites=["closed_form"])
    path = write(tmp_path, scen)
    cli.main(["run", path, "--out", str(tmp_path / "a")])
    cli.main(["run", path, "--out", str(tmp_path / "b"), "--seed", "5"])
    ra = json.loads((tmp_path / "a" / "report.json").read_text())
    rb = json.loads((tmp_path / "b" / "report.json").read_text())
    assert ra["initial_points"] != rb["initial_points"]
    assert rb["scenario"]["initial_points"]["seed"] == 5


def test_unknown_entry_exit_2(tmp_path, capsys):
    rc = cli.main(["run", write(tmp_path, {"entry": "kepler2", "suites": ["coincidence"]})])
    err = capsys.readouterr().err
    assert rc == 2
    assert "field 'entry'" in err and "kepler2" in err and ":2:" in err


@pytest.mark.parametrize("doc,field", [
    ({"entry": "kepler", "params": {"gamma": 1}}, "params.gamma"),
    ({"entry": "kepler", "suites": ["speed"]}, "suites"),
    ({"entry": "kepler", "horizon": -1}, "horizon"),
    ({"entry": "kepler", "initial_points": [[1, 2]]}, "initial_points[0]"),
    ({"entry": "kepler", "initial_points": [[0, 0, 0, 0, 0, 0]]}, "initial_points[0]"),
    ({"entry": "kepler", "suites": ["darboux_product"]}, "suites"),
    ({"entry": "kepler", "colour": "red"}, "colour"),
    ({"entry": "kepler", "tolerances": {"coincidence": 0}}, "tolerances.coincidence"),
])
def test_validation_errors(tmp_path, capsys, doc, field):
    assert cli.main(["run", write(tmp_path, doc)]) == 2
    assert f"field '{field}'" in capsys.readouterr().err


def test_invalid_json_line(tmp_path, capsys):
    path = write(tmp_path, '{\n  "entry": "kepler",\n  "suites": [coincidence]\n}')
    assert cli.main(["run", path]) == 2
    assert ":3:" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 2


def test_identity_rule_scenario(tmp_path):
    doc = {
        "entry": "kepler",
        "rule": "identity",
        "initial_points": [[1.0, 0.0, 0.0, 0.0, 1.1, 0.0]],
        "horizon": 10.0,
        "suites": ["coincidence", "conservation", "closed_form"],
    }
    out = tmp_path / "out"
    assert cli.main(["run", write(tmp_path, doc), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    for name in ("coincidence", "closed_form"):
        assert all(m["value"] == 0.0 for m in rep["suites"][name]["metrics"])
    assert all(m["value"] < 1e-9 for m in rep["suites"]["conservation"]["metrics"])


def test_suite_failure_exit_1(tmp_path, capsys):
    doc = dict(OSC, tolerances={"coincidence": 1e-30})
    assert cli.main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "coincidence: point0.sup_q" in err


def test_env_output_dir(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(cli.ENV_OUT, str(target))
    doc = dict(OSC, suites=["closed_form"])
    assert cli.main(["run", write(tmp_path, doc)]) == 0
    assert (target / "report.json").exists()
    # an explicit --out wins over the environment
    explicit = tmp_path / "explicit"
    assert cli.main(["run", write(tmp_path, doc), "--out", str(explicit)]) == 0
    assert (explicit / "report.json").exists()


def test_darboux_and_orbit_suites(tmp_path):
    doc = {
        "entry": "darboux_pair",
        "initial_points": {"seed": 2, "count": 1},
        "horizon": 10.0,
        "suites": ["darboux_product", "closed_form"],
    }
    assert cli.main(["run", write(tmp_path, doc), "--out", str(tmp_path / "d")]) == 0
    doc = {
        "entry": "relativistic_coulomb",
        "params": {"dim": 2},
        "initial_points": {"seed": 2, "count": 1},
        "suites": ["analytic_orbit"],
    }
    assert cli.main(["run", write(tmp_path, doc, "o.json"), "--out", str(tmp_path / "o")]) == 0


def test_algebra_suite(tmp_path):
    doc = dict(OSC, initial_points={"seed": 1, "count": 5}, suites=["algebra"])
    out = tmp_path / "out"
    assert cli.main(["run", write(tmp_path, doc), "--out", str(out)]) == 0
    labels = [m["label"] for m in json.loads((out / "report.json").read_text())
              ["suites"]["algebra"]["metrics"]]
    assert labels == ["su3.base", "su3.lifted", "homomorphism"]


def test_plot_option(tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "out"
    assert cli.main(["run", write(tmp_path, OSC), "--out", str(out), "--plot"]) == 0
    png = out / "trajectory_000.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def _list_blocks(out):
    blocks, cur = {}, None
    for line in out.splitlines():
        if line and not line.startswith(" ") and not line.endswith("entries"):
            cur = line
            blocks[cur] = []
        elif cur:
            blocks[cur].append(line)
    return {k: "\n".join(v) for k, v in blocks.items()}


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    blocks = _list_blocks(out)
    assert "Eq. (3.24)" in blocks["oscillator_iso"]
    assert "Eq. (4.55)" in blocks["darboux_pair"]
    assert "params:" in blocks["kepler"] and "guards:" in blocks["kepler"]
    assert len(blocks) >= 10
    assert out.strip().endswith(f"{len(blocks)} entries")


def test_list_json(capsys):
    assert cli.main(["list", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {"id", "params", "guards", "tags"} <= set(rows[0])


def test_check_single_suite(capsys):
    assert cli.main(["check", "--suite", "algebra"]) == 0
    out = capsys.readouterr().out
    assert "C5" in out and "C1 " not in out and "C3 " not in out


def test_check_tampered_tolerance(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tolerances": {"C6.rel": 1e-30}}))
    assert cli.main(["check", "--suite", "runge_lenz", "--config", str(cfg)]) == 1
    out = capsys.readouterr().out
    assert "C6" in out and "FAIL" in out and "C6.rel" in out


def test_check_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tolerances": {"C6.relative": 1e-3}}))
    assert cli.main(["check", "--suite", "C6", "--config", str(cfg)]) == 2
    assert "C6.relative" in capsys.readouterr().err
    assert cli.main(["check", "--suite", "nonsense"]) == 2


def test_check_json_output(tmp_path):
    dest = tmp_path / "check.json"
    assert cli.main(["check", "--suite", "C6", "--json", str(dest)]) == 0
    doc = json.loads(dest.read_text())
    assert doc["passed"] and doc["criteria"][0]["id"] == "C6"


def test_atomic_write_leaves_no_temp(tmp_path):
    cli.write_atomic(tmp_path / "x.txt", "hello\n")
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]
