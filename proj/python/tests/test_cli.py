import json
import subprocess

import pytest

from conftest import DATA


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *args], capture_output=True, text=True, cwd=cwd)


# (subcommand words, scenario, output schema or None for CSV outputs)
CASES = [
    (["coherence"], "identical_rect.json", None),
    (["homdip"], "identical_rect.json", None),
    (["visibility"], "identical_rect.json", "visibility"),
    (["vismap"], "vismap.json", None),
    (["optimize-rate"], "rate.json", "optimize_rate"),
    (["pulsed-rate"], "pulsed.json", "pulsed_rate"),
    (["pass-swaps"], "pass.json", "pass_swaps"),
    (["oracle-check"], "oracle.json", "oracle_report"),
]


@pytest.mark.parametrize("words,scenario,schema", CASES, ids=[" ".join(c[0]) for c in CASES])
def test_outputs_validate_and_repeat(cli, validate, tmp_path, words, scenario, schema):
    validate(json.loads((DATA / scenario).read_text()), "scenario")
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        r = run(cli, *words, "--scenario", str(DATA / scenario), "--out", str(out), "--threads", "2")
        assert r.returncode == 0, r.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    if schema:
        validate(json.loads(outs[0]), schema)


def test_homdip_normalized_plateau(cli, tmp_path):
    out = tmp_path / "dip.csv"
    assert run(cli, "homdip", "--scenario", str(DATA / "identical_rect.json"), "--out", str(out)).returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "tau14_ps,tau_ps,value,normalized"
    far = [l.split(",") for l in lines[1:] if l.startswith("40,") and abs(float(l.split(",")[1])) == 600]
    assert far and all(abs(float(r[3]) - 1) < 0.02 for r in far)


def test_tags_round_trip(cli, validate, tmp_path):
    doc = json.loads((DATA / "tags.json").read_text())
    doc["tags"]["duration_ps"] = 2e9
    doc["tags"]["tag_csv"] = "t.csv"
    (tmp_path / "s.json").write_text(json.dumps(doc))
    validate(doc, "scenario")
    r = run(cli, "tags", "simulate", "--scenario", "s.json", "--out", "t.csv", "--seed", "5", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    first = (tmp_path / "t.csv").read_bytes()
    run(cli, "tags", "simulate", "--scenario", "s.json", "--out", "t.csv", "--seed", "5", cwd=tmp_path)
    assert (tmp_path / "t.csv").read_bytes() == first
    r = run(cli, "tags", "count", "--scenario", "s.json", "--out", "c.json", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    counts = json.loads((tmp_path / "c.json").read_text())
    validate(counts, "counts")
    assert counts["corrected"] == counts["raw"] - counts["shifted_2"] - counts["shifted_3"]


def test_fbg_fit_output(cli, validate, tmp_path):
    doc = {"fbg_fit": {"measured_csv": str(DATA / "fbg" / "b_idler_measured.csv"), "restarts": 0}}
    (tmp_path / "s.json").write_text(json.dumps(doc))
    r = run(cli, "fbg", "fit", "--scenario", str(tmp_path / "s.json"), "--out", str(tmp_path / "f.json"))
    assert r.returncode == 0, r.stderr
    fit = json.loads((tmp_path / "f.json").read_text())
    validate(fit, "fbg_fit")
    assert fit["residual"] <= fit["seed_residual"]
    assert fit["fwhm_pm"] == pytest.approx(41.0, rel=0.01)


@pytest.mark.parametrize(
    "doc,code,kind",
    [
        ({"windws": {}}, 2, "validation"),
        ({"windows": {"tau14_ps": 80, "tau23_ps": 280}}, 2, "unreliable_plateau"),
        ({"grid": {"n_points": 101}}, 3, "resolution"),
    ],
)
def test_error_bodies(cli, validate, tmp_path, doc, code, kind):
    (tmp_path / "s.json").write_text(json.dumps(doc))
    r = run(cli, "visibility", "--scenario", str(tmp_path / "s.json"), "--out", str(tmp_path / "o.json"))
    assert r.returncode == code
    body = json.loads(r.stderr.strip().splitlines()[-1])
    validate(body, "error")
    assert body["error"] == kind


def test_usage_error(cli, validate):
    r = run(cli, "visibility")
    assert r.returncode == 2
    validate(json.loads(r.stderr.strip().splitlines()[-1]), "error")


def test_example_scenarios_validate(validate):
    for p in sorted(DATA.glob("*.json")):
        validate(json.loads(p.read_text()), "scenario")
