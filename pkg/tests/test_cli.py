import json
import shutil
from pathlib import Path

import pytest

from main import main
from src.algebra.lattices import PRESET_DIR

GOLDEN = Path(__file__).parent / "golden" / "classify_table.json"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for var in ("QCOHOM_PRESET_DIR", "QCOHOM_GROUP_CAP", "QCOHOM_LOG_LEVEL"):
        monkeypatch.delenv(var, raising=False)


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--preset", "rectangular_mirror", "--format", "json")
    assert code == 0
    (record,) = json.loads(out)
    assert record["lattice"] == "rectangular_mirror"
    assert record["invariant_factors"] == [2]
    assert record["fingerprints"] == [["1/2"]]
    assert record["expressibility"] == ["k[g]"]
    assert "fast_path" not in record


def test_classify_matches_golden_table(capsys):
    code, out, _ = run(capsys, "classify", "--all", "--format", "json")
    assert code == 0
    got = {r["lattice"]: r["invariant_factors"] for r in json.loads(out)}
    assert got == json.loads(GOLDEN.read_text())


def test_classify_two_d_table(capsys):
    code, out, _ = run(capsys, "classify", "--preset", "D4_zeta4", "--preset", "rectangular", "--two-d")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split()[:3] == ["lattice", "group", "order"]
    assert lines[2].startswith("D4_zeta4")
    assert "(2,2)" in lines[3]


def test_invariants_csv(capsys):
    code, out, _ = run(capsys, "invariants", "--preset", "rectangular_mirror", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["cycle,class,coordinates,value", "0,0,0,0/1", "0,1,1,1/2"]


def test_invariants_single_class_json(capsys):
    code, out, _ = run(capsys, "invariants", "--preset", "rectangular", "--class", "3", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["invariant_factors"] == [2, 2]
    assert {p["class"] for p in data["pairings"]} == {3}
    assert len(data["cycles"]) == 2


def test_extinctions_csv(capsys):
    code, out, _ = run(capsys, "extinctions", "--preset", "rectangular_mirror", "--kmax", "2", "--format", "csv")
    assert code == 0
    assert out == "k0,k1,witness\n-1,0,m\n1,0,m\n"


def test_trivial_class_has_no_extinctions(capsys):
    code, out, _ = run(capsys, "extinctions", "--preset", "rectangular_mirror", "--class", "0", "--format", "csv")
    assert code == 0
    assert out == "k0,k1,witness\n"


def test_diffract_is_reproducible(capsys, tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (first, second):
        code, out, _ = run(capsys, "diffract", "--preset", "D4_zeta4", "--kmax", "3", "--seed", "42",
                           "--format", "csv", "--out", str(path))
        assert code == 0
        assert out == ""
    assert first.read_bytes() == second.read_bytes()
    header = first.read_text().splitlines()[0]
    assert header == "k0,k1,x0,x1,intensity,extinct,witness,phase"
    assert not list(tmp_path.glob("*.tmp"))


def test_diffract_json(capsys):
    code, out, _ = run(capsys, "diffract", "--preset", "rectangular_mirror", "--kmax", "1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["class"] == 1
    spots = {tuple(s["k"]): s for s in data["spots"]}
    assert len(spots) == 9
    assert spots[(1, 0)]["extinct"] and spots[(1, 0)]["witness"] == "m"
    assert spots[(0, 0)]["phase"] == "0/1"
    assert spots[(0, 0)]["intensity"] == 1.0


def test_diffract_needs_an_embedding(capsys):
    code, _, err = run(capsys, "diffract", "--preset", "I212121")
    assert code == 3
    assert "NoEmbedding" in err


def test_bad_json_reports_line(capsys, tmp_path):
    group = tmp_path / "group.json"
    group.write_text('{\n  "rank": 2,\n  "generators": [\n')
    lattice = tmp_path / "lattice.json"
    lattice.write_text('{"rank": 2}')
    code, _, err = run(capsys, "classify", "--group", str(group), "--lattice", str(lattice))
    assert code == 2
    assert f"{group}:" in err


def test_descriptor_files(capsys, tmp_path):
    group = tmp_path / "group.json"
    group.write_text(json.dumps({"rank": 2, "generators": [{"label": "m", "matrix": [[1, 0], [0, -1]]}]}))
    lattice = tmp_path / "lattice.json"
    lattice.write_text(json.dumps({"rank": 2, "name": "glide"}))
    code, out, _ = run(capsys, "classify", "--group", str(group), "--lattice", str(lattice), "--format", "json")
    assert code == 0
    assert json.loads(out)[0]["invariant_factors"] == [2]


@pytest.mark.parametrize("argv", [
    ["classify", "--preset", "no_such_lattice"],
    ["classify", "--group", "group.json"],
    ["classify"],
    ["invariants", "--preset", "rectangular_mirror", "--class", "7"],
    ["extinctions", "--preset", "oblique", "--kmax", "-1"],
    ["diffract", "--preset", "oblique", "--preset", "rectangular"],
    ["frobnicate"],
    ["classify", "--format", "xml"],
])
def test_input_errors_exit_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_bad_environment_exits_two(capsys, monkeypatch):
    monkeypatch.setenv("QCOHOM_GROUP_CAP", "bad")
    code, _, err = run(capsys, "classify", "--preset", "oblique")
    assert code == 2
    assert "QCOHOM_GROUP_CAP" in err


def test_preset_dir_from_environment(capsys, monkeypatch, tmp_path):
    shutil.copy(PRESET_DIR / "rectangular_mirror.json", tmp_path / "only.json")
    monkeypatch.setenv("QCOHOM_PRESET_DIR", str(tmp_path))
    code, out, _ = run(capsys, "classify", "--all", "--format", "json")
    assert code == 0
    assert [r["lattice"] for r in json.loads(out)] == ["only"]


def test_selfcheck_passes(capsys):
    code, out, _ = run(capsys, "selfcheck", "--preset", "rectangular_mirror", "--preset", "I212121",
                       "--preset", "D4_zeta4", "--preset", "trigonal_pair", "--format", "json")
    assert code == 0
    results = json.loads(out)
    assert all(r["passed"] for r in results)
    assert {"duality", "expected", "oracle", "exactness", "cup_cap"} <= {r["check"] for r in results}


def test_selfcheck_catches_a_flipped_sign(capsys):
    code, out, _ = run(capsys, "selfcheck", "--preset", "trigonal_pair", "--flip-pairing-sign", "--format", "json")
    assert code == 1
    failed = [r for r in json.loads(out) if not r["passed"]]
    assert [r["check"] for r in failed] == ["cup_cap"]


def test_selfcheck_catches_a_bad_modulus(capsys):
    code, out, _ = run(capsys, "selfcheck", "--preset", "rectangular_mirror", "--modulus-override", "1",
                       "--format", "json")
    assert code == 1
    failed = [r for r in json.loads(out) if not r["passed"]]
    assert failed and all(r["check"].startswith("torsion") for r in failed)
    assert "ModulusTooSmall" in failed[0]["detail"]
