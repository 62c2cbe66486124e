import json

import pytest
from click.testing import CliRunner

from mswitch.cli import main


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)
    return go


def test_generate_bits_and_descriptor(run, tmp_path):
    out = tmp_path / "g.json"
    r = run("generate", "ac0", "--seed", "0", "--out", str(out))
    assert r.exit_code == 0
    assert r.output.strip() == "010001100011"
    doc = json.loads(out.read_text())
    assert doc["seed_bits"] == 312
    assert doc["config"]["command"] == "generate" and doc["config"]["version"]


def test_generate_hex(run):
    r = run("generate", "f2", "--seed", "0", "--format", "hex")
    assert r.exit_code == 0 and len(r.output.strip()) == 3


def test_invalid_class_is_usage_error(run):
    assert run("generate", "tc0").exit_code == 2


def test_bad_n_is_usage_error(run):
    assert run("generate", "ac0", "--n", "0").exit_code == 2


def test_verify_usage_errors(run):
    assert run("verify", "everything").exit_code == 2
    assert run("verify", "switching", "--trials", "0").exit_code == 2


def test_verify_encdec_csv(run, tmp_path):
    out = tmp_path / "v.csv"
    r = run("verify", "encdec", "--format", "csv", "--out", str(out))
    assert r.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ") and lines[1] == "name,passed,elapsed_s"


def test_config_file_and_flag_precedence(run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5, "count": 2, "format": "bits"}))
    a = run("generate", "ac0", "--config", str(cfg))
    b = run("generate", "ac0", "--config", str(cfg), "--seed", "0")
    assert len(a.output.split()) == 2
    assert b.output.split()[0] == "010001100011"


def test_bad_config_file(run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run("generate", "ac0", "--config", str(cfg)).exit_code == 2


def test_sweep_csv(run):
    r = run("sweep", "--axis", "t=2,3,4", "--trials", "300", "--jobs", "1")
    assert r.exit_code == 0
    lines = r.output.splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1].split(",")[:3] == ["row", "n", "M"]
    assert len(lines) == 2 + 3
    again = run("sweep", "--axis", "t=2,3,4", "--trials", "300", "--jobs", "1")
    assert again.output == r.output


def test_sweep_bad_axis(run):
    assert run("sweep", "--axis", "t").exit_code == 2
    assert run("sweep", "--axis", "color=red").exit_code == 2
