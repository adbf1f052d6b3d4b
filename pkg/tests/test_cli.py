from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from domspec import fixture_path
from domspec.cli import main

DATA = Path(__file__).parent / "data"
EXT = str(fixture_path("ext-n.ttl"))
RDS = str(fixture_path("hotel-rds.ttl"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_vocab_info(capsys):
    code, out, _ = run(capsys, "vocab-info", "--vocab", "bundled")
    assert code == 0
    assert "types: 614" in out and "properties: 905" in out and "datatypes: 10" in out
    assert "counting convention:" in out


def test_check_ok_and_kind(capsys):
    code, out, _ = run(capsys, "check", "--vocab", "bundled", "--ext", EXT, RDS)
    assert code == 0 and "Hotel: RDS" in out


def test_check_findings(capsys):
    bad = str(DATA / "grammar" / "invalid" / "min-count-2.ttl")
    code, out, _ = run(capsys, "check", "--vocab", "bundled", bad)
    assert code == 1 and "[MinCount]" in out


def test_check_forced_kind(capsys):
    code, out, _ = run(capsys, "check", "--vocab", "bundled", "--ext", EXT, "--kind", "sds", RDS)
    assert code == 1 and "error" in out


def test_missing_file_is_input_error(capsys, tmp_path):
    code, _, err = run(capsys, "check", "--vocab", "bundled", str(tmp_path / "nope.ttl"))
    assert code == 2 and "cannot read" in err
    code, _, err = run(capsys, "vocab-info", "--vocab", str(tmp_path / "nope.ttl"))
    assert code == 2
    code, _, err = run(capsys, "vocab-info")
    assert code == 2 and "--vocab" in err


def test_syntax_error_is_input_error(capsys, tmp_path):
    broken = tmp_path / "broken.ttl"
    broken.write_text("@prefix s: <http://schema.org/> .\ns:a s:b ;; .\n")
    code, _, err = run(capsys, "check", "--vocab", "bundled", str(broken))
    assert code == 2 and "broken.ttl" in err


def test_apply_writes_stable_outputs(capsys, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    code, out, _ = run(capsys, "apply", "--vocab", "bundled", "--ext", EXT, "--out", str(out1), RDS)
    assert code == 0 and "(Hotel, containsPlace) -> HotelRoomProduct" in out
    assert run(capsys, "apply", "--vocab", "bundled", "--ext", EXT, "--out", str(out2), RDS)[0] == 0
    files = sorted(p.name for p in out1.iterdir())
    assert files == ["Hotel.json", "Hotel.md", "Hotel.ttl"]
    for name in files:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    assert json.loads((out1 / "Hotel.json").read_text())["kind"] == "RDSP"


def test_apply_rejects_bad_operator(capsys, tmp_path):
    bad = str(DATA / "grammar" / "invalid" / "unknown-path.ttl")
    code, _, err = run(capsys, "apply", "--vocab", "bundled", "--out", str(tmp_path), bad)
    assert code == 1 and "[SDOProperty]" in err
    assert list(tmp_path.iterdir()) == []


def test_docgen(capsys, tmp_path):
    code, _, _ = run(capsys, "docgen", "--vocab", "bundled", "--ext", EXT, "--out", str(tmp_path), RDS)
    assert code == 0
    assert [p.name for p in tmp_path.iterdir()] == ["Hotel.md"]
    assert "[Location](#Hotel.location)" in (tmp_path / "Hotel.md").read_text()


def test_validate_exit_codes(capsys, tmp_path):
    inst = DATA / "instances"
    code, out, _ = run(capsys, "validate", "--vocab", "bundled", "--ext", EXT, RDS, str(inst / "conforming.ttl"))
    assert code == 0 and "conforms: true" in out
    report = tmp_path / "report.ttl"
    code, out, _ = run(capsys, "validate", "--vocab", "bundled", "--ext", EXT, "--report", str(report),
                       RDS, str(inst / "missing-required.ttl"))
    assert code == 1 and "MissingRequired" in out
    assert "sh:ValidationReport" in report.read_text()
    code, _, _ = run(capsys, "validate", "--vocab", "bundled", "--ext", EXT, RDS, str(inst / "extra-property.ttl"))
    assert code == 0
    code, _, _ = run(capsys, "validate", "--vocab", "bundled", "--ext", EXT, "--closedness", "violation",
                     RDS, str(inst / "extra-property.ttl"))
    assert code == 1


def test_validate_without_targets(capsys, tmp_path):
    data = tmp_path / "museum.ttl"
    data.write_text('<http://example.org/m> a <http://schema.org/Museum> .\n')
    code, out, _ = run(capsys, "validate", "--vocab", "bundled", "--ext", EXT, RDS, str(data))
    assert code == 0 and "0 targets" in out


def test_config_file_with_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"vocab": "bundled", "ext": [EXT], "closedness": "violation"}))
    extra = str(DATA / "instances" / "extra-property.ttl")
    assert run(capsys, "validate", "--config", str(cfg), RDS, extra)[0] == 1
    assert run(capsys, "validate", "--config", str(cfg), "--closedness", "warning", RDS, extra)[0] == 0
    cfg.write_text(json.dumps({"vocab": "bundled", "colour": "red"}))
    code, _, err = run(capsys, "vocab-info", "--config", str(cfg))
    assert code == 2 and "colour" in err


@pytest.mark.parametrize("module", ["domspec"])
def test_module_entry_point(module):
    proc = subprocess.run([sys.executable, "-m", module, "vocab-info", "--vocab", "bundled-excerpt"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "types: 42" in proc.stdout
