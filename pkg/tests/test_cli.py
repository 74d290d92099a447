import numpy as np
import pytest

from framelet.cli import ExperimentConfig, parse_levels, run_command
from framelet.errors import FormatError, InputError
from framelet.io import encode_pgm, read_grid, read_manifest, write_grid


def rows(path):
    return path.read_text().splitlines()


def test_construct_and_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_command(["construct", "--matrix", "1,1;1,-1", "--grid", "64", "--out", str(out)]) == 0
    for name in ("phi.frmg", "psi.frmg", "manifest", "report.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    phi, grid = read_grid(a / "phi.frmg")
    assert phi.shape == (64, 64) and grid is not None
    man = read_manifest(a / "manifest")
    assert man["matrix"] == "1,1;1,-1" and man["dim"] == "2"
    assert rows(a / "report.csv")[1].startswith("calderon,")


def test_verify_from_manifest(tmp_path):
    out = tmp_path / "c"
    assert run_command(["construct", "--matrix", "2,0;0,2", "--grid", "128", "--out", str(out)]) == 0
    man = str(out / "manifest")
    assert run_command(["verify", "tight", "--manifest", man, "--levels", "0:2"]) == 0
    assert "nep:special" in (out / "report.csv").read_text()
    assert run_command(["verify", "mra", "--manifest", man, "--levels", "0:1"]) == 0
    assert run_command(["verify", "dual", "--manifest", man, "--mode", "stationary",
                        "--levels", "0"]) == 0
    assert run_command(["verify", "oep", "--manifest", man, "--out", str(tmp_path / "o")]) == 0


def test_verify_failing_tolerance_exit3(tmp_path):
    assert run_command(["verify", "tight", "--matrix", "2,0;0,2", "--grid", "128",
                        "--levels", "0", "--tol", "1e-30", "--out", str(tmp_path)]) == 3
    assert ",false" in (tmp_path / "report.csv").read_text()


def test_directional_command(tmp_path):
    assert run_command(["directional", "--m", "4", "--rho", "0.5", "--levels", "0:2",
                        "--grid", "128", "--save", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "report.csv").read_text()
    assert "count[j=2]" in text and "split[j=2]" in text
    assert (tmp_path / "member_j2_l7.frmg").exists()


def test_filterbank_commands(tmp_path):
    assert run_command(["filterbank", "--haar", "--grid", "256"]) == 0
    assert run_command(["filterbank", "--matrix", "2", "--grid", "256"]) == 0


def test_lattice_command(capsys):
    assert run_command(["lattice", "--matrix", "1,1;1,-1"]) == 0
    out = capsys.readouterr().out
    assert "det_abs=2" in out and "expansive=true" in out
    assert run_command(["lattice", "--matrix", "1,0;0,2"]) == 3


def test_transform_roundtrip_via_files(tmp_path, rng):
    img = rng.integers(0, 256, size=(64, 64)).astype(float)
    (tmp_path / "in.pgm").write_bytes(encode_pgm(img))
    bands = tmp_path / "bands"
    assert run_command(["transform", "analyze", "--image", str(tmp_path / "in.pgm"),
                        "--family", "directional", "--levels", "2", "--out", str(bands)]) == 0
    man = read_manifest(bands / "manifest")
    assert int(man["bands"]) == len(man["files"].split())
    assert run_command(["transform", "synthesize", "--manifest", str(bands / "manifest"),
                        "--out", str(tmp_path / "y.frmg"), "--pgm", str(tmp_path / "y.pgm")]) == 0
    y, _ = read_grid(tmp_path / "y.frmg")
    np.testing.assert_allclose(y, img, atol=1e-9)
    assert (tmp_path / "y.pgm").read_bytes() == encode_pgm(img)


def test_transform_roundtrip_action(tmp_path, rng):
    write_grid(tmp_path / "x.frmg", rng.standard_normal((64, 64)))
    assert run_command(["transform", "roundtrip", "--input", str(tmp_path / "x.frmg")]) == 0


def test_exit_codes(tmp_path):
    assert run_command([]) == 2
    assert run_command(["construct", "--matrix", "0.5", "--out", str(tmp_path)]) == 2
    assert run_command(["construct", "--lambda0", "1.5", "--out", str(tmp_path)]) == 2
    assert run_command(["transform", "roundtrip", "--input", str(tmp_path / "nope.frmg")]) == 4
    (tmp_path / "bad.cfg").write_text("kind=stationary\nwhatever=1\n")
    assert run_command(["verify", "tight", "--config", str(tmp_path / "bad.cfg")]) == 4
    assert run_command(["transform", "synthesize"]) == 2
    write_grid(tmp_path / "small.frmg", np.zeros((16, 16)))
    assert run_command(["transform", "roundtrip", "--input", str(tmp_path / "small.frmg")]) == 2


def test_config_roundtrip_and_validation():
    cfg = ExperimentConfig(kind="directional", m=6, rho=1 / 3)
    assert ExperimentConfig.from_mapping({k: str(v) for k, v in cfg.entries().items()}) == cfg
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({"bogus": "1"})
    with pytest.raises(InputError):
        ExperimentConfig.from_mapping({"grid": "x"})
    with pytest.raises(InputError):
        ExperimentConfig(rho=1.5)
    assert parse_levels("1:3") == [1, 2, 3]
    assert parse_levels("2") == [2]
    with pytest.raises(InputError):
        parse_levels("3:1")
