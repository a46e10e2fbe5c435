import pytest
from typer.testing import CliRunner

from scripts.qkd_sim import EXIT_ABORTED, EXIT_CONFIG, EXIT_OK, app

runner = CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "short.ini"
    path.write_text(
        "[fiber]\nlength = 25\n\n[run]\nmin_detections = 2000\nduration = 200\n",
        encoding="utf-8",
    )
    return path


def _invoke(*args: str):
    return runner.invoke(app, list(args))


def test_simulate_writes_outputs(config_file, tmp_path):
    out = tmp_path / "out"
    result = _invoke("simulate", "-c", str(config_file), "-n", "2000000", "-o", str(out))
    assert result.exit_code == EXIT_OK, result.output
    for name in ("transcript.csv", "report.csv", "config.ini", "key.hex"):
        assert (out / name).is_file()
    header = (out / "transcript.csv").read_text().splitlines()[0]
    assert header.startswith("index,alice_bit,alice_basis")


def test_simulate_is_deterministic(config_file, tmp_path):
    for name in ("a", "b"):
        args = ("simulate", "-c", str(config_file), "-n", "1000000", "-s", "4")
        assert _invoke(*args, "-o", str(tmp_path / name)).exit_code == EXIT_OK
    for name in ("transcript.csv", "report.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_abort(tmp_path):
    config = tmp_path / "noisy.ini"
    config.write_text("[fiber]\nlength = 25\n[link]\ne_opt = 0.3\n", encoding="utf-8")
    result = _invoke("simulate", "-c", str(config), "-n", "500000", "-o", str(tmp_path))
    assert result.exit_code == EXIT_ABORTED
    assert not (tmp_path / "key.hex").exists()


def test_invalid_config(tmp_path):
    config = tmp_path / "bad.ini"
    config.write_text("[fiber]\nlength = -5\n", encoding="utf-8")
    result = _invoke("simulate", "-c", str(config), "-o", str(tmp_path))
    assert result.exit_code == EXIT_CONFIG
    assert "fiber.length" in result.output


def test_missing_config(tmp_path):
    result = _invoke("sweep", "-c", str(tmp_path / "absent.ini"), "-o", str(tmp_path))
    assert result.exit_code == EXIT_CONFIG


def test_sweep(config_file, tmp_path):
    result = _invoke("sweep", "-c", str(config_file), "-l", "25,50", "-o", str(tmp_path))
    assert result.exit_code == EXIT_OK, result.output
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("length_km,pulses,detections")
    assert len(lines) == 3


def test_stability_without_calibration(config_file, tmp_path):
    result = _invoke(
        "stability", "-c", str(config_file), "-d", "100", "--no-calibrate", "-o", str(tmp_path)
    )
    assert result.exit_code == EXIT_OK, result.output
    assert (tmp_path / "stability.csv").is_file()
    assert (tmp_path / "stability_uncorrected.csv").is_file()
    assert "[policy]\n" in (tmp_path / "config.ini").read_text()
    assert "enabled = false" in (tmp_path / "config.ini").read_text()


def test_field(config_file, tmp_path):
    result = _invoke("field", "-c", str(config_file), "-k", "2", "-o", str(tmp_path))
    assert result.exit_code == EXIT_OK, result.output
    assert len((tmp_path / "field.csv").read_text().splitlines()) == 3


def test_otp_roundtrip(tmp_path):
    key = tmp_path / "key.hex"
    key.write_text("a5" * 16 + "\n", encoding="ascii")
    plain = tmp_path / "plain.txt"
    plain.write_bytes(b"interferometer")
    cipher, back = tmp_path / "cipher.bin", tmp_path / "back.txt"
    assert _invoke("otp", str(plain), "--key", str(key), "--output", str(cipher)).exit_code == 0
    assert cipher.read_bytes() != plain.read_bytes()
    assert _invoke("otp", str(cipher), "--key", str(key), "--output", str(back)).exit_code == 0
    assert back.read_bytes() == plain.read_bytes()


def test_otp_short_key(tmp_path):
    key = tmp_path / "key.hex"
    key.write_text("ff\n", encoding="ascii")
    plain = tmp_path / "plain.txt"
    plain.write_bytes(b"too long")
    result = _invoke("otp", str(plain), "--key", str(key), "--output", str(tmp_path / "x"))
    assert result.exit_code == EXIT_CONFIG
