import subprocess
import sys
from importlib import resources
from types import SimpleNamespace

import pytest

from polarstack import cli
from polarstack.channel import TrialRecord
from polarstack.core import build_code_config


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_noiseless_sc_row(capsys):
    code, out = run(["--N", "8", "--K", "4", "--decoder", "sc", "--noiseless", "--frames", "10"], capsys)
    lines = out.out.strip().splitlines()
    assert code == cli.EXIT_OK and len(lines) == 2
    assert lines[0] == ",".join(cli.CSV_HEADER)
    row = dict(zip(cli.CSV_HEADER, lines[1].split(",")))
    assert float(row["fer"]) == 0.0 and int(row["frames"]) == 10


def test_sweep_to_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _ = run(["--N", "64", "--K", "32", "--decoder", "fsscs-rm", "--list", "4", "--ebno", "0", "3", "0.5",
                   "--frames", "64", "--min-frames", "64", "--output", str(path)], capsys)
    assert code == 0
    rows = cli.read_csv(path)
    assert [r["ebno_db"] for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    assert len(path.read_text().splitlines()) == 8
    assert all(r["frames"] == 64 for r in rows)


def test_golden_mode_passes(capsys):
    code, out = run(["--mode", "golden"], capsys)
    assert code == cli.EXIT_OK
    assert out.out.count("0 mismatches") == len(cli.GOLDEN_FILES)


def test_golden_mode_detects_tampering(tmp_path, monkeypatch, capsys):
    data = resources.files("polarstack.data")
    for name in cli.GOLDEN_FILES:
        text = data.joinpath(name).read_text(encoding="utf-8")
        if name == cli.GOLDEN_FILES[0]:
            lines = text.splitlines()
            k = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
            msg, cw = lines[k].split(",")
            lines[k] = f"{msg},{format(int(cw, 16) ^ 1, '0{}x'.format(len(cw)))}"
            text = "\n".join(lines) + "\n"
        (tmp_path / name).write_text(text, encoding="utf-8")
    monkeypatch.setattr(cli, "resources", SimpleNamespace(files=lambda _pkg: tmp_path))
    code, out = run(["--mode", "golden"], capsys)
    assert code == cli.EXIT_DIVERGED and "1 mismatches" in out.out


def test_differential_mode(capsys):
    code, out = run(["--mode", "differential", "--N", "32", "--K", "16", "--crc", "none", "--list", "4",
                     "--frames", "60"], capsys)
    assert code == cli.EXIT_OK and "no divergence" in out.out


@pytest.mark.parametrize("argv", [
    ["--decoder", "bp"],
    ["--N", "12"],
    ["--N", "8", "--K", "9"],
    ["--list", "0"],
    ["--ebno", "1", "2", "0"],
    ["--workers", "0", "--N", "8", "--K", "4"],
    ["--frames"],
])
def test_bad_flags_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == cli.EXIT_USAGE


def test_fast_decoder_with_forced_systematic_flag_runs(capsys):
    code, out = run(["--N", "16", "--K", "8", "--decoder", "fssc", "--noiseless", "--frames", "5"], capsys)
    assert code == 0 and out.out.count("\n") == 2


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "r.csv"
    assert cli.write_csv([], path) == ",".join(cli.CSV_HEADER) + "\n"
    assert cli.read_csv(path) == []
    rec = TrialRecord(1.5, frames=1000, frame_errors=7, bit_errors=33, info_bits_per_frame=512,
                      payload_bits_per_frame=488, total_iterations=1_100_000, total_path_switches=42,
                      decode_wall_time=0.37)
    cli.write_csv([rec], path)
    (row,) = cli.read_csv(path)
    assert row["frames"] == 1000 and row["frame_errors"] == 7 and row["bit_errors"] == 33
    assert row["fer"] == rec.fer and row["ber"] == rec.ber and row["ebno_db"] == 1.5
    assert row["avg_iterations"] == rec.avg_iterations and row["avg_path_switches"] == rec.avg_path_switches
    assert row["throughput_info_bps_per_worker"] == rec.info_throughput


def test_csv_write_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        cli.write_csv([], bad)


def test_unwritable_output_exits_nonzero(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    proc = subprocess.run([sys.executable, "-m", "polarstack.cli", "--N", "8", "--K", "4", "--noiseless",
                           "--frames", "1", "--output", str(bad)], capture_output=True, text=True)
    assert proc.returncode != 0 and str(bad) in proc.stderr


def test_ebno_points():
    assert cli.ebno_points(0, 3, 0.5) == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    assert cli.ebno_points(2, 2, 0.5) == [2.0]
    assert cli.ebno_points(3, 2, 0.5) == []


def test_crc_auto_selection():
    args = cli.build_parser().parse_args(["--N", "64", "--K", "32"])
    assert cli._config(args).crc_len == 24
    args = cli.build_parser().parse_args(["--N", "8", "--K", "4"])
    assert cli._config(args).crc_len == 0
    args = cli.build_parser().parse_args(["--N", "64", "--K", "32", "--crc", "none"])
    assert cli._config(args) == build_code_config(64, 32)
