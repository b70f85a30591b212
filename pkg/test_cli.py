#!/usr/bin/env python3
"""Tests for the command-line front end: outputs, config precedence and exit codes."""

import csv
import io
import json
import sys
from pathlib import Path

import pytest

from cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_RESOURCE, main
from noma import BerCurve, Source
from noma.config import parse_config
from noma.curve import CSV_COLUMNS, load_curve

QPSK_PAIR = "ANTENNAS=2\nORDERS=4,4\nGAINS_DB=0,-3\nSEED=5\n"
GOLDEN_COMPARE = Path(__file__).parent / "testdata" / "compare_qpsk_pair.csv"


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("NOMA_TERM_BUDGET", "NOMA_WORKERS", "NOMA_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def qpsk_config(tmp_path):
    path = tmp_path / "qpsk.env"
    path.write_text(QPSK_PAIR)
    return str(path)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_presets(capsys):
    assert main(["presets"]) == EXIT_OK
    out = capsys.readouterr().out
    assert [line.split(":")[0] for line in out.splitlines()] == ["scenario-1", "scenario-2", "scenario-3"]


def test_bound_csv(capsys):
    assert main(["bound", "--preset", "scenario-2", "--ebn0", "0:8:4"]) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == ",".join(CSV_COLUMNS)
    table = rows(captured.out)
    assert len(table) == 9
    assert {row["source"] for row in table} == {"analytical-bound"}
    assert [row["user"] for row in table[:3]] == ["1", "2", "3"]
    assert all(row["bit_errors"] == "" for row in table)
    assert "bound terms" in captured.err


def test_bound_json_and_spectrum(tmp_path, capsys):
    out, spectrum = tmp_path / "bound.json", tmp_path / "spectrum.txt"
    args = ["bound", "--preset", "scenario-1", "--ebn0", "10", "--format", "json"]
    assert main(args + ["--out", str(out), "--spectrum-out", str(spectrum)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    document = json.loads(out.read_text())
    assert [p["user"] for p in document["points"]] == [1, 2]
    text = spectrum.read_text()
    assert text.startswith("# user 1\n")
    assert "# user 2\n" in text


def test_no_spectrum_without_curve(tmp_path, capsys):
    spectrum = tmp_path / "spectrum.txt"
    out = tmp_path / "missing" / "bound.csv"
    args = ["bound", "--preset", "scenario-1", "--ebn0", "10"]
    assert main(args + ["--out", str(out), "--spectrum-out", str(spectrum)]) == EXIT_IO
    assert "error:" in capsys.readouterr().err
    assert not spectrum.exists()
    assert not out.exists()


def test_negative_grid_start(capsys):
    assert main(["bound", "--preset", "scenario-1", "--ebn0=-5:5:5"]) == EXIT_OK
    table = rows(capsys.readouterr().out)
    assert [row["ebn0_db"] for row in table[::2]] == ["-5.0", "0.0", "5.0"]


def test_missing_config(capsys):
    assert main(["bound", "--config", "absent.env"]) == EXIT_CONFIG
    assert "does not exist" in capsys.readouterr().err


def test_missing_scenario_source(capsys):
    assert main(["simulate"]) == EXIT_CONFIG
    assert "--preset" in capsys.readouterr().err


def test_unknown_preset():
    with pytest.raises(SystemExit) as excinfo:
        main(["bound", "--preset", "scenario-9"])
    assert excinfo.value.code == 2


def test_invalid_workers(qpsk_config):
    assert main(["simulate", "--config", qpsk_config, "--workers", "0"]) == EXIT_CONFIG


def test_term_budget_exceeded(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("NOMA_TERM_BUDGET", "10")
    out = tmp_path / "curve.csv"
    assert main(["bound", "--preset", "scenario-2", "--out", str(out)]) == EXIT_RESOURCE
    assert "error:" in capsys.readouterr().err
    assert not out.exists()


def test_flags_override_config(tmp_path, qpsk_config):
    out = tmp_path / "sim.csv"
    args = ["simulate", "--config", qpsk_config, "--ebn0", "4", "--max-symbols", "1000"]
    assert main(args + ["--workers", "1", "--out", str(out)]) == EXIT_OK
    curve = load_curve(out)
    assert [p.ebn0_db for p in curve] == [4.0, 4.0]
    assert [p.bits_sent for p in curve] == [2000, 2000]


def test_compare_pairs_rows(tmp_path, qpsk_config):
    out = tmp_path / "compare.csv"
    args = ["compare", "--config", qpsk_config, "--ebn0", "0:6:3", "--max-symbols", "4000"]
    assert main(args + ["--workers", "1", "--out", str(out)]) == EXIT_OK
    curve = load_curve(out)
    simulated = {(p.ebn0_db, p.user) for p in curve if p.source == Source.SIMULATED}
    bound = {(p.ebn0_db, p.user) for p in curve if p.source == Source.BOUND}
    assert simulated == bound
    assert len(simulated) == 6


def compare_outputs(tmp_path, qpsk_config, worker_counts):
    outputs = []
    for workers in worker_counts:
        out = tmp_path / f"compare-{workers}.csv"
        args = ["compare", "--config", qpsk_config, "--ebn0", "0:4:4", "--min-errors", "20"]
        assert main(args + ["--max-symbols", "100000", "--workers", workers, "--out", str(out)]) == EXIT_OK
        outputs.append(out.read_bytes())
    return outputs


def test_worker_count_byte_identical(tmp_path, qpsk_config):
    single, many = compare_outputs(tmp_path, qpsk_config, ("1", "8"))
    assert single == many


def test_compare_matches_golden(tmp_path, qpsk_config):
    (output,) = compare_outputs(tmp_path, qpsk_config, ("1",))
    if not GOLDEN_COMPARE.exists():
        GOLDEN_COMPARE.parent.mkdir(exist_ok=True)
        GOLDEN_COMPARE.write_bytes(output)
        pytest.skip(f"recorded {GOLDEN_COMPARE.name}; commit it")
    assert output == GOLDEN_COMPARE.read_bytes()


def test_dump_config_round_trip(tmp_path, capsys):
    assert main(["dump-config", "--preset", "scenario-3"]) == EXIT_OK
    path = tmp_path / "scenario3.env"
    path.write_text(capsys.readouterr().out)
    scenario, config = parse_config(path)
    assert scenario.orders == (256, 64, 16, 4)
    assert config.grid[0] == 0.0 and config.grid[-1] == 40.0


def test_dump_config_default_preset(capsys):
    assert main(["dump-config"]) == EXIT_OK
    assert "ORDERS=16,16,16" in capsys.readouterr().out


def test_simulated_json_loads(tmp_path, qpsk_config):
    out = tmp_path / "sim.json"
    args = ["simulate", "--config", qpsk_config, "--ebn0", "2", "--max-symbols", "500"]
    assert main(args + ["--workers", "1", "--format", "json", "--out", str(out)]) == EXIT_OK
    assert isinstance(load_curve(out), BerCurve)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
