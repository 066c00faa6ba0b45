import json

import pytest

from patails.cli import main, table1_config
from patails.config import LoopMode


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "patails" in capsys.readouterr().out


def test_every_subcommand_has_help():
    for sub in ["simulate", "zipf", "zipf-ingest", "moments", "spectral", "extreme", "table1", "diagnose"]:
        with pytest.raises(SystemExit) as exc:
            main([sub, "--help"])
        assert exc.value.code == 0


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_moments_zero_exponents_prints_one(capsys):
    code, out, _ = run_cli(capsys, "moments", "--k", "0,0")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == 1.0


def test_moments_bad_k_exits_2(capsys):
    code, _, err = run_cli(capsys, "moments", "--k", "1,burp")
    assert code == 2
    assert "config error" in err


def test_moments_with_verification(capsys):
    code, out, _ = run_cli(
        capsys, "moments", "--k", "1", "--verify", "2000", "--verify-n", "500", "--seed", "5"
    )
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["mc_estimate"] - payload["value"]) <= 4 * payload["mc_se"]


def test_extreme_threshold_zero_full_event(capsys):
    code, out, _ = run_cli(
        capsys, "extreme", "--t", "0", "--event", "full", "--reps", "200", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert float(payload["empirical"]) == 1.0
    assert payload["approx"] == ""  # approximation undefined below t = 1


def test_extreme_csv_row(capsys):
    code, out, _ = run_cli(
        capsys, "extreme", "--t", "30", "--reps", "1e3", "--r", "3",
        "--l", "1", "--beta", "1", "--seed", "2",
    )
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    header, row = lines[0].split(","), lines[1].split(",")
    assert header[:4] == ["l", "beta", "alpha", "t"]
    assert len(header) == len(row)


def test_spectral_json(capsys):
    code, out, _ = run_cli(
        capsys, "spectral", "--r", "3", "--event", "coord:1:0.5", "--method", "quad",
        "--l", "1", "--beta", "1", "--loop-mode", "model0", "--initial", "1",
    )
    assert code == 0
    payload = json.loads(out)
    assert 0.0 < payload["value"] < 1.0
    assert payload["method"] == "quadrature"


def test_simulate_csv_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (out1, out2):
        assert main([
            "simulate", "--reps", "200", "--r", "3", "--seed", "11",
            "--alpha", "1.5", "--out", str(path),
        ]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0].startswith("# patails")
    assert lines[1].startswith("# config")
    assert lines[2].split(",")[:2] == ["index", "N"]
    assert len(lines) == 3 + 200


def test_seed_env_and_flag_precedence(tmp_path, monkeypatch):
    env_out = tmp_path / "env.csv"
    flag_out = tmp_path / "flag.csv"
    monkeypatch.setenv("SEED", "99")
    assert main(["simulate", "--reps", "50", "--r", "2", "--out", str(env_out)]) == 0
    assert main(["simulate", "--reps", "50", "--r", "2", "--seed", "99", "--out", str(flag_out)]) == 0
    assert env_out.read_bytes() == flag_out.read_bytes()


def test_config_file_with_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.toml"
    cfgfile.write_text('[model]\nl = 3\nbeta = 0.5\n[stopping]\nalpha = 2.0\n')
    code, out, _ = run_cli(
        capsys, "moments", "--k", "1", "--config", str(cfgfile), "--beta", "1.0"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["model"]["l"] == 3
    assert payload["config"]["model"]["beta"] == 1.0  # flag wins


def test_bad_config_key_exits_2(tmp_path, capsys):
    code, _, err = run_cli(capsys, "moments", "--k", "1", "--initial", "-1.0")
    assert code == 2
    assert "initial weights" in err
    cfgfile = tmp_path / "bad.toml"
    cfgfile.write_text('[model]\nloop_mode = "model7"\n')
    code, _, err = run_cli(capsys, "moments", "--k", "1", "--config", str(cfgfile))
    assert code == 2
    assert "loop_mode" in err


def test_zipf_ingest_roundtrip(tmp_path, capsys):
    edges = tmp_path / "edges.csv"
    edges.write_text("1 2\n3 2\n2 1\n")
    code, out, _ = run_cli(capsys, "zipf-ingest", "--input", str(edges))
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert rows[0] == ["rank", "degree"]
    assert rows[1:] == [["1", "2"], ["2", "1"]]


def test_zipf_ingest_malformed_exits_1(tmp_path, capsys):
    edges = tmp_path / "edges.csv"
    edges.write_text("1 2 3\n")
    code, _, err = run_cli(capsys, "zipf-ingest", "--input", str(edges))
    assert code == 1
    assert "line 1" in err


def test_zipf_simulation(capsys):
    code, out, _ = run_cli(capsys, "zipf", "--n", "500", "--seed", "3")
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert rows[0] == ["rank", "degree"]
    degrees = [float(r[1]) for r in rows[1:]]
    assert len(degrees) == 501
    assert degrees == sorted(degrees, reverse=True)


def test_table1_layout_small(capsys):
    code, out, _ = run_cli(capsys, "table1", "--reps", "1e3", "--seed", "1")
    assert code == 0
    rows = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert rows[0].split(",")[:4] == ["l", "beta", "t", "reps"]
    assert len(rows) == 4
    first = rows[1].split(",")
    assert first[0] == "1" and first[2] == "150.0"


def test_table1_config_convention():
    cfg = table1_config(3, 3.0)
    assert cfg.loop_mode is LoopMode.MODEL0
    assert cfg.initial == (3.0,)
    assert cfg.z == 3.0


def test_diagnose_quick(capsys):
    code, out, _ = run_cli(capsys, "diagnose", "--seed", "5")
    assert code == 0
    lines = [json.loads(ln) for ln in out.splitlines() if ln.strip()]
    assert all(res["passed"] for res in lines)
    names = {res["check"] for res in lines}
    assert "graph_urn_duality" in names and "martingale_one_step" in names
