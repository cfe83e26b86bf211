import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hetnet.cli import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, TIER_COLUMNS, fmt, main, sweep_grid
from hetnet.configfile import load_config

FIG5 = """\
user_density = 20 * lambda1
access_threshold_dbm = -80
sinr_threshold_db = 10
pathloss_exp = 4

[tier]
power = 30 dBm
antennas = 4
density = 1 / (pi * 500**2)

[tier]
power = 10 dBm
antennas = 2
density = 10 * lambda1
"""

FIG7 = """\
user_density = 20 * lambda1
access_threshold_dbm = -60
sinr_threshold_db = 10
pathloss_exp = 4

[tier]
power = 30 dBm
antennas = 4
density = 1 / (pi * 500**2)

[tier]
power = 10 dBm
antennas = 2
density = 5 * lambda1
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def column(rows, name):
    return np.array([float(r[name]) for r in rows])


def test_fmt():
    assert fmt(None) == ""
    assert fmt(float("nan")) == "undefined"
    assert fmt(True) == "true"
    assert fmt(3) == "3"
    assert fmt(0.1) == "0.1"
    assert fmt(1 / 3) == "0.333333333333"


# ---------------------------------------------------------------- analyze


def test_analyze_writes_report(tmp_path, config_dir, capsys):
    cfg = os.path.join(config_dir, "three_tier.cfg")
    prefix = str(tmp_path / "rep")
    assert main(["analyze", cfg, "--out", prefix]) == EXIT_OK
    out = capsys.readouterr().out
    assert "access threshold: -80 dBm" in out
    rows = read_csv(prefix + "_tiers.csv")
    assert tuple(rows[0].keys()) == TIER_COLUMNS
    assert [r["tier"] for r in rows] == ["1", "2", "3"]
    t = column(rows, "T_k")
    net = {r["metric"]: r["value"] for r in read_csv(prefix + "_network.csv")}
    assert t.sum() + float(net["no_coverage"]) == pytest.approx(1.0, abs=1e-12)
    assert list(net) == sorted(net)
    for r in rows:
        assert float(r["O_L"]) <= float(r["O_int"]) <= float(r["O_U"])
    meta = json.loads(open(prefix + "_tiers.csv.meta.json", encoding="utf-8").read())
    assert meta["command"] == "analyze"
    assert os.path.exists(prefix + "_summary.txt")


def test_analyze_flags_zero_threshold_branch(tmp_path):
    cfg = write(tmp_path, "z.cfg", FIG5.replace("access_threshold_dbm = -80", "access_threshold_dbm = -inf"))
    assert main(["analyze", cfg]) == EXIT_OK
    rows = read_csv(str(tmp_path / "z_tiers.csv"))
    assert all("eps-zero" in r["method"] for r in rows)


def test_analyze_default_prefix(tmp_path):
    cfg = write(tmp_path, "net.cfg", FIG5)
    assert main(["analyze", cfg]) == EXIT_OK
    assert (tmp_path / "net_tiers.csv").exists()
    assert (tmp_path / "net_network.csv").exists()


def test_bad_key_exits_1_and_names_it(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", FIG5.replace("pathloss_exp = 4", "pathloss_expo = 4"))
    assert main(["analyze", cfg]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "pathloss_expo" in err and "line 4" in err


def test_missing_file_exits_1(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG
    assert "cannot read" in capsys.readouterr().err


def test_console_script_runs(tmp_path):
    cfg = write(tmp_path, "n.cfg", FIG5)
    res = subprocess.run(
        [sys.executable, "-m", "hetnet.cli", "analyze", cfg], capture_output=True, text=True
    )
    assert res.returncode == 0, res.stderr


# ---------------------------------------------------------------- simulate


def test_simulate_byte_identical(tmp_path, config_dir):
    cfg = os.path.join(config_dir, "two_tier.cfg")
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    for out in (a, b):
        assert main(["simulate", cfg, "--trials", "300", "--seed", "7", "--out", out]) == EXIT_OK
    assert open(a, "rb").read() == open(b, "rb").read()
    rows = read_csv(a)
    assert {r["quantity"] for r in rows} >= {"assoc", "no_coverage", "activation", "outage_int", "aar", "ant"}
    assert all(r["verdict"] in ("pass", "fail", "undefined") for r in rows)
    meta = json.loads(open(a + ".meta.json", encoding="utf-8").read())
    assert meta["seed"] == 7 and meta["trials"] == 300


def test_simulate_worker_count_does_not_matter(tmp_path, config_dir):
    cfg = os.path.join(config_dir, "single_tier.cfg")
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["simulate", cfg, "--trials", "80", "--out", a]) == EXIT_OK
    assert main(["simulate", cfg, "--trials", "80", "--workers", "2", "--out", b]) == EXIT_OK
    assert open(a, "rb").read() == open(b, "rb").read()


def test_simulate_single_trial_marks_undefined(tmp_path, config_dir, capsys):
    cfg = os.path.join(config_dir, "two_tier.cfg")
    assert main(["simulate", cfg, "--trials", "1"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows
    for r in rows:
        assert r["se"] == "undefined"
        assert r["verdict"] == "undefined"


def test_simulate_beta_list(tmp_path, config_dir, capsys):
    cfg = os.path.join(config_dir, "single_tier.cfg")
    assert main(["simulate", cfg, "--trials", "50", "--beta-db", "0", "5", "10"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["beta_db"] for r in rows if r["quantity"] == "outage_int"] == ["0", "5", "10"]


def test_simulate_rejects_zero_trials(config_dir):
    assert main(["simulate", os.path.join(config_dir, "single_tier.cfg"), "--trials", "0"]) == EXIT_CONFIG


def test_validate_exit_codes(tmp_path, config_dir, capsys):
    cfg = os.path.join(config_dir, "single_tier.cfg")
    # independent thinning is what the analysis assumes
    code = main(["validate", cfg, "--trials", "2000", "--activation", "independent", "--out", str(tmp_path / "v.csv")])
    assert code == EXIT_OK, open(tmp_path / "v.csv").read()
    # physical activation differs from the mean-field value by far more than 3 SE
    code = main(["validate", cfg, "--trials", "2000", "--out", str(tmp_path / "w.csv")])
    assert code == EXIT_MISMATCH
    assert "MISMATCH activation" in capsys.readouterr().out


# ---------------------------------------------------------------- sweep


def test_sweep_threshold_ant_unimodal(tmp_path):
    cfg = write(tmp_path, "f5.cfg", FIG5)
    out = str(tmp_path / "s.csv")
    args = ["sweep", cfg, "--param", "access_threshold", "--lo", "-120 dBm", "--hi", "-50 dBm"]
    assert main(args + ["--points", "71", "--scale", "log", "--metrics", "ant", "--out", out]) == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 71
    assert list(rows[0]) == ["access_threshold", "access_threshold_dbm", "ant"]
    dbm = column(rows, "access_threshold_dbm")
    np.testing.assert_allclose(dbm, np.linspace(-120, -50, 71), atol=1e-9)
    w = column(rows, "ant")
    i = int(np.argmax(w))
    assert 0 < i < 70
    assert np.all(np.diff(w[: i + 1]) >= 0) and np.all(np.diff(w[i:]) <= 0)


def test_sweep_sinr_threshold_outage_nondecreasing(tmp_path):
    cfg = write(tmp_path, "f5.cfg", FIG5)
    out = str(tmp_path / "s.csv")
    args = ["sweep", cfg, "--param", "sinr_threshold", "--lo", "-10 dB", "--hi", "20 dB", "--points", "31"]
    assert main(args + ["--metrics", "outage_int", "--out", out]) == EXIT_OK
    rows = read_csv(out)
    for col in ("O_int_1", "O_int_2", "O_int"):
        assert np.all(np.diff(column(rows, col)) >= 0)


def test_sweep_tier_density_aar_increasing(tmp_path):
    cfg = write(tmp_path, "f7.cfg", FIG7)
    out = str(tmp_path / "s.csv")
    args = ["sweep", cfg, "--param", "tier[2].density", "--lo", "lambda1", "--hi", "40 * lambda1"]
    assert main(args + ["--points", "8", "--metrics", "aar", "--out", out]) == EXIT_OK
    assert np.all(np.diff(column(read_csv(out), "aar")) > 0)


def test_sweep_deterministic_replay_and_workers(tmp_path, config_dir):
    cfg = os.path.join(config_dir, "three_tier.cfg")
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    base = ["sweep", cfg, "--param", "tier[1].antennas", "--lo", "1", "--hi", "8", "--points", "8"]
    metrics = ["--metrics", "assoc", "activation", "outage_exact", "bounds", "ant", "energy_eff"]
    assert main(base + metrics + ["--out", a]) == EXIT_OK
    assert main(base + metrics + ["--workers", "2", "--out", b]) == EXIT_OK
    first = open(a, "rb").read()
    assert first == open(b, "rb").read()
    assert column(read_csv(a), "tier[1].antennas").tolist() == list(range(1, 9))
    os.remove(a)
    assert main(["replay", a + ".meta.json"]) == EXIT_OK
    assert open(a, "rb").read() == first
    c = str(tmp_path / "c.csv")
    assert main(["replay", a + ".meta.json", "--out", c]) == EXIT_OK
    assert open(c, "rb").read() == first


def test_sweep_sidecar_records_config(tmp_path, config_dir):
    cfg = os.path.join(config_dir, "two_tier.cfg")
    out = str(tmp_path / "s.csv")
    assert main(["sweep", cfg, "--param", "user_density", "--lo", "lambda1", "--hi", "50*lambda1", "--out", out]) == 0
    meta = json.loads(open(out + ".meta.json", encoding="utf-8").read())
    assert meta["sweep"]["param"] == "user_density"
    p = tmp_path / "again.cfg"
    p.write_text(meta["config_text"], encoding="utf-8")
    assert load_config(str(p)) == load_config(cfg)


@pytest.mark.parametrize(
    "param, lo, hi, needle",
    [
        ("tier[9].power", "1", "2", "tier index"),
        ("tier[1].colour", "1", "2", "unknown sweep parameter"),
        ("bandwidth", "1", "2", "unknown sweep parameter"),
        ("access_threshold", "-80 dB", "-50 dB", "dB bounds"),
        ("access_threshold", "-80 dBm", "1e-3", "same unit"),
        ("tier[1].antennas", "1", "2.5", "integer"),
        ("access_threshold", "1e-9", "1e-10", "lo < hi"),
        ("noise", "0", "1e-9", None),
    ],
)
def test_sweep_rejects_bad_specs(tmp_path, config_dir, capsys, param, lo, hi, needle):
    cfg = os.path.join(config_dir, "two_tier.cfg")
    out = str(tmp_path / "s.csv")
    code = main(["sweep", cfg, "--param", param, "--lo", lo, "--hi", hi, "--points", "3", "--out", out])
    if needle is None:
        assert code == EXIT_OK
        return
    assert code == EXIT_CONFIG
    assert needle in capsys.readouterr().err
    assert not os.path.exists(out)


def test_sweep_unknown_metric(tmp_path, config_dir, capsys):
    cfg = os.path.join(config_dir, "two_tier.cfg")
    code = main(["sweep", cfg, "--param", "noise", "--lo", "0", "--hi", "1", "--metrics", "joy", "--out", str(tmp_path / "s")])
    assert code == EXIT_CONFIG
    assert "joy" in capsys.readouterr().err


def test_sweep_grid_scales():
    np.testing.assert_allclose(sweep_grid(1.0, 100.0, 3, "log"), [1.0, 10.0, 100.0])
    np.testing.assert_allclose(sweep_grid(0.0, 1.0, 3, "linear"), [0.0, 0.5, 1.0])


def test_replay_rejects_other_sidecars(tmp_path, config_dir):
    cfg = os.path.join(config_dir, "single_tier.cfg")
    out = str(tmp_path / "s.csv")
    assert main(["simulate", cfg, "--trials", "5", "--out", out]) == EXIT_OK
    assert main(["replay", out + ".meta.json"]) == EXIT_CONFIG
    assert main(["replay", str(tmp_path / "missing.meta.json")]) == EXIT_CONFIG
