import json
from pathlib import Path

import numpy as np
import pytest

from memwave.cli import main
from memwave.config import ConfigError, parse_config
from memwave.runner import run


def test_parse_minimal_config_fills_defaults():
    cfg = parse_config("{}", "eigen")
    assert cfg.params.eps_zone == 0.1 and cfg.params.n_zone == 10.0
    assert cfg.options["xi_min"] == 1e-4 and cfg.options["count"] == 400


def test_parse_rejects_small_sigma():
    with pytest.raises(ConfigError) as ei:
        parse_config('{"params": {"sigma": 0.5}}', "eigen")
    assert any("params.sigma" in p for p, _ in ei.value.problems)


def test_parse_rejects_m_equals_two_for_blowup():
    with pytest.raises(ConfigError) as ei:
        parse_config('{"params": {"m": 2}}', "blowup")
    assert any("params.m" in p for p, _ in ei.value.problems)


def test_parse_rejects_unknown_keys():
    with pytest.raises(ConfigError) as ei:
        parse_config('{"params": {"sigma": 1.0}, "grd": {}}', "linear-decay")
    assert any(p == "grd" and "unknown" in m for p, m in ei.value.problems)


def test_parse_rejects_bad_window():
    with pytest.raises(ConfigError):
        parse_config('{"fit_window": [100.0, 10.0]}', "linear-decay")


def test_parse_rejects_malformed_json():
    with pytest.raises(ConfigError):
        parse_config("{not json", "eigen")


def test_pcrit_run_reports_five(tmp_path):
    cfg = parse_config('{"params": {"sigma": 2.0, "n": 1, "m": 1.0}}', "pcrit")
    status = run(cfg, tmp_path)
    assert status == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["p_crit"] == 5.0
    assert summary["all_checks_passed"]
    assert (tmp_path / "manifest.json").exists()


def test_eigen_run_artifacts_and_determinism(tmp_path):
    text = ('{"params": {"sigma": 1.5}, "count": 50, "spot_checks": 200, '
            '"figures": true}')
    outs = []
    for sub in ("a", "b"):
        cfg = parse_config(text, "eigen", seed=7)
        status = run(cfg, tmp_path / sub)
        assert status == 0
        outs.append((tmp_path / sub / "eigen_branches.csv").read_bytes())
    assert outs[0] == outs[1]  # byte-identical CSV bodies for equal seeds
    assert (tmp_path / "a" / "eigen_branches.png").exists()

    lines = outs[0].decode().splitlines()
    assert lines[0].startswith("xi_mag,re_l1,im_l1,re_l2,im_l2,re_l3,im_l3")
    xi = [float(l.split(",")[0]) for l in lines[1:]]
    assert xi == sorted(xi)
    # round-trip float precision
    assert all(repr(float(tok)) == tok for tok in
               (lines[1].split(",")[0], lines[3].split(",")[1]))


def test_admissible_run(tmp_path):
    text = ('{"params": {"sigma": 2.0, "n": 1, "m": 1.0, "p": 6.0}, '
            '"s": 1.0, "ell": 0.5}')
    cfg = parse_config(text, "admissible")
    assert run(cfg, tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["gee"]["admissible"] is True
    assert summary["blowup"]["admissible"] is False


def test_pointwise_run_small(tmp_path):
    text = ('{"params": {"sigma": 1.0}, "t_max": 100.0, "t_count": 10, '
            '"xi_count": 12, "figures": false}')
    cfg = parse_config(text, "pointwise")
    assert run(cfg, tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["c_est"] > 0 and summary["C_est"] < 10


def test_region_sweep_csv(tmp_path):
    text = ('{"params": {"sigma": 2.0, "n": 1, "m": 1.0}, '
            '"sweep": {"enabled": true, "n_min": 1, "n_max": 2, '
            '"p_min": 2.0, "p_max": 7.0, "p_count": 6}}')
    cfg = parse_config(text, "pcrit")
    assert run(cfg, tmp_path) == 0
    body = (tmp_path / "region_sweep.csv").read_text().splitlines()
    assert body[0] == "n,p,p_crit,gee_admissible,blowup_applicable"
    assert len(body) == 13


def test_cli_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"params": {"sigma": 0.1}}')
    assert main(["eigen", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    missing = tmp_path / "nope.json"
    assert main(["eigen", "--config", str(missing), "--out", str(tmp_path / "o")]) == 1
    ok = tmp_path / "ok.json"
    ok.write_text('{"count": 20, "spot_checks": 50, "figures": false}')
    assert main(["eigen", "--config", str(ok), "--out", str(tmp_path / "o")]) == 0


def test_blowup_run_end_to_end(tmp_path):
    text = ('{"params": {"sigma": 2.0, "n": 1, "m": 1.0, "p": 3.0}, '
            '"grid": {"extent": 50.0, "points": 256}, '
            '"data": {"amplitude": 1.0}, "dt": 0.01, "t_final": 30.0, '
            '"R_list": [10.0, 20.0, 40.0], "figures": false}')
    cfg = parse_config(text, "blowup")
    status = run(cfg, tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["verdict"] == "blow-up-detected"
    assert summary["scaling_exponent"] == -1.0
    assert status == 0
    body = (tmp_path / "blowup_certificate.csv").read_text().splitlines()
    assert body[0] == "R,data_term,rhs_bound"
    assert len(body) == 4


def test_linear_decay_run_with_snapshot_export(tmp_path):
    text = ('{"params": {"sigma": 1.0, "n": 1, "m": 1.0}, '
            '"grid": {"extent": 1000.0, "points": 8192}, '
            '"times": {"t_min": 100.0, "t_max": 10000.0, "count": 25}, '
            '"fit_window": [100.0, 10000.0], '
            '"quantities": ["u_L2"], "export_physical": true, '
            '"figures": false}')
    cfg = parse_config(text, "linear-decay")
    status = run(cfg, tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert status == 0, summary
    assert abs(summary["rates"]["u_L2"]["fitted"] + 0.25) <= 0.05
    head = (tmp_path / "snapshots.csv").read_text().splitlines()[0]
    assert head == "t,k0_index,re_u,im_u,re_ut,im_ut"
    head = (tmp_path / "snapshots_physical.csv").read_text().splitlines()[0]
    assert head == "t,x0_index,u,ut"


def test_diffusion_run_csv(tmp_path):
    text = ('{"params": {"sigma": 1.0, "n": 1, "m": 1.0}, '
            '"grid": {"extent": 400.0, "points": 2048}, '
            '"times": {"t_min": 10.0, "t_max": 1000.0, "count": 15}, '
            '"fit_window": [10.0, 1000.0], "s": 0.0, "ell": 2.0, '
            '"figures": false}')
    cfg = parse_config(text, "diffusion")
    status = run(cfg, tmp_path)
    assert status == 0
    head = (tmp_path / "diffusion_norms.csv").read_text().splitlines()[0]
    assert head == ("t,norm_U,norm_U_minus_S0,norm_U_minus_Sinf,"
                    "norm_U_minus_both")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["gaps"]["U_minus_S0"] < 0


def test_semilinear_run_subcommand(tmp_path):
    # default fit window sits beyond t_final, so no rate check is invoked
    text = ('{"params": {"sigma": 2.0, "n": 1, "m": 1.0, "p": 6.0}, '
            '"grid": {"extent": 50.0, "points": 256}, '
            '"data": {"amplitude": 0.001}, "dt": 0.05, "t_final": 20.0, '
            '"snapshot_times": [10.0, 20.0], '
            '"figures": false}')
    cfg = parse_config(text, "semilinear")
    status = run(cfg, tmp_path)
    assert status == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["verdict"] == "global-decay"
    assert "evidence_grade" in summary
    head = (tmp_path / "semilinear_norms.csv").read_text().splitlines()[0]
    assert head == "t,u_L2,sup"


def test_numeric_failure_exit_code(tmp_path):
    # fit window with too few samples inside -> numeric error -> exit 2
    text = ('{"params": {"sigma": 1.0}, '
            '"grid": {"extent": 400.0, "points": 2048}, '
            '"times": {"t_min": 1.0, "t_max": 10000.0, "count": 25}, '
            '"fit_window": [9000.0, 10000.0], "figures": false}')
    cfg = parse_config(text, "linear-decay")
    assert run(cfg, tmp_path) == 2
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert "error" in summary


def test_declared_check_failure_exit_code(tmp_path):
    # deliberately coarse grid and early window: the rate check fails -> 3
    text = ('{"params": {"sigma": 1.0}, '
            '"grid": {"extent": 100.0, "points": 512}, '
            '"times": {"t_min": 1.0, "t_max": 50.0, "count": 20}, '
            '"fit_window": [1.0, 50.0], "quantities": ["u_L2"], '
            '"figures": false}')
    cfg = parse_config(text, "linear-decay")
    assert run(cfg, tmp_path) == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert not summary["all_checks_passed"]
