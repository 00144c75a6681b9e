"""Configuration parsing, CSV schemas, sidecars, overwrite protection and
the command-line round trip."""

import csv
import json
import math

import numpy as np
import pytest

from quadsense import ConfigError, IntegratorConfig, integrate_means
from quadsense.cli import main
from quadsense.fileio import (ENSEMBLE_HEADER, SENSING_HEADER, SWEEP_HEADER,
                              TRAJECTORY_HEADER, apply_overrides, fmt,
                              load_config, params_from_raw, parse_config_text)

from conftest import fast_params

FAST_CONFIG = """\
# reference geometry, heavily damped mechanics
kappa_hz = 5.0e6
g_m     = 1.0e-6
delta   = 100.01
omega_m = 100.0    # in units of kappa
gamma_m = 1.0e-2
drive_E = 5.0e6
n_th    = 6.0e4
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "system.conf"
    path.write_text(FAST_CONFIG)
    return str(path)


class TestConfigParsing:
    def test_full_parse_with_comments(self):
        raw = parse_config_text(FAST_CONFIG)
        assert raw["delta"] == 100.01
        assert raw["kappa_hz"] == 5.0e6
        params = params_from_raw(raw)
        assert params.kappa == 5.0e6
        assert params.n_th == 6.0e4

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_text("gm = 1e-6\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("delta = 1\ndelta = 2\n")

    def test_non_numeric_value_rejected(self):
        with pytest.raises(ConfigError, match="not a number"):
            parse_config_text("delta = fast\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError, match="expected key=value"):
            parse_config_text("just some text\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="missing required"):
            params_from_raw(parse_config_text("delta = 100.01\n"))

    def test_kappa_hz_is_optional(self):
        text = "\n".join(line for line in FAST_CONFIG.splitlines()
                         if not line.startswith("kappa_hz"))
        params = params_from_raw(parse_config_text(text))
        assert params.kappa == 1.0

    def test_invalid_physics_becomes_config_error(self):
        raw = parse_config_text(FAST_CONFIG.replace("delta   = 100.01",
                                                    "delta   = -5"))
        with pytest.raises(ConfigError):
            params_from_raw(raw)

    def test_overrides(self):
        raw = parse_config_text(FAST_CONFIG)
        out = apply_overrides(raw, ["drive_E=6e6", "n_th = 0"])
        assert out["drive_E"] == 6e6 and out["n_th"] == 0.0
        assert raw["drive_E"] == 5e6  # original untouched
        with pytest.raises(ConfigError):
            apply_overrides(raw, ["nope=1"])
        with pytest.raises(ConfigError):
            apply_overrides(raw, ["drive_E"])


class TestFormatting:
    def test_seventeen_digit_round_trip(self):
        values = [1.0 / 3.0, math.pi * 1e6, 5e6, -13.797532328984222,
                  2.2250738585072014e-308]
        for v in values:
            assert float(fmt(v)) == v


class TestCliCommands:
    def test_delta_zero_shift(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["delta", "--config", config_path, "--out", str(out),
                   "--delta-omega", "0"])
        assert rc == 0
        lines = (out / "sensing.csv").read_text().splitlines()
        assert lines[0] == SENSING_HEADER
        row = lines[1].split(",")
        assert float(row[0]) == 0.0
        assert float(row[3]) == 0.0  # delta_xc
        assert row[5] == "true"
        sidecar = json.loads((out / "sensing.run.json").read_text())
        assert sidecar["command"] == "delta"
        assert sidecar["params"]["drive_E"] == 5e6
        assert sidecar["physical"]["omega_m_hz"] == 100.0 * 5e6
        printed = capsys.readouterr().out.splitlines()
        assert str(out / "sensing.csv") in printed

    def test_overwrite_protection_and_force(self, config_path, tmp_path,
                                            capsys):
        out = tmp_path / "out"
        args = ["delta", "--config", config_path, "--out", str(out),
                "--delta-omega", "0", "--t-end", "600"]
        assert main(args) == 0
        assert main(args) == 2
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "ConfigError"
        assert "overwrite" in err["message"]
        assert main(args + ["--force"]) == 0

    def test_simulate_round_trip_from_sidecar(self, config_path, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        base = ["simulate", "--config", config_path, "--t-end", "5",
                "--delta-omega", "0.001"]
        assert main(base + ["--out", str(out1)]) == 0
        sidecar = json.loads((out1 / "trajectory_dw0.001.run.json").read_text())
        # feed the echoed parameters back through --set overrides
        overrides = []
        for key, target in (("g_m", "g_m"), ("delta", "delta"),
                            ("omega_m", "omega_m"), ("gamma_m", "gamma_m"),
                            ("drive_E", "drive_E"), ("n_th", "n_th")):
            overrides += ["--set", f"{target}={fmt(sidecar['params'][key])}"]
        assert main(base + ["--out", str(out2)] + overrides) == 0
        a = (out1 / "trajectory_dw0.001.csv").read_bytes()
        b = (out2 / "trajectory_dw0.001.csv").read_bytes()
        assert a == b

    def test_simulate_csv_matches_integration(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", config_path, "--out", str(out),
                     "--t-end", "5"]) == 0
        path = out / "trajectory_dw0.0.csv"
        with open(path) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = np.array([[float(v) for v in row] for row in reader])
        assert ",".join(header) == TRAJECTORY_HEADER
        params = params_from_raw(apply_overrides(
            load_config(config_path), []))
        traj = integrate_means(params, params.omega_m,
                               IntegratorConfig(t_end=5.0))
        np.testing.assert_array_equal(rows[:, 0], traj.times)
        np.testing.assert_array_equal(rows[:, 1:], traj.states)

    def test_ensemble_csv(self, config_path, tmp_path):
        out = tmp_path / "out"
        rc = main(["ensemble", "--config", config_path, "--out", str(out),
                   "--trajectories", "4", "--t-end", "2", "--seed", "9"])
        assert rc == 0
        lines = (out / "ensemble.csv").read_text().splitlines()
        assert lines[0] == ENSEMBLE_HEADER
        assert len(lines) > 10
        sidecar = json.loads((out / "ensemble.run.json").read_text())
        assert sidecar["seed"] == 9 and sidecar["n_trajectories"] == 4

    def test_sweep_csv_and_headers(self, config_path, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep-quality", "--config", config_path, "--out", str(out),
                   "--values", "1e4,1e5", "--delta-omegas", "0,0.001"])
        assert rc == 0
        lines = (out / "sweep_quality.csv").read_text().splitlines()
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 5
        first = lines[1].split(",")
        assert first[0] == "quality" and float(first[1]) == 1e4
        assert float(first[3]) == 0.0 and first[6] == "ok"

    def test_unknown_set_key_exits_2(self, config_path, tmp_path, capsys):
        rc = main(["delta", "--config", config_path, "--out",
                   str(tmp_path / "out"), "--delta-omega", "0",
                   "--set", "bogus=1"])
        assert rc == 2
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "ConfigError"

    def test_missing_config_exits_2(self, tmp_path):
        rc = main(["delta", "--config", str(tmp_path / "nope.conf"),
                   "--out", str(tmp_path / "out"), "--delta-omega", "0"])
        assert rc == 2

    def test_domain_error_exits_3(self, config_path, tmp_path, capsys):
        rc = main(["delta", "--config", config_path,
                   "--out", str(tmp_path / "out"), "--delta-omega", "1000"])
        assert rc == 3
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "DomainError"

    def test_optimize_drive_bad_bracket_exits_3(self, config_path, tmp_path,
                                                capsys):
        # the signal grows monotonically over this narrow bracket, so the
        # pre-scan correctly reports a bracketing failure
        rc = main(["optimize-drive", "--config", config_path,
                   "--out", str(tmp_path / "out"),
                   "--delta-omega", "0.001", "--bracket", "2e6,4e6"])
        assert rc == 3
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "NoInteriorMax"

    def test_optimize_drive_bracket_validation(self, config_path, tmp_path,
                                               capsys):
        rc = main(["optimize-drive", "--config", config_path,
                   "--out", str(tmp_path / "out"),
                   "--delta-omega", "0.001", "--bracket", "1e6"])
        assert rc == 2


def test_fast_params_match_cli_config():
    # the fixture config and the test helper must describe the same system
    raw = parse_config_text(FAST_CONFIG)
    p = params_from_raw(raw)
    q = fast_params(kappa=5e6)
    assert (p.g_m, p.delta, p.omega_m, p.gamma_m, p.drive_E, p.n_th) == \
        (q.g_m, q.delta, q.omega_m, q.gamma_m, q.drive_E, q.n_th)
