import json
import os

import numpy as np
import pytest

from mqed.cli import main
from mqed.errors import ParseError, ValidationError
from mqed.scenario import parse_scenario, run_scenario, serialize_scenario

VACUUM_CFG = """
[grids]
k = 0,0,1
n_omega = 40
n_t = 801
t_max = 4.0
maxwell_n_t = 2001
maxwell_t_max = 2.0
reservoir_order = 16
kk_n_omega = 128
"""

LORENTZ_CFG = """
[medium]
electric.kind = lorentz_isotropic
electric.strength = 1.3
electric.resonance = 1.0
electric.width = 0.5

[grids]
k = 0,0,1.3
n_omega = 60
n_t = 1201
t_max = 6.0
maxwell_n_t = 6001
maxwell_t_max = 4.0
reservoir_order = 160
kk_n_omega = 4096

[output]
directory = PLACEHOLDER
"""


def test_parse_minimal_vacuum_defaults():
    config = parse_scenario("")
    assert config.grids["k"] == [(0.0, 0.0, 1.0)]
    assert config.numerics["laplace"] == "auto"
    assert config.model("electric", __import__("mqed").NATURAL).is_zero


def test_parse_rejects_negative_tolerance():
    with pytest.raises(ValidationError) as err:
        parse_scenario("[numerics]\nquad_rtol = -1e-7\n")
    assert "quad_rtol" in str(err.value)


def test_parse_rejects_unknown_key():
    with pytest.raises(ValidationError) as err:
        parse_scenario("[grids]\nbogus_key = 3\n")
    assert "bogus_key" in str(err.value)


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as err:
        parse_scenario("[grids]\nk 0,0,1\n")
    assert err.value.line == 2


def test_parse_rejects_key_outside_section():
    with pytest.raises(ParseError):
        parse_scenario("n_t = 100\n")


def test_serialize_round_trip():
    config = parse_scenario(LORENTZ_CFG.replace("PLACEHOLDER", "out"))
    text = serialize_scenario(config)
    again = parse_scenario(text)
    assert serialize_scenario(again) == text


def test_run_vacuum_scenario(tmp_path):
    config = parse_scenario(VACUUM_CFG)
    manifest = run_scenario(config, out_dir=str(tmp_path))
    assert manifest.all_passed
    # the chi exports of a vacuum scenario are all-zero
    chi = (tmp_path / "chi_electric_k0.csv").read_text().splitlines()
    values = np.array([[float(x) for x in row.split(",")[1:]] for row in chi[1:]])
    assert np.allclose(values, 0.0)
    payload = json.loads((tmp_path / "manifest.json").read_text())
    assert payload["schema"] == 1
    names = [c["name"] for c in payload["checks"]]
    assert len(names) == len(set(names))


def test_run_scenario_determinism(tmp_path):
    config = parse_scenario(VACUUM_CFG)
    run_scenario(config, out_dir=str(tmp_path / "a"))
    run_scenario(config, out_dir=str(tmp_path / "b"))
    for name in sorted(os.listdir(tmp_path / "a")):
        if name.endswith(".csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_verify_lorentz(tmp_path, capsys):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text(LORENTZ_CFG.replace("PLACEHOLDER", str(tmp_path / "out")))
    code = main(["verify", "--config", str(cfg)])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] fdt_P_k0" in out
    assert "[PASS] equal_time_commutator_k0" in out
    payload = json.loads((tmp_path / "out" / "manifest.json").read_text())
    fdt = [c for c in payload["checks"] if c["name"] == "fdt_P_k0"][0]
    assert fdt["max_error"] < 1e-5
    kk = [c for c in payload["checks"] if c["name"] == "kk_electric_k0"][0]
    assert kk["max_error"] < 1e-3


def test_cli_config_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[numerics]\nquad_rtol = -1\n")
    assert main(["verify", "--config", str(cfg)]) == 1


def test_cli_missing_config_exit_code(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 3


def test_cli_invert_chi_not_psd_exit_code(tmp_path):
    # a PSD-violating dissipation target must exit 2 with provenance
    rows = ["omega,kmag," + ",".join(
        f"{p}_{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3) for p in ("re", "im")
    )]
    for w in (0.5, 1.0, 2.0):
        for km in (0.5, 2.0):
            tensor = -0.5 * np.eye(3)  # negative-definite target
            cells = [str(w), str(km)]
            for i in range(3):
                for j in range(3):
                    cells += [str(float(tensor[i, j])), "0.0"]
            rows.append(",".join(cells))
    table = tmp_path / "target.csv"
    table.write_text("\n".join(rows) + "\n")
    cfg = tmp_path / "invert.cfg"
    cfg.write_text(
        f"[medium]\nelectric.target_table = {table}\n"
        "[grids]\nk = 0,0,1\nomega_min = 0.6\nomega_max = 1.8\nn_omega = 5\n"
        f"[output]\ndirectory = {tmp_path / 'out'}\n"
    )
    assert main(["invert-chi", "--config", str(cfg)]) == 2
    payload = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert payload["error"]["type"] == "NotPSD"


def test_cli_invert_chi_roundtrip(tmp_path):
    cfg = tmp_path / "invert.cfg"
    cfg.write_text(
        "[medium]\nelectric.kind = lorentz_isotropic\nelectric.strength = 1.3\n"
        "electric.resonance = 1.0\nelectric.width = 0.5\n"
        "[grids]\nk = 0,0,1\nn_omega = 40\n"
        f"[output]\ndirectory = {tmp_path / 'out'}\n"
    )
    assert main(["invert-chi", "--config", str(cfg)]) == 0
    payload = json.loads((tmp_path / "out" / "manifest.json").read_text())
    check = [c for c in payload["checks"] if c["name"].startswith("roundtrip")][0]
    assert check["passed"]
