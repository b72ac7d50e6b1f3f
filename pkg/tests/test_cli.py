import json

import numpy as np
import pytest

from fcslab import cli, zoo
from fcslab.errors import NormalizationError, ParseError
from fcslab.io import SystemFile, bundled_path, dumps, load_system, parse_system, system_to_dict
from fcslab.report import DiagnoseOptions, diagnose


def _without_run(report):
    return dumps({k: v for k, v in report.items() if k != "run"})


def _write(tmp_path, data, name="sys.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_bundled_aklt_report():
    report = diagnose(load_system(bundled_path("aklt.json")))
    s = report["summary"]
    assert s["pure"] and s["gauge_group"] == "{1}"
    assert s["lattice_symmetric"] and s["real"] and s["detailed_balance"]
    assert s["covariant"] and s["zeta_trivial"] and s["audit_consistent"]
    assert report["exit_code"] == 0 and not report["errors"]


def test_bundled_product_report():
    report = diagnose(load_system(bundled_path("product.json")))
    assert report["summary"]["pure"] and report["summary"]["gauge_group"] == "{1}"
    assert report["stages"]["gauge_group"]["product_state"]
    assert report["summary"]["audit_consistent"]


def test_non_square_named():
    data = system_to_dict(zoo.aklt().kraus)
    data["kraus"][1][0] = data["kraus"][1][0][:1]
    with pytest.raises(ParseError, match=r"kraus\[1\] row 0"):
        parse_system(data)


@pytest.mark.parametrize(
    "mutate,pattern",
    [
        (lambda d: d.pop("kraus"), "missing field"),
        (lambda d: d.update(d=4), "kraus must list"),
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d["kraus"][0][0].__setitem__(0, "x"), r"kraus\[0\]\[0\]\[0\]"),
        (lambda d: d.update(symmetry={"group": "so3"}), "symmetry"),
    ],
)
def test_parse_errors(mutate, pattern):
    data = system_to_dict(zoo.aklt().kraus)
    mutate(data)
    with pytest.raises(ParseError, match=pattern):
        parse_system(data)


def test_unnormalized_file():
    data = system_to_dict(np.array([zoo.PAULI_X, zoo.PAULI_Y]))
    with pytest.raises(NormalizationError):
        parse_system(data)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_system(path)


def test_floats_have_seventeen_digits():
    text = dumps({"x": 1 / 3, "y": 2.0, "z": np.float64(0.1), "c": 1j, "n": float("nan")})
    parsed = json.loads(text)
    assert "0.33333333333333331" in text and "0.10000000000000001" in text
    assert parsed["y"] == 2.0 and isinstance(parsed["y"], float)
    assert parsed["c"] == [0.0, 1.0] and parsed["n"] is None


def test_dump_round_trip_is_exact():
    rng = np.random.default_rng(0)
    system = zoo.random_system(rng, 3, 2)
    again = parse_system(json.loads(dumps(system_to_dict(system.kraus))))
    assert np.array_equal(again.system.kraus, system.kraus)


@pytest.mark.parametrize("name", ["aklt.json", "product.json"])
def test_echo_round_trip(name):
    sf = load_system(bundled_path(name))
    report = diagnose(sf)
    echoed = parse_system(json.loads(dumps(report["echo"])), "echo")
    assert _without_run(diagnose(echoed)) == _without_run(report)


def test_round_trip_random_system():
    sf = SystemFile(zoo.random_system(np.random.default_rng(8), 2, 3), {"group": "u1"}, ["aklt:1"])
    report = diagnose(sf)
    echoed = parse_system(json.loads(dumps(report["echo"])))
    assert _without_run(diagnose(echoed)) == _without_run(report)


def test_report_reproducible_with_seed():
    sf = load_system(bundled_path("aklt.json"))
    a = diagnose(sf, DiagnoseOptions(seed=5))
    b = diagnose(sf, DiagnoseOptions(seed=5))
    assert _without_run(a) == _without_run(b)


def test_every_verdict_carries_tolerance():
    report = diagnose(load_system(bundled_path("aklt.json")))
    for name, stage in report["stages"].items():
        if name in ("energies",):
            for m in stage["models"]:
                assert "tol" in m["ground_inequality"]
        elif name == "symmetry_windows":
            assert "tol" in stage["real"] and "tol" in stage["lattice_symmetric"]
        elif name != "audit":
            assert "tol" in stage, name


def test_cap_failures_degrade_stages():
    report = diagnose(load_system(bundled_path("aklt.json")), DiagnoseOptions(cap=100))
    stages = report["stages"]
    assert stages["gauge_group"]["status"] == "error"
    assert stages["gauge_group"]["error"]["type"] == "ResourceCapError"
    assert stages["purity"]["status"] == "ok"
    assert stages["detailed_balance"]["status"] == "unavailable"
    assert report["summary"]["gauge_group"] is None
    assert report["exit_code"] == 4


def test_diagonal_pair_errors_at_purity():
    sf = SystemFile(zoo.diagonal_pair())
    report = diagnose(sf)
    assert report["stages"]["purity"]["error"]["type"] == "NotErgodic"
    assert report["exit_code"] == 7


def test_nonreal_skips_detailed_balance():
    report = diagnose(SystemFile(zoo.nonreal_scalar()))
    assert report["stages"]["detailed_balance"]["error"]["type"] == "PreconditionError"
    assert report["exit_code"] == 8


def test_cli_diagnose(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["diagnose", str(bundled_path("aklt.json")), "--report", str(out), "--seed", "1"])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["schema_version"] == 1 and report["options"]["seed"] == 1
    assert json.loads(capsys.readouterr().out)["pure"] is True


def test_cli_global_flags_before_command(tmp_path, capsys):
    code = cli.main(["--window", "3", "symmetry", str(bundled_path("aklt.json"))])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["window"] == 3


def test_cli_diagnose_overrides(capsys):
    code = cli.main(["diagnose", str(bundled_path("product.json")), "--group", "u1", "--model", "xyz:1/2"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0 and report["stages"]["energies"]["models"][0]["energy_density"] == 0.25


def test_cli_parse_error_exit(tmp_path, capsys):
    path = _write(tmp_path, {"d": 2, "k": 2, "kraus": [[[1, 0], [0]], [[0, 0], [0, 1]]]})
    assert cli.main(["validate", str(path)]) == ParseError.exit_code
    assert "kraus[0] row 1" in capsys.readouterr().err


def test_cli_error_codes_are_stable(capsys):
    assert cli.main(["ed", "--model", "nope", "--sites", "4"]) == 13
    assert cli.main(["ed", "--model", "aklt", "--sites", "14"]) == 4
    assert cli.main(["su2", "fs", "3", "--order", "4"]) == 12


@pytest.mark.parametrize(
    "argv,key,value",
    [
        (["su2", "fs", "1/2"], "indicator", -1),
        (["su2", "realform", "1"], "exists", True),
        (["su2", "cg", "1", "1"], "spins", ["0", "1", "2"]),
        (["ed", "--model", "xyz:1/2", "--sites", "4"], "ground_energy", -2.0),
    ],
)
def test_cli_tools(capsys, argv, key, value):
    assert cli.main(argv) == 0
    assert json.loads(capsys.readouterr().out)[key] == value


def test_cli_file_commands(capsys):
    path = str(bundled_path("aklt.json"))
    assert cli.main(["validate", path]) == 0
    assert json.loads(capsys.readouterr().out)["normalization_residual"] < 1e-15
    assert cli.main(["dual", path]) == 0
    assert json.loads(capsys.readouterr().out)["residuals"]["duality"] < 1e-12
    assert cli.main(["covariance", path, "--group", "su2", "--spin", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["zeta_trivial"] is True
    assert cli.main(["gscheck", path, "--model", "aklt:1"]) == 0
    assert json.loads(capsys.readouterr().out)["passes"] is True
