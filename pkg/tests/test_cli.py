"""CLI: subcommands, exit codes, output schemas, determinism."""

import json
import math

import numpy as np
import pytest

import smallball as sb
from smallball.cli import main


@pytest.fixture()
def specs(tmp_path):
    paths = {}
    paths["single"] = tmp_path / "single.json"
    paths["single"].write_text('{"type": "explicit", "values": [1.0]}')
    paths["exp2"] = tmp_path / "exp2.json"
    paths["exp2"].write_text('{"type": "explicit", "values": [0.5, 0.5]}')
    paths["power"] = tmp_path / "power.json"
    paths["power"].write_text('{"type": "power", "scale": 1.0, "exponent": 2.0}')
    n = np.arange(1.0, 2001.0)
    paths["power_head"] = tmp_path / "power_head.json"
    paths["power_head"].write_text(
        json.dumps(
            {
                "type": "power",
                "scale": 1.0,
                "exponent": 2.0,
                "head": list(1.0 / n**2),
            }
        )
    )
    paths["power_plus1"] = tmp_path / "power_plus1.json"
    paths["power_plus1"].write_text(
        json.dumps(
            {
                "type": "power",
                "scale": 1.0,
                "exponent": 2.0,
                "head": list(1.0 / (n**2 + 1.0)),
            }
        )
    )
    paths["se"] = tmp_path / "se.json"
    paths["se"].write_text('{"type": "stretched_exp", "C": 0.3183098861837907, "alpha": 1.0}')
    paths["se2"] = tmp_path / "se2.json"
    paths["se2"].write_text(
        '{"type": "stretched_exp", "C": 0.3183098861837907, "alpha": 1.0, "scale": 2.0}'
    )
    paths["bad"] = tmp_path / "bad.json"
    paths["bad"].write_text('{"type": "explicit", "values": [1.0,]}')
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_eval_inversion_row(specs, capsys, tmp_path):
    out = tmp_path / "row.csv"
    code, _, _ = run(
        capsys, "eval", "--spectrum", str(specs["single"]), "--r", "1.0", "--out", str(out)
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,probability,method,err,truncation_N,tail_mass"
    cells = lines[1].split(",")
    from scipy.special import erf

    assert float(cells[1]) == pytest.approx(erf(math.sqrt(0.5)), abs=1e-8)
    assert cells[2] == "inversion"


def test_eval_negative_r_exits_1_no_file(specs, capsys, tmp_path):
    out = tmp_path / "never.csv"
    code, _, err = run(
        capsys, "eval", "--spectrum", str(specs["single"]), "--r", "-1", "--out", str(out)
    )
    assert code == 1
    assert not out.exists()
    assert "error" in err


def test_eval_monte_carlo_deterministic(specs, capsys):
    args = (
        "eval",
        "--spectrum",
        str(specs["exp2"]),
        "--r",
        "0.693",
        "--method",
        "monte_carlo",
        "--samples",
        "20000",
        "--seed",
        "7",
    )
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2  # byte identical
    assert "monte_carlo" in out1


def test_logasymp_passthrough(specs, capsys):
    code, out, _ = run(capsys, "logasymp", "--spectrum", str(specs["se"]), "--r", "1e-10")
    assert code == 0
    row = out.splitlines()[1].split(",")
    spec = sb.spectrum_from_json(specs["se"].read_text())
    assert float(row[1]) == sb.log_small_ball_estimate(spec, 1e-10)
    assert row[2] == "log_saddle"


def test_asymp_out_of_regime_exit_2(specs, capsys):
    code, _, err = run(capsys, "asymp", "--spectrum", str(specs["single"]), "--r", "5.0")
    assert code == 2
    assert "regime" in err


def test_malformed_json_exit_1_with_position(specs, capsys):
    code, _, err = run(capsys, "eval", "--spectrum", str(specs["bad"]), "--r", "0.5")
    assert code == 1
    assert "line 1" in err and "column" in err


def test_missing_file_exit_1(capsys):
    code, _, err = run(capsys, "eval", "--spectrum", "/nope/none.json", "--r", "0.5")
    assert code == 1


def test_usage_error_exit_1(capsys):
    code, _, err = run(capsys, "eval", "--r", "0.5")
    assert code == 1


def test_compare_identity(specs, capsys):
    code, out, _ = run(
        capsys,
        "compare",
        "--a",
        str(specs["power_head"]),
        "--b",
        str(specs["power_head"]),
        "--r-grid",
        "1e-2,1e-3",
    )
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    for row in rows:
        cells = row.split(",")
        assert float(cells[3]) == pytest.approx(1.0, rel=1e-10)
        assert float(cells[6]) == pytest.approx(1.0, rel=1e-12)


def test_compare_product_header(specs, capsys):
    code, out, _ = run(
        capsys,
        "compare",
        "--a",
        str(specs["power_head"]),
        "--b",
        str(specs["power_plus1"]),
        "--r-grid",
        "1e-3,1e-4",
        "--mode",
        "exact",
    )
    assert code == 0
    header = out.splitlines()[0]
    assert header.startswith("# P=")
    value = float(header.split("P=")[1].split(" ")[0])
    # 2000 head terms leave a product deficit of ~ P/2000
    assert value == pytest.approx(math.sinh(math.pi) / math.pi, abs=2.5e-3)


def test_compare_divergent_exit_0(specs, capsys):
    code, out, _ = run(
        capsys,
        "compare",
        "--a",
        str(specs["se"]),
        "--b",
        str(specs["se2"]),
        "--r-grid",
        "1e-3,1e-6",
    )
    assert code == 0
    assert out.splitlines()[0].startswith("# P: divergent")
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert all(len(r.split(",")) == 7 for r in rows)
    log_ratio = float(rows[1].split(",")[6])
    assert 1.0 < log_ratio < 1.2


def test_rcalpha_table(capsys):
    code, out, _ = run(
        capsys, "rcalpha", "--C", "2", "--alpha", "0.5", "--eps-grid", "1e-5"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alpha,C,epsilon,log_asymp,case"
    cells = lines[1].split(",")
    assert float(cells[3]) == pytest.approx(-161.91457778338298, rel=1e-12)
    assert cells[4] == "alpha<1"


def test_rcalpha_c_independence(capsys):
    _, out1, _ = run(capsys, "rcalpha", "--C", "1", "--alpha", "2", "--eps-grid", "1e-4")
    _, out2, _ = run(capsys, "rcalpha", "--C", "50", "--alpha", "2", "--eps-grid", "1e-4")
    v1 = out1.splitlines()[1].split(",")[3]
    v2 = out2.splitlines()[1].split(",")[3]
    assert v1 == v2


def test_rcalpha_bad_eps_exit_1(capsys):
    code, _, _ = run(capsys, "rcalpha", "--C", "2", "--alpha", "0.5", "--eps-grid", "2.0")
    assert code == 1


def test_spectrum_catalog_roundtrip(capsys, tmp_path):
    out = tmp_path / "spec.json"
    code, _, _ = run(
        capsys, "spectrum", "--catalog", "brownian", "--truncate", "3", "--out", str(out)
    )
    assert code == 0
    spec = sb.spectrum_from_json(out.read_text())
    assert spec.head[0] == pytest.approx(4.0 / math.pi**2, rel=1e-15)
    assert spec.n_head == 3


def test_spectrum_kernel_eigensolve(capsys, tmp_path):
    kern = tmp_path / "kern.json"
    kern.write_text('{"type": "kernel", "name": "brownian", "interval": [0, 1], "nodes": 100}')
    code, out, _ = run(capsys, "spectrum", "--kernel", str(kern), "--nodes", "100")
    assert code == 0
    spec = sb.spectrum_from_json(out.strip())
    assert spec.head[0] == pytest.approx(4.0 / math.pi**2, rel=1e-4)


def test_spectrum_requires_exactly_one_source(capsys):
    code, _, _ = run(capsys, "spectrum")
    assert code == 1


def test_json_format_output(specs, capsys):
    code, out, _ = run(
        capsys,
        "eval",
        "--spectrum",
        str(specs["single"]),
        "--r",
        "0.5,1.0",
        "--format",
        "json",
    )
    assert code == 0
    obj = json.loads(out)
    assert len(obj["rows"]) == 2
    assert obj["rows"][0]["method"] == "inversion"
    assert obj["rows"][0]["r"] == 0.5


def test_eval_multiple_r_rows(specs, capsys):
    code, out, _ = run(capsys, "eval", "--spectrum", str(specs["exp2"]), "--r", "0.1,0.5,1.0")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 3
    ps = [float(r.split(",")[1]) for r in rows]
    assert ps == sorted(ps)
