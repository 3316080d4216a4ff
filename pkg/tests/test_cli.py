from __future__ import annotations

import json
import math

import numpy as np
import pytest

from fracrd.cli import attach_negative_values, main, parse_data, parse_time_factor, parse_xgrid
from fracrd.errors import InvalidParams


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


def notes(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))


def test_ml_exp(capsys):
    code, out, _ = run(capsys, "ml", "--alpha", "1", "--beta", "1", "--z", "1")
    assert code == 0
    header, data = rows(out)
    assert header == ["alpha", "beta", "z_re", "z_im", "value_re", "value_im", "est_error"]
    assert abs(data[0, 4] - math.e) < 1e-14


def test_prabhakar_closed_form(capsys):
    # E^2_{1,1}(z) = (1 + z) e^z
    code, out, _ = run(capsys, "prabhakar", "--alpha", "1", "--beta", "1", "--gamma", "2", "--z", "0.5,-1+1j")
    _, data = rows(out)
    z = data[:, 3] + 1j * data[:, 4]
    got = data[:, 5] + 1j * data[:, 6]
    assert np.allclose(got, (1 + z) * np.exp(z), rtol=1e-13, atol=0)


def test_symbol(capsys):
    code, out, _ = run(capsys, "symbol", "--gamma", "2", "--k", "-2,0.5")
    _, data = rows(out)
    assert np.allclose(data[:, 1], [4.0, 0.25]) and np.allclose(data[:, 2], 0.0)


def test_solve1_heat_with_negative_grid(capsys):
    code, out, _ = run(capsys, "solve1", "--alpha", "1", "--terms", "1:2:0", "--data", "dirac", "--t", "1",
                       "--xgrid", "-5:5:201")
    assert code == 0
    _, data = rows(out)
    x = data[:, 0]
    assert data.shape == (201, 2)
    assert np.max(np.abs(data[:, 1] - np.exp(-x**2 / 4) / math.sqrt(4 * math.pi))) < 1e-8
    assert "fourier_nodes" in notes(out)


def test_output_uses_17_digits(capsys):
    _, out, _ = run(capsys, "ml", "--alpha", "1", "--beta", "1", "--z", "0.1")
    value = out.splitlines()[1].split(",")[4]
    assert float(value) == math.exp(0.1) or abs(float(value) - math.exp(0.1)) < 1e-15
    assert len(value.replace(".", "").lstrip("0")) >= 16


def test_green_routes_agree(capsys):
    base = ["green", "--alpha", "0.9", "--terms", "1:1.5:0", "--t", "1", "--xgrid", "0.5:3:6"]
    _, fourier, _ = run(capsys, *base)
    _, hform, _ = run(capsys, *base, "--route", "h")
    assert np.allclose(rows(fourier)[1][:, 1], rows(hform)[1][:, 1], rtol=1e-8, atol=0)


def test_hcheck_summary(capsys):
    code, out, _ = run(capsys, "hcheck", "--alpha", "0.6", "--gamma", "1.2", "--xgrid", "0.5:2:4")
    assert code == 0 and float(notes(out)["max_rel_err"]) < 1e-5


def test_solve2_paths(capsys):
    base = ["solve2", "--alpha", "1.8", "--beta", "1.2", "--a", "0.5", "--terms", "1:2:0", "--t", "1",
            "--xgrid", "-2:2:5", "--g1", "gaussian:0:1"]
    _, a, _ = run(capsys, *base)
    _, b, _ = run(capsys, *base, "--path", "sd_series")
    assert np.allclose(rows(a)[1], rows(b)[1], rtol=0, atol=1e-7)


def test_sd_eval(capsys):
    code, out, _ = run(capsys, "sd-eval", "--alpha", "1", "--beta", "0.5", "--rho", "1", "--x", "0", "--y", "-1")
    # with x = 0 only the j = 0 column survives: sum (-1)^n / Gamma(n + 1) = e^-1
    assert code == 0 and abs(rows(out)[1][0, 4] - math.exp(-1)) < 1e-13


def test_oracle_compare(capsys):
    code, out, _ = run(capsys, "oracle-compare", "--alpha", "1", "--terms", "1:2:0", "--t", "1",
                       "--nx", "101", "--nt", "32", "--x-min", "-10", "--x-max", "10")
    assert code == 0
    header, data = rows(out)
    assert header == ["x", "analytic", "fd", "abs_err"]
    info = notes(out)
    assert float(info["max_abs_err"]) == pytest.approx(np.max(data[:, 3]), rel=1e-15)
    assert float(info["max_abs_err"]) <= float(info["est_error"])


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha": 1, "beta": 1, "z": "2"}))
    _, out, _ = run(capsys, "ml", "--config", str(cfg))
    assert abs(rows(out)[1][0, 4] - math.exp(2)) < 1e-12
    _, out, _ = run(capsys, "ml", "--config", str(cfg), "--z", "-1")
    assert abs(rows(out)[1][0, 4] - math.exp(-1)) < 1e-14
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alpha": 1, "beta": 1, "z": "1", "colour": 3}))
    code, _, err = run(capsys, "ml", "--config", str(bad))
    assert code == 2 and "colour" in err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "ml", "--alpha", "1", "--beta", "1", "--z", "0", "--output", str(target))
    assert code == 0 and out == ""
    assert target.read_bytes().startswith(b"alpha,beta") and b"\r" not in target.read_bytes()


def test_tabulated_data(tmp_path, capsys):
    x = np.linspace(-8, 8, 801)
    table = tmp_path / "f.csv"
    np.savetxt(table, np.column_stack([x, np.exp(-x**2 / 2) / math.sqrt(2 * math.pi)]), delimiter=",",
               header="x,value", comments="")
    _, out, _ = run(capsys, "solve1", "--alpha", "1", "--terms", "1:2:0", "--data", f"tabulated:{table}",
                    "--t", "1", "--xgrid", "-2:2:5")
    data = rows(out)[1]
    # Gaussian of variance 1 under heat flow for unit time has variance 3
    assert np.allclose(data[:, 1], np.exp(-data[:, 0] ** 2 / 6) / math.sqrt(6 * math.pi), atol=1e-6)


@pytest.mark.parametrize("argv", [
    ["ml", "--alpha", "-1", "--beta", "1", "--z", "1"],
    ["ml", "--beta", "1", "--z", "1"],
    ["ml", "--alpha", "x", "--beta", "1", "--z", "1"],
    ["solve1", "--alpha", "1", "--terms", "1:2", "--data", "gaussian:0", "--t", "1", "--xgrid", "0:1:3"],
    ["solve1", "--alpha", "1", "--terms", "1:2", "--t", "1", "--xgrid", "1:0:3"],
    ["green", "--alpha", "1", "--terms", "1:2", "--t", "1", "--xgrid", "0:1:3", "--route", "magic"],
    ["solve2", "--alpha", "1.8", "--beta", "1.2", "--a", "0.5", "--terms", "1:2", "--t", "1", "--xgrid", "0:1:3",
     "--path", "nope"],
])
def test_invalid_exit_code(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert err.startswith("error: InvalidParams:") and err.count("\n") == 1


def test_numerical_failure_exit_code(capsys):
    # a gamma = 0.8 tail decays too slowly for the default Fourier tail tolerance
    code, _, err = run(capsys, "hcheck", "--alpha", "0.6", "--gamma", "0.8", "--xgrid", "0.5:2:3")
    assert code == 3 and err.startswith("error: TailTooFat")


def test_helpers():
    assert attach_negative_values(["--xgrid", "-5:5:3", "--z", "-1", "-h"]) == ["--xgrid=-5:5:3", "--z=-1", "-h"]
    assert np.array_equal(parse_xgrid("-1:1:3"), [-1.0, 0.0, 1.0])
    assert parse_data("gaussian:1:2", "g").center == 1.0
    assert parse_time_factor("cos:2")(math.pi) == pytest.approx(1.0)
    assert parse_time_factor("exp:-1")(1.0) == pytest.approx(math.exp(-1))
    for bad in ("sin:1", "exp:x", "const:1"):
        with pytest.raises(InvalidParams):
            parse_time_factor(bad)
    with pytest.raises(InvalidParams):
        parse_data("tabulated:/nonexistent/file.csv", "f")
