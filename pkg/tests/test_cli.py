import subprocess
import sys

import pytest

from gmwb.cli import format_value, main, to_csv
from gmwb.reproduce import REF_CALL


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [ln for ln in text.strip().splitlines() if "," in ln]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_format_ten_significant_digits():
    assert format_value(1.0 / 3.0) == "0.3333333333"
    assert format_value(12345.678901234) == "12345.6789"
    assert format_value(3) == "3" and format_value("call") == "call"
    assert to_csv(["a", "b"], [[1, 0.5]]) == "a,b\n1,0.5\n"


def test_bond(capsys):
    code, out, _ = run(capsys, "bond", "--maturity", "10")
    assert code == 0
    cols, rows = csv_rows(out)
    assert cols == ["rate", "maturity", "bond_price"]
    assert float(rows[0][2]) == pytest.approx(0.6387372825, abs=1e-10)


def test_vanilla(capsys):
    code, out, _ = run(capsys, "vanilla", "--strike", "0.95", "--sigma-r", "0.01", "--rho", "-0.2", "--yield-rate", "0.02")
    assert code == 0
    _, rows = csv_rows(out)
    assert float(rows[0][3]) == pytest.approx(REF_CALL[0], abs=6e-7)
    assert abs(float(rows[0][5])) < 1e-3


def test_reproduce_table1_to_file_is_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["reproduce", "--table", "1", "--out", str(a)]) == 0
    assert main(["reproduce", "--table", "1", "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    cols, rows = csv_rows(a.read_text())
    assert cols[:5] == ["sigma_r", "rho", "closed_form", "ghqc", "rel_err"]
    assert len(rows) == 6
    assert all(abs(float(r[4])) < 1e-3 for r in rows)


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("maturity=5\nrate=0.03\n", encoding="utf-8")
    _, out_file, _ = run(capsys, "bond", "--config", str(cfg))
    _, out_flag, _ = run(capsys, "bond", "--config", str(cfg), "--rate", "0.04")
    assert csv_rows(out_file)[1][0][:2] == ["0.03", "5"]
    assert csv_rows(out_flag)[1][0][:2] == ["0.04", "5"]


def test_run_takes_mode_from_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode=bond\nmaturity=10\n", encoding="utf-8")
    code, out, _ = run(capsys, "run", "--config", str(cfg))
    assert code == 0 and "0.6387372825" in out


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("maturity=1\nrho=1.5\n", encoding="utf-8")
    code, _, err = run(capsys, "bond", "--config", str(cfg))
    assert code == 2 and "rho out of [-1,1] at line 2" in err
    code, _, err = run(capsys, "run", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2 and "cannot read config" in err


def test_pricing_failure_exit_code(capsys):
    # volatile enough that even a 5% fee leaves the contract worth more than the premium
    code, _, err = run(capsys, "fair-fee", "--mesh", "coarse", "--sigma-s", "0.9")
    assert code == 1 and "pricing failed" in err


def test_price_modes(capsys):
    common = ["--mesh", "coarse", "--alpha-bp", "60", "--rho", "0.2"]
    code, out, _ = run(capsys, "price", *common)
    assert code == 0
    static = float(csv_rows(out)[1][0][3])
    code, out, _ = run(capsys, "price", "--mode", "deterministic", *common)
    assert code == 0 and csv_rows(out)[1][0][0] == "deterministic-static"
    assert float(csv_rows(out)[1][0][3]) < static
    code, out, _ = run(capsys, "price", "--mode", "dynamic", "--J", "41", *common)
    assert code == 0 and float(csv_rows(out)[1][0][3]) >= static


def test_mc_seed_reproducible(capsys):
    args = ["mc", "--kind", "call", "--n-paths", "100000", "--seed", "9"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_reproduce_commands_exist():
    from gmwb.cli import build_parser

    parser = build_parser()
    for t in range(1, 7):
        assert parser.parse_args(["reproduce", "--table", str(t)]).table == t
    assert parser.parse_args(["reproduce", "--figure", "2"]).figure == 2
    with pytest.raises(SystemExit):
        parser.parse_args(["reproduce", "--table", "7"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gmwb", "bond", "--maturity", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("bond price")
