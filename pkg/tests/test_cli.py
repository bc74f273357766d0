import json
import subprocess
import sys

import pytest

from crlohner.cli import decimal_interval, main, split_interval, taylor_orders


def test_decimal_interval_encloses_decimals():
    x = decimal_interval("0.1", "0.3")
    assert float(x.lo) < 0.1 and float(x.hi) > 0.3 - 1e-17


def test_split_and_taylor_orders():
    parts = split_interval(decimal_interval("1", "2"), 4)
    assert float(parts[0].lo) == 1.0 and float(parts[-1].hi) == 2.0
    assert all(float(a.hi) == float(b.lo) for a, b in zip(parts, parts[1:]))
    assert taylor_orders("16,14,12") == [16, 14, 12]


def test_normalform_twist(capsys):
    code = main(["normalform", "--twist", "1", "0.5", "--normalization", "symplectic"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.rstrip().endswith("VERDICT: certified")
    assert "gamma1: [0.4999" in out


def test_normalform_jet_file(tmp_path, capsys):
    jet = {"1,0": [0.5403023058681398, 0.8414709848078965], "0,1": [-0.8414709848078965, 0.5403023058681398],
           "2,1": [-0.5403023058681398, -0.8414709848078965]}
    path = tmp_path / "jet.json"
    path.write_text(json.dumps(jet))
    code = main(["normalform", "--jet", str(path)])
    assert code in (0, 1)
    assert "VERDICT:" in capsys.readouterr().out


def test_integrate_with_dump(tmp_path, capsys):
    dump = tmp_path / "traj.jsonl"
    code = main(["integrate", "--system", "pendulum", "--param", "6", "6", "--x0", "0", "-0.17", "0",
                 "--box-radius", "1e-6", "--time", "0.5", "--step", "0.1", "--taylor-order", "12",
                 "--dump", str(dump)])
    assert code == 0
    lines = dump.read_text().splitlines()
    assert len(lines) == 6 and "t" in json.loads(lines[-1])
    assert "hull:" in capsys.readouterr().out


def test_poincare_subcommand(capsys):
    code = main(["poincare", "--system", "michelson", "--param", "0.2", "0.2", "--x0", "0", "0.386", "0",
                 "--box-radius", "1e-7", "--taylor-order", "14"])
    out = capsys.readouterr().out
    assert code == 0 and "return_time:" in out and "D[2]P:" in out


def test_certify_pendulum_report_file(tmp_path, capsys):
    report = tmp_path / "rep.txt"
    code = main(["certify", "pendulum", "--param", "6", "6", "--report", str(report)])
    assert code == 0
    text = report.read_text()
    assert text.rstrip().endswith("VERDICT: certified")
    assert "gamma1:" in text and "fixed_point:" in text


def test_certify_with_config_and_workers(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nparam = 5.9999999 6.0000001\nsplit = 2\nworkers = 2\nbox-radius = 1e-4\n")
    code = main(["certify", "pendulum", "--config", str(cfg)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("VERDICT: certified") == 3


def test_certify_custom_from_config(tmp_path, capsys):
    cfg = tmp_path / "custom.ini"
    cfg.write_text(
        "[run]\nbox-radius = 1e-4\nstep = 0.0523598775598\ntaylor-order = 16\n\n"
        "[system]\nname = forced-pendulum\nvariables = theta v t\n"
        "equations =\n    v\n    -sin(theta) + sin(omega*t)\n    1\n"
        "params = omega = 6 6\nmap = time\nperiod = 2*pi/omega\ncoords = theta v\n"
        "fill = 0 0 0\nguess = 0 -0.17\n"
    )
    code = main(["certify", "custom", "--config", str(cfg)])
    out = capsys.readouterr().out
    assert code == 0 and "system: forced-pendulum" in out


def test_failed_certification_exit_code(capsys):
    code = main(["certify", "pendulum", "--param", "6", "6", "--order", "3", "--box-radius", "1e-16"])
    assert code == 1
    assert "VERDICT: failed:" in capsys.readouterr().out


def test_order_must_be_three_for_certification():
    with pytest.raises(SystemExit):
        main(["certify", "pendulum", "--order", "2"])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "crlohner", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "crlohner" in out.stdout
