import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from diskflow.cli import main

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "diskflow" / "schemas"
SIR = ["--A", "1", "--beta", "3", "--mu", "1", "--q", "1"]


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestAnalyze:
    def test_report_valid_against_schema(self, capsys):
        code, out, _ = run(["analyze", *SIR], capsys)
        assert code == 0
        report = json.loads(out)
        schema = json.loads((SCHEMA_DIR / "analyze_report.schema.json").read_text())
        jsonschema.validate(report, schema)

    def test_supercritical_content(self, capsys):
        _, out, _ = run(["analyze", *SIR], capsys)
        report = json.loads(out)
        assert report["r0"] == "3/2"
        assert report["regime"] == "supercritical"
        locs = {e["name"]: e for e in report["equilibria"]}
        assert locs["E0"]["location"] == [1.0, 0.0]
        assert locs["E*"]["classification"] == "sink"
        inf = {e["name"]: e for e in report["infinity_equilibria"]}
        assert inf["E1"]["verdict"] == "away-from-equilibrium"
        assert inf["E2"]["verdict"] == "away-from-equilibrium"

    def test_critical_has_center_manifold(self, capsys):
        _, out, _ = run(["analyze", "--A", "1", "--beta", "2",
                         "--mu", "1", "--q", "1"], capsys)
        report = json.loads(out)
        assert report["regime"] == "critical"
        cm = report["center_manifold"]
        assert cm["graph_in_I"][0] == "-2"
        assert cm["reduced_in_I"][0] == "-4"

    def test_params_file(self, tmp_path, capsys):
        pf = tmp_path / "p.json"
        pf.write_text(json.dumps({"A": "1", "beta": "1", "mu": "1", "q": "1"}))
        code, out, _ = run(["analyze", "--params", str(pf)], capsys)
        assert code == 0
        assert json.loads(out)["regime"] == "subcritical"

    def test_out_file(self, tmp_path, capsys):
        dest = tmp_path / "r.json"
        code, _, _ = run(["analyze", *SIR, "--out", str(dest)], capsys)
        assert code == 0 and json.loads(dest.read_text())["r0"] == "3/2"

    def test_missing_params_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["analyze"])
        assert exc.value.code == 2


class TestChart:
    def test_sir_chart_dump(self, capsys):
        code, out, _ = run(["chart", *SIR, "--chart", "U2"], capsys)
        assert code == 0
        d = json.loads(out)
        assert d["chart"] == "U2" and d["rescale_power"] == 1

    def test_raw_polynomials(self, capsys):
        code, out, _ = run(["chart", "--P=-mu*S", "--Q=-I",
                            "--param", "mu=2", "--chart", "U1"], capsys)
        assert code == 0
        assert json.loads(out)["chart"] == "U1"

    def test_bad_polynomial_exits_1(self, capsys):
        code, _, err = run(["chart", "--P", "S +", "--Q", "I",
                            "--chart", "U1"], capsys)
        assert code == 1 and err


class TestCmf:
    def test_u2_reduction(self, capsys):
        code, out, _ = run(["cmf", *SIR, "--at", "u2"], capsys)
        assert code == 0
        d = json.loads(out)
        assert d["verdict"] == "away-from-equilibrium"
        assert d["order"] == 4

    def test_e0_requires_critical(self, capsys):
        code, _, err = run(["cmf", *SIR, "--at", "e0"], capsys)
        assert code == 1 and "critical" in err.lower() or code == 1


class TestAsymptotics:
    def test_subcritical_rate(self, capsys):
        code, out, _ = run(["asymptotics", "--A", "1", "--beta", "1",
                            "--mu", "1", "--q", "1", "--t-max", "60"], capsys)
        assert code == 0
        d = json.loads(out)
        assert d["regime"] == "subcritical"
        assert abs(d["fitted"] - d["predicted"]) <= 0.02 * abs(d["predicted"])

    def test_supercritical_rejected(self, capsys):
        code, _, err = run(["asymptotics", *SIR], capsys)
        assert code == 1 and err


class TestPortrait:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        def render(sub):
            d = tmp_path / sub
            d.mkdir()
            args = ["portrait", *SIR, "--seed-ring", "4", "--radius", "0.4",
                    "--t-max", "60",
                    "--svg", str(d / "p.svg"), "--json", str(d / "p.json"),
                    "--csv", str(d / "p.csv")]
            assert main(args) == 0
            capsys.readouterr()
            return ((d / "p.svg").read_bytes(), (d / "p.json").read_bytes(),
                    (d / "p.csv").read_bytes())

        first, second = render("a"), render("b")
        assert first == second

    def test_json_schema(self, tmp_path, capsys):
        dest = tmp_path / "p.json"
        code, _, _ = run(["portrait", *SIR, "--seed", "0.5,0.5",
                          "--t-max", "60", "--json", str(dest)], capsys)
        assert code == 0
        schema = json.loads((SCHEMA_DIR / "portrait_report.schema.json").read_text())
        jsonschema.validate(json.loads(dest.read_text()), schema)

    def test_csv_rows(self, tmp_path, capsys):
        dest = tmp_path / "p.csv"
        code, _, _ = run(["portrait", *SIR, "--seed", "0.5,0.5",
                          "--t-max", "60", "--csv", str(dest)], capsys)
        assert code == 0
        lines = dest.read_text().strip().splitlines()
        assert lines[0] == "t,S,I,chart,u,v"
        assert len(lines) > 10

    def test_requires_an_output(self):
        with pytest.raises(SystemExit) as exc:
            main(["portrait", *SIR, "--seed", "0.5,0.5"])
        assert exc.value.code == 2


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "diskflow.cli", "analyze", *SIR],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["r0"] == "3/2"
