import json
from pathlib import Path

import numpy as np
import pytest

from poslump.cli import cli_main

NETWORK_DIR = str(Path(__file__).parent.parent / "benchmarks" / "networks")

WORKED = {
    "lower": [[0, 2, 0], [1, 1, 1], [0, 0, 1]],
    "O": [[0, 0, 1]],
}
PERTURBED = {
    "lower": [[0, 1.8, 0], [0.9, 0.9, 0.9], [0, 0, 0.9]],
    "upper": [[0, 2.2, 0], [1.1, 1.1, 1.1], [0, 0, 1.1]],
    "O": [[0, 0, 1]],
    "x0": [1, 1, 1],
}
LUMP2 = {"L": [[1, 2, 0], [0, 0, 1]]}


@pytest.fixture
def files(tmp_path):
    d = {}
    for name, obj in (("worked", WORKED), ("perturbed", PERTURBED), ("lump2", LUMP2)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        d[name] = str(p)
    d["dir"] = tmp_path
    return d


def run(args, capsys):
    code = cli_main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestLump:
    def test_exact_worked_example(self, files, capsys):
        code, out, _ = run(["lump", "--exact", files["worked"]], capsys)
        assert code == 0
        res = json.loads(out)
        # state 3 is self-governing: the minimal lumping keeps only x3
        assert res["k"] == 1
        assert res["L"]["data"] == [[0, 0, 1]]
        assert res["verdict"]["kind"] == "proper"

    def test_verbose_includes_trace(self, files, capsys):
        code, out, _ = run(["lump", "--verbose", files["worked"]], capsys)
        assert code == 0
        assert "closure_trace" in json.loads(out)

    def test_missing_file_is_validation_error(self, files, capsys):
        code, _, err = run(["lump", "/nonexistent.json"], capsys)
        assert code == 1
        assert "error" in err


class TestReduce:
    def test_reduce_with_supplied_lumping(self, files, capsys):
        code, out, _ = run(["reduce", "--exact", files["perturbed"], files["lump2"]], capsys)
        assert code == 0
        res = json.loads(out)
        assert res["k"] == 2
        assert res["lower"]["data"] == [["9/5", "9/5"], [0, "9/10"]]
        assert res["upper"]["data"] == [["11/5", "11/5"], [0, "11/10"]]
        assert res["O"]["data"] == [[0, 1]]
        assert res["y0"] == [3, 1]

    def test_non_lumping_rejected(self, files, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"L": [[1, 0, 0], [0, 0, 1]]}))
        code, _, err = run(["reduce", files["perturbed"], str(bad)], capsys)
        assert code == 1
        assert "lumping" in err


class TestReconstruct:
    def test_lower_schedule(self, files, capsys, tmp_path):
        sched = tmp_path / "r.json"
        sched.write_text(json.dumps({"breakpoints": [0.0], "values": [[[1.8, 1.8], [0.0, 0.9]]]}))
        code, out, _ = run(["reconstruct", files["perturbed"], files["lump2"], str(sched)], capsys)
        assert code == 0
        res = json.loads(out)
        assert res["verification"]["ok"]
        got = np.array(res["values"][0]["data"], dtype=float)
        assert np.allclose(got, np.array(PERTURBED["lower"], dtype=float), atol=1e-9)


class TestSimulate:
    def test_csv_output(self, files, capsys):
        code, out, _ = run(
            ["simulate", files["perturbed"], "--drift", "upper", "--tau", "1.0", "--step", "0.01"],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "t,x_1,x_2,x_3"
        assert len(lines) == 102  # header + 101 grid points
        last = [float(v) for v in lines[-1].split(",")]
        assert last[0] == pytest.approx(1.0)


class TestVerify:
    def test_equivalence_report(self, files, capsys):
        code, out, _ = run(
            ["verify", files["perturbed"], files["lump2"], "--drift", "upper", "--tau", "2.0"],
            capsys,
        )
        assert code == 0
        res = json.loads(out)
        assert res["ok"] and res["max_deviation"] <= 1e-6


class TestValues:
    def test_bracket_output(self, files, capsys):
        code, out, _ = run(
            ["values", files["perturbed"], "--x0", "1,1,1", "--tau", "0.5", "--step", "0.005"],
            capsys,
        )
        assert code == 0
        res = json.loads(out)
        assert res["v_inf"] <= res["v_sup"]
        assert "argmin" in res and "argmax" in res


class TestBench:
    def test_empty_report(self, capsys, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        code, out, _ = run(["bench", str(empty)], capsys)
        assert code == 0
        res = json.loads(out)
        assert res["records"] == []
        assert res["summary"] == {"proper": 0, "general": 0, "none": 0, "timeout": 0}

    def test_fixture_pack_json(self, capsys):
        code, out, _ = run(["bench", NETWORK_DIR, "--no-timing", "--timeout", "30"], capsys)
        assert code == 0
        res = json.loads(out)
        assert res["summary"]["proper"] > 0

    def test_csv_format(self, capsys):
        code, out, _ = run(["bench", NETWORK_DIR, "--format", "csv", "--timeout", "30"], capsys)
        assert code == 0
        assert out.startswith("network,i,verdict")


class TestUsage:
    def test_unknown_command_exits_1_with_help(self, capsys):
        code, _, err = run(["frobnicate"], capsys)
        assert code == 1
        assert "usage" in err

    def test_missing_required_argument(self, capsys):
        code, _, err = run(["lump"], capsys)
        assert code == 1
