import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bllab.cli import run, show
from bllab.core import builtin_config
from bllab.fileio import ConfigFile, ConfigFormatError, dumps_config, load_config, parse_config
from conftest import interval_unions, rationals

F = Fraction
CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def cfgpath(name):
    return os.path.join(CONFIGS, name)


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
    return str(p)


class TestCheck:
    def test_rs(self, capsys):
        assert run(["check", cfgpath("riesz-sobolev.json")]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "nondegenerate ✓ admissible ✓ strict ✓ generic ✓"

    def test_gowers(self, capsys):
        assert run(["check", cfgpath("gowers2.json")]) == 1
        out = capsys.readouterr().out
        assert "generic ✗" in out
        assert "vertex (1/2, 0, 0) has 4 active slots" in out

    def test_gowers_perturbed_passes(self, capsys):
        assert run(["check", cfgpath("gowers2-perturbed.json")]) == 0

    def test_json(self, capsys):
        assert run(["check", "--json", cfgpath("riesz-sobolev.json")]) == 0
        js = json.loads(capsys.readouterr().out)
        assert js["all_ok"] is True
        assert js["strictly_admissible"]["slots"][0]["witness"] == ["1", "-1/2"]

    def test_inadmissible_slot_reported(self, tmp_path, capsys):
        p = write(tmp_path, "wide.json", {"m": 2, "rows": [["1", "0"], ["0", "1"], ["-1", "-1"]],
                                          "e": ["2", "2", "10"]})
        assert run(["check", p]) == 1
        assert "slot 3 inadmissible: max L = 2 < e/2 = 5" in capsys.readouterr().out

    def test_degenerate(self, tmp_path, capsys):
        p = write(tmp_path, "deg.json", {"m": 2, "rows": [["1", "0"], ["2", "0"], ["0", "1"]],
                                         "e": ["1", "1", "1"]})
        assert run(["check", p]) == 1
        assert "nondegenerate ✗" in capsys.readouterr().out


class TestEvaluate:
    def test_eval_split(self, capsys):
        assert run(["eval", cfgpath("split.json")]) == 0
        assert capsys.readouterr().out.strip() == \
            "phi = 2 (exact 2/1), phi_star = 3 (exact 3/1), deficit = 1 (exact 1/1)"

    def test_eval_needs_sets(self, capsys):
        assert run(["eval", cfgpath("riesz-sobolev.json")]) == 2
        assert "no 'sets'" in capsys.readouterr().err

    def test_kernel(self, tmp_path, capsys):
        csv_path = tmp_path / "k.csv"
        assert run(["kernel", cfgpath("riesz-sobolev.json"), "--slot", "3", "--grid", "4",
                    "--csv", str(csv_path)]) == 0
        out = capsys.readouterr().out
        assert "s = 1: 1 (exact 1/1)" in out
        rows = csv_path.read_text().splitlines()
        assert rows[0] == "s,K,K_exact" and rows[3] == "0,2,2"

    def test_kernel_bad_slot(self, capsys):
        assert run(["kernel", cfgpath("riesz-sobolev.json"), "--slot", "4"]) == 2

    def test_flow(self, tmp_path, capsys):
        csv_path = tmp_path / "f.csv"
        assert run(["flow", cfgpath("split.json"), "--grid", "4", "--csv", str(csv_path)]) == 0
        assert "nondecreasing ✓" in capsys.readouterr().out
        assert "1/2,3,3,1,1" in csv_path.read_text().splitlines()

    def test_dist(self, capsys):
        assert run(["dist", cfgpath("shifted.json")]) == 0
        assert capsys.readouterr().out.strip() == \
            "dist = 0.0666666666667 (exact 1/15) at v = (-1/30, -1/30) [exact]"

    def test_psi(self, capsys):
        assert run(["psi", cfgpath("riesz-sobolev.json"), "--direction", "0,0,1", "--grid", "2"]) == 0
        out = capsys.readouterr().out
        assert "v = (0, 0, 1/2): psi = 2.75 (exact 11/4) [off]" in out
        assert "min (psi(0) - psi(v)) / dist^2 = 2.25 (exact 9/4)" in out

    def test_psi_bad_direction(self, capsys):
        assert run(["psi", cfgpath("riesz-sobolev.json"), "--direction", "0,1"]) == 2
        assert run(["psi", cfgpath("riesz-sobolev.json"), "--direction", "0,x,1"]) == 2

    def test_expansion(self, capsys):
        assert run(["expansion", cfgpath("gowers2.json"), "--slot", "1,2,3,4", "--deltas", "1/16,1/8"]) == 0
        out = capsys.readouterr().out
        assert "residual = -0.000325520833333 (exact -1/3072)" in out
        assert "log-log slope" in out

    def test_expansion_two_slots_vanishes(self, capsys):
        assert run(["expansion", cfgpath("riesz-sobolev.json"), "--deltas", "1/16,1/8"]) == 0
        assert "slope: undefined" in capsys.readouterr().out


class TestScan:
    def test_deterministic_csv(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = [cfgpath("riesz-sobolev.json"), "--seed", "7", "--samples", "6"]
        assert run(["scan", *args, "--csv", str(a)]) == 0
        assert run(["scan", *args, "--csv", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert b"\r\n" not in a.read_bytes()
        assert "seed = 7" in capsys.readouterr().out

    def test_json_records_seed(self, capsys):
        assert run(["scan", "--json", cfgpath("riesz-sobolev.json"), "--seed", "3", "--samples", "3",
                    "--sampler", "shift"]) == 0
        js = json.loads(capsys.readouterr().out)
        assert js["seed"] == 3 and js["min_ratio"] == "9/4"

    def test_refuses_non_generic(self, capsys):
        assert run(["scan", cfgpath("gowers2.json"), "--samples", "2"]) == 1
        assert "hypothesis failure" in capsys.readouterr().err


class TestGen:
    def test_gowers_round_trip(self, tmp_path, capsys):
        out = str(tmp_path / "g.json")
        assert run(["gen", "--preset", "gowers", "--k", "2", "--out", out]) == 0
        assert run(["check", out]) == 1
        assert "generic ✗" in capsys.readouterr().out
        cf = load_config(out)
        assert cf.config.rows == builtin_config("gowers", k=2)[0].rows

    def test_stdout(self, capsys):
        assert run(["gen", "--preset", "riesz-sobolev", "--e", "2,2,3"]) == 0
        assert json.loads(capsys.readouterr().out)["e"] == ["2", "2", "3"]

    def test_random_needs_shape(self, capsys):
        assert run(["gen", "--preset", "random"]) == 2

    def test_random(self, capsys):
        assert run(["gen", "--preset", "random", "--n", "4", "--m", "2", "--seed", "9"]) == 0
        js = json.loads(capsys.readouterr().out)
        assert len(js["rows"]) == 4 and js["m"] == 2


class TestInputErrors:
    def test_missing_file(self, capsys):
        assert run(["check", "/nonexistent/x.json"]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_bad_json(self, tmp_path, capsys):
        p = write(tmp_path, "bad.json", "{\n  \"m\": 2,\n  oops\n}")
        assert run(["check", p]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_bad_rational_location(self, tmp_path, capsys):
        p = write(tmp_path, "bad.json", {"m": 2, "rows": [["1", "0"], ["abc", "1"], ["1", "1"]],
                                         "e": ["1", "1", "1"]})
        assert run(["check", p]) == 2
        assert "rows[1][0]" in capsys.readouterr().err

    @pytest.mark.parametrize("data,where", [
        ({"rows": [], "e": []}, "missing field 'm'"),
        ({"m": 2, "rows": [["1"]], "e": ["1"]}, "rows[0]: length 1"),
        ({"m": 1, "rows": [["0"]], "e": ["1"]}, "zero row"),
        ({"m": 1, "rows": [["1"]], "e": ["0"]}, "e[0]: must be strictly positive"),
        ({"m": 1, "rows": [["1"]], "e": [0.5]}, "e[0]: expected a rational string"),
        ({"m": 1, "rows": [["1"]], "e": ["1"], "sets": [[["1", "0"]]]}, "sets[0][0]: lo > hi"),
        ({"m": 1, "rows": [["1"]], "e": ["1", "2"]}, "2 entries for 1 rows"),
    ])
    def test_parse_messages(self, data, where):
        with pytest.raises(ConfigFormatError) as exc:
            parse_config(data, "f.json")
        assert where in str(exc.value)

    def test_unknown_command(self, capsys):
        assert run(["frobnicate"]) == 2

    def test_no_arguments(self, capsys):
        assert run([]) == 2


class TestRoundTrip:
    @given(st.integers(2, 3).flatmap(lambda m: st.tuples(
        st.just(m), st.integers(m + 1, m + 3), st.integers(0, 10 ** 6))), st.data())
    def test_config_file(self, shape, data):
        m, n, seed = shape
        cfg, e = builtin_config("random", n=n, m=m, seed=seed)
        e = tuple(data.draw(rationals(1, 4).filter(lambda q: q > 0)) for _ in range(n))
        sets = tuple(data.draw(interval_unions()) for _ in range(n))
        cf = ConfigFile(cfg, e, sets)
        again = parse_config(json.loads(dumps_config(cf)), cfg.name)
        assert again == cf


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bllab", "eval", cfgpath("split.json")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("phi = 2")


def test_show():
    assert show(F(2)) == "2 (exact 2/1)"
    assert show(F(-1, 3)) == "-0.333333333333 (exact -1/3)"
