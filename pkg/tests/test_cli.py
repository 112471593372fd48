import json
import subprocess

from amalgam.cli import run

BASE = ["--dim", "1", "--L", "8", "--n", "512", "--tmin", "0.01", "--tmax", "8", "--tcount", "12"]


def read_report(path):
    with open(path) as fh:
        return json.load(fh)


class TestNormCommand:
    def test_two_cube_value(self, tmp_path):
        out = tmp_path / "norm.json"
        code = run(["norm", "--dim", "1", "--L", "32", "--n", "4096",
                    "--p", "1", "--q", "2", "--function", "indicator:lo=0,hi=2",
                    "--out", str(out)])
        assert code == 0
        doc = read_report(out)
        assert abs(doc["results"]["amalgam_discrete"] - 1.41421356237) <= 1e-9

    def test_prints_to_stdout_without_out(self, capsys):
        assert run(["norm", *BASE, "--function", "gaussian:width=1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["command"] == "norm"


class TestUsageErrors:
    def test_bad_grid(self):
        assert run(["norm", "--L", "0"]) == 1

    def test_bad_command(self):
        assert run(["frobnicate"]) == 1

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"waffles": 3}')
        assert run(["norm", "--config", str(cfg)]) == 1

    def test_bad_pq(self):
        assert run(["report", "--pq", "one,two"]) == 1

    def test_unknown_method(self):
        assert run(["report", "--methods", "sorcery"]) == 1


class TestConfigFile:
    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dim": 1, "L": 8, "n": 512, "p": 2.0, "q": 2.0,
                                   "function": "indicator:lo=0,hi=1"}))
        assert run(["norm", "--config", str(cfg), "--q", "3.0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["config"]["q"] == 3.0
        assert doc["config"]["p"] == 2.0


class TestCrCheck:
    def test_caloric_spectral_passes(self, tmp_path):
        out = tmp_path / "cr.json"
        code = run(["cr-check", *BASE, "--lift", "caloric", "--mode", "spectral",
                    "--function", "gaussian:width=1", "--assert", "--out", str(out)])
        assert code == 0
        doc = read_report(out)
        assert doc["status"] == "pass"
        assert max(doc["results"]["max"].values()) <= 1e-6
        assert (tmp_path / "cr_residuals.csv").exists()

    def test_assert_failure_exits_2(self, tmp_path):
        # an impossible tolerance forces the assertion branch
        code = run(["cr-check", *BASE, "--lift", "caloric", "--mode", "spectral",
                    "--function", "gaussian:width=1", "--assert", "--tol", "1e-30",
                    "--out", str(tmp_path / "cr2.json")])
        assert code == 2


class TestExtendCommand:
    def test_writes_stack_and_csv(self, tmp_path):
        out = tmp_path / "ext.json"
        code = run(["extend", *BASE, "--kernel", "heat",
                    "--function", "gaussian:width=1", "--out", str(out)])
        assert code == 0
        assert (tmp_path / "ext.stack").exists()
        assert (tmp_path / "ext_slices.csv").exists()
        header = (tmp_path / "ext_slices.csv").read_text().splitlines()[0]
        assert header == "t,sup,l2"


class TestTransformCommand:
    def test_riesz_writes_data(self, tmp_path):
        out = tmp_path / "tr.json"
        code = run(["transform", *BASE, "--op", "riesz",
                    "--function", "bandlimited_random:seed=1,lo=0.5,hi=2", "--out", str(out)])
        assert code == 0
        assert (tmp_path / "tr.grid").exists()

    def test_multiplier_needs_symbol_file(self):
        assert run(["transform", *BASE, "--op", "multiplier"]) == 1

    def test_multiplier_with_symbol_file(self, tmp_path):
        from amalgam.grid import read_grid_function
        from amalgam.spectral import SphereSymbol, write_symbol

        sym_path = tmp_path / "hilbert.json"
        write_symbol(SphereSymbol.from_pair(-1j, 1j), sym_path)
        out = tmp_path / "mult.json"
        code = run(["transform", *BASE, "--op", "multiplier", "--symbol-file", str(sym_path),
                    "--function", "bandlimited_random:seed=4,lo=0.5,hi=2", "--out", str(out)])
        assert code == 0
        g = read_grid_function(tmp_path / "mult.grid")
        assert g.spec.n == 512


class TestHardyCommand:
    def test_reports_three_quantities(self, tmp_path):
        out = tmp_path / "h.json"
        code = run(["hardy", *BASE, "--function", "bandlimited_random:seed=2,lo=0.5,hi=2",
                    "--out", str(out)])
        assert code == 0
        res = read_report(out)["results"]
        assert set(res) >= {"maximal", "riesz", "multiplier"}
        assert (tmp_path / "h_riesz_scale.csv").exists()


class TestFreezeReportCycle:
    def test_freeze_then_assert(self, tmp_path, capsys):
        store = tmp_path / "frozen.json"
        base = ["--dim", "1", "--L", "8", "--n", "512",
                "--tmin", "0.01", "--tmax", "8", "--tcount", "10"]
        assert run(["freeze", *base, "--frozen", str(store),
                    "--out", str(tmp_path / "fr.json")]) == 0
        assert store.exists()
        code = run(["report", *base, "--methods", "maximal,riesz1", "--pq", "1,1",
                    "--frozen", str(store), "--assert", "--out", str(tmp_path / "rep.json")])
        assert code == 0
        doc = read_report(tmp_path / "rep.json")
        assert doc["results"]["pairs"]["maximal/riesz1"]["ok"] is True

    def test_report_against_wrong_grid_is_numerical_error(self, tmp_path):
        store = tmp_path / "frozen.json"
        base = ["--dim", "1", "--L", "8", "--n", "512",
                "--tmin", "0.01", "--tmax", "8", "--tcount", "10"]
        assert run(["freeze", *base, "--frozen", str(store)]) == 0
        out = tmp_path / "bad.json"
        code = run(["report", "--dim", "1", "--L", "8", "--n", "256",
                    "--tmin", "0.01", "--tmax", "8", "--tcount", "10",
                    "--methods", "maximal,riesz1", "--pq", "1,1",
                    "--frozen", str(store), "--assert", "--out", str(out)])
        assert code == 3
        doc = read_report(out)
        assert doc["status"] == "error"
        assert "grid" in doc["results"]["error"]

    def test_atoms_probe_with_frozen_band(self, tmp_path):
        store = tmp_path / "frozen.json"
        base = ["--dim", "1", "--L", "8", "--n", "512",
                "--tmin", "0.01", "--tmax", "8", "--tcount", "10"]
        assert run(["freeze", *base, "--frozen", str(store)]) == 0
        code = run(["atoms", *base, "--orders", "0,1", "--sides", "0.25,0.5,1,2,4",
                    "--frozen", str(store), "--assert", "--out", str(tmp_path / "at.json")])
        assert code == 0


class TestDeskScaleReport:
    def test_report_against_committed_store(self, tmp_path):
        # desk-scale run against the committed frozen constants
        out = tmp_path / "rep.json"
        code = run(["report", "--dim", "1", "--L", "32", "--n", "4096",
                    "--tmin", "0.001", "--tmax", "64", "--tcount", "48",
                    "--methods", "maximal,riesz1", "--pq", "1,1",
                    "--assert", "--out", str(out)])
        assert code == 0
        doc = read_report(out)
        assert doc["results"]["pairs"]["maximal/riesz1"]["ok"] is True
        assert (tmp_path / "rep_ratios.csv").exists()


class TestDeterminism:
    def test_reports_byte_identical_modulo_timestamp(self, tmp_path):
        args = ["hardy", *BASE, "--function", "bandlimited_random:seed=3,lo=0.5,hi=2"]
        docs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert run(args + ["--out", str(out)]) == 0
            doc = read_report(out)
            doc.pop("timestamp")
            docs.append(json.dumps(doc, sort_keys=True))
        assert docs[0] == docs[1]


class TestEnvironmentOverride:
    def test_frozen_dir_env(self, tmp_path, monkeypatch):
        from amalgam.frozen import default_store_path

        monkeypatch.setenv("AMALGAM_FROZEN_DIR", str(tmp_path))
        assert default_store_path() == tmp_path / "frozen_constants.json"


class TestConsoleEntry:
    def test_installed_script(self):
        proc = subprocess.run(["amalgam", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "norm" in proc.stdout
