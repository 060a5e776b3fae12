import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import staticpot.cli as cli
import staticpot.config as cfgmod
from staticpot.errors import ConfigError, IoError


class TestConfigParsing:
    def test_basic_lines_comments_and_blanks(self):
        text = """
        # run with a heavier mass
        mass = 2.5
        n_points = 12   # inline comment
        label = spherical run
        """
        cfg = cfgmod.parse_config_text(text)
        assert cfg == {"mass": "2.5", "n_points": "12", "label": "spherical run"}

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            cfgmod.parse_config_text("a = 1\na = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            cfgmod.parse_config_text("just words\n")

    def test_bad_key_rejected(self):
        with pytest.raises(ConfigError, match="bad key"):
            cfgmod.parse_config_text("Mass = 1\n")
        with pytest.raises(ConfigError, match="bad key"):
            cfgmod.parse_config_text("2fast = 1\n")

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            cfgmod.load_config(str(tmp_path / "nope.cfg"))

    def test_load_config_roundtrip(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("mass = 3\n# comment only\ntol = 1e-8\n")
        assert cfgmod.load_config(str(p)) == {"mass": "3", "tol": "1e-8"}

    @settings(max_examples=25, deadline=None)
    @given(st.dictionaries(
        st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True),
        st.text(alphabet=st.characters(blacklist_characters="#=\n\r",
                                       min_codepoint=33, max_codepoint=126),
                min_size=1, max_size=10),
        max_size=6))
    def test_parse_inverts_formatting(self, entries):
        text = "\n".join(f"{k} = {v}" for k, v in entries.items())
        assert cfgmod.parse_config_text(text) == {
            k: v.strip() for k, v in entries.items()}


class TestMergeAndCoercion:
    def test_unknown_key_lists_allowed(self):
        with pytest.raises(ConfigError) as err:
            cfgmod.merge_with_defaults({"masss": "1"}, {"mass": "1", "tol": "1e-6"},
                                       "demo")
        assert "masss" in str(err.value)
        assert "mass, tol" in str(err.value)

    def test_overrides_apply_on_top_of_defaults(self):
        merged = cfgmod.merge_with_defaults({"tol": "1e-3"},
                                            {"mass": "1", "tol": "1e-6"}, "demo")
        assert merged == {"mass": "1", "tol": "1e-3"}

    def test_coercers_accept_good_values(self):
        cfg = {"a": "2.5", "b": "7", "c": "true", "d": "1, 2.5, -3"}
        assert cfgmod.as_float(cfg, "a") == 2.5
        assert cfgmod.as_int(cfg, "b") == 7
        assert cfgmod.as_bool(cfg, "c") is True
        assert cfgmod.as_float_list(cfg, "d") == [1.0, 2.5, -3.0]

    @pytest.mark.parametrize("fn,val", [
        (cfgmod.as_float, "wide"),
        (cfgmod.as_int, "2.5"),
        (cfgmod.as_bool, "maybe"),
        (cfgmod.as_float_list, "1, two, 3"),
    ])
    def test_coercers_reject_bad_values(self, fn, val):
        with pytest.raises(ConfigError):
            fn({"k": val}, "k")


class TestPlotData:
    def test_writes_rows_with_full_precision(self, tmp_path):
        cli.emit_plot_data(str(tmp_path), "data.csv", ("r", "value"),
                           [(1.0, 1.0 / 3.0), (2.0, 0.1)])
        lines = (tmp_path / "data.csv").read_text().strip().splitlines()
        assert lines[0] == "r,value"
        assert lines[1].split(",")[1] == "%.17g" % (1.0 / 3.0)

    def test_header_only_when_empty(self, tmp_path):
        cli.emit_plot_data(str(tmp_path), "empty.csv", ("a", "b"), [])
        assert (tmp_path / "empty.csv").read_text().strip() == "a,b"

    def test_unwritable_target_raises(self, tmp_path):
        with pytest.raises(IoError):
            cli.emit_plot_data(str(tmp_path / "no_such_dir"), "x.csv", ("a",), [])


class TestRunSuite:
    def test_unknown_suite(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown suite"):
            cli.run_suite("no_such_suite", {}, str(tmp_path))

    def test_report_shape_and_files(self, tmp_path):
        report = cli.run_suite("euclidean_affine", {"n_points": "10"},
                               str(tmp_path), seed=3)
        assert report["suite"] == "euclidean_affine"
        assert report["seed"] == 3
        assert report["passed"] is True
        assert report["n_failed"] == 0
        assert {c["name"] for c in report["checks"]} == {
            "curvature_zero", "static_residual_zero",
            "eigenframe_all_equal", "fd_backend_agreement"}
        on_disk = json.loads((tmp_path / "report.json").read_text())
        assert on_disk == report
        timing = json.loads((tmp_path / "timing.json").read_text())
        assert timing["suite"] == "euclidean_affine"
        assert timing["elapsed_seconds"] >= 0.0

    def test_same_seed_same_bytes(self, tmp_path):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        cli.run_suite("euclidean_affine", {"n_points": "10"}, str(a_dir), seed=7)
        cli.run_suite("euclidean_affine", {"n_points": "10"}, str(b_dir), seed=7)
        assert (a_dir / "report.json").read_bytes() == (b_dir / "report.json").read_bytes()

    def test_parallel_matches_serial(self, tmp_path):
        s_dir, p_dir = tmp_path / "serial", tmp_path / "parallel"
        serial = cli.run_suite("euclidean_affine", {"n_points": "10"},
                               str(s_dir), seed=5, parallel=False)
        parallel = cli.run_suite("euclidean_affine", {"n_points": "10"},
                                 str(p_dir), seed=5, parallel=True)
        assert serial == parallel

    def test_impossible_tolerance_fails_honestly(self, tmp_path):
        report = cli.run_suite("schwarzschild_static",
                               {"n_points": "4", "tol": "1e-25"},
                               str(tmp_path), seed=0)
        assert report["passed"] is False
        assert report["n_failed"] >= 1

    def test_library_error_becomes_failed_check(self, tmp_path):
        # a huge fit window makes the design matrix ill conditioned
        report = cli.run_suite("mass_fit", {"window": "1e9, 1e12"},
                               str(tmp_path), seed=0)
        assert report["passed"] is False
        failed = [c for c in report["checks"] if not c["passed"]]
        assert failed
        assert any("Error" in c["detail"] for c in failed)


class TestCommandLine:
    def test_verify_pass_exit_zero(self, tmp_path, capsys):
        rc = cli.main(["verify", "euclidean_affine", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "[PASS] euclidean_affine.curvature_zero" in out
        assert "0 failed" in out

    def test_verify_fail_exit_one(self, tmp_path, capsys):
        cfg = tmp_path / "strict.cfg"
        cfg.write_text("n_points = 4\ntol = 1e-25\n")
        rc = cli.main(["verify", "schwarzschild_static",
                       "--config", str(cfg), "--out", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert rc == 1
        assert "[FAIL]" in out

    def test_unknown_suite_exit_two(self, tmp_path, capsys):
        rc = cli.main(["verify", "bogus", "--out", str(tmp_path)])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_config_key_exit_two(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("masss = 2\n")
        rc = cli.main(["verify", "euclidean_affine",
                       "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "allowed" in capsys.readouterr().err

    def test_missing_config_file_exit_two(self, tmp_path, capsys):
        rc = cli.main(["verify", "euclidean_affine",
                       "--config", str(tmp_path / "gone.cfg"),
                       "--out", str(tmp_path)])
        assert rc == 2
        capsys.readouterr()

    def test_malformed_suite_value_exit_two(self, tmp_path, capsys):
        cfg = tmp_path / "short.cfg"
        cfg.write_text("coeffs = 1, 2\n")
        rc = cli.main(["verify", "euclidean_affine",
                       "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "coeffs" in capsys.readouterr().err

    def test_list_suites_names_and_keys(self, capsys):
        rc = cli.main(["list-suites"])
        out = capsys.readouterr().out
        assert rc == 0
        names = [line.split(":")[0] for line in out.strip().splitlines()]
        assert names == sorted(names)
        assert "schwarzschild_static" in names
        assert len(names) == len(cli.SUITES)
        line = next(l for l in out.splitlines()
                    if l.startswith("schwarzschild_static:"))
        assert "mass" in line and "tol" in line

    def test_dump_curvature_values(self, tmp_path, capsys):
        rc = cli.main(["dump-curvature", "--metric", "schwarzschild:mass=2",
                       "--points", "3,0,0", "--out", str(tmp_path)])
        assert rc == 0
        capsys.readouterr()
        lines = (tmp_path / "curvature.csv").read_text().strip().splitlines()
        header = lines[0].split(",")
        row = dict(zip(header, map(float, lines[1].split(","))))
        # closed form: (m/r^3) phi^-2 (delta - 3 rhat rhat) at (3, 0, 0)
        assert row["ric_11"] == pytest.approx(-1.0 / 12.0, rel=1e-10)
        assert row["ric_22"] == pytest.approx(1.0 / 24.0, rel=1e-10)
        assert row["ric_33"] == pytest.approx(1.0 / 24.0, rel=1e-10)
        assert abs(row["scalar"]) < 1e-10

    def test_dump_curvature_points_file(self, tmp_path, capsys):
        pts = tmp_path / "pts.txt"
        pts.write_text("3,0,0\n0,4,0\n")
        rc = cli.main(["dump-curvature", "--metric", "euclidean",
                       "--points-file", str(pts), "--out", str(tmp_path)])
        assert rc == 0
        capsys.readouterr()
        lines = (tmp_path / "curvature.csv").read_text().strip().splitlines()
        assert len(lines) == 3
        vals = [float(v) for v in lines[1].split(",")[3:]]
        assert np.allclose(vals, 0.0, atol=1e-12)

    def test_dump_curvature_needs_points(self, tmp_path, capsys):
        rc = cli.main(["dump-curvature", "--out", str(tmp_path)])
        assert rc == 2
        assert "points" in capsys.readouterr().err

    def test_bad_metric_spec_exit_two(self, tmp_path, capsys):
        rc = cli.main(["dump-curvature", "--metric", "kerr",
                       "--points", "1,0,0", "--out", str(tmp_path)])
        assert rc == 2
        assert "metric" in capsys.readouterr().err

    def test_bad_point_exit_two(self, tmp_path, capsys):
        rc = cli.main(["dump-curvature", "--points", "1,0",
                       "--out", str(tmp_path)])
        assert rc == 2
        capsys.readouterr()
