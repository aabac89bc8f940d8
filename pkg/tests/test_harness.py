import json
import math
import subprocess
import sys
from itertools import permutations

import numpy as np
import pytest

from subspace_loc import ConfigError, DomainError
from subspace_loc.harness import (
    load_config,
    load_preset,
    loads_config,
    match_and_score,
    normalize_spectrum,
    parse_angle,
    preset_names,
    rmse,
    run_scenario,
)
from subspace_loc.harness.cli import main

SMALL = """
name: small
geometry: {num_antennas: 12, spacing: 0.5}
scene:
  sources: [{angle: -pi/6}, {angle: pi/8}]
estimators:
  - {name: music, grid: 2000}
  - {name: esprit}
  - {name: gen-esprit, grid: 2000}
num_sources: 2
run: {snapshots: 50, seeds: [3, 7, 11], resolution_tol: 0.03}
"""

SMALL_NEAR = """
name: small-near
geometry: {num_antennas: 21, spacing: 0.25, reference: center}
scene:
  sources: [{angle: -pi/5, range: 8}, {angle: pi/7, range: 15}]
estimators:
  - {name: modified-music, subvectors: 6, grid: 1000, range_grid: 300}
  - {name: gen-esprit-nf, subvectors: 12, grid: 1000, range_grid: 300}
num_sources: 2
run: {snapshots: 100, seeds: 2, resolution_tol: 0.05}
"""

PRESETS = ["fig2", "fig3a", "fig3b", "fig5a", "fig5b", "fig6", "fig7", "fig8", "table1", "table2"]


def with_line(text, old, new):
    assert old in text
    return text.replace(old, new)


class TestAngles:
    @pytest.mark.parametrize("text, value", [
        ("pi/6", math.pi / 6), ("-pi/100", -math.pi / 100), ("3*pi/8", 3 * math.pi / 8),
        ("pi", math.pi), ("0.5 pi / 2", math.pi / 4), (0.25, 0.25), (0, 0.0),
    ])
    def test_parse(self, text, value):
        assert parse_angle(text) == pytest.approx(value, rel=1e-15)

    @pytest.mark.parametrize("bad", ["pie/6", "pi/0", "", True, None, [1]])
    def test_reject(self, bad):
        with pytest.raises(ConfigError):
            parse_angle(bad, "scene.sources[0].angle")


class TestConfig:
    def test_small(self):
        cfg = loads_config(SMALL)
        assert cfg.name == "small"
        assert cfg.run.seeds == (3, 7, 11)
        assert [e.name for e in cfg.estimators] == ["music", "esprit", "gen-esprit"]
        assert cfg.true_angles() == pytest.approx([-math.pi / 6, math.pi / 8])
        assert not cfg.near_field

    def test_ranges_in_fraunhofer_units(self):
        cfg = loads_config(SMALL_NEAR)
        d_f = cfg.geometry.bounds().single_antenna
        assert cfg.true_ranges() == pytest.approx([8 * d_f, 15 * d_f])

    @pytest.mark.parametrize("old, new, field", [
        ("spacing: 0.5", "spacing: -0.5", "geometry.spacing"),
        ("num_antennas: 12", "num_antennas: x", "geometry.num_antennas"),
        ("{angle: pi/8}", "{angle: 2.0}", "scene.sources[1].angle"),
        ("{angle: pi/8}", "{angle: pi/8, colour: red}", "scene.sources[1].colour"),
        ("name: music", "name: capon", "estimators[0].name"),
        ("num_sources: 2", "num_sources: 12", "num_sources"),
        ("seeds: [3, 7, 11]", "seeds: []", "run.seeds"),
        ("snapshots: 50", "snapshots: 0", "run.snapshots"),
    ])
    def test_errors_name_field(self, old, new, field):
        with pytest.raises(ConfigError) as info:
            loads_config(with_line(SMALL, old, new))
        assert info.value.field == field

    def test_compatibility(self):
        bad = with_line(SMALL_NEAR, "reference: center", "reference: first")
        with pytest.raises(ConfigError) as info:
            loads_config(bad.replace("num_antennas: 21", "num_antennas: 22"))
        assert info.value.field == "geometry.reference"
        with pytest.raises(ConfigError) as info:
            loads_config(with_line(SMALL_NEAR, "spacing: 0.25", "spacing: 0.5"))
        assert info.value.field == "geometry.spacing"
        with pytest.raises(ConfigError) as info:
            loads_config(with_line(SMALL_NEAR, "subvectors: 12", "subvectors: 21"))
        assert info.value.field == "estimators[1].subvectors"

    def test_music2d_needs_ranges(self):
        with pytest.raises(ConfigError) as info:
            loads_config(with_line(SMALL, "name: esprit", "name: music2d"))
        assert info.value.field == "scene.sources"

    def test_missing_and_empty(self, tmp_path):
        with pytest.raises(ConfigError):
            loads_config("")
        with pytest.raises(ConfigError) as info:
            loads_config("geometry: {num_antennas: 4}\nestimators: [music]\n")
        assert info.value.field == "scene"
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yaml")
        with pytest.raises(ConfigError):
            loads_config("geometry: [unclosed")

    def test_load_file(self, tmp_path):
        p = tmp_path / "mine.yaml"
        p.write_text(SMALL.replace("name: small\n", ""))
        assert load_config(p).name == "mine"

    def test_with_seeds(self):
        cfg = loads_config(SMALL).with_seeds([5])
        assert cfg.run.seeds == (5,)
        assert cfg.run.snapshots == 50


class TestPresets:
    def test_names(self):
        assert preset_names() == PRESETS

    @pytest.mark.parametrize("name", PRESETS)
    def test_loads(self, name):
        cfg = load_preset(name)
        assert cfg.name == name
        assert len(cfg.run.seeds) == 20
        assert cfg.runtime

    def test_unknown(self):
        with pytest.raises(ConfigError):
            load_preset("fig99")


class TestMatchAndScore:
    def test_identity(self):
        s = match_and_score([0.1, 0.5, -0.2], [0.1, 0.5, -0.2])
        assert s.angle_errors == [0.0, 0.0, 0.0]
        assert s.misses == 0 and s.false_alarms == 0

    def test_permutation(self):
        truth = [-0.6, -0.1, 0.3, 0.9]
        est = [0.31, -0.62, 0.88, -0.1]
        a = match_and_score(est, truth)
        b = match_and_score(sorted(est), truth)
        assert a.angle_errors == pytest.approx(b.angle_errors)
        assert a.angle_errors == pytest.approx([0.02, 0.0, 0.01, 0.02])

    def test_miss(self):
        s = match_and_score([-0.6, 0.3, 0.9], [-0.6, -0.1, 0.3, 0.9])
        assert s.misses == 1 and s.false_alarms == 0
        assert s.angle_errors[1] is None and s.assignment[1] is None

    def test_false_alarm(self):
        s = match_and_score([-0.6, 0.0, 0.3], [-0.6, 0.3])
        assert s.misses == 0 and s.false_alarms == 1

    def test_minimum_total_error(self):
        # greedy closest-pair matching takes (1.0, 0.6) first and totals 1.9
        s = match_and_score([0.6, 1.5], [0.0, 1.0])
        assert s.assignment == [0, 1]
        assert sum(s.angle_errors) == pytest.approx(1.1)

    def test_brute_force_agreement(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            truth = rng.uniform(-1.5, 1.5, 5)
            est = truth + rng.normal(0, 0.3, 5)
            best = min(sum(abs(est[p[i]] - truth[i]) for i in range(5)) for p in permutations(range(5)))
            assert sum(match_and_score(est, truth).angle_errors) == pytest.approx(best)

    def test_ranges(self):
        s = match_and_score([0.2, -0.1], [-0.1, 0.2], [11.0, 5.0], [5.0, 10.0])
        assert s.range_errors == pytest.approx([0.0, 0.1])
        far = match_and_score([0.2], [0.2], [3.0], [math.inf])
        assert far.range_errors == [None]

    def test_empty(self):
        s = match_and_score([], [0.1, 0.2])
        assert s.misses == 2


class TestNormalizeAndRmse:
    def test_example(self):
        np.testing.assert_allclose(normalize_spectrum(np.array([2.0, 4.0, 8.0])), [0.25, 0.5, 1.0])

    def test_idempotent(self):
        v = normalize_spectrum(np.array([0.1, 3.0, 0.7]))
        np.testing.assert_array_equal(normalize_spectrum(v), v)

    def test_argmax(self):
        v = np.random.default_rng(0).uniform(0, 5, (7, 9))
        assert np.argmax(normalize_spectrum(v)) == np.argmax(v)

    def test_all_zero(self):
        with pytest.raises(DomainError):
            normalize_spectrum(np.zeros(4))

    def test_rmse(self):
        assert rmse([3.0, None, 4.0]) == pytest.approx(math.sqrt(12.5))
        assert rmse([None]) is None


class TestRunScenario:
    def test_far_field(self, tmp_path):
        report = run_scenario(loads_config(SMALL), tmp_path)
        for name in ("music", "esprit", "gen-esprit"):
            agg = report.estimators[name].aggregate(2)
            assert agg["seeds"] == 3
            assert agg["max_angle_error"] < 0.03
            assert agg["under_resolved_seeds"] == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == [
            "estimates.json", "report.json", "spectrum.csv", "timing.json"]

    def test_near_field_ranges(self):
        report = run_scenario(loads_config(SMALL_NEAR))
        for name in ("modified-music", "gen-esprit-nf"):
            for seed in report.estimators[name].per_seed:
                assert len(seed.ranges) == 2
                assert max(seed.range_errors) < 0.3

    def test_deterministic(self, tmp_path):
        cfg = loads_config(SMALL)
        run_scenario(cfg, tmp_path / "a")
        run_scenario(cfg, tmp_path / "b")
        for f in ("report.json", "estimates.json", "spectrum.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_rmse_self_consistency(self, tmp_path):
        run_scenario(loads_config(SMALL), tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        est = json.loads((tmp_path / "estimates.json").read_text())
        truth = np.array(est["truth"]["angles"])
        for name, rows in est["estimates"].items():
            errs = []
            for row in rows:
                errs += [e for e in match_and_score(row["angles"], truth).angle_errors if e is not None]
            recomputed = math.sqrt(np.mean(np.square(errs)))
            assert report["estimators"][name]["aggregate"]["angle_rmse"] == pytest.approx(recomputed, rel=1e-12)

    def test_spectrum_csv(self, tmp_path):
        run_scenario(loads_config(SMALL), tmp_path)
        lines = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert lines[0] == "estimator,angle,range,value,normalized"
        music = [ln.split(",") for ln in lines[1:] if ln.startswith("music,")]
        assert len(music) == 2000
        assert max(float(r[4]) for r in music) == 1.0
        assert all(len(r[1].replace("-", "").replace(".", "").lstrip("0")) <= 13 for r in music)

    def test_spectrum_disabled(self, tmp_path):
        cfg = loads_config(with_line(SMALL, "seeds: [3, 7, 11]", "seeds: [3], spectrum: false"))
        run_scenario(cfg, tmp_path)
        assert not (tmp_path / "spectrum.csv").exists()

    def test_auto_count(self):
        cfg = loads_config(with_line(SMALL, "num_sources: 2", "num_sources: auto"))
        report = run_scenario(cfg)
        assert all(s.num_sources == 2 for s in report.estimators["music"].per_seed)

    def test_order_independent_aggregation(self):
        a = run_scenario(loads_config(SMALL))
        b = run_scenario(loads_config(SMALL).with_seeds([11, 3, 7]))
        by_seed = {s.seed: s.angle_errors for s in a.estimators["esprit"].per_seed}
        for s in b.estimators["esprit"].per_seed:
            assert s.angle_errors == by_seed[s.seed]
        assert (a.estimators["esprit"].aggregate(2)["angle_rmse"]
                == pytest.approx(b.estimators["esprit"].aggregate(2)["angle_rmse"], rel=1e-14))


class TestCli:
    def test_list_presets(self, capsys):
        assert main(["list-presets"]) == 0
        assert capsys.readouterr().out.split() == PRESETS

    def test_run_config(self, tmp_path, capsys):
        cfg = tmp_path / "small.yaml"
        cfg.write_text(SMALL)
        out = tmp_path / "out"
        assert main(["run", str(cfg), "--seed", "1", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "music" in text and "esprit" in text
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["run"]["seeds"] == [1]

    def test_run_preset(self, tmp_path):
        assert main(["run", "--preset", "fig7", "--seed", "0", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "report.json").exists()

    def test_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text(with_line(SMALL, "spacing: 0.5", "spacing: zero"))
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"] == "ConfigError"
        assert err["field"] == "geometry.spacing"

    def test_config_and_preset_exclusive(self, capsys):
        assert main(["run"]) == 2
        assert main(["run", "x.yaml", "--preset", "fig7"]) == 2
        for line in capsys.readouterr().err.strip().splitlines():
            assert json.loads(line)["error"] == "ConfigError"

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "UsageError"

    def test_negative_seed(self, capsys):
        assert main(["run", "--preset", "fig7", "--seed", "-1"]) == 2
        assert json.loads(capsys.readouterr().err)["field"] == "--seed"

    def test_console_script(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "subspace_loc.harness.cli", "run",
                               str(tmp_path / "missing.yaml")], capture_output=True, text=True)
        assert proc.returncode == 2
        assert json.loads(proc.stderr)["error"] == "ConfigError"
