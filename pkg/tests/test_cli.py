import hashlib
import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from bedcast import pipeline
from bedcast.cli import main
from bedcast.errors import SchemaError


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture
def snapshot_copy(snapshot_dir, tmp_path):
    """Private copy for commands that overwrite shared artifacts."""
    dest = tmp_path / "snap"
    shutil.copytree(snapshot_dir, dest)
    return dest


def tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestLoadConfig:
    def test_empty_gives_defaults(self):
        cfg = pipeline.load_config(None)
        assert cfg.gamma == 1.0
        assert cfg.alphas == [0.05, 0.01]
        assert cfg.eta == 1.0
        assert cfg.psi == 1.0
        assert cfg.runs == 300

    def test_alpha_out_of_range(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"alphas": [1.5]}')
        with pytest.raises(SchemaError) as err:
            pipeline.load_config(path)
        assert err.value.pointer == "/alphas/0"

    def test_unknown_key_rejected(self):
        with pytest.raises(SchemaError):
            pipeline.load_config({"alpha": 0.05})

    def test_runs_override(self):
        assert pipeline.load_config({"runs": 50}).runs == 50


class TestCommands:
    def test_plan_subcommand_json_output(self, runner, snapshot_copy):
        result = runner.invoke(
            main,
            ["plan", "--out", str(snapshot_copy), "--site", "S1",
             "--gamma", "1", "--alpha", "0.05"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((snapshot_copy / "sites" / "S1" / "plan.json").read_text())
        key = pipeline.overflow_key(1.0, 0.05)
        assert isinstance(payload["beds"][key], int)
        assert payload["beds"][key] >= 1

    def test_unknown_flag_is_usage_error(self, runner):
        result = runner.invoke(main, ["plan", "--no-such-flag"])
        assert result.exit_code == 2

    def test_missing_out_is_usage_error(self, runner):
        result = runner.invoke(main, ["decompose"], env={"BEDCAST_OUT": None})
        assert result.exit_code == 2

    def test_out_env_fallback(self, runner, snapshot_dir):
        result = runner.invoke(
            main, ["diagnose"], env={"BEDCAST_OUT": str(snapshot_dir)}
        )
        assert result.exit_code == 0, result.output
        assert (snapshot_dir / "sites" / "S1" / "diagnostics.json").exists()

    def test_variance_scenario_on_exponential_site_fails(self, runner, exponential_snapshot_dir):
        result = runner.invoke(
            main,
            ["scenario", "--out", str(exponential_snapshot_dir), "--site", "S1",
             "--beta-sigma2", "0.5"],
        )
        assert result.exit_code == 1
        assert "lognormal" in result.output

    def test_scenario_identity_matches_plan(self, runner, snapshot_dir):
        result = runner.invoke(
            main, ["scenario", "--out", str(snapshot_dir), "--site", "S1"]
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((snapshot_dir / "sites" / "S1" / "scenario.json").read_text())
        assert payload["baseline_beds"] == payload["scenario_beds"]
        assert all(v == 0.0 for v in payload["occupancy"]["delta"])

    def test_unknown_site_is_data_error(self, runner, snapshot_dir):
        result = runner.invoke(main, ["occupancy", "--out", str(snapshot_dir), "--site", "NOPE"])
        assert result.exit_code == 1

    def test_bad_config_exit_code(self, runner, snapshot_dir, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"gamma": 2.0}')
        result = runner.invoke(
            main, ["plan", "--out", str(snapshot_dir), "--config", str(bad)]
        )
        assert result.exit_code == 1
        assert "/gamma" in result.output


class TestPipelineDeterminism:
    def test_rerun_is_byte_identical(self, runner, synthetic_csv, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            result = runner.invoke(
                main, ["run", "--input", str(synthetic_csv), "--out", str(out)]
            )
            assert result.exit_code == 0, result.output
        digests = []
        for out in (out1, out2):
            # the manifest records its own output directory; normalize it
            manifest = json.loads((out / "manifest.json").read_text())
            manifest["out"] = "OUT"
            (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True))
            digests.append(tree_digest(out))
        assert digests[0] == digests[1]

    def test_simulate_deterministic(self, runner, tmp_path):
        files = []
        for name in ("x.csv", "y.csv"):
            result = runner.invoke(
                main,
                ["simulate", "--out-file", str(tmp_path / name), "--sites", "1",
                 "--days", "120", "--seed", "3"],
            )
            assert result.exit_code == 0
            files.append((tmp_path / name).read_bytes())
        assert files[0] == files[1]


class TestProjectCommand:
    def test_project_with_births_csv(self, runner, snapshot_dir, tmp_path):
        births = tmp_path / "births.csv"
        rows = ["year,births"] + [f"{y},{19000 + 100 * (y - 2022)}" for y in range(2022, 2029)]
        births.write_text("\n".join(rows) + "\n")
        result = runner.invoke(
            main,
            ["project", "--out", str(snapshot_dir), "--births", str(births),
             "--runs", "8", "--seed", "4"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((snapshot_dir / "projection.json").read_text())
        assert payload["runs"] == 8
        assert len(payload["rows"]) > 0
        row = payload["rows"][0]
        assert {"site_id", "year", "b_average"} <= set(row)
        assert (snapshot_dir / "projection.csv").exists()
