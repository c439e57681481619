"""Service endpoints and the CLI front end."""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from idfi.cli import main
from idfi.verifier import SUITE_NAMES, canonical_bytes, default_config, schema_dict
from tests.test_verifier import small_config


@pytest.fixture(scope="module")
def client():
    from idfi.service import app
    return TestClient(app)


class TestService:
    def test_suites_endpoint(self, client):
        resp = client.get("/suites")
        assert resp.status_code == 200
        assert resp.json()["suites"] == list(SUITE_NAMES)

    def test_defaults_endpoint(self, client):
        resp = client.get("/defaults")
        assert resp.status_code == 200
        assert resp.json() == default_config().model_dump(mode="json")

    def test_schema_endpoint(self, client):
        resp = client.get("/schema")
        assert resp.status_code == 200
        assert resp.json() == schema_dict()

    def test_verify_small_suite(self, client):
        cfg = small_config(suite="riccati_core")
        resp = client.post("/verify", json=cfg.model_dump(mode="json"))
        assert resp.status_code == 200
        body = resp.json()
        assert body["exit_code"] == 0
        assert len(body["reports"]) == 1
        report = body["reports"][0]
        assert report["suite"] == "riccati_core"
        assert report["counts"]["fail"] == 0
        assert all(rec["anchor"] for rec in report["records"])

    def test_verify_unknown_key_rejected(self, client):
        resp = client.post("/verify", json={"seed": 1, "mystery": 2})
        assert resp.status_code == 422

    def test_verify_bad_value_rejected(self, client):
        resp = client.post("/verify", json={"n_paths": 3})
        assert resp.status_code == 422

    def test_verify_writes_outputs(self, client, tmp_path):
        cfg = small_config(suite="flat_local_lsi", out_dir=str(tmp_path))
        resp = client.post("/verify", json=cfg.model_dump(mode="json"))
        assert resp.status_code == 200
        assert (tmp_path / "flat_local_lsi.json").exists()
        assert (tmp_path / "flat_local_lsi_records.csv").exists()
        assert (tmp_path / "flat_local_lsi_cases.csv").exists()
        assert set(resp.json()["written"]) == {
            str(p) for p in tmp_path.iterdir()}


def _write_small(tmp_path, **kw):
    cfg = small_config(**kw)
    path = tmp_path / "config.json"
    path.write_text(cfg.model_dump_json())
    return path


class TestCli:
    def test_list_suites(self):
        result = CliRunner().invoke(main, ["list-suites"])
        assert result.exit_code == 0
        assert result.output.split() == list(SUITE_NAMES)

    def test_dump_defaults_parses(self):
        result = CliRunner().invoke(main, ["dump-defaults"])
        assert result.exit_code == 0
        assert json.loads(result.output) == default_config().model_dump(mode="json")

    def test_verify_suite_runs(self, tmp_path):
        cfg_path = _write_small(tmp_path)
        result = CliRunner().invoke(
            main, ["verify", "riccati_core", "--config", str(cfg_path)])
        assert result.exit_code == 0
        assert "riccati_core" in result.output
        assert "0 fail" in result.output

    def test_verify_rejects_unknown_suite_name(self):
        result = CliRunner().invoke(main, ["verify", "bogus"])
        assert result.exit_code != 0

    def test_verify_rejects_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"mystery": 1}))
        result = CliRunner().invoke(
            main, ["verify", "riccati_core", "--config", str(path)])
        assert result.exit_code != 0
        assert "mystery" in result.output

    def test_verify_out_dir_writes_files(self, tmp_path):
        cfg_path = _write_small(tmp_path)
        out = tmp_path / "out"
        result = CliRunner().invoke(
            main, ["verify", "flat_local_lsi", "--config", str(cfg_path),
                   "--out-dir", str(out)])
        assert result.exit_code == 0
        assert (out / "flat_local_lsi.json").exists()
        assert (out / "flat_local_lsi_records.csv").exists()

    def test_verify_deterministic_across_runs(self, tmp_path):
        cfg_path = _write_small(tmp_path)
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            result = CliRunner().invoke(
                main, ["verify", "riccati_core", "--config", str(cfg_path),
                       "--out-dir", str(out)])
            assert result.exit_code == 0
            outs.append((out / "riccati_core.json").read_text())
        assert canonical_bytes(outs[0]) == canonical_bytes(outs[1])

    def test_verify_jobs_flag_does_not_change_reports(self, tmp_path):
        cfg_path = _write_small(tmp_path)
        outs = []
        for sub, jobs in (("j1", "1"), ("j4", "4")):
            out = tmp_path / sub
            result = CliRunner().invoke(
                main, ["verify", "part1", "--config", str(cfg_path),
                       "--out-dir", str(out), "--jobs", jobs])
            assert result.exit_code == 0
            outs.append((out / "part1.json").read_text())
        assert canonical_bytes(outs[0]) == canonical_bytes(outs[1])

    def test_verify_seed_flag_overrides_config(self, tmp_path):
        cfg_path = _write_small(tmp_path)
        texts = []
        for sub, seed in (("s0", "0"), ("s9", "9")):
            out = tmp_path / sub
            result = CliRunner().invoke(
                main, ["verify", "riccati_core", "--config", str(cfg_path),
                       "--out-dir", str(out), "--seed", seed])
            assert result.exit_code == 0
            texts.append((out / "riccati_core.json").read_text())
        assert canonical_bytes(texts[0]) != canonical_bytes(texts[1])
        assert json.loads(texts[1])["environment"]["seed"] == 9

    def test_config_suite_respected_without_argument(self, tmp_path):
        cfg_path = _write_small(tmp_path, suite="riccati_core")
        result = CliRunner().invoke(main, ["verify", "--config", str(cfg_path)])
        assert result.exit_code == 0
        assert "suite riccati_core" in result.output
        assert "suite part1" not in result.output

    def test_tolerance_scale_flag_lands_in_records(self, tmp_path):
        cfg_path = _write_small(tmp_path)
        out = tmp_path / "out"
        result = CliRunner().invoke(
            main, ["verify", "riccati_core", "--config", str(cfg_path),
                   "--out-dir", str(out), "--tolerance-scale", "10"])
        assert result.exit_code == 0
        report = json.loads((out / "riccati_core.json").read_text())
        tols = [rec["tolerance"] for rec in report["records"]
                if rec["tolerance"] is not None]
        assert tols and all(t >= 1e-7 for t in tols)
        assert report["environment"]["tolerance_scale"] == 10.0
