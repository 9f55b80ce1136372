"""CLI contract: exit codes, file outputs, determinism, config round-trip."""

import json
from pathlib import Path

import pytest

from fracnls.cli import EXIT_CONFIG, EXIT_OK, main
from fracnls.service.schemas import RunConfigModel

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def tiny_config(tmp_path, **over):
    cfg = {
        "grid": {"L": 10.0, "n": 128},
        "order": {"s": 1.0},
        "time": {"T": 0.1, "dt": 0.001, "snapshot_times": [0.1],
                 "allow_large_dt": True},
        "coefficients": {
            "V": {"terms": [{"type": "constant", "value": 1.0}]},
            "g": {"terms": [{"type": "constant", "value": 1.0}]},
        },
        "initial": {"preset": "smooth_bump"},
        "regularization": {"epsilon": 0.5},
    }
    cfg.update(over)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestExitCodes:
    def test_missing_config_names_path(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "absent.json" in capsys.readouterr().err

    def test_dt_above_T_names_constraint(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        raw = json.loads(path.read_text())
        raw["time"]["dt"] = 0.5
        raw["time"]["snapshot_times"] = []
        path.write_text(json.dumps(raw))
        code = main(["run", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "dt" in err and "T" in err

    def test_invalid_json_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{ not json }")
        code = main(["run", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "line" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        raw = json.loads(path.read_text())
        raw["grids"] = raw["grid"]
        path.write_text(json.dumps(raw))
        assert main(["run", "--config", str(path),
                     "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_success_is_zero(self, tmp_path):
        path = tiny_config(tmp_path)
        assert main(["run", "--config", str(path),
                     "--out", str(tmp_path / "out")]) == EXIT_OK


class TestRunOutputs:
    def test_expected_files(self, tmp_path):
        path = tiny_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(path), "--out", str(out)]) == EXIT_OK
        assert (out / "diagnostics.csv").is_file()
        assert (out / "snapshot_t0.100000.csv").is_file()
        assert (out / "manifest.json").is_file()

    def test_case1_paper_config_file_names(self, tmp_path):
        # the shipped Case-1 run config produces the documented file set;
        # shrunk grid/time keep the test quick while preserving names
        raw = json.loads((CONFIGS / "run_case1.json").read_text())
        raw["grid"]["n"] = 128
        raw["time"]["dt"] = 0.01
        path = tmp_path / "case1.json"
        path.write_text(json.dumps(raw))
        out = tmp_path / "out"
        assert main(["run", "--config", str(path), "--out", str(out)]) == EXIT_OK
        assert (out / "snapshot_t10.000000.csv").is_file()

    def test_snapshot_schema(self, tmp_path):
        path = tiny_config(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(path), "--out", str(out)])
        lines = (out / "snapshot_t0.100000.csv").read_text().splitlines()
        assert lines[0] == "x,re_u,im_u,abs_u"
        assert len(lines) == 129

    def test_diagnostics_schema(self, tmp_path):
        path = tiny_config(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(path), "--out", str(out)])
        header = (out / "diagnostics.csv").read_text().splitlines()[0]
        assert header == ("t,mass,hamiltonian,kinetic,potential,interaction,"
                          "hs_norm,l4_norm,linf_norm")

    def test_data_files_bit_identical_across_runs(self, tmp_path):
        path = tiny_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(path), "--out", str(out1)])
        main(["run", "--config", str(path), "--out", str(out2)])
        for name in ("diagnostics.csv", "snapshot_t0.100000.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_manifest_checksums_match(self, tmp_path):
        import hashlib
        path = tiny_config(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(path), "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        for entry in manifest["files"]:
            digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
            assert digest == entry["sha256"]

    def test_config_round_trip(self, tmp_path):
        path = tiny_config(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(path), "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        echoed = RunConfigModel.model_validate(manifest["config"])
        original = RunConfigModel.model_validate(json.loads(path.read_text()))
        assert echoed == original


class TestSweepCli:
    def test_sweep_layout(self, tmp_path):
        path = tiny_config(tmp_path, regularization={"net": [0.5, 0.25, 0.125]})
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(path), "--out", str(out)]) == EXIT_OK
        subdirs = sorted(p.name for p in out.iterdir() if p.is_dir())
        assert subdirs == ["eps_0.125000", "eps_0.250000", "eps_0.500000"]
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == "epsilon,omega,sup_hs"
        assert len(summary) == 4

    def test_unique_summary_has_k_hat(self, tmp_path):
        path = tiny_config(tmp_path,
                           regularization={"net": [0.5, 0.35, 0.25, 0.18, 0.125]},
                           perturbation={"k": 3.0, "target": "data"})
        out = tmp_path / "uniq"
        assert main(["unique", "--config", str(path), "--out", str(out)]) == EXIT_OK
        fits = json.loads((out / "fits.json").read_text())
        assert "k_hat" in fits and fits["k_hat"] is not None

    def test_jobs_flag_deterministic(self, tmp_path):
        path = tiny_config(tmp_path, regularization={"net": [0.5, 0.25, 0.125]})
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        main(["sweep", "--config", str(path), "--out", str(out1)])
        main(["sweep", "--config", str(path), "--out", str(out2), "--jobs", "3"])
        assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()


class TestCaseCli:
    def test_case_with_overrides(self, tmp_path):
        ov = tmp_path / "ov.json"
        ov.write_text(json.dumps({"n": 128, "dt": 0.001, "T": 0.05,
                                  "net": [0.5, 0.25], "initial": "smooth_bump"}))
        out = tmp_path / "case"
        code = main(["case", "case2", "--config", str(ov), "--out", str(out)])
        assert code == EXIT_OK
        assert (out / "summary.csv").is_file()
        assert (out / "eps_0.500000" / "diagnostics.csv").is_file()

    def test_invalid_label_exits_nonzero(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["case", "case9", "--out", str(tmp_path)])
        assert exc.value.code == 2  # argparse choice rejection


class TestSelftestCli:
    def test_passes_and_deterministic(self, capsys):
        assert main(["selftest"]) == EXIT_OK
        out1 = capsys.readouterr().out
        assert main(["selftest"]) == EXIT_OK
        out2 = capsys.readouterr().out
        assert out1 == out2
        assert out1.count("[PASS]") == 4

    def test_fault_injection_fails_eigenfunction_check(self, monkeypatch, capsys):
        # corrupt the wavenumber table: the plane-wave check must catch it
        import fracnls.spectral as spectral
        original = spectral.Grid.wavenumbers.fget

        def corrupted(self):
            k = original(self).copy()
            k *= 1.01
            k.flags.writeable = False
            return k

        monkeypatch.setattr(spectral.Grid, "wavenumbers", property(corrupted))
        code = main(["selftest"])
        assert code != EXIT_OK
        assert "[FAIL] plane_wave_eigenfunction" in capsys.readouterr().out


class TestRemoteMode:
    def test_url_flag_round_trip(self, tmp_path, monkeypatch):
        # route the CLI's HTTP path through the ASGI app without a socket
        import httpx
        from fastapi.testclient import TestClient

        from fracnls.service.app import app

        client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            return client.post(url.replace("http://svc", ""), json=json)

        monkeypatch.setattr(httpx, "post", fake_post)
        path = tiny_config(tmp_path)
        out = tmp_path / "remote"
        code = main(["run", "--config", str(path), "--out", str(out),
                     "--url", "http://svc"])
        assert code == EXIT_OK
        assert (out / "diagnostics.csv").is_file()
