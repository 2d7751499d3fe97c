import json
import os

import numpy as np
import pytest

import geim
from geim import artifacts
from geim.cli import main


BASE_CONFIG = {
    "family": {
        "kind": "gaussian_bump",
        "params": {"start": -0.8, "stop": 0.8, "count": 30},
        "normalize": True,
        "width": 0.25,
    },
    "grid": {"a": -1.0, "b": 1.0, "n": 150},
    "dictionary": {"kind": "dirac", "centers": {"start": -1.0, "stop": 1.0, "count": 75}},
    "greedy": {"n_max": 12, "mode": "hilbert", "stop_tol": 1e-12, "seed": 0},
}


@pytest.fixture
def workdir(tmp_path):
    cfg = dict(BASE_CONFIG)
    cfg["outputs"] = str(tmp_path / "run")
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return tmp_path, str(path)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestBuild:
    def test_writes_artifact_and_csv(self, workdir, capsys):
        tmp, cfg = workdir
        assert main(["build", "--config", cfg]) == 0
        out = tmp / "run"
        assert (out / "artifact.json").exists()
        lines = (out / "greedy.csv").read_text().splitlines()
        assert lines[0] == "n,eps_n,effective_eta,selected_phi_index,selected_sigma_index"
        assert len(lines) == 13  # header + 12 steps
        assert "selected 12" in capsys.readouterr().out

    def test_rerun_is_byte_identical(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        art1 = read(tmp / "run" / "artifact.json")
        csv1 = read(tmp / "run" / "greedy.csv")
        main(["build", "--config", cfg])
        assert read(tmp / "run" / "artifact.json") == art1
        assert read(tmp / "run" / "greedy.csv") == csv1

    def test_seed_override_changes_nothing_for_full_schedule(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        art1 = read(tmp / "run" / "artifact.json")
        main(["build", "--config", cfg, "--seed", "99"])
        assert read(tmp / "run" / "artifact.json") == art1

    def test_early_stop_reported(self, tmp_path, capsys):
        cfg = dict(BASE_CONFIG)
        cfg["family"] = dict(cfg["family"], params={"start": -0.001, "stop": 0.001, "count": 4})
        cfg["greedy"] = dict(cfg["greedy"], n_max=4, stop_tol=1e-6)
        cfg["outputs"] = str(tmp_path / "run")
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        assert main(["build", "--config", str(p)]) == 0
        assert "stopped_early=True" in capsys.readouterr().out

    def test_config_parse_error_has_line_context(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "family": ,\n}')
        assert main(["build", "--config", str(p)]) == 2
        err = capsys.readouterr().err
        assert "line 2" in err

    def test_artifact_roundtrips_byte_exactly(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        path = tmp / "run" / "artifact.json"
        result = artifacts.load_artifact(path)
        artifacts.save_artifact(tmp / "copy.json", result)
        assert read(path) == read(tmp / "copy.json")


class TestAnalyze:
    def test_analysis_outputs(self, workdir, capsys):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        assert main(["analyze", "--config", cfg]) == 0
        out = tmp / "run"
        lines = (out / "analysis.csv").read_text().splitlines()
        assert lines[0] == "n,tau,d,lambda,beta,gamma,lebesgue_upper"
        footers = [l for l in lines if l.startswith("#")]
        assert any("tau_nonincreasing: pass" in l for l in footers)
        data = json.loads((out / "analysis.json").read_text())
        lam = np.array(data["lambda"])
        beta = np.array(data["beta"])
        np.testing.assert_allclose(lam * beta, 1.0, atol=1e-12)

    def test_plot_data_emission(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        main(["analyze", "--config", cfg, "--emit-plots"])
        for name in ("tau.dat", "d.dat", "eps.dat"):
            lines = (tmp / "run" / name).read_text().splitlines()
            assert len(lines) == 12
            assert len(lines[0].split()) == 2

    def test_sup_run_flags_surrogate_widths(self, tmp_path):
        cfg = dict(BASE_CONFIG)
        cfg["greedy"] = dict(cfg["greedy"], mode="sup")
        cfg["greedy"]["n_max"] = 6
        cfg["outputs"] = str(tmp_path / "run")
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        main(["build", "--config", str(p)])
        main(["analyze", "--config", str(p)])
        text = (tmp_path / "run" / "analysis.csv").read_text()
        assert "hilbert_surrogate=true" in text
        data = json.loads((tmp_path / "run" / "analysis.json").read_text())
        assert data["d_is_hilbert_surrogate"] is True

    def test_grid_mismatch_rejected(self, workdir, tmp_path, capsys):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        other = json.loads(open(cfg).read())
        other["grid"]["n"] = 151
        p = tmp / "other.json"
        p.write_text(json.dumps(other))
        assert main(["analyze", "--config", str(p)]) == 2
        assert "grid" in capsys.readouterr().err


class TestAudit:
    def test_healthy_run_exits_zero(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        main(["analyze", "--config", cfg])
        assert main(["audit", "--config", cfg, "--sweep-theorem"]) == 0
        report = json.loads((tmp / "run" / "audit.json").read_text())
        assert report["summary"]["failed"] == 0
        assert (tmp / "run" / "audit.txt").exists()

    def test_corrupted_tau_fails_with_named_check(self, workdir, capsys):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        main(["analyze", "--config", cfg])
        path = tmp / "run" / "analysis.json"
        data = json.loads(path.read_text())
        data["tau"][5] = data["tau"][2] * 2.0  # inject nonmonotone tau
        path.write_text(json.dumps(data))
        assert main(["audit", "--config", cfg]) == 1
        out = capsys.readouterr().out
        assert "tau_nonincreasing" in out

    def test_missing_analysis_is_explicit(self, workdir, capsys):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        assert main(["audit", "--config", cfg]) == 2
        assert "analyze" in capsys.readouterr().err

    def test_sweep_flag_enumerates_more_checks(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        main(["analyze", "--config", cfg])
        main(["audit", "--config", cfg])
        small = json.loads((tmp / "run" / "audit.json").read_text())["summary"]["total"]
        main(["audit", "--config", cfg, "--sweep-theorem"])
        big = json.loads((tmp / "run" / "audit.json").read_text())["summary"]["total"]
        assert big > small


class TestAssimilate:
    def _measurements(self, tmp, cfg, n, truth_index=5):
        result = artifacts.load_artifact(os.path.join(tmp, "run", "artifact.json"))
        f = result.selected_phi[truth_index]
        m = [geim.apply_functional(s, f) for s in result.selected_sigma[:n]]
        path = os.path.join(tmp, "meas.csv")
        with open(path, "w") as fh:
            fh.write("value\n")
            for v in m:
                fh.write(f"{v!r}\n")
        return path, f

    def test_reconstruction_matches_truth(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        meas, truth = self._measurements(str(tmp), cfg, 10, truth_index=3)
        assert main(["assimilate", "--config", cfg, "--measurements", meas, "--n", "10"]) == 0
        rows = (tmp / "run" / "reconstruction.csv").read_text().splitlines()
        assert rows[0] == "point,value"
        vals = np.array([float(r.split(",")[1]) for r in rows[1:] if not r.startswith("#")])
        np.testing.assert_allclose(vals, truth.values, atol=1e-9)

    def test_zero_measurements_zero_field(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        path = tmp / "zeros.csv"
        path.write_text("value\n" + "0.0\n" * 5)
        assert main(["assimilate", "--config", cfg, "--measurements", str(path), "--n", "5"]) == 0
        rows = (tmp / "run" / "reconstruction.csv").read_text().splitlines()[1:]
        vals = [float(r.split(",")[1]) for r in rows if not r.startswith("#")]
        assert all(v == 0.0 for v in vals)

    def test_nan_measurements_rejected(self, workdir):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        path = tmp / "nan.csv"
        path.write_text("value\n1.0\nnan\n")
        with pytest.raises(ValueError):
            main(["assimilate", "--config", cfg, "--measurements", str(path), "--n", "2"])

    def test_too_few_measurements(self, workdir, capsys):
        tmp, cfg = workdir
        main(["build", "--config", cfg])
        path = tmp / "short.csv"
        path.write_text("value\n1.0\n")
        assert main(["assimilate", "--config", cfg, "--measurements", path.as_posix(),
                     "--n", "5"]) == 2


def test_geim_threads_env_caps_blas_pool():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import geim, os; print(os.environ.get('OMP_NUM_THREADS'))"],
        env={**os.environ, "GEIM_THREADS": "2"},
        capture_output=True, text=True,
    )
    assert out.stdout.strip() == "2"
