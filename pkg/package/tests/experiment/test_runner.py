import numpy as np
import pandas as pd
import pytest
import yaml
from SteinFlow.analysis.diagnostics import fit_decay_rate
from SteinFlow.core.errors import ConfigError
from SteinFlow.experiment.config import parse_config
from SteinFlow.experiment.presets import load_preset
from SteinFlow.experiment.runner import run_experiment, warm_basis_cache

GAUSSIAN = {
    "type": "gaussian_mixture",
    "weights": [1.0],
    "means": [0.0],
    "variances": [1.0],
}

PARTICLE_FILES = {
    "config.json",
    "positions.csv",
    "diagnostics.csv",
    "plot.dat",
    "plot.gp",
    "manifest.yaml",
}

FLOW_FILES = {
    "config.json",
    "densities.csv",
    "divergences.csv",
    "bounds.csv",
    "plot.dat",
    "plot.gp",
    "manifest.yaml",
}


@pytest.fixture
def svgd_config():
    return parse_config(
        {
            "name": "small-svgd",
            "method": "svgd",
            "target": {
                "type": "gaussian_mixture",
                "weights": [0.5, 0.5],
                "means": [-2.0, 2.0],
                "variances": [1.0, 1.0],
            },
            "grid": {"lower": -10.0, "upper": 10.0, "n": 129},
            "particles": {"n": 20, "lower": -1.0, "upper": 1.0},
            "schedule": {"h0": 0.05},
            "n_iters": 30,
            "snapshots": {"every": 10},
            "seed": 7,
        }
    )


@pytest.fixture
def lawgd_config(tmp_path):
    return parse_config(
        {
            "name": "small-lawgd",
            "method": "lawgd",
            "target": GAUSSIAN,
            "grid": {"lower": -8.0, "upper": 8.0, "n": 129},
            "kernel": {
                "basis": "fd",
                "k": 40,
                "basis_cache": str(tmp_path / "cache"),
            },
            "particles": {"n": 20, "lower": 1.0, "upper": 2.0},
            "schedule": {"h0": 0.05},
            "n_iters": 20,
            "seed": 11,
        }
    )


def flow_config(method, **kernel):
    return parse_config(
        {
            "name": f"small-{method}",
            "method": method,
            "target": GAUSSIAN,
            "initial": {**GAUSSIAN, "means": [1.0]},
            "grid": {"lower": -6.0, "upper": 6.0, "n": 65},
            "kernel": kernel,
            "T": 0.2,
            "dt": 1e-3,
            "record_every": 0.05,
            "snapshots": {"every": 2},
        }
    )


class TestParticleRuns:
    def test_outputs(self, svgd_config, tmp_path):
        out = tmp_path / "run"
        manifest = run_experiment(svgd_config, out)
        assert set(manifest.files) == PARTICLE_FILES
        assert manifest.validate(out)
        assert (out / "small-svgd.log").is_file()
        positions = pd.read_csv(out / "positions.csv")
        assert list(positions.columns) == ["iteration", "particle", "x0"]
        assert sorted(positions["iteration"].unique()) == [0, 10, 20, 30]
        assert len(positions) == 4 * 20 == manifest.files["positions.csv"]
        diagnostics = pd.read_csv(out / "diagnostics.csv")
        assert list(diagnostics.columns) == ["iteration", "kl", "chi2", "w1", "clamps"]
        assert np.all(np.isfinite(diagnostics[["kl", "chi2", "w1"]]))
        assert manifest.summary["iterations"] == 30
        assert len(manifest.summary["mode_masses"]) == 2
        assert manifest.events["abort"] is None

    def test_manifest_file(self, svgd_config, tmp_path):
        manifest = run_experiment(svgd_config, tmp_path)
        data = yaml.safe_load((tmp_path / "manifest.yaml").read_text())
        assert data["config"] == svgd_config.to_dict()
        assert data["summary"]["iterations"] == 30
        assert data["version"] == manifest.version
        assert "positions.csv" in data["files"]

    def test_config_written(self, svgd_config, tmp_path):
        run_experiment(svgd_config, tmp_path)
        assert parse_config(tmp_path / "config.json").to_dict() == svgd_config.to_dict()

    def test_deterministic(self, svgd_config, tmp_path):
        run_experiment(svgd_config, tmp_path / "a")
        run_experiment(svgd_config, tmp_path / "b")
        for name in ("positions.csv", "diagnostics.csv", "plot.dat"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_seed_changes_positions(self, svgd_config, tmp_path):
        run_experiment(svgd_config, tmp_path / "a")
        run_experiment(svgd_config.override(seed=8), tmp_path / "b")
        assert (tmp_path / "a" / "positions.csv").read_bytes() != (
            tmp_path / "b" / "positions.csv"
        ).read_bytes()

    def test_missing_file_invalidates(self, svgd_config, tmp_path):
        manifest = run_experiment(svgd_config, tmp_path)
        (tmp_path / "plot.gp").unlink()
        assert not manifest.validate(tmp_path)

    def test_basis_cache_reuse(self, lawgd_config, tmp_path):
        cache = tmp_path / "cache"
        run_experiment(lawgd_config, tmp_path / "cold")
        assert len(list(cache.glob("*.zarr"))) == 1
        run_experiment(lawgd_config, tmp_path / "warm")
        assert (tmp_path / "cold" / "positions.csv").read_bytes() == (
            tmp_path / "warm" / "positions.csv"
        ).read_bytes()

    def test_warm_basis_cache(self, lawgd_config, tmp_path):
        path = warm_basis_cache(lawgd_config)
        assert path.parent == tmp_path / "cache"
        assert path.suffix == ".zarr"
        assert path.exists()

    def test_warm_needs_cache_dir(self, lawgd_config):
        config = lawgd_config.override(
            kernel={**lawgd_config.kernel, "basis_cache": None}
        )
        with pytest.raises(ConfigError) as e:
            warm_basis_cache(config)
        assert e.value.path == "kernel.basis_cache"

    def test_warm_needs_fd_basis(self, svgd_config):
        with pytest.raises(ConfigError) as e:
            warm_basis_cache(svgd_config)
        assert e.value.path == "kernel.basis"


class TestFlowRuns:
    @pytest.mark.parametrize(
        "method,kernel", [("csf_flow", {}), ("lawgd_flow", {"basis": "fd"})]
    )
    def test_outputs(self, method, kernel, tmp_path):
        manifest = run_experiment(flow_config(method, **kernel), tmp_path)
        assert set(manifest.files) == FLOW_FILES
        assert manifest.validate(tmp_path)
        divergences = pd.read_csv(tmp_path / "divergences.csv")
        assert list(divergences.columns) == ["t", "kl", "chi2"]
        np.testing.assert_allclose(divergences["t"], [0.0, 0.05, 0.1, 0.15, 0.2])
        assert np.all(np.diff(divergences["kl"]) < 0)
        densities = pd.read_csv(tmp_path / "densities.csv")
        assert list(densities.columns) == ["t", "node_index", "x", "mu"]
        assert set(densities["node_index"]) == set(range(65))
        assert manifest.summary["T"] == pytest.approx(0.2)
        assert manifest.summary["substeps"] > 0
        bounds = pd.read_csv(tmp_path / "bounds.csv")
        assert not bounds.empty

    def test_deterministic(self, tmp_path):
        config = flow_config("csf_flow")
        run_experiment(config, tmp_path / "a")
        run_experiment(config, tmp_path / "b")
        for name in ("densities.csv", "divergences.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()


@pytest.mark.slow
class TestPresetRuns:
    def test_gauss2d_mix(self, tmp_path):
        config = parse_config(load_preset("gauss2d-mix"))
        manifest = run_experiment(config, tmp_path)
        masses = manifest.summary["mode_masses"]
        assert masses[0] == pytest.approx(0.5, abs=0.2)
        assert sum(masses) == pytest.approx(1.0)
        positions = pd.read_csv(tmp_path / "positions.csv")
        assert list(positions.columns) == ["iteration", "particle", "x0", "x1"]

    def test_csf_theorem_check(self, tmp_path):
        config = parse_config(load_preset("csf-theorem-check"))
        manifest = run_experiment(config, tmp_path)
        assert manifest.summary["kl_rate"] is not None
        divergences = pd.read_csv(tmp_path / "divergences.csv")
        fit = fit_decay_rate(divergences[["t", "kl"]], window=(1e-4, 1e-2))
        assert fit.rate <= -1.7
        bounds = pd.read_csv(tmp_path / "bounds.csv")
        lsi = bounds[bounds["bound"] == "csf_chi2_lsi"]
        assert len(lsi) > 0 and lsi["satisfied"].all()

    @pytest.mark.parametrize("name", ["gaussmix3-svgd", "gaussmix3-lawgd"])
    def test_gaussmix3(self, name, tmp_path):
        config = parse_config(load_preset(name))
        manifest = run_experiment(config, tmp_path)
        assert manifest.events["abort"] is None
        assert set(manifest.files) == PARTICLE_FILES
        assert manifest.validate(tmp_path)
        assert manifest.summary["iterations"] == 5000
        positions = pd.read_csv(tmp_path / "positions.csv")
        assert sorted(positions["iteration"].unique()) == list(range(0, 5001, 500))
        assert len(positions) == 11 * 200
        assert len(manifest.summary["mode_masses"]) == 3
        assert sum(manifest.summary["mode_masses"]) == pytest.approx(1.0)
