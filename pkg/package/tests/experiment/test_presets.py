import pytest
from SteinFlow.experiment.config import parse_config
from SteinFlow.experiment.presets import list_presets, load_preset, preset_names

REQUIRED = [
    "csf-theorem-check",
    "gauss2d-mix",
    "gauss2d-svgd",
    "gaussmix3-lawgd",
    "gaussmix3-svgd",
    "hermite-gaussian",
    "lawgd-flow-check",
]


class TestPresets:
    def test_names(self):
        assert set(REQUIRED) <= set(preset_names())
        assert preset_names() == sorted(preset_names())

    def test_list_has_descriptions(self):
        presets = list_presets()
        for name in REQUIRED:
            assert presets[name]

    @pytest.mark.parametrize("name", REQUIRED)
    def test_parses(self, name):
        config = parse_config(load_preset(name))
        assert config.name == name
        assert config.output == name

    def test_case_insensitive(self):
        assert load_preset("Hermite-Gaussian") == load_preset("hermite-gaussian")

    def test_unknown(self):
        with pytest.raises(KeyError, match="gaussmix3-svgd"):
            load_preset("no-such-preset")

    def test_hermite_gaussian(self):
        config = parse_config(load_preset("hermite-gaussian"))
        assert config.method == "lawgd"
        assert config.n_iters == 2000
        assert config.kernel["basis"] == "hermite"
        assert config.kernel["k"] == 150
        assert [config.particles["lower"], config.particles["upper"]] == [2.5, 4.5]

    def test_gaussmix3_lawgd(self):
        config = parse_config(load_preset("gaussmix3-lawgd"))
        assert config.grid.spec() == {"lower": -14.0, "upper": 14.0, "n": 256}
        assert config.kernel["basis"] == "fd"
        assert config.kernel["k"] is None
        assert config.target.spec.n_components == 3

    @pytest.mark.parametrize("name", ["gauss2d-mix", "gauss2d-svgd"])
    def test_gauss2d(self, name):
        config = parse_config(load_preset(name))
        assert config.grid.dimension == 2
        assert config.grid.shape == (128, 128)
        assert config.particles["n"] == 50

    @pytest.mark.parametrize(
        "name,method", [("csf-theorem-check", "csf_flow"), ("lawgd-flow-check", "lawgd_flow")]
    )
    def test_flows(self, name, method):
        config = parse_config(load_preset(name))
        assert config.method == method
        assert config.is_flow
        assert config.initial is not None
