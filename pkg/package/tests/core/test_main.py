import json

import pytest
from SteinFlow.__main__ import (
    EXIT_CONFIG_ERROR,
    EXIT_NUMERIC_ERROR,
    EXIT_SUCCESS,
    run,
)
from SteinFlow.core.parsing import ArgsFactory, BasisArgs, PresetsArgs, RunArgs, parser


def write_config(path, **entries):
    data = {
        "name": "cli",
        "method": "svgd",
        "particles": {"n": 10},
        "n_iters": 5,
        **entries,
    }
    path.write_text(json.dumps(data))
    return path


class TestParser:
    def test_run(self):
        args = parser.parse_args(["run", "config.json", "--seed", "3"])
        assert args.option == "run"
        assert args.seed == 3
        assert args.out is None

    def test_option_required(self):
        with pytest.raises(SystemExit):
            parser.parse_args([])

    @pytest.mark.parametrize(
        "argv,cls",
        [
            (["run", "config.json"], RunArgs),
            (["presets"], PresetsArgs),
            (["basis", "build", "config.json"], BasisArgs),
        ],
    )
    def test_factory(self, argv, cls):
        args = ArgsFactory.init_subclass(parser.parse_args(argv))
        assert isinstance(args, cls)

    def test_factory_from_dict(self):
        args = ArgsFactory.init_subclass(
            {"option": "run", "config": "x.json", "out": "o", "seed": None}
        )
        assert args.out == "o"
        assert args.seed is None

    def test_unknown_option(self):
        with pytest.raises(KeyError):
            ArgsFactory.init_subclass({"option": "plot"})


class TestExitCodes:
    def test_success(self, tmp_path):
        config = write_config(tmp_path / "config.json")
        out = tmp_path / "out"
        assert run(["run", str(config), "--out", str(out), "--seed", "2"]) == EXIT_SUCCESS
        written = json.loads((out / "config.json").read_text())
        assert written["seed"] == 2
        assert written["output"] == str(out)

    def test_presets(self):
        assert run(["presets"]) == EXIT_SUCCESS

    def test_unknown_key(self, tmp_path):
        config = write_config(tmp_path / "config.json", stepsize=0.1)
        assert run(["run", str(config)]) == EXIT_CONFIG_ERROR

    def test_unknown_preset(self):
        assert run(["run", "no-such-preset"]) == EXIT_CONFIG_ERROR

    def test_basis_without_fd(self, tmp_path):
        config = write_config(tmp_path / "config.json")
        assert run(["basis", "build", str(config)]) == EXIT_CONFIG_ERROR

    def test_numeric_abort(self, tmp_path):
        config = write_config(tmp_path / "config.json", schedule={"h0": 1e6})
        out = tmp_path / "out"
        assert run(["run", str(config), "--out", str(out)]) == EXIT_NUMERIC_ERROR
        manifest = (out / "manifest.yaml").read_text()
        assert "abort" in manifest
