import json

import pytest

from bzl.config import ExperimentConfig, load, validate
from bzl.errors import ConfigParse


def test_defaults():
    cfg = validate({})
    assert cfg == ExperimentConfig()
    assert cfg.experiment == "clt-run" and cfg.weight["family"] == "gaussian"
    assert cfg.n == [50] and cfg.trials == 2000


@pytest.mark.parametrize(
    "raw,key",
    [
        ({"trials": 0}, "trials"),
        ({"trials": 99}, "trials"),
        ({"bogus": 1}, "bogus"),
        ({"weight": {"family": "nope"}}, "weight.family"),
        ({"weight": {"family": "gaussian", "p": 2}}, "weight.p"),
        ({"n": []}, "n"),
        ({"n": [10, -1]}, "n"),
        ({"seed": -3}, "seed"),
        ({"seed": 2**64}, "seed"),
        ({"experiment": "plot"}, "experiment"),
        ({"test_function": {"center": [0, 0], "radius": 0}}, "test_function.radius"),
        ({"test_function": {"centre": [0, 0]}}, "test_function"),
        ({"quadrature": {"R": -1}}, "quadrature.R"),
        ({"quadrature": {"n_radial": 1}}, "quadrature.n_radial"),
        ({"radii": [0.1, 0.2]}, "radii"),
        ({"R": 0.5}, "R"),
        ({"base_point": [1]}, "base_point"),
        ({"dual_route": "yes"}, "dual_route"),
    ],
)
def test_rejections_name_the_key(raw, key):
    with pytest.raises(ConfigParse) as exc:
        validate(raw)
    assert exc.value.key == key
    assert str(exc.value).startswith(key)


def test_load_toml_and_manifest(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        'experiment = "decay-fit"\nn = [25, 50]\nseed = 7\n'
        '[weight]\nfamily = "power"\np = 2\n[quadrature]\nn_radial = 80\n'
    )
    cfg = load(p)
    assert cfg.experiment == "decay-fit" and cfg.n == [25, 50] and cfg.seed == 7
    assert cfg.weight == {"family": "power", "p": 2}
    assert cfg.quadrature == {"R": "auto", "n_radial": 80, "n_angular": "auto"}
    m = tmp_path / "manifest.json"
    m.write_text(json.dumps({"resolved_config": cfg.to_dict(), "seed": 7}))
    assert load(m) == cfg


def test_load_parse_error(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("n = [1,\n")
    with pytest.raises(ConfigParse):
        load(p)
