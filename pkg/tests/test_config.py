import math
from pathlib import Path

import pytest

from foldcycle.config import config_from_dict, load_config, parse_eps_grid
from foldcycle.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_defaults():
    cfg = load_config(None)
    assert cfg.system.regime.alpha == 2 and cfg.system.regime.eps == 0.01
    assert cfg.section.R == 0.1 and not cfg.system.has_remainders


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.toml")))
def test_shipped_configs_load(name):
    cfg = load_config(str(CONFIGS / name))
    assert cfg.path.endswith(name)


def test_full_table():
    cfg = config_from_dict({
        "coefficients": {"c": {"mean": 2.0, "harmonics": [[1, 0.0, 1.0]]}},
        "regime": {"alpha": 3, "eps": 0.02},
        "sections": {"R": 0.12},
        "remainders": {"fast": [{"p": 3, "mean": 0.2}], "slow": [{"q": 1, "mean": 0.1}]},
        "integrator": {"rtol": 1e-9},
        "scan": {"eps_grid": "0.01:0.04:3", "entry_r": -0.1},
    })
    assert cfg.system.c(0.25) == pytest.approx(3.0)
    assert cfg.system.regime.alpha == 3
    assert cfg.section.R == 0.12 and cfg.integrator.rtol == 1e-9
    assert len(cfg.system.rem_r.terms) == 1 and cfg.system.rem_y.terms[0].q == 1
    assert cfg.scan_eps == pytest.approx([0.01, 0.02, 0.04])
    assert cfg.entry_r == -0.1


@pytest.mark.parametrize("data,needle", [
    ({"regime": {"alpha": 2, "epsilon": 0.1}}, "regime.epsilon"),
    ({"coefficients": {"d": {"mean": 1.0}}}, "coefficients.d"),
    ({"remainders": {"fast": [{"p": 3, "power": 1}]}}, "remainders.fast[0].power"),
    ({"lienard": {"A": {"amp": 1}}}, "lienard.A.amp"),
    ({"bogus": {}}, "bogus"),
])
def test_unknown_keys_are_named(data, needle):
    with pytest.raises(ConfigError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        config_from_dict(data)


@pytest.mark.parametrize("data", [
    {"regime": {"alpha": 0}},
    {"regime": {"eps": "small"}},
    {"regime": {"alpha": 2.5}},
    {"remainders": {"fast": [{"p": 2}]}},
    {"remainders": {"slow": [{"p": -1}]}},
    {"coefficients": {"c": {"mean": -1.0}}},
    {"coefficients": {"a": {"harmonics": [[1, 0.0]]}}},
    {"sections": {"beta_minus": 0.1}},
    {"scan": {"eps": [0.1], "eps_grid": "0.1:0.2:2"}},
    {"scan": {"eps": []}},
])
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_eps_grid():
    grid = parse_eps_grid("0.005:0.04:7")
    assert len(grid) == 7 and grid[0] == pytest.approx(0.005) and grid[-1] == pytest.approx(0.04)
    ratios = [b / a for a, b in zip(grid, grid[1:])]
    assert max(ratios) - min(ratios) < 1e-12
    assert parse_eps_grid("0.01:0.02:1") == [0.01]
    for bad in ("0.1:0.2", "a:b:3", "0:0.1:3", "0.1:0.2:0"):
        with pytest.raises(ConfigError):
            parse_eps_grid(bad)


def test_toml_errors_carry_location(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[regime]\nalpha = = 2\n")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(str(p))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.toml"))
