import pytest

from biaowc.config import REQUIRED, ConfigError, ScenarioConfig, load_config, parse_config

MINIMAL = """
room_length = 5   # metres
room_width = 5
room_height = 3
ap_rows = 4
ap_cols = 4
num_users = 10
"""


def test_minimal_parses_with_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.num_users == 10
    assert cfg.drops == ScenarioConfig().drops


@pytest.mark.parametrize("key", REQUIRED)
def test_missing_required_key_is_named(key):
    text = "\n".join(l for l in MINIMAL.splitlines() if not l.startswith(key))
    with pytest.raises(ConfigError, match=key):
        parse_config(text)


def test_unknown_and_malformed():
    with pytest.raises(ConfigError, match="bogus"):
        parse_config(MINIMAL + "bogus = 1\n")
    with pytest.raises(ConfigError, match="line"):
        parse_config(MINIMAL + "drops 5\n")
    with pytest.raises(ConfigError, match="drops"):
        parse_config(MINIMAL + "drops = five\n")


def test_validation_names_key():
    with pytest.raises(ConfigError, match="receive_height"):
        parse_config(MINIMAL + "receive_height = 3.5\n")
    with pytest.raises(ConfigError, match="nc_tiling"):
        parse_config(MINIMAL + "nc_tiling = 3x1\n")
    with pytest.raises(ConfigError, match="detector_modes"):
        parse_config(MINIMAL + "detector_modes = 9\n")
    with pytest.raises(ConfigError, match="room_width"):
        ScenarioConfig(room_width=-1.0)


def test_lists_tiling_and_overrides():
    cfg = parse_config(MINIMAL + "fig5_groups = 1-3, 7\nnc_tiling = 2x4\n", overrides={"seed": 9})
    assert cfg.fig5_groups == (1, 2, 3, 7)
    assert cfg.nc_tiling == (2, 4)
    assert cfg.seed == 9


def test_round_trip(tmp_path):
    cfg = ScenarioConfig(num_users=7, nc_tiling=(2, 2), noise_variance=1e-9)
    path = tmp_path / "c.cfg"
    path.write_text(cfg.to_text())
    assert load_config(path) == cfg
