import json
from dataclasses import replace

import numpy as np
import pytest

from iit import (
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    save_config,
    validate,
)
from iit.config import complex_from_json, complex_to_json, make_manifest
from iit.errors import ConfigError


def test_default_config_passes_validation():
    assert validate(default_config()) == ()


def test_dict_round_trip_is_lossless(tiny):
    d = config_to_dict(tiny)
    assert config_to_dict(config_from_dict(d)) == d


def test_file_round_trip(tmp_path, tiny):
    path = tmp_path / "cfg.json"
    save_config(tiny, str(path))
    loaded = load_config(str(path))
    assert config_to_dict(loaded) == config_to_dict(tiny)
    # files end with a newline and parse as plain JSON
    text = path.read_text()
    assert text.endswith("\n")
    json.loads(text)


def test_unknown_keys_are_rejected():
    d = config_to_dict(default_config())
    d["surprise"] = 1
    with pytest.raises(ConfigError):
        config_from_dict(d)
    d2 = config_to_dict(default_config())
    d2["schedule"]["surprise"] = 1
    with pytest.raises(ConfigError):
        config_from_dict(d2)


def test_schema_version_must_match():
    d = config_to_dict(default_config())
    d["schema_version"] = 99
    with pytest.raises(ConfigError):
        config_from_dict(d)


def test_missing_required_block():
    d = config_to_dict(default_config())
    del d["preparation"]
    with pytest.raises(ConfigError):
        config_from_dict(d)


def test_numbers_must_not_be_booleans():
    d = config_to_dict(default_config())
    d["carol"]["beta2"] = True
    with pytest.raises(ConfigError):
        config_from_dict(d)


def test_convention_strings_are_checked():
    d = config_to_dict(default_config())
    d["gamma_convention"] = "bogus"
    with pytest.raises(ConfigError):
        config_from_dict(d)


def test_grid_block_round_trip(tiny):
    d = config_to_dict(tiny)
    assert len(d["grids"]) == 3
    back = config_from_dict(d)
    assert back.grids is not None
    assert back.grids[0].n == 17


def test_bad_grid_descriptor_is_a_config_error(tiny):
    d = config_to_dict(tiny)
    d["grids"][0]["n"] = 4  # below the minimum point count
    with pytest.raises(ConfigError):
        config_from_dict(d)
    d = config_to_dict(tiny)
    d["grids"] = d["grids"][:2]  # must be exactly three axes
    with pytest.raises(ConfigError):
        config_from_dict(d)


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.json"))


def test_malformed_json_is_a_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_complex_json_forms():
    assert complex_to_json(1.5 - 2.0j) == [1.5, -2.0]
    assert complex_from_json([1.5, -2.0]) == 1.5 - 2.0j
    assert complex_from_json(0.25) == 0.25 + 0j
    with pytest.raises(ConfigError):
        complex_from_json(True)
    with pytest.raises(ConfigError):
        complex_from_json([1.0])


def test_observable_survives_the_round_trip(tiny):
    m = np.array([[0.5, 0.25 - 0.1j], [0.25 + 0.1j, -0.5]])
    cfg = replace(tiny, observable=m)
    back = config_from_dict(config_to_dict(cfg))
    assert np.array_equal(back.observable, cfg.observable)


def test_manifest_fields():
    man = make_manifest("compact", seed=11)
    assert man["profile"] == "compact"
    assert man["seed"] == 11
    assert man["tool_version"]
    assert man["created_utc"].endswith("+00:00")
