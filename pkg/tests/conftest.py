"""Shared fixtures: a small explicit-grid setup that runs in milliseconds."""
from dataclasses import replace

import pytest

from iit import (
    GaussianSpec,
    SupportSpec,
    default_config,
    make_grid,
    save_config,
)


def tiny_config(**overrides):
    """Default physics shrunk onto hand-picked grids for fast tests.

    Narrow pointer branches and tight carriers keep every axis at a quarter
    spacing; the third axis is wide enough that coupling factors up to 2 on
    either leg stay clear of the overflow guard.
    """
    cfg = default_config()
    prep = replace(
        cfg.preparation,
        psi_plus=SupportSpec(-1.25, -0.75),
        psi_minus=SupportSpec(0.75, 1.25),
        phi0=GaussianSpec(0.0, 0.25),
    )
    grids = (
        make_grid(-2.0, 2.0, 17),
        make_grid(-10.0, 10.0, 81),
        make_grid(-28.0, 28.0, 225),
    )
    return replace(cfg, preparation=prep, beta2=0.25, grids=grids, **overrides)


@pytest.fixture()
def tiny():
    return tiny_config()


@pytest.fixture()
def tiny_path(tmp_path):
    path = tmp_path / "tiny.json"
    save_config(tiny_config(), str(path))
    return str(path)
