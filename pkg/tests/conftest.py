import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from resplan import domain


@pytest.fixture
def tiny_world():
    """1x1 grid, one UAV: the degenerate boundary case."""
    return domain.World(
        grid=domain.Grid(1, 1),
        uavs=(domain.Uav("d1", (0, 0)),),
    )


@pytest.fixture
def photo_world():
    """3x3 grid, one UAV, one static target and one asset sharing a cell."""
    return domain.World(
        grid=domain.Grid(3, 3),
        uavs=(domain.Uav("d1", (0, 0)),),
        targets=(domain.Target("t1", ((2, 2),)),),
        assets=(domain.Asset("a1", (2, 2)),),
        horizon=8,
        mission_goals=(domain.Goal("photo", "t1"), domain.Goal("visit", "a1")),
    )


@pytest.fixture
def cargo_world():
    """2x2 grid with a pallet delivery task."""
    return domain.World(
        grid=domain.Grid(2, 2),
        uavs=(domain.Uav("d1", (0, 0)),),
        pallets=(domain.Pallet("r1", (1, 0)),),
        assets=(domain.Asset("a1", (1, 1), needs_pallet="r1"),),
        horizon=6,
        mission_goals=(domain.Goal("deliver", "a1"),),
    )


@pytest.fixture
def pair_world():
    """4x3 grid, two UAVs, two targets: exercises joint actions."""
    return domain.World(
        grid=domain.Grid(4, 3),
        uavs=(domain.Uav("d1", (0, 0)), domain.Uav("d2", (3, 2))),
        targets=(domain.Target("t1", ((1, 1),)),
                 domain.Target("t2", ((2, 2),))),
        horizon=6,
        mission_goals=(domain.Goal("photo", "t1"), domain.Goal("photo", "t2")),
    )
