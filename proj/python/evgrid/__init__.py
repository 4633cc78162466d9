"""Unbalanced four-wire feeder simulation under EV charging strategies."""

from pathlib import Path

from ._evgrid import *  # noqa: F401,F403
from ._evgrid import __version__  # noqa: F401


def data_dir() -> Path:
    """Directory holding the bundled feeder, fleet, zone plan and base curve."""
    return Path(__file__).resolve().parent / "data"


def shipped_config(**overrides):
    """Options for the shipped 19-bus feeder and 34-vehicle fleet."""
    d = data_dir()
    config = {"feeder": d / "paper19.txt", "fleet": d / "fleet34.txt"}
    config.update(overrides)
    if "penetration" in overrides:
        config.pop("fleet")
    return config
