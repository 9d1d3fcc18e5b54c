"""Indonesian hate-speech benchmark toolkit (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    DataError,
    HatebenchError,
    IoError,
    RunConfig,
    TrainingError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
