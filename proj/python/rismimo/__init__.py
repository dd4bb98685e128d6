"""Python access to the rismimo antenna and link models."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, ConfigError, ComputeError  # noqa: F401
