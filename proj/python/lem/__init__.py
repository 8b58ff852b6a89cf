"""Python bindings for the lem pipeline core."""

from ._lem import *  # noqa: F401,F403
from ._lem import __version__  # noqa: F401
