"""Content-push policy toolkit for an energy-harvesting small cell."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
