"""Certified past-time STL monitoring."""

from ._core import *  # noqa: F401,F403
from ._core import ValidationError, IoError, Error  # noqa: F401
