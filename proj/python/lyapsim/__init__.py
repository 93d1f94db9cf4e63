"""Lyapunov feedback control of closed quantum systems."""

from ._lyapsim import *  # noqa: F401,F403
from ._lyapsim import __version__  # noqa: F401
