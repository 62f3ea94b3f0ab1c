"""Cramer-Rao search regions for RSS-assisted camera tracking."""

from ._core import *  # noqa: F401,F403
from ._core import CrbgateError  # noqa: F401
