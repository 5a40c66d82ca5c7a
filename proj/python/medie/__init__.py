"""Scheme-constrained medical information annotation and extraction.

The heavy lifting lives in the compiled ``medie._core`` extension.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
