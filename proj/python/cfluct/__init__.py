"""Process matrices, capacity measures and causal-order fluctuation diagnostics."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
