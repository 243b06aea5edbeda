"""Exact bias-amplification analysis for discrete causal models."""

from ._zbias import *  # noqa: F401,F403
from ._zbias import __doc__  # noqa: F401
