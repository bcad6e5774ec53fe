"""Saddlepoint transition densities and MCMC for polynomial diffusions."""

from ._saddlefit import *  # noqa: F401,F403
from ._saddlefit import __doc__  # noqa: F401
