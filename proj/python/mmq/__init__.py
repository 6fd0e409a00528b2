"""Macroscopic market-making solvers.

Optimal bid/ask quoting against deterministic order-flow paths: affine and
Riccati solvers for the linear fill model, a decoupling-field PDE for general
fill models, factor-driven coefficient PDEs with a Monte Carlo cross-check,
a discrete quoting lattice with its macroscopic limit, price-impact sweeps,
and liquidation-schedule experiments.  The heavy lifting lives in the
compiled extension ``mmq._mmq``; this package re-exports it.
"""

from ._mmq import *  # noqa: F401,F403
from ._mmq import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
