"""Mass-constrained standing waves and split-step dynamics for the planar
Schrodinger-Poisson system with a logarithmic interaction and an
exponential-critical nonlinearity.

Modules, bottom up: :mod:`grid`, :mod:`logkernel`, :mod:`nonlinearity`,
:mod:`functional`, :mod:`groundstate`, :mod:`dynamics`, :mod:`verify` and the
command-line front end :mod:`cli`.
"""

__version__ = "0.1.0"

from .grid import Field, Grid2D, build_grid  # noqa: E402
from .nonlinearity import NonlinearitySpec  # noqa: E402

__all__ = ["Field", "Grid2D", "NonlinearitySpec", "build_grid", "__version__"]
