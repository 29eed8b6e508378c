"""Self-similar solutions of rotationally symmetric mean curvature flow.

Shooting for the discrete shrinker family and the continuous expander
family, matched-asymptotics constants, reduced front-tracking flow, and
the monotonicity / intersection-counting diagnostics that certify them.
"""

from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
