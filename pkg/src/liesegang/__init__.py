"""Numerical toolkit for ring patterns of a relay-hysteresis precipitation model.

The library solves, end to end, the scalar memory equation

    omega(x) = Gamma - x^2 * integral_0^1 K(theta) H(omega(x * theta)) dtheta

for weakly degenerate kernels K: the self-similar reactant profile and its
eigenvalue pair, the induced memory kernel, band-by-band ring patterns with
breakdown classification, a constructive kernel with degenerate breakdown,
completed-relay (extended) solutions past breakdown, and the companion
finite-difference scheme in parabolic similarity variables.
"""

__version__ = "0.1.0"

from . import degenerate, extended, kernel, pde, profile, rings, specfun  # noqa: F401
from .errors import LiesegangError  # noqa: F401
from .kernel import Kernel, build_kernel_table, synthetic_kernel  # noqa: F401
from .profile import ModelParams, Profile, solve_kappa  # noqa: F401
from .rings import RingPattern, solve_pattern  # noqa: F401
