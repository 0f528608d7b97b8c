"""speclab: desk-scale numerical laboratory for spectral asymptotics.

Exact spectra on the flat torus T^n and the round sphere S^n make every
spectral-projector quantity a finite sum, so the classical one-term
asymptotics (local Weyl law, off-diagonal kernel limits, norm-growth
exponents, nodal geometry) can be measured rather than merely cited.
"""

from .analytic import (
    MultiIndex,
    PhiValue,
    QuadratureRule,
    ball_moment,
    deriv_weyl_constant,
    double_factorial,
    epsilon_exponent,
    gamma,
    gauss_legendre_rule,
    gegenbauer,
    gegenbauer_zeros,
    phi_kernel,
    phi_kernel_bessel,
    phi_kernel_zero,
    weyl_constant,
)
from .errors import (
    ConfigError,
    DomainError,
    NumericError,
    RangeError,
    ResourceLimitError,
    SpecLabError,
)

__version__ = "0.1.0"
