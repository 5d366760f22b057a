"""Exact certification tools for K-Lorentzian forms over polyhedral cones.

Submodules:

``polycore``      sparse rational polynomials and symmetric matrices
``realroots``     Sturm-sequence real-rootedness
``cones``         finitely generated cones, exact LP certificates, projection
``tower``         derivative-tower cones ``K(f, v)``
``lorentz``       inertia, Lorentzian / log-concavity / hyperbolicity checks
``semipositive``  generating polynomials of matrices and semipositive cones
``gibbs``         Gibbs measures of polynomials with nonnegative coefficients
``levi``          cone-constrained linear evolution variational inequalities
``cli``           command-line front end
"""

from importlib.metadata import PackageNotFoundError, version

from .certificate import Certificate, Status
from .cones import GeneratedCone
from .polycore import Polynomial, SymMatrix
from .tower import ConeTower, MembershipClass

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

__all__ = [
    "Certificate",
    "ConeTower",
    "GeneratedCone",
    "MembershipClass",
    "Polynomial",
    "Status",
    "SymMatrix",
    "__version__",
]
