"""Spectral analysis of the Laplacian on waveguide-shaped surfaces.

The surface is built by translating a closed unit-speed cross-section
curve along a reference curve (x, f(x), g(x)).  The package computes:

- the essential-spectrum threshold from a periodic transverse operator
  (:mod:`wgsurf.transverse`),
- the one-dimensional effective potential and broken-corner coupling
  constants that decide between the known discrete-spectrum criteria
  (:mod:`wgsurf.potential`),
- direct 2-D eigenvalues of the (gauge-transformed) Laplacian on
  truncated strips (:mod:`wgsurf.strip2d`),
- explicit variational certificates for eigenvalues below the threshold
  (:mod:`wgsurf.certificates`),

with a scenario-driven CLI (:mod:`wgsurf.cli`) on top.
"""

__version__ = "0.1.0"

from .errors import WgsurfError
from .geometry import (
    CrossSection,
    ProfileKind,
    ReferenceProfile,
    broken_profile,
    constant_slope_profile,
    flat_profile,
    make_circle_cross_section,
    make_tangent_angle_cross_section,
    tanh_bump_profile,
    tanh_profile,
)
from .transverse import (
    TransverseOperatorSpec,
    band_sweep,
    broken_threshold,
    essential_threshold,
    transverse_eigs,
)
from .potential import (
    Verdict,
    classify,
    compute_broken_constants,
    compute_profile,
    integral_V,
)
from .strip2d import (
    StripGrid,
    assemble_form,
    dense_eigs,
    find_bound_states,
    lowest_eigs,
)
from .certificates import (
    CertificateResult,
    certify_broken,
    certify_cross_term,
    certify_int_v,
)

__all__ = [
    "__version__",
    "WgsurfError",
    "CrossSection",
    "ProfileKind",
    "ReferenceProfile",
    "broken_profile",
    "constant_slope_profile",
    "flat_profile",
    "make_circle_cross_section",
    "make_tangent_angle_cross_section",
    "tanh_bump_profile",
    "tanh_profile",
    "TransverseOperatorSpec",
    "band_sweep",
    "broken_threshold",
    "essential_threshold",
    "transverse_eigs",
    "Verdict",
    "classify",
    "compute_broken_constants",
    "compute_profile",
    "integral_V",
    "StripGrid",
    "assemble_form",
    "dense_eigs",
    "find_bound_states",
    "lowest_eigs",
    "CertificateResult",
    "certify_broken",
    "certify_cross_term",
    "certify_int_v",
]
