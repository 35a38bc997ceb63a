"""Exception and warning types shared across the package."""


class BoundaryDecayWarning(UserWarning):
    """Sampled function does not decay below threshold at the grid edges.

    Quadratures and spectral operations silently assume decay; results are
    still returned but carry domain-truncation error.
    """


class SymmetryError(ValueError):
    """Conjugate-symmetry (reality) condition violated beyond tolerance."""


class PositivityError(ValueError):
    """Spectral data fails the admissibility conditions sigma(0) > 0 or
    4k^2 + sigma(k)sigma(-k) > 0."""


class GenericityError(RuntimeError):
    """Potential (or reconstructed potential) fails the genericity
    certificate: W(q,0) >= 0 or a sign change of W on the imaginary axis."""


class NearSingularSystemError(RuntimeError):
    """Nystrom matrix of the layer-stripping integral equation is too close
    to singular (condition number beyond the configured bound)."""


class OverlapMismatchError(RuntimeError):
    """Left/right half-line reconstructions disagree on the overlap interval
    beyond the configured gate."""


class BlowUpError(RuntimeError):
    """Time integrator aborted because the solution amplitude exploded."""


class UnsupportedOrderError(ValueError):
    """Requested expansion order is outside the implemented range."""


class JostOverflowError(RuntimeError):
    """Jost marching overflowed even after exponential rescaling."""
