"""Exception hierarchy.

Construction and validation failures double as ValueError so that sloppy
call sites still fail loudly; iterative failures (convergence, positivity,
certificates) get their own branch so callers can tell "the model is
wrong" apart from "the iteration gave up".
"""


class SelabError(Exception):
    """Base class for every error raised by this package."""


class GridError(SelabError, ValueError):
    """Degenerate grid: too few nodes, nonpositive extent, bad kind."""


class ShapeError(SelabError, ValueError):
    """Field does not live on the grid it is used with."""


class ModelError(SelabError, ValueError):
    """Inadmissible model data: parameter out of range, no constant c
    with f - K g < 0 near zero, malformed term."""


class RegimeError(ModelError):
    """Operation requires a sign regime the potential does not satisfy
    (including sign-indefinite potentials, which are unsupported)."""


class KellerOssermanError(ModelError):
    """The singular term is too strong near 0 (non-integrable), so no
    flat-start growth profile h with h'' = g(h), h(0) = h'(0) = 0 exists."""


class ConfigError(SelabError, ValueError):
    """Problem config file is malformed or carries unknown keys."""


class CollarError(SelabError):
    """Boundary collar is too wide (gradient of the eigenfunction is not
    bounded away from 0 on it) or otherwise unusable."""


class SingularEvaluationError(SelabError):
    """g would be evaluated at a nonpositive argument (u + eps <= 0)."""


class PositivityError(SelabError):
    """A field that must be positive in the interior is not."""


class DegenerateSolutionError(SelabError):
    """Iteration collapsed onto the zero field."""


class ConvergenceError(SelabError):
    """Iteration failed: stagnation, exhausted budget, or a singular
    linearization."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class OrderingError(SelabError, ValueError):
    """Claimed sub-solution exceeds the claimed super-solution."""


class CertificateError(SelabError):
    """Candidate sub-solution is not certified at the requested lambda;
    carries the smallest lambda at which the certificate holds."""

    def __init__(self, message, lambda_threshold=None):
        super().__init__(message)
        self.lambda_threshold = lambda_threshold
