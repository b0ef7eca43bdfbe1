"""Exception types shared across the library."""


class LiesegangError(Exception):
    """Base class for all library errors."""


class InvalidParameter(LiesegangError):
    """An argument violates a documented precondition."""


class NonConvergence(LiesegangError):
    """An iterative evaluation ran out of its term or iteration budget."""


class NoRoot(LiesegangError):
    """Root bracketing failed; the solvability condition is violated."""


class QuadratureFailure(LiesegangError):
    """Numerical integration could not meet the requested tolerance."""


class SingularAtZero(LiesegangError):
    """Kernel density requested at theta = 0 where it diverges."""


class AmbiguousContinuation(LiesegangError):
    """Both sign hypotheses are self-consistent past a zero."""


class InsufficientData(LiesegangError):
    """Not enough recorded widths to extrapolate an accumulation point."""


class TangentialTemplate(LiesegangError):
    """Template solution has a non-transversal second zero."""


class BridgeInfeasible(LiesegangError):
    """The monotone gap bridge cannot meet its constraints at this epsilon."""


class PositivityViolation(LiesegangError):
    """A constructed kernel piece failed its positivity check."""


class EpsilonNotFound(LiesegangError):
    """No admissible gap shift found within the scan budget."""


class TailPowerNotFound(LiesegangError):
    """No admissible head tail power found within the search budget."""


class LambdaOutOfRange(LiesegangError):
    """Spline mixing weight fell outside (0, 1)."""


class VerificationFailed(LiesegangError):
    """A constructed object failed one of its defining identities."""


class PicardStall(LiesegangError):
    """Per-node fixed-point iteration failed to contract."""


class SingularPanel(LiesegangError):
    """A first-kind panel coefficient is too small to divide by."""
