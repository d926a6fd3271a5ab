"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input violates a documented precondition (bad parameter, bad shape,
    non-PD matrix, rank-deficient design, ...)."""


class DegenerateLikelihoodError(RuntimeError):
    """The likelihood carries no usable information about the parameter
    (constant over the search interval, or a quadratic form collapsed)."""


class ExperimentError(RuntimeError):
    """A Monte Carlo experiment could not produce a trustworthy result,
    e.g. too many degenerate replicates."""
