"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain of the operation."""


class UndefinedDivergenceError(ArithmeticError):
    """A divergence (or a bound built on it) is mathematically undefined.

    Raised for the KL divergence against a degenerate (zero-variance) prior
    and for the Bernoulli kl on the boundary.  Serialized as ``"undefined"``.
    """


class PreconditionError(ValueError):
    """A stated precondition of a closed-form bound does not hold."""


class UnsupportedSizeError(ValueError):
    """Brute-force oracle called on an instance that is too large."""
