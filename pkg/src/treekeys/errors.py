"""Exception types shared across the package."""


class PolicyError(ValueError):
    """Malformed or inconsistent policy input (documents, labels, order, trees)."""


class CycleError(PolicyError):
    """The supplied order relation contains a directed cycle."""


class UnknownLabelError(PolicyError):
    """A label was referenced that is not an element of the poset."""


class AuthorizationError(Exception):
    """The requested label is not dominated by the holder's label."""


class VerificationError(Exception):
    """An integrity or self-verification check failed."""
