"""Exception types. All subclass ``ValueError`` so callers may catch broadly."""


class InvariantError(ValueError):
    """A structural invariant (unitarity, symmetry, invariance, ...) failed."""


class DomainError(ValueError):
    """An argument is outside the domain of the operation."""


class CapacityError(ValueError):
    """The requested Fock space is too large for dense matrices."""


class ParityError(ValueError):
    """An operator without definite parity was passed where one is required."""


class SeparationError(ValueError):
    """The vacuum is not separating for the generated algebra."""


class WedgeConditionError(ValueError):
    """The translation does not lie strictly inside the left wedge."""


class NonIntegrableDampingError(ValueError):
    """The analytically continued translation phase blows up on the grid."""


class GridResolutionError(ValueError):
    """Doubling the quadrature grid changed a Gram entry beyond tolerance."""
