"""Exception types raised across the package."""


class PackcertError(Exception):
    """Base class for all package errors."""


class DegenerateInput(PackcertError, ValueError):
    """Geometric input violates an affine-independence precondition."""


class ContainerExceedsGeneration(PackcertError, ValueError):
    """The container ball reaches beyond the region where centers were generated."""


class BoundaryVertex(PackcertError, ValueError):
    """A per-vertex quantity was requested for a center too close to the generation boundary."""


class ContainmentViolation(PackcertError):
    """A Voronoi cell is not contained in the radius-2 ball around its owner.

    For a saturated packing this cannot happen, so the error signals an
    unsaturated region of the input.
    """


class NoSignChange(PackcertError, ArithmeticError):
    """Bisection bracket does not straddle a root."""


class PackingValidationError(PackcertError, ValueError):
    """A packing file or array violates the packing invariants or schema."""
