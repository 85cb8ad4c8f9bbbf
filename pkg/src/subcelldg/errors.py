"""Exception types raised across the package."""


class SubcellDGError(Exception):
    """Base class for all package errors."""


class ParseError(SubcellDGError):
    pass


class NonConforming(SubcellDGError):
    pass


class OrientationError(SubcellDGError):
    pass


class OrientationWarning(UserWarning):
    """Emitted when clockwise triangles are reoriented during mesh loading."""


class DegenerateGeometry(SubcellDGError):
    pass


class UnsupportedOrder(SubcellDGError):
    pass


class DegenerateSubcell(SubcellDGError):
    pass


class NonMatchingSubfaces(SubcellDGError):
    pass


class SingularProjection(SubcellDGError):
    pass


class DisconnectedGraph(SubcellDGError):
    pass


class IllConditioned(SubcellDGError):
    pass


class InvalidNodes(SubcellDGError):
    pass


class NonPhysicalState(SubcellDGError):
    pass


class CompatibilityViolated(SubcellDGError):
    pass


class CorrectionDiverged(SubcellDGError):
    pass


class IoError(SubcellDGError):
    """Raised when an output file cannot be written."""
