"""Exception hierarchy shared by every module.

All errors derive from :class:`EquichanError`, itself a ``ValueError``, so the
CLI can map any of them to a validation exit code.
"""


class EquichanError(ValueError):
    """Base class for precondition and validation failures."""


class DimensionMismatch(EquichanError):
    pass


class NotHermitian(EquichanError):
    pass


class NotHermitianIntermediate(EquichanError):
    """The Kadison operator came out non-Hermitian (channel is not Hermiticity preserving)."""


class NotUnital(EquichanError):
    pass


class NonRealParameter(EquichanError):
    pass


class StructurallyInvalid(EquichanError):
    """Parameters fail the unital / Hermiticity-preserving preconditions of a test."""


class ParameterOutOfRange(EquichanError):
    pass


class UnsupportedDimensions(EquichanError):
    pass


class UnsupportedFamily(EquichanError):
    pass


class FamilyMismatch(EquichanError):
    pass


class SpecInvalid(EquichanError):
    pass
