"""Exception types raised across the package."""


class TwoStateError(Exception):
    """Base class for all errors raised by twostate."""


class DimensionMismatch(TwoStateError, ValueError):
    pass


class NotHermitian(TwoStateError, ValueError):
    pass


class NotUnitary(TwoStateError, ValueError):
    pass


class AllAmplitudesZero(TwoStateError, ValueError):
    """Post-selection is unreachable through every measurement outcome."""


class OrthogonalSelection(TwoStateError, ValueError):
    """Pre- and post-selection are (numerically) orthogonal; the weak value diverges."""


class IncompleteBasis(TwoStateError, ValueError):
    pass


class ZeroModulus(TwoStateError, ValueError):
    """Phase of a function is undefined where its modulus vanishes."""
