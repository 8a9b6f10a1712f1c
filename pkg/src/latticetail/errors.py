"""Exception types raised across the package."""


class LatticeTailError(ValueError):
    pass


class RankDeficient(LatticeTailError):
    """Basis matrix is numerically rank deficient."""


class InvalidLayer(LatticeTailError):
    pass


class InvalidRadius(LatticeTailError):
    pass


class TooLarge(LatticeTailError):
    """Brute-force enumeration would exceed its size guard."""


class EmptySamples(LatticeTailError):
    pass
