"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition or type invariant."""


class PoleInBallError(InvalidInputError):
    """Stereographic projection pole lies inside or on a ball."""


class EmptyPackingError(ValueError):
    """An operation needs at least one ball."""


class OverlapError(RuntimeError):
    """Two balls overlap beyond tolerance while building a nerve."""

    def __init__(self, i: int, j: int, gap: float):
        self.pair = (i, j)
        self.gap = gap
        super().__init__(f"balls {i} and {j} overlap (gap {gap:.3e})")


class PropertyViolationError(RuntimeError):
    """A structural property of the 120-ball packing failed to verify."""

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"property check '{check}' failed" + (f": {detail}" if detail else ""))


class ConstructionError(RuntimeError):
    """Two routes to the same constructed quantity disagree."""


class LayeringError(ConstructionError):
    """Layers of a stacked packing overlap or do not meet as expected."""

    def __init__(self, message: str, layers: tuple[int, int] | None = None):
        self.layers = layers
        super().__init__(message)


class ClaimFailureError(ConstructionError):
    """The separation claim for the inversion sphere does not hold."""


class CertificateError(RuntimeError):
    """Shell occupancy exceeds one; the input is not a valid packing."""


class PackingFileError(ValueError):
    """Malformed packing file."""


class UnsupportedChartError(PackingFileError):
    pass
