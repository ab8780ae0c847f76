"""Exception hierarchy shared by all modules."""


class ThinningError(Exception):
    """Base class for every error raised by this package."""


class DegenerateAperture(ThinningError):
    """The aperture holds only the central element, nothing to thin."""


class LengthMismatch(ThinningError, ValueError):
    pass


class AllZeroPattern(ThinningError):
    """Every sample of the pattern is zero, so it cannot be normalized."""


class NoSidelobes(ThinningError):
    pass


class BeamTooWide(ThinningError):
    """The main lobe never drops below half power inside the cut span."""


class ConfigInvalid(ThinningError, ValueError):
    """Configuration failed validation.

    ``problems`` maps dotted field names to a human readable message.
    """

    def __init__(self, problems):
        self.problems = dict(problems)
        lines = [f"{k}: {v}" for k, v in self.problems.items()]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))
